use serde::{Serialize, Serializer};

use super::lattice::Echelon;
use super::snf::invariant_factors_of_matrix;
use super::{Element, FiniteAbelianGroup, GroupError};

/// A subgroup stored as the reduced echelon basis of its lattice lift.
///
/// Two generating sets of the same subgroup produce identical bases, so
/// equality of subgroups is equality of these matrices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subgroup {
    parent: FiniteAbelianGroup,
    basis: Vec<Vec<u64>>,
    order: usize,
}

impl Serialize for Subgroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            parent: &'a FiniteAbelianGroup,
            generators: &'a [Vec<u64>],
            order: usize,
        }
        Repr {
            parent: &self.parent,
            generators: &self.basis,
            order: self.order,
        }
        .serialize(s)
    }
}

impl Subgroup {
    pub(crate) fn from_echelon(parent: &FiniteAbelianGroup, mut e: Echelon) -> Self {
        e.normalize();
        let basis: Vec<Vec<u64>> = e
            .rows()
            .iter()
            .map(|row| row.iter().map(|&c| c as u64).collect())
            .collect();
        let order = parent
            .moduli()
            .iter()
            .zip(e.pivots())
            .map(|(&d, p)| d as usize / p as usize)
            .product();
        Subgroup {
            parent: parent.clone(),
            basis,
            order,
        }
    }

    pub(crate) fn from_vectors(parent: &FiniteAbelianGroup, gens: &[Vec<i64>]) -> Self {
        let mut e = Echelon::new(parent.moduli(), &[]);
        for g in gens {
            e.insert(g, &[]);
        }
        Self::from_echelon(parent, e)
    }

    /// All integer combinations of `gens`.
    pub fn from_generators(
        parent: &FiniteAbelianGroup,
        gens: &[Element],
    ) -> Result<Self, GroupError> {
        let mut vecs = Vec::with_capacity(gens.len());
        for g in gens {
            parent.check(g)?;
            vecs.push(g.coords().iter().map(|&c| c as i64).collect());
        }
        Ok(Self::from_vectors(parent, &vecs))
    }

    pub fn trivial(parent: &FiniteAbelianGroup) -> Self {
        Self::from_vectors(parent, &[])
    }

    pub fn full(parent: &FiniteAbelianGroup) -> Self {
        let r = parent.rank();
        let units: Vec<Vec<i64>> = (0..r)
            .map(|k| (0..r).map(|j| i64::from(j == k)).collect())
            .collect();
        Self::from_vectors(parent, &units)
    }

    pub fn parent(&self) -> &FiniteAbelianGroup {
        &self.parent
    }

    /// Canonical generator matrix (one row per coordinate).
    pub fn generators(&self) -> &[Vec<u64>] {
        &self.basis
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn index(&self) -> usize {
        self.parent.order() / self.order
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn is_full(&self) -> bool {
        self.order == self.parent.order()
    }

    fn pivot(&self, k: usize) -> u64 {
        self.basis[k][k]
    }

    /// Number of distinct multiples of basis row `k` used in the enumeration.
    fn span(&self, k: usize) -> u64 {
        self.parent.moduli()[k] / self.pivot(k)
    }

    pub fn contains(&self, x: &Element) -> bool {
        if !self.parent.contains(x) {
            return false;
        }
        let moduli = self.parent.moduli();
        let mut v: Vec<i128> = x.coords().iter().map(|&c| c as i128).collect();
        for k in 0..v.len() {
            let p = self.pivot(k) as i128;
            if v[k] % p != 0 {
                return false;
            }
            let q = v[k] / p;
            for j in k..v.len() {
                v[j] = (v[j] - q * self.basis[k][j] as i128).rem_euclid(moduli[j] as i128);
            }
        }
        true
    }

    /// Element `sum_k c_k * row_k`, with `0 <= c_k < d_k / p_k`.
    pub fn element_from_coefficients(&self, coeffs: &[u64]) -> Element {
        let moduli = self.parent.moduli();
        let r = moduli.len();
        let mut acc = vec![0u128; r];
        for (k, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for j in k..r {
                acc[j] = (acc[j] + c as u128 * self.basis[k][j] as u128) % moduli[j] as u128;
            }
        }
        Element::from_raw(acc.into_iter().map(|c| c as u64).collect())
    }

    /// Sizes of the coefficient ranges used by [`Self::element_from_coefficients`].
    pub fn coefficient_ranges(&self) -> Vec<u64> {
        (0..self.parent.rank()).map(|k| self.span(k)).collect()
    }

    /// Elements in canonical order (lexicographic in the basis coefficients).
    pub fn elements(&self) -> Vec<Element> {
        let ranges = self.coefficient_ranges();
        let mut coeffs = vec![0u64; ranges.len()];
        let mut out = Vec::with_capacity(self.order);
        loop {
            out.push(self.element_from_coefficients(&coeffs));
            let mut j = ranges.len();
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                coeffs[j] += 1;
                if coeffs[j] < ranges[j] {
                    break;
                }
                coeffs[j] = 0;
            }
        }
    }

    /// Lexicographically smallest nonzero element, if any.
    pub fn smallest_nonzero(&self) -> Option<Element> {
        if self.is_trivial() {
            return None;
        }
        self.elements().into_iter().filter(|x| !x.is_zero()).min()
    }

    fn check_parent(&self, other: &Subgroup) -> Result<(), GroupError> {
        self.parent.check_same(&other.parent)
    }

    /// Subgroup generated by both.
    pub fn join(&self, other: &Subgroup) -> Result<Subgroup, GroupError> {
        self.check_parent(other)?;
        let gens: Vec<Vec<i64>> = self
            .basis
            .iter()
            .chain(&other.basis)
            .map(|row| row.iter().map(|&c| c as i64).collect())
            .collect();
        Ok(Self::from_vectors(&self.parent, &gens))
    }

    /// Intersection via `A(A(G) + A(H))`.
    pub fn intersect(&self, other: &Subgroup) -> Result<Subgroup, GroupError> {
        self.check_parent(other)?;
        let dual_sum = self.annihilator().join(&other.annihilator())?;
        Ok(dual_sum.annihilator())
    }

    /// `A(X, self)`: elements of the (self-dual) group on which every
    /// character in `self` equals 1.
    pub fn annihilator(&self) -> Subgroup {
        let moduli = self.parent.moduli();
        let r = moduli.len();
        let m = self.parent.exponent();
        // x -> ( sum_j b_kj * (M / d_j) * x_j mod M )_k for each basis row b_k
        let columns: Vec<Vec<i64>> = (0..r)
            .map(|j| {
                let scale = (m / moduli[j]) as u128;
                self.basis
                    .iter()
                    .map(|row| ((row[j] as u128 * scale) % m as u128) as i64)
                    .collect()
            })
            .collect();
        kernel_of_columns(&self.parent, &vec![m; r], &columns)
    }

    /// Invariant factors of the subgroup as an abstract group.
    pub fn invariant_factors(&self) -> Vec<u64> {
        let moduli = self.parent.moduli();
        let r = moduli.len();
        // rows of diag(d) written in the basis: T * B = D
        let mut t = vec![vec![0i128; r]; r];
        for i in 0..r {
            for k in 0..r {
                let mut acc: i128 = if i == k { moduli[i] as i128 } else { 0 };
                for l in 0..k {
                    acc -= t[i][l] * self.basis[l][k] as i128;
                }
                let p = self.pivot(k) as i128;
                debug_assert_eq!(acc % p, 0);
                t[i][k] = acc / p;
            }
        }
        invariant_factors_of_matrix(&t)
    }
}

/// Kernel of the homomorphism `domain -> prod Z_{codomain_moduli}` sending the
/// `i`-th unit vector to `columns[i]`.
pub(crate) fn kernel_of_columns(
    domain: &FiniteAbelianGroup,
    codomain_moduli: &[u64],
    columns: &[Vec<i64>],
) -> Subgroup {
    let r = domain.rank();
    let mut e = Echelon::new(codomain_moduli, domain.moduli());
    for (i, col) in columns.iter().enumerate() {
        let mut tag = vec![0i64; r];
        tag[i] = 1;
        e.insert(col, &tag);
    }
    Subgroup::from_vectors(domain, e.kernel())
}

/// `A(X, H)` for a subgroup `H` of the dual of `x`.
pub fn annihilator(x: &FiniteAbelianGroup, h: &Subgroup) -> Result<Subgroup, GroupError> {
    x.check_same(h.parent())?;
    Ok(h.annihilator())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn g(m: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(m).unwrap()
    }

    fn set(h: &Subgroup) -> BTreeSet<Vec<u64>> {
        h.elements().into_iter().map(Element::into_coords).collect()
    }

    #[test]
    fn generator_examples() {
        let z4 = g(&[4]);
        let h = Subgroup::from_generators(&z4, &[z4.element(&[2]).unwrap()]).unwrap();
        assert_eq!(h.order(), 2);
        assert_eq!(set(&h), [vec![0], vec![2]].into_iter().collect());
        assert!(Subgroup::from_generators(&z4, &[]).unwrap().is_trivial());

        let x = g(&[2, 4]);
        let h = Subgroup::from_generators(&x, &[x.element(&[1, 1]).unwrap()]).unwrap();
        assert_eq!(h.order(), 4);
        let expect: BTreeSet<Vec<u64>> = [vec![0, 0], vec![1, 1], vec![0, 2], vec![1, 3]]
            .into_iter()
            .collect();
        assert_eq!(set(&h), expect);
        assert!(Subgroup::from_generators(&x, &[z4.element(&[3]).unwrap()]).is_err());
    }

    #[test]
    fn canonical_form_is_idempotent_and_unique() {
        let x = g(&[2, 4]);
        let a = Subgroup::from_generators(&x, &[x.element(&[1, 1]).unwrap()]).unwrap();
        let b = Subgroup::from_generators(
            &x,
            &[x.element(&[1, 3]).unwrap(), x.element(&[0, 2]).unwrap()],
        )
        .unwrap();
        assert_eq!(a, b);
        let gens: Vec<Element> = a
            .generators()
            .iter()
            .map(|row| x.reduce(&row.iter().map(|&c| c as i64).collect::<Vec<_>>()).unwrap())
            .collect();
        assert_eq!(Subgroup::from_generators(&x, &gens).unwrap(), a);
    }

    #[test]
    fn intersection_examples() {
        let z4 = g(&[4]);
        let two = Subgroup::from_generators(&z4, &[z4.element(&[2]).unwrap()]).unwrap();
        assert_eq!(two.intersect(&Subgroup::full(&z4)).unwrap(), two);
        assert!(two.intersect(&Subgroup::trivial(&z4)).unwrap().is_trivial());

        let z55 = g(&[5, 5]);
        let diag = Subgroup::from_generators(&z55, &[z55.element(&[1, 1]).unwrap()]).unwrap();
        let other = Subgroup::from_generators(&z55, &[z55.element(&[1, 2]).unwrap()]).unwrap();
        assert!(diag.intersect(&other).unwrap().is_trivial());
        assert!(diag.intersect(&Subgroup::full(&z4)).is_err());
    }

    #[test]
    fn annihilator_examples() {
        let z4 = g(&[4]);
        let two = Subgroup::from_generators(&z4, &[z4.element(&[2]).unwrap()]).unwrap();
        assert_eq!(annihilator(&z4, &two).unwrap(), two);
        assert!(Subgroup::trivial(&z4).annihilator().is_full());
        assert!(Subgroup::full(&z4).annihilator().is_trivial());
        assert!(annihilator(&g(&[2, 2]), &two).is_err());
    }

    #[test]
    fn subgroup_invariant_factors() {
        let x = g(&[2, 4]);
        let h = Subgroup::from_generators(&x, &[x.element(&[1, 1]).unwrap()]).unwrap();
        assert_eq!(h.invariant_factors(), vec![4]);
        assert_eq!(Subgroup::full(&x).invariant_factors(), vec![2, 4]);
        assert_eq!(Subgroup::trivial(&x).invariant_factors(), vec![1]);
        let y = g(&[2, 2, 3]);
        assert_eq!(Subgroup::full(&y).invariant_factors(), vec![2, 6]);
    }
}
