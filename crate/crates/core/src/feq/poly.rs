use num_complex::Complex64;

use super::function::{difference_table, GroupFunction, Space};
use super::FeqError;
use crate::group::FiniteAbelianGroup;

/// Groups up to this order use every element as a shift.
pub const EXHAUSTIVE_SHIFT_MAX: usize = 256;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ShiftFamily {
    /// `All` for small groups, `Generating` otherwise.
    #[default]
    Auto,
    All,
    /// `2^t e_j` for every coordinate `j`, plus pairwise sums of these.
    Generating,
}

/// Nonzero shift indices of the chosen family, in increasing order.
pub fn shift_family(group: &FiniteAbelianGroup, family: ShiftFamily) -> Vec<usize> {
    let family = match family {
        ShiftFamily::Auto if group.order() <= EXHAUSTIVE_SHIFT_MAX => ShiftFamily::All,
        ShiftFamily::Auto => ShiftFamily::Generating,
        f => f,
    };
    if family == ShiftFamily::All {
        return (1..group.order()).collect();
    }
    // doubling the angle of a nontrivial character eventually lands in
    // [pi/3, 2pi/3], where |chi(h) - 1| >= 1, so differences cannot shrink
    // below tolerance along every member of this family
    let mut gens = Vec::new();
    for (&d, &stride) in group.moduli().iter().zip(group.strides()) {
        let mut t = 1u64;
        while t < d {
            gens.push(t as usize * stride);
            t *= 2;
        }
    }
    let mut out = gens.clone();
    for a in 0..gens.len() {
        for b in a + 1..gens.len() {
            out.push(group.add_index(gens[a], gens[b]));
        }
    }
    out.retain(|&h| h != 0);
    out.sort_unstable();
    out.dedup();
    out
}

fn max_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn all_finite(values: &[Complex64]) -> bool {
    values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// Smallest `n` with `|Delta_h^{n+1} psi| <= tol` for every shift `h` in
/// the automatic family; `None` if no `n <= |Y|` works. The zero function
/// has degree 0.
pub fn polynomial_degree(psi: &GroupFunction, tol: f64) -> Option<usize> {
    polynomial_degree_with(psi, tol, Space::Additive, ShiftFamily::Auto)
}

pub fn polynomial_degree_with(
    psi: &GroupFunction,
    tol: f64,
    space: Space,
    family: ShiftFamily,
) -> Option<usize> {
    let group = psi.group();
    let shifts = shift_family(group, family);
    if shifts.is_empty() {
        return Some(0);
    }
    let mut tables: Vec<Vec<Complex64>> = vec![psi.values().to_vec(); shifts.len()];
    for n in 0..=group.order() {
        let mut worst = 0.0f64;
        for (table, &h) in tables.iter_mut().zip(&shifts) {
            *table = difference_table(group, table, h, space);
            worst = worst.max(max_norm(table));
        }
        if worst <= tol {
            return Some(n);
        }
        if !tables.iter().all(|t| all_finite(t)) {
            return None;
        }
    }
    None
}

/// Multiplicative analogue of [`polynomial_degree`]: the smallest `n` with
/// `|nabla_h^{n+1} f - 1| <= tol`, where `nabla_h f(y) = f(y + h) / f(y)`.
/// This is the degree of `f = exp(q)` for a polynomial `q`, decided without
/// choosing a branch of the logarithm.
pub fn multiplicative_degree(f: &GroupFunction, tol: f64) -> Result<Option<usize>, FeqError> {
    multiplicative_profile(f, tol).map(|(d, _)| d)
}

/// The degree together with the largest deviation from 1 at the last order
/// examined.
pub(crate) fn multiplicative_profile(
    f: &GroupFunction,
    tol: f64,
) -> Result<(Option<usize>, f64), FeqError> {
    let min_abs = f
        .values()
        .iter()
        .map(|v| v.norm())
        .fold(f64::INFINITY, f64::min);
    if min_abs <= tol {
        return Err(FeqError::VanishingChar { min_abs });
    }
    let group = f.group();
    let shifts = shift_family(group, ShiftFamily::Auto);
    if shifts.is_empty() {
        return Ok((Some(0), 0.0));
    }
    let mut tables: Vec<Vec<Complex64>> = vec![f.values().to_vec(); shifts.len()];
    let mut worst = f64::INFINITY;
    for n in 0..=group.order() {
        worst = 0.0;
        let mut finite = true;
        for (table, &h) in tables.iter_mut().zip(&shifts) {
            let next: Vec<Complex64> = (0..table.len())
                .map(|y| table[group.add_index(y, h)] / table[y])
                .collect();
            for v in &next {
                worst = worst.max((v - 1.0).norm());
            }
            finite &= all_finite(&next) && next.iter().all(|v| v.norm() > 0.0);
            *table = next;
        }
        if worst <= tol {
            return Ok((Some(n), worst));
        }
        if !finite {
            return Ok((None, worst));
        }
    }
    Ok((None, worst))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(m).unwrap()
    }

    #[test]
    fn degree_examples() {
        let z5 = g(&[5]);
        let c = GroupFunction::constant(&z5, Complex64::new(3.0, 1.0));
        assert_eq!(polynomial_degree(&c, 1e-9), Some(0));
        let zero = GroupFunction::constant(&z5, Complex64::new(0.0, 0.0));
        assert_eq!(polynomial_degree(&zero, 1e-9), Some(0));
        let chi = GroupFunction::character(&z5, &z5.element(&[1]).unwrap()).unwrap();
        assert_eq!(polynomial_degree(&chi, 1e-9), None);
    }

    #[test]
    fn generating_family_catches_slow_characters() {
        let z = g(&[1031]);
        let chi = GroupFunction::character(&z, &z.element(&[1]).unwrap()).unwrap();
        assert_eq!(
            polynomial_degree_with(&chi, 1e-9, Space::Additive, ShiftFamily::Generating),
            None
        );
        let fam = shift_family(&g(&[4, 3]), ShiftFamily::Generating);
        // 2^t e_j: (1,0), (2,0), (0,1), (0,2) and their pairwise sums
        assert!(fam.contains(&3) && fam.contains(&6) && fam.contains(&1) && fam.contains(&2));
    }

    #[test]
    fn multiplicative_degree_of_characters() {
        let x = g(&[2, 3]);
        let chi = GroupFunction::character(&x, &x.element(&[1, 2]).unwrap()).unwrap();
        assert_eq!(multiplicative_degree(&chi, 1e-9).unwrap(), Some(1));
        let one = GroupFunction::constant(&x, Complex64::new(1.0, 0.0));
        assert_eq!(multiplicative_degree(&one, 1e-9).unwrap(), Some(0));
        let z2 = g(&[2]);
        let f = GroupFunction::new(&z2, vec![Complex64::new(1.0, 0.0), Complex64::new(0.4, 0.0)])
            .unwrap();
        assert_eq!(multiplicative_degree(&f, 1e-9).unwrap(), None);
        let log_chi = GroupFunction::log_of(chi.group(), chi.values()).unwrap();
        assert_eq!(
            polynomial_degree_with(&log_chi, 1e-9, Space::Phase, ShiftFamily::Auto),
            Some(1)
        );
        assert_eq!(polynomial_degree(&log_chi, 1e-9), None);
    }
}
