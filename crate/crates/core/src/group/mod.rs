//! Finite abelian groups `Z_{d_1} x ... x Z_{d_r}`, their elements and the
//! character pairing.
//!
//! The dual group of `X` is represented with the same moduli list: the
//! element `y` of `Y` is the character `x -> exp(2 pi i sum_j x_j y_j / d_j)`.
//! Tables indexed by group elements use lexicographic order with the first
//! coordinate most significant.

mod lattice;
mod snf;
mod subgroup;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use snf::{catalog, invariant_factors_of_matrix, smith_normal_form, SmithForm};
pub use subgroup::{annihilator, Subgroup};

pub(crate) use lattice::Echelon;
pub(crate) use subgroup::kernel_of_columns;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("moduli mismatch: {left} vs {right}")]
    ModuliMismatch { left: String, right: String },
}

/// `Z_{d_1} x ... x Z_{d_r}` with the moduli kept exactly as given.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GroupRepr", into = "GroupRepr")]
pub struct FiniteAbelianGroup {
    moduli: Vec<u64>,
    strides: Vec<usize>,
    order: usize,
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    moduli: Vec<i64>,
}

impl TryFrom<GroupRepr> for FiniteAbelianGroup {
    type Error = GroupError;

    fn try_from(repr: GroupRepr) -> Result<Self, Self::Error> {
        FiniteAbelianGroup::new(&repr.moduli)
    }
}

impl From<FiniteAbelianGroup> for GroupRepr {
    fn from(g: FiniteAbelianGroup) -> Self {
        GroupRepr {
            moduli: g.moduli.iter().map(|&d| d as i64).collect(),
        }
    }
}

/// Coordinates of a group element, each reduced modulo its factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(Vec<u64>);

impl Element {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<u64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub(crate) fn from_raw(coords: Vec<u64>) -> Self {
        Element(coords)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, c) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Largest group order the crate does arithmetic on.
pub const MAX_ORDER: usize = 1 << 40;

impl FiniteAbelianGroup {
    pub fn new(moduli: &[i64]) -> Result<Self, GroupError> {
        if moduli.is_empty() {
            return Err(GroupError::InvalidArgument("empty moduli list".into()));
        }
        if let Some(&bad) = moduli.iter().find(|&&d| d < 1) {
            return Err(GroupError::InvalidArgument(format!(
                "modulus {bad} is not positive"
            )));
        }
        let moduli: Vec<u64> = moduli.iter().map(|&d| d as u64).collect();
        let mut order: usize = 1;
        for &d in &moduli {
            order = order
                .checked_mul(d as usize)
                .filter(|&o| o <= MAX_ORDER)
                .ok_or_else(|| GroupError::InvalidArgument("group order too large".into()))?;
        }
        let mut strides = vec![1usize; moduli.len()];
        for j in (0..moduli.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * moduli[j + 1] as usize;
        }
        Ok(FiniteAbelianGroup {
            moduli,
            strides,
            order,
        })
    }

    /// The cyclic group `Z_n`.
    pub fn cyclic(n: u64) -> Result<Self, GroupError> {
        Self::new(&[n as i64])
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Least common multiple of the moduli.
    pub fn exponent(&self) -> u64 {
        self.moduli
            .iter()
            .fold(1u64, |acc, &d| num_integer::lcm(acc, d))
    }

    /// `X^m`, coordinates of the copies concatenated in order.
    pub fn power(&self, m: usize) -> Result<Self, GroupError> {
        if m == 0 {
            return Err(GroupError::InvalidArgument("power 0".into()));
        }
        let moduli: Vec<i64> = (0..m)
            .flat_map(|_| self.moduli.iter().map(|&d| d as i64))
            .collect();
        Self::new(&moduli)
    }

    pub fn zero(&self) -> Element {
        Element(vec![0; self.rank()])
    }

    pub fn contains(&self, x: &Element) -> bool {
        x.0.len() == self.rank() && x.0.iter().zip(&self.moduli).all(|(&c, &d)| c < d)
    }

    /// Element with the given coordinates, which must already be reduced.
    pub fn element(&self, coords: &[u64]) -> Result<Element, GroupError> {
        let x = Element(coords.to_vec());
        if self.contains(&x) {
            Ok(x)
        } else {
            Err(GroupError::InvalidArgument(format!(
                "{x} is not an element of {self}"
            )))
        }
    }

    /// Element obtained by reducing arbitrary integer coordinates.
    pub fn reduce(&self, coords: &[i64]) -> Result<Element, GroupError> {
        if coords.len() != self.rank() {
            return Err(GroupError::InvalidArgument(format!(
                "expected {} coordinates, got {}",
                self.rank(),
                coords.len()
            )));
        }
        Ok(Element(
            coords
                .iter()
                .zip(&self.moduli)
                .map(|(&c, &d)| c.rem_euclid(d as i64) as u64)
                .collect(),
        ))
    }

    pub(crate) fn check(&self, x: &Element) -> Result<(), GroupError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(GroupError::InvalidArgument(format!(
                "{x} is not an element of {self}"
            )))
        }
    }

    pub(crate) fn check_same(&self, other: &FiniteAbelianGroup) -> Result<(), GroupError> {
        if self.moduli == other.moduli {
            Ok(())
        } else {
            Err(GroupError::ModuliMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }

    pub fn add(&self, x: &Element, y: &Element) -> Element {
        Element(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.moduli)
                .map(|((&a, &b), &d)| (a + b) % d)
                .collect(),
        )
    }

    pub fn neg(&self, x: &Element) -> Element {
        Element(
            x.0.iter()
                .zip(&self.moduli)
                .map(|(&a, &d)| (d - a) % d)
                .collect(),
        )
    }

    pub fn sub(&self, x: &Element, y: &Element) -> Element {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, k: i64, x: &Element) -> Element {
        Element(
            x.0.iter()
                .zip(&self.moduli)
                .map(|(&a, &d)| {
                    let k = k.rem_euclid(d as i64) as u128;
                    ((k * a as u128) % d as u128) as u64
                })
                .collect(),
        )
    }

    /// Position of `x` in lexicographic order.
    pub fn index_of(&self, x: &Element) -> usize {
        x.0.iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as usize * s)
            .sum()
    }

    pub fn element_at(&self, index: usize) -> Element {
        let mut coords = vec![0u64; self.rank()];
        self.coords_into(index, &mut coords);
        Element(coords)
    }

    pub(crate) fn coords_into(&self, mut index: usize, out: &mut [u64]) {
        for j in (0..self.rank()).rev() {
            let d = self.moduli[j] as usize;
            out[j] = (index % d) as u64;
            index /= d;
        }
    }

    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.order).map(move |i| self.element_at(i))
    }

    pub fn add_index(&self, a: usize, b: usize) -> usize {
        let mut out = 0usize;
        let (mut a, mut b) = (a, b);
        let mut stride = 1usize;
        for j in (0..self.rank()).rev() {
            let d = self.moduli[j] as usize;
            let s = (a % d + b % d) % d;
            out += s * stride;
            stride *= d;
            a /= d;
            b /= d;
        }
        out
    }

    pub fn neg_index(&self, a: usize) -> usize {
        let mut out = 0usize;
        let mut a = a;
        let mut stride = 1usize;
        for j in (0..self.rank()).rev() {
            let d = self.moduli[j] as usize;
            let c = a % d;
            out += ((d - c) % d) * stride;
            stride *= d;
            a /= d;
        }
        out
    }

    /// Full addition table, row-major. Only sensible for small groups.
    pub(crate) fn add_table(&self) -> Vec<u32> {
        let n = self.order;
        let mut table = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                table[a * n + b] = self.add_index(a, b) as u32;
            }
        }
        table
    }

    /// Fraction in `[0, 1)` with `(x, y) = exp(2 pi i * phase)`.
    pub(crate) fn pairing_phase(&self, x: &[u64], y: &[u64]) -> f64 {
        let mut frac = 0.0f64;
        for ((&a, &b), &d) in x.iter().zip(y).zip(&self.moduli) {
            let num = ((a as u128 * b as u128) % d as u128) as f64;
            frac += num / d as f64;
        }
        frac - frac.floor()
    }

    /// Value of the character `y` at `x`, both given in this group's coordinates.
    pub fn pairing(&self, x: &Element, y: &Element) -> Result<Complex64, GroupError> {
        self.check(x)?;
        self.check(y)?;
        Ok(phase_to_unit(self.pairing_phase(&x.0, &y.0)))
    }

    /// `N x N` table of `(x, y)` indexed `[x * N + y]`.
    pub fn pairing_table(&self) -> Vec<Complex64> {
        let n = self.order;
        let mut out = Vec::with_capacity(n * n);
        let mut xc = vec![0u64; self.rank()];
        let mut yc = vec![0u64; self.rank()];
        for x in 0..n {
            self.coords_into(x, &mut xc);
            for y in 0..n {
                self.coords_into(y, &mut yc);
                out.push(phase_to_unit(self.pairing_phase(&xc, &yc)));
            }
        }
        out
    }

    /// Invariant factors `e_1 | e_2 | ... ` (1s dropped; `[1]` for the trivial group).
    pub fn invariant_factors(&self) -> Vec<u64> {
        let diag: Vec<Vec<i128>> = (0..self.rank())
            .map(|i| {
                (0..self.rank())
                    .map(|j| if i == j { self.moduli[i] as i128 } else { 0 })
                    .collect()
            })
            .collect();
        invariant_factors_of_matrix(&diag)
    }

    pub fn is_isomorphic(&self, other: &FiniteAbelianGroup) -> bool {
        self.invariant_factors() == other.invariant_factors()
    }
}

pub fn phase_to_unit(frac: f64) -> Complex64 {
    let (s, c) = (2.0 * std::f64::consts::PI * frac).sin_cos();
    Complex64::new(c, s)
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, d) in self.moduli.iter().enumerate() {
            if j > 0 {
                write!(f, "x")?;
            }
            write!(f, "Z{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = GroupError;

    /// Parses literals such as `Z2xZ4` (case-insensitive).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        if lower.is_empty() {
            return Err(GroupError::InvalidArgument("empty group literal".into()));
        }
        let mut moduli = Vec::new();
        for part in lower.split('x') {
            let digits = part.strip_prefix('z').ok_or_else(|| {
                GroupError::InvalidArgument(format!("bad factor `{part}` in `{s}`"))
            })?;
            let d: i64 = digits.parse().map_err(|_| {
                GroupError::InvalidArgument(format!("bad modulus `{digits}` in `{s}`"))
            })?;
            moduli.push(d);
        }
        FiniteAbelianGroup::new(&moduli)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(m).unwrap()
    }

    #[test]
    fn make_group_examples() {
        assert_eq!(g(&[5]).order(), 5);
        assert_eq!(g(&[2, 4]).order(), 8);
        assert_eq!(g(&[1]).order(), 1);
        assert!(FiniteAbelianGroup::new(&[0]).is_err());
        assert!(FiniteAbelianGroup::new(&[3, -2]).is_err());
        assert_ne!(g(&[2, 4]), g(&[8]));
    }

    #[test]
    fn literal_round_trip() {
        let x: FiniteAbelianGroup = "z2XZ4".parse().unwrap();
        assert_eq!(x.moduli(), &[2, 4]);
        assert_eq!(x.to_string(), "Z2xZ4");
        assert!("Z0".parse::<FiniteAbelianGroup>().is_err());
        assert!("Q3".parse::<FiniteAbelianGroup>().is_err());
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"{"moduli":[2,4]}"#);
        let back: FiniteAbelianGroup = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn pairing_examples() {
        let z5 = g(&[5]);
        let one = z5.element(&[1]).unwrap();
        let v = z5.pairing(&one, &one).unwrap();
        let expect = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 5.0);
        assert!((v - expect).norm() < 1e-15);
        for y in z5.elements() {
            assert!((z5.pairing(&z5.zero(), &y).unwrap() - 1.0).norm() < 1e-15);
        }
        let x = g(&[2, 4]);
        let v = x
            .pairing(&x.element(&[1, 2]).unwrap(), &x.element(&[1, 1]).unwrap())
            .unwrap();
        assert!((v - 1.0).norm() < 1e-15);
        assert!(x.pairing(&one, &one).is_err());
    }

    #[test]
    fn index_arithmetic_matches_coordinates() {
        let x = g(&[3, 4, 2]);
        for a in 0..x.order() {
            let ea = x.element_at(a);
            assert_eq!(x.index_of(&ea), a);
            assert_eq!(x.neg_index(a), x.index_of(&x.neg(&ea)));
            for b in 0..x.order() {
                let eb = x.element_at(b);
                assert_eq!(x.add_index(a, b), x.index_of(&x.add(&ea, &eb)));
            }
        }
    }

    #[test]
    fn invariant_factor_canonicalization() {
        assert_eq!(g(&[2, 3]).invariant_factors(), vec![6]);
        assert_eq!(g(&[4, 2]).invariant_factors(), vec![2, 4]);
        assert!(g(&[6]).is_isomorphic(&g(&[3, 2])));
        assert!(!g(&[8]).is_isomorphic(&g(&[2, 4])));
        assert_eq!(g(&[1]).invariant_factors(), vec![1]);
    }
}
