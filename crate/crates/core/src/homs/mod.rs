//! Homomorphisms between finite abelian groups as integer matrices.
//!
//! A map `Z_{d_1} x ... x Z_{d_r} -> Z_{e_1} x ... x Z_{e_s}` is an `s x r`
//! matrix `A`; coordinate `j` of the image of `x` is `sum_i A[j][i] x_i mod e_j`.
//! The matrix defines a map on residues only when
//! `A[j][i] = 0 mod e_j / gcd(d_i, e_j)`.

mod collinear;
mod system;

use std::fmt;

use num_integer::Integer;
use rand::Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::group::{Echelon, Element, FiniteAbelianGroup, GroupError, Subgroup};

pub use collinear::{collinearity_reduction, collinearity_reduction_int, Collinearity};
pub use system::{AlphaEntry, CoefficientSystem, ConditionStatus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomError {
    #[error(
        "ill-defined homomorphism: entry ({row},{col}) = {entry} must be divisible by {required}"
    )]
    IllDefined {
        row: usize,
        col: usize,
        entry: i64,
        required: u64,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Homomorphism {
    domain: FiniteAbelianGroup,
    codomain: FiniteAbelianGroup,
    matrix: Vec<Vec<i64>>,
}

/// Endomorphisms are homomorphisms with equal domain and codomain.
pub type Endomorphism = Homomorphism;

#[derive(Clone, Debug)]
pub struct Classification {
    pub is_mono: bool,
    pub is_epi: bool,
    pub is_auto: bool,
    pub inverse: Option<Homomorphism>,
}

fn required_divisor(d: u64, e: u64) -> u64 {
    e / d.gcd(&e)
}

impl Homomorphism {
    pub fn new(
        domain: &FiniteAbelianGroup,
        codomain: &FiniteAbelianGroup,
        matrix: &[Vec<i64>],
    ) -> Result<Self, HomError> {
        if matrix.len() != codomain.rank() {
            return Err(HomError::Dimension(format!(
                "{} rows for codomain {codomain}",
                matrix.len()
            )));
        }
        let d = domain.moduli();
        let e = codomain.moduli();
        let mut reduced = Vec::with_capacity(matrix.len());
        for (j, row) in matrix.iter().enumerate() {
            if row.len() != domain.rank() {
                return Err(HomError::Dimension(format!(
                    "row {} has {} entries for domain {domain}",
                    j + 1,
                    row.len()
                )));
            }
            let mut out = Vec::with_capacity(row.len());
            for (i, &a) in row.iter().enumerate() {
                let a = a.rem_euclid(e[j] as i64);
                let req = required_divisor(d[i], e[j]);
                if a as u64 % req != 0 {
                    return Err(HomError::IllDefined {
                        row: j + 1,
                        col: i + 1,
                        entry: a,
                        required: req,
                    });
                }
                out.push(a);
            }
            reduced.push(out);
        }
        Ok(Homomorphism {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix: reduced,
        })
    }

    pub fn identity(g: &FiniteAbelianGroup) -> Self {
        Self::scalar(g, 1)
    }

    pub fn zero(domain: &FiniteAbelianGroup, codomain: &FiniteAbelianGroup) -> Self {
        Homomorphism {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix: vec![vec![0; domain.rank()]; codomain.rank()],
        }
    }

    /// Multiplication by the integer `k`.
    pub fn scalar(g: &FiniteAbelianGroup, k: i64) -> Self {
        let r = g.rank();
        let matrix = (0..r)
            .map(|j| {
                (0..r)
                    .map(|i| {
                        if i == j {
                            k.rem_euclid(g.moduli()[j] as i64)
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        Homomorphism {
            domain: g.clone(),
            codomain: g.clone(),
            matrix,
        }
    }

    /// A uniformly random homomorphism `domain -> codomain`.
    pub fn random<R: Rng + ?Sized>(
        domain: &FiniteAbelianGroup,
        codomain: &FiniteAbelianGroup,
        rng: &mut R,
    ) -> Self {
        let d = domain.moduli();
        let matrix = codomain
            .moduli()
            .iter()
            .map(|&e| {
                d.iter()
                    .map(|&di| {
                        let req = required_divisor(di, e);
                        (rng.random_range(0..e / req) * req) as i64
                    })
                    .collect()
            })
            .collect();
        Homomorphism {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix,
        }
    }

    pub fn domain(&self) -> &FiniteAbelianGroup {
        &self.domain
    }

    pub fn codomain(&self) -> &FiniteAbelianGroup {
        &self.codomain
    }

    /// Rows indexed by codomain coordinates, entries reduced.
    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn is_endomorphism(&self) -> bool {
        self.domain == self.codomain
    }

    pub(crate) fn apply_coords(&self, x: &[u64], out: &mut [u64]) {
        for ((o, row), &e) in out.iter_mut().zip(&self.matrix).zip(self.codomain.moduli()) {
            let mut acc: u128 = 0;
            for (&a, &xi) in row.iter().zip(x) {
                acc += a as u128 * xi as u128;
            }
            *o = (acc % e as u128) as u64;
        }
    }

    pub fn apply(&self, x: &Element) -> Result<Element, HomError> {
        self.domain.check(x)?;
        let mut out = vec![0u64; self.codomain.rank()];
        self.apply_coords(x.coords(), &mut out);
        Ok(Element::from_raw(out))
    }

    /// Codomain index of the image of every domain element, in domain order.
    pub fn image_table(&self) -> Vec<usize> {
        let n = self.domain.order();
        let mut out = Vec::with_capacity(n);
        let mut x = vec![0u64; self.domain.rank()];
        let mut y = vec![0u64; self.codomain.rank()];
        for idx in 0..n {
            self.domain.coords_into(idx, &mut x);
            self.apply_coords(&x, &mut y);
            out.push(
                y.iter()
                    .zip(self.codomain.strides())
                    .map(|(&c, &s)| c as usize * s)
                    .sum(),
            );
        }
        out
    }

    /// The map of dual groups with `(f x, y) = (x, adjoint(f) y)`.
    pub fn adjoint(&self) -> Homomorphism {
        let d = self.domain.moduli();
        let e = self.codomain.moduli();
        let matrix = (0..d.len())
            .map(|i| {
                (0..e.len())
                    .map(|j| {
                        let v = d[i] as u128 * self.matrix[j][i] as u128 / e[j] as u128;
                        (v % d[i] as u128) as i64
                    })
                    .collect()
            })
            .collect();
        Homomorphism {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            matrix,
        }
    }

    /// `self . g` (apply `g` first).
    pub fn compose(&self, g: &Homomorphism) -> Result<Homomorphism, HomError> {
        g.codomain.check_same(&self.domain)?;
        let e = self.codomain.moduli();
        let matrix = (0..e.len())
            .map(|j| {
                (0..g.domain.rank())
                    .map(|k| {
                        let mut acc: i128 = 0;
                        for i in 0..self.domain.rank() {
                            acc += self.matrix[j][i] as i128 * g.matrix[i][k] as i128;
                        }
                        acc.rem_euclid(e[j] as i128) as i64
                    })
                    .collect()
            })
            .collect();
        Ok(Homomorphism {
            domain: g.domain.clone(),
            codomain: self.codomain.clone(),
            matrix,
        })
    }

    fn combine(&self, other: &Homomorphism, sign: i64) -> Result<Homomorphism, HomError> {
        self.domain.check_same(&other.domain)?;
        self.codomain.check_same(&other.codomain)?;
        let e = self.codomain.moduli();
        let matrix = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .zip(e)
            .map(|((a, b), &ej)| {
                a.iter()
                    .zip(b)
                    .map(|(&x, &y)| (x + sign * y).rem_euclid(ej as i64))
                    .collect()
            })
            .collect();
        Ok(Homomorphism {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix,
        })
    }

    pub fn add(&self, other: &Homomorphism) -> Result<Homomorphism, HomError> {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Homomorphism) -> Result<Homomorphism, HomError> {
        self.combine(other, -1)
    }

    fn columns(&self) -> Vec<Vec<i64>> {
        (0..self.domain.rank())
            .map(|i| self.matrix.iter().map(|row| row[i]).collect())
            .collect()
    }

    pub fn kernel(&self) -> Subgroup {
        crate::group::kernel_of_columns(&self.domain, self.codomain.moduli(), &self.columns())
    }

    pub fn image(&self) -> Subgroup {
        Subgroup::from_vectors(&self.codomain, &self.columns())
    }

    pub fn is_mono(&self) -> bool {
        self.kernel().is_trivial()
    }

    pub fn is_epi(&self) -> bool {
        self.image().is_full()
    }

    pub fn is_auto(&self) -> bool {
        self.domain.order() == self.codomain.order() && self.is_mono()
    }

    pub fn classify(&self) -> Classification {
        let is_mono = self.is_mono();
        let is_epi = self.is_epi();
        let is_auto = is_mono && is_epi;
        let inverse = if is_auto { self.inverse().ok() } else { None };
        Classification {
            is_mono,
            is_epi,
            is_auto,
            inverse,
        }
    }

    /// Inverse of a bijective map, found by solving for preimages of the
    /// codomain unit vectors.
    pub fn inverse(&self) -> Result<Homomorphism, HomError> {
        if !(self.domain.order() == self.codomain.order() && self.is_mono()) {
            return Err(HomError::NotInvertible(format!("{self:?} is not bijective")));
        }
        let r = self.domain.rank();
        let s = self.codomain.rank();
        let mut e = Echelon::new(self.codomain.moduli(), self.domain.moduli());
        for (i, col) in self.columns().iter().enumerate() {
            let mut tag = vec![0i64; r];
            tag[i] = 1;
            e.insert(col, &tag);
        }
        let mut matrix = vec![vec![0i64; s]; r];
        for j in 0..s {
            let mut unit = vec![0i64; s];
            unit[j] = 1;
            let pre = e
                .solve(&unit)
                .ok_or_else(|| HomError::NotInvertible("unit vector has no preimage".into()))?;
            for i in 0..r {
                matrix[i][j] = pre[i];
            }
        }
        let inv = Homomorphism::new(&self.codomain, &self.domain, &matrix)?;
        let left = inv.compose(self)?;
        let right = self.compose(&inv)?;
        if left != Homomorphism::identity(&self.domain) || right != Homomorphism::identity(&self.codomain)
        {
            return Err(HomError::NotInvertible("inverse verification failed".into()));
        }
        Ok(inv)
    }
}

impl fmt::Debug for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} {:?}", self.domain, self.codomain, self.matrix)
    }
}

impl Serialize for Homomorphism {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.matrix.serialize(s)
    }
}
