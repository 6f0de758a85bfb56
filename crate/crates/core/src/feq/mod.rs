//! Functional equations on finite abelian groups: finite differences,
//! polynomial degree, the classes `D_{m,k}` of joint characteristic
//! functions, and the elimination steps reducing the linear-forms equation to
//! polynomial statements.

mod anova;
mod checks;
mod dmk;
mod elimination;
mod function;
mod poly;

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::Serializer;
use thiserror::Error;

use crate::dist::DistError;
use crate::group::{Element, GroupError};
use crate::homs::HomError;

pub use checks::{
    cramer_factor_check, marcinkiewicz_check, q_independence_residual, CramerVerdict,
    MarcinkiewiczVerdict, QIndependence,
};
pub use dmk::{is_in_dmk, reconstruction_error, DmkEvaluator, DmkVerdict, Factor, LOG_HOLONOMY};
pub use elimination::{
    eliminate_lemma1, eliminate_lemma2, equation3_residual, validate_certificate,
    EliminationCertificate, EliminationOptions, Lemma1Report, ShiftRecord,
};
pub use function::{GroupFunction, Space};
pub use poly::{
    multiplicative_degree, polynomial_degree, polynomial_degree_with, shift_family, ShiftFamily,
    EXHAUSTIVE_SHIFT_MAX,
};

#[derive(Debug, Error)]
pub enum FeqError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("vanishing characteristic function: min |f| = {min_abs:e}")]
    VanishingChar { min_abs: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("subgroups G_{} and G_{} intersect nontrivially at {witness}", pair.0 + 1, pair.1 + 1)]
    Condition11Violated {
        pair: (usize, usize),
        witness: Element,
    },
    #[error("the functions do not satisfy the equation: residual {residual:e}")]
    Equation3Violated { residual: f64 },
    #[error("inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Hom(#[from] HomError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Complex numbers as `[re, im]` pairs.
pub(crate) fn ser_complex_vec<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}
