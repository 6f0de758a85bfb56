use num_complex::Complex64;
use serde::Serialize;

use super::function::GroupFunction;
use super::poly::{multiplicative_profile, polynomial_degree};
use super::FeqError;
use crate::dist::{is_gaussian, CharFunction, DistError, Distribution, JointCharFunction};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarcinkiewiczVerdict {
    pub gaussian: bool,
    /// Degree of `f = exp(psi)` with `psi` polynomial, when it exists.
    pub degree: Option<usize>,
    pub residual: f64,
}

/// If `f = exp(psi)` with `psi` a polynomial, the law behind `f` must be
/// Gaussian; this is asserted, and a failure is an error.
pub fn marcinkiewicz_check(f: &CharFunction, tol: f64) -> Result<MarcinkiewiczVerdict, FeqError> {
    let (degree, residual) = multiplicative_profile(&GroupFunction::from_char(f), tol)?;
    if degree.is_none() {
        return Ok(MarcinkiewiczVerdict {
            gaussian: false,
            degree,
            residual,
        });
    }
    let law = f.inverse()?;
    let verdict = is_gaussian(&law, 8.0 * tol)?;
    if !verdict.gaussian {
        return Err(FeqError::Inconsistent(format!(
            "exp of a polynomial but the law is not Gaussian (residual {:e})",
            verdict.residual
        )));
    }
    Ok(MarcinkiewiczVerdict {
        gaussian: true,
        degree,
        residual: residual.max(verdict.residual),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CramerVerdict {
    pub consistent: bool,
    pub gamma_gaussian: bool,
    /// `max |gamma_1 * gamma_2 - gamma|`.
    pub residual: f64,
}

/// A law whose characteristic function vanishes somewhere is not Gaussian.
fn gaussian(mu: &Distribution, tol: f64) -> Result<bool, FeqError> {
    match is_gaussian(mu, tol) {
        Ok(v) => Ok(v.gaussian),
        Err(DistError::VanishingChar { .. }) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// For `gamma = gamma_1 * gamma_2` with `gamma` Gaussian, both factors must
/// be Gaussian. A non-Gaussian `gamma` is vacuously consistent.
pub fn cramer_factor_check(
    gamma: &Distribution,
    gamma1: &Distribution,
    gamma2: &Distribution,
    tol: f64,
) -> Result<CramerVerdict, FeqError> {
    let conv = gamma1.convolve(gamma2)?;
    gamma.group().check_same(conv.group())?;
    let residual = conv
        .probs()
        .iter()
        .zip(gamma.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > tol {
        return Err(FeqError::InvalidArgument(format!(
            "gamma_1 * gamma_2 differs from gamma by {residual:e}"
        )));
    }
    let gamma_gaussian = gaussian(gamma, tol)?;
    let consistent = !gamma_gaussian || (gaussian(gamma1, tol)? && gaussian(gamma2, tol)?);
    Ok(CramerVerdict {
        consistent,
        gamma_gaussian,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QIndependence {
    pub q_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    /// `max |E - 1|` with `E = joint / prod marginals`.
    pub residual: f64,
}

/// Whether `joint(y) = exp(q(y)) prod_j marginal_j(y_j)` for a polynomial `q`
/// with `q(0) = 0`. On a finite group such `q` is zero, so acceptance
/// implies `E = 1`, which is asserted.
pub fn q_independence_residual(
    joint: &JointCharFunction,
    marginals: &[CharFunction],
    tol: f64,
) -> Result<QIndependence, FeqError> {
    if marginals.len() != joint.m() {
        return Err(FeqError::InvalidArgument(format!(
            "{} marginals for a joint law of {} variables",
            marginals.len(),
            joint.m()
        )));
    }
    let product = JointCharFunction::product_of_marginals(marginals)?;
    product.power_group().check_same(joint.power_group())?;
    let min_abs = joint.min_abs().min(product.min_abs());
    if min_abs <= tol {
        return Err(FeqError::VanishingChar { min_abs });
    }
    let e: Vec<Complex64> = joint
        .values()
        .iter()
        .zip(product.values())
        .map(|(a, b)| a / b)
        .collect();
    let residual = e.iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max);
    let e = GroupFunction::new(joint.power_group(), e)?;
    let (mult, _) = multiplicative_profile(&e, tol)?;
    let (q_ok, degree) = match mult {
        None => (false, None),
        Some(_) => {
            let q = GroupFunction::log_of(e.group(), e.values())?;
            let degree = polynomial_degree(&q, tol);
            (degree.is_some() && q.values()[0].norm() <= tol, degree)
        }
    };
    if q_ok && residual > 10.0 * tol {
        return Err(FeqError::Inconsistent(format!(
            "accepted but E differs from 1 by {residual:e}"
        )));
    }
    Ok(QIndependence {
        q_ok,
        degree: if q_ok { degree } else { None },
        residual,
    })
}
