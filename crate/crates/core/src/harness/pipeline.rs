//! Symmetrization, elimination and classification run on a member found by
//! the harness.

use num_integer::Integer;
use serde::Serialize;

use super::HarnessError;
use crate::dist::Distribution;
use crate::feq::{
    cramer_factor_check, eliminate_lemma2, marcinkiewicz_check, validate_certificate,
    EliminationCertificate, EliminationOptions, GroupFunction, Space,
};
use crate::homs::{collinearity_reduction_int, CoefficientSystem, Collinearity, Homomorphism};

/// How the original variables are grouped before elimination: variable `i`
/// enters class `class_of[i]` through multiplication by `multipliers[i]`.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub reduced: CoefficientSystem,
    pub classes: Vec<Vec<usize>>,
    pub multipliers: Vec<i64>,
    pub collinearity: Option<Collinearity>,
}

impl Reduction {
    pub fn identity(system: &CoefficientSystem) -> Self {
        Reduction {
            reduced: system.clone(),
            classes: (0..system.n()).map(|i| vec![i]).collect(),
            multipliers: vec![1; system.n()],
            collinearity: None,
        }
    }

    /// Groups collinear coefficient columns. Every coefficient and every
    /// ratio between collinear columns must be an integer unit modulo the
    /// group exponent.
    pub fn collinear(system: &CoefficientSystem) -> Result<Self, HarnessError> {
        let scalars = system.scalars().ok_or_else(|| {
            HarnessError::Precondition("collinearity reduction needs integer coefficients".into())
        })?;
        let exponent = system.group().exponent() as i64;
        let unit = |k: i64| k.rem_euclid(exponent).gcd(&exponent) == 1;
        for (j, row) in scalars.iter().enumerate() {
            for (i, &k) in row.iter().enumerate() {
                if !unit(k) {
                    return Err(HarnessError::Precondition(format!(
                        "coefficient ({},{}) = {k} is not invertible on {}",
                        j + 1,
                        i + 1,
                        system.group()
                    )));
                }
            }
        }
        let columns: Vec<Vec<i64>> = (0..system.n())
            .map(|i| scalars.iter().map(|row| row[i]).collect())
            .collect();
        let col = collinearity_reduction_int(&columns)?;
        let mut multipliers = Vec::with_capacity(system.n());
        for (i, c) in col.scalars.iter().enumerate() {
            let (p, q) = (c.numer(), c.denom());
            let p: i64 = p.try_into().map_err(|_| HarnessError::Precondition("scalar too large".into()))?;
            let q: i64 = q.try_into().map_err(|_| HarnessError::Precondition("scalar too large".into()))?;
            let inv = mod_inverse(q, exponent).filter(|_| unit(p)).ok_or_else(|| {
                HarnessError::Precondition(format!(
                    "scalar {c} of column {} is not invertible on {}",
                    i + 1,
                    system.group()
                ))
            })?;
            multipliers.push((p.rem_euclid(exponent) * inv).rem_euclid(exponent));
        }
        let reps: Vec<usize> = col.classes.iter().map(|c| c[0]).collect();
        let reduced_rows: Vec<Vec<i64>> = scalars
            .iter()
            .map(|row| reps.iter().map(|&i| row[i]).collect())
            .collect();
        let reduced = CoefficientSystem::from_scalars(system.group(), &reduced_rows)?;
        Ok(Reduction {
            reduced,
            classes: col.classes.clone(),
            multipliers,
            collinearity: Some(col),
        })
    }
}

fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let e = a.rem_euclid(m).extended_gcd(&m);
    (e.gcd == 1).then(|| e.x.rem_euclid(m))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineRecord {
    pub certificates: Vec<EliminationCertificate>,
    pub replayed: bool,
    /// Per class: the aggregated law is Gaussian.
    pub gaussian: Vec<bool>,
    /// The factor check held for every class with more than one member.
    pub factors_consistent: bool,
    pub residual: f64,
}

/// `nu_i = mu_i * mu_i_bar`, `psi_i = log nu_i^`, aggregated per class as
/// `phi_q(y) = sum_i psi_i(c_i y)`; eliminates on the reduced system,
/// replays the certificates and classifies each aggregated law.
pub fn run_pipeline(
    reduction: &Reduction,
    marginals: &[Distribution],
    tol: f64,
    seed: u64,
) -> Result<PipelineRecord, String> {
    let system = &reduction.reduced;
    let y = system.group();
    let nus: Vec<Distribution> = marginals.iter().map(Distribution::symmetrize).collect();
    let scaled: Vec<Distribution> = nus
        .iter()
        .zip(&reduction.multipliers)
        .map(|(nu, &c)| nu.push_forward(&Homomorphism::scalar(y, c)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut phis = Vec::with_capacity(reduction.classes.len());
    let mut laws = Vec::with_capacity(reduction.classes.len());
    for class in &reduction.classes {
        let mut law = scaled[class[0]].clone();
        for &i in &class[1..] {
            law = law.convolve(&scaled[i]).map_err(|e| e.to_string())?;
        }
        let f = law.char_function();
        phis.push(GroupFunction::log_of(y, f.values()).map_err(|e| e.to_string())?);
        laws.push(law);
    }
    let opts = EliminationOptions {
        tol,
        space: Space::Additive,
        seed,
    };
    let certificates = eliminate_lemma2(system, &phis, &opts).map_err(|e| e.to_string())?;
    for cert in &certificates {
        validate_certificate(system, &phis, cert, &opts)
            .map_err(|e| format!("certificate for variable {} fails replay: {e}", cert.target + 1))?;
    }
    let mut gaussian = Vec::with_capacity(laws.len());
    let mut factors_consistent = true;
    for (class, law) in reduction.classes.iter().zip(&laws) {
        let v = marcinkiewicz_check(&law.char_function(), tol).map_err(|e| e.to_string())?;
        gaussian.push(v.gaussian);
        for (k, &i) in class.iter().enumerate().filter(|_| class.len() > 1) {
            let mut others: Option<Distribution> = None;
            for &p in class.iter().filter(|&&p| p != i) {
                others = Some(match others {
                    None => scaled[p].clone(),
                    Some(acc) => acc.convolve(&scaled[p]).map_err(|e| e.to_string())?,
                });
            }
            let others = others.expect("class has another member");
            let c = cramer_factor_check(law, &scaled[i], &others, tol.max(1e-12))
                .map_err(|e| format!("factor {k} of class {:?}: {e}", class))?;
            factors_consistent &= c.consistent;
        }
    }
    let residual = certificates.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(PipelineRecord {
        certificates,
        replayed: true,
        gaussian,
        factors_consistent,
        residual,
    })
}
