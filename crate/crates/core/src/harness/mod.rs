//! Seeded experiments: sampling of non-vanishing marginals, membership
//! search, and the symmetrize/eliminate/classify pipeline on every member
//! found.

mod config;
mod pipeline;
mod report;
mod search;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dist::{is_degenerate, DistError, Distribution, JointCharFunction};
use crate::feq::{q_independence_residual, FeqError, QIndependence};
use crate::group::Element;
use crate::homs::{CoefficientSystem, ConditionStatus, HomError};

pub use config::{
    parse_strict, ConfigError, ExperimentConfig, Mode, Sampling, SearchConfig, Seeds, Tolerances,
};
pub use pipeline::{run_pipeline, PipelineRecord, Reduction};
pub use report::{csv_summary, to_json_string};
pub use search::{
    derive_seed, minimize_residual, sample_distribution, MembershipObjective, SearchResult,
};

/// Caps the worker count; results never depend on it.
pub const THREADS_ENV: &str = "LCA_CHARLAB_THREADS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("condition 11 violated: G_{} and G_{} meet at {witness}", pair.0 + 1, pair.1 + 1)]
    Condition11Violated {
        pair: (usize, usize),
        witness: Element,
    },
    #[error("condition 11 holds, so there is nothing to explore")]
    Condition11Holds,
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Feq(#[from] FeqError),
    #[error(transparent)]
    Hom(#[from] HomError),
}

impl HarnessError {
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::InvalidArgument(_) => "invalid-argument",
            HarnessError::Precondition(_) | HarnessError::Hom(HomError::PreconditionViolated(_)) => {
                "precondition-violated"
            }
            HarnessError::Condition11Violated { .. } => "condition-11-violated",
            HarnessError::Condition11Holds => "condition-11-holds",
            HarnessError::Dist(_) | HarnessError::Feq(_) | HarnessError::Hom(_) => "error",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "EXPLORE-COMPLETE")]
    ExploreComplete,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QRecord {
    /// The independent input; it must be accepted.
    pub independent: QIndependence,
    /// A seeded dependent joint law (odd restarts); it must be rejected
    /// unless its `E` is identically 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dependent: Option<QIndependence>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub seed: u64,
    pub sample_residual: f64,
    pub sample_member: bool,
    pub final_residual: f64,
    pub distances: Vec<f64>,
    pub iterations: usize,
    pub member: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_independence: Option<QRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_pipeline: Option<PipelineRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub restart: usize,
    pub residual: f64,
    pub distances: Vec<f64>,
    pub marginals: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionSummary {
    pub classes: Vec<Vec<usize>>,
    pub multipliers: Vec<i64>,
    pub reduced_alphas: Vec<Vec<i64>>,
    pub reduced_condition11: ConditionStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub restarts: usize,
    pub members_found: usize,
    /// Largest distance to degeneracy over the marginals of members found.
    pub max_member_distance: f64,
    pub pipeline_runs: usize,
    pub failed_restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub mode: String,
    pub config: serde_json::Value,
    pub condition11: ConditionStatus,
    /// Absent unless every coefficient is an automorphism.
    pub condition12: Option<ConditionStatus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionSummary>,
    pub records: Vec<RestartRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<Candidate>>,
    pub summary: Summary,
    pub verdict: Verdict,
    pub statement: String,
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Pass | Verdict::ExploreComplete => 0,
            Verdict::Fail => 2,
        }
    }
}

fn thread_pool() -> rayon::ThreadPool {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

/// Runs the experiment selected by `config.mode`.
pub fn run(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    match config.mode {
        Mode::Theorem1 => verify_theorem1(config),
        Mode::Theorem4 => verify_theorem4(config),
        Mode::Theorem3 => reduce_and_verify_theorem3_style(config),
        Mode::ExploreRemark2 => explore_remark2(config),
    }
}

fn require_condition_11(system: &CoefficientSystem) -> Result<ConditionStatus, HarnessError> {
    let status = system.check_condition_11()?;
    if !status.holds {
        return Err(HarnessError::Condition11Violated {
            pair: status.pair.expect("violation has a pair"),
            witness: status.witness.clone().expect("violation has a witness"),
        });
    }
    Ok(status)
}

fn condition_12(system: &CoefficientSystem) -> Result<Option<ConditionStatus>, HarnessError> {
    if system.all_automorphisms() {
        Ok(Some(system.check_condition_12()?))
    } else {
        Ok(None)
    }
}

struct Setup {
    objective: MembershipObjective,
    reduction: Reduction,
    condition11: ConditionStatus,
    condition12: Option<ConditionStatus>,
}

fn setup(config: &ExperimentConfig, collinear: bool) -> Result<Setup, HarnessError> {
    let system = config.system()?;
    system.require_monomorphisms()?;
    let (reduction, condition11) = if collinear {
        let reduction = Reduction::collinear(&system)?;
        require_condition_11(&reduction.reduced)?;
        (reduction, system.check_condition_11()?)
    } else {
        let status = require_condition_11(&system)?;
        (Reduction::identity(&system), status)
    };
    let condition12 = condition_12(&system)?;
    let objective = MembershipObjective::new(&system)?;
    Ok(Setup {
        objective,
        reduction,
        condition11,
        condition12,
    })
}

fn sample_marginals(config: &ExperimentConfig, seed: u64) -> Result<Vec<Distribution>, HarnessError> {
    (0..config.n())
        .map(|i| sample_distribution(&config.group, derive_seed(seed, i as u64), config.sampling.floor))
        .collect()
}

/// Membership test, search and pipeline for one restart.
fn theorem_restart(
    config: &ExperimentConfig,
    setup: &Setup,
    restart: usize,
) -> Result<RestartRecord, HarnessError> {
    let tol = &config.tolerances;
    let seed = derive_seed(config.seeds.master, restart as u64);
    let marginals = sample_marginals(config, seed)?;
    let mut failures = Vec::new();

    let degeneracy_failures = |mus: &[Distribution], what: &str, failures: &mut Vec<String>| {
        for (i, mu) in mus.iter().enumerate() {
            if !is_degenerate(mu, tol.degeneracy).holds {
                failures.push(format!(
                    "{what}: member with non-degenerate marginal {} (distance {:e})",
                    i + 1,
                    mu.distance_to_degeneracy()
                ));
            }
        }
    };
    let pipeline = |mus: &[Distribution], what: &str, failures: &mut Vec<String>| {
        match run_pipeline(&setup.reduction, mus, tol.pipeline, seed) {
            Ok(rec) => {
                if !rec.gaussian.iter().all(|&g| g) || !rec.factors_consistent {
                    failures.push(format!("{what}: pipeline classified a law as non-Gaussian"));
                }
                Some(rec)
            }
            Err(e) => {
                failures.push(format!("{what}: pipeline failed: {e}"));
                None
            }
        }
    };

    let sample_residual = setup.objective.residual(&marginals)?;
    let sample_member = sample_residual <= tol.membership;
    let sample_pipeline = if sample_member {
        degeneracy_failures(&marginals, "sample", &mut failures);
        pipeline(&marginals, "sample", &mut failures)
    } else {
        None
    };

    let found = minimize_residual(&setup.objective, &marginals, &config.search)?;
    let member = found.residual < tol.membership;
    let pipeline_rec = if member {
        degeneracy_failures(&found.marginals, "search", &mut failures);
        pipeline(&found.marginals, "search", &mut failures)
    } else {
        None
    };
    Ok(RestartRecord {
        restart,
        seed,
        sample_residual,
        sample_member,
        final_residual: found.residual,
        distances: found.distances,
        iterations: found.iterations,
        member,
        q_independence: None,
        sample_pipeline,
        pipeline: pipeline_rec,
        failures,
    })
}

fn run_restarts<T: Send>(
    count: usize,
    task: impl Fn(usize) -> Result<T, HarnessError> + Sync + Send,
) -> Result<Vec<T>, HarnessError> {
    thread_pool().install(|| (0..count).into_par_iter().map(task).collect())
}

fn summarize(records: &[RestartRecord]) -> Summary {
    let members: Vec<&RestartRecord> = records.iter().filter(|r| r.member).collect();
    Summary {
        restarts: records.len(),
        members_found: members.len(),
        max_member_distance: members
            .iter()
            .flat_map(|r| r.distances.iter().copied())
            .fold(0.0, f64::max),
        pipeline_runs: records
            .iter()
            .map(|r| r.pipeline.is_some() as usize + r.sample_pipeline.is_some() as usize)
            .sum(),
        failed_restarts: records.iter().filter(|r| !r.failures.is_empty()).count(),
    }
}

fn theorem_report(
    config: &ExperimentConfig,
    setup: &Setup,
    records: Vec<RestartRecord>,
    reduction: Option<ReductionSummary>,
    extra: &str,
    started: Instant,
) -> Report {
    let summary = summarize(&records);
    let verdict = if summary.failed_restarts == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let mut statement = match verdict {
        Verdict::Pass => format!(
            "no counterexample found in {} restarts; {} members found, all with degenerate marginals. This is a falsification attempt, not a proof.",
            summary.restarts, summary.members_found
        ),
        _ => format!("assertions failed in {} of {} restarts.", summary.failed_restarts, summary.restarts),
    };
    if !extra.is_empty() {
        statement.push(' ');
        statement.push_str(extra);
    }
    Report {
        mode: config.mode.as_str().to_string(),
        config: config.to_value(),
        condition11: setup.condition11.clone(),
        condition12: setup.condition12.clone(),
        reduction,
        records,
        candidates: None,
        summary,
        verdict,
        statement,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    }
}

/// Independent marginals: every joint law found in `D_{m,m-1}` must come
/// from degenerate marginals, and the pipeline must certify it.
pub fn verify_theorem1(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    let started = Instant::now();
    let setup = setup(config, false)?;
    let records = run_restarts(config.seeds.restarts, |r| theorem_restart(config, &setup, r))?;
    Ok(theorem_report(config, &setup, records, None, "", started))
}

const THEOREM4_NOTE: &str = "On a finite group a polynomial q with q(0) = 0 vanishes identically, so Q-independent inputs are exactly the independent ones and this run coincides with the independent case.";

/// As [`verify_theorem1`], with inputs screened by Q-independence; odd
/// restarts additionally screen a dependent joint law, which must be
/// rejected.
pub fn verify_theorem4(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    let started = Instant::now();
    let setup = setup(config, false)?;
    let tol = config.tolerances.membership;
    let n = config.n();
    let records = run_restarts(config.seeds.restarts, |r| {
        let mut rec = theorem_restart(config, &setup, r)?;
        let marginals = sample_marginals(config, rec.seed)?;
        let chars: Vec<_> = marginals.iter().map(Distribution::char_function).collect();
        let joint = JointCharFunction::product_of_marginals(&chars)?;
        let independent = q_independence_residual(&joint, &chars, tol)?;
        if !independent.q_ok {
            rec.failures.push("independent input rejected as not Q-independent".into());
        }
        let dependent = if r % 2 == 1 {
            let law = dependent_law(config, derive_seed(rec.seed, u64::MAX))?;
            let joint = JointCharFunction::from_distribution(&config.group, n, &law)?;
            let marg: Vec<_> = (0..n).map(|j| joint.marginal(j)).collect();
            let q = q_independence_residual(&joint, &marg, tol)?;
            if q.q_ok && q.residual > tol {
                rec.failures.push("dependent input accepted as Q-independent".into());
            }
            Some(q)
        } else {
            None
        };
        rec.q_independence = Some(QRecord {
            independent,
            dependent,
        });
        Ok(rec)
    })?;
    Ok(theorem_report(config, &setup, records, None, THEOREM4_NOTE, started))
}

/// `lambda delta_0 + (1 - lambda) p` on `X^n` with `p` uniform on the
/// simplex; almost surely not a product law.
fn dependent_law(config: &ExperimentConfig, seed: u64) -> Result<Distribution, HarnessError> {
    let power = config.group.power(config.n()).map_err(HomError::from)?;
    sample_distribution(&power, seed, config.sampling.floor)
}

const THEOREM3_NOTE: &str = "Rational coefficients are modelled by integers invertible modulo the group exponent; divisible groups are out of scope.";

/// Collinear coefficient columns are merged first; the elimination runs on
/// the reduced system with the aggregated functions, and each aggregated
/// law is split back into its factors.
pub fn reduce_and_verify_theorem3_style(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    let started = Instant::now();
    let setup = setup(config, true)?;
    let reduction = ReductionSummary {
        classes: setup.reduction.classes.clone(),
        multipliers: setup.reduction.multipliers.clone(),
        reduced_alphas: setup
            .reduction
            .reduced
            .scalars()
            .expect("integer coefficients")
            .to_vec(),
        reduced_condition11: setup.reduction.reduced.check_condition_11()?,
    };
    let records = run_restarts(config.seeds.restarts, |r| theorem_restart(config, &setup, r))?;
    Ok(theorem_report(config, &setup, records, Some(reduction), THEOREM3_NOTE, started))
}

/// Searches for members with non-degenerate marginals when condition 11
/// fails for automorphism coefficients. Candidates are listed for
/// inspection; nothing is asserted.
pub fn explore_remark2(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    let started = Instant::now();
    let system = config.system()?;
    system.require_automorphisms()?;
    let condition11 = system.check_condition_11()?;
    if condition11.holds {
        return Err(HarnessError::Condition11Holds);
    }
    let condition12 = condition_12(&system)?;
    let objective = MembershipObjective::new(&system)?;
    let tol = config.tolerances;
    let outcomes = run_restarts(config.seeds.restarts, |r| {
        let seed = derive_seed(config.seeds.master, r as u64);
        let marginals = sample_marginals(config, seed)?;
        let sample_residual = objective.residual(&marginals)?;
        let found = minimize_residual(&objective, &marginals, &config.search)?;
        let member = found.residual < tol.membership;
        let candidate = (member && found.distances.iter().any(|&d| d > tol.degeneracy)).then(|| {
            Candidate {
                restart: r,
                residual: found.residual,
                distances: found.distances.clone(),
                marginals: found.marginals.iter().map(|m| m.probs().to_vec()).collect(),
            }
        });
        let record = RestartRecord {
            restart: r,
            seed,
            sample_residual,
            sample_member: sample_residual <= tol.membership,
            final_residual: found.residual,
            distances: found.distances,
            iterations: found.iterations,
            member,
            q_independence: None,
            sample_pipeline: None,
            pipeline: None,
            failures: Vec::new(),
        };
        Ok((record, candidate))
    })?;
    let (records, candidates): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    let candidates: Vec<Candidate> = candidates.into_iter().flatten().collect();
    let statement = format!(
        "{} candidate(s) with membership residual below {:e} and a marginal farther than {:e} from degenerate, listed for inspection. The question is not settled by this run.",
        candidates.len(),
        tol.membership,
        tol.degeneracy
    );
    Ok(Report {
        mode: config.mode.as_str().to_string(),
        config: config.to_value(),
        condition11,
        condition12,
        reduction: None,
        summary: summarize(&records),
        records,
        candidates: Some(candidates),
        verdict: Verdict::ExploreComplete,
        statement,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

