//! Seeded sampling of marginals and the local search over products of
//! probability simplexes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::SearchConfig;
use super::HarnessError;
use crate::dist::{joint_of_linear_forms, Distribution};
use crate::feq::DmkEvaluator;
use crate::group::{phase_to_unit, FiniteAbelianGroup};
use crate::homs::{CoefficientSystem, HomError};

/// The search stops once the residual is at rounding level.
const STOP_RESIDUAL: f64 = 1e-15;
/// Largest group for which the pairing table is kept in memory.
const PAIRING_TABLE_MAX: usize = 1024;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-task seed from a master seed and a task index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(mix(master) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// `lambda delta_0 + (1 - lambda) p` with `p` uniform on the simplex. Its
/// characteristic function has modulus at least `2 lambda - 1`.
pub fn sample_distribution(
    group: &FiniteAbelianGroup,
    seed: u64,
    floor: f64,
) -> Result<Distribution, HarnessError> {
    if !(floor > 0.5 && floor < 1.0) {
        return Err(HarnessError::InvalidArgument(format!(
            "floor must lie in (0.5, 1), got {floor}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probs = random_simplex_point(&mut rng, group.order());
    for p in &mut probs {
        *p *= 1.0 - floor;
    }
    probs[0] += floor;
    Ok(Distribution::normalized(group, probs)?)
}

pub(crate) fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // normalized exponentials are uniform on the simplex
    let mut w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

/// Membership residual of the joint law of the linear forms in `D_{m,m-1}`,
/// with the tables needed to re-evaluate it cheaply after moving mass.
pub struct MembershipObjective {
    system: CoefficientSystem,
    evaluator: DmkEvaluator,
    images: Vec<Vec<usize>>,
    pairing: Vec<Complex64>,
}

impl MembershipObjective {
    pub fn new(system: &CoefficientSystem) -> Result<Self, HarnessError> {
        let m = system.m();
        if m < 2 {
            return Err(HarnessError::InvalidArgument(
                "membership in D_{m,m-1} needs at least two linear forms".into(),
            ));
        }
        let y = system.group();
        let n = y.order();
        if n > PAIRING_TABLE_MAX {
            return Err(HarnessError::InvalidArgument(format!(
                "search supports groups of order at most {PAIRING_TABLE_MAX}"
            )));
        }
        let evaluator = DmkEvaluator::new(y, m, m - 1)?;
        let images = (0..system.n()).map(|i| system.g_map(i).image_table()).collect();
        let mut pairing = Vec::with_capacity(n * n);
        let (mut xc, mut yc) = (vec![0u64; y.rank()], vec![0u64; y.rank()]);
        for x in 0..n {
            y.coords_into(x, &mut xc);
            for t in 0..n {
                y.coords_into(t, &mut yc);
                pairing.push(phase_to_unit(y.pairing_phase(&xc, &yc)));
            }
        }
        Ok(MembershipObjective {
            system: system.clone(),
            evaluator,
            images,
            pairing,
        })
    }

    pub fn system(&self) -> &CoefficientSystem {
        &self.system
    }

    fn order(&self) -> usize {
        self.system.group().order()
    }

    fn chars(&self, probs: &[f64]) -> Vec<Complex64> {
        let n = self.order();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (x, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = &self.pairing[x * n..(x + 1) * n];
            for (o, &c) in out.iter_mut().zip(row) {
                *o += c * p;
            }
        }
        out
    }

    /// Full residual, computed from scratch.
    pub fn residual(&self, marginals: &[Distribution]) -> Result<f64, HarnessError> {
        let joint = joint_of_linear_forms(&self.system, marginals)?;
        Ok(self.evaluator.residual(joint.values(), f64::INFINITY))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    #[serde(skip)]
    pub marginals: Vec<Distribution>,
    pub residual: f64,
    pub distances: Vec<f64>,
    /// Completed sweeps over all moves.
    pub iterations: usize,
}

/// Projected coordinate descent: moves of `min(step, mu_i(a))` mass from
/// `a` to `b`, accepted on strict improvement, with the step multiplied by
/// `decay` after a sweep without improvement. The objective never
/// increases; the result depends only on the inputs.
pub fn minimize_residual(
    objective: &MembershipObjective,
    start: &[Distribution],
    cfg: &SearchConfig,
) -> Result<SearchResult, HarnessError> {
    let system = &objective.system;
    if start.len() != system.n() {
        return Err(HarnessError::InvalidArgument(format!(
            "{} marginals for {} variables",
            start.len(),
            system.n()
        )));
    }
    for mu in start {
        mu.group().check_same(system.group()).map_err(HomError::from)?;
    }
    let n_vars = system.n();
    let size = objective.order();
    let joint_len = objective.images[0].len();
    let mut probs: Vec<Vec<f64>> = start.iter().map(|mu| mu.probs().to_vec()).collect();
    let mut chars: Vec<Vec<Complex64>> = probs.iter().map(|p| objective.chars(p)).collect();
    let joint_of = |chars: &[Vec<Complex64>]| -> Vec<Complex64> {
        (0..joint_len)
            .map(|y| {
                chars
                    .iter()
                    .zip(&objective.images)
                    .map(|(c, img)| c[img[y]])
                    .product()
            })
            .collect()
    };
    let mut best = objective.evaluator.residual(&joint_of(&chars), f64::INFINITY);
    let mut step = cfg.initial_step;
    let mut iterations = 0;
    let mut rest = vec![Complex64::new(0.0, 0.0); joint_len];
    let mut cand = vec![Complex64::new(0.0, 0.0); size];
    let mut joint = vec![Complex64::new(0.0, 0.0); joint_len];

    while iterations < cfg.max_iterations && best > STOP_RESIDUAL {
        let mut improved = false;
        for i in 0..n_vars {
            for (y, r) in rest.iter_mut().enumerate() {
                *r = (0..n_vars)
                    .filter(|&p| p != i)
                    .map(|p| chars[p][objective.images[p][y]])
                    .product();
            }
            for a in 0..size {
                for b in 0..size {
                    if a == b || probs[i][a] == 0.0 {
                        continue;
                    }
                    let t = step.min(probs[i][a]);
                    let row_a = &objective.pairing[a * size..(a + 1) * size];
                    let row_b = &objective.pairing[b * size..(b + 1) * size];
                    for y in 0..size {
                        cand[y] = chars[i][y] + (row_b[y] - row_a[y]) * t;
                    }
                    let img = &objective.images[i];
                    for y in 0..joint_len {
                        joint[y] = rest[y] * cand[img[y]];
                    }
                    let r = objective.evaluator.residual(&joint, best);
                    if r < best {
                        if t == probs[i][a] {
                            probs[i][a] = 0.0;
                        } else {
                            probs[i][a] -= t;
                        }
                        probs[i][b] += t;
                        chars[i] = objective.chars(&probs[i]);
                        best = r;
                        improved = true;
                        if best <= STOP_RESIDUAL {
                            break;
                        }
                    }
                }
                if best <= STOP_RESIDUAL {
                    break;
                }
            }
            if best <= STOP_RESIDUAL {
                break;
            }
        }
        iterations += 1;
        if !improved {
            step *= cfg.decay;
            if step < cfg.min_step {
                break;
            }
        }
    }

    let marginals: Vec<Distribution> = probs
        .into_iter()
        .map(|p| Distribution::new(system.group(), p))
        .collect::<Result<_, _>>()?;
    let residual = objective.residual(&marginals)?;
    let distances = marginals.iter().map(Distribution::distance_to_degeneracy).collect();
    Ok(SearchResult {
        marginals,
        residual,
        distances,
        iterations,
    })
}
