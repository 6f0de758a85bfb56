//! Elimination of unknown functions from the linear-forms functional equation
//!
//! `sum_i psi_i(a_{1i} y_1 + ... + a_{mi} y_m) = sum_j s_j(y without y_j)`
//!
//! by finite differences along kernels, down to single-function statements
//! that are then checked for polynomiality.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::anova::top_interaction;
use super::function::{difference_table, GroupFunction, Space};
use super::poly::{polynomial_degree_with, ShiftFamily};
use super::FeqError;
use crate::group::{Element, FiniteAbelianGroup};
use crate::homs::{CoefficientSystem, Homomorphism};

/// Exhaustive shift enumeration in the single-function step needs
/// `|Y| <= 64` and at most this many `(h, z)` pairs.
const LEMMA1_EXHAUSTIVE_WORK: usize = 1 << 24;
const LEMMA1_SAMPLES: usize = 10_000;
/// Kernels up to this order are enumerated in full.
const KERNEL_ENUMERATION_MAX: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EliminationOptions {
    pub tol: f64,
    pub space: Space,
    pub seed: u64,
}

impl Default for EliminationOptions {
    fn default() -> Self {
        EliminationOptions {
            tol: 1e-9,
            space: Space::Additive,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub is_polynomial: bool,
    /// Degree found after the difference equation held; absent otherwise.
    pub degree: Option<usize>,
    /// The degree is at most `m - 1`.
    pub degree_bound_met: bool,
    pub residual: f64,
    pub exhaustive: bool,
}

/// One shift tuple `h in Y^m` used to remove `psi_i` (`g_i(h) = 0`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub i: usize,
    pub h: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliminationCertificate {
    pub target: usize,
    pub shifts: Vec<ShiftRecord>,
    pub degree: usize,
    pub residual: f64,
}

fn sup(values: &[Complex64], space: Space) -> f64 {
    values
        .iter()
        .map(|&v| space.reduce(v).norm())
        .fold(0.0, f64::max)
}

/// `Delta_{k_1} ... Delta_{k_t} psi` as a table.
fn mixed_difference(
    group: &FiniteAbelianGroup,
    values: &[Complex64],
    shifts: &[usize],
    space: Space,
) -> Vec<Complex64> {
    let mut table = values.to_vec();
    for &k in shifts {
        table = difference_table(group, &table, k, space);
    }
    table
}

/// Checks `Delta_{a_1 h_1} ... Delta_{a_m h_m} psi = 0` for all `h_j`, then
/// confirms that `psi` is a polynomial of degree at most `m - 1`.
pub fn eliminate_lemma1(
    adjoints: &[Homomorphism],
    psi: &GroupFunction,
    opts: &EliminationOptions,
) -> Result<Lemma1Report, FeqError> {
    let y = psi.group();
    let m = adjoints.len();
    if m == 0 {
        return Err(FeqError::InvalidArgument("need at least one map".into()));
    }
    let mut images = Vec::with_capacity(m);
    for (j, a) in adjoints.iter().enumerate() {
        if a.domain() != y || a.codomain() != y {
            return Err(FeqError::InvalidArgument(format!(
                "map {} is not an endomorphism of {y}",
                j + 1
            )));
        }
        if !a.is_epi() {
            return Err(FeqError::PreconditionViolated(format!(
                "map {} is not surjective",
                j + 1
            )));
        }
        images.push(a.image_table());
    }
    let n = y.order();
    let exhaustive = n <= 64
        && n.checked_pow(m as u32 + 1)
            .is_some_and(|w| w <= LEMMA1_EXHAUSTIVE_WORK);

    // differences commute, so only the multiset of shifts k_j = a_j(h_j) matters
    let mut tuples: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut push = |h: &[usize]| {
        let mut k: Vec<usize> = h.iter().zip(&images).map(|(&hj, img)| img[hj]).collect();
        k.sort_unstable();
        tuples.insert(k);
    };
    if exhaustive {
        let mut h = vec![0usize; m];
        loop {
            push(&h);
            let mut t = 0;
            while t < m {
                h[t] += 1;
                if h[t] < n {
                    break;
                }
                h[t] = 0;
                t += 1;
            }
            if t == m {
                break;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..LEMMA1_SAMPLES {
            let h: Vec<usize> = (0..m).map(|_| rng.random_range(0..n)).collect();
            push(&h);
        }
    }
    let mut residual = 0.0f64;
    for k in &tuples {
        if k.contains(&0) {
            continue;
        }
        residual = residual.max(sup(&mixed_difference(y, psi.values(), k, opts.space), opts.space));
    }
    let degree = if residual <= opts.tol {
        polynomial_degree_with(psi, opts.tol, opts.space, ShiftFamily::Auto)
    } else {
        None
    };
    Ok(Lemma1Report {
        is_polynomial: degree.is_some(),
        degree,
        degree_bound_met: degree.is_some_and(|d| d < m),
        residual,
        exhaustive,
    })
}

fn check_psis(system: &CoefficientSystem, psis: &[GroupFunction]) -> Result<(), FeqError> {
    if psis.len() != system.n() {
        return Err(FeqError::InvalidArgument(format!(
            "{} functions for {} forms",
            psis.len(),
            system.n()
        )));
    }
    for psi in psis {
        psi.group().check_same(system.group())?;
    }
    Ok(())
}

/// `F = sum_i psi_i . g_i` on `Y^m`.
fn combined(system: &CoefficientSystem, psis: &[GroupFunction]) -> Result<GroupFunction, FeqError> {
    let mut total = GroupFunction::constant(&system.power_group(), Complex64::new(0.0, 0.0));
    for (i, psi) in psis.iter().enumerate() {
        total = total.add(&psi.compose(&system.g_map(i))?)?;
    }
    Ok(total)
}

/// How far `F = sum_i psi_i . g_i` is from a sum of functions each missing
/// one coordinate. In additive mode this is the sup norm of the top
/// interaction of `F`; in phase mode the largest `m`-fold mixed difference
/// of `F` with imaginary parts taken modulo `2 pi`.
pub fn equation3_residual(
    system: &CoefficientSystem,
    psis: &[GroupFunction],
    space: Space,
) -> Result<f64, FeqError> {
    check_psis(system, psis)?;
    let f = combined(system, psis)?;
    let n = system.group().order();
    let m = system.m();
    Ok(match space {
        Space::Additive => sup(&top_interaction(f.values(), n, m), space),
        Space::Phase => phase_mixed_residual(&f, n, m),
    })
}

fn phase_mixed_residual(f: &GroupFunction, n: usize, m: usize) -> f64 {
    let big = f.group();
    let strides = big.strides().to_vec();
    let mut best = 0.0f64;
    // per-coordinate shifts (0, .., h_j, .., 0) of Y^m
    let mut h = vec![1usize; m];
    if n == 1 {
        return 0.0;
    }
    let y_group = FiniteAbelianGroup::new(
        &big.moduli()[..big.rank() / m]
            .iter()
            .map(|&d| d as i64)
            .collect::<Vec<_>>(),
    )
    .expect("base group");
    loop {
        let shifts: Vec<usize> = (0..m)
            .map(|j| {
                // embed h_j from Y into coordinate block j of Y^m
                let coords = y_group.element_at(h[j]).into_coords();
                let mut idx = 0;
                let r = coords.len();
                for (t, c) in coords.into_iter().enumerate() {
                    idx += c as usize * strides[j * r + t];
                }
                idx
            })
            .collect();
        let table = mixed_difference(big, f.values(), &shifts, Space::Phase);
        best = best.max(sup(&table, Space::Phase));
        let mut t = 0;
        while t < m {
            h[t] += 1;
            if h[t] < n {
                break;
            }
            h[t] = 1;
            t += 1;
        }
        if t == m {
            break;
        }
    }
    best
}

/// Elements of a kernel in canonical order, or a seeded sample of them
/// (always including 0) when the kernel is large.
fn kernel_elements(g: &Homomorphism, seed: u64) -> Vec<Element> {
    let ker = g.kernel();
    if ker.order() <= KERNEL_ENUMERATION_MAX {
        return ker.elements();
    }
    let ranges = ker.coefficient_ranges();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = vec![ker.parent().zero()];
    seen.insert(out[0].clone());
    for _ in 0..KERNEL_ENUMERATION_MAX {
        let c: Vec<u64> = ranges.iter().map(|&r| rng.random_range(0..r)).collect();
        let x = ker.element_from_coefficients(&c);
        if seen.insert(x.clone()) {
            out.push(x);
        }
    }
    out
}

fn split_blocks(x: &Element, m: usize) -> Vec<Vec<u64>> {
    let r = x.coords().len() / m;
    x.coords().chunks(r.max(1)).map(<[u64]>::to_vec).collect()
}

/// Per nonzero `h in Y`, one shift for every `l != target` with
/// `g_l(s) = 0` and `g_target(s) = h`.
fn select_shifts(
    system: &CoefficientSystem,
    target: usize,
    seed: u64,
) -> Result<Vec<Vec<(usize, Element)>>, FeqError> {
    let y = system.group();
    let g_target = system.g_map(target);
    let mut per_l = Vec::new();
    for l in (0..system.n()).filter(|&l| l != target) {
        let g_l = system.g_map(l);
        let mut preimage: Vec<Option<Element>> = vec![None; y.order()];
        let mut covered = 0;
        for s in kernel_elements(&g_l, seed ^ l as u64) {
            let img = y.index_of(&g_target.apply(&s)?);
            if preimage[img].is_none() {
                preimage[img] = Some(s);
                covered += 1;
            }
        }
        if covered < y.order() {
            return Err(FeqError::PreconditionViolated(format!(
                "g_{} does not map the kernel of g_{} onto Y",
                target + 1,
                l + 1
            )));
        }
        per_l.push((l, preimage));
    }
    Ok((1..y.order())
        .map(|h| {
            per_l
                .iter()
                .map(|(l, pre)| (*l, pre[h].clone().expect("covered")))
                .collect()
        })
        .collect())
}

/// Runs the elimination for every `psi_i` and returns one certificate each.
pub fn eliminate_lemma2(
    system: &CoefficientSystem,
    psis: &[GroupFunction],
    opts: &EliminationOptions,
) -> Result<Vec<EliminationCertificate>, FeqError> {
    check_psis(system, psis)?;
    let status = system.check_condition_11()?;
    if !status.holds {
        return Err(FeqError::Condition11Violated {
            pair: status.pair.expect("violation has a pair"),
            witness: status.witness.expect("violation has a witness"),
        });
    }
    let eq3 = equation3_residual(system, psis, opts.space)?;
    if eq3 > opts.tol {
        return Err(FeqError::Equation3Violated { residual: eq3 });
    }
    (0..system.n())
        .map(|target| eliminate_one(system, psis, target, eq3, opts))
        .collect()
}

fn eliminate_one(
    system: &CoefficientSystem,
    psis: &[GroupFunction],
    target: usize,
    eq3: f64,
    opts: &EliminationOptions,
) -> Result<EliminationCertificate, FeqError> {
    let (m, n) = (system.m(), system.n());
    let y = system.group();
    let big = system.power_group();
    let f = combined(system, psis)?;
    let g_target = system.g_map(target);
    let adjoints: Vec<Homomorphism> = (0..m).map(|j| system.adjoint(j, target)).collect();
    let scale = (1u64 << (n - 1)) as f64;
    let lemma1_opts = EliminationOptions {
        tol: opts.tol * scale * (1u64 << m) as f64,
        ..*opts
    };
    let psi = &psis[target];
    let mut residual = eq3;
    let mut shifts = Vec::new();

    let blocks = if n == 1 {
        vec![Vec::new()]
    } else {
        select_shifts(system, target, opts.seed)?
    };
    for (b, block) in blocks.iter().enumerate() {
        let h = b + 1;
        let mut lhs = f.values().to_vec();
        for (l, s) in block {
            if !system.g_map(*l).apply(s)?.is_zero() {
                return Err(FeqError::Inconsistent(format!(
                    "shift for g_{} is outside its kernel",
                    l + 1
                )));
            }
            lhs = difference_table(&big, &lhs, big.index_of(s), opts.space);
            shifts.push(ShiftRecord {
                i: *l,
                h: split_blocks(s, m),
            });
        }
        let phi = if n == 1 {
            psi.clone()
        } else {
            psi.power_difference(h, n - 1, opts.space)
        };
        let rhs = phi.compose(&g_target)?;
        let gap = lhs
            .iter()
            .zip(rhs.values())
            .map(|(&a, &b)| opts.space.reduce(a - b).norm())
            .fold(0.0, f64::max);
        let gap_tol = opts.tol * scale * (1.0 + f.sup_norm());
        if gap > gap_tol {
            return Err(FeqError::Inconsistent(format!(
                "telescoped differences differ from the surviving term by {gap:e}"
            )));
        }
        let report = eliminate_lemma1(&adjoints, &phi, &lemma1_opts)?;
        if !report.degree_bound_met {
            return Err(FeqError::Inconsistent(format!(
                "difference of psi_{} along {} is not a polynomial of degree <= {} (residual {:e})",
                target + 1,
                y.element_at(h),
                m - 1,
                report.residual
            )));
        }
        residual = residual.max(report.residual);
    }
    let degree = polynomial_degree_with(psi, opts.tol, opts.space, ShiftFamily::Auto)
        .filter(|&d| d + 2 <= m + n)
        .ok_or_else(|| {
            FeqError::Inconsistent(format!(
                "psi_{} is not a polynomial of degree <= {}",
                target + 1,
                m + n - 2
            ))
        })?;
    Ok(EliminationCertificate {
        target,
        shifts,
        degree,
        residual,
    })
}

/// Replays a certificate: every shift must lie in its kernel exactly, cover
/// each nonzero element of `Y` once per eliminated function, and the
/// recomputed residuals and degree must agree.
pub fn validate_certificate(
    system: &CoefficientSystem,
    psis: &[GroupFunction],
    cert: &EliminationCertificate,
    opts: &EliminationOptions,
) -> Result<(), FeqError> {
    check_psis(system, psis)?;
    let (m, n) = (system.m(), system.n());
    if cert.target >= n {
        return Err(FeqError::InvalidArgument(format!("target {} out of range", cert.target)));
    }
    let y = system.group();
    let big = system.power_group();
    let expected = (y.order() - 1) * (n - 1);
    if cert.shifts.len() != expected {
        return Err(FeqError::Inconsistent(format!(
            "{} shifts recorded, {expected} expected",
            cert.shifts.len()
        )));
    }
    let others: Vec<usize> = (0..n).filter(|&l| l != cert.target).collect();
    let g_target = system.g_map(cert.target);
    for (k, rec) in cert.shifts.iter().enumerate() {
        let (b, pos) = (k / others.len().max(1), k % others.len().max(1));
        if rec.i != others[pos] || rec.h.len() != m {
            return Err(FeqError::Inconsistent(format!("shift {k} is out of order")));
        }
        let s = big.element(&rec.h.concat())?;
        if !system.g_map(rec.i).apply(&s)?.is_zero() {
            return Err(FeqError::Inconsistent(format!(
                "shift {k} is not in the kernel of g_{}",
                rec.i + 1
            )));
        }
        if y.index_of(&g_target.apply(&s)?) != b + 1 {
            return Err(FeqError::Inconsistent(format!("shift {k} has the wrong image")));
        }
    }
    let eq3 = equation3_residual(system, psis, opts.space)?;
    if eq3 > opts.tol {
        return Err(FeqError::Equation3Violated { residual: eq3 });
    }
    let fresh = eliminate_one(system, psis, cert.target, eq3, opts)?;
    if fresh.degree != cert.degree {
        return Err(FeqError::Inconsistent(format!(
            "recomputed degree {} differs from certified {}",
            fresh.degree, cert.degree
        )));
    }
    if fresh.residual > opts.tol.max(cert.residual) {
        return Err(FeqError::Inconsistent(format!(
            "recomputed residual {:e} exceeds certified {:e}",
            fresh.residual, cert.residual
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Distribution;

    fn g(m: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(m).unwrap()
    }

    fn system() -> CoefficientSystem {
        CoefficientSystem::from_scalars(&g(&[5]), &[vec![1, 1], vec![1, 2]]).unwrap()
    }

    #[test]
    fn lemma1_examples() {
        let y = g(&[7]);
        let id = Homomorphism::identity(&y);
        let c = GroupFunction::constant(&y, Complex64::new(1.5, 0.0));
        let r = eliminate_lemma1(&[id.clone(), id.clone()], &c, &Default::default()).unwrap();
        assert!(r.is_polynomial && r.degree == Some(0) && r.exhaustive);
        let chi = GroupFunction::character(&y, &y.element(&[1]).unwrap()).unwrap();
        let r = eliminate_lemma1(&[id.clone()], &chi, &Default::default()).unwrap();
        assert!(!r.is_polynomial && r.residual > 0.1);
        let zero = Homomorphism::zero(&y, &y);
        assert!(matches!(
            eliminate_lemma1(&[zero], &c, &Default::default()),
            Err(FeqError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn constants_certify_with_degree_zero() {
        let cs = system();
        let y = cs.group().clone();
        let psis = vec![
            GroupFunction::constant(&y, Complex64::new(0.3, 0.0)),
            GroupFunction::constant(&y, Complex64::new(-1.1, 0.0)),
        ];
        let opts = EliminationOptions::default();
        let certs = eliminate_lemma2(&cs, &psis, &opts).unwrap();
        assert_eq!(certs.len(), 2);
        for c in &certs {
            assert_eq!(c.degree, 0);
            assert_eq!(c.shifts.len(), 4);
            validate_certificate(&cs, &psis, c, &opts).unwrap();
        }
    }

    #[test]
    fn characters_certify_in_phase_mode() {
        let cs = system();
        let y = cs.group().clone();
        let psis: Vec<GroupFunction> = [2u64, 3]
            .iter()
            .map(|&a| {
                let d = Distribution::point_mass(&y, &y.element(&[a]).unwrap()).unwrap();
                let f = d.char_function();
                GroupFunction::log_of(&y, f.values()).unwrap()
            })
            .collect();
        let opts = EliminationOptions {
            space: Space::Phase,
            ..Default::default()
        };
        let certs = eliminate_lemma2(&cs, &psis, &opts).unwrap();
        assert!(certs.iter().all(|c| c.degree <= 1));
        // the linear-phase logs have jumps, so the additive check rejects them
        assert!(matches!(
            eliminate_lemma2(&cs, &psis, &Default::default()),
            Err(FeqError::Equation3Violated { .. })
        ));
    }

    #[test]
    fn perturbation_is_measured() {
        let cs = system();
        let y = cs.group().clone();
        let chi = GroupFunction::character(&y, &y.element(&[1]).unwrap()).unwrap();
        let psis = vec![
            GroupFunction::constant(&y, Complex64::new(0.3, 0.0)).add(&chi.scale(Complex64::new(1e-3, 0.0))).unwrap(),
            GroupFunction::constant(&y, Complex64::new(0.2, 0.0)),
        ];
        match eliminate_lemma2(&cs, &psis, &Default::default()) {
            Err(FeqError::Equation3Violated { residual }) => {
                assert!((residual - 1e-3).abs() < 1e-4, "{residual}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn condition_11_failure_is_reported() {
        let cs = CoefficientSystem::from_scalars(&g(&[5]), &[vec![1, 2], vec![1, 2]]).unwrap();
        let y = cs.group().clone();
        let psis = vec![GroupFunction::constant(&y, Complex64::new(0.0, 0.0)); 2];
        assert!(matches!(
            eliminate_lemma2(&cs, &psis, &Default::default()),
            Err(FeqError::Condition11Violated { pair: (0, 1), .. })
        ));
    }
}
