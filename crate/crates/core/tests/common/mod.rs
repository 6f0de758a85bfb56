//! Oracles and generators shared by the integration tests. Everything here
//! is computed from definitions, independently of the library's fast paths.
#![allow(dead_code)]

use std::f64::consts::TAU;

use charlab::dist::{Distribution, JointCharFunction};
use charlab::group::FiniteAbelianGroup;
use charlab::homs::{CoefficientSystem, Homomorphism};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn g(moduli: &[i64]) -> FiniteAbelianGroup {
    FiniteAbelianGroup::new(moduli).unwrap()
}

/// Random moduli with product at most `max_order` (possibly not in
/// invariant-factor form).
pub fn random_group(rng: &mut ChaCha8Rng, max_order: u64) -> FiniteAbelianGroup {
    let rank = rng.random_range(1..=3);
    let mut moduli = Vec::new();
    let mut left = max_order;
    for _ in 0..rank {
        if left < 2 {
            break;
        }
        let d = rng.random_range(2..=left.min(64));
        moduli.push(d as i64);
        left /= d;
    }
    g(&moduli)
}

/// Coordinates of the element with lexicographic index `idx`.
pub fn coords(moduli: &[u64], mut idx: usize) -> Vec<u64> {
    let mut out = vec![0; moduli.len()];
    for k in (0..moduli.len()).rev() {
        out[k] = idx as u64 % moduli[k];
        idx /= moduli[k] as usize;
    }
    out
}

pub fn index(moduli: &[u64], c: &[u64]) -> usize {
    c.iter()
        .zip(moduli)
        .fold(0, |acc, (&x, &d)| acc * d as usize + (x % d) as usize)
}

/// `exp(2 pi i sum_k x_k y_k / d_k)`.
pub fn pairing(moduli: &[u64], x: &[u64], y: &[u64]) -> Complex64 {
    let mut frac = 0.0;
    for ((&a, &b), &d) in x.iter().zip(y).zip(moduli) {
        frac += ((a as u128 * b as u128) % d as u128) as f64 / d as f64;
    }
    Complex64::from_polar(1.0, TAU * frac)
}

/// `sum_x mu(x) (x, y)` summed directly.
pub fn direct_char(group: &FiniteAbelianGroup, probs: &[f64]) -> Vec<Complex64> {
    let d = group.moduli();
    let n = group.order();
    let cs: Vec<Vec<u64>> = (0..n).map(|i| coords(d, i)).collect();
    (0..n)
        .map(|y| {
            probs
                .iter()
                .enumerate()
                .filter(|(_, &p)| p != 0.0)
                .map(|(x, &p)| pairing(d, &cs[x], &cs[y]) * p)
                .sum()
        })
        .collect()
}

pub fn direct_convolve(group: &FiniteAbelianGroup, a: &[f64], b: &[f64]) -> Vec<f64> {
    let d = group.moduli();
    let n = group.order();
    let cs: Vec<Vec<u64>> = (0..n).map(|i| coords(d, i)).collect();
    let mut out = vec![0.0; n];
    for x in 0..n {
        if a[x] == 0.0 {
            continue;
        }
        for y in 0..n {
            let s: Vec<u64> = cs[x].iter().zip(&cs[y]).zip(d).map(|((p, q), m)| (p + q) % m).collect();
            out[index(d, &s)] += a[x] * b[y];
        }
    }
    out
}

/// `lambda delta_0 + (1 - lambda) w` with `w` drawn from a flat Dirichlet
/// law, optionally with some atoms removed.
pub fn random_distribution(rng: &mut ChaCha8Rng, group: &FiniteAbelianGroup, sparse: bool) -> Distribution {
    let n = group.order();
    let mut w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    if sparse {
        for x in w.iter_mut() {
            if rng.random_bool(0.5) {
                *x = 0.0;
            }
        }
        let keep = rng.random_range(0..n);
        w[keep] += 1.0;
    }
    Distribution::normalized(group, w).unwrap()
}

pub fn point_mass(group: &FiniteAbelianGroup, idx: usize) -> Distribution {
    let mut p = vec![0.0; group.order()];
    p[idx] = 1.0;
    Distribution::new(group, p).unwrap()
}

/// Random automorphism of `y`, drawn by rejection.
pub fn random_automorphism(rng: &mut ChaCha8Rng, y: &FiniteAbelianGroup) -> Homomorphism {
    loop {
        let f = Homomorphism::random(y, y, rng);
        if f.is_auto() {
            return f;
        }
    }
}

/// A random `m x n` system of automorphisms satisfying condition 11, or
/// `None` if none was found in a bounded number of draws.
pub fn random_system_with_condition_11(
    rng: &mut ChaCha8Rng,
    y: &FiniteAbelianGroup,
    m: usize,
    n: usize,
) -> Option<CoefficientSystem> {
    for _ in 0..200 {
        let alphas: Vec<Vec<Homomorphism>> = (0..m)
            .map(|_| (0..n).map(|_| random_automorphism(rng, y)).collect())
            .collect();
        let cs = CoefficientSystem::new(y, alphas).unwrap();
        if cs.check_condition_11().unwrap().holds {
            return Some(cs);
        }
    }
    None
}

/// Nonvanishing member of `D_{m,m-1}`: a product of random factors each
/// depending on `m - 1` of the coordinates, scaled to 1 at the origin.
pub fn constructed_member(rng: &mut ChaCha8Rng, base: &FiniteAbelianGroup, m: usize) -> JointCharFunction {
    let n = base.order();
    let size = n.pow(m as u32);
    let mut values = vec![Complex64::new(1.0, 0.0); size];
    for skip in 0..m {
        let factor: Vec<Complex64> = (0..n.pow(m as u32 - 1))
            .map(|_| Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..TAU)))
            .collect();
        for (y, v) in values.iter_mut().enumerate() {
            let digits = joint_digits(y, n, m);
            let key = digits
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != skip)
                .fold(0, |acc, (_, &d)| acc * n + d);
            *v *= factor[key];
        }
    }
    let v0 = values[0];
    for v in &mut values {
        *v /= v0;
    }
    JointCharFunction::new(base, m, values).unwrap()
}

/// Base-group indices `(y_1, ..., y_m)` of a joint index.
pub fn joint_digits(mut y: usize, n: usize, m: usize) -> Vec<usize> {
    let mut out = vec![0; m];
    for j in (0..m).rev() {
        out[j] = y % n;
        y /= n;
    }
    out
}

/// Anchored interaction oracle: `f` lies in `D_{m,m-1}` exactly when
/// `prod_{S subset [m]} f(y_S, 0)^{(-1)^{m - |S|}} = 1` for all `y`, where
/// `(y_S, 0)` keeps the coordinates in `S` and zeroes the rest. Returns the
/// largest deviation from 1.
pub fn anchored_interaction_residual(values: &[Complex64], n: usize, m: usize) -> f64 {
    let mut worst = 0.0f64;
    for y in 0..values.len() {
        let digits = joint_digits(y, n, m);
        let mut prod = Complex64::new(1.0, 0.0);
        for mask in 0..(1usize << m) {
            let idx = (0..m).fold(0, |acc, j| acc * n + if mask >> j & 1 == 1 { digits[j] } else { 0 });
            let v = values[idx];
            if (m - mask.count_ones() as usize) % 2 == 0 {
                prod *= v;
            } else {
                prod /= v;
            }
        }
        worst = worst.max((prod - 1.0).norm());
    }
    worst
}
