use num_complex::Complex64;
use serde::Serialize;

use super::anova::{components, stride};
use super::FeqError;
use crate::dist::JointCharFunction;
use crate::group::FiniteAbelianGroup;

/// Components of the principal logarithm of order above `k` larger than
/// this mean the logarithm cannot be split into factors.
const HOLONOMY_TOL: f64 = 1e-8;

pub const LOG_HOLONOMY: &str = "log-holonomy";

/// A factor `R_S` of a joint characteristic function, tabulated on `Y^k`
/// over the coordinates `coords` (zero-based, increasing).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Factor {
    pub coords: Vec<usize>,
    #[serde(serialize_with = "super::ser_complex_vec")]
    pub values: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DmkVerdict {
    pub member: bool,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Factor>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors_omitted: Option<String>,
}

/// All `size`-element subsets of `0..m` in lexicographic order.
pub(crate) fn subsets(m: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for j in start..m {
            cur.push(j);
            rec(j + 1, m, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= m {
        rec(0, m, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Precomputed index arithmetic for the multiplicative mixed differences
/// `prod_{eps in S} f(y + eps h)^{(-1)^{|S| - |eps|}}` over `(k+1)`-subsets `S`.
#[derive(Clone, Debug)]
pub struct DmkEvaluator {
    n: usize,
    m: usize,
    subsets: Vec<Vec<usize>>,
    add: Vec<u32>,
    strides: Vec<usize>,
    digits: Vec<u32>,
}

impl DmkEvaluator {
    pub fn new(base: &FiniteAbelianGroup, m: usize, k: usize) -> Result<Self, FeqError> {
        if m == 0 || k == 0 || k > m {
            return Err(FeqError::InvalidArgument(format!(
                "need 1 <= k <= m, got k = {k}, m = {m}"
            )));
        }
        let n = base.order();
        let total = n
            .checked_pow(m as u32)
            .filter(|&t| t <= 1 << 26)
            .ok_or_else(|| FeqError::InvalidArgument("joint table too large".into()))?;
        let strides = (0..m).map(|j| stride(n, m, j)).collect();
        let mut digits = Vec::with_capacity(total * m);
        for y in 0..total {
            let mut rest = y;
            let mut d = vec![0u32; m];
            for j in (0..m).rev() {
                d[j] = (rest % n) as u32;
                rest /= n;
            }
            digits.extend(d);
        }
        Ok(DmkEvaluator {
            n,
            m,
            subsets: subsets(m, k + 1),
            add: base.add_table(),
            strides,
            digits,
        })
    }

    /// Largest `|mixed difference - 1|`. Stops as soon as the running
    /// maximum exceeds `stop_above`, returning that partial maximum.
    /// Zero or non-finite values make the residual infinite.
    pub fn residual(&self, values: &[Complex64], stop_above: f64) -> f64 {
        let (n, m) = (self.n, self.m);
        debug_assert_eq!(values.len(), self.digits.len() / m);
        if n == 1 {
            return 0.0;
        }
        let inv: Vec<Complex64> = values.iter().map(|v| v.inv()).collect();
        let total = values.len();
        let mut best = 0.0f64;
        let mut delta = vec![0isize; m];
        for sub in &self.subsets {
            let s = sub.len();
            let mut h = vec![1usize; s];
            loop {
                for y in 0..total {
                    let dig = &self.digits[y * m..(y + 1) * m];
                    for t in 0..s {
                        let j = sub[t];
                        let d = dig[j] as usize;
                        let moved = self.add[d * n + h[t]] as isize;
                        delta[t] = (moved - d as isize) * self.strides[j] as isize;
                    }
                    let mut prod = Complex64::new(1.0, 0.0);
                    for eps in 0..(1usize << s) {
                        let mut idx = y as isize;
                        for (t, dt) in delta.iter().enumerate().take(s) {
                            if (eps >> t) & 1 == 1 {
                                idx += dt;
                            }
                        }
                        let idx = idx as usize;
                        prod *= if (s - eps.count_ones() as usize) % 2 == 1 {
                            inv[idx]
                        } else {
                            values[idx]
                        };
                    }
                    let r = (prod - 1.0).norm();
                    let r = if r.is_nan() { f64::INFINITY } else { r };
                    if r > best {
                        best = r;
                        if best > stop_above {
                            return best;
                        }
                    }
                }
                // next nonzero shift tuple
                let mut t = 0;
                while t < s {
                    h[t] += 1;
                    if h[t] < n {
                        break;
                    }
                    h[t] = 1;
                    t += 1;
                }
                if t == s {
                    break;
                }
            }
        }
        best
    }
}

/// Decides whether `f` lies in `D_{m,k}` by the multiplicative mixed
/// differences of order `k + 1`; on success also tries to produce explicit
/// factors from the principal logarithm.
pub fn is_in_dmk(f: &JointCharFunction, k: usize, tol: f64) -> Result<DmkVerdict, FeqError> {
    let evaluator = DmkEvaluator::new(f.base(), f.m(), k)?;
    let min_abs = f.min_abs();
    if min_abs <= tol {
        return Err(FeqError::VanishingChar { min_abs });
    }
    let residual = evaluator.residual(f.values(), f64::INFINITY);
    let member = residual <= tol;
    let (factors, factors_omitted) = if member {
        match factorize(f, k) {
            Some(factors) => (Some(factors), None),
            None => (None, Some(LOG_HOLONOMY.to_string())),
        }
    } else {
        (None, None)
    };
    Ok(DmkVerdict {
        member,
        residual,
        factors,
        factors_omitted,
    })
}

fn factorize(f: &JointCharFunction, k: usize) -> Option<Vec<Factor>> {
    let n = f.base().order();
    let m = f.m();
    let logs: Vec<Complex64> = f.values().iter().map(|v| v.ln()).collect();
    let comps = components(&logs, n, m);
    let high = comps
        .iter()
        .enumerate()
        .filter(|(mask, _)| mask.count_ones() as usize > k)
        .flat_map(|(_, c)| c.iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if high > HOLONOMY_TOL {
        return None;
    }
    let groups = subsets(m, k);
    let masks: Vec<usize> = groups
        .iter()
        .map(|g| g.iter().map(|&j| 1usize << j).sum())
        .collect();
    let mut sums = vec![vec![Complex64::new(0.0, 0.0); logs.len()]; groups.len()];
    for (mask, comp) in comps.iter().enumerate() {
        if mask.count_ones() as usize > k {
            continue;
        }
        let owner = masks
            .iter()
            .position(|&g| g & mask == mask)
            .expect("some k-subset contains every smaller set");
        for (s, c) in sums[owner].iter_mut().zip(comp) {
            *s += c;
        }
    }
    let mut factors = Vec::with_capacity(groups.len());
    for (coords, sum) in groups.iter().zip(&sums) {
        let size = n.pow(coords.len() as u32);
        let at_zero = sum[0].exp();
        let values: Vec<Complex64> = (0..size)
            .map(|z| {
                let mut rest = z;
                let mut idx = 0;
                for &j in coords.iter().rev() {
                    idx += (rest % n) * stride(n, m, j);
                    rest /= n;
                }
                sum[idx].exp() / at_zero
            })
            .collect();
        factors.push(Factor {
            coords: coords.clone(),
            values,
        });
    }
    let worst = reconstruction_error(f, &factors);
    (worst <= 1e-6).then_some(factors)
}

/// `max_y |prod_S R_S(y_S) - f(y)|`.
pub fn reconstruction_error(f: &JointCharFunction, factors: &[Factor]) -> f64 {
    let n = f.base().order();
    let m = f.m();
    let mut worst = 0.0f64;
    for (y, &v) in f.values().iter().enumerate() {
        let mut digits = vec![0usize; m];
        let mut rest = y;
        for j in (0..m).rev() {
            digits[j] = rest % n;
            rest /= n;
        }
        let mut prod = Complex64::new(1.0, 0.0);
        for fac in factors {
            let z = fac.coords.iter().fold(0, |acc, &j| acc * n + digits[j]);
            prod *= fac.values[z];
        }
        worst = worst.max((prod - v).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{CharFunction, Distribution};

    fn g(m: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(m).unwrap()
    }

    fn marginal_chars(y: &FiniteAbelianGroup, masses: &[&[f64]]) -> Vec<CharFunction> {
        masses
            .iter()
            .map(|p| Distribution::new(y, p.to_vec()).unwrap().char_function())
            .collect()
    }

    #[test]
    fn independent_coordinates_are_in_dm1() {
        let y = g(&[3]);
        let chars = marginal_chars(&y, &[&[0.7, 0.2, 0.1], &[0.5, 0.3, 0.2]]);
        let f = JointCharFunction::product_of_marginals(&chars).unwrap();
        let v = is_in_dmk(&f, 1, 1e-9).unwrap();
        assert!(v.member && v.residual <= 1e-12, "{}", v.residual);
        let factors = v.factors.unwrap();
        assert_eq!(factors.len(), 2);
        assert!(reconstruction_error(&f, &factors) < 1e-12);
        // k = m is vacuous
        assert_eq!(is_in_dmk(&f, 2, 1e-9).unwrap().residual, 0.0);
        assert!(is_in_dmk(&f, 3, 1e-9).is_err());
        assert!(is_in_dmk(&f, 0, 1e-9).is_err());
    }

    #[test]
    fn phase_bump_breaks_membership() {
        let y = g(&[3]);
        let chars = marginal_chars(&y, &[&[0.7, 0.2, 0.1], &[0.5, 0.3, 0.2]]);
        let mut f = JointCharFunction::product_of_marginals(&chars).unwrap();
        // y = (1, 1) sits at index 4
        f.values_mut()[4] *= Complex64::from_polar(1.0, 0.3);
        let v = is_in_dmk(&f, 1, 1e-9).unwrap();
        assert!(!v.member);
        assert!((v.residual - 2.0 * 0.15f64.sin()).abs() < 1e-9 || v.residual > 0.29);
        assert!(v.factors.is_none());
    }

    #[test]
    fn vanishing_joint_is_rejected() {
        let y = g(&[2]);
        let chars = marginal_chars(&y, &[&[0.5, 0.5], &[0.9, 0.1]]);
        let f = JointCharFunction::product_of_marginals(&chars).unwrap();
        assert!(matches!(is_in_dmk(&f, 1, 1e-9), Err(FeqError::VanishingChar { .. })));
    }

    #[test]
    fn early_exit_returns_a_lower_bound() {
        let y = g(&[3]);
        let chars = marginal_chars(&y, &[&[0.7, 0.2, 0.1], &[0.5, 0.3, 0.2]]);
        let mut f = JointCharFunction::product_of_marginals(&chars).unwrap();
        f.values_mut()[4] *= Complex64::from_polar(1.0, 0.3);
        let ev = DmkEvaluator::new(&y, 2, 1).unwrap();
        let full = ev.residual(f.values(), f64::INFINITY);
        let partial = ev.residual(f.values(), 1e-3);
        assert!(partial > 1e-3 && partial <= full);
    }
}
