//! Averaging (ANOVA) decomposition of tables on `Y^m`.
//!
//! A table on `Y^m` with `|Y| = n` is indexed lexicographically, coordinate 0
//! most significant. `E_j` averages over coordinate `j` and copies the mean
//! back along it; the component of a coordinate set `T` is
//! `prod_{j in T} (I - E_j) prod_{j not in T} E_j` applied to the table.

use num_complex::Complex64;

pub(crate) fn stride(n: usize, m: usize, j: usize) -> usize {
    n.pow((m - 1 - j) as u32)
}

/// `E_j` applied to `table`.
pub(crate) fn average_out(table: &[Complex64], n: usize, m: usize, j: usize) -> Vec<Complex64> {
    let s = stride(n, m, j);
    let block = s * n;
    let mut out = vec![Complex64::new(0.0, 0.0); table.len()];
    let inv = 1.0 / n as f64;
    for base in (0..table.len()).step_by(block) {
        for offset in 0..s {
            let start = base + offset;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += table[start + k * s];
            }
            acc *= inv;
            for k in 0..n {
                out[start + k * s] = acc;
            }
        }
    }
    out
}

/// `prod_j (I - E_j)`: the part of the table not explained by functions of
/// fewer than `m` coordinates.
pub(crate) fn top_interaction(table: &[Complex64], n: usize, m: usize) -> Vec<Complex64> {
    let mut cur = table.to_vec();
    for j in 0..m {
        let avg = average_out(&cur, n, m, j);
        for (c, a) in cur.iter_mut().zip(avg) {
            *c -= a;
        }
    }
    cur
}

/// All components, indexed by the bit mask of `T` (bit `j` for coordinate
/// `j`). Each is stored as a full table on `Y^m`.
pub(crate) fn components(table: &[Complex64], n: usize, m: usize) -> Vec<Vec<Complex64>> {
    let full = (1usize << m) - 1;
    let mut out = Vec::with_capacity(1 << m);
    for mask in 0..=full {
        let mut cur = table.to_vec();
        for j in 0..m {
            let avg = average_out(&cur, n, m, j);
            if mask & (1 << j) != 0 {
                for (c, a) in cur.iter_mut().zip(avg) {
                    *c -= a;
                }
            } else {
                cur = avg;
            }
        }
        out.push(cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_sum_to_table() {
        let (n, m) = (3, 3);
        let table: Vec<Complex64> = (0..27)
            .map(|i| Complex64::new((i as f64 * 1.3).sin(), (i as f64 * 0.7).cos()))
            .collect();
        let comps = components(&table, n, m);
        for i in 0..table.len() {
            let s: Complex64 = comps.iter().map(|c| c[i]).sum();
            assert!((s - table[i]).norm() < 1e-12);
        }
        let top = top_interaction(&table, n, m);
        for i in 0..table.len() {
            assert!((top[i] - comps[7][i]).norm() < 1e-12);
        }
    }

    #[test]
    fn sums_of_lower_order_terms_have_no_top_part() {
        let (n, m) = (4, 2);
        let table: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new((i / 4) as f64 * 2.0 + ((i % 4) as f64).powi(2), 0.0))
            .collect();
        assert!(top_interaction(&table, n, m).iter().all(|v| v.norm() < 1e-12));
    }
}
