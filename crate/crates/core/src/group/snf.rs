use super::FiniteAbelianGroup;

/// Diagonal of the Smith normal form, `s_1 | s_2 | ...`, all non-negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub diagonal: Vec<i128>,
}

pub fn smith_normal_form(matrix: &[Vec<i128>]) -> SmithForm {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<i128>> = matrix.to_vec();
    let mut diagonal = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if a[i][j] != 0
                        && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t].div_euclid(p);
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j].div_euclid(p);
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold any offending row into the pivot row
            let offender = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| a[i][j] % p != 0));
            match offender {
                Some(i) => {
                    for j in t..cols {
                        a[t][j] += a[i][j];
                    }
                }
                None => break,
            }
        }
        diagonal.push(a[t][t].abs());
    }
    SmithForm { diagonal }
}

/// Invariant factors (entries other than 1) of the cokernel of a square
/// matrix; `[1]` when the cokernel is trivial.
pub fn invariant_factors_of_matrix(matrix: &[Vec<i128>]) -> Vec<u64> {
    let mut out: Vec<u64> = smith_normal_form(matrix)
        .diagonal
        .into_iter()
        .filter(|&s| s != 1)
        .map(|s| s as u64)
        .collect();
    if out.is_empty() {
        out.push(1);
    }
    out
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn partitions(n: u32, max: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every abelian group of order `<= max_order`, up to isomorphism, in
/// invariant-factor form (`d_1 | d_2 | ...`).
pub fn catalog(max_order: u64) -> Vec<FiniteAbelianGroup> {
    let mut out = Vec::new();
    for n in 1..=max_order {
        let primes = factorize(n);
        let mut combos: Vec<Vec<u64>> = vec![Vec::new()];
        for &(p, e) in &primes {
            let mut next = Vec::new();
            for combo in &combos {
                for part in partitions(e, e) {
                    // part is descending; the i-th largest invariant factor gets p^part[i]
                    let len = combo.len().max(part.len());
                    let mut merged = vec![1u64; len];
                    for (i, slot) in merged.iter_mut().enumerate() {
                        let from_combo = combo.get(i).copied().unwrap_or(1);
                        let from_part = part.get(i).map_or(1, |&k| p.pow(k));
                        *slot = from_combo * from_part;
                    }
                    next.push(merged);
                }
            }
            combos = next;
        }
        let mut groups: Vec<Vec<u64>> = combos
            .into_iter()
            .map(|mut c| {
                c.reverse();
                if c.is_empty() {
                    c.push(1);
                }
                c
            })
            .collect();
        groups.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        for moduli in groups {
            let m: Vec<i64> = moduli.iter().map(|&d| d as i64).collect();
            out.push(FiniteAbelianGroup::new(&m).expect("positive moduli"));
        }
    }
    out
}
