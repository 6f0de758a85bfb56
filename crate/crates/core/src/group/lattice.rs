//! Row echelon (Hermite) form of lattices `L` with `diag(d) Z^r <= L <= Z^r`.
//!
//! Subgroups of `Z_{d_1} x ... x Z_{d_r}` correspond one-to-one to such
//! lattices. The basis is kept upper triangular with positive pivots
//! `p_k | d_k`; every entry right of a pivot is reduced, so all values stay
//! below the moduli and products fit comfortably in `i128`.
//!
//! Optionally each row carries a tag vector recording which combination of
//! the inserted generators produced it. Generators that reduce to zero leave
//! their tag in `kernel`, which is how kernels and preimages are solved.

pub(crate) fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a as i128, b as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (old_r, old_s, old_t) = (-old_r, -old_s, -old_t);
    }
    (old_r as i64, old_s as i64, old_t as i64)
}

#[derive(Clone, Debug)]
pub(crate) struct Echelon {
    moduli: Vec<i64>,
    rows: Vec<Vec<i64>>,
    tag_moduli: Vec<i64>,
    tags: Vec<Vec<i64>>,
    kernel: Vec<Vec<i64>>,
}

fn combine(a: i64, x: i64, b: i64, y: i64) -> i128 {
    a as i128 * x as i128 + b as i128 * y as i128
}

impl Echelon {
    /// Starts from the relation lattice `diag(moduli)`. Pass an empty
    /// `tag_moduli` to disable tag tracking.
    pub(crate) fn new(moduli: &[u64], tag_moduli: &[u64]) -> Self {
        let r = moduli.len();
        let moduli: Vec<i64> = moduli.iter().map(|&d| d as i64).collect();
        let rows = (0..r)
            .map(|k| {
                let mut row = vec![0i64; r];
                row[k] = moduli[k];
                row
            })
            .collect();
        let tag_moduli: Vec<i64> = tag_moduli.iter().map(|&d| d as i64).collect();
        let tags = if tag_moduli.is_empty() {
            Vec::new()
        } else {
            vec![vec![0i64; tag_moduli.len()]; r]
        };
        Echelon {
            moduli,
            rows,
            tag_moduli,
            tags,
            kernel: Vec::new(),
        }
    }

    fn tracking(&self) -> bool {
        !self.tag_moduli.is_empty()
    }

    fn reduce_tail(moduli: &[i64], v: &mut [i64], from: usize) {
        for j in from..v.len() {
            v[j] = v[j].rem_euclid(moduli[j]);
        }
    }

    fn reduce_tag(&self, t: &mut [i64]) {
        for (c, &d) in t.iter_mut().zip(&self.tag_moduli) {
            *c = c.rem_euclid(d);
        }
    }

    pub(crate) fn insert(&mut self, v: &[i64], tag: &[i64]) {
        let r = self.moduli.len();
        debug_assert_eq!(v.len(), r);
        let mut v = v.to_vec();
        Self::reduce_tail(&self.moduli, &mut v, 0);
        let mut t = tag.to_vec();
        if self.tracking() {
            self.reduce_tag(&mut t);
        }
        for k in 0..r {
            if v[k] == 0 {
                continue;
            }
            let bk = self.rows[k][k];
            let (g, s, u) = ext_gcd(bk, v[k]);
            let (p, q) = (bk / g, v[k] / g);
            let mut nb = vec![0i64; r];
            let mut nv = vec![0i64; r];
            for j in k..r {
                let b = self.rows[k][j];
                nb[j] = combine(s, b, u, v[j]).rem_euclid(self.moduli[j] as i128) as i64;
                nv[j] = combine(p, v[j], -q, b).rem_euclid(self.moduli[j] as i128) as i64;
            }
            nb[k] = g;
            nv[k] = 0;
            if self.tracking() {
                let tk = &self.tags[k];
                let mut ntb = vec![0i64; t.len()];
                let mut ntv = vec![0i64; t.len()];
                for (c, &d) in self.tag_moduli.iter().enumerate() {
                    ntb[c] = combine(s, tk[c], u, t[c]).rem_euclid(d as i128) as i64;
                    ntv[c] = combine(p, t[c], -q, tk[c]).rem_euclid(d as i128) as i64;
                }
                self.tags[k] = ntb;
                t = ntv;
            }
            self.rows[k] = nb;
            v = nv;
        }
        if self.tracking() && t.iter().any(|&c| c != 0) {
            self.kernel.push(t);
        }
    }

    /// Brings the basis to its unique reduced form.
    pub(crate) fn normalize(&mut self) {
        let r = self.moduli.len();
        for k in 0..r {
            let p = self.rows[k][k];
            for i in 0..k {
                let q = self.rows[i][k].div_euclid(p);
                if q == 0 {
                    continue;
                }
                for j in k..r {
                    self.rows[i][j] -= q * self.rows[k][j];
                }
                if self.tracking() {
                    for c in 0..self.tag_moduli.len() {
                        let v = self.tags[i][c] as i128 - q as i128 * self.tags[k][c] as i128;
                        self.tags[i][c] = v.rem_euclid(self.tag_moduli[c] as i128) as i64;
                    }
                }
            }
        }
    }

    pub(crate) fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub(crate) fn kernel(&self) -> &[Vec<i64>] {
        &self.kernel
    }

    pub(crate) fn pivots(&self) -> Vec<i64> {
        (0..self.moduli.len()).map(|k| self.rows[k][k]).collect()
    }

    /// Tag of some combination equal to `v` modulo the relations, or `None`
    /// if `v` is not in the lattice.
    pub(crate) fn solve(&self, v: &[i64]) -> Option<Vec<i64>> {
        let r = self.moduli.len();
        let mut v = v.to_vec();
        Self::reduce_tail(&self.moduli, &mut v, 0);
        let mut t = vec![0i128; self.tag_moduli.len()];
        for k in 0..r {
            let p = self.rows[k][k];
            if v[k] % p != 0 {
                return None;
            }
            let q = v[k] / p;
            if q == 0 {
                continue;
            }
            for j in k..r {
                v[j] = (v[j] as i128 - q as i128 * self.rows[k][j] as i128)
                    .rem_euclid(self.moduli[j] as i128) as i64;
            }
            for (c, tc) in t.iter_mut().enumerate() {
                *tc = (*tc - q as i128 * self.tags[k][c] as i128)
                    .rem_euclid(self.tag_moduli[c] as i128);
            }
        }
        debug_assert!(v.iter().all(|&c| c == 0));
        // `v - sum q_k row_k = 0`, so `v = sum q_k row_k` and its tag is the negation.
        Some(
            t.iter()
                .zip(&self.tag_moduli)
                .map(|(&c, &d)| (-c).rem_euclid(d as i128) as i64)
                .collect(),
        )
    }
}
