//! Binomial probabilities and compensated summation.

use crate::error::{domain, Result};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Exact binomial coefficient for small arguments (k <= 62 fits in u64).
fn choose_u64(k: u32, r: u32) -> u64 {
    let r = r.min(k - r) as u64;
    let k = k as u64;
    let mut c = 1u64;
    for i in 1..=r {
        // c * (k - r + i) is divisible by i at every step
        c = c * (k - r + i) / i;
    }
    c
}

/// `ln C(k, r)` as a sum of `min(r, k-r)` logarithms of ratios.
pub fn ln_choose(k: u32, r: u32) -> f64 {
    assert!(r <= k);
    let m = r.min(k - r);
    let base = (k - m) as f64;
    compensated_sum((1..=m).map(|i| ((base + i as f64) / i as f64).ln()))
}

/// Rows up to this size use direct products; larger ones go through logs.
const DIRECT_LIMIT: u32 = 30;

/// `C(k, r) q^r (1-q)^(k-r)`.
pub fn binom_pmf(k: u32, r: u32, q: f64) -> Result<f64> {
    if r > k {
        return domain(format!("r = {r} exceeds k = {k}"));
    }
    if !(0.0..=1.0).contains(&q) {
        return domain(format!("success probability {q} outside [0, 1]"));
    }
    Ok(pmf_unchecked(k, r, q))
}

#[inline]
fn pmf_unchecked(k: u32, r: u32, q: f64) -> f64 {
    // 0^0 = 1 at both ends
    if q == 0.0 {
        return if r == 0 { 1.0 } else { 0.0 };
    }
    if q == 1.0 {
        return if r == k { 1.0 } else { 0.0 };
    }
    if k <= DIRECT_LIMIT {
        choose_u64(k, r) as f64 * q.powi(r as i32) * (1.0 - q).powi((k - r) as i32)
    } else {
        (ln_choose(k, r) + r as f64 * q.ln() + (k - r) as f64 * (-q).ln_1p()).exp()
    }
}

/// The full pmf of `B(k, q)` as a vector of length `k + 1`.
pub fn binom_row(k: u32, q: f64) -> Vec<f64> {
    debug_assert!((0.0..=1.0).contains(&q));
    if q == 0.0 || q == 1.0 || k <= DIRECT_LIMIT {
        return (0..=k).map(|r| pmf_unchecked(k, r, q)).collect();
    }
    let lq = q.ln();
    let lp = (-q).ln_1p();
    let mut row = Vec::with_capacity(k as usize + 1);
    // ln C(k, r) by the ratio recurrence C(k, r+1) = C(k, r) (k-r)/(r+1)
    let mut lc = CompensatedSum::new();
    for r in 0..=k {
        if r > 0 {
            lc.add(((k - r + 1) as f64 / r as f64).ln());
        }
        row.push((lc.value() + r as f64 * lq + (k - r) as f64 * lp).exp());
    }
    row
}

/// Lower tail `P(B(k, q) <= m)`.
pub fn binom_cdf(k: u32, m: u32, q: f64) -> f64 {
    let row = binom_row(k, q);
    compensated_sum(row[..=(m.min(k) as usize)].iter().copied())
}

/// Rows of `B(k, q)` for `k = 0, 1, ..., k_max`, built by the convex update
/// `row_{k+1}(r) = q row_k(r-1) + (1-q) row_k(r)`. Every step is a convex
/// combination of non-negative numbers, so relative error grows only
/// linearly in `k`.
pub struct BinomRows {
    q: f64,
    row: Vec<f64>,
    k: u32,
}

impl BinomRows {
    pub fn new(q: f64) -> Self {
        let mut row = Vec::with_capacity(64);
        row.push(1.0);
        Self { q, row, k: 0 }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn row(&self) -> &[f64] {
        &self.row
    }

    pub fn advance(&mut self) {
        let q = self.q;
        let p = 1.0 - q;
        self.row.push(0.0);
        for r in (1..self.row.len()).rev() {
            self.row[r] = q * self.row[r - 1] + p * self.row[r];
        }
        self.row[0] *= p;
        self.k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_edge_values() {
        assert_eq!(binom_pmf(4, 0, 0.0).unwrap(), 1.0);
        assert!((binom_pmf(5, 2, 0.5).unwrap() - 0.3125).abs() < 1e-16);
        assert_eq!(binom_pmf(7, 7, 1.0).unwrap(), 1.0);
        assert_eq!(binom_pmf(7, 6, 1.0).unwrap(), 0.0);
        assert!(binom_pmf(3, 4, 0.5).is_err());
        assert!(binom_pmf(3, 1, 1.5).is_err());
    }

    #[test]
    fn direct_and_log_paths_agree() {
        for &q in &[0.01f64, 0.3, 0.5, 0.77] {
            for r in 0..=30 {
                let direct =
                    choose_u64(30, r) as f64 * q.powi(r as i32) * (1.0 - q).powi(30 - r as i32);
                let logged =
                    (ln_choose(30, r) + r as f64 * q.ln() + (30 - r) as f64 * (-q).ln_1p()).exp();
                assert!(
                    (direct - logged).abs() <= 1e-13 * direct.max(1e-300),
                    "{q} {r}"
                );
            }
        }
    }

    #[test]
    fn rows_are_normalised() {
        for &k in &[1u32, 10, 31, 99, 500] {
            for &q in &[0.0, 0.1, 0.5, 0.93, 1.0] {
                let s = compensated_sum(binom_row(k, q));
                assert!((s - 1.0).abs() < 1e-12, "k={k} q={q} s={s}");
            }
        }
    }

    #[test]
    fn recurrence_rows_match_direct_rows() {
        let mut rows = BinomRows::new(0.37);
        for _ in 0..80 {
            rows.advance();
            let direct = binom_row(rows.k(), 0.37);
            for (a, b) in rows.row().iter().zip(&direct) {
                assert!((a - b).abs() <= 1e-12 * b.max(1e-200));
            }
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(1e-17);
        }
        assert!((acc.value() - (1.0 + 1e-14)).abs() < 1e-16);
    }
}
