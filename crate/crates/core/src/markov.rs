//! Exact analysis of the active-count chain `n rho_{t+1} ~ B(n, mu(rho_t))`.

use std::fmt::Write as _;

use crate::error::{config, domain, PcaError, Result};
use crate::mean_field::MeanFieldMap;
use crate::numeric::{binom_row, compensated_sum};

/// Largest chain handled with a dense matrix.
pub const MAX_DENSE_N: usize = 2000;

/// Row-stochastic `(n + 1) x (n + 1)` matrix; entry `[k][r]` is the
/// probability of `r` active nodes after one step from `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    n: usize,
    entries: Vec<f64>,
}

impl TransitionKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> usize {
        self.n + 1
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let s = self.states();
        &self.entries[k * s..(k + 1) * s]
    }

    pub fn get(&self, k: usize, r: usize) -> f64 {
        self.entries[k * self.states() + r]
    }

    /// `pi P` for a row vector `pi`.
    pub fn apply(&self, pi: &[f64]) -> Vec<f64> {
        let s = self.states();
        let mut out = vec![0.0; s];
        for (k, &w) in pi.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &pkr) in out.iter_mut().zip(self.row(k)) {
                *o += w * pkr;
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let s = self.states();
        let mut out = String::from("k");
        for r in 0..s {
            let _ = write!(out, ",r{r}");
        }
        out.push('\n');
        for k in 0..s {
            let _ = write!(out, "{k}");
            for v in self.row(k) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// `P[k][r] = C(n, r) m^r (1 - m)^(n - r)` with `m = mu(k / n)`. Rows of a
/// symmetric map are filled for `k <= n / 2` and mirrored, so
/// `P[k][r] = P[n - k][n - r]` holds bit for bit.
pub fn build_kernel(n: usize, map: &MeanFieldMap) -> Result<TransitionKernel> {
    if n == 0 || n > MAX_DENSE_N {
        return config(format!("kernel size n = {n} outside 1..={MAX_DENSE_N}"));
    }
    let s = n + 1;
    let mut entries = vec![0.0; s * s];
    let symmetric = map.is_symmetric();
    for k in 0..s {
        if symmetric && k > n / 2 {
            let mirror = n - k;
            for r in 0..s {
                entries[k * s + r] = entries[mirror * s + (n - r)];
            }
            continue;
        }
        let m = map.eval(k as f64 / n as f64);
        entries[k * s..(k + 1) * s].copy_from_slice(&binom_row(n as u32, m));
    }
    Ok(TransitionKernel { n, entries })
}

fn check_distribution(pi: &[f64], states: usize) -> Result<()> {
    if pi.len() != states {
        return domain(format!(
            "distribution has {} entries, expected {states}",
            pi.len()
        ));
    }
    if pi.iter().any(|&x| !(x >= 0.0)) {
        return domain("distribution has negative or NaN entries");
    }
    let total = compensated_sum(pi.iter().copied());
    if (total - 1.0).abs() > 1e-9 {
        return domain(format!("distribution sums to {total}, not 1"));
    }
    Ok(())
}

fn renormalize(pi: &mut [f64]) {
    let total = compensated_sum(pi.iter().copied());
    assert!(
        (total - 1.0).abs() < 1e-10,
        "probability mass drifted to {total}"
    );
    for x in pi.iter_mut() {
        *x /= total;
    }
}

/// `pi_0, pi_1, ..., pi_T` with `pi_{t+1} = pi_t P`.
pub fn evolve(kernel: &TransitionKernel, pi0: &[f64], steps: usize) -> Result<Vec<Vec<f64>>> {
    check_distribution(pi0, kernel.states())?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(pi0.to_vec());
    for _ in 0..steps {
        let mut next = kernel.apply(out.last().expect("non-empty"));
        renormalize(&mut next);
        out.push(next);
    }
    Ok(out)
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * compensated_sum(a.iter().zip(b).map(|(x, y)| (x - y).abs()))
}

/// Power iteration from the uniform distribution until successive
/// iterates differ by less than `tol` in total variation.
pub fn stationary(kernel: &TransitionKernel, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let s = kernel.states();
    let mut pi = vec![1.0 / s as f64; s];
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        let mut next = kernel.apply(&pi);
        renormalize(&mut next);
        change = total_variation(&pi, &next);
        pi = next;
        if change < tol {
            return Ok(pi);
        }
    }
    Err(PcaError::Convergence {
        iterations: max_iter,
        residual: change,
    })
}

/// `||pi P - pi||_1`.
pub fn stationarity_residual(kernel: &TransitionKernel, pi: &[f64]) -> f64 {
    let next = kernel.apply(pi);
    compensated_sum(next.iter().zip(pi).map(|(a, b)| (a - b).abs()))
}

/// Mean density `sum_k k pi_k / n`.
pub fn mean_density(pi: &[f64]) -> f64 {
    let n = (pi.len() - 1) as f64;
    compensated_sum(pi.iter().enumerate().map(|(k, &w)| k as f64 * w)) / n
}

/// `k,pi` CSV.
pub fn distribution_csv(pi: &[f64]) -> String {
    let mut out = String::from("k,pi\n");
    for (k, v) in pi.iter().enumerate() {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}
