//! Concentration intervals for the density and error bounds for the
//! collapsed-degree approximations.

use crate::error::{config, domain, Result};

/// z-values used for the normal-approximation intervals.
pub const Z90: f64 = 1.64;
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalMethod {
    Chernov,
    Clt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub center: f64,
    pub half_width: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

impl Interval {
    pub fn lower(&self) -> f64 {
        (self.center - self.half_width).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        (self.center + self.half_width).min(1.0)
    }

    /// True when the raw interval sticks out of `[0, 1]`.
    pub fn clipped(&self) -> bool {
        self.center - self.half_width < 0.0 || self.center + self.half_width > 1.0
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.center - x).abs() <= self.half_width
    }
}

fn xlogx_ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * (a / b).ln()
    }
}

/// `h+(eps) = (p + eps) ln((p + eps)/p) + (1 - p - eps) ln((1 - p - eps)/(1 - p))`
/// for `0 <= eps <= 1 - p`.
pub fn kl_plus(p: f64, eps: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("p = {p} must lie in (0, 1)"));
    }
    if !(eps >= 0.0 && eps <= 1.0 - p) {
        return domain(format!("eps = {eps} outside [0, 1 - p] for p = {p}"));
    }
    Ok(xlogx_ratio(p + eps, p) + xlogx_ratio(1.0 - p - eps, 1.0 - p))
}

/// `h-(eps) = h+(-eps)` for `0 <= eps <= p`.
pub fn kl_minus(p: f64, eps: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("p = {p} must lie in (0, 1)"));
    }
    if !(eps >= 0.0 && eps <= p) {
        return domain(format!("eps = {eps} outside [0, p] for p = {p}"));
    }
    Ok(xlogx_ratio(p - eps, p) + xlogx_ratio(1.0 - p + eps, 1.0 - p))
}

/// `|rho - mu| <= sqrt(mu (1 - mu) / n * 2 ln(2 / delta))` with probability
/// at least `1 - delta`.
pub fn chernov_interval(mu: f64, n: usize, delta: f64) -> Result<Interval> {
    if !(0.0..=1.0).contains(&mu) {
        return domain(format!("mean {mu} outside [0, 1]"));
    }
    if !(delta > 0.0 && delta < 1.0) || n == 0 {
        return config(format!(
            "need 0 < delta < 1 and n > 0, got delta = {delta}, n = {n}"
        ));
    }
    let half_width = (mu * (1.0 - mu) / n as f64 * 2.0 * (2.0 / delta).ln()).sqrt();
    Ok(Interval {
        center: mu,
        half_width,
        level: 1.0 - delta,
        method: IntervalMethod::Chernov,
    })
}

/// Standard deviations spanned by the Chernov half-width.
pub fn chernov_multiplier(delta: f64) -> f64 {
    (2.0 * (2.0 / delta).ln()).sqrt()
}

pub fn z_for_level(level: f64) -> Result<f64> {
    if (level - 0.90).abs() < 1e-12 {
        Ok(Z90)
    } else if (level - 0.95).abs() < 1e-12 {
        Ok(Z95)
    } else {
        config(format!(
            "unsupported confidence level {level}; use 0.90 or 0.95"
        ))
    }
}

/// `mu +- z sqrt(sigma2)`.
pub fn clt_interval(mu: f64, sigma2: f64, level: f64) -> Result<Interval> {
    if !(sigma2 >= 0.0) {
        return domain(format!("variance {sigma2} must be non-negative"));
    }
    let z = z_for_level(level)?;
    Ok(Interval {
        center: mu,
        half_width: z * sigma2.sqrt(),
        level,
        method: IntervalMethod::Clt,
    })
}

/// `|p - 1/2| * 2 exp(-(n - 1) eps^2 / (p_e (1 - p_e)) + ln n)`.
pub fn rg_error_bound(n: usize, p_e: f64, p: f64, eps: f64) -> Result<f64> {
    if !(p_e > 0.0 && p_e < 1.0) || !(eps > 0.0) || n < 2 {
        return domain(format!(
            "need 0 < p_e < 1, eps > 0, n >= 2 (p_e = {p_e}, eps = {eps}, n = {n})"
        ));
    }
    let exponent = -((n - 1) as f64) * eps * eps / (p_e * (1.0 - p_e)) + (n as f64).ln();
    Ok((p - 0.5).abs() * 2.0 * exponent.exp())
}

/// `|p - 1/2| * 2 exp(-(n - gamma) eps^2 / (p_w (1 - p_w)) + ln(n - gamma + 1))`.
pub fn sw_error_bound(n: usize, gamma: usize, p_w: f64, p: f64, eps: f64) -> Result<f64> {
    if !(p_w > 0.0 && p_w < 1.0) || !(eps > 0.0) || gamma >= n {
        return domain(format!(
            "need 0 < p_w < 1, eps > 0, gamma < n (p_w = {p_w}, eps = {eps})"
        ));
    }
    let m = (n - gamma) as f64;
    let exponent = -m * eps * eps / (p_w * (1.0 - p_w)) + (m + 1.0).ln();
    Ok((p - 0.5).abs() * 2.0 * exponent.exp())
}

/// One standard deviation of the degree fraction, `sqrt(p_e (1 - p_e) / (n - 1))`.
pub fn default_rg_eps(n: usize, p_e: f64) -> f64 {
    (p_e * (1.0 - p_e) / (n - 1) as f64).sqrt()
}

/// Small-world analogue over the `n - gamma` candidate shortcuts.
pub fn default_sw_eps(n: usize, gamma: usize, p_w: f64) -> f64 {
    (p_w * (1.0 - p_w) / (n - gamma) as f64).sqrt()
}
