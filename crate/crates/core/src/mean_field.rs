//! Mean-field density maps `rho -> mu(rho)` for the majority-rule PCA.
//!
//! Each map gives the probability that a node is active at `t + 1` when
//! every node is active independently with probability `rho` at `t`:
//!
//! * `grid`: fixed neighbourhood size `gamma`,
//! * `rg_full`: mixture over the `B(n - 1, p_e)` degree of a random graph,
//! * `rg_nu`: the grid map at the expected degree `nu = floor(p_e (n - 1))`,
//! * `grid_pe`: the grid map with the edge probability folded into the
//!   success probability (kept only for error comparisons),
//! * `sw_full`: the Newman–Watts degree mixture,
//! * `sw_composite`: lattice part plus the `nu`-collapsed shortcut part,
//!   `nu = floor(p_w (n - gamma))`.
//!
//! Sums accumulate with compensated summation. Rows of a single binomial
//! are evaluated term by term in log space; mixtures over many degrees
//! build consecutive rows with the convex recurrence in
//! [`BinomRows`](crate::numeric::BinomRows).

use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{config, domain, PcaError, Result};
use crate::numeric::{binom_row, compensated_sum, BinomRows, CompensatedSum};
use crate::pca::xi;

/// Slack added before flooring products such as `0.29 * 100`, whose
/// binary value lands just below the integer.
const FLOOR_SLACK: f64 = 1e-9;

/// `nu = floor(p_e (n - 1))`.
pub fn nu_random(n: u32, p_e: f64) -> u32 {
    (p_e * (n - 1) as f64 + FLOOR_SLACK).floor() as u32
}

/// `nu = floor(p_w (n - gamma))`.
pub fn nu_smallworld(n: u32, gamma: u32, p_w: f64) -> u32 {
    (p_w * n.saturating_sub(gamma) as f64 + FLOOR_SLACK).floor() as u32
}

/// Upper limit of the inner sum in the small-world degree mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerLimit {
    /// `r = 0 ..= k - gamma`, as the small-world marginal is written.
    #[default]
    Shortcut,
    /// `r = 0 ..= k`, as in the random-graph marginal.
    Full,
}

#[inline]
fn xi_weighted(k: u32, row: &[f64], upto: u32, p: f64) -> f64 {
    compensated_sum((0..=upto.min(k)).map(|r| xi(k as usize, r as usize, p) * row[r as usize]))
}

fn check_rho(rho: f64) {
    debug_assert!((0.0..=1.0).contains(&rho), "rho = {rho} outside [0, 1]");
}

/// Grid mean field: `sum_r xi_gamma(r) C(gamma, r) rho^r (1 - rho)^(gamma - r)`.
pub fn p_grid(gamma: u32, p: f64, rho: f64) -> f64 {
    check_rho(rho);
    xi_weighted(gamma, &binom_row(gamma, rho), gamma, p).clamp(0.0, 1.0)
}

/// `q(rho) = P(B(gamma, rho) <= gamma / 2)`.
pub fn q_half(gamma: u32, rho: f64) -> f64 {
    compensated_sum(
        binom_row(gamma, rho)[..=(gamma / 2) as usize]
            .iter()
            .copied(),
    )
}

/// The grid map through `p q + (1 - p)(1 - q)`.
pub fn p_grid_via_q(gamma: u32, p: f64, rho: f64) -> f64 {
    let q = q_half(gamma, rho);
    p * q + (1.0 - p) * (1.0 - q)
}

fn degree_weights(n: u32, prob: f64) -> Vec<f64> {
    binom_row(n - 1, prob)
}

/// `sum_{k >= k_lo} w_k sum_{r <= limit(k)} xi_k(r) B(k, rho)(r)`.
fn degree_mixture(weights: &[f64], k_lo: u32, p: f64, rho: f64, limit: impl Fn(u32) -> u32) -> f64 {
    let mut rows = BinomRows::new(rho);
    let mut acc = CompensatedSum::new();
    for (k, &w) in weights.iter().enumerate() {
        let k = k as u32;
        if k >= k_lo && w > 0.0 {
            acc.add(w * xi_weighted(k, rows.row(), limit(k), p));
        }
        if (k as usize) + 1 < weights.len() {
            rows.advance();
        }
    }
    acc.value()
}

fn check_open(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        config(format!("{name} = {x} must lie strictly inside (0, 1)"))
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=0.5).contains(&p) {
        Ok(())
    } else {
        config(format!("p = {p} must lie in [0, 0.5]"))
    }
}

/// Random-graph marginal over the `B(n - 1, p_e)` degree.
pub fn p_rg(n: u32, p_e: f64, p: f64, rho: f64) -> Result<f64> {
    MeanFieldMap::new(MapSpec::RgFull { n, p_e }, p).map(|m| m.eval(rho))
}

/// Grid map at the expected random-graph degree `nu`.
pub fn p_grid_nu(n: u32, p_e: f64, p: f64, rho: f64) -> Result<f64> {
    MeanFieldMap::new(MapSpec::RgNu { n, p_e }, p).map(|m| m.eval(rho))
}

/// `sum_r xi_nu(r) C(n - 1, r) (rho p_e)^r (1 - rho p_e)^(n - 1 - r)`.
pub fn p_grid_pe(n: u32, p_e: f64, p: f64, rho: f64) -> Result<f64> {
    MeanFieldMap::new(MapSpec::GridPe { n, p_e }, p).map(|m| m.eval(rho))
}

/// Small-world marginal over degrees `gamma ..= n - 1`.
pub fn p_sw_full(n: u32, gamma: u32, p_w: f64, p: f64, rho: f64, inner: InnerLimit) -> Result<f64> {
    MeanFieldMap::new(
        MapSpec::SwFull {
            n,
            gamma,
            p_w,
            inner,
        },
        p,
    )
    .map(|m| m.eval(rho))
}

/// Lattice plus collapsed-shortcut small-world map.
pub fn p_sw_composite(n: u32, gamma: u32, p_w: f64, p: f64, rho: f64) -> Result<f64> {
    MeanFieldMap::new(MapSpec::SwComposite { n, gamma, p_w }, p).map(|m| m.eval(rho))
}

/// Lattice term `p_grid(gamma) (1 - p_w)^(n - gamma)`: no shortcut present.
pub fn p_grid_sw(n: u32, gamma: u32, p_w: f64, p: f64, rho: f64) -> f64 {
    p_grid(gamma, p, rho) * (1.0 - p_w).powi((n - gamma) as i32)
}

/// Shortcut term `sum_{r = gamma + 1}^{nu} xi_nu(r) C(nu, r) rho^r (1 - rho)^(nu - r)`.
/// Zero when `nu <= gamma`.
pub fn p_grid_gamma_nu(n: u32, gamma: u32, p_w: f64, p: f64, rho: f64) -> f64 {
    let nu = nu_smallworld(n, gamma, p_w);
    if nu <= gamma {
        return 0.0;
    }
    let row = binom_row(nu, rho);
    compensated_sum(((gamma + 1)..=nu).map(|r| xi(nu as usize, r as usize, p) * row[r as usize]))
}

/// Shortcut part of the small-world mixture: degrees `gamma + 1 ..= n - 1`.
pub fn p_rg_gamma(
    n: u32,
    gamma: u32,
    p_w: f64,
    p: f64,
    rho: f64,
    inner: InnerLimit,
) -> Result<f64> {
    check_smallworld(n, gamma, p_w)?;
    check_p(p)?;
    let w = degree_weights(n, p_w);
    Ok(degree_mixture(
        &w,
        gamma + 1,
        p,
        rho,
        inner_limit(gamma, inner),
    ))
}

fn inner_limit(gamma: u32, inner: InnerLimit) -> impl Fn(u32) -> u32 {
    move |k| match inner {
        InnerLimit::Shortcut => k - gamma,
        InnerLimit::Full => k,
    }
}

fn check_smallworld(n: u32, gamma: u32, p_w: f64) -> Result<()> {
    check_open("p_w", p_w)?;
    if gamma >= n {
        return config(format!("gamma = {gamma} must be below n = {n}"));
    }
    Ok(())
}

/// Analytic slope of the grid map,
/// `sum_r xi(r) C(gamma, r) (r - rho gamma) rho^(r-1) (1 - rho)^(gamma-r-1)`,
/// with one-sided differences at `rho in {0, 1}`.
pub fn mf_derivative(gamma: u32, p: f64, rho: f64) -> f64 {
    check_rho(rho);
    if rho <= 0.0 || rho >= 1.0 {
        return one_sided_difference(|x| p_grid(gamma, p, x), rho);
    }
    let row = binom_row(gamma, rho);
    let g = gamma as f64;
    let scale = 1.0 / (rho * (1.0 - rho));
    compensated_sum(
        row.iter()
            .enumerate()
            .map(|(r, &b)| xi(gamma as usize, r, p) * b * (r as f64 - rho * g) * scale),
    )
}

const FD_STEP: f64 = 1e-6;

fn one_sided_difference(f: impl Fn(f64) -> f64, rho: f64) -> f64 {
    if rho < 0.5 {
        let x = rho.max(0.0);
        (f(x + FD_STEP) - f(x)) / FD_STEP
    } else {
        let x = rho.min(1.0);
        (f(x) - f(x - FD_STEP)) / FD_STEP
    }
}

/// Central difference with step `1e-6`, one-sided within a step of the
/// boundary.
pub fn finite_difference(f: impl Fn(f64) -> f64, rho: f64) -> f64 {
    if rho - FD_STEP < 0.0 || rho + FD_STEP > 1.0 {
        one_sided_difference(f, rho)
    } else {
        (f(rho + FD_STEP) - f(rho - FD_STEP)) / (2.0 * FD_STEP)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    Grid,
    RgFull,
    RgNu,
    GridPe,
    SwFull,
    SwComposite,
}

impl MapKind {
    pub fn tag(self) -> &'static str {
        match self {
            MapKind::Grid => "grid",
            MapKind::RgFull => "rg_full",
            MapKind::RgNu => "rg_nu",
            MapKind::GridPe => "grid_pe",
            MapKind::SwFull => "sw_full",
            MapKind::SwComposite => "sw_composite",
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MapKind {
    type Err = PcaError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "grid" | "torus" => MapKind::Grid,
            "rg_full" | "rg" => MapKind::RgFull,
            "rg_nu" => MapKind::RgNu,
            "grid_pe" => MapKind::GridPe,
            "sw_full" | "sw" => MapKind::SwFull,
            "sw_composite" => MapKind::SwComposite,
            other => return Err(PcaError::Parse(format!("unknown map kind {other:?}"))),
        })
    }
}

/// Structural parameters of a map; `p` is supplied separately so that a
/// family over `p` can share cached degree weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapSpec {
    Grid {
        gamma: u32,
    },
    RgFull {
        n: u32,
        p_e: f64,
    },
    RgNu {
        n: u32,
        p_e: f64,
    },
    GridPe {
        n: u32,
        p_e: f64,
    },
    SwFull {
        n: u32,
        gamma: u32,
        p_w: f64,
        inner: InnerLimit,
    },
    SwComposite {
        n: u32,
        gamma: u32,
        p_w: f64,
    },
}

impl MapSpec {
    pub fn kind(&self) -> MapKind {
        match self {
            MapSpec::Grid { .. } => MapKind::Grid,
            MapSpec::RgFull { .. } => MapKind::RgFull,
            MapSpec::RgNu { .. } => MapKind::RgNu,
            MapSpec::GridPe { .. } => MapKind::GridPe,
            MapSpec::SwFull { .. } => MapKind::SwFull,
            MapSpec::SwComposite { .. } => MapKind::SwComposite,
        }
    }

    /// Graph size the map is defined for, if it carries one.
    pub fn n(&self) -> Option<u32> {
        match *self {
            MapSpec::Grid { .. } => None,
            MapSpec::RgFull { n, .. }
            | MapSpec::RgNu { n, .. }
            | MapSpec::GridPe { n, .. }
            | MapSpec::SwFull { n, .. }
            | MapSpec::SwComposite { n, .. } => Some(n),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            MapSpec::Grid { gamma } => format!("map=grid gamma={gamma}"),
            MapSpec::RgFull { n, p_e } => format!("map=rg_full n={n} p_e={p_e}"),
            MapSpec::RgNu { n, p_e } => {
                format!("map=rg_nu n={n} p_e={p_e} nu={}", nu_random(n, p_e))
            }
            MapSpec::GridPe { n, p_e } => {
                format!("map=grid_pe n={n} p_e={p_e} nu={}", nu_random(n, p_e))
            }
            MapSpec::SwFull {
                n,
                gamma,
                p_w,
                inner,
            } => {
                format!("map=sw_full n={n} gamma={gamma} p_w={p_w} inner={inner:?}").to_lowercase()
            }
            MapSpec::SwComposite { n, gamma, p_w } => format!(
                "map=sw_composite n={n} gamma={gamma} p_w={p_w} nu={}",
                nu_smallworld(n, gamma, p_w)
            ),
        }
    }
}

/// A validated mean-field map with cached degree weights.
#[derive(Debug, Clone)]
pub struct MeanFieldMap {
    spec: MapSpec,
    p: f64,
    weights: Vec<f64>,
}

impl MeanFieldMap {
    pub fn new(spec: MapSpec, p: f64) -> Result<Self> {
        check_p(p)?;
        let weights = match spec {
            MapSpec::Grid { .. } => Vec::new(),
            MapSpec::RgFull { n, p_e } | MapSpec::RgNu { n, p_e } | MapSpec::GridPe { n, p_e } => {
                if n < 2 {
                    return config(format!("n = {n} must be at least 2"));
                }
                check_open("p_e", p_e)?;
                if spec.kind() == MapKind::RgNu && nu_random(n, p_e) == 0 {
                    return config(format!(
                        "nu = floor({p_e} * {}) = 0: graph too sparse for the fixed-degree approximation",
                        n - 1
                    ));
                }
                if spec.kind() == MapKind::RgFull {
                    degree_weights(n, p_e)
                } else {
                    Vec::new()
                }
            }
            MapSpec::SwFull { n, gamma, p_w, .. } => {
                check_smallworld(n, gamma, p_w)?;
                degree_weights(n, p_w)
            }
            MapSpec::SwComposite { n, gamma, p_w } => {
                check_smallworld(n, gamma, p_w)?;
                if nu_smallworld(n, gamma, p_w) <= gamma + 1 {
                    warn!(
                        "sw_composite n={n} gamma={gamma} p_w={p_w}: nu = {} leaves the shortcut sum \
                         empty or single-termed",
                        nu_smallworld(n, gamma, p_w)
                    );
                }
                Vec::new()
            }
        };
        Ok(Self { spec, p, weights })
    }

    /// Same structure, different `p`.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self {
            spec: self.spec,
            p,
            weights: self.weights.clone(),
        })
    }

    pub fn spec(&self) -> MapSpec {
        self.spec
    }

    pub fn kind(&self) -> MapKind {
        self.spec.kind()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Collapsed neighbourhood size for `rg_nu`, `grid_pe` and `sw_composite`.
    pub fn nu(&self) -> Option<u32> {
        match self.spec {
            MapSpec::RgNu { n, p_e } | MapSpec::GridPe { n, p_e } => Some(nu_random(n, p_e)),
            MapSpec::SwComposite { n, gamma, p_w } => Some(nu_smallworld(n, gamma, p_w)),
            _ => None,
        }
    }

    /// True when `mu(1 - rho) = 1 - mu(rho)` holds identically.
    pub fn is_symmetric(&self) -> bool {
        match self.spec {
            MapSpec::Grid { gamma } => gamma % 2 == 1 || self.p == 0.5,
            MapSpec::RgNu { .. } => self.nu().is_some_and(|nu| nu % 2 == 1) || self.p == 0.5,
            MapSpec::RgFull { .. } | MapSpec::GridPe { .. } => self.p == 0.5,
            MapSpec::SwFull { .. } | MapSpec::SwComposite { .. } => false,
        }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        check_rho(rho);
        let p = self.p;
        let v = match self.spec {
            MapSpec::Grid { gamma } => p_grid(gamma, p, rho),
            MapSpec::RgNu { n, p_e } => p_grid(nu_random(n, p_e), p, rho),
            MapSpec::RgFull { .. } => degree_mixture(&self.weights, 0, p, rho, |k| k),
            MapSpec::GridPe { n, p_e } => {
                let nu = nu_random(n, p_e) as usize;
                let row = binom_row(n - 1, rho * p_e);
                compensated_sum(row.iter().enumerate().map(|(r, &b)| xi(nu, r, p) * b))
            }
            MapSpec::SwFull { gamma, inner, .. } => {
                degree_mixture(&self.weights, gamma, p, rho, inner_limit(gamma, inner))
            }
            MapSpec::SwComposite { n, gamma, p_w } => {
                let nf = n as f64;
                let g = gamma as f64;
                (g / nf) * p_grid_sw(n, gamma, p_w, p, rho)
                    + ((nf - g) / nf) * p_grid_gamma_nu(n, gamma, p_w, p, rho)
            }
        };
        v.clamp(0.0, 1.0)
    }

    /// Slope of the map: analytic for grid-type maps, central differences
    /// otherwise.
    pub fn derivative(&self, rho: f64) -> f64 {
        match self.spec {
            MapSpec::Grid { gamma } => mf_derivative(gamma, self.p, rho),
            MapSpec::RgNu { n, p_e } => mf_derivative(nu_random(n, p_e), self.p, rho),
            _ => finite_difference(|x| self.eval(x), rho),
        }
    }

    /// Variance of `rho_{t+1}` for a graph of `n` nodes.
    pub fn sigma2(&self, n: u32, rho: f64) -> Result<f64> {
        if n == 0 {
            return domain("n must be positive");
        }
        if let Some(own) = self.spec.n() {
            if own != n {
                return domain(format!("map is defined for n = {own}, asked for n = {n}"));
            }
        }
        let nf = n as f64;
        Ok(match self.spec {
            MapSpec::SwComposite { gamma, p_w, .. } => {
                let a = p_grid_sw(n, gamma, p_w, self.p, rho);
                let b = p_grid_gamma_nu(n, gamma, p_w, self.p, rho);
                let g = gamma as f64;
                g / (nf * nf) * a * (1.0 - a) + (nf - g) / (nf * nf) * b * (1.0 - b)
            }
            _ => {
                let m = self.eval(rho);
                m * (1.0 - m) / nf
            }
        })
    }
}

/// Topology-appropriate variance of the next density.
pub fn sigma2_for(map: &MeanFieldMap, n: u32, rho: f64) -> Result<f64> {
    map.sigma2(n, rho)
}
