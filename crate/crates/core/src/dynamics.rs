//! One-dimensional dynamics of a mean-field map on `[0, 1]`.

use std::fmt::{self, Write as _};

use crate::error::{domain, PcaError, Result};
use crate::mean_field::MeanFieldMap;

/// Half-width of the band around `|slope| = 1` classified as marginal.
pub const MARGINAL_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Attracting,
    Repelling,
    Marginal,
}

impl Stability {
    pub fn from_slope(slope: f64) -> Self {
        let s = slope.abs();
        if s < 1.0 - MARGINAL_BAND {
            Stability::Attracting
        } else if s > 1.0 + MARGINAL_BAND {
            Stability::Repelling
        } else {
            Stability::Marginal
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Attracting => "attracting",
            Stability::Repelling => "repelling",
            Stability::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub rho_star: f64,
    pub slope: f64,
    pub stability: Stability,
}

/// `rho_0, mu(rho_0), mu(mu(rho_0)), ...`, length `steps + 1`.
pub fn iterate(map: &MeanFieldMap, rho0: f64, steps: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&rho0) {
        return domain(format!("rho0 = {rho0} outside [0, 1]"));
    }
    let mut orbit = Vec::with_capacity(steps + 1);
    let mut rho = rho0;
    orbit.push(rho);
    for _ in 0..steps {
        rho = map.eval(rho);
        orbit.push(rho);
    }
    Ok(orbit)
}

/// Bisection on a bracket with `g(lo)` and `g(hi)` of opposite sign, run to
/// machine resolution.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut g_lo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    // the endpoint with the smaller residual
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Roots of `mu(rho) - rho` located by a sign scan with step `resolution`
/// and refined by bisection. Points whose residual exceeds `tol` are
/// dropped.
pub fn find_fixed_points(map: &MeanFieldMap, resolution: f64, tol: f64) -> Result<Vec<FixedPoint>> {
    if !(1e-4..=0.5).contains(&resolution) {
        return domain(format!(
            "scan resolution {resolution} must lie in [1e-4, 0.5]"
        ));
    }
    let g = |x: f64| map.eval(x) - x;
    let cells = (1.0 / resolution).ceil() as usize;
    let xs: Vec<f64> = (0..=cells)
        .map(|i| (i as f64 / cells as f64).min(1.0))
        .collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let mut roots: Vec<f64> = Vec::new();
    for i in 0..xs.len() {
        if gs[i] == 0.0 {
            roots.push(xs[i]);
        }
        if i + 1 < xs.len()
            && gs[i] != 0.0
            && gs[i + 1] != 0.0
            && (gs[i] > 0.0) != (gs[i + 1] > 0.0)
        {
            roots.push(bisect(g, xs[i], xs[i + 1]));
        }
    }
    let points: Vec<FixedPoint> = roots
        .into_iter()
        .filter(|&r| g(r).abs() <= tol)
        .map(|r| {
            let slope = map.derivative(r);
            FixedPoint {
                rho_star: r,
                slope,
                stability: Stability::from_slope(slope),
            }
        })
        .collect();
    if points.is_empty() {
        // a continuous self-map of [0, 1] always has a fixed point; reaching
        // here means the residual tolerance is below what the map resolves
        return Err(PcaError::Convergence {
            iterations: cells,
            residual: tol,
        });
    }
    Ok(points)
}

/// Default scan used across the crate.
pub fn fixed_points(map: &MeanFieldMap) -> Result<Vec<FixedPoint>> {
    find_fixed_points(map, 1e-3, 1e-10)
}

/// The `p` where the slope at the symmetric fixed point `0.5` crosses 1,
/// found by bisection on `[lo, hi]` to tolerance `tol`.
pub fn critical_point<F>(family: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<MeanFieldMap>,
{
    let excess = |p: f64| -> Result<f64> {
        let m = family(p)?;
        if (m.eval(0.5) - 0.5).abs() > 1e-12 {
            return domain(format!(
                "0.5 is not a fixed point of {} at p = {p}",
                m.spec().describe()
            ));
        }
        Ok(m.derivative(0.5).abs() - 1.0)
    };
    let (mut a, mut b) = (lo, hi);
    let ea = excess(a)?;
    let eb = excess(b)?;
    if ea == 0.0 {
        return Ok(a);
    }
    if eb == 0.0 {
        return Ok(b);
    }
    if (ea > 0.0) == (eb > 0.0) {
        return Err(PcaError::NoBifurcation { lo, hi });
    }
    let a_positive = ea > 0.0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let e = excess(mid)?;
        if e == 0.0 {
            return Ok(mid);
        }
        if (e > 0.0) == a_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Grid of `p` values for a sweep, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            start: 0.005,
            stop: 0.5,
            step: 0.005,
        }
    }
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| self.start + i as f64 * self.step)
            .filter(|&p| p <= 0.5 + 1e-12)
            .map(|p| p.min(0.5))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct BifurcationColumn {
    pub p: f64,
    pub samples: Vec<f64>,
    pub fixed_points: Vec<FixedPoint>,
}

#[derive(Debug, Clone)]
pub struct BifurcationDiagram {
    pub columns: Vec<BifurcationColumn>,
    pub keep: usize,
    pub meta: String,
}

impl BifurcationDiagram {
    pub fn p_values(&self) -> Vec<f64> {
        self.columns.iter().map(|c| c.p).collect()
    }

    /// `p,sample_index,rho`.
    pub fn samples_csv(&self) -> String {
        let mut out = format!("# {}\np,sample_index,rho\n", self.meta);
        for c in &self.columns {
            for (i, rho) in c.samples.iter().enumerate() {
                let _ = writeln!(out, "{},{i},{rho}", c.p);
            }
        }
        out
    }

    /// `p,rho_star,slope,stability`.
    pub fn fixed_points_csv(&self) -> String {
        let mut out = format!("# {}\np,rho_star,slope,stability\n", self.meta);
        for c in &self.columns {
            for fp in &c.fixed_points {
                let _ = writeln!(out, "{},{},{},{}", c.p, fp.rho_star, fp.slope, fp.stability);
            }
        }
        out
    }
}

/// For every `p`, iterates from `rho0` and `1 - rho0`, drops `transient`
/// steps and keeps the next `keep` values of each orbit (so a column holds
/// `keep` samples per seed; a single seed is used when `rho0 = 0.5`).
pub fn bifurcation<F>(
    family: F,
    sweep: &[f64],
    transient: usize,
    keep: usize,
    rho0: f64,
) -> Result<BifurcationDiagram>
where
    F: Fn(f64) -> Result<MeanFieldMap>,
{
    let mut columns = Vec::with_capacity(sweep.len());
    let mut meta = String::new();
    let seeds: Vec<f64> = if rho0 == 0.5 {
        vec![rho0]
    } else {
        vec![rho0, 1.0 - rho0]
    };
    for &p in sweep {
        let map = family(p)?;
        if meta.is_empty() {
            meta = map.spec().describe();
        }
        let mut samples = Vec::with_capacity(keep * seeds.len());
        for &s in &seeds {
            let orbit = iterate(&map, s, transient + keep)?;
            samples.extend_from_slice(&orbit[transient + 1..]);
        }
        let fixed_points = fixed_points(&map)?;
        columns.push(BifurcationColumn {
            p,
            samples,
            fixed_points,
        });
    }
    Ok(BifurcationDiagram {
        columns,
        keep,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mean_field::{MapSpec, MeanFieldMap};

    fn grid(gamma: u32, p: f64) -> MeanFieldMap {
        MeanFieldMap::new(MapSpec::Grid { gamma }, p).unwrap()
    }

    #[test]
    fn orbit_converges_to_half() {
        let orbit = iterate(&grid(5, 0.35), 0.9, 200).unwrap();
        assert_eq!(orbit.len(), 201);
        assert!((orbit[200] - 0.5).abs() < 1e-8);
        assert!(orbit.iter().all(|x| (0.0..=1.0).contains(x)));
        let still = iterate(&grid(5, 0.2), 0.5, 20).unwrap();
        assert!(still.iter().all(|&x| x == 0.5));
        assert!(iterate(&grid(5, 0.2), 1.5, 3).is_err());
    }

    #[test]
    fn monostable_regime() {
        let fps = fixed_points(&grid(5, 0.35)).unwrap();
        assert_eq!(fps.len(), 1);
        assert_eq!(fps[0].rho_star, 0.5);
        assert_eq!(fps[0].stability, Stability::Attracting);
        assert!((fps[0].slope - 0.5625).abs() < 1e-12);
    }

    #[test]
    fn bistable_regime() {
        let m = grid(5, 0.15);
        let fps = fixed_points(&m).unwrap();
        assert_eq!(fps.len(), 3);
        assert_eq!(fps[1].rho_star, 0.5);
        assert_eq!(fps[1].stability, Stability::Repelling);
        assert_eq!(fps[0].stability, Stability::Attracting);
        assert_eq!(fps[2].stability, Stability::Attracting);
        assert!((fps[0].rho_star + fps[2].rho_star - 1.0).abs() < 1e-8);
        for fp in &fps {
            assert!((m.eval(fp.rho_star) - fp.rho_star).abs() <= 1e-10);
        }
        // an orbit from 0.6 settles on the upper branch
        let orbit = iterate(&m, 0.6, 500).unwrap();
        assert!((orbit[500] - fps[2].rho_star).abs() < 1e-8);
    }

    #[test]
    fn constant_map_has_one_point() {
        let fps = fixed_points(&grid(6, 0.5)).unwrap();
        assert_eq!(fps.len(), 1);
        assert!((fps[0].rho_star - 0.5).abs() < 1e-12);
    }

    #[test]
    fn seven_thirtieths() {
        let pc = critical_point(
            |p| MeanFieldMap::new(MapSpec::Grid { gamma: 5 }, p),
            1e-3,
            0.5,
            1e-10,
        )
        .unwrap();
        assert!((pc - 7.0 / 30.0).abs() < 1e-6);
    }

    #[test]
    fn critical_point_grows_with_neighbourhood() {
        let pc = |g| {
            critical_point(
                move |p| MeanFieldMap::new(MapSpec::Grid { gamma: g }, p),
                1e-3,
                0.5,
                1e-10,
            )
            .unwrap()
        };
        let (a, b, c) = (pc(5), pc(9), pc(15));
        assert!(a < b && b < c && c < 0.5, "{a} {b} {c}");
    }

    #[test]
    fn no_bifurcation_is_reported() {
        let r = critical_point(
            |p| MeanFieldMap::new(MapSpec::Grid { gamma: 5 }, p),
            0.3,
            0.5,
            1e-8,
        );
        assert!(matches!(r, Err(PcaError::NoBifurcation { .. })));
        // the symmetric point is not fixed for even gamma
        let e = critical_point(
            |p| MeanFieldMap::new(MapSpec::Grid { gamma: 4 }, p),
            0.01,
            0.5,
            1e-8,
        );
        assert!(matches!(e, Err(PcaError::Domain(_))));
    }

    #[test]
    fn diagram_columns() {
        let d = bifurcation(
            |p| MeanFieldMap::new(MapSpec::Grid { gamma: 5 }, p),
            &Sweep::default().values(),
            1000,
            50,
            0.9,
        )
        .unwrap();
        assert_eq!(d.columns.len(), 100);
        let last = d.columns.last().unwrap();
        assert_eq!(last.p, 0.5);
        assert!(last.samples.iter().all(|&x| x == 0.5));
        for c in &d.columns {
            assert_eq!(c.samples.len(), 100);
            assert!(c.samples.iter().all(|x| (0.0..=1.0).contains(x)));
            let spread = c
                .samples
                .iter()
                .fold(0.0f64, |m, &x| m.max((x - 0.5).abs()));
            if c.p < 7.0 / 30.0 - 0.006 {
                assert!(spread > 0.05, "p={} should be split", c.p);
            }
            if c.p > 7.0 / 30.0 + 0.006 {
                assert!(spread < 1e-3, "p={} should be merged", c.p);
            }
        }
        assert!(d
            .samples_csv()
            .starts_with("# map=grid gamma=5\np,sample_index,rho\n"));
        assert!(d.fixed_points_csv().contains("repelling"));
    }

    #[test]
    fn sweep_grid() {
        let v = Sweep::default().values();
        assert_eq!(v.len(), 100);
        assert!((v[0] - 0.005).abs() < 1e-15);
        assert_eq!(*v.last().unwrap(), 0.5);
    }
}
