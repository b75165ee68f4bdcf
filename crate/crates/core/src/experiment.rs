//! Seeded simulation studies: snippet analysis, confidence-interval
//! coverage sweeps, bifurcation diagrams with interval bands and evolution
//! traces. Every output is CSV and a pure function of its configuration.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::z_for_level;
use crate::dynamics::{bifurcation, fixed_points, iterate, FixedPoint, Stability};
use crate::error::{config, PcaError, Result};
use crate::graph::{Graph, LatticeDim, TopologyKind, TopologySpec};
use crate::mean_field::{InnerLimit, MapSpec, MeanFieldMap};
use crate::pca::{run, DensitySeries, RuleParams};
use crate::rng::derive_seed;

pub const DEFAULT_DELTA: f64 = 0.4;

/// Maximal run of a density series with no step larger than the cut
/// threshold; `end` is exclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snippet {
    pub start: usize,
    pub end: usize,
    pub mean: f64,
}

impl Snippet {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Splits `values` wherever `|rho_{t+1} - rho_t| > delta`.
pub fn split_snippets(values: &[f64], delta: f64) -> Result<Vec<Snippet>> {
    if values.is_empty() {
        return config("cannot split an empty series");
    }
    if !(delta > 0.0) {
        return config(format!("snippet threshold {delta} must be positive"));
    }
    let mut out = Vec::new();
    let mut start = 0;
    for t in 1..=values.len() {
        if t == values.len() || (values[t] - values[t - 1]).abs() > delta {
            let seg = &values[start..t];
            let mean = seg.iter().sum::<f64>() / seg.len() as f64;
            out.push(Snippet {
                start,
                end: t,
                mean,
            });
            start = t;
        }
    }
    Ok(out)
}

/// Mean density of every snippet of `series`.
pub fn snippets(series: &DensitySeries, delta: f64) -> Result<Vec<f64>> {
    Ok(split_snippets(&series.values, delta)?
        .into_iter()
        .map(|s| s.mean)
        .collect())
}

/// Mean-field map used to predict small-world densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmallWorldMap {
    /// Lattice term plus the shortcut term collapsed to `nu`.
    #[default]
    Composite,
    /// Degree mixture over `gamma ..= n - 1` with the full inner sum.
    Mixture,
}

/// Parameters of a coverage sweep. Every list is crossed with every other;
/// the structure parameter list is `p_edge` for random graphs, `p_wire`
/// for small-worlds and absent for tori.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub structures: Vec<TopologyKind>,
    pub n: Vec<usize>,
    pub steps: Vec<usize>,
    pub p: Vec<f64>,
    pub p_edge: Vec<f64>,
    pub p_wire: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
    pub delta_snip: f64,
    pub levels: Vec<f64>,
    pub torus_gamma: usize,
    pub smallworld_gamma: usize,
    pub smallworld_map: SmallWorldMap,
}

fn tenths(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|i| i as f64 / 10.0).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            structures: vec![
                TopologyKind::Torus,
                TopologyKind::Random,
                TopologyKind::SmallWorld,
            ],
            n: vec![16, 25, 49, 100],
            steps: vec![50, 100, 200, 500, 5000],
            p: tenths(1, 5),
            p_edge: tenths(1, 9),
            p_wire: tenths(1, 9),
            runs: 100,
            seed: 20_240_601,
            delta_snip: DEFAULT_DELTA,
            levels: vec![0.90, 0.95],
            torus_gamma: 4,
            smallworld_gamma: 4,
            smallworld_map: SmallWorldMap::Composite,
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| PcaError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("structures", self.structures.len()),
            ("n", self.n.len()),
            ("steps", self.steps.len()),
            ("p", self.p.len()),
            ("levels", self.levels.len()),
        ];
        for (name, len) in lists {
            if len == 0 {
                return config(format!("sweep list `{name}` is empty"));
            }
        }
        if self.structures.contains(&TopologyKind::Random) && self.p_edge.is_empty() {
            return config("sweep list `p_edge` is empty");
        }
        if self.structures.contains(&TopologyKind::SmallWorld) && self.p_wire.is_empty() {
            return config("sweep list `p_wire` is empty");
        }
        if let Some(p) = self.p.iter().find(|p| !(0.0..=0.5).contains(*p)) {
            return config(format!("p = {p} outside [0, 0.5]"));
        }
        if let Some(q) = self
            .p_edge
            .iter()
            .chain(&self.p_wire)
            .find(|q| !(**q > 0.0 && **q < 1.0))
        {
            return config(format!("structure probability {q} outside (0, 1)"));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 4) {
            return config(format!("n = {n} below 4"));
        }
        if self.steps.contains(&0) {
            return config("steps must be positive");
        }
        if self.runs == 0 {
            return config("runs must be at least 1");
        }
        if !(self.delta_snip > 0.0) {
            return config(format!(
                "snippet threshold {} must be positive",
                self.delta_snip
            ));
        }
        for &level in &self.levels {
            z_for_level(level)?;
        }
        Ok(())
    }

    /// Cells in output order: structure, steps, n, structure parameter, p.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &structure in &self.structures {
            let params: Vec<Option<f64>> = match structure {
                TopologyKind::Torus => vec![None],
                TopologyKind::Random => self.p_edge.iter().copied().map(Some).collect(),
                TopologyKind::SmallWorld => self.p_wire.iter().copied().map(Some).collect(),
            };
            for &steps in &self.steps {
                for &n in &self.n {
                    for &param in &params {
                        for &p in &self.p {
                            out.push(Cell {
                                structure,
                                steps,
                                n,
                                param,
                                p,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub structure: TopologyKind,
    pub steps: usize,
    pub n: usize,
    /// `p_edge` or `p_wire`.
    pub param: Option<f64>,
    pub p: f64,
}

impl Cell {
    /// Stable identifier hashed into run seeds.
    pub fn key(&self) -> String {
        let param = self
            .param
            .map_or_else(|| "-".to_string(), |v| v.to_string());
        format!(
            "{}|n={}|T={}|p={}|param={}",
            self.structure, self.n, self.steps, self.p, param
        )
    }

    pub fn run_seed(&self, base: u64, run: usize) -> u64 {
        derive_seed(base, &format!("{}|run={run}", self.key()))
    }

    /// Graph recipe for one run.
    pub fn topology(&self, cfg: &SweepConfig, graph_seed: u64) -> Result<TopologySpec> {
        let param = |name: &str| {
            self.param
                .ok_or_else(|| PcaError::Config(format!("{name} missing for {}", self.key())))
        };
        match self.structure {
            TopologyKind::Torus => {
                let side = (self.n as f64).sqrt().round() as usize;
                if side * side != self.n {
                    return config(format!("n = {} is not a perfect square", self.n));
                }
                Ok(TopologySpec::Torus {
                    side,
                    gamma: cfg.torus_gamma,
                    dim: LatticeDim::Square,
                })
            }
            TopologyKind::Random => Ok(TopologySpec::Random {
                n: self.n,
                p_edge: param("p_edge")?,
                seed: graph_seed,
            }),
            TopologyKind::SmallWorld => Ok(TopologySpec::SmallWorld {
                n: self.n,
                gamma: cfg.smallworld_gamma,
                p_wire: param("p_wire")?,
                seed: graph_seed,
                dim: LatticeDim::Ring,
            }),
        }
    }

    pub fn map(&self, cfg: &SweepConfig) -> Result<MeanFieldMap> {
        map_for_topology(&self.topology(cfg, 0)?, self.p, cfg.smallworld_map)
    }
}

/// Mean-field map matching a graph family: the grid map for lattices,
/// the fixed-degree map for random graphs and the configured small-world
/// map.
pub fn map_for_topology(spec: &TopologySpec, p: f64, sw: SmallWorldMap) -> Result<MeanFieldMap> {
    let map_spec = match *spec {
        TopologySpec::Torus { gamma, .. } => MapSpec::Grid {
            gamma: gamma as u32,
        },
        TopologySpec::Random { n, p_edge, .. } => MapSpec::RgNu {
            n: n as u32,
            p_e: p_edge,
        },
        TopologySpec::SmallWorld {
            n, gamma, p_wire, ..
        } => {
            let (n, gamma) = (n as u32, gamma as u32);
            match sw {
                SmallWorldMap::Composite => MapSpec::SwComposite {
                    n,
                    gamma,
                    p_w: p_wire,
                },
                SmallWorldMap::Mixture => MapSpec::SwFull {
                    n,
                    gamma,
                    p_w: p_wire,
                    inner: InnerLimit::Full,
                },
            }
        }
    };
    MeanFieldMap::new(map_spec, p)
}

/// Attracting fixed points, or marginal ones when none attract.
pub fn stable_branches(map: &MeanFieldMap) -> Result<Vec<FixedPoint>> {
    let fps = fixed_points(map)?;
    let attracting: Vec<FixedPoint> = fps
        .iter()
        .copied()
        .filter(|f| f.stability == Stability::Attracting)
        .collect();
    if !attracting.is_empty() {
        return Ok(attracting);
    }
    let marginal: Vec<FixedPoint> = fps
        .into_iter()
        .filter(|f| f.stability == Stability::Marginal)
        .collect();
    if marginal.is_empty() {
        return Err(PcaError::Domain(format!(
            "{} has no stable fixed point",
            map.spec().describe()
        )));
    }
    Ok(marginal)
}

/// Branch closest to `rho`.
pub fn nearest_branch(branches: &[FixedPoint], rho: f64) -> FixedPoint {
    *branches
        .iter()
        .min_by(|a, b| {
            (a.rho_star - rho)
                .abs()
                .total_cmp(&(b.rho_star - rho).abs())
        })
        .expect("at least one branch")
}

/// Snippet means of every run in a cell, in run order. The random initial
/// density is not an output of the dynamics and is left out, so each
/// series covers `rho_1 ..= rho_T`.
pub fn cell_snippet_means(cell: &Cell, cfg: &SweepConfig) -> Result<Vec<Vec<f64>>> {
    let rule = RuleParams::majority(cell.p)?;
    (0..cfg.runs)
        .into_par_iter()
        .map(|i| {
            let seed = cell.run_seed(cfg.seed, i);
            let graph = cell.topology(cfg, derive_seed(seed, "graph"))?.build()?;
            let series = run(
                &graph,
                rule,
                None,
                cell.steps,
                derive_seed(seed, "dynamics"),
            )?;
            Ok(split_snippets(&series.values[1..], cfg.delta_snip)?
                .into_iter()
                .map(|s| s.mean)
                .collect())
        })
        .collect()
}

/// Fraction of snippet means per confidence level that fall inside the
/// interval around their nearest stable branch.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub cell: Cell,
    pub levels: Vec<f64>,
    pub coverage: Vec<f64>,
    pub snippets: usize,
    pub runs: usize,
    pub invalid: Option<String>,
}

impl CoverageRow {
    pub fn coverage_at(&self, level: f64) -> Option<f64> {
        self.levels
            .iter()
            .position(|&l| (l - level).abs() < 1e-12)
            .map(|i| self.coverage[i])
    }

    pub fn coverage90(&self) -> Option<f64> {
        self.coverage_at(0.90)
    }

    pub fn coverage95(&self) -> Option<f64> {
        self.coverage_at(0.95)
    }
}

fn coverage_row(cell: &Cell, cfg: &SweepConfig) -> CoverageRow {
    let mut row = CoverageRow {
        cell: *cell,
        levels: cfg.levels.clone(),
        coverage: Vec::new(),
        snippets: 0,
        runs: cfg.runs,
        invalid: None,
    };
    let outcome = (|| -> Result<(Vec<usize>, usize)> {
        let map = cell.map(cfg)?;
        let branches = stable_branches(&map)?;
        let zs = cfg
            .levels
            .iter()
            .map(|&l| z_for_level(l))
            .collect::<Result<Vec<_>>>()?;
        let mut hits = vec![0usize; zs.len()];
        let mut total = 0;
        for means in cell_snippet_means(cell, cfg)? {
            for m in means {
                let branch = nearest_branch(&branches, m);
                let sd = map.sigma2(cell.n as u32, branch.rho_star)?.sqrt();
                for (h, z) in hits.iter_mut().zip(&zs) {
                    if (m - branch.rho_star).abs() <= z * sd {
                        *h += 1;
                    }
                }
                total += 1;
            }
        }
        Ok((hits, total))
    })();
    match outcome {
        Ok((hits, total)) => {
            row.coverage = hits.iter().map(|&h| h as f64 / total as f64).collect();
            row.snippets = total;
        }
        Err(e) => row.invalid = Some(e.to_string()),
    }
    row
}

/// Runs every cell of the sweep. Cells are independent: each run seed
/// depends only on the base seed, the cell and the run index.
pub fn coverage_table(cfg: &SweepConfig) -> Result<Vec<CoverageRow>> {
    cfg.validate()?;
    Ok(cfg.cells().iter().map(|c| coverage_row(c, cfg)).collect())
}

fn level_header(levels: &[f64]) -> String {
    levels
        .iter()
        .map(|l| format!("coverage{}", (l * 100.0).round() as u32))
        .collect::<Vec<_>>()
        .join(",")
}

/// `structure,T,n,param,p,coverage90,coverage95,snippets,runs,status`.
pub fn coverage_csv(rows: &[CoverageRow], levels: &[f64]) -> String {
    let mut out = format!(
        "structure,T,n,param,p,{},snippets,runs,status\n",
        level_header(levels)
    );
    for r in rows {
        let c = &r.cell;
        let param = c.param.map_or_else(|| "-".to_string(), |v| v.to_string());
        let _ = write!(out, "{},{},{},{},{}", c.structure, c.steps, c.n, param, c.p);
        for i in 0..levels.len() {
            match r.coverage.get(i) {
                Some(v) => {
                    let _ = write!(out, ",{v}");
                }
                None => out.push_str(",NA"),
            }
        }
        let status = match &r.invalid {
            Some(reason) => format!("invalid: {}", reason.replace(',', ";")),
            None => "ok".to_string(),
        };
        let _ = writeln!(out, ",{},{},{status}", r.snippets, r.runs);
    }
    out
}

/// Coverage pooled over `T`, `n` and the structure parameter for each
/// structure and `p`, weighting cells by their snippet counts.
pub fn marginal_csv(rows: &[CoverageRow], levels: &[f64]) -> String {
    let mut keys: Vec<(TopologyKind, f64)> = Vec::new();
    for r in rows.iter().filter(|r| r.invalid.is_none()) {
        if !keys
            .iter()
            .any(|&(s, p)| s == r.cell.structure && p == r.cell.p)
        {
            keys.push((r.cell.structure, r.cell.p));
        }
    }
    let mut out = format!("structure,p,{},snippets,cells\n", level_header(levels));
    for (s, p) in keys {
        let group: Vec<&CoverageRow> = rows
            .iter()
            .filter(|r| r.invalid.is_none() && r.cell.structure == s && r.cell.p == p)
            .collect();
        let total: usize = group.iter().map(|r| r.snippets).sum();
        let _ = write!(out, "{s},{p}");
        for i in 0..levels.len() {
            let hits: f64 = group
                .iter()
                .map(|r| r.coverage[i] * r.snippets as f64)
                .sum();
            let _ = write!(out, ",{}", hits / total as f64);
        }
        let _ = writeln!(out, ",{total},{}", group.len());
    }
    out
}

/// Interval band around one stable branch at one `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchInterval {
    pub p: f64,
    pub branch_rho: f64,
    pub hw90: f64,
    pub hw95: f64,
}

/// Stable branches with their 90% and 95% half-widths, plus Monte-Carlo
/// snippet means.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalDiagram {
    pub meta: String,
    pub branches: Vec<BranchInterval>,
    pub estimates: Vec<(f64, f64)>,
}

impl IntervalDiagram {
    /// `p,branch_rho,hw90,hw95`.
    pub fn branches_csv(&self) -> String {
        let mut out = format!("# {}\np,branch_rho,hw90,hw95\n", self.meta);
        for b in &self.branches {
            let _ = writeln!(out, "{},{},{},{}", b.p, b.branch_rho, b.hw90, b.hw95);
        }
        out
    }

    /// `p,rho_hat`.
    pub fn estimates_csv(&self) -> String {
        let mut out = format!("# {}\np,rho_hat\n", self.meta);
        for (p, rho) in &self.estimates {
            let _ = writeln!(out, "{p},{rho}");
        }
        out
    }
}

/// Bifurcation sweep of the map for `template`'s topology with interval
/// half-widths at every stable branch. `mc_p` lists the `p` values to
/// simulate, `template.steps` and `cfg.runs` runs each.
pub fn bifurcation_with_intervals(
    template: &Cell,
    cfg: &SweepConfig,
    sweep: &[f64],
    mc_p: &[f64],
) -> Result<IntervalDiagram> {
    let spec = template.topology(cfg, 0)?;
    let n = template.n as u32;
    let family = |p: f64| map_for_topology(&spec, p, cfg.smallworld_map);
    let diagram = bifurcation(family, sweep, 1000, 50, 0.1)?;
    let mut branches = Vec::new();
    for col in &diagram.columns {
        let map = family(col.p)?;
        for fp in col
            .fixed_points
            .iter()
            .filter(|f| f.stability != Stability::Repelling)
        {
            let sd = map.sigma2(n, fp.rho_star)?.sqrt();
            branches.push(BranchInterval {
                p: col.p,
                branch_rho: fp.rho_star,
                hw90: z_for_level(0.90)? * sd,
                hw95: z_for_level(0.95)? * sd,
            });
        }
    }
    let mut estimates = Vec::new();
    for &p in mc_p {
        let cell = Cell { p, ..*template };
        for means in cell_snippet_means(&cell, cfg)? {
            estimates.extend(means.into_iter().map(|m| (p, m)));
        }
    }
    let meta = format!(
        "{} n={} T={} runs={} seed={}",
        diagram.meta, n, template.steps, cfg.runs, cfg.seed
    );
    Ok(IntervalDiagram {
        meta,
        branches,
        estimates,
    })
}

/// A simulated run next to the mean-field orbit from the same start.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub meta: String,
    pub simulated: Vec<f64>,
    pub mean_field: Vec<f64>,
}

impl EvolutionTrace {
    /// `t,rho_sim,rho_mf`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\nt,rho_sim,rho_mf\n", self.meta);
        for (t, (s, m)) in self.simulated.iter().zip(&self.mean_field).enumerate() {
            let _ = writeln!(out, "{t},{s},{m}");
        }
        out
    }
}

pub fn evolution_trace(
    spec: &TopologySpec,
    rule: RuleParams,
    steps: usize,
    seed: u64,
    rho0: Option<f64>,
    sw: SmallWorldMap,
) -> Result<EvolutionTrace> {
    let graph: Graph = spec.build()?;
    let series = run(&graph, rule, rho0, steps, seed)?;
    let map = map_for_topology(spec, rule.p(), sw)?;
    let mean_field = iterate(&map, series.values[0], steps)?;
    let meta = format!(
        "{} {} p={} seed={seed}",
        spec.describe(),
        map.spec().describe(),
        rule.p()
    );
    Ok(EvolutionTrace {
        meta,
        simulated: series.values,
        mean_field,
    })
}
