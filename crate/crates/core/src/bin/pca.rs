use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use pca_core::dynamics::{bifurcation, Sweep};
use pca_core::experiment::{
    bifurcation_with_intervals, coverage_csv, coverage_table, evolution_trace, marginal_csv, Cell,
    SmallWorldMap, SweepConfig,
};
use pca_core::markov::{build_kernel, distribution_csv, evolve, mean_density, stationary};
use pca_core::verify::{run_check, CHECKS};
use pca_core::{
    pca, InnerLimit, LatticeDim, MapKind, MapSpec, MeanFieldMap, PcaError, RuleParams,
    TopologyKind, TopologySpec,
};

#[derive(Parser)]
#[command(
    name = "pca",
    version,
    about = "Majority-rule probabilistic cellular automata and their mean-field maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph and write its edge list.
    Topology(TopologyCmd),
    /// Run the automaton once and write the density series.
    Simulate(SimulateCmd),
    /// Tabulate a mean-field map on a grid of densities.
    Meanfield(MeanfieldCmd),
    /// Bifurcation diagram of a mean-field map over p.
    Bifurcate(BifurcateCmd),
    /// Exact density chain: kernel, evolved or stationary distribution.
    Markov(MarkovCmd),
    /// Confidence-interval coverage sweep.
    Sweep(SweepCmd),
    /// Run the acceptance checks.
    Verify(VerifyCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Dim {
    Ring,
    Square,
}

impl From<Dim> for LatticeDim {
    fn from(d: Dim) -> Self {
        match d {
            Dim::Ring => LatticeDim::Ring,
            Dim::Square => LatticeDim::Square,
        }
    }
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// torus, random or smallworld
    #[arg(long, default_value = "torus")]
    kind: TopologyKind,
    /// Node count (random, smallworld; torus when --side is absent).
    #[arg(long)]
    n: Option<usize>,
    /// Torus side length.
    #[arg(long)]
    side: Option<usize>,
    #[arg(long, default_value_t = 4)]
    gamma: usize,
    /// Lattice dimension; tori default to square, small-worlds to ring.
    #[arg(long, value_enum)]
    dim: Option<Dim>,
    #[arg(long)]
    p_edge: Option<f64>,
    #[arg(long)]
    p_wire: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl GraphArgs {
    fn spec(&self) -> pca_core::Result<TopologySpec> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| PcaError::Config(format!("--{flag} is required")))
        };
        let n = || {
            self.n
                .ok_or_else(|| PcaError::Config("--n is required".into()))
        };
        let spec = match self.kind {
            TopologyKind::Torus => {
                let dim: LatticeDim = self.dim.unwrap_or(Dim::Square).into();
                let side = match (self.side, self.n, dim) {
                    (Some(s), _, _) => s,
                    (None, Some(n), LatticeDim::Square) => {
                        let s = (n as f64).sqrt().round() as usize;
                        if s * s != n {
                            return Err(PcaError::Config(format!(
                                "n = {n} is not a perfect square"
                            )));
                        }
                        s
                    }
                    (None, Some(n), LatticeDim::Ring) => n,
                    (None, None, _) => {
                        return Err(PcaError::Config("--side or --n is required".into()))
                    }
                };
                TopologySpec::Torus {
                    side,
                    gamma: self.gamma,
                    dim,
                }
            }
            TopologyKind::Random => TopologySpec::Random {
                n: n()?,
                p_edge: need(self.p_edge, "p-edge")?,
                seed: self.seed,
            },
            TopologyKind::SmallWorld => TopologySpec::SmallWorld {
                n: n()?,
                gamma: self.gamma,
                p_wire: need(self.p_wire, "p-wire")?,
                seed: self.seed,
                dim: self.dim.unwrap_or(Dim::Ring).into(),
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct TopologyCmd {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateCmd {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    /// Initial density; uniform random count when absent.
    #[arg(long)]
    rho0: Option<f64>,
    /// Seed of the dynamics (the graph uses --seed).
    #[arg(long)]
    run_seed: Option<u64>,
    /// Add the mean-field orbit from the same start (`t,rho_sim,rho_mf`).
    #[arg(long)]
    mean_field: bool,
    #[arg(long, value_enum, default_value = "composite")]
    sw_map: SwMap,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SwMap {
    Composite,
    Mixture,
}

impl From<SwMap> for SmallWorldMap {
    fn from(m: SwMap) -> Self {
        match m {
            SwMap::Composite => SmallWorldMap::Composite,
            SwMap::Mixture => SmallWorldMap::Mixture,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Inner {
    Shortcut,
    Full,
}

#[derive(Args, Clone)]
struct MapArgs {
    /// grid, rg_full, rg_nu, grid_pe, sw_full or sw_composite
    #[arg(long, default_value = "grid")]
    map: MapKind,
    #[arg(long, default_value_t = 5)]
    gamma: u32,
    /// Graph size; also the size used for variances.
    #[arg(long, default_value_t = 100)]
    n: u32,
    #[arg(long, default_value_t = 0.4)]
    p_edge: f64,
    #[arg(long, default_value_t = 0.4)]
    p_wire: f64,
    /// Inner limit of the small-world mixture.
    #[arg(long, value_enum, default_value = "shortcut")]
    inner: Inner,
}

impl MapArgs {
    fn spec(&self) -> MapSpec {
        let (n, gamma) = (self.n, self.gamma);
        match self.map {
            MapKind::Grid => MapSpec::Grid { gamma },
            MapKind::RgFull => MapSpec::RgFull {
                n,
                p_e: self.p_edge,
            },
            MapKind::RgNu => MapSpec::RgNu {
                n,
                p_e: self.p_edge,
            },
            MapKind::GridPe => MapSpec::GridPe {
                n,
                p_e: self.p_edge,
            },
            MapKind::SwFull => MapSpec::SwFull {
                n,
                gamma,
                p_w: self.p_wire,
                inner: match self.inner {
                    Inner::Shortcut => InnerLimit::Shortcut,
                    Inner::Full => InnerLimit::Full,
                },
            },
            MapKind::SwComposite => MapSpec::SwComposite {
                n,
                gamma,
                p_w: self.p_wire,
            },
        }
    }
}

#[derive(Args)]
struct MeanfieldCmd {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Number of equally spaced densities in [0, 1].
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BifurcateCmd {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, default_value_t = 0.005)]
    start: f64,
    #[arg(long, default_value_t = 0.5)]
    stop: f64,
    #[arg(long, default_value_t = 0.005)]
    step_size: f64,
    #[arg(long, default_value_t = 1000)]
    transient: usize,
    #[arg(long, default_value_t = 50)]
    keep: usize,
    #[arg(long, default_value_t = 0.1)]
    rho0: f64,
    /// Emit interval bands and simulated snippet means for this topology
    /// instead of the plain diagram.
    #[arg(long)]
    intervals: Option<TopologyKind>,
    /// Simulation length for --intervals.
    #[arg(long, default_value_t = 500)]
    steps: usize,
    /// Runs per simulated p for --intervals.
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Simulated p values for --intervals.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5")]
    mc_p: Vec<f64>,
    #[arg(long, default_value_t = 0.4)]
    delta_snip: f64,
    /// Samples file; fixed points (or estimates) go next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MarkovOutput {
    Kernel,
    Evolve,
    Stationary,
}

#[derive(Args)]
struct MarkovCmd {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, default_value_t = 0.35)]
    p: f64,
    #[arg(long, value_enum, default_value = "stationary")]
    what: MarkovOutput,
    /// Steps for `evolve`, starting from the uniform distribution.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepCmd {
    /// TOML file with any subset of the sweep keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    kind: Option<Vec<TopologyKind>>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    p_edge: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    p_wire: Option<Vec<f64>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta_snip: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    level: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    sw_map: Option<SwMap>,
    /// Also write coverage pooled per structure and p.
    #[arg(long)]
    marginal: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyCmd {
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u8>>,
}

fn emit(out: Option<&Path>, text: &str) -> pca_core::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text)?;
            info!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn topology(cmd: TopologyCmd) -> pca_core::Result<()> {
    let spec = cmd.graph.spec()?;
    let g = spec.build()?;
    eprintln!(
        "{}: {} edges, connected = {}",
        spec.describe(),
        g.edge_count(),
        g.is_connected()
    );
    emit(cmd.out.as_deref(), &g.to_edge_list())
}

fn simulate(cmd: SimulateCmd) -> pca_core::Result<()> {
    let spec = cmd.graph.spec()?;
    let rule = RuleParams::majority(cmd.p)?;
    let seed = cmd.run_seed.unwrap_or(cmd.graph.seed);
    if cmd.mean_field {
        let trace = evolution_trace(&spec, rule, cmd.steps, seed, cmd.rho0, cmd.sw_map.into())?;
        return emit(cmd.out.as_deref(), &trace.to_csv());
    }
    let g = spec.build()?;
    let mut series = pca::run(&g, rule, cmd.rho0, cmd.steps, seed)?;
    series.meta.topology = spec.describe();
    emit(cmd.out.as_deref(), &series.to_csv())
}

fn meanfield(cmd: MeanfieldCmd) -> pca_core::Result<()> {
    if cmd.points < 2 {
        return Err(PcaError::Config("--points must be at least 2".into()));
    }
    let map = MeanFieldMap::new(cmd.map.spec(), cmd.p)?;
    let mut out = format!(
        "# {} p={}\nrho,mu,sigma2,derivative\n",
        map.spec().describe(),
        cmd.p
    );
    for i in 0..cmd.points {
        let rho = i as f64 / (cmd.points - 1) as f64;
        let sigma2 = map.sigma2(cmd.map.n, rho)?;
        out.push_str(&format!(
            "{rho},{},{sigma2},{}\n",
            map.eval(rho),
            map.derivative(rho)
        ));
    }
    emit(cmd.out.as_deref(), &out)
}

fn bifurcate(cmd: BifurcateCmd) -> pca_core::Result<()> {
    let sweep = Sweep {
        start: cmd.start,
        stop: cmd.stop,
        step: cmd.step_size,
    };
    if !(sweep.start > 0.0 && sweep.stop <= 0.5 && sweep.step > 0.0 && sweep.start <= sweep.stop) {
        return Err(PcaError::Config(
            "sweep must satisfy 0 < start <= stop <= 0.5 with a positive step".into(),
        ));
    }
    let ps = sweep.values();
    if let Some(kind) = cmd.intervals {
        let param = match kind {
            TopologyKind::Torus => None,
            TopologyKind::Random => Some(cmd.map.p_edge),
            TopologyKind::SmallWorld => Some(cmd.map.p_wire),
        };
        let cfg = SweepConfig {
            runs: cmd.runs,
            seed: cmd.seed,
            delta_snip: cmd.delta_snip,
            torus_gamma: cmd.map.gamma as usize,
            smallworld_gamma: cmd.map.gamma as usize,
            ..SweepConfig::default()
        };
        let template = Cell {
            structure: kind,
            steps: cmd.steps,
            n: cmd.map.n as usize,
            param,
            p: 0.5,
        };
        let diagram = bifurcation_with_intervals(&template, &cfg, &ps, &cmd.mc_p)?;
        return match cmd.out.as_deref() {
            Some(path) => {
                emit(Some(path), &diagram.branches_csv())?;
                emit(Some(&sibling(path, "estimates")), &diagram.estimates_csv())
            }
            None => emit(
                None,
                &format!("{}\n{}", diagram.branches_csv(), diagram.estimates_csv()),
            ),
        };
    }
    let spec = cmd.map.spec();
    let diagram = bifurcation(
        |p| MeanFieldMap::new(spec, p),
        &ps,
        cmd.transient,
        cmd.keep,
        cmd.rho0,
    )?;
    match cmd.out.as_deref() {
        Some(path) => {
            emit(Some(path), &diagram.samples_csv())?;
            emit(
                Some(&sibling(path, "fixed_points")),
                &diagram.fixed_points_csv(),
            )
        }
        None => emit(
            None,
            &format!("{}\n{}", diagram.samples_csv(), diagram.fixed_points_csv()),
        ),
    }
}

fn markov(cmd: MarkovCmd) -> pca_core::Result<()> {
    let map = MeanFieldMap::new(cmd.map.spec(), cmd.p)?;
    let n = cmd.map.n as usize;
    let kernel = build_kernel(n, &map)?;
    let text = match cmd.what {
        MarkovOutput::Kernel => kernel.to_csv(),
        MarkovOutput::Evolve => {
            let uniform = vec![1.0 / (n + 1) as f64; n + 1];
            let seq = evolve(&kernel, &uniform, cmd.steps)?;
            let last = seq.last().expect("non-empty");
            eprintln!(
                "mean density after {} steps: {}",
                cmd.steps,
                mean_density(last)
            );
            distribution_csv(last)
        }
        MarkovOutput::Stationary => {
            let pi = stationary(&kernel, cmd.tol, 10_000_000)?;
            eprintln!("stationary mean density: {}", mean_density(&pi));
            distribution_csv(&pi)
        }
    };
    emit(cmd.out.as_deref(), &text)
}

fn sweep(cmd: SweepCmd) -> pca_core::Result<()> {
    let mut cfg = match &cmd.config {
        Some(path) => SweepConfig::load(path)?,
        None => SweepConfig::default(),
    };
    if let Some(v) = cmd.kind {
        cfg.structures = v;
    }
    if let Some(v) = cmd.n {
        cfg.n = v;
    }
    if let Some(v) = cmd.steps {
        cfg.steps = v;
    }
    if let Some(v) = cmd.p {
        cfg.p = v;
    }
    if let Some(v) = cmd.p_edge {
        cfg.p_edge = v;
    }
    if let Some(v) = cmd.p_wire {
        cfg.p_wire = v;
    }
    if let Some(v) = cmd.runs {
        cfg.runs = v;
    }
    if let Some(v) = cmd.seed {
        cfg.seed = v;
    }
    if let Some(v) = cmd.delta_snip {
        cfg.delta_snip = v;
    }
    if let Some(v) = cmd.level {
        cfg.levels = v;
    }
    if let Some(v) = cmd.sw_map {
        cfg.smallworld_map = v.into();
    }
    cfg.validate()?;
    if cmd.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    info!(
        "sweeping {} cells with {} runs each",
        cfg.cells().len(),
        cfg.runs
    );
    let rows = coverage_table(&cfg)?;
    if let Some(path) = cmd.marginal.as_deref() {
        emit(Some(path), &marginal_csv(&rows, &cfg.levels))?;
    }
    emit(cmd.out.as_deref(), &coverage_csv(&rows, &cfg.levels))
}

fn verify(cmd: VerifyCmd) -> bool {
    let ids: Vec<u8> = cmd
        .only
        .unwrap_or_else(|| (1..=CHECKS.len() as u8).collect());
    let mut all = true;
    for id in ids {
        if id == 0 || id as usize > CHECKS.len() {
            eprintln!("no criterion {id}");
            all = false;
            continue;
        }
        let r = run_check(id);
        println!("{r}");
        all &= r.passed;
    }
    all
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Topology(c) => topology(c),
        Command::Simulate(c) => simulate(c),
        Command::Meanfield(c) => meanfield(c),
        Command::Bifurcate(c) => bifurcate(c),
        Command::Markov(c) => markov(c),
        Command::Sweep(c) => sweep(c),
        Command::Verify(c) => {
            return if verify(c) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
