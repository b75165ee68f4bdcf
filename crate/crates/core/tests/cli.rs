use std::fs;
use std::process::{Command, Output};

use pca_core::Graph;

fn pca(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_pca"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(pca(args).stdout).unwrap()
}

fn header(text: &str) -> &str {
    text.lines().find(|l| !l.starts_with('#')).unwrap()
}

#[test]
fn csv_headers() {
    let sim = stdout(&[
        "simulate", "--kind", "torus", "--side", "4", "--p", "0.1", "--steps", "20", "--seed", "2",
    ]);
    assert_eq!(header(&sim), "t,rho");
    assert_eq!(sim.lines().filter(|l| !l.starts_with('#')).count(), 22);
    let mf = stdout(&[
        "meanfield",
        "--map",
        "grid",
        "--gamma",
        "5",
        "--p",
        "0.1",
        "--points",
        "11",
    ]);
    assert_eq!(header(&mf), "rho,mu,sigma2,derivative");
    let st = stdout(&[
        "markov",
        "--map",
        "grid",
        "--gamma",
        "5",
        "--n",
        "8",
        "--p",
        "0.2",
        "--what",
        "stationary",
    ]);
    assert!(st.lines().any(|l| l == "k,pi"));
}

#[test]
fn bifurcation_writes_samples_and_fixed_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("diagram.csv");
    pca(&[
        "bifurcate",
        "--map",
        "grid",
        "--gamma",
        "5",
        "--step-size",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        header(&fs::read_to_string(&out).unwrap()),
        "p,sample_index,rho"
    );
    let fps = fs::read_to_string(dir.path().join("diagram_fixed_points.csv")).unwrap();
    assert_eq!(header(&fps), "p,rho_star,slope,stability");
}

const SWEEP: &[&str] = &[
    "sweep",
    "--kind",
    "random,smallworld",
    "--n",
    "16",
    "--steps",
    "60",
    "--p",
    "0.2,0.4",
    "--p-edge",
    "0.5",
    "--p-wire",
    "0.3",
    "--runs",
    "6",
];

#[test]
fn repeated_sweeps_are_byte_identical() {
    let a = pca(SWEEP).stdout;
    let b = pca(SWEEP).stdout;
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(
        header(&text),
        "structure,T,n,param,p,coverage90,coverage95,snippets,runs,status"
    );
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        "structures = [\"random\"]\nn = [16]\nsteps = [40]\np = [0.1]\np_edge = [0.5]\nruns = 3\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let shown = stdout(&[
        "sweep",
        "--config",
        cfg,
        "--runs",
        "4",
        "--p",
        "0.3",
        "--print-config",
    ]);
    assert!(shown.contains("runs = 4"));
    assert!(shown.contains("p = [0.3]"));
    assert!(shown.contains("steps = [40]"));
    let rows = stdout(&["sweep", "--config", cfg, "--runs", "4"]);
    assert!(
        rows.lines()
            .any(|l| l.starts_with("random,40,16,0.5,0.1,") && l.contains(",4,ok")),
        "{rows}"
    );
}

#[test]
fn topology_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.txt");
    pca(&[
        "topology",
        "--kind",
        "smallworld",
        "--n",
        "30",
        "--p-wire",
        "0.2",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("n=30 kind=smallworld\n"));
    let g = Graph::from_edge_list(&text).unwrap();
    assert_eq!(g.to_edge_list(), text);
    assert!(g.degrees().iter().all(|&d| d >= 4));
}

#[test]
fn invalid_arguments_fail() {
    let out = Command::new(env!("CARGO_BIN_EXE_pca"))
        .args(["simulate", "--kind", "torus", "--side", "4", "--p", "0.7"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}
