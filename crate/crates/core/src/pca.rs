//! Synchronous probabilistic cellular automaton with the symmetric,
//! totalistic majority rule.

use std::fmt::Write as _;

use rand::seq::index;

use crate::error::{config, domain, Result};
use crate::graph::Graph;
use crate::rng::{keyed_uniform, seeded_rng, Stream};

/// Majority rule `xi_k(r)`: `p` when at most half of the `k` neighbours are
/// active (ties included), `1 - p` otherwise.
pub fn majority_prob(k: usize, r: usize, p: f64) -> Result<f64> {
    if r > k {
        return domain(format!("active count {r} exceeds neighbourhood size {k}"));
    }
    Ok(xi(k, r, p))
}

#[inline]
pub(crate) fn xi(k: usize, r: usize, p: f64) -> f64 {
    if 2 * r <= k {
        p
    } else {
        1.0 - p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleParams {
    p: f64,
}

impl RuleParams {
    pub fn majority(p: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return config(format!(
                "switching probability p = {p} must lie in [0, 0.5]"
            ));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcaState {
    pub states: Vec<u8>,
    pub t: u64,
}

impl PcaState {
    pub fn new(states: Vec<u8>) -> Result<Self> {
        if states.iter().any(|&s| s > 1) {
            return domain("states must be 0 or 1");
        }
        Ok(Self { states, t: 0 })
    }

    pub fn active(&self) -> usize {
        self.states.iter().map(|&s| s as usize).sum()
    }

    pub fn density(&self) -> f64 {
        self.active() as f64 / self.states.len() as f64
    }
}

/// How neighbour counts are obtained.
enum Neighbourhoods<'g> {
    Lists(&'g Graph),
    /// Packed adjacency rows, `words` u64 per node.
    Bits {
        rows: Vec<u64>,
        words: usize,
    },
}

/// A graph prepared for repeated stepping.
pub struct Automaton<'g> {
    graph: &'g Graph,
    nbhd: Neighbourhoods<'g>,
    rule: RuleParams,
}

impl<'g> Automaton<'g> {
    pub fn new(graph: &'g Graph, rule: RuleParams) -> Self {
        let n = graph.n();
        let words = n.div_ceil(64);
        let mean_degree = 2 * graph.edge_count() / n.max(1);
        let nbhd = if n <= 8192 && words <= mean_degree {
            let mut rows = vec![0u64; n * words];
            for x in 0..n {
                for &y in graph.neighbors(x) {
                    rows[x * words + y as usize / 64] |= 1 << (y % 64);
                }
            }
            Neighbourhoods::Bits { rows, words }
        } else {
            Neighbourhoods::Lists(graph)
        };
        Self { graph, nbhd, rule }
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    /// Initial configuration. With `rho0 = None` the number of active nodes
    /// is uniform on `0..=n` and the active set is a uniform subset of that
    /// size; otherwise each node is active independently with probability
    /// `rho0`.
    pub fn initial_state(&self, rho0: Option<f64>, seed: u64) -> Result<PcaState> {
        let n = self.graph.n();
        let states = match rho0 {
            Some(r) if !(0.0..=1.0).contains(&r) => {
                return domain(format!("rho0 = {r} outside [0, 1]"))
            }
            Some(r) => (0..n)
                .map(|x| u8::from(keyed_uniform(seed, Stream::Init, x as u64, 1) < r))
                .collect(),
            None => {
                let u = keyed_uniform(seed, Stream::Init, u64::MAX, 0);
                let count = ((u * (n + 1) as f64) as usize).min(n);
                let mut rng = seeded_rng(seed, Stream::Init);
                let mut s = vec![0u8; n];
                for i in index::sample(&mut rng, n, count) {
                    s[i] = 1;
                }
                s
            }
        };
        PcaState::new(states)
    }

    /// One synchronous update. The uniform driving node `x` at time `t` is
    /// keyed by `(seed, t, x)`.
    pub fn step(&self, state: &PcaState, seed: u64) -> PcaState {
        let mut next = vec![0u8; state.states.len()];
        self.step_into(&state.states, state.t, seed, &mut next, &mut Vec::new());
        PcaState {
            states: next,
            t: state.t + 1,
        }
    }

    fn step_into(&self, old: &[u8], t: u64, seed: u64, next: &mut [u8], packed: &mut Vec<u64>) {
        let p = self.rule.p;
        match &self.nbhd {
            Neighbourhoods::Lists(g) => {
                for (x, out) in next.iter_mut().enumerate() {
                    let nbrs = g.neighbors(x);
                    let r: usize = nbrs.iter().map(|&y| old[y as usize] as usize).sum();
                    let prob = xi(nbrs.len(), r, p);
                    *out = u8::from(keyed_uniform(seed, Stream::Update, t, x as u64) < prob);
                }
            }
            Neighbourhoods::Bits { rows, words } => {
                packed.clear();
                packed.resize(*words, 0);
                for (y, &s) in old.iter().enumerate() {
                    packed[y / 64] |= (s as u64) << (y % 64);
                }
                for (x, out) in next.iter_mut().enumerate() {
                    let row = &rows[x * words..(x + 1) * words];
                    let r: u32 = row
                        .iter()
                        .zip(packed.iter())
                        .map(|(a, b)| (a & b).count_ones())
                        .sum();
                    let prob = xi(self.graph.degree(x), r as usize, p);
                    *out = u8::from(keyed_uniform(seed, Stream::Update, t, x as u64) < prob);
                }
            }
        }
    }

    /// Runs `steps` updates from `state`, returning the active count at every
    /// time including the start.
    pub fn evolve_counts(&self, state: PcaState, steps: usize, seed: u64) -> (Vec<u32>, PcaState) {
        let mut counts = Vec::with_capacity(steps + 1);
        counts.push(state.active() as u32);
        let mut cur = state.states;
        let mut next = vec![0u8; cur.len()];
        let mut packed = Vec::new();
        let mut t = state.t;
        for _ in 0..steps {
            self.step_into(&cur, t, seed, &mut next, &mut packed);
            std::mem::swap(&mut cur, &mut next);
            t += 1;
            counts.push(cur.iter().map(|&s| s as u32).sum());
        }
        (counts, PcaState { states: cur, t })
    }
}

/// Provenance of a density series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMeta {
    pub topology: String,
    pub p: f64,
    pub seed: u64,
}

/// Densities `rho_0, ..., rho_T` of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySeries {
    pub values: Vec<f64>,
    pub n: usize,
    pub meta: SeriesMeta,
}

impl DensitySeries {
    pub fn from_counts(counts: &[u32], n: usize, meta: SeriesMeta) -> Self {
        let values = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Self { values, n, meta }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `t,rho` CSV with `#` metadata lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.meta.topology);
        let _ = writeln!(
            out,
            "# n={} p={} seed={}",
            self.n, self.meta.p, self.meta.seed
        );
        out.push_str("t,rho\n");
        for (t, rho) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{t},{rho}");
        }
        out
    }
}

/// Runs the PCA for `steps` synchronous updates and records the density.
pub fn run(
    graph: &Graph,
    rule: RuleParams,
    rho0: Option<f64>,
    steps: usize,
    seed: u64,
) -> Result<DensitySeries> {
    if steps < 1 {
        return config("a run needs at least one step");
    }
    let auto = Automaton::new(graph, rule);
    let init = auto.initial_state(rho0, seed)?;
    let (counts, _) = auto.evolve_counts(init, steps, seed);
    let meta = SeriesMeta {
        topology: format!("n={} kind={}", graph.n(), graph.kind()),
        p: rule.p,
        seed,
    };
    Ok(DensitySeries::from_counts(&counts, graph.n(), meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_random, build_torus, LatticeDim};

    #[test]
    fn majority_examples() {
        assert_eq!(majority_prob(4, 3, 0.1).unwrap(), 0.9);
        assert_eq!(majority_prob(4, 2, 0.1).unwrap(), 0.1);
        assert_eq!(majority_prob(5, 0, 0.5).unwrap(), 0.5);
        assert_eq!(majority_prob(0, 0, 0.2).unwrap(), 0.2);
        assert!(majority_prob(4, 5, 0.1).is_err());
    }

    #[test]
    fn rule_range() {
        assert!(RuleParams::majority(0.6).is_err());
        assert!(RuleParams::majority(-0.1).is_err());
        assert!(RuleParams::majority(0.5).is_ok());
    }

    #[test]
    fn zero_noise_fixed_configurations_are_absorbing() {
        let g = build_torus(4, 4, LatticeDim::Square).unwrap();
        let auto = Automaton::new(&g, RuleParams::majority(0.0).unwrap());
        let ones = PcaState::new(vec![1; 16]).unwrap();
        let next = auto.step(&ones, 3);
        assert_eq!(next.states, vec![1; 16]);
        assert_eq!(next.t, 1);
        let zeros = PcaState::new(vec![0; 16]).unwrap();
        assert_eq!(auto.step(&zeros, 3).states, vec![0; 16]);
    }

    #[test]
    fn bitset_and_list_paths_agree() {
        let g = build_random(70, 0.3, 4).unwrap();
        let rule = RuleParams::majority(0.2).unwrap();
        let bits = Automaton::new(&g, rule);
        assert!(matches!(bits.nbhd, Neighbourhoods::Bits { .. }));
        let lists = Automaton {
            graph: &g,
            nbhd: Neighbourhoods::Lists(&g),
            rule,
        };
        let s0 = bits.initial_state(None, 8).unwrap();
        let (a, _) = bits.evolve_counts(s0.clone(), 40, 8);
        let (b, _) = lists.evolve_counts(s0, 40, 8);
        assert_eq!(a, b);
    }

    #[test]
    fn run_length_and_lattice_of_values() {
        let g = build_torus(4, 4, LatticeDim::Square).unwrap();
        let s = run(&g, RuleParams::majority(0.2).unwrap(), None, 50, 1).unwrap();
        assert_eq!(s.len(), 51);
        for v in &s.values {
            let k = v * 16.0;
            assert!((k - k.round()).abs() < 1e-12 && (0.0..=1.0).contains(v));
        }
        let again = run(&g, RuleParams::majority(0.2).unwrap(), None, 50, 1).unwrap();
        assert_eq!(s, again);
        assert!(run(&g, RuleParams::majority(0.2).unwrap(), None, 0, 1).is_err());
    }

    #[test]
    fn isolated_node_activates_with_p() {
        let g = Graph::from_edges(4, crate::graph::TopologyKind::Random, &[(0, 1)]).unwrap();
        let auto = Automaton::new(&g, RuleParams::majority(0.3).unwrap());
        let mut hits = 0;
        let trials = 20_000;
        for seed in 0..trials {
            let s = PcaState::new(vec![1, 1, 1, 1]).unwrap();
            hits += auto.step(&s, seed).states[3] as usize;
        }
        let freq = hits as f64 / trials as f64;
        let se = (0.3f64 * 0.7 / trials as f64).sqrt();
        assert!((freq - 0.3).abs() < 4.0 * se, "{freq}");
    }

    #[test]
    fn csv_layout() {
        let g = build_torus(4, 4, LatticeDim::Square).unwrap();
        let s = run(&g, RuleParams::majority(0.1).unwrap(), Some(1.0), 2, 9).unwrap();
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with('#') && lines[1].starts_with('#'));
        assert_eq!(lines[2], "t,rho");
        assert_eq!(lines[3], "0,1");
        assert_eq!(lines.len(), 6);
    }
}
