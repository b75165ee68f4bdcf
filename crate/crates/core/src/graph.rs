//! Graph families used as PCA substrates: periodic lattices, Erdős–Rényi
//! random graphs and Newman–Watts small-worlds.
//!
//! Random edges are decided by keyed uniforms indexed by the unordered pair,
//! so a graph is a pure function of its [`TopologySpec`].

use std::collections::VecDeque;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{config, PcaError, Result};
use crate::rng::{keyed_uniform, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    Torus,
    Random,
    SmallWorld,
}

impl TopologyKind {
    pub fn tag(self) -> &'static str {
        match self {
            TopologyKind::Torus => "torus",
            TopologyKind::Random => "random",
            TopologyKind::SmallWorld => "smallworld",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TopologyKind {
    type Err = PcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus" | "grid" => Ok(TopologyKind::Torus),
            "random" | "rg" => Ok(TopologyKind::Random),
            "smallworld" | "small-world" | "sw" => Ok(TopologyKind::SmallWorld),
            other => Err(PcaError::Parse(format!("unknown topology kind {other:?}"))),
        }
    }
}

/// Dimension of a periodic lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LatticeDim {
    /// Ring with `gamma / 2` neighbours on each side.
    #[default]
    Ring,
    /// Square torus with the von Neumann (4) or Moore (8) neighbourhood.
    Square,
}

/// Undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<Vec<u32>>,
    kind: TopologyKind,
}

impl Graph {
    /// Builds a graph from an undirected edge list, rejecting loops,
    /// duplicates and out-of-range endpoints.
    pub fn from_edges(n: usize, kind: TopologyKind, edges: &[(u32, u32)]) -> Result<Self> {
        if n == 0 {
            return config("graph must have at least one node");
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return config(format!("edge ({u}, {v}) out of range for n = {n}"));
            }
            if u == v {
                return config(format!("self-loop at node {u}"));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for (x, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return config(format!("duplicate edge at node {x}"));
            }
        }
        Ok(Self { n, adjacency, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn neighbors(&self, x: usize) -> &[u32] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&(v as u32)).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            out.extend(
                nbrs.iter()
                    .filter(|&&v| v as usize > u)
                    .map(|&v| (u as u32, v)),
            );
        }
        out
    }

    /// Breadth-first reachability from node 0.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(x) = queue.pop_front() {
            for &y in &self.adjacency[x] {
                let y = y as usize;
                if !seen[y] {
                    seen[y] = true;
                    reached += 1;
                    queue.push_back(y);
                }
            }
        }
        reached == self.n
    }

    /// Edge-list text: `n=<n> kind=<tag>` then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n={} kind={}\n", self.n, self.kind);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| PcaError::Parse("empty edge list".into()))?;
        let mut n = None;
        let mut kind = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => {
                    n = Some(
                        v.parse::<usize>()
                            .map_err(|e| PcaError::Parse(format!("bad n: {e}")))?,
                    )
                }
                Some(("kind", v)) => kind = Some(v.parse::<TopologyKind>()?),
                _ => {
                    return Err(PcaError::Parse(format!(
                        "unexpected header field {field:?}"
                    )))
                }
            }
        }
        let (n, kind) = match (n, kind) {
            (Some(n), Some(k)) => (n, k),
            _ => return Err(PcaError::Parse("header must carry n= and kind=".into())),
        };
        let mut edges = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<u32>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) if u < v => edges.push((u, v)),
                _ => {
                    return Err(PcaError::Parse(format!(
                        "line {}: expected `u v` with u < v",
                        i + 2
                    )))
                }
            }
        }
        Graph::from_edges(n, kind, &edges)
    }
}

/// Everything needed to regenerate a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TopologySpec {
    Torus {
        side: usize,
        gamma: usize,
        dim: LatticeDim,
    },
    Random {
        n: usize,
        p_edge: f64,
        seed: u64,
    },
    SmallWorld {
        n: usize,
        gamma: usize,
        p_wire: f64,
        seed: u64,
        dim: LatticeDim,
    },
}

impl TopologySpec {
    pub fn kind(&self) -> TopologyKind {
        match self {
            TopologySpec::Torus { .. } => TopologyKind::Torus,
            TopologySpec::Random { .. } => TopologyKind::Random,
            TopologySpec::SmallWorld { .. } => TopologyKind::SmallWorld,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            TopologySpec::Torus {
                side,
                dim: LatticeDim::Square,
                ..
            } => side * side,
            TopologySpec::Torus {
                side,
                dim: LatticeDim::Ring,
                ..
            } => side,
            TopologySpec::Random { n, .. } | TopologySpec::SmallWorld { n, .. } => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() < 4 {
            return config(format!("n = {} is below the minimum of 4", self.n()));
        }
        match *self {
            TopologySpec::Torus { side, gamma, dim } => {
                lattice_offsets(side, gamma, dim).map(|_| ())
            }
            TopologySpec::Random { p_edge, .. } => open_unit("p_edge", p_edge),
            TopologySpec::SmallWorld {
                n,
                gamma,
                p_wire,
                dim,
                ..
            } => {
                open_unit("p_wire", p_wire)?;
                if gamma >= n {
                    return config(format!("gamma = {gamma} must be below n = {n}"));
                }
                base_lattice(n, gamma, dim).map(|_| ())
            }
        }
    }

    pub fn build(&self) -> Result<Graph> {
        self.validate()?;
        match *self {
            TopologySpec::Torus { side, gamma, dim } => build_torus(side, gamma, dim),
            TopologySpec::Random { n, p_edge, seed } => build_random(n, p_edge, seed),
            TopologySpec::SmallWorld {
                n,
                gamma,
                p_wire,
                seed,
                dim,
            } => build_smallworld_on(n, gamma, p_wire, seed, dim),
        }
    }

    /// One-line description used in CSV metadata.
    pub fn describe(&self) -> String {
        match *self {
            TopologySpec::Torus { side, gamma, dim } => {
                format!("kind=torus side={side} gamma={gamma} dim={dim:?}").to_lowercase()
            }
            TopologySpec::Random { n, p_edge, seed } => {
                format!("kind=random n={n} p_edge={p_edge} seed={seed}")
            }
            TopologySpec::SmallWorld {
                n,
                gamma,
                p_wire,
                seed,
                dim,
            } => format!(
                "kind=smallworld n={n} gamma={gamma} p_wire={p_wire} seed={seed} dim={}",
                format!("{dim:?}").to_lowercase()
            ),
        }
    }
}

fn open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        config(format!("{name} = {x} must lie strictly inside (0, 1)"))
    }
}

/// Neighbour offsets of a periodic lattice, checked for wrap-around collisions.
fn lattice_offsets(side: usize, gamma: usize, dim: LatticeDim) -> Result<Vec<(isize, isize)>> {
    let offsets: Vec<(isize, isize)> = match dim {
        LatticeDim::Square => match gamma {
            4 => vec![(-1, 0), (1, 0), (0, -1), (0, 1)],
            8 => (-1..=1)
                .flat_map(|dx| (-1..=1).map(move |dy| (dx, dy)))
                .filter(|&o| o != (0, 0))
                .collect(),
            _ => return config(format!("square torus supports gamma 4 or 8, got {gamma}")),
        },
        LatticeDim::Ring => {
            if gamma == 0 || !gamma.is_multiple_of(2) {
                return config(format!(
                    "ring lattice needs an even positive gamma, got {gamma}"
                ));
            }
            let half = (gamma / 2) as isize;
            (1..=half).flat_map(|d| [(-d, 0), (d, 0)]).collect()
        }
    };
    let reach = offsets
        .iter()
        .map(|&(dx, dy)| dx.abs().max(dy.abs()))
        .max()
        .unwrap_or(0) as usize;
    // offsets d and -d coincide mod side unless side > 2 * reach
    if side <= 2 * reach {
        return config(format!(
            "side {side} too small for gamma {gamma}: periodic wrap would merge neighbours"
        ));
    }
    Ok(offsets)
}

fn base_lattice(n: usize, gamma: usize, dim: LatticeDim) -> Result<Graph> {
    match dim {
        LatticeDim::Ring => build_torus(n, gamma, LatticeDim::Ring),
        LatticeDim::Square => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return config(format!(
                    "square base lattice needs a perfect-square n, got {n}"
                ));
            }
            build_torus(side, gamma, LatticeDim::Square)
        }
    }
}

/// Periodic lattice: `side^2` nodes for a square torus, `side` for a ring.
pub fn build_torus(side: usize, gamma: usize, dim: LatticeDim) -> Result<Graph> {
    if side < 2 {
        return config(format!("side = {side} must be at least 2"));
    }
    let offsets = lattice_offsets(side, gamma, dim)?;
    let s = side as isize;
    let n = match dim {
        LatticeDim::Square => side * side,
        LatticeDim::Ring => side,
    };
    let mut adjacency = vec![Vec::with_capacity(gamma); n];
    for (x, nbrs) in adjacency.iter_mut().enumerate() {
        let (i, j) = match dim {
            LatticeDim::Square => ((x / side) as isize, (x % side) as isize),
            LatticeDim::Ring => (x as isize, 0),
        };
        for &(dx, dy) in &offsets {
            let y = match dim {
                LatticeDim::Square => (i + dx).rem_euclid(s) * s + (j + dy).rem_euclid(s),
                LatticeDim::Ring => (i + dx).rem_euclid(s),
            };
            nbrs.push(y as u32);
        }
        nbrs.sort_unstable();
    }
    Ok(Graph {
        n,
        adjacency,
        kind: TopologyKind::Torus,
    })
}

#[inline]
fn pair_index(n: usize, u: usize, v: usize) -> u64 {
    (u * n + v) as u64
}

/// Erdős–Rényi `G(n, p_edge)`.
pub fn build_random(n: usize, p_edge: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return config(format!("random graph needs n >= 2, got {n}"));
    }
    open_unit("p_edge", p_edge)?;
    let mut adjacency = vec![Vec::new(); n];
    for u in 0..n {
        for v in (u + 1)..n {
            if keyed_uniform(seed, Stream::Edge, pair_index(n, u, v), 0) < p_edge {
                adjacency[u].push(v as u32);
                adjacency[v].push(u as u32);
            }
        }
    }
    let g = Graph {
        n,
        adjacency,
        kind: TopologyKind::Random,
    };
    if !g.is_connected() {
        warn!("random graph n={n} p_edge={p_edge} seed={seed} is disconnected");
    }
    Ok(g)
}

/// Newman–Watts small-world on a ring lattice.
pub fn build_smallworld(n: usize, gamma: usize, p_wire: f64, seed: u64) -> Result<Graph> {
    build_smallworld_on(n, gamma, p_wire, seed, LatticeDim::Ring)
}

/// Newman–Watts small-world: every pair not joined by the base lattice
/// receives a shortcut independently with probability `p_wire`. Lattice
/// edges are never removed.
pub fn build_smallworld_on(
    n: usize,
    gamma: usize,
    p_wire: f64,
    seed: u64,
    dim: LatticeDim,
) -> Result<Graph> {
    if gamma >= n {
        return config(format!("gamma = {gamma} must be below n = {n}"));
    }
    open_unit("p_wire", p_wire)?;
    let mut g = base_lattice(n, gamma, dim)?;
    let mut shortcuts: Vec<(usize, usize)> = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if g.has_edge(u, v) {
                continue;
            }
            if keyed_uniform(seed, Stream::Shortcut, pair_index(n, u, v), 0) < p_wire {
                shortcuts.push((u, v));
            }
        }
    }
    for (u, v) in shortcuts {
        g.adjacency[u].push(v as u32);
        g.adjacency[v].push(u as u32);
    }
    for nbrs in &mut g.adjacency {
        nbrs.sort_unstable();
    }
    g.kind = TopologyKind::SmallWorld;
    Ok(g)
}

/// Edge probability at which `G(n, p)` is connected with probability
/// `target`, from `P(connected) = exp(-exp(-lambda))` with
/// `p = (ln n + lambda) / n`.
pub fn connectivity_threshold(n: usize, target: f64) -> Result<f64> {
    if n < 2 {
        return config(format!("n = {n} must be at least 2"));
    }
    open_unit("target probability", target)?;
    let lambda = -(-target.ln()).ln();
    Ok(((n as f64).ln() + lambda) / n as f64)
}
