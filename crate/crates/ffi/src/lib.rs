//! C ABI over `pca_core`.
//!
//! Graphs and maps are opaque heap handles created by the `*_new`-style
//! constructors and released with the matching `*_free`. Every fallible
//! call returns a [`PcaStatus`]; on failure the message is kept per thread
//! and can be copied out with [`pca_last_error_message`]. Output pointers
//! are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pca_core::bounds::{chernov_interval, clt_interval, Interval};
use pca_core::dynamics::{critical_point, fixed_points, Stability};
use pca_core::graph::{build_random, build_smallworld_on, build_torus};
use pca_core::{Graph, InnerLimit, LatticeDim, MapSpec, MeanFieldMap, PcaError, RuleParams};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcaStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Domain = 3,
    Convergence = 4,
    NoBifurcation = 5,
    Parse = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

pub struct PcaGraph(Graph);

pub struct PcaMap(MeanFieldMap);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcaMapKind {
    Grid = 0,
    RgFull = 1,
    RgNu = 2,
    GridPe = 3,
    SwFull = 4,
    SwComposite = 5,
}

/// Map description. Fields a kind does not use are ignored; `p_edge`
/// serves the random-graph maps and `p_wire` the small-world ones.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PcaMapParams {
    pub kind: PcaMapKind,
    pub n: u32,
    pub gamma: u32,
    pub p_edge: f64,
    pub p_wire: f64,
    /// Small-world mixture only: sum the inner binomial to `k` instead of `k - gamma`.
    pub full_inner: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcaStability {
    Attracting = 0,
    Repelling = 1,
    Marginal = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PcaFixedPoint {
    pub rho_star: f64,
    pub slope: f64,
    pub stability: PcaStability,
}

/// Interval with its raw and clipped ends.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PcaInterval {
    pub center: f64,
    pub half_width: f64,
    pub lower: f64,
    pub upper: f64,
    pub clipped: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(PcaStatus, String);

impl From<PcaError> for Failure {
    fn from(e: PcaError) -> Self {
        let status = match e {
            PcaError::Config(_) => PcaStatus::Config,
            PcaError::Domain(_) => PcaStatus::Domain,
            PcaError::Convergence { .. } => PcaStatus::Convergence,
            PcaError::NoBifurcation { .. } => PcaStatus::NoBifurcation,
            PcaError::Parse(_) => PcaStatus::Parse,
            PcaError::Io(_) => PcaStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn guard(body: impl FnOnce() -> Outcome) -> PcaStatus {
    let (status, message) = match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => (PcaStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(payload) => {
            let m = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            (PcaStatus::Panic, m)
        }
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
    status
}

fn null(what: &str) -> Failure {
    Failure(PcaStatus::NullPointer, format!("{what} is null"))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string, truncating to `len - 1` bytes. Returns the full
/// message length without the terminator; zero after a successful call.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pca_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Periodic lattice: `side * side` nodes (gamma 4 or 8) or a ring of `side`
/// nodes (even gamma) when `ring` is set.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_graph_torus(
    side: usize,
    gamma: usize,
    ring: bool,
    out: *mut *mut PcaGraph,
) -> PcaStatus {
    guard(|| {
        let dim = if ring {
            LatticeDim::Ring
        } else {
            LatticeDim::Square
        };
        let g = build_torus(side, gamma, dim)?;
        put(out, boxed(PcaGraph(g)))
    })
}

/// Erdős–Rényi graph `G(n, p_edge)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_graph_random(
    n: usize,
    p_edge: f64,
    seed: u64,
    out: *mut *mut PcaGraph,
) -> PcaStatus {
    guard(|| put(out, boxed(PcaGraph(build_random(n, p_edge, seed)?))))
}

/// Ring lattice with `gamma` neighbours plus independent shortcuts.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_graph_smallworld(
    n: usize,
    gamma: usize,
    p_wire: f64,
    seed: u64,
    out: *mut *mut PcaGraph,
) -> PcaStatus {
    guard(|| {
        put(
            out,
            boxed(PcaGraph(build_smallworld_on(
                n,
                gamma,
                p_wire,
                seed,
                LatticeDim::Ring,
            )?)),
        )
    })
}

/// Parses the edge-list text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_graph_from_edge_list(
    text: *const c_char,
    out: *mut *mut PcaGraph,
) -> PcaStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Failure(PcaStatus::Parse, format!("edge list is not UTF-8: {e}")))?;
        put(out, boxed(PcaGraph(Graph::from_edge_list(s)?)))
    })
}

/// # Safety
/// `graph` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn pca_graph_free(graph: *mut PcaGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_graph_node_count(
    graph: *const PcaGraph,
    out: *mut usize,
) -> PcaStatus {
    guard(|| put(out, get(graph, "graph")?.0.n()))
}

/// # Safety
/// `graph` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_graph_edge_count(
    graph: *const PcaGraph,
    out: *mut usize,
) -> PcaStatus {
    guard(|| put(out, get(graph, "graph")?.0.edge_count()))
}

/// # Safety
/// `graph` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_graph_degree(
    graph: *const PcaGraph,
    node: usize,
    out: *mut usize,
) -> PcaStatus {
    guard(|| {
        let g = &get(graph, "graph")?.0;
        if node >= g.n() {
            return Err(Failure(
                PcaStatus::Domain,
                format!("node {node} out of range for n = {}", g.n()),
            ));
        }
        put(out, g.degree(node))
    })
}

/// # Safety
/// `graph` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_graph_is_connected(
    graph: *const PcaGraph,
    out: *mut bool,
) -> PcaStatus {
    guard(|| put(out, get(graph, "graph")?.0.is_connected()))
}

/// Writes the edge list as a NUL-terminated string. `needed` receives the
/// buffer size required including the terminator; when `len` is smaller
/// nothing is written to `buf` and `BufferTooSmall` is returned.
///
/// # Safety
/// `graph` must be a live handle, `buf` null or valid for `len` bytes, and
/// `needed` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_graph_edge_list(
    graph: *const PcaGraph,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> PcaStatus {
    guard(|| {
        let text = get(graph, "graph")?.0.to_edge_list();
        if !needed.is_null() {
            needed.write(text.len() + 1);
        }
        if buf.is_null() || len < text.len() + 1 {
            return Err(Failure(
                PcaStatus::BufferTooSmall,
                format!("edge list needs {} bytes", text.len() + 1),
            ));
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

/// Runs the majority automaton for `steps` steps and writes the `steps + 1`
/// densities to `out`. A NaN `rho0` draws the initial active count
/// uniformly; otherwise nodes start active independently with that
/// probability.
///
/// # Safety
/// `graph` must be a live handle and `out` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pca_run(
    graph: *const PcaGraph,
    p: f64,
    rho0: f64,
    steps: usize,
    seed: u64,
    out: *mut f64,
    len: usize,
) -> PcaStatus {
    guard(|| {
        let g = &get(graph, "graph")?.0;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        if len < steps + 1 {
            return Err(Failure(
                PcaStatus::BufferTooSmall,
                format!("{} densities need a buffer of that length", steps + 1),
            ));
        }
        let rho0 = if rho0.is_nan() { None } else { Some(rho0) };
        let series = pca_core::pca::run(g, RuleParams::majority(p)?, rho0, steps, seed)?;
        ptr::copy_nonoverlapping(series.values.as_ptr(), out, series.values.len());
        Ok(())
    })
}

fn spec_of(params: &PcaMapParams) -> MapSpec {
    let PcaMapParams {
        kind,
        n,
        gamma,
        p_edge,
        p_wire,
        full_inner,
    } = *params;
    match kind {
        PcaMapKind::Grid => MapSpec::Grid { gamma },
        PcaMapKind::RgFull => MapSpec::RgFull { n, p_e: p_edge },
        PcaMapKind::RgNu => MapSpec::RgNu { n, p_e: p_edge },
        PcaMapKind::GridPe => MapSpec::GridPe { n, p_e: p_edge },
        PcaMapKind::SwFull => MapSpec::SwFull {
            n,
            gamma,
            p_w: p_wire,
            inner: if full_inner {
                InnerLimit::Full
            } else {
                InnerLimit::Shortcut
            },
        },
        PcaMapKind::SwComposite => MapSpec::SwComposite {
            n,
            gamma,
            p_w: p_wire,
        },
    }
}

/// # Safety
/// `params` must point to a valid description and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_map_new(
    params: *const PcaMapParams,
    p: f64,
    out: *mut *mut PcaMap,
) -> PcaStatus {
    guard(|| {
        let spec = spec_of(get(params, "params")?);
        put(out, boxed(PcaMap(MeanFieldMap::new(spec, p)?)))
    })
}

/// # Safety
/// `map` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn pca_map_free(map: *mut PcaMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

fn unit(rho: f64) -> Outcome {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Failure(
            PcaStatus::Domain,
            format!("density {rho} outside [0, 1]"),
        ))
    }
}

/// # Safety
/// `map` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_map_eval(map: *const PcaMap, rho: f64, out: *mut f64) -> PcaStatus {
    guard(|| {
        let m = &get(map, "map")?.0;
        unit(rho)?;
        put(out, m.eval(rho))
    })
}

/// # Safety
/// `map` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_map_derivative(
    map: *const PcaMap,
    rho: f64,
    out: *mut f64,
) -> PcaStatus {
    guard(|| {
        let m = &get(map, "map")?.0;
        unit(rho)?;
        put(out, m.derivative(rho))
    })
}

/// Variance of the next density on `n` nodes.
///
/// # Safety
/// `map` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_map_sigma2(
    map: *const PcaMap,
    n: u32,
    rho: f64,
    out: *mut f64,
) -> PcaStatus {
    guard(|| {
        let m = &get(map, "map")?.0;
        unit(rho)?;
        put(out, m.sigma2(n, rho)?)
    })
}

/// Writes up to `cap` fixed points in increasing order; `count` receives
/// the total number found. Returns `BufferTooSmall` if `cap` is short, with
/// the first `cap` entries written.
///
/// # Safety
/// `map` must be a live handle, `out` valid for `cap` entries (or null when
/// `cap` is zero) and `count` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_fixed_points(
    map: *const PcaMap,
    out: *mut PcaFixedPoint,
    cap: usize,
    count: *mut usize,
) -> PcaStatus {
    guard(|| {
        let fps = fixed_points(&get(map, "map")?.0)?;
        put(count, fps.len())?;
        if cap > 0 && out.is_null() {
            return Err(null("output buffer"));
        }
        for (i, f) in fps.iter().take(cap).enumerate() {
            let stability = match f.stability {
                Stability::Attracting => PcaStability::Attracting,
                Stability::Repelling => PcaStability::Repelling,
                Stability::Marginal => PcaStability::Marginal,
            };
            out.add(i).write(PcaFixedPoint {
                rho_star: f.rho_star,
                slope: f.slope,
                stability,
            });
        }
        if cap < fps.len() {
            return Err(Failure(
                PcaStatus::BufferTooSmall,
                format!("{} fixed points found", fps.len()),
            ));
        }
        Ok(())
    })
}

/// Value of `p` in `[lo, hi]` where the slope at one half crosses one.
///
/// # Safety
/// `params` must point to a valid description and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_critical_point(
    params: *const PcaMapParams,
    lo: f64,
    hi: f64,
    tol: f64,
    out: *mut f64,
) -> PcaStatus {
    guard(|| {
        let spec = spec_of(get(params, "params")?);
        put(
            out,
            critical_point(|p| MeanFieldMap::new(spec, p), lo, hi, tol)?,
        )
    })
}

fn interval(iv: Interval) -> PcaInterval {
    PcaInterval {
        center: iv.center,
        half_width: iv.half_width,
        lower: iv.lower(),
        upper: iv.upper(),
        clipped: iv.clipped(),
    }
}

/// Chernov interval holding with probability at least `1 - delta`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_chernov_interval(
    mu: f64,
    n: usize,
    delta: f64,
    out: *mut PcaInterval,
) -> PcaStatus {
    guard(|| put(out, interval(chernov_interval(mu, n, delta)?)))
}

/// Normal interval at level 0.90 or 0.95.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pca_clt_interval(
    mu: f64,
    sigma2: f64,
    level: f64,
    out: *mut PcaInterval,
) -> PcaStatus {
    guard(|| put(out, interval(clt_interval(mu, sigma2, level)?)))
}
