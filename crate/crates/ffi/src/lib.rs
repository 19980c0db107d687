//! C ABI over `netising`.
//!
//! Every entry point returns a [`NetisingStatus`]. On failure a message is
//! kept per thread and can be read with [`netising_last_error`]. Objects
//! are opaque handles released by their `_free` function. Panics never
//! cross the boundary; they are reported as [`NetisingStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use netising::estimators::{hajek, mple, MpleResult};
use netising::graph::{generate_graph, sample_traits, Graph, GraphonSpec, Kernel};
use netising::inference::{default_beta_grid, feasible_interval, IntervalTable, LearnerConfig};
use netising::ising::{CurieWeissSampler, IsingParams, TreatmentDraw};
use netising::laws::{hn_quantile, mple_limit_quantile, LimitLawParams, WcLaw};
use netising::outcome::SimDataset;
use netising::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetisingStatus {
    Ok = 0,
    /// A parameter or configuration value is out of range.
    InvalidArgument = 2,
    /// The data cannot support the computation, e.g. an empty arm.
    Data = 3,
    Numerical = 4,
    NullPointer = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NetisingStatus {
    match e.exit_code() {
        2 => NetisingStatus::InvalidArgument,
        3 => NetisingStatus::Data,
        _ => NetisingStatus::Numerical,
    }
}

fn guard<F: FnOnce() -> Result<(), (NetisingStatus, String)>>(f: F) -> NetisingStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NetisingStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            NetisingStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (NetisingStatus, String)>;
}

impl<T> IntoFfi<T> for netising::Result<T> {
    fn ffi(self) -> Result<T, (NetisingStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(name: &str) -> (NetisingStatus, String) {
    (NetisingStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (NetisingStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], (NetisingStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn netising_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Exact Curie–Weiss sampler with its own random stream.
pub struct NetisingSampler {
    sampler: CurieWeissSampler,
    rng: ChaCha8Rng,
}

/// Creates a sampler for `n` units with interaction `beta` and field `h`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn netising_sampler_new(
    n: usize,
    beta: f64,
    h: f64,
    seed: u64,
    out: *mut *mut NetisingSampler,
) -> NetisingStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if n == 0 {
            return Err((NetisingStatus::InvalidArgument, "n must be positive".into()));
        }
        let params = IsingParams::new(beta, h).ffi()?;
        *out = Box::into_raw(Box::new(NetisingSampler {
            sampler: CurieWeissSampler::new(n, params),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }));
        Ok(())
    })
}

/// Draws one assignment into `treatments` (0 or 1 per unit, length `n`).
///
/// # Safety
/// `sampler` must come from [`netising_sampler_new`]; `treatments` must
/// point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn netising_sampler_draw(
    sampler: *mut NetisingSampler,
    treatments: *mut u8,
    len: usize,
) -> NetisingStatus {
    guard(|| {
        let s = out_ref(sampler, "sampler")?;
        let n = s.sampler.n();
        if len != n {
            return Err((NetisingStatus::InvalidArgument, format!("buffer holds {len} units, sampler has {n}")));
        }
        if treatments.is_null() {
            return Err(null("treatments"));
        }
        let draw = s.sampler.sample(&mut s.rng);
        let out = slice::from_raw_parts_mut(treatments, n);
        for (o, &t) in out.iter_mut().zip(draw.treatments()) {
            *o = t as u8;
        }
        Ok(())
    })
}

/// # Safety
/// `sampler` must come from [`netising_sampler_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn netising_sampler_free(sampler: *mut NetisingSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Undirected interaction graph.
pub struct NetisingGraph {
    graph: Graph,
}

/// Builds a graph on `n` units from `num_edges` pairs stored as
/// `edges[2k], edges[2k + 1]`.
///
/// # Safety
/// `edges` must point to `2 * num_edges` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netising_graph_from_edges(
    n: usize,
    edges: *const usize,
    num_edges: usize,
    out: *mut *mut NetisingGraph,
) -> NetisingStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let flat = in_slice(edges, 2 * num_edges, "edges")?;
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let graph = Graph::from_edges(n, &pairs).ffi()?;
        *out = Box::into_raw(Box::new(NetisingGraph { graph }));
        Ok(())
    })
}

/// Samples a graph with edge probability `min(1, rho * g)` for a constant
/// kernel value `g`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netising_graph_generate(
    n: usize,
    rho: f64,
    g: f64,
    seed: u64,
    out: *mut *mut NetisingGraph,
) -> NetisingStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let spec = GraphonSpec::new(rho, Kernel::Constant(g)).ffi()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let traits = sample_traits(n, &mut rng);
        let graph = generate_graph(&spec, &traits, &mut rng).ffi()?;
        *out = Box::into_raw(Box::new(NetisingGraph { graph }));
        Ok(())
    })
}

/// Number of units and edges.
///
/// # Safety
/// `graph` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn netising_graph_size(
    graph: *const NetisingGraph,
    n: *mut usize,
    num_edges: *mut usize,
) -> NetisingStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        *out_ref(n, "n")? = g.graph.n();
        *out_ref(num_edges, "num_edges")? = g.graph.num_edges();
        Ok(())
    })
}

/// # Safety
/// `graph` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn netising_graph_free(graph: *mut NetisingGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Quantile of `W_c`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netising_wc_quantile(c: f64, p: f64, out: *mut f64) -> NetisingStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if !(p > 0.0 && p < 1.0) {
            return Err((NetisingStatus::InvalidArgument, format!("p must lie in (0, 1), got {p}")));
        }
        *out = WcLaw::shared(c).ffi()?.quantile(p);
        Ok(())
    })
}

/// Quantile of the uniform law `H_n(·; κ₁, κ₂, √n(1 − β))`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netising_hn_quantile(
    p: f64,
    kappa1: f64,
    kappa2: f64,
    n: usize,
    beta: f64,
    out: *mut f64,
) -> NetisingStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let params = LimitLawParams::new(kappa1, kappa2, n, beta).ffi()?;
        *out = hn_quantile(p, &params).ffi()?;
        Ok(())
    })
}

/// Quantile of the pseudo-likelihood limit law at drift `c`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netising_mple_limit_quantile(p: f64, c: f64, n: usize, out: *mut f64) -> NetisingStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = mple_limit_quantile(p, c, n).ffi()?;
        Ok(())
    })
}

fn draw_from(t: &[u8]) -> Result<TreatmentDraw, (NetisingStatus, String)> {
    if let Some(i) = t.iter().position(|&v| v > 1) {
        return Err((NetisingStatus::InvalidArgument, format!("treatment {i} is not 0 or 1")));
    }
    Ok(TreatmentDraw::from_treatments(t.iter().map(|&v| v == 1).collect()))
}

/// Difference of arm means.
///
/// # Safety
/// `treatments` and `outcomes` must point to `n` values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn netising_hajek(
    treatments: *const u8,
    outcomes: *const f64,
    n: usize,
    out: *mut f64,
) -> NetisingStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let t = draw_from(in_slice(treatments, n, "treatments")?)?;
        let y = in_slice(outcomes, n, "outcomes")?;
        *out = hajek(&t, y).ffi()?;
        Ok(())
    })
}

/// Pseudo-likelihood estimate of `β`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NetisingMple {
    pub beta_hat: f64,
    pub beta_unrestricted: f64,
    pub at_boundary: bool,
    /// NaN when the closed form is undefined.
    pub closed_form: f64,
}

impl From<MpleResult> for NetisingMple {
    fn from(m: MpleResult) -> Self {
        NetisingMple {
            beta_hat: m.beta_hat,
            beta_unrestricted: m.beta_unrestricted,
            at_boundary: m.at_boundary,
            closed_form: m.closed_form.unwrap_or(f64::NAN),
        }
    }
}

/// # Safety
/// `treatments` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netising_mple(treatments: *const u8, n: usize, out: *mut NetisingMple) -> NetisingStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let t = draw_from(in_slice(treatments, n, "treatments")?)?;
        *out = mple(&t).ffi()?.into();
        Ok(())
    })
}

/// Feasible prediction interval and its ingredients.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NetisingInterval {
    pub tau_hat: f64,
    pub lo: f64,
    pub hi: f64,
    pub beta_hat: f64,
    pub khat: f64,
    /// No grid point survived the first step; the full grid was used.
    pub fallback: bool,
    pub sparse_warning: bool,
}

/// Learner, resampling bound and two-step interval for observed data on
/// `graph`, with `grid_points` equally spaced values of `β`.
///
/// # Safety
/// `graph` must be a live handle on `n` units; `treatments` and
/// `outcomes` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn netising_feasible_interval(
    graph: *const NetisingGraph,
    treatments: *const u8,
    outcomes: *const f64,
    n: usize,
    alpha1: f64,
    alpha2: f64,
    grid_points: usize,
    seed: u64,
    out: *mut NetisingInterval,
) -> NetisingStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        let t = draw_from(in_slice(treatments, n, "treatments")?)?;
        let y = in_slice(outcomes, n, "outcomes")?.to_vec();
        if grid_points < 2 {
            return Err((NetisingStatus::InvalidArgument, "need at least two grid points".into()));
        }
        let dataset = SimDataset::from_observed(vec![f64::NAN; n], g.graph.clone(), t, y).ffi()?;
        let table = IntervalTable::new(n, alpha1, alpha2, &default_beta_grid(grid_points)).ffi()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let learner = LearnerConfig::default();
        let r = feasible_interval(&dataset, &table, &learner, 0.5, &mut rng).ffi()?;
        *out = NetisingInterval {
            tau_hat: r.interval.tau_hat,
            lo: r.interval.lo,
            hi: r.interval.hi,
            beta_hat: r.mple.beta_hat,
            khat: r.kappa.khat,
            fallback: r.interval.fallback,
            sparse_warning: r.sparse_warning,
        };
        Ok(())
    })
}
