//! C ABI over the graphdiv engine.
//!
//! Graphs and results are opaque handles released with their `_free`
//! function. Every call returns a [`GdStatus`]; on failure the message of the
//! last error on the calling thread is available from
//! [`gd_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use graphdiv::bench::{generate_synthetic, resolve_query_center, SynthConfig};
use graphdiv::corpus::{load_graph, DocumentGraph, RestrictionSet};
use graphdiv::pipeline::{diversify_run, PipelineConfig};
use graphdiv::ranking::{RankParams, Variant};
use graphdiv::Error;

/// Outcome of a call. `GD_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    DocNotFound = 3,
    InvalidParams = 4,
    NoMatchingCenter = 5,
    InsufficientVertices = 6,
    NoAdmissibleVertex = 7,
    MalformedInput = 8,
    IoError = 9,
    GuardExceeded = 10,
    /// A panic was caught inside the library.
    Internal = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdVariant {
    MinAvg = 0,
    MinMax = 1,
}

/// Ranking and pipeline parameters; start from `gd_params_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdParams {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    /// A `GdVariant` value.
    pub variant: u32,
    pub n: u32,
    pub k_g: u32,
    pub k_c: u32,
    /// Per-addendum time-out in ms, 0 for none.
    pub td_ms: u64,
    /// Hill-climbing cut-off in ms, 0 for none, negative for the default.
    pub tc_ms: i64,
}

/// Opaque immutable graph.
pub struct GdGraph {
    graph: DocumentGraph,
}

/// Opaque diversified result.
pub struct GdResult {
    items: Vec<u32>,
    ids: Vec<CString>,
    score: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> GdStatus {
    match err.code() {
        "DOC_NOT_FOUND" => GdStatus::DocNotFound,
        "INVALID_PARAMS" | "INVALID_SOURCE" | "EMPTY_SET" | "UNDEFINED_COSINE" => GdStatus::InvalidParams,
        "NO_MATCHING_CENTER" => GdStatus::NoMatchingCenter,
        "INSUFFICIENT_VERTICES" => GdStatus::InsufficientVertices,
        "NO_ADMISSIBLE_VERTEX" => GdStatus::NoAdmissibleVertex,
        "MALFORMED_INPUT" | "BAD_GRAPH_FILE" => GdStatus::MalformedInput,
        "IO_ERROR" => GdStatus::IoError,
        "GUARD_EXCEEDED" => GdStatus::GuardExceeded,
        _ => GdStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into a status and the thread's last error.
fn guard<F: FnOnce() -> Result<(), (GdStatus, String)>>(f: F) -> GdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GdStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {message}"));
            GdStatus::Internal
        }
    }
}

fn lib(err: Error) -> (GdStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (GdStatus, String) {
    (GdStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (GdStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (GdStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn graph_ref<'a>(g: *const GdGraph) -> Result<&'a DocumentGraph, (GdStatus, String)> {
    g.as_ref().map(|g| &g.graph).ok_or_else(|| null("graph"))
}

fn convert(p: &GdParams) -> Result<(RankParams, PipelineConfig), (GdStatus, String)> {
    let variant = match p.variant {
        v if v == GdVariant::MinAvg as u32 => Variant::MinAvg,
        v if v == GdVariant::MinMax as u32 => Variant::MinMax,
        v => return Err(lib(Error::InvalidParams(format!("unknown variant {v}")))),
    };
    let params = RankParams::new(p.lambda, p.alpha, p.beta, variant).map_err(lib)?;
    let cfg = PipelineConfig {
        n: p.n as usize,
        k_g: p.k_g as usize,
        k_c: p.k_c as usize,
        t_d_ms: p.td_ms,
        t_c_ms: u64::try_from(p.tc_ms).ok(),
        max_iterations: None,
    };
    cfg.validate().map_err(lib)?;
    Ok((params, cfg))
}

/// Default parameters: n = 10, two seeds and two candidates, λ = β = 0.8,
/// α = 0, MIN_AVG, no time-outs.
#[no_mangle]
pub extern "C" fn gd_params_default() -> GdParams {
    let p = RankParams::default();
    let c = PipelineConfig::default();
    GdParams {
        lambda: p.lambda,
        alpha: p.alpha,
        beta: p.beta,
        variant: GdVariant::MinAvg as u32,
        n: c.n as u32,
        k_g: c.k_g as u32,
        k_c: c.k_c as u32,
        td_ms: 0,
        tc_ms: -1,
    }
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status, e.g. `"DOC_NOT_FOUND"`.
#[no_mangle]
pub extern "C" fn gd_status_name(status: GdStatus) -> *const c_char {
    let name: &'static CStr = match status {
        GdStatus::Ok => c"OK",
        GdStatus::NullArgument => c"NULL_ARGUMENT",
        GdStatus::InvalidUtf8 => c"INVALID_UTF8",
        GdStatus::DocNotFound => c"DOC_NOT_FOUND",
        GdStatus::InvalidParams => c"INVALID_PARAMS",
        GdStatus::NoMatchingCenter => c"NO_MATCHING_CENTER",
        GdStatus::InsufficientVertices => c"INSUFFICIENT_VERTICES",
        GdStatus::NoAdmissibleVertex => c"NO_ADMISSIBLE_VERTEX",
        GdStatus::MalformedInput => c"MALFORMED_INPUT",
        GdStatus::IoError => c"IO_ERROR",
        GdStatus::GuardExceeded => c"GUARD_EXCEEDED",
        GdStatus::Internal => c"INTERNAL",
    };
    name.as_ptr()
}

/// Loads a graph file written by `graphdiv ingest` or `graphdiv generate`.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_load(path: *const c_char, out: *mut *mut GdGraph) -> GdStatus {
    guard(|| {
        let path = text(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let graph = load_graph(Path::new(path)).map_err(lib)?;
        *out = Box::into_raw(Box::new(GdGraph { graph }));
        Ok(())
    })
}

/// Builds a synthetic graph; `vocab` 0 means ten times `lemmas`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_generate(
    docs: u32,
    links: u32,
    lemmas: u32,
    vocab: u32,
    skew: f64,
    seed: u64,
    out: *mut *mut GdGraph,
) -> GdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = SynthConfig {
            num_docs: docs as usize,
            links_per_doc: links as usize,
            lemmas_per_doc: lemmas as usize,
            zipf_skew: skew,
            vocab_size: (vocab > 0).then_some(vocab as usize),
            rng_seed: seed,
        };
        let graph = generate_synthetic(&cfg).map_err(lib)?;
        *out = Box::into_raw(Box::new(GdGraph { graph }));
        Ok(())
    })
}

/// # Safety
/// `graph` must come from a `gd_graph_*` constructor and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_free(graph: *mut GdGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of documents, 0 for a null graph.
///
/// # Safety
/// `graph` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_vertex_count(graph: *const GdGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.vertex_count())
}

/// Number of links, 0 for a null graph.
///
/// # Safety
/// `graph` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_edge_count(graph: *const GdGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.edge_count())
}

/// Vertex number of the document with external id `id`.
///
/// # Safety
/// `graph` must be a live handle, `id` nul-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gd_graph_lookup(graph: *const GdGraph, id: *const c_char, out: *mut u32) -> GdStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let id = text(id, "id")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = g.lookup(id).ok_or_else(|| lib(Error::DocumentNotFound(id.to_string())))?;
        Ok(())
    })
}

/// Picks the query center best matching free text.
///
/// # Safety
/// `graph` must be a live handle, `query` nul-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gd_resolve_query(graph: *const GdGraph, query: *const c_char, out: *mut u32) -> GdStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let query = text(query, "query")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = resolve_query_center(g, query).map_err(lib)?;
        Ok(())
    })
}

/// Best single addition to `set` (length `set_len`, may be null when 0)
/// around `center`; only the ranking fields of `params` are used.
///
/// # Safety
/// `graph` must be a live handle, `params`, `out_vertex` and `out_gain`
/// valid, and `set` readable for `set_len` elements.
#[no_mangle]
pub unsafe extern "C" fn gd_verso(
    graph: *const GdGraph,
    center: u32,
    set: *const u32,
    set_len: usize,
    params: *const GdParams,
    out_vertex: *mut u32,
    out_gain: *mut f64,
) -> GdStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if out_vertex.is_null() || out_gain.is_null() {
            return Err(null("out"));
        }
        let set: &[u32] = match (set.is_null(), set_len) {
            (_, 0) => &[],
            (true, _) => return Err(null("set")),
            (false, n) => std::slice::from_raw_parts(set, n),
        };
        let (params, _) = convert(&GdParams { n: 1, k_g: 1, k_c: 1, ..*p })?;
        let a = graphdiv::engine::verso(g, center, set, &RestrictionSet::allow_all(), &params).map_err(lib)?;
        *out_vertex = a.vertex;
        *out_gain = a.gain;
        Ok(())
    })
}

/// Greedy seeding plus hill climbing around `center`.
///
/// # Safety
/// `graph` must be a live handle and `params`, `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gd_diversify(
    graph: *const GdGraph,
    center: u32,
    params: *const GdParams,
    out: *mut *mut GdResult,
) -> GdStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (params, cfg) = convert(p)?;
        let run = diversify_run(g, center, &RestrictionSet::allow_all(), &cfg, &params).map_err(lib)?;
        let ids = run
            .result
            .items
            .iter()
            .map(|&v| CString::new(g.ext_id(v)).map_err(|_| (GdStatus::Internal, "document id holds a nul".into())))
            .collect::<Result<_, _>>()?;
        *out = Box::into_raw(Box::new(GdResult { items: run.result.items, ids, score: run.result.score }));
        Ok(())
    })
}

/// Number of items, 0 for null.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn gd_result_len(result: *const GdResult) -> usize {
    result.as_ref().map_or(0, |r| r.items.len())
}

/// Vertex numbers in result order, valid while the result lives.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn gd_result_items(result: *const GdResult) -> *const u32 {
    result.as_ref().map_or(ptr::null(), |r| r.items.as_ptr())
}

/// External id of item `index`, or null when out of range.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn gd_result_item_id(result: *const GdResult, index: usize) -> *const c_char {
    result.as_ref().and_then(|r| r.ids.get(index)).map_or(ptr::null(), |c| c.as_ptr())
}

/// Set score (lower is better), NaN for null.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn gd_result_score(result: *const GdResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.score)
}

/// # Safety
/// `result` must come from `gd_diversify` and not be used afterwards. Null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn gd_result_free(result: *mut GdResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
