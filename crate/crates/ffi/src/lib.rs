//! C ABI for the simulator: opaque handles, integer status codes, and
//! JSON-in/JSON-out entry points, so other languages can bind without
//! knowing any Rust types. The matching header lives at
//! `include/congest_sim.h` and is kept in sync by the ABI tests.
//!
//! Conventions:
//!   * every function returns a `CsStatus`; results go to out-parameters;
//!   * handles are opaque and freed by their `*_free` function exactly once;
//!   * strings returned through out-parameters are UTF-8, NUL-terminated,
//!     and freed with `cs_string_free`;
//!   * `cs_last_error` returns a thread-local message for the most recent
//!     non-OK status.

use congest_sim::config::ExperimentConfig;
use congest_sim::covering::{
    build_expander_family, build_hash_family, build_sampled_family, CoveringFamily,
    FamilyConstants,
};
use congest_sim::graph::{
    diameter, edge_connectivity, from_edge_list_text, generate, Graph, GraphSpec,
};
use congest_sim::harness;
use serde::Deserialize;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes; 0 is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsStatus {
    CsOk = 0,
    CsErrNullArg = 1,
    CsErrUtf8 = 2,
    CsErrJson = 3,
    CsErrInvalidArg = 4,
    CsErrRun = 5,
    CsErrPanic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Crate version as a static string; never freed.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

pub struct CsGraph(Graph);
pub struct CsFamily(CoveringFamily);

fn guard<F: FnOnce() -> CsStatus>(f: F) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            CsStatus::CsErrPanic
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, CsStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(CsStatus::CsErrNullArg);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        CsStatus::CsErrUtf8
    })
}

fn give_string(out: *mut *mut c_char, text: String) -> CsStatus {
    let c = match CString::new(text.replace('\0', " ")) {
        Ok(c) => c,
        Err(_) => {
            set_error("string contains interior NUL");
            return CsStatus::CsErrInvalidArg;
        }
    };
    unsafe { *out = c.into_raw() };
    CsStatus::CsOk
}

/// Frees a string returned through an out-parameter.
///
/// # Safety
/// `s` must be a pointer previously returned by this library and not yet
/// freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a graph from a generator spec in JSON, e.g.
/// `{"kind":"circulant","n":16,"offsets":[1,2],"seed":0}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_graph_generate(
    spec_json: *const c_char,
    out: *mut *mut CsGraph,
) -> CsStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out-parameter");
            return CsStatus::CsErrNullArg;
        }
        let text = match read_str(spec_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let spec: GraphSpec = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => {
                set_error(&format!("graph spec: {e}"));
                return CsStatus::CsErrJson;
            }
        };
        match generate(&spec) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(CsGraph(g)));
                CsStatus::CsOk
            }
            Err(e) => {
                set_error(&e.to_string());
                CsStatus::CsErrInvalidArg
            }
        }
    })
}

/// Parses the `n m` / `u v` edge-list text format.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_graph_from_edge_list(
    text: *const c_char,
    out: *mut *mut CsGraph,
) -> CsStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out-parameter");
            return CsStatus::CsErrNullArg;
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match from_edge_list_text(text) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(CsGraph(g)));
                CsStatus::CsOk
            }
            Err(e) => {
                set_error(&e.to_string());
                CsStatus::CsErrInvalidArg
            }
        }
    })
}

/// # Safety
/// `g` must be a live graph handle; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cs_graph_free(g: *mut CsGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn cs_graph_node_count(g: *const CsGraph) -> u32 {
    if g.is_null() {
        return 0;
    }
    (*g).0.n()
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn cs_graph_edge_count(g: *const CsGraph) -> u32 {
    if g.is_null() {
        return 0;
    }
    (*g).0.m()
}

/// # Safety
/// `g` must be a live graph handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_graph_diameter(g: *const CsGraph, out: *mut u32) -> CsStatus {
    guard(|| {
        if g.is_null() || out.is_null() {
            set_error("null argument");
            return CsStatus::CsErrNullArg;
        }
        match diameter(&(*g).0) {
            Ok(d) => {
                *out = d;
                CsStatus::CsOk
            }
            Err(e) => {
                set_error(&e.to_string());
                CsStatus::CsErrInvalidArg
            }
        }
    })
}

/// # Safety
/// `g` must be a live graph handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_graph_edge_connectivity(
    g: *const CsGraph,
    out: *mut u32,
) -> CsStatus {
    guard(|| {
        if g.is_null() || out.is_null() {
            set_error("null argument");
            return CsStatus::CsErrNullArg;
        }
        *out = edge_connectivity(&(*g).0);
        CsStatus::CsOk
    })
}

#[derive(Deserialize)]
#[serde(tag = "flavor", rename_all = "kebab-case")]
enum FamilyBuildSpec {
    Hash {
        l: u32,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        constants: FamilyConstants,
    },
    Sampled {
        l: u32,
        k: u32,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        constants: FamilyConstants,
    },
    ExpanderUndirected {
        t: u32,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        constants: FamilyConstants,
    },
    ExpanderDirected {
        t: u32,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        constants: FamilyConstants,
    },
}

/// Builds a covering family over a graph from a JSON build spec, e.g.
/// `{"flavor":"hash","l":28,"seed":7}`.
///
/// # Safety
/// `g` must be a live graph handle; `spec_json` NUL-terminated; `out`
/// valid.
#[no_mangle]
pub unsafe extern "C" fn cs_family_build(
    g: *const CsGraph,
    spec_json: *const c_char,
    out: *mut *mut CsFamily,
) -> CsStatus {
    guard(|| {
        if g.is_null() || out.is_null() {
            set_error("null argument");
            return CsStatus::CsErrNullArg;
        }
        let text = match read_str(spec_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let spec: FamilyBuildSpec = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => {
                set_error(&format!("family spec: {e}"));
                return CsStatus::CsErrJson;
            }
        };
        let graph = &(*g).0;
        let fam = match spec {
            FamilyBuildSpec::Hash { l, seed, constants } => {
                build_hash_family(graph, l, seed, &constants)
            }
            FamilyBuildSpec::Sampled {
                l,
                k,
                seed,
                constants,
            } => match build_sampled_family(graph, l, k, seed, &constants) {
                Ok(f) => f,
                Err(e) => {
                    set_error(&e.to_string());
                    return CsStatus::CsErrInvalidArg;
                }
            },
            FamilyBuildSpec::ExpanderUndirected { t, seed, constants } => {
                build_expander_family(graph, t, seed, false, &constants)
            }
            FamilyBuildSpec::ExpanderDirected { t, seed, constants } => {
                build_expander_family(graph, t, seed, true, &constants)
            }
        };
        *out = Box::into_raw(Box::new(CsFamily(fam)));
        CsStatus::CsOk
    })
}

/// Reconstructs a family from its descriptor JSON (bit-exact membership).
///
/// # Safety
/// `descriptor_json` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cs_family_from_descriptor(
    descriptor_json: *const c_char,
    out: *mut *mut CsFamily,
) -> CsStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out-parameter");
            return CsStatus::CsErrNullArg;
        }
        let text = match read_str(descriptor_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match CoveringFamily::from_descriptor_json(text) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(CsFamily(f)));
                CsStatus::CsOk
            }
            Err(e) => {
                set_error(&e.to_string());
                CsStatus::CsErrJson
            }
        }
    })
}

/// # Safety
/// `f` must be a live family handle; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cs_family_free(f: *mut CsFamily) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live family handle.
#[no_mangle]
pub unsafe extern "C" fn cs_family_subgraph_count(f: *const CsFamily) -> u32 {
    if f.is_null() {
        return 0;
    }
    (*f).0.ell
}

/// Membership of an edge (or one direction: `toward_high` = 1 selects the
/// arc pointing at the higher-id endpoint) in subgraph `index`. Returns 0
/// or 1; -1 on bad arguments.
///
/// # Safety
/// `f` must be a live family handle.
#[no_mangle]
pub unsafe extern "C" fn cs_family_member(
    f: *const CsFamily,
    edge: u32,
    toward_high: i32,
    index: u32,
) -> i32 {
    if f.is_null() {
        return -1;
    }
    let fam = &(*f).0;
    if edge >= fam.m || index >= fam.ell {
        return -1;
    }
    fam.contains_arc(edge, toward_high != 0, index) as i32
}

/// # Safety
/// `f` must be a live family handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cs_family_width(f: *const CsFamily, out: *mut u32) -> CsStatus {
    guard(|| {
        if f.is_null() || out.is_null() {
            set_error("null argument");
            return CsStatus::CsErrNullArg;
        }
        *out = (*f).0.width();
        CsStatus::CsOk
    })
}

/// Family descriptor JSON; reconstruct with `cs_family_from_descriptor`.
///
/// # Safety
/// `f` must be a live family handle; `out` valid; free the string with
/// `cs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cs_family_descriptor_json(
    f: *const CsFamily,
    out: *mut *mut c_char,
) -> CsStatus {
    guard(|| {
        if f.is_null() || out.is_null() {
            set_error("null argument");
            return CsStatus::CsErrNullArg;
        }
        give_string(out, (*f).0.to_descriptor_json())
    })
}

/// Runs a full experiment batch from a configuration JSON (the same schema
/// the CLI accepts) and returns the batch report as JSON.
///
/// # Safety
/// `config_json` NUL-terminated; `out_report_json` valid; free the string
/// with `cs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cs_simulate(
    config_json: *const c_char,
    out_report_json: *mut *mut c_char,
) -> CsStatus {
    guard(|| {
        if out_report_json.is_null() {
            set_error("null out-parameter");
            return CsStatus::CsErrNullArg;
        }
        let text = match read_str(config_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let cfg = match ExperimentConfig::from_json(text) {
            Ok(c) => c,
            Err(e) => {
                set_error(&e.to_string());
                return CsStatus::CsErrJson;
            }
        };
        match harness::run_batch(&cfg) {
            Ok(batch) => give_string(
                out_report_json,
                serde_json::to_string(&batch).expect("batch serializes"),
            ),
            Err(e) => {
                set_error(&e.to_string());
                CsStatus::CsErrRun
            }
        }
    })
}
