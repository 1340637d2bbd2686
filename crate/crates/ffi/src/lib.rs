//! C ABI over the embedding engine: open trained artifacts, embed query
//! methods, compute similarities, and fetch recommendations as JSON.
//!
//! See `include/testrec.h` for the header mirroring these declarations.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use testrec::eval::Approach;
use testrec::index::{cosine, EmbeddingStore};
use testrec::model::{load_model, SavedModel};
use testrec::pathext::PathConfig;
use testrec::recommend::{
    embed_query, recommend_functionality_vec, recommend_structure_vec, RecommendError,
};
use testrec::vocab::Vocabulary;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrStatus {
    TrOk = 0,
    TrErrNullPointer = 1,
    TrErrInvalidUtf8 = 2,
    TrErrIo = 3,
    TrErrFormat = 4,
    TrErrParseReject = 5,
    TrErrBadArgument = 6,
    TrErrInternal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// An opened engine: model, vocabulary, store, and extraction settings.
pub struct TrEngine {
    model: SavedModel,
    vocab: Vocabulary,
    store: EmbeddingStore,
    path_cfg: PathConfig,
}

fn catch<F: FnOnce() -> TrStatus>(f: F) -> TrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            TrStatus::TrErrInternal
        }
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn cstr_arg<'a>(s: *const c_char) -> Result<&'a str, TrStatus> {
    if s.is_null() {
        set_error("null pointer argument");
        return Err(TrStatus::TrErrNullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        TrStatus::TrErrInvalidUtf8
    })
}

/// Message describing the most recent error on this thread. The pointer
/// stays valid until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn tr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Open an engine from trained artifacts. On success writes the engine
/// handle to `out_engine`; free it with `tr_engine_close`.
///
/// # Safety
/// Path arguments must be valid NUL-terminated strings; `out_engine` must
/// point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn tr_engine_open(
    model_path: *const c_char,
    vocab_path: *const c_char,
    store_path: *const c_char,
    out_engine: *mut *mut TrEngine,
) -> TrStatus {
    catch(|| {
        if out_engine.is_null() {
            set_error("null out_engine");
            return TrStatus::TrErrNullPointer;
        }
        let (model_path, vocab_path, store_path) = match (
            cstr_arg(model_path),
            cstr_arg(vocab_path),
            cstr_arg(store_path),
        ) {
            (Ok(m), Ok(v), Ok(s)) => (m, v, s),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
        };
        for path in [model_path, vocab_path, store_path] {
            if !Path::new(path).is_file() {
                set_error(&format!("no such file: {path}"));
                return TrStatus::TrErrIo;
            }
        }
        let vocab = match Vocabulary::load(Path::new(vocab_path)) {
            Ok(v) => v,
            Err(e) => {
                set_error(&format!("vocabulary: {e}"));
                return TrStatus::TrErrFormat;
            }
        };
        let model = match load_model(Path::new(model_path), &vocab) {
            Ok(m) => m,
            Err(e) => {
                set_error(&format!("model: {e}"));
                return TrStatus::TrErrFormat;
            }
        };
        let (store, store_stamp) = match EmbeddingStore::load(Path::new(store_path)) {
            Ok(pair) => pair,
            Err(e) => {
                set_error(&format!("store: {e}"));
                return TrStatus::TrErrFormat;
            }
        };
        if store.dimension() != model.config.code_dim {
            set_error("store dimension does not match the model");
            return TrStatus::TrErrFormat;
        }
        if store_stamp != model.run_stamp {
            set_error("store and model come from different runs");
            return TrStatus::TrErrFormat;
        }
        let engine = Box::new(TrEngine {
            model,
            vocab,
            store,
            path_cfg: PathConfig::default(),
        });
        *out_engine = Box::into_raw(engine);
        TrStatus::TrOk
    })
}

/// Close an engine opened by `tr_engine_open`. Null is a no-op.
///
/// # Safety
/// `engine` must be null or a pointer returned by `tr_engine_open` that
/// has not been closed yet.
#[no_mangle]
pub unsafe extern "C" fn tr_engine_close(engine: *mut TrEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Dimension of the shared embedding space, or 0 for a null engine.
///
/// # Safety
/// `engine` must be null or a live engine handle.
#[no_mangle]
pub unsafe extern "C" fn tr_engine_dimension(engine: *const TrEngine) -> usize {
    if engine.is_null() {
        return 0;
    }
    (*engine).store.dimension()
}

/// Number of stored units (methods plus tests), or 0 for a null engine.
///
/// # Safety
/// `engine` must be null or a live engine handle.
#[no_mangle]
pub unsafe extern "C" fn tr_engine_entry_count(engine: *const TrEngine) -> usize {
    if engine.is_null() {
        return 0;
    }
    (*engine).store.len()
}

/// Embed method source into `out` (length `out_len`, which must equal the
/// engine dimension).
///
/// # Safety
/// `engine` must be a live engine handle; `source` a valid NUL-terminated
/// string; `out` writable for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tr_embed_method(
    engine: *const TrEngine,
    source: *const c_char,
    out: *mut c_double,
    out_len: usize,
) -> TrStatus {
    catch(|| {
        if engine.is_null() || out.is_null() {
            set_error("null pointer argument");
            return TrStatus::TrErrNullPointer;
        }
        let engine = &*engine;
        let source = match cstr_arg(source) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if out_len != engine.store.dimension() {
            set_error(&format!(
                "out_len {} does not match dimension {}",
                out_len,
                engine.store.dimension()
            ));
            return TrStatus::TrErrBadArgument;
        }
        match embed_query(source, &engine.model.params, &engine.vocab, &engine.path_cfg) {
            Ok(vec) => {
                ptr::copy_nonoverlapping(vec.as_ptr(), out, out_len);
                TrStatus::TrOk
            }
            Err(RecommendError::ParseReject(detail)) => {
                set_error(&detail);
                TrStatus::TrErrParseReject
            }
            Err(e) => {
                set_error(&e.to_string());
                TrStatus::TrErrInternal
            }
        }
    })
}

/// Cosine similarity of two vectors of length `len` into `out_similarity`.
///
/// # Safety
/// `u` and `v` must be readable for `len` doubles; `out_similarity` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_cosine(
    u: *const c_double,
    v: *const c_double,
    len: usize,
    out_similarity: *mut c_double,
) -> TrStatus {
    catch(|| {
        if u.is_null() || v.is_null() || out_similarity.is_null() {
            set_error("null pointer argument");
            return TrStatus::TrErrNullPointer;
        }
        let us = std::slice::from_raw_parts(u, len);
        let vs = std::slice::from_raw_parts(v, len);
        match cosine(us, vs) {
            Ok(c) => {
                *out_similarity = c;
                TrStatus::TrOk
            }
            Err(e) => {
                set_error(&e.to_string());
                TrStatus::TrErrBadArgument
            }
        }
    })
}

/// Recommend tests for method source. `approach` is 1 (match methods,
/// recommend their tests) or 2 (match tests directly); `tau` is the
/// similarity floor, `k` the maximum number of candidates. On success
/// writes a JSON document to `*out_json`; free it with `tr_string_free`.
///
/// # Safety
/// `engine` must be a live engine handle; `source` a valid NUL-terminated
/// string; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_recommend_json(
    engine: *const TrEngine,
    source: *const c_char,
    approach: c_int,
    tau: c_double,
    k: usize,
    out_json: *mut *mut c_char,
) -> TrStatus {
    catch(|| {
        if engine.is_null() || out_json.is_null() {
            set_error("null pointer argument");
            return TrStatus::TrErrNullPointer;
        }
        let engine = &*engine;
        let source = match cstr_arg(source) {
            Ok(s) => s,
            Err(e) => return e,
        };
        let approach = match approach {
            1 => Approach::Functionality,
            2 => Approach::Structure,
            other => {
                set_error(&format!("approach must be 1 or 2, got {other}"));
                return TrStatus::TrErrBadArgument;
            }
        };
        if !(-1.0..=1.0).contains(&tau) {
            set_error(&format!("tau must lie in [-1, 1], got {tau}"));
            return TrStatus::TrErrBadArgument;
        }
        let query = match embed_query(
            source,
            &engine.model.params,
            &engine.vocab,
            &engine.path_cfg,
        ) {
            Ok(q) => q,
            Err(RecommendError::ParseReject(detail)) => {
                set_error(&detail);
                return TrStatus::TrErrParseReject;
            }
            Err(e) => {
                set_error(&e.to_string());
                return TrStatus::TrErrInternal;
            }
        };
        let outcome = match approach {
            Approach::Functionality => {
                recommend_functionality_vec(&query, &engine.store, tau, k, None)
            }
            Approach::Structure => {
                recommend_structure_vec(&query, &engine.store, tau, k, None)
            }
        };
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) => {
                set_error(&e.to_string());
                return TrStatus::TrErrInternal;
            }
        };
        let json = match serde_json::to_string_pretty(&outcome) {
            Ok(j) => j,
            Err(e) => {
                set_error(&format!("serialize: {e}"));
                return TrStatus::TrErrInternal;
            }
        };
        let json: String = json.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
        match CString::new(json) {
            Ok(c) => {
                *out_json = c.into_raw();
                TrStatus::TrOk
            }
            Err(_) => {
                set_error("serialized JSON contained NUL");
                TrStatus::TrErrInternal
            }
        }
    })
}

/// Free a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or a pointer returned by `tr_recommend_json` that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn tr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
