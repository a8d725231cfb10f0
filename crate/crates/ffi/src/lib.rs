//! C ABI for the adaptalearn engine.
//!
//! Objects cross the boundary as opaque handles ([`AlProfile`], [`AlGraph`])
//! that the caller frees with the matching `*_free` function. Every fallible
//! function returns an [`AlStatus`]; on failure, [`al_last_error_message`]
//! describes the error for the calling thread. Strings returned through
//! `out` parameters are owned by the caller and released with
//! [`al_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use adaptalearn::sim::{self, TraceScript};
use adaptalearn::store::{self, QueryExpr, Schema, TripleGraph};
use adaptalearn::style::{self, BehaviorEventKind, IlsAnswerSheet, LearnerStyleProfile};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ParseError = 4,
    QueryError = 5,
    /// A replay ran but at least one expectation failed.
    ExpectationFailed = 6,
    Internal = 7,
}

/// Which consistency rules [`al_graph_validate`] applies.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlSchema {
    User = 0,
    Course = 1,
    Combined = 2,
}

/// A learner's scores and change accumulators.
pub struct AlProfile(LearnerStyleProfile);

/// An ontology graph.
pub struct AlGraph(TripleGraph);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: AlStatus, message: impl Into<String>) -> AlStatus {
    set_error(message);
    status
}

fn guard(f: impl FnOnce() -> AlStatus) -> AlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(AlStatus::Internal, "panic inside adaptalearn"),
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, AlStatus> {
    if p.is_null() {
        return Err(fail(AlStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(AlStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> AlStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            AlStatus::Ok
        }
        Err(_) => fail(AlStatus::Internal, "result contains a NUL byte"),
    }
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            return fail(AlStatus::NullPointer, "null pointer argument");
        }
    };
}

macro_rules! tryst {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn al_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn al_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Scores a 44-letter `A`/`B` answer string into `out_scores[4]`
/// (AR, SI, VV, SG).
///
/// # Safety
/// `answers` is a NUL-terminated string; `out_scores` points to 4 writable ints.
#[no_mangle]
pub unsafe extern "C" fn al_score_ils(answers: *const c_char, out_scores: *mut i32) -> AlStatus {
    guard(|| {
        nonnull!(out_scores);
        let sheet: IlsAnswerSheet = match tryst!(text(answers)).parse() {
            Ok(s) => s,
            Err(e) => return fail(AlStatus::InvalidArgument, e.to_string()),
        };
        let scores = style::score_ils(&sheet);
        for (i, (_, s)) in scores.iter().enumerate() {
            *out_scores.add(i) = s.value();
        }
        AlStatus::Ok
    })
}

/// Creates a profile from 4 scores (odd, in [-11, 11]) and 4 accumulators.
///
/// # Safety
/// `learner_id` is a NUL-terminated string; `scores` and `accumulators`
/// point to 4 ints each; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn al_profile_new(
    learner_id: *const c_char,
    scores: *const i32,
    accumulators: *const i32,
    out: *mut *mut AlProfile,
) -> AlStatus {
    guard(|| {
        nonnull!(scores, accumulators, out);
        let id = tryst!(text(learner_id));
        let s: [i32; 4] = std::slice::from_raw_parts(scores, 4).try_into().expect("length 4");
        let a: [i32; 4] = std::slice::from_raw_parts(accumulators, 4).try_into().expect("length 4");
        match LearnerStyleProfile::from_raw(id, s, a) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(AlProfile(p)));
                AlStatus::Ok
            }
            Err(e) => fail(AlStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `p` is NULL or a live handle from [`al_profile_new`].
#[no_mangle]
pub unsafe extern "C" fn al_profile_free(p: *mut AlProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copies scores and accumulators into `out_scores[4]` and `out_accumulators[4]`.
/// Either output may be NULL.
///
/// # Safety
/// `p` is a live handle; non-NULL outputs point to 4 writable ints.
#[no_mangle]
pub unsafe extern "C" fn al_profile_get(p: *const AlProfile, out_scores: *mut i32, out_accumulators: *mut i32) -> AlStatus {
    guard(|| {
        nonnull!(p);
        let p = &(*p).0;
        if !out_scores.is_null() {
            ptr::copy_nonoverlapping(p.raw_scores().as_ptr(), out_scores, 4);
        }
        if !out_accumulators.is_null() {
            ptr::copy_nonoverlapping(p.raw_accumulators().as_ptr(), out_accumulators, 4);
        }
        AlStatus::Ok
    })
}

/// Applies one behavior event (e.g. `"GalleryView"`) in place.
///
/// # Safety
/// `p` is a live handle; `kind` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn al_profile_apply_event(p: *mut AlProfile, kind: *const c_char) -> AlStatus {
    guard(|| {
        nonnull!(p);
        let kind: BehaviorEventKind = match tryst!(text(kind)).parse() {
            Ok(k) => k,
            Err(e) => return fail(AlStatus::InvalidArgument, e.to_string()),
        };
        (*p).0 = style::apply_event(&(*p).0, kind);
        AlStatus::Ok
    })
}

/// Applies the default settle rule in place and stores the number of
/// dimensions that triggered in `out_changed` (may be NULL).
///
/// # Safety
/// `p` is a live handle; `out_changed` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn al_profile_settle(p: *mut AlProfile, out_changed: *mut u32) -> AlStatus {
    guard(|| {
        nonnull!(p);
        let (next, changes) = style::settle(&(*p).0);
        (*p).0 = next;
        if !out_changed.is_null() {
            *out_changed = changes.len() as u32;
        }
        AlStatus::Ok
    })
}

/// Writes the presentation plan for the profile as JSON.
///
/// # Safety
/// `p` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn al_profile_compose(p: *const AlProfile, out: *mut *mut c_char) -> AlStatus {
    guard(|| {
        nonnull!(p, out);
        match serde_json::to_string(&style::compose_page(&(*p).0)) {
            Ok(json) => write_string(out, json),
            Err(e) => fail(AlStatus::Internal, e.to_string()),
        }
    })
}

/// Parses ontology text.
///
/// # Safety
/// `ttl` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn al_graph_parse(ttl: *const c_char, out: *mut *mut AlGraph) -> AlStatus {
    guard(|| {
        nonnull!(out);
        match store::parse(tryst!(text(ttl))) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(AlGraph(g)));
                AlStatus::Ok
            }
            Err(e) => fail(AlStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `g` is NULL or a live handle from [`al_graph_parse`].
#[no_mangle]
pub unsafe extern "C" fn al_graph_free(g: *mut AlGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of triples, or 0 for NULL.
///
/// # Safety
/// `g` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn al_graph_len(g: *const AlGraph) -> usize {
    if g.is_null() {
        0
    } else {
        (*g).0.len()
    }
}

/// Canonical text of the graph.
///
/// # Safety
/// `g` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn al_graph_serialize(g: *const AlGraph, out: *mut *mut c_char) -> AlStatus {
    guard(|| {
        nonnull!(g, out);
        write_string(out, store::serialize(&(*g).0))
    })
}

/// Evaluates a class expression; matching individuals are written one
/// `prefix:local` per line, sorted.
///
/// # Safety
/// `g` is a live handle; `expr` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn al_graph_query(g: *const AlGraph, expr: *const c_char, out: *mut *mut c_char) -> AlStatus {
    guard(|| {
        nonnull!(g, out);
        let expr: QueryExpr = match tryst!(text(expr)).parse() {
            Ok(e) => e,
            Err(e) => return fail(AlStatus::QueryError, e.to_string()),
        };
        match store::query(&(*g).0, &expr) {
            Ok(names) => write_string(out, names.iter().map(|n| format!("{n}\n")).collect()),
            Err(e) => fail(AlStatus::QueryError, e.to_string()),
        }
    })
}

/// Runs the consistency rules. Findings are written one per line as
/// `<rule> <subject> <message>`; `out_count` receives their number.
///
/// # Safety
/// `g` is a live handle; `out_count` and `out` are writable.
#[no_mangle]
pub unsafe extern "C" fn al_graph_validate(g: *const AlGraph, schema: AlSchema, out_count: *mut usize, out: *mut *mut c_char) -> AlStatus {
    guard(|| {
        nonnull!(g, out_count, out);
        let schema = match schema {
            AlSchema::User => Schema::User,
            AlSchema::Course => Schema::Course,
            AlSchema::Combined => Schema::Combined,
        };
        let report = store::validate(&(*g).0, schema);
        *out_count = report.findings.len();
        let lines = report.findings.iter().map(|f| format!("{} {} {}\n", f.rule_id, f.subject, f.message)).collect();
        write_string(out, lines)
    })
}

/// Replays a trace script on a simulated clock and writes the report text.
/// Returns [`AlStatus::ExpectationFailed`] when any expectation failed; the
/// report is written in that case too.
///
/// # Safety
/// `script` is a NUL-terminated string; `out_report` is writable.
#[no_mangle]
pub unsafe extern "C" fn al_replay(script: *const c_char, out_report: *mut *mut c_char) -> AlStatus {
    guard(|| {
        nonnull!(out_report);
        let parsed: TraceScript = match tryst!(text(script)).parse() {
            Ok(s) => s,
            Err(e) => return fail(AlStatus::ParseError, e.to_string()),
        };
        match sim::replay(&parsed) {
            Ok(report) => {
                let status = write_string(out_report, report.to_string());
                if status == AlStatus::Ok && !report.passed() {
                    return fail(AlStatus::ExpectationFailed, format!("{} expectation(s) failed", report.failures()));
                }
                status
            }
            Err(e) => fail(AlStatus::Internal, e.to_string()),
        }
    })
}

/// Runs the embedded golden rows; same report and status convention as [`al_replay`].
///
/// # Safety
/// `out_report` is writable.
#[no_mangle]
pub unsafe extern "C" fn al_verify_table1(out_report: *mut *mut c_char) -> AlStatus {
    guard(|| {
        nonnull!(out_report);
        match sim::verify_table1() {
            Ok(report) => {
                let status = write_string(out_report, report.to_string());
                if status == AlStatus::Ok && report.exit_code() != 0 {
                    return fail(AlStatus::ExpectationFailed, format!("rows failed: {:?}", report.failed_rows()));
                }
                status
            }
            Err(e) => fail(AlStatus::Internal, e.to_string()),
        }
    })
}
