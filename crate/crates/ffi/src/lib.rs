//! C ABI for the `crbf` decoders.
//!
//! Every fallible function returns a [`CrbfStatus`]; on failure a message is
//! available from [`crbf_last_error_message`] on the same thread. Graphs and
//! decoders are opaque heap handles released with their `_free` function.
//! Panics never cross the boundary; they surface as `CRBF_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use crbf::decoders::{decode, Algorithm, DecoderConfig, FlipPolicy};
use crbf::sim::{run_point, SweepConfig};
use crbf::tanner::{self, BinaryWord, TannerGraph};
use crbf::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrbfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    LengthMismatch = 4,
    Io = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrbfAlgorithm {
    Bf = 0,
    Wbf = 1,
    Mwbf = 2,
    Imwbf = 3,
    SoftCrbf = 4,
    HardCrbf = 5,
    Spa = 6,
    Identity = 7,
}

impl From<CrbfAlgorithm> for Algorithm {
    fn from(a: CrbfAlgorithm) -> Self {
        match a {
            CrbfAlgorithm::Bf => Algorithm::Bf,
            CrbfAlgorithm::Wbf => Algorithm::Wbf,
            CrbfAlgorithm::Mwbf => Algorithm::Mwbf,
            CrbfAlgorithm::Imwbf => Algorithm::Imwbf,
            CrbfAlgorithm::SoftCrbf => Algorithm::SoftCrbf,
            CrbfAlgorithm::HardCrbf => Algorithm::HardCrbf,
            CrbfAlgorithm::Spa => Algorithm::Spa,
            CrbfAlgorithm::Identity => Algorithm::Identity,
        }
    }
}

/// Decoder parameters. Fill with [`crbf_decoder_params_default`] and adjust.
/// `algorithm` must hold one of the declared enumerators.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CrbfDecoderParams {
    pub algorithm: CrbfAlgorithm,
    pub i_max: usize,
    pub gamma: f64,
    pub imwbf_alpha: f64,
    /// Flip every bit tied for the worst metric instead of the lowest index.
    pub flip_all_tied: bool,
    pub pre_check: bool,
    pub literal_init: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CrbfDecodeResult {
    pub converged: bool,
    pub iterations: usize,
    pub oscillations: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CrbfPointRecord {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub mean_iterations: f64,
}

/// Opaque parity-check graph.
pub struct CrbfGraph {
    inner: Arc<TannerGraph>,
}

/// Opaque decoder bound to one graph.
pub struct CrbfDecoder {
    graph: Arc<TannerGraph>,
    config: DecoderConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CrbfStatus {
    match err {
        Error::Alist { .. } | Error::Csv(_) | Error::Json(_) => CrbfStatus::Parse,
        Error::LengthMismatch { .. } => CrbfStatus::LengthMismatch,
        Error::Io(_) => CrbfStatus::Io,
        _ => CrbfStatus::InvalidArgument,
    }
}

struct Fail(CrbfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CrbfStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CrbfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CrbfStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_owned());
            CrbfStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CrbfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if p.is_null() {
        return if len == 0 { Ok(&[]) } else { Err(null(what)) };
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return if len == 0 {
            Ok(&mut [])
        } else {
            Err(null(what))
        };
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn want_len(expected: usize, got: usize) -> Result<(), Fail> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got }.into())
    }
}

unsafe fn put_graph(out: *mut *mut CrbfGraph, g: TannerGraph) {
    *out = Box::into_raw(Box::new(CrbfGraph { inner: Arc::new(g) }));
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crbf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn crbf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses alist text into a new graph.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crbf_graph_from_alist(
    text: *const c_char,
    out: *mut *mut CrbfGraph,
) -> CrbfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = tanner::parse_alist(str_arg(text, "text")?)?;
        put_graph(out, g);
        Ok(())
    })
}

/// Reads and parses an alist file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crbf_graph_from_alist_file(
    path: *const c_char,
    out: *mut *mut CrbfGraph,
) -> CrbfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        put_graph(out, tanner::parse_alist(&text)?);
        Ok(())
    })
}

/// Builds a seeded (dv, dc)-regular graph on `n_vars` variables.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crbf_graph_construct_regular(
    n_vars: usize,
    dv: usize,
    dc: usize,
    seed: u64,
    out: *mut *mut CrbfGraph,
) -> CrbfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put_graph(out, tanner::construct_regular(n_vars, dv, dc, seed)?);
        Ok(())
    })
}

/// Releases a graph. Decoders created from it stay valid. Null is ignored.
///
/// # Safety
/// `g` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn crbf_graph_free(g: *mut CrbfGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of variable nodes, or 0 for a null graph.
///
/// # Safety
/// `g` must be null or a live graph.
#[no_mangle]
pub unsafe extern "C" fn crbf_graph_n_vars(g: *const CrbfGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.n_vars())
}

/// Number of check nodes, or 0 for a null graph.
///
/// # Safety
/// `g` must be null or a live graph.
#[no_mangle]
pub unsafe extern "C" fn crbf_graph_n_checks(g: *const CrbfGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.n_checks())
}

/// Design rate `1 - M/N` (with redundant rows counted out), or 0 for null.
///
/// # Safety
/// `g` must be null or a live graph.
#[no_mangle]
pub unsafe extern "C" fn crbf_graph_rate(g: *const CrbfGraph) -> f64 {
    g.as_ref().map_or(0.0, |g| g.inner.rate())
}

/// Serializes the graph as alist text. Release the string with
/// [`crbf_string_free`].
///
/// # Safety
/// `g` must be a live graph and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crbf_graph_to_alist(
    g: *const CrbfGraph,
    out: *mut *mut c_char,
) -> CrbfStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CString::new(tanner::write_alist(&g.inner))
            .map_err(|_| Fail(CrbfStatus::Internal, "alist text contains NUL".to_owned()))?;
        *out = text.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn crbf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Writes the binary syndrome of `bits` (length `n_vars`, values 0/1) into
/// `out` (length `n_checks`).
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn crbf_graph_syndrome(
    g: *const CrbfGraph,
    bits: *const u8,
    n_bits: usize,
    out: *mut u8,
    n_out: usize,
) -> CrbfStatus {
    guard(|| {
        let g = &g.as_ref().ok_or_else(|| null("graph"))?.inner;
        let word = BinaryWord::new(slice_arg(bits, n_bits, "bits")?.to_vec())?;
        let out = slice_out(out, n_out, "out")?;
        want_len(g.n_checks(), out.len())?;
        out.copy_from_slice(tanner::syndrome(&word, g)?.bits());
        Ok(())
    })
}

/// Fills `out` with the default parameters of `algorithm` on graph `g`.
///
/// # Safety
/// `g` must be a live graph and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crbf_decoder_params_default(
    g: *const CrbfGraph,
    algorithm: CrbfAlgorithm,
    out: *mut CrbfDecoderParams,
) -> CrbfStatus {
    guard(|| {
        let g = &g.as_ref().ok_or_else(|| null("graph"))?.inner;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = DecoderConfig::new(algorithm.into(), g);
        *out = CrbfDecoderParams {
            algorithm,
            i_max: c.i_max,
            gamma: c.gamma,
            imwbf_alpha: c.imwbf_alpha,
            flip_all_tied: c.flip_policy == FlipPolicy::AllTied,
            pre_check: c.pre_check,
            literal_init: c.literal_init,
        };
        Ok(())
    })
}

/// Creates a decoder for graph `g`. The decoder keeps its own reference to
/// the graph.
///
/// # Safety
/// `g` must be a live graph; `params` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn crbf_decoder_new(
    g: *const CrbfGraph,
    params: *const CrbfDecoderParams,
    out: *mut *mut CrbfDecoder,
) -> CrbfStatus {
    guard(|| {
        let graph = g.as_ref().ok_or_else(|| null("graph"))?.inner.clone();
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut config = DecoderConfig::new(p.algorithm.into(), &graph);
        config.i_max = p.i_max;
        config.gamma = p.gamma;
        config.imwbf_alpha = p.imwbf_alpha;
        config.flip_policy = if p.flip_all_tied {
            FlipPolicy::AllTied
        } else {
            FlipPolicy::SingleLowestIndex
        };
        config.pre_check = p.pre_check;
        config.literal_init = p.literal_init;
        config.validate()?;
        *out = Box::into_raw(Box::new(CrbfDecoder { graph, config }));
        Ok(())
    })
}

/// Releases a decoder. Null is ignored.
///
/// # Safety
/// `d` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn crbf_decoder_free(d: *mut CrbfDecoder) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Decodes one received word `y` (length `n_vars`). The decided bits go to
/// `out_bits` (length `n_vars`); `result` may be null. `sigma` is the noise
/// standard deviation, used only by the sum-product decoder.
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn crbf_decode(
    d: *const CrbfDecoder,
    y: *const f64,
    n_y: usize,
    sigma: f64,
    out_bits: *mut u8,
    n_out: usize,
    result: *mut CrbfDecodeResult,
) -> CrbfStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("decoder"))?;
        let y = slice_arg(y, n_y, "y")?;
        let out = slice_out(out_bits, n_out, "out_bits")?;
        want_len(d.graph.n_vars(), out.len())?;
        let o = decode(y, &d.graph, &d.config, sigma)?;
        out.copy_from_slice(o.decoded.bits());
        if let Some(r) = result.as_mut() {
            *r = CrbfDecodeResult {
                converged: o.converged,
                iterations: o.iterations,
                oscillations: o.oscillations,
            };
        }
        Ok(())
    })
}

/// Noise standard deviation for `ebn0_db` at code rate `rate`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crbf_ebn0_to_sigma(ebn0_db: f64, rate: f64, out: *mut f64) -> CrbfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = crbf::channel::ebn0_to_sigma(ebn0_db, rate)?;
        Ok(())
    })
}

/// Monte Carlo BER/FER at one Eb/N0 with all-zero codewords. Stops after
/// `max_frames` or once both error minimums are reached. Results depend only
/// on the arguments, not on thread count.
///
/// # Safety
/// `d` must be a live decoder and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn crbf_run_point(
    d: *const CrbfDecoder,
    ebn0_db: f64,
    max_frames: u64,
    min_bit_errors: u64,
    min_frame_errors: u64,
    seed: u64,
    out: *mut CrbfPointRecord,
) -> CrbfStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("decoder"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let mut cfg = SweepConfig::new(d.graph.clone(), d.config);
        cfg.max_frames = max_frames;
        cfg.min_bit_errors = min_bit_errors;
        cfg.min_frame_errors = min_frame_errors;
        cfg.seed = seed;
        cfg.record_wall_time = false;
        let r = run_point(&cfg, ebn0_db)?;
        *out = CrbfPointRecord {
            ebn0_db: r.ebn0_db,
            frames: r.frames,
            bit_errors: r.bit_errors,
            frame_errors: r.frame_errors,
            ber: r.ber,
            fer: r.fer,
            mean_iterations: r.mean_iterations,
        };
        Ok(())
    })
}
