//! C ABI over `hyperbt`.
//!
//! Datasets and fit results are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an `HbtStatus`; on failure a description is available from
//! `hbt_last_error_message` on the same thread. Model, rule and normalization
//! selectors are passed as `int32_t` holding one of the exported enum values,
//! so out-of-range values are reported instead of being undefined behavior.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hyperbt::formats::parse_games;
use hyperbt::inference::FitResult;
use hyperbt::model::win_prob;
use hyperbt::synthetic::{generate_dataset, SyntheticConfig};
use hyperbt::{fit, log_likelihood, Error, FitConfig, GameDataset, ModelKind, Normalization, Strengths, UpdateRule};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HbtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A player has no wins or no losses, or the data cannot be fitted.
    Degenerate = 3,
    Parse = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
pub enum HbtModel {
    Bt = 0,
    Hbt = 1,
    Gbt = 2,
}

#[repr(C)]
pub enum HbtRule {
    /// The model's default rule.
    Default = 0,
    Zermelo = 1,
    Newman = 2,
    HbtMm = 3,
    GbtHuang = 4,
    GbtNewman = 5,
}

#[repr(C)]
pub enum HbtNormalization {
    None = 0,
    SumOne = 1,
    GeometricMeanOne = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HbtFitConfig {
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// An `HbtNormalization` value; ignored for the HBT model.
    pub normalization: i32,
}

pub struct HbtDataset {
    data: GameDataset,
    labels: Vec<CString>,
}

pub struct HbtFitResult {
    result: FitResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(e: &Error) -> HbtStatus {
    match e.root() {
        Error::ZeroNumerator { .. }
        | Error::ZeroDenominator { .. }
        | Error::NonPositiveNumerator { .. }
        | Error::Degenerate(_) => HbtStatus::Degenerate,
        Error::Parse { .. } => HbtStatus::Parse,
        Error::Io(_) => HbtStatus::Io,
        _ => HbtStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HbtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HbtStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} must not be null"));
            HbtStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            HbtStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

fn model_of(v: i32) -> Result<ModelKind, Error> {
    match v {
        0 => Ok(ModelKind::Bt),
        1 => Ok(ModelKind::Hbt),
        2 => Ok(ModelKind::Gbt),
        _ => Err(Error::Config(format!("unknown model {v}"))),
    }
}

fn rule_of(v: i32, model: ModelKind) -> Result<UpdateRule, Error> {
    match v {
        0 => Ok(UpdateRule::default_for(model)),
        1 => Ok(UpdateRule::Zermelo),
        2 => Ok(UpdateRule::Newman),
        3 => Ok(UpdateRule::HbtMm),
        4 => Ok(UpdateRule::GbtHuang),
        5 => Ok(UpdateRule::GbtNewman),
        _ => Err(Error::Config(format!("unknown update rule {v}"))),
    }
}

fn normalization_of(v: i32) -> Result<Normalization, Error> {
    match v {
        0 => Ok(Normalization::None),
        1 => Ok(Normalization::SumOne),
        2 => Ok(Normalization::GeometricMeanOne),
        _ => Err(Error::Config(format!("unknown normalization {v}"))),
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hbt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn hbt_fit_config_default() -> HbtFitConfig {
    let d = FitConfig::default();
    HbtFitConfig {
        tolerance: d.tolerance,
        max_sweeps: d.max_sweeps,
        normalization: HbtNormalization::GeometricMeanOne as i32,
    }
}

/// Creates an empty dataset over `n_players` players.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn hbt_dataset_new(
    n_players: usize,
    allow_overlap: bool,
    out: *mut *mut HbtDataset,
) -> HbtStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let data = GameDataset::new(n_players, allow_overlap)?;
        *out = Box::into_raw(Box::new(HbtDataset {
            data,
            labels: Vec::new(),
        }));
        Ok(())
    })
}

/// Reads a games file. Player labels are kept and exposed through
/// `hbt_dataset_player_label`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hbt_dataset_from_games_file(
    path: *const c_char,
    allow_overlap: bool,
    out: *mut *mut HbtDataset,
) -> HbtStatus {
    guard(|| {
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Error::Config("path is not valid UTF-8".into()))?;
        let (reg, data) = parse_games(path, allow_overlap)?;
        let labels = reg
            .labels()
            .iter()
            .map(|l| CString::new(l.as_str()).unwrap_or_default())
            .collect();
        *out = Box::into_raw(Box::new(HbtDataset { data, labels }));
        Ok(())
    })
}

/// Appends a game in which `winners` beat `losers` with weight `weight`.
///
/// # Safety
/// `ds` must be a live dataset handle; `winners` and `losers` must point to
/// `n_winners` and `n_losers` indices respectively.
#[no_mangle]
pub unsafe extern "C" fn hbt_dataset_add_game(
    ds: *mut HbtDataset,
    winners: *const usize,
    n_winners: usize,
    losers: *const usize,
    n_losers: usize,
    weight: f64,
) -> HbtStatus {
    guard(|| {
        let ds = ds.as_mut().ok_or(Failure::Null("ds"))?;
        let w = slice(winners, n_winners, "winners")?;
        let l = slice(losers, n_losers, "losers")?;
        ds.data.add_game(w, l, weight)?;
        Ok(())
    })
}

/// # Safety
/// `ds` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn hbt_dataset_num_players(ds: *const HbtDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.data.n())
}

/// # Safety
/// `ds` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn hbt_dataset_num_games(ds: *const HbtDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.data.len())
}

/// Label of player `index` for datasets read from a file, otherwise NULL.
/// The string is owned by the dataset.
///
/// # Safety
/// `ds` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn hbt_dataset_player_label(ds: *const HbtDataset, index: usize) -> *const c_char {
    ds.as_ref()
        .and_then(|d| d.labels.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// # Safety
/// `ds` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hbt_dataset_free(ds: *mut HbtDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Synthetic dataset of `n_games` games among `n_players` players. If
/// `true_log_strengths` is not NULL it receives the `n_players` generating
/// log-strengths.
///
/// # Safety
/// `out` must be writable; `true_log_strengths` must be NULL or point to
/// `n_players` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hbt_synthetic_generate(
    n_players: usize,
    n_games: usize,
    seed: u64,
    out: *mut *mut HbtDataset,
    true_log_strengths: *mut f64,
) -> HbtStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let ds = generate_dataset(&SyntheticConfig::new(n_players, n_games, seed))?;
        if !true_log_strengths.is_null() {
            std::slice::from_raw_parts_mut(true_log_strengths, n_players).copy_from_slice(&ds.true_strengths);
        }
        *out = Box::into_raw(Box::new(HbtDataset {
            data: ds.data,
            labels: Vec::new(),
        }));
        Ok(())
    })
}

/// Fits `model` with `rule` (`HBT_RULE_DEFAULT` picks the model's default).
/// `cfg` may be NULL for defaults. Running out of sweeps is not an error;
/// check `hbt_fit_result_converged`.
///
/// # Safety
/// `ds` must be a live dataset handle, `cfg` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hbt_fit(
    ds: *const HbtDataset,
    model: i32,
    rule: i32,
    cfg: *const HbtFitConfig,
    out: *mut *mut HbtFitResult,
) -> HbtStatus {
    guard(|| {
        let ds = handle(ds, "ds")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let model = model_of(model)?;
        let rule = rule_of(rule, model)?;
        let c = cfg.as_ref().copied().unwrap_or_else(|| hbt_fit_config_default());
        let cfg = FitConfig {
            tolerance: c.tolerance,
            max_sweeps: c.max_sweeps,
            normalization: normalization_of(c.normalization)?,
            record_trace: false,
        };
        let result = fit(&ds.data, model, rule, &cfg)?;
        *out = Box::into_raw(Box::new(HbtFitResult { result }));
        Ok(())
    })
}

/// # Safety
/// `res` must be NULL or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn hbt_fit_result_num_players(res: *const HbtFitResult) -> usize {
    res.as_ref().map_or(0, |r| r.result.pi.len())
}

/// # Safety
/// `res` must be NULL or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn hbt_fit_result_converged(res: *const HbtFitResult) -> bool {
    res.as_ref().is_some_and(|r| r.result.converged)
}

/// # Safety
/// `res` must be NULL or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn hbt_fit_result_sweeps(res: *const HbtFitResult) -> usize {
    res.as_ref().map_or(0, |r| r.result.sweeps_used)
}

/// # Safety
/// `res` must be NULL or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn hbt_fit_result_final_delta(res: *const HbtFitResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.result.final_delta)
}

unsafe fn copy_out(res: *const HbtFitResult, out: *mut f64, len: usize, log: bool) -> HbtStatus {
    guard(|| {
        let r = handle(res, "res")?;
        let n = r.result.pi.len();
        if len != n {
            return Err(Error::LengthMismatch { expected: n, got: len }.into());
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let dst = std::slice::from_raw_parts_mut(out, n);
        if log {
            dst.copy_from_slice(&r.result.log_strengths());
        } else {
            dst.copy_from_slice(r.result.pi.pi());
        }
        Ok(())
    })
}

/// Copies the fitted `pi` into `out`, which must hold exactly
/// `hbt_fit_result_num_players` values.
///
/// # Safety
/// `res` must be a live result handle and `out` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hbt_fit_result_strengths(res: *const HbtFitResult, out: *mut f64, len: usize) -> HbtStatus {
    copy_out(res, out, len, false)
}

/// As `hbt_fit_result_strengths`, for `s = log pi`.
///
/// # Safety
/// `res` must be a live result handle and `out` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hbt_fit_result_log_strengths(
    res: *const HbtFitResult,
    out: *mut f64,
    len: usize,
) -> HbtStatus {
    copy_out(res, out, len, true)
}

/// # Safety
/// `res` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hbt_fit_result_free(res: *mut HbtFitResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Log-likelihood of the dataset under `model` at strengths `pi`.
///
/// # Safety
/// `ds` must be a live dataset handle, `pi` point to `len` doubles and `out`
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn hbt_log_likelihood(
    ds: *const HbtDataset,
    model: i32,
    pi: *const f64,
    len: usize,
    out: *mut f64,
) -> HbtStatus {
    guard(|| {
        let ds = handle(ds, "ds")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let pi = Strengths::new(slice(pi, len, "pi")?.to_vec())?;
        *out = log_likelihood(&ds.data, &pi, model_of(model)?)?;
        Ok(())
    })
}

/// Probability that `winners` beat `losers` under `model` at strengths `pi`.
///
/// # Safety
/// `winners`, `losers` and `pi` must point to the stated number of elements
/// and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn hbt_win_prob(
    model: i32,
    winners: *const usize,
    n_winners: usize,
    losers: *const usize,
    n_losers: usize,
    pi: *const f64,
    len: usize,
    out: *mut f64,
) -> HbtStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let pi = Strengths::new(slice(pi, len, "pi")?.to_vec())?;
        let w = slice(winners, n_winners, "winners")?;
        let l = slice(losers, n_losers, "losers")?;
        *out = win_prob(model_of(model)?, w, l, &pi)?;
        Ok(())
    })
}
