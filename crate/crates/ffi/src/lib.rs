//! C interface to `borb`.
//!
//! Models and section spaces are exposed as opaque heap handles created by
//! `*_new` and released by `*_free`. Every fallible call returns a
//! [`BorbStatus`]; the message of the most recent failure on the calling
//! thread is available from [`borb_last_error`].

use borb::quadrature::QuadratureConfig;
use borb::random_zeros::{sample_sphere, section_zeros, RngStream};
use borb::runner::{self, RunOptions};
use borb::{build_model, config::ExperimentConfig, Error, ModelKind, ModelSpec, OrbifoldModel, Point, SectionSpace};
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BorbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Domain = 4,
    NonFinite = 5,
    IllConditioned = 6,
    RootFinder = 7,
    Unsupported = 8,
    Io = 9,
    BufferTooSmall = 10,
    Internal = 11,
}

/// Model families of the catalog.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BorbModelKind {
    FsSphere = 0,
    Football = 1,
    CircleMass = 2,
    FlatCap = 3,
}

/// Opaque model handle.
pub struct BorbModel {
    spec: ModelSpec,
    model: Arc<OrbifoldModel>,
}

/// Opaque section space handle.
pub struct BorbSpace {
    space: SectionSpace,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> BorbStatus {
    match err {
        Error::Config(_) | Error::Json(_) => BorbStatus::Config,
        Error::Domain(_) => BorbStatus::Domain,
        Error::NonFinite { .. } => BorbStatus::NonFinite,
        Error::IllConditioned { .. } => BorbStatus::IllConditioned,
        Error::RootFinder { .. } => BorbStatus::RootFinder,
        Error::UnsupportedSupport { .. } | Error::Unsupported(_) => BorbStatus::Unsupported,
        Error::Io(_) | Error::Csv(_) => BorbStatus::Io,
        Error::Experiment(_) => BorbStatus::Internal,
    }
}

/// Runs `body`, converting library errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), BorbStatus>) -> BorbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BorbStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            BorbStatus::Internal
        }
    }
}

fn lib<T>(r: borb::Result<T>) -> Result<T, BorbStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(ptr: *const T, name: &str) -> Result<(), BorbStatus> {
    if ptr.is_null() {
        set_error(format!("{name} is null"));
        Err(BorbStatus::NullPointer)
    } else {
        Ok(())
    }
}

fn c_path(ptr: *const c_char, name: &str) -> Result<Option<PathBuf>, BorbStatus> {
    if ptr.is_null() {
        return Ok(None);
    }
    // SAFETY: the caller passes a NUL-terminated string.
    let s = unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error(format!("{name} is not UTF-8"));
        BorbStatus::InvalidArgument
    })?;
    Ok(Some(PathBuf::from(s)))
}

/// Message of the last failure on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn borb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn borb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a catalog model. `m` is the cone order (FOOTBALL only), `c` the
/// cap level (FLAT_CAP only), `bundle_degree` the line bundle degree.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn borb_model_new(
    kind: BorbModelKind,
    m: u32,
    c: f64,
    bundle_degree: u32,
    twist_canonical: bool,
    out: *mut *mut BorbModel,
) -> BorbStatus {
    guard(|| {
        non_null(out, "out")?;
        let kind = match kind {
            BorbModelKind::FsSphere => ModelKind::FsSphere,
            BorbModelKind::Football => ModelKind::Football,
            BorbModelKind::CircleMass => ModelKind::CircleMass,
            BorbModelKind::FlatCap => ModelKind::FlatCap,
        };
        let spec = ModelSpec {
            kind,
            m: if kind == ModelKind::Football { m } else { 1 },
            c: (kind == ModelKind::FlatCap).then_some(c),
            bundle_degree,
            twist_canonical,
        };
        let model = lib(build_model(&spec))?;
        let handle = Box::new(BorbModel {
            spec,
            model: Arc::new(model),
        });
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must come from `borb_model_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn borb_model_free(model: *mut BorbModel) {
    if !model.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Total curvature mass of the model weight within radius `r`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn borb_model_curvature_mass_within(
    model: *const BorbModel,
    r: f64,
    out: *mut f64,
) -> BorbStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        if r.is_nan() || r < 0.0 {
            set_error("radius must be non-negative");
            return Err(BorbStatus::InvalidArgument);
        }
        // SAFETY: checked non-null above.
        unsafe { *out = (*model).model.curvature_mass_within(r) };
        Ok(())
    })
}

/// Builds the orthonormalized space of invariant sections at level `p`,
/// with the twist taken from the model. Node counts of 0 select defaults.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn borb_space_new(
    model: *const BorbModel,
    p: u32,
    radial_nodes: usize,
    angular_nodes: usize,
    out: *mut *mut BorbSpace,
) -> BorbStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        // SAFETY: checked non-null above.
        let model = unsafe { &*model };
        let mut cfg = QuadratureConfig::default();
        if radial_nodes > 0 {
            cfg.radial_nodes = radial_nodes;
        }
        if angular_nodes > 0 {
            cfg.angular_nodes = angular_nodes;
        }
        lib(cfg.validate())?;
        let space = lib(SectionSpace::new(model.model.clone(), p, model.spec.twist_canonical, &cfg))?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(BorbSpace { space })) };
        Ok(())
    })
}

/// Releases a space handle. Null is ignored.
///
/// # Safety
/// `space` must come from `borb_space_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn borb_space_free(space: *mut BorbSpace) {
    if !space.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(space) });
    }
}

/// Dimension of the section space, or 0 for a null handle.
///
/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn borb_space_dimension(space: *const BorbSpace) -> usize {
    // SAFETY: the caller passes null or a live handle.
    unsafe { space.as_ref() }.map_or(0, |s| s.space.dimension())
}

/// Number of zeros of a nonzero section counted with multiplicity.
///
/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn borb_space_zero_budget(space: *const BorbSpace) -> u32 {
    // SAFETY: the caller passes null or a live handle.
    unsafe { space.as_ref() }.map_or(0, |s| s.space.zero_budget())
}

fn evaluate(
    space: *const BorbSpace,
    x: f64,
    y: f64,
    out: *mut f64,
    f: impl FnOnce(&SectionSpace, &Point) -> f64,
) -> BorbStatus {
    guard(|| {
        non_null(space, "space")?;
        non_null(out, "out")?;
        if !(x.is_finite() && y.is_finite()) {
            set_error("point must be finite");
            return Err(BorbStatus::InvalidArgument);
        }
        // SAFETY: checked non-null above.
        let space = unsafe { &(*space).space };
        let v = f(space, &Point::from_complex(Complex64::new(x, y)));
        // SAFETY: checked non-null above.
        unsafe { *out = v };
        Ok(())
    })
}

/// Pointwise Bergman kernel `sum |s_j|^2 e^{-2 p phi}` at `x + iy`.
///
/// # Safety
/// `space` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn borb_bergman_kernel(space: *const BorbSpace, x: f64, y: f64, out: *mut f64) -> BorbStatus {
    evaluate(space, x, y, out, |s, pt| s.bergman_kernel(pt))
}

/// Natural logarithm of the Bergman kernel at `x + iy`.
///
/// # Safety
/// `space` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn borb_log_bergman_kernel(
    space: *const BorbSpace,
    x: f64,
    y: f64,
    out: *mut f64,
) -> BorbStatus {
    evaluate(space, x, y, out, |s, pt| s.log_bergman_kernel(pt))
}

/// Fubini-Study potential of the space at `x + iy`.
///
/// # Safety
/// `space` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn borb_fs_potential(space: *const BorbSpace, x: f64, y: f64, out: *mut f64) -> BorbStatus {
    evaluate(space, x, y, out, |s, pt| s.fs_potential(pt))
}

/// Zeros of the random section number `index` of stream `seed`.
///
/// Affine roots are written with multiplicity into `re` and `im`, which
/// must hold `capacity` entries. `count` receives the number of affine
/// roots and `at_infinity` the mass at infinity. When `capacity` is too
/// small, `count` still receives the required size.
///
/// # Safety
/// `space` must be a live handle, `re`/`im` must hold `capacity` doubles
/// (or be null when `capacity` is 0), and `count`/`at_infinity` writable.
#[no_mangle]
pub unsafe extern "C" fn borb_sample_zeros(
    space: *const BorbSpace,
    seed: u64,
    index: usize,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    count: *mut usize,
    at_infinity: *mut u32,
) -> BorbStatus {
    guard(|| {
        non_null(space, "space")?;
        non_null(count, "count")?;
        non_null(at_infinity, "at_infinity")?;
        // SAFETY: checked non-null above.
        let space = unsafe { &(*space).space };
        let a = sample_sphere(space.dimension(), &RngStream::sample(seed, space.p, index));
        let zeros = lib(section_zeros(&a, space))?;
        let roots: Vec<Complex64> = zeros.affine_roots().collect();
        // SAFETY: checked non-null above.
        unsafe {
            *count = roots.len();
            *at_infinity = zeros.mass_at_infinity;
        }
        if roots.len() > capacity {
            set_error(format!("need {} entries, capacity is {capacity}", roots.len()));
            return Err(BorbStatus::BufferTooSmall);
        }
        if !roots.is_empty() {
            non_null(re, "re")?;
            non_null(im, "im")?;
            // SAFETY: the caller guarantees `capacity` entries.
            let (re, im) = unsafe {
                (
                    std::slice::from_raw_parts_mut(re, roots.len()),
                    std::slice::from_raw_parts_mut(im, roots.len()),
                )
            };
            for (k, z) in roots.iter().enumerate() {
                re[k] = z.re;
                im[k] = z.im;
            }
        }
        Ok(())
    })
}

/// Runs the experiment configuration at `config_path`. `out_dir`,
/// `cache_dir` may be null to keep the configured values; `seed` of 0
/// keeps the configured seed.
///
/// # Safety
/// Path arguments must be null or NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn borb_run_config(
    config_path: *const c_char,
    out_dir: *const c_char,
    cache_dir: *const c_char,
    seed: u64,
) -> BorbStatus {
    guard(|| {
        let Some(config) = c_path(config_path, "config_path")? else {
            set_error("config_path is null");
            return Err(BorbStatus::NullPointer);
        };
        let opts = RunOptions {
            out: c_path(out_dir, "out_dir")?,
            seed: (seed != 0).then_some(seed),
            threads: None,
            cache: c_path(cache_dir, "cache_dir")?,
        };
        let cfg = lib(ExperimentConfig::load(&config))?;
        lib(runner::run(&cfg, &opts))?;
        Ok(())
    })
}

/// Checks every file listed in a run manifest. `mismatched` receives the
/// number of missing or altered files.
///
/// # Safety
/// `manifest_path` must be a NUL-terminated string and `mismatched` writable.
#[no_mangle]
pub unsafe extern "C" fn borb_verify_manifest(manifest_path: *const c_char, mismatched: *mut usize) -> BorbStatus {
    guard(|| {
        non_null(mismatched, "mismatched")?;
        let Some(path) = c_path(manifest_path, "manifest_path")? else {
            set_error("manifest_path is null");
            return Err(BorbStatus::NullPointer);
        };
        let bad = lib(runner::verify(&path))?;
        // SAFETY: checked non-null above.
        unsafe { *mismatched = bad.len() };
        Ok(())
    })
}
