//! C ABI over the flexgrid index.
//!
//! Indexes are opaque handles created by `flexgrid_build` and released with
//! `flexgrid_free`. Every call returns a `FlexgridStatus`; on failure
//! `flexgrid_last_error` describes the most recent error on the calling
//! thread. Points are passed as `dims` contiguous doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use flexgrid::tuner::heuristic_spec;
use flexgrid::{EraseOutcome, InsertOutcome};
use flexgrid::{
    Error, IndexVariant, PartitionSpec, Point, QueryBox, RepartitionConfig, VariantKind,
};

/// Opaque index handle.
pub struct FlexgridIndex {
    inner: IndexVariant,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlexgridStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonFinite = 4,
    BufferTooSmall = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlexgridVariant {
    /// Grid that re-partitions its slabs as data shifts.
    Flexflood = 0,
    /// Same grid with re-partitioning disabled.
    UpdatableFlood = 1,
    /// Grid rebuilt from scratch every `delta_k` updates.
    DeltaBuffer = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let msg = CString::new(message.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FlexgridStatus {
    match e {
        Error::DimensionMismatch { .. } => FlexgridStatus::DimensionMismatch,
        Error::NonFinite { .. } => FlexgridStatus::NonFinite,
        Error::TooFewDimensions(_)
        | Error::InvalidBox { .. }
        | Error::InvalidSpec(_)
        | Error::InvalidThresholds(_) => FlexgridStatus::InvalidArgument,
        _ => FlexgridStatus::Internal,
    }
}

struct Fail(FlexgridStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_error(e.to_string());
        Fail(status_of(&e))
    }
}

fn fail(status: FlexgridStatus, message: &str) -> Fail {
    set_error(message);
    Fail(status)
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FlexgridStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FlexgridStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(_) => {
            set_error("panic inside flexgrid");
            FlexgridStatus::Panic
        }
    }
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(fail(
            FlexgridStatus::NullPointer,
            &format!("{what} is null"),
        ))
    } else {
        Ok(())
    }
}

unsafe fn handle<'a>(index: *const FlexgridIndex) -> Result<&'a FlexgridIndex, Fail> {
    nonnull(index, "index")?;
    Ok(&*index)
}

unsafe fn handle_mut<'a>(index: *mut FlexgridIndex) -> Result<&'a mut FlexgridIndex, Fail> {
    nonnull(index, "index")?;
    Ok(&mut *index)
}

unsafe fn read_point(coords: *const f64, dims: usize) -> Result<Point, Fail> {
    nonnull(coords, "coords")?;
    Ok(Point::new(
        std::slice::from_raw_parts(coords, dims).to_vec(),
    )?)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    nonnull(out, "output pointer")?;
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn flexgrid_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds an index over `n` points stored row-major in `points`
/// (`n * dims` doubles). `counts` gives the slab count per axis and may be
/// null, in which case a layout is derived from the data. `delta_k` is the
/// rebuild period of the delta-buffer variant and ignored otherwise.
///
/// # Safety
/// `points` must hold `n * dims` doubles, `counts` (if non-null) `dims`
/// values, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flexgrid_build(
    dims: usize,
    points: *const f64,
    n: usize,
    sort_dim: usize,
    counts: *const usize,
    variant: FlexgridVariant,
    delta_k: usize,
    out: *mut *mut FlexgridIndex,
) -> FlexgridStatus {
    guard(|| {
        nonnull(out, "out")?;
        out.write(ptr::null_mut());
        if n > 0 {
            nonnull(points, "points")?;
        }
        let pts = if n == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(points, n * dims)
                .chunks_exact(dims.max(1))
                .map(Point::new)
                .collect::<Result<Vec<_>, _>>()?
        };
        let spec = if counts.is_null() {
            if pts.is_empty() {
                PartitionSpec::uniform(dims, dims.saturating_sub(1), 1)?
            } else {
                heuristic_spec(&pts, dims, flexgrid::tuner::DEFAULT_TARGET_CELL_LOAD)?
            }
        } else {
            PartitionSpec::new(sort_dim, std::slice::from_raw_parts(counts, dims).to_vec())?
        };
        let kind = match variant {
            FlexgridVariant::Flexflood => VariantKind::Flexflood,
            FlexgridVariant::UpdatableFlood => VariantKind::UpdatableFlood,
            FlexgridVariant::DeltaBuffer if delta_k == 0 => {
                return Err(fail(
                    FlexgridStatus::InvalidArgument,
                    "delta_k must be at least 1",
                ))
            }
            FlexgridVariant::DeltaBuffer => VariantKind::DeltaBuffer { k: delta_k },
        };
        let inner = IndexVariant::build(kind, dims, pts, &spec, RepartitionConfig::default())?;
        out.write(Box::into_raw(Box::new(FlexgridIndex { inner })));
        Ok(())
    })
}

/// Releases an index. Null is ignored.
///
/// # Safety
/// `index` must come from `flexgrid_build` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn flexgrid_free(index: *mut FlexgridIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Inserts a point; `inserted` is false when it was already present.
///
/// # Safety
/// `coords` must hold `dims` doubles; `inserted` may be null.
#[no_mangle]
pub unsafe extern "C" fn flexgrid_insert(
    index: *mut FlexgridIndex,
    coords: *const f64,
    inserted: *mut bool,
) -> FlexgridStatus {
    guard(|| {
        let idx = handle_mut(index)?;
        let p = read_point(coords, idx.inner.dims())?;
        let outcome = idx.inner.insert(p)?;
        if !inserted.is_null() {
            inserted.write(outcome == InsertOutcome::Inserted);
        }
        Ok(())
    })
}

/// Erases a point; `erased` is false when it was absent.
///
/// # Safety
/// `coords` must hold `dims` doubles; `erased` may be null.
#[no_mangle]
pub unsafe extern "C" fn flexgrid_erase(
    index: *mut FlexgridIndex,
    coords: *const f64,
    erased: *mut bool,
) -> FlexgridStatus {
    guard(|| {
        let idx = handle_mut(index)?;
        let p = read_point(coords, idx.inner.dims())?;
        let outcome = idx.inner.erase(&p)?;
        if !erased.is_null() {
            erased.write(outcome == EraseOutcome::Erased);
        }
        Ok(())
    })
}

/// # Safety
/// `coords` must hold `dims` doubles and `found` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flexgrid_contains(
    index: *const FlexgridIndex,
    coords: *const f64,
    found: *mut bool,
) -> FlexgridStatus {
    guard(|| {
        let idx = handle(index)?;
        let p = read_point(coords, idx.inner.dims())?;
        write_out(found, idx.inner.contains(&p)?)
    })
}

/// Writes the points inside the closed box `[lo, hi]` to `out_points`
/// (row-major, room for `capacity` points) and their number to `count`.
/// When more than `capacity` points match, nothing is written to
/// `out_points`, `count` receives the required capacity and the call returns
/// `FLEXGRID_STATUS_BUFFER_TOO_SMALL`.
///
/// # Safety
/// `lo` and `hi` must hold `dims` doubles, `out_points` room for
/// `capacity * dims` doubles (may be null when `capacity` is 0).
#[no_mangle]
pub unsafe extern "C" fn flexgrid_search(
    index: *const FlexgridIndex,
    lo: *const f64,
    hi: *const f64,
    out_points: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> FlexgridStatus {
    guard(|| {
        let idx = handle(index)?;
        nonnull(count, "count")?;
        let dims = idx.inner.dims();
        let q = QueryBox::new(read_point(lo, dims)?, read_point(hi, dims)?)?;
        let found = idx.inner.search(&q)?;
        count.write(found.len());
        if found.len() > capacity {
            return Err(fail(
                FlexgridStatus::BufferTooSmall,
                &format!("{} results, capacity {capacity}", found.len()),
            ));
        }
        if !found.is_empty() {
            nonnull(out_points, "out_points")?;
            let out = std::slice::from_raw_parts_mut(out_points, found.len() * dims);
            for (dst, p) in out.chunks_exact_mut(dims).zip(&found) {
                dst.copy_from_slice(p.coords());
            }
        }
        Ok(())
    })
}

/// # Safety
/// `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flexgrid_len(
    index: *const FlexgridIndex,
    len: *mut usize,
) -> FlexgridStatus {
    guard(|| write_out(len, handle(index)?.inner.len()))
}

/// # Safety
/// `dims` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flexgrid_dims(
    index: *const FlexgridIndex,
    dims: *mut usize,
) -> FlexgridStatus {
    guard(|| write_out(dims, handle(index)?.inner.dims()))
}

/// Current number of slabs on `axis`.
///
/// # Safety
/// `slabs` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flexgrid_slab_count(
    index: *const FlexgridIndex,
    axis: usize,
    slabs: *mut usize,
) -> FlexgridStatus {
    guard(|| {
        let idx = handle(index)?;
        if axis >= idx.inner.dims() {
            return Err(fail(FlexgridStatus::InvalidArgument, "axis out of range"));
        }
        write_out(slabs, idx.inner.grid().layout().slab_count(axis))
    })
}

/// Number of split, merge and equalize events so far.
///
/// # Safety
/// `events` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flexgrid_event_count(
    index: *const FlexgridIndex,
    events: *mut usize,
) -> FlexgridStatus {
    guard(|| write_out(events, handle(index)?.inner.events().len()))
}
