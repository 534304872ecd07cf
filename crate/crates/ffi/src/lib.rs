//! C ABI over [`ebpps::Sampler`].
//!
//! Every function returns an [`EbppsStatus`] and writes results through out
//! pointers. Samplers are opaque handles created by [`ebpps_sampler_new`] or
//! [`ebpps_sampler_restore`] and released with [`ebpps_sampler_free`]. Item
//! ids are `uint64_t`. A handle must not be used from two threads at once.
//!
//! Panics never cross the boundary; they surface as `EBPPS_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ebpps::{Error, Sampler, WeightedItem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbppsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidWeight = 2,
    InvalidParameter = 3,
    Precondition = 4,
    BufferTooSmall = 5,
    Snapshot = 6,
    Panic = 7,
}

/// Running statistics of a sampler.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EbppsStats {
    pub bound: u64,
    pub items_seen: u64,
    pub total_discards: u64,
    pub total_weight: f64,
    /// 0 before the first item.
    pub max_weight: f64,
    pub rho: f64,
    pub latent_size: f64,
    pub expected_size: f64,
}

pub struct EbppsSampler {
    inner: Sampler<u64>,
}

impl From<Error> for EbppsStatus {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidWeight(_) => EbppsStatus::InvalidWeight,
            Error::InvalidParameter(_) | Error::TooLarge(_) => EbppsStatus::InvalidParameter,
            Error::Precondition(_) | Error::Malformed(_) => EbppsStatus::Precondition,
            Error::Snapshot(_) => EbppsStatus::Snapshot,
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), EbppsStatus>) -> EbppsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EbppsStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => EbppsStatus::Panic,
    }
}

unsafe fn handle<'a>(sampler: *const EbppsSampler) -> Result<&'a EbppsSampler, EbppsStatus> {
    sampler.as_ref().ok_or(EbppsStatus::NullPointer)
}

unsafe fn handle_mut<'a>(sampler: *mut EbppsSampler) -> Result<&'a mut EbppsSampler, EbppsStatus> {
    sampler.as_mut().ok_or(EbppsStatus::NullPointer)
}

unsafe fn out<'a, T>(ptr: *mut T) -> Result<&'a mut T, EbppsStatus> {
    ptr.as_mut().ok_or(EbppsStatus::NullPointer)
}

/// Creates a sampler with sample-size bound `bound`. On success `*out_sampler`
/// receives a handle owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn ebpps_sampler_new(bound: u64, seed: u64, out_sampler: *mut *mut EbppsSampler) -> EbppsStatus {
    guard(|| {
        let slot = out(out_sampler)?;
        let bound = usize::try_from(bound).map_err(|_| EbppsStatus::InvalidParameter)?;
        let inner = Sampler::with_bound(bound, seed)?;
        *slot = Box::into_raw(Box::new(EbppsSampler { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ebpps_sampler_free(sampler: *mut EbppsSampler) {
    if !sampler.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(sampler))));
    }
}

/// Feeds one item. On error the sampler is unchanged.
#[no_mangle]
pub unsafe extern "C" fn ebpps_sampler_process(sampler: *mut EbppsSampler, id: u64, weight: f64) -> EbppsStatus {
    guard(|| {
        let s = handle_mut(sampler)?;
        s.inner.process(WeightedItem::new(id, weight)?)?;
        Ok(())
    })
}

/// Draws a sample into `ids`. A capacity of at least the bound always
/// suffices. `*out_len` receives the sample size; if it exceeds `capacity`
/// nothing is written and `EBPPS_STATUS_BUFFER_TOO_SMALL` is returned.
#[no_mangle]
pub unsafe extern "C" fn ebpps_sampler_extract(
    sampler: *mut EbppsSampler,
    ids: *mut u64,
    capacity: usize,
    out_len: *mut usize,
) -> EbppsStatus {
    guard(|| {
        let s = handle_mut(sampler)?;
        let len = out(out_len)?;
        let sample = s.inner.extract();
        *len = sample.len();
        if sample.len() > capacity {
            return Err(EbppsStatus::BufferTooSmall);
        }
        if sample.is_empty() {
            return Ok(());
        }
        if ids.is_null() {
            return Err(EbppsStatus::NullPointer);
        }
        let dst = std::slice::from_raw_parts_mut(ids, sample.len());
        for (slot, item) in dst.iter_mut().zip(sample.iter()) {
            *slot = item.id;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ebpps_sampler_stats(sampler: *const EbppsSampler, out_stats: *mut EbppsStats) -> EbppsStatus {
    guard(|| {
        let s = &handle(sampler)?.inner;
        let stats = out(out_stats)?;
        let counter = s.counter();
        *stats = EbppsStats {
            bound: s.bound() as u64,
            items_seen: s.items_seen(),
            total_discards: counter.total_discards(),
            total_weight: s.total_weight(),
            max_weight: if s.items_seen() > 0 { s.max_weight() } else { 0.0 },
            rho: s.rho(),
            latent_size: s.latent().latent_size(),
            expected_size: s.expected_sample_size(),
        };
        Ok(())
    })
}

/// Current inclusion probability of an item of weight `weight`.
#[no_mangle]
pub unsafe extern "C" fn ebpps_sampler_inclusion_probability(
    sampler: *const EbppsSampler,
    weight: f64,
    out_probability: *mut f64,
) -> EbppsStatus {
    guard(|| {
        let s = handle(sampler)?;
        let p = out(out_probability)?;
        *p = s.inner.inclusion_probability(weight)?;
        Ok(())
    })
}

/// Serializes the sampler as UTF-8 JSON, without a terminating NUL.
/// `*out_len` always receives the required size; pass a null `buf` to query
/// it.
#[no_mangle]
pub unsafe extern "C" fn ebpps_sampler_snapshot(
    sampler: *const EbppsSampler,
    buf: *mut u8,
    capacity: usize,
    out_len: *mut usize,
) -> EbppsStatus {
    guard(|| {
        let s = handle(sampler)?;
        let len = out(out_len)?;
        let json = s.inner.snapshot_json();
        *len = json.len();
        if buf.is_null() || json.len() > capacity {
            return Err(EbppsStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(json.as_ptr(), buf, json.len());
        Ok(())
    })
}

/// Rebuilds a sampler from [`ebpps_sampler_snapshot`] output.
#[no_mangle]
pub unsafe extern "C" fn ebpps_sampler_restore(
    buf: *const u8,
    len: usize,
    out_sampler: *mut *mut EbppsSampler,
) -> EbppsStatus {
    guard(|| {
        let slot = out(out_sampler)?;
        if buf.is_null() {
            return Err(EbppsStatus::NullPointer);
        }
        let bytes = std::slice::from_raw_parts(buf, len);
        let json = std::str::from_utf8(bytes).map_err(|_| EbppsStatus::Snapshot)?;
        let inner = Sampler::restore_json(json)?;
        *slot = Box::into_raw(Box::new(EbppsSampler { inner }));
        Ok(())
    })
}

/// Threshold PPS scale for expected size `bound`. When `out_inclusion` is
/// not null it receives `len` inclusion probabilities.
#[no_mangle]
pub unsafe extern "C" fn ebpps_threshold_tau(
    weights: *const f64,
    len: usize,
    bound: u64,
    out_tau: *mut f64,
    out_inclusion: *mut f64,
) -> EbppsStatus {
    guard(|| {
        let tau = out(out_tau)?;
        if weights.is_null() && len > 0 {
            return Err(EbppsStatus::NullPointer);
        }
        let weights = if len == 0 { &[][..] } else { std::slice::from_raw_parts(weights, len) };
        let bound = usize::try_from(bound).map_err(|_| EbppsStatus::InvalidParameter)?;
        let solution = ebpps::baseline::solve_tau(weights, bound)?;
        *tau = solution.tau;
        if !out_inclusion.is_null() {
            std::slice::from_raw_parts_mut(out_inclusion, len).copy_from_slice(&solution.inclusion);
        }
        Ok(())
    })
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn ebpps_status_str(status: EbppsStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        EbppsStatus::Ok => b"ok\0",
        EbppsStatus::NullPointer => b"null pointer argument\0",
        EbppsStatus::InvalidWeight => b"weight must be positive and finite\0",
        EbppsStatus::InvalidParameter => b"invalid parameter\0",
        EbppsStatus::Precondition => b"precondition violated\0",
        EbppsStatus::BufferTooSmall => b"buffer too small\0",
        EbppsStatus::Snapshot => b"malformed snapshot\0",
        EbppsStatus::Panic => b"internal panic\0",
    };
    text.as_ptr().cast()
}
