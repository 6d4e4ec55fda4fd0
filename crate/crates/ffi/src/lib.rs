//! C ABI over `d3net`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns a
//! [`D3Status`] and leaves a message for [`d3_last_error`] on failure.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use d3net::primitives::{
    schedule_all_to_all, schedule_all_to_one, schedule_broadcast, schedule_one_to_all, schedule_permutation,
    Permutation, PrimitiveOptions,
};
use d3net::routing::{header_for, path_of, SourceVectorHeader};
use d3net::sim::{run, verify_delivery, Discipline, Metrics, Mode, SimConfig};
use d3net::topology::{bfs_distance, diameter, neighbors};
use d3net::{Error, NetParams, RouterAddr};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum D3Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Precondition = 3,
    BufferTooSmall = 4,
    Simulation = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum D3Primitive {
    Broadcast = 0,
    OneToAll = 1,
    AllToOne = 2,
    AllToAll = 3,
    Permutation = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct D3Addr {
    pub c: u32,
    pub d: u32,
    pub p: u32,
}

/// Unicast source-vector header.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct D3Header {
    pub b: u8,
    pub gamma: u32,
    pub pi: u32,
    pub delta: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct D3SimOptions {
    pub primitive: D3Primitive,
    /// Root of broadcast and one-to-all, sink of all-to-one.
    pub root: D3Addr,
    /// Number of broadcasts.
    pub count: u32,
    pub seed: u64,
    /// Seed of the random permutation.
    pub perm_seed: u64,
    /// Nonzero: queued mode. Permutations always run queued.
    pub queued: u8,
    /// Nonzero: FIFO instead of LIFO in queued mode.
    pub fifo: u8,
    pub paper_exact: u8,
    pub no_delays: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct D3Summary {
    pub rounds: u64,
    pub delays: u64,
    pub total_steps: u32,
    pub total_hops: u64,
    pub conflicts: u64,
    pub deliveries: u64,
    /// 1 when deliveries match the primitive's expected set exactly.
    pub delivered_ok: u8,
}

/// Opaque network handle.
pub struct D3Network {
    params: NetParams,
}

/// Opaque simulation result handle.
pub struct D3Metrics {
    metrics: Metrics,
    delivered_ok: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn fail(status: D3Status, msg: impl Into<String>) -> D3Status {
    set_error(msg);
    status
}

fn status_of(err: &Error) -> D3Status {
    match err {
        Error::Precondition { .. } => D3Status::Precondition,
        Error::StepLimit { .. } => D3Status::Simulation,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => D3Status::Internal,
        _ => D3Status::InvalidArgument,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), D3Status>) -> D3Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => D3Status::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(D3Status::Internal, "panic inside d3net"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, D3Status>;
}

impl<T> OrStatus<T> for d3net::Result<T> {
    fn or_status(self) -> Result<T, D3Status> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, D3Status> {
    // SAFETY: caller passes a pointer obtained from this library or a valid
    // out-parameter; null is rejected here.
    unsafe { p.as_ref() }.ok_or_else(|| fail(D3Status::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<*mut T, D3Status> {
    if p.is_null() {
        Err(fail(D3Status::NullPointer, format!("{what} is null")))
    } else {
        Ok(p)
    }
}

impl From<D3Addr> for RouterAddr {
    fn from(a: D3Addr) -> Self {
        RouterAddr::new(a.c, a.d, a.p)
    }
}

impl From<RouterAddr> for D3Addr {
    fn from(a: RouterAddr) -> Self {
        D3Addr { c: a.c, d: a.d, p: a.p }
    }
}

fn checked(net: &D3Network, a: D3Addr) -> Result<RouterAddr, D3Status> {
    let r = RouterAddr::from(a);
    net.params.check(r).or_status()?;
    Ok(r)
}

/// Message of the last failed call on this thread. Valid until the next
/// call into the library from the same thread; never null.
#[no_mangle]
pub extern "C" fn d3_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn d3_network_new(k: u32, m: u32, out: *mut *mut D3Network) -> D3Status {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let params = NetParams::new(k, m).or_status()?;
        // SAFETY: `out` is non-null and points to writable storage.
        unsafe { *out = Box::into_raw(Box::new(D3Network { params })) };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn d3_network_free(net: *mut D3Network) {
    if !net.is_null() {
        // SAFETY: `net` came from `d3_network_new` and is freed once.
        drop(unsafe { Box::from_raw(net) });
    }
}

/// `K * M * M`, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn d3_network_router_count(net: *const D3Network) -> usize {
    // SAFETY: null-checked by `as_ref`.
    unsafe { net.as_ref() }.map_or(0, |n| n.params.router_count())
}

/// Writes the distinct neighbours of `addr` into `buf`. `len` receives the
/// neighbour count even when the buffer is too small.
#[no_mangle]
pub unsafe extern "C" fn d3_neighbors(
    net: *const D3Network,
    addr: D3Addr,
    buf: *mut D3Addr,
    cap: usize,
    len: *mut usize,
) -> D3Status {
    guard(|| {
        let net = unsafe { deref(net, "net")? };
        let len = out_ptr(len, "len")?;
        let found = neighbors(&net.params, checked(net, addr)?);
        // SAFETY: `len` is non-null.
        unsafe { *len = found.len() };
        if found.len() > cap {
            return Err(fail(
                D3Status::BufferTooSmall,
                format!("{} neighbours, buffer holds {cap}", found.len()),
            ));
        }
        if !found.is_empty() {
            let buf = out_ptr(buf, "buf")?;
            for (i, a) in found.into_iter().enumerate() {
                // SAFETY: `buf` holds at least `cap >= found.len()` elements.
                unsafe { *buf.add(i) = a.into() };
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn d3_bfs_distance(net: *const D3Network, src: D3Addr, dst: D3Addr, out: *mut u32) -> D3Status {
    guard(|| {
        let net = unsafe { deref(net, "net")? };
        let out = out_ptr(out, "out")?;
        let d = bfs_distance(&net.params, checked(net, src)?, checked(net, dst)?).or_status()?;
        // SAFETY: `out` is non-null.
        unsafe { *out = d };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn d3_diameter(net: *const D3Network, out: *mut u32) -> D3Status {
    guard(|| {
        let net = unsafe { deref(net, "net")? };
        let out = out_ptr(out, "out")?;
        // SAFETY: `out` is non-null.
        unsafe { *out = diameter(&net.params) };
        Ok(())
    })
}

/// Minimal three-hop header from `src` to `dst`.
#[no_mangle]
pub unsafe extern "C" fn d3_header_for(net: *const D3Network, src: D3Addr, dst: D3Addr, out: *mut D3Header) -> D3Status {
    guard(|| {
        let net = unsafe { deref(net, "net")? };
        let out = out_ptr(out, "out")?;
        let h = header_for(&net.params, checked(net, src)?, checked(net, dst)?).or_status()?;
        // SAFETY: `out` is non-null.
        unsafe {
            *out = D3Header {
                b: h.b,
                gamma: h.global_port,
                pi: h.last_local,
                delta: h.first_local,
            }
        };
        Ok(())
    })
}

/// Router where a unicast header launched at `src` arrives.
#[no_mangle]
pub unsafe extern "C" fn d3_route_end(net: *const D3Network, src: D3Addr, header: D3Header, out: *mut D3Addr) -> D3Status {
    guard(|| {
        let net = unsafe { deref(net, "net")? };
        let out = out_ptr(out, "out")?;
        let h = SourceVectorHeader::new(header.b, header.gamma, header.pi, header.delta);
        h.validate(&net.params).or_status()?;
        let path = path_of(&net.params, checked(net, src)?, h).or_status()?;
        // SAFETY: `out` is non-null.
        unsafe { *out = path.end().into() };
        Ok(())
    })
}

/// Builds and runs one primitive. A strict-mode run with conflicts still
/// succeeds; inspect the summary.
#[no_mangle]
pub unsafe extern "C" fn d3_simulate(
    net: *const D3Network,
    options: *const D3SimOptions,
    out: *mut *mut D3Metrics,
) -> D3Status {
    guard(|| {
        let net = unsafe { deref(net, "net")? };
        let o = unsafe { deref(options, "options")? };
        let out = out_ptr(out, "out")?;
        let params = &net.params;
        let opts = PrimitiveOptions {
            paper_exact: o.paper_exact != 0,
            insert_delays: o.no_delays == 0,
        };
        let plan = match o.primitive {
            D3Primitive::Broadcast => schedule_broadcast(params, checked(net, o.root)?, o.count.max(1) as usize),
            D3Primitive::OneToAll => schedule_one_to_all(params, checked(net, o.root)?, opts),
            D3Primitive::AllToOne => schedule_all_to_one(params, checked(net, o.root)?, opts),
            D3Primitive::AllToAll => schedule_all_to_all(params, opts),
            D3Primitive::Permutation => schedule_permutation(params, &Permutation::random(params, o.perm_seed)),
        }
        .or_status()?;
        let config = SimConfig {
            mode: if o.queued != 0 { Mode::Queued } else { plan.mode },
            discipline: if o.fifo != 0 { Discipline::Fifo } else { Discipline::Lifo },
            seed: o.seed,
            max_steps: None,
        };
        let metrics = run(params, &plan.schedule, &config).or_status()?;
        let delivered_ok = verify_delivery(&metrics, &plan.expected).ok;
        // SAFETY: `out` is non-null.
        unsafe { *out = Box::into_raw(Box::new(D3Metrics { metrics, delivered_ok })) };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn d3_metrics_summary(metrics: *const D3Metrics, out: *mut D3Summary) -> D3Status {
    guard(|| {
        let m = unsafe { deref(metrics, "metrics")? };
        let out = out_ptr(out, "out")?;
        let s = &m.metrics;
        // SAFETY: `out` is non-null.
        unsafe {
            *out = D3Summary {
                rounds: s.rounds_launched as u64,
                delays: s.delay_rounds as u64,
                total_steps: s.total_steps,
                total_hops: s.total_hops,
                conflicts: s.conflicts.len() as u64,
                deliveries: s.deliveries.len() as u64,
                delivered_ok: u8::from(m.delivered_ok),
            }
        };
        Ok(())
    })
}

/// Full metrics as a JSON string; release it with [`d3_string_free`].
#[no_mangle]
pub unsafe extern "C" fn d3_metrics_json(metrics: *const D3Metrics, out: *mut *mut c_char) -> D3Status {
    guard(|| {
        let m = unsafe { deref(metrics, "metrics")? };
        let out = out_ptr(out, "out")?;
        let text = m.metrics.to_json().or_status()?;
        let c = CString::new(text).map_err(|_| fail(D3Status::Internal, "metrics JSON contains a nul byte"))?;
        // SAFETY: `out` is non-null.
        unsafe { *out = c.into_raw() };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn d3_metrics_free(metrics: *mut D3Metrics) {
    if !metrics.is_null() {
        // SAFETY: `metrics` came from `d3_simulate` and is freed once.
        drop(unsafe { Box::from_raw(metrics) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn d3_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: `s` came from `CString::into_raw` in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}
