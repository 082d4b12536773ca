//! C ABI for the `pprls` library.
//!
//! Objects are exposed as opaque handles returned through out-pointers and
//! released with the matching `pprls_*_free`. Every fallible
//! call returns a [`PprlsStatus`]; on failure the message is available from
//! [`pprls_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pprls::bounds::spherical_cap_volume;
use pprls::diagnostics::mixing_time_inf;
use pprls::graph::{build_graph, normalized_cut, smallest_connecting_radius};
use pprls::ppr::{appr_push, ppr_cluster, ppr_exact, ClusterOptions, ClusterResult};
use pprls::{Error, NeighborhoodGraph, PointCloud, PprVector, VertexSet};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PprlsStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Disconnected = 3,
    NoCluster = 4,
    Numeric = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// An r-neighborhood graph.
pub struct PprlsGraph(NeighborhoodGraph);

/// A PPR vector.
pub struct PprlsPpr(PprVector);

/// A sweep-cut cluster.
pub struct PprlsCluster(ClusterResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PprlsStatus {
    match e {
        Error::Disconnected { .. } | Error::Edgeless => PprlsStatus::Disconnected,
        Error::NoCluster { .. } => PprlsStatus::NoCluster,
        Error::LowAcceptance { .. } | Error::NonFinite(_) | Error::Numeric(_) => PprlsStatus::Numeric,
        _ => PprlsStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), PprlsStatus>) -> PprlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PprlsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            PprlsStatus::Panic
        }
    }
}

fn check<T>(r: pprls::Result<T>) -> Result<T, PprlsStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn null(name: &str) -> PprlsStatus {
    set_error(&format!("{name} is null"));
    PprlsStatus::NullPointer
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], PprlsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, PprlsStatus> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), PprlsStatus> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn points(coords: *const f64, n: usize, dim: usize) -> Result<PointCloud, PprlsStatus> {
    let total = n.checked_mul(dim).ok_or_else(|| {
        set_error("n * dim overflows");
        PprlsStatus::InvalidArgument
    })?;
    let data = slice(coords, total, "coords")?;
    check(PointCloud::new(dim, data.to_vec()))
}

/// Message of the last failed call on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pprls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds the r-neighborhood graph of `n` points of dimension `dim` stored row-major in `coords`.
///
/// # Safety
/// `coords` must point to `n * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pprls_graph_from_points(
    coords: *const f64,
    n: usize,
    dim: usize,
    radius: f64,
    out: *mut *mut PprlsGraph,
) -> PprlsStatus {
    guard(|| {
        let pts = points(coords, n, dim)?;
        let g = check(build_graph(&pts, radius))?;
        write_out(out, Box::into_raw(Box::new(PprlsGraph(g))), "out")
    })
}

/// Builds a graph on `n` vertices from `m` undirected edges stored as pairs in `edges`.
///
/// # Safety
/// `edges` must point to `2 * m` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pprls_graph_from_edges(
    n: usize,
    edges: *const usize,
    m: usize,
    out: *mut *mut PprlsGraph,
) -> PprlsStatus {
    guard(|| {
        let flat = slice(edges, m.checked_mul(2).ok_or(PprlsStatus::InvalidArgument)?, "edges")?;
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let g = check(NeighborhoodGraph::from_edges(n, 0.0, &pairs))?;
        write_out(out, Box::into_raw(Box::new(PprlsGraph(g))), "out")
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `g` must come from a `pprls_graph_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pprls_graph_free(g: *mut PprlsGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn pprls_graph_num_vertices(g: *const PprlsGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.n())
}

/// Number of undirected edges, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn pprls_graph_num_edges(g: *const PprlsGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_edges())
}

/// Writes the degrees of all vertices into `buf`, which must hold `len >= n` entries.
///
/// # Safety
/// `g` must be a live graph handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn pprls_graph_degrees(g: *const PprlsGraph, buf: *mut usize, len: usize) -> PprlsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        if len < g.n() {
            set_error("buffer too small");
            return Err(PprlsStatus::BufferTooSmall);
        }
        if g.n() > 0 && buf.is_null() {
            return Err(null("buf"));
        }
        for u in 0..g.n() {
            buf.add(u).write(g.degree(u));
        }
        Ok(())
    })
}

/// Smallest radius for which the points form a connected graph.
///
/// # Safety
/// `coords` must point to `n * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pprls_smallest_connecting_radius(coords: *const f64, n: usize, dim: usize, out: *mut f64) -> PprlsStatus {
    guard(|| {
        let pts = points(coords, n, dim)?;
        let r = check(smallest_connecting_radius(&pts))?;
        write_out(out, r, "out")
    })
}

/// Normalized cut of the vertex set listed in `members`.
///
/// # Safety
/// `g` must be a live graph handle, `members` must hold `k` values, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pprls_normalized_cut(g: *const PprlsGraph, members: *const usize, k: usize, out: *mut f64) -> PprlsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let s = check(VertexSet::new(g.n(), slice(members, k, "members")?.iter().copied()))?;
        write_out(out, normalized_cut(g, &s), "out")
    })
}

/// Exact PPR vector of seed `v`.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pprls_ppr_exact(g: *const PprlsGraph, v: usize, alpha: f64, tol: f64, out: *mut *mut PprlsPpr) -> PprlsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let p = check(ppr_exact(g, v, alpha, tol))?;
        write_out(out, Box::into_raw(Box::new(PprlsPpr(p))), "out")
    })
}

/// ε-approximate PPR vector of seed `v` by the push procedure.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pprls_ppr_push(g: *const PprlsGraph, v: usize, alpha: f64, epsilon: f64, out: *mut *mut PprlsPpr) -> PprlsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let p = check(appr_push(g, v, alpha, epsilon))?;
        write_out(out, Box::into_raw(Box::new(PprlsPpr(p))), "out")
    })
}

/// Length of a PPR vector, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live PPR handle.
#[no_mangle]
pub unsafe extern "C" fn pprls_ppr_len(p: *const PprlsPpr) -> usize {
    p.as_ref().map_or(0, |p| p.0.values.len())
}

/// Copies the PPR values into `buf`, which must hold at least `pprls_ppr_len` entries.
///
/// # Safety
/// `p` must be a live PPR handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn pprls_ppr_values(p: *const PprlsPpr, buf: *mut f64, len: usize) -> PprlsStatus {
    guard(|| {
        let vals = &handle(p, "ppr")?.0.values;
        if len < vals.len() {
            set_error("buffer too small");
            return Err(PprlsStatus::BufferTooSmall);
        }
        if !vals.is_empty() && buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(vals.as_ptr(), buf, vals.len());
        Ok(())
    })
}

/// Releases a PPR vector. Null is ignored.
///
/// # Safety
/// `p` must come from a `pprls_ppr_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pprls_ppr_free(p: *mut PprlsPpr) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Exact PPR from seed `v` followed by the normalized sweep over (lower, upper).
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pprls_cluster(
    g: *const PprlsGraph,
    v: usize,
    alpha: f64,
    lower: f64,
    upper: f64,
    out: *mut *mut PprlsCluster,
) -> PprlsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let c = check(ppr_cluster(g, v, &ClusterOptions::normalized(alpha, (lower, upper))))?;
        write_out(out, Box::into_raw(Box::new(PprlsCluster(c))), "out")
    })
}

/// Number of members of a cluster, or 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live cluster handle.
#[no_mangle]
pub unsafe extern "C" fn pprls_cluster_size(c: *const PprlsCluster) -> usize {
    c.as_ref().map_or(0, |c| c.0.members.len())
}

/// Normalized cut of a cluster, or NaN for a null handle.
///
/// # Safety
/// `c` must be null or a live cluster handle.
#[no_mangle]
pub unsafe extern "C" fn pprls_cluster_phi(c: *const PprlsCluster) -> f64 {
    c.as_ref().map_or(f64::NAN, |c| c.0.phi)
}

/// Copies the sorted member list into `buf`, which must hold at least `pprls_cluster_size` entries.
///
/// # Safety
/// `c` must be a live cluster handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn pprls_cluster_members(c: *const PprlsCluster, buf: *mut usize, len: usize) -> PprlsStatus {
    guard(|| {
        let m = handle(c, "cluster")?.0.members.as_slice();
        if len < m.len() {
            set_error("buffer too small");
            return Err(PprlsStatus::BufferTooSmall);
        }
        if !m.is_empty() && buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(m.as_ptr(), buf, m.len());
        Ok(())
    })
}

/// Releases a cluster. Null is ignored.
///
/// # Safety
/// `c` must come from [`pprls_cluster`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pprls_cluster_free(c: *mut PprlsCluster) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Uniform mixing time. `mixed` is set to false when the walk has not mixed by `t_max`.
///
/// # Safety
/// `g` must be a live graph handle; `tau` and `mixed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pprls_mixing_time(g: *const PprlsGraph, t_max: u64, tau: *mut u64, mixed: *mut bool) -> PprlsStatus {
    guard(|| {
        let g = &handle(g, "graph")?.0;
        let rep = check(mixing_time_inf(g, t_max))?;
        write_out(tau, rep.tau_inf.unwrap_or(t_max), "tau")?;
        write_out(mixed, rep.tau_inf.is_some(), "mixed")
    })
}

/// Volume of the cap of height `h` of a `d`-ball of radius `r`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pprls_spherical_cap_volume(r: f64, h: f64, d: usize, out: *mut f64) -> PprlsStatus {
    guard(|| {
        let v = check(spherical_cap_volume(r, h, d))?;
        write_out(out, v, "out")
    })
}
