//! C ABI for the coverage simulator.
//!
//! Every fallible function returns a [`WsnStatus`]; results are written
//! through out-pointers. A simulation lives behind the opaque
//! [`WsnSimulation`] handle, created with [`wsn_simulation_new`] and released
//! with [`wsn_simulation_free`]. The message of the most recent failure on
//! the calling thread is available from [`wsn_last_error_message`].
//!
//! The header `include/wsn_coverage.h` is regenerated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wsn_coverage::geometry::{self, Point2D};
use wsn_coverage::metrics;
use wsn_coverage::network::{generate_deployment_with, BatteryRange, NodeState};
use wsn_coverage::optics::{optics_order, OpticsParams};
use wsn_coverage::protocol::{self, AcceptanceWeights, ProtocolConfig, Simulation};
use wsn_coverage::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CoLocated = 3,
    AllNodesDead = 4,
    UnknownNode = 5,
    BufferTooSmall = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsnNodeState {
    Active = 0,
    Sleeping = 1,
    Idle = 2,
    Dead = 3,
}

impl From<NodeState> for WsnNodeState {
    fn from(s: NodeState) -> Self {
        match s {
            NodeState::Active => WsnNodeState::Active,
            NodeState::Sleeping => WsnNodeState::Sleeping,
            NodeState::Idle => WsnNodeState::Idle,
            NodeState::Dead => WsnNodeState::Dead,
        }
    }
}

/// Parameters of a simulation. Fill with [`wsn_sim_config_default`] and
/// adjust; `eps_prime <= 0` selects `eps / 2`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WsnSimConfig {
    pub count: usize,
    pub width: f64,
    pub height: f64,
    pub radius: f64,
    pub seed: u64,
    pub battery_low: f64,
    pub battery_high: f64,
    pub eps: f64,
    pub min_pts: usize,
    pub eps_prime: f64,
    pub theta: f64,
    pub battery_drain: f64,
    pub sleep_rounds: usize,
    pub grid_resolution: usize,
    pub weight_battery: f64,
    pub weight_neighbors: f64,
    pub weight_distance: f64,
}

impl Default for WsnSimConfig {
    fn default() -> Self {
        let run = wsn_coverage::config::RunConfig::default();
        let d = &run.deployment;
        let p = &run.protocol;
        Self {
            count: d.count,
            width: d.width,
            height: d.height,
            radius: d.radius,
            seed: d.seed,
            battery_low: d.battery_low,
            battery_high: d.battery_high,
            eps: run.optics.eps,
            min_pts: run.optics.min_pts,
            eps_prime: 0.0,
            theta: p.theta,
            battery_drain: p.battery_drain,
            sleep_rounds: p.sleep_rounds,
            grid_resolution: p.grid_resolution,
            weight_battery: p.weight_battery,
            weight_neighbors: p.weight_neighbors,
            weight_distance: p.weight_distance,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WsnRoundReport {
    pub round: usize,
    pub deployed_count: usize,
    pub active_count: usize,
    pub cluster_count: usize,
    pub outlier_count: usize,
    pub ratio_r: f64,
    pub analytic_cr: f64,
    pub grid_cr: f64,
}

impl From<metrics::RoundReport> for WsnRoundReport {
    fn from(r: metrics::RoundReport) -> Self {
        Self {
            round: r.round,
            deployed_count: r.deployed_count,
            active_count: r.active_count,
            cluster_count: r.cluster_count,
            outlier_count: r.outlier_count,
            ratio_r: r.ratio_r,
            analytic_cr: r.analytic_cr,
            grid_cr: r.grid_cr,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WsnNodeInfo {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub battery: f64,
    pub state: WsnNodeState,
}

/// One OPTICS output entry; undefined distances are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WsnOrderedPoint {
    pub point_id: usize,
    pub order_index: usize,
    pub reachability: f64,
    pub core_distance: f64,
}

/// Opaque simulation handle.
pub struct WsnSimulation {
    inner: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: WsnStatus, msg: impl Into<String>) -> WsnStatus {
    set_last_error(msg);
    status
}

fn status_of(err: &Error) -> WsnStatus {
    let status = match err {
        Error::CoLocated => WsnStatus::CoLocated,
        Error::AllNodesDead { .. } => WsnStatus::AllNodesDead,
        Error::UnknownNode(_) => WsnStatus::UnknownNode,
        Error::EmptyCluster | Error::InvalidConfig(_) | Error::InvalidInput(_) => WsnStatus::InvalidArgument,
        _ => WsnStatus::Internal,
    };
    fail(status, err.to_string())
}

/// Runs `f`, mapping errors and panics to a status.
fn guard(f: impl FnOnce() -> Result<(), WsnStatus>) -> WsnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WsnStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(WsnStatus::Internal, "panic inside wsn-coverage"),
    }
}

fn null(what: &str) -> WsnStatus {
    fail(WsnStatus::NullPointer, format!("{what} is NULL"))
}

/// Message for the last failure on this thread, or NULL if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wsn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn wsn_status_name(status: WsnStatus) -> *const c_char {
    let name: &'static CStr = match status {
        WsnStatus::Ok => c"ok",
        WsnStatus::NullPointer => c"null pointer",
        WsnStatus::InvalidArgument => c"invalid argument",
        WsnStatus::CoLocated => c"co-located sensors",
        WsnStatus::AllNodesDead => c"all nodes dead",
        WsnStatus::UnknownNode => c"unknown node",
        WsnStatus::BufferTooSmall => c"buffer too small",
        WsnStatus::Internal => c"internal error",
    };
    name.as_ptr()
}

/// # Safety
/// `out` must be NULL or point to writable memory for one `WsnSimConfig`.
#[no_mangle]
pub unsafe extern "C" fn wsn_sim_config_default(out: *mut WsnSimConfig) -> WsnStatus {
    if out.is_null() {
        return null("out");
    }
    out.write(WsnSimConfig::default());
    WsnStatus::Ok
}

fn build_simulation(cfg: &WsnSimConfig) -> Result<Simulation, Error> {
    let deployment = generate_deployment_with(
        cfg.count,
        cfg.width,
        cfg.height,
        cfg.radius,
        cfg.seed,
        BatteryRange {
            low: cfg.battery_low,
            high: cfg.battery_high,
        },
    )?;
    if cfg.eps < cfg.radius {
        return Err(Error::InvalidConfig(format!(
            "eps ({}) must be at least the radius ({}) so that 2r <= 2*eps",
            cfg.eps, cfg.radius
        )));
    }
    let params = OpticsParams::new(cfg.eps, cfg.min_pts)?;
    let config = ProtocolConfig {
        weights: AcceptanceWeights {
            battery: cfg.weight_battery,
            neighbors: cfg.weight_neighbors,
            distance: cfg.weight_distance,
        },
        theta: cfg.theta,
        battery_drain: cfg.battery_drain,
        sleep_rounds: cfg.sleep_rounds,
        eps_prime: (cfg.eps_prime > 0.0).then_some(cfg.eps_prime),
        grid_resolution: cfg.grid_resolution,
    };
    Simulation::new(deployment, params, config)
}

/// Generates a deployment and wraps it in a new simulation handle.
///
/// # Safety
/// `config` must point to a valid `WsnSimConfig`; `out` must be writable.
/// The handle written to `out` must be released with `wsn_simulation_free`.
#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_new(config: *const WsnSimConfig, out: *mut *mut WsnSimulation) -> WsnStatus {
    if config.is_null() {
        return null("config");
    }
    if out.is_null() {
        return null("out");
    }
    let cfg = *config;
    guard(|| {
        let inner = build_simulation(&cfg).map_err(|e| status_of(&e))?;
        out.write(Box::into_raw(Box::new(WsnSimulation { inner })));
        Ok(())
    })
}

/// # Safety
/// `sim` must be NULL or a handle from `wsn_simulation_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_free(sim: *mut WsnSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs one round and writes its report.
///
/// # Safety
/// `sim` must be a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_step(sim: *mut WsnSimulation, out: *mut WsnRoundReport) -> WsnStatus {
    let Some(sim) = sim.as_mut() else { return null("sim") };
    guard(|| {
        let output = sim.inner.step().map_err(|e| status_of(&e))?;
        if !out.is_null() {
            out.write(output.report.into());
        }
        Ok(())
    })
}

/// Number of deployed nodes, 0 for a NULL handle.
///
/// # Safety
/// `sim` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_node_count(sim: *const WsnSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.inner.deployment().len())
}

/// Number of completed rounds, 0 for a NULL handle.
///
/// # Safety
/// `sim` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_round(sim: *const WsnSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.inner.state().round)
}

/// Copies the ids active in the last round into `buf`. `out_len` always
/// receives the number of active nodes; if `cap` is smaller nothing is
/// copied and `BufferTooSmall` is returned.
///
/// # Safety
/// `sim` must be a live handle, `buf` must have room for `cap` elements
/// (it may be NULL when `cap` is 0) and `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_active_ids(
    sim: *const WsnSimulation,
    buf: *mut usize,
    cap: usize,
    out_len: *mut usize,
) -> WsnStatus {
    let Some(sim) = sim.as_ref() else { return null("sim") };
    if out_len.is_null() {
        return null("out_len");
    }
    let active = &sim.inner.state().active;
    out_len.write(active.len());
    if active.len() > cap {
        return fail(
            WsnStatus::BufferTooSmall,
            format!("{} active ids do not fit in {cap}", active.len()),
        );
    }
    if active.is_empty() {
        return WsnStatus::Ok;
    }
    if buf.is_null() {
        return null("buf");
    }
    for (i, &id) in active.iter().enumerate() {
        buf.add(i).write(id);
    }
    WsnStatus::Ok
}

/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wsn_simulation_node(sim: *const WsnSimulation, id: usize, out: *mut WsnNodeInfo) -> WsnStatus {
    let Some(sim) = sim.as_ref() else { return null("sim") };
    if out.is_null() {
        return null("out");
    }
    match sim.inner.deployment().node(id) {
        Ok(n) => {
            out.write(WsnNodeInfo {
                id: n.id,
                x: n.position.x,
                y: n.position.y,
                battery: n.battery,
                state: n.state.into(),
            });
            WsnStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// OPTICS ordering of `n` points given as coordinate arrays. `out` must
/// have room for `n` entries, written in cluster order.
///
/// # Safety
/// `xs` and `ys` must each point to `n` readable doubles, `out` to `n`
/// writable `WsnOrderedPoint`s.
#[no_mangle]
pub unsafe extern "C" fn wsn_optics_order(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    eps: f64,
    min_pts: usize,
    out: *mut WsnOrderedPoint,
) -> WsnStatus {
    if xs.is_null() || ys.is_null() || out.is_null() {
        return null("xs, ys or out");
    }
    if n == 0 {
        return fail(WsnStatus::InvalidArgument, "OPTICS needs at least one point");
    }
    let xs = std::slice::from_raw_parts(xs, n);
    let ys = std::slice::from_raw_parts(ys, n);
    guard(|| {
        let points: Vec<Point2D> = xs.iter().zip(ys).map(|(&x, &y)| Point2D::new(x, y)).collect();
        let params = OpticsParams::new(eps, min_pts).map_err(|e| status_of(&e))?;
        let ordering = optics_order(&points, &params).map_err(|e| status_of(&e))?;
        for (i, p) in ordering.iter().enumerate() {
            out.add(i).write(WsnOrderedPoint {
                point_id: p.point_id,
                order_index: p.order_index,
                reachability: p.reachability.unwrap_or(f64::NAN),
                core_distance: p.core_distance.unwrap_or(f64::NAN),
            });
        }
        Ok(())
    })
}

unsafe fn write_f64(out: *mut f64, value: Result<f64, Error>) -> WsnStatus {
    if out.is_null() {
        return null("out");
    }
    match value {
        Ok(v) => {
            out.write(v);
            WsnStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Acceptance level with the default weights.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wsn_acceptance_level(battery: f64, neighbors: usize, distance: f64, out: *mut f64) -> WsnStatus {
    write_f64(out, protocol::acceptance_level(battery, neighbors, distance))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wsn_overlap_angle(d: f64, r: f64, out: *mut f64) -> WsnStatus {
    write_f64(out, geometry::overlap_angle(d, r))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wsn_non_overlapped_perimeter(d: f64, r: f64, out: *mut f64) -> WsnStatus {
    write_f64(out, geometry::non_overlapped_perimeter(d, r))
}

#[no_mangle]
pub extern "C" fn wsn_analytic_cr(active: usize, r: f64, area: f64) -> f64 {
    metrics::analytic_cr(active, r, area)
}

/// Active percentage; NaN when `deployed` is 0.
#[no_mangle]
pub extern "C" fn wsn_active_ratio(active: usize, deployed: usize) -> f64 {
    if deployed == 0 {
        return f64::NAN;
    }
    metrics::active_ratio(active, deployed)
}
