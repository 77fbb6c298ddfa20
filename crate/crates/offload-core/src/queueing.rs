//! Server-side queue dynamics and the drift bookkeeping that certifies them.
//!
//! Each server keeps two task queues in bits — an edge computing queue
//! drained at `f_m * delta / rho` bits per slot and a cloud offloading queue
//! drained at `r_c * delta` bits per slot — plus two virtual queues in slots
//! that accumulate excess of the realized Little's-law delay ratio `Q / A~`
//! over the delay bound. `A~` is the running average arrival rate including
//! the current slot, with `0/0 := 0` (the queue is empty whenever nothing has
//! ever arrived, so the ratio is vacuously zero).
//!
//! `lyapunov_accounting` checks, per slot, the realized form of the
//! drift bound that justifies the per-slot surrogate objective:
//!
//! ```text
//! L' - L <= B + sum_m [ Qe (Ae - se) + Qc (Ac - sc) + Ze (de - De) + Zc (dc - Dc) ]
//! B = 1/2 sum_m [ Ae^2 + se^2 + Ac^2 + sc^2 + de^2 + De^2 + dc^2 + Dc^2 ]
//! ```
//!
//! with `L = 1/2 sum (Qe^2 + Qc^2 + Ze^2 + Zc^2)`, services `se, sc`, delay
//! ratios `de, dc` and bounds `De, Dc`. The inequality is pure algebra over
//! the max-plus updates, so a violation means corrupted state.

use alloc::vec::Vec;

use crate::error::ContractError;

/// Full queue state of one MEC server plus its static service parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerState {
    /// Edge computing queue (bits).
    pub q_edge: f64,
    /// Cloud offloading queue (bits).
    pub q_cloud: f64,
    /// Virtual queue tracking the edge delay constraint (slots).
    pub z_edge: f64,
    /// Virtual queue tracking the cloud delay constraint (slots).
    pub z_cloud: f64,
    /// Cumulative edge arrivals over all elapsed slots (bits).
    pub hist_edge: f64,
    /// Cumulative cloud arrivals over all elapsed slots (bits).
    pub hist_cloud: f64,
    /// Number of completed slot updates.
    pub slots_elapsed: u32,
    /// Server CPU speed (cycles/s).
    pub cpu: f64,
    /// Server-to-cloud rate (bits/s).
    pub cloud_rate: f64,
    /// Uplink bandwidth shared by this server's offloaders (Hz).
    pub bandwidth: f64,
    /// Connection capacity: max simultaneous offloaders.
    pub capacity: u32,
    /// Delay bound for the edge queue (slots).
    pub delay_bound_edge: f64,
    /// Delay bound for the cloud queue (slots).
    pub delay_bound_cloud: f64,
    /// Realized per-slot delay ratios, one entry per elapsed slot.
    pub delay_samples_edge: Vec<f64>,
    pub delay_samples_cloud: Vec<f64>,
}

impl ServerState {
    pub fn new(
        cpu: f64,
        cloud_rate: f64,
        bandwidth: f64,
        capacity: u32,
        delay_bound_edge: f64,
        delay_bound_cloud: f64,
    ) -> Self {
        Self {
            q_edge: 0.0,
            q_cloud: 0.0,
            z_edge: 0.0,
            z_cloud: 0.0,
            hist_edge: 0.0,
            hist_cloud: 0.0,
            slots_elapsed: 0,
            cpu,
            cloud_rate,
            bandwidth,
            capacity,
            delay_bound_edge,
            delay_bound_cloud,
            delay_samples_edge: Vec::new(),
            delay_samples_cloud: Vec::new(),
        }
    }

    /// Bits the edge queue can serve in one slot.
    pub fn edge_service(&self, delta: f64, rho: f64) -> f64 {
        self.cpu * delta / rho
    }

    /// Bits the cloud queue can push in one slot.
    pub fn cloud_service(&self, delta: f64) -> f64 {
        self.cloud_rate * delta
    }
}

/// Little's-law delay ratio `q / (hist / t)` with the `0/0 := 0` convention.
/// `hist` must already include the current slot's arrivals.
pub fn delay_ratio(queue: f64, hist_including_current: f64, slots: u32) -> f64 {
    if hist_including_current <= 0.0 {
        0.0
    } else {
        queue * slots as f64 / hist_including_current
    }
}

/// Splits a decision into edge and cloud arrivals `(A_E, A_C)` in bits.
///
/// `A_C` collects devices forwarded to the cloud; `A_E` collects the rest of
/// the offloaders. Errors if some device is marked cloud-bound but not
/// offloading.
pub fn split_arrivals(
    offload: &[bool],
    to_cloud: &[bool],
    sizes: &[f64],
) -> Result<(f64, f64), ContractError> {
    debug_assert_eq!(offload.len(), to_cloud.len());
    debug_assert_eq!(offload.len(), sizes.len());
    let mut a_edge = 0.0;
    let mut a_cloud = 0.0;
    for i in 0..offload.len() {
        if to_cloud[i] && !offload[i] {
            return Err(ContractError::CloudWithoutOffload);
        }
        if to_cloud[i] {
            a_cloud += sizes[i];
        } else if offload[i] {
            a_edge += sizes[i];
        }
    }
    Ok((a_edge, a_cloud))
}

/// Applies one slot of queue dynamics and returns the successor state.
pub fn advance_queues(
    state: &ServerState,
    a_edge: f64,
    a_cloud: f64,
    delta: f64,
    rho: f64,
) -> ServerState {
    debug_assert!(a_edge >= 0.0 && a_cloud >= 0.0);
    let svc_edge = state.edge_service(delta, rho);
    let svc_cloud = state.cloud_service(delta);
    let slots = state.slots_elapsed + 1;
    let hist_edge = state.hist_edge + a_edge;
    let hist_cloud = state.hist_cloud + a_cloud;
    let ratio_edge = delay_ratio(state.q_edge, hist_edge, slots);
    let ratio_cloud = delay_ratio(state.q_cloud, hist_cloud, slots);

    let mut next = state.clone();
    next.q_edge = (state.q_edge - svc_edge).max(0.0) + a_edge;
    next.q_cloud = (state.q_cloud - svc_cloud).max(0.0) + a_cloud;
    next.z_edge = (state.z_edge + ratio_edge - state.delay_bound_edge).max(0.0);
    next.z_cloud = (state.z_cloud + ratio_cloud - state.delay_bound_cloud).max(0.0);
    next.hist_edge = hist_edge;
    next.hist_cloud = hist_cloud;
    next.slots_elapsed = slots;
    next.delay_samples_edge.push(ratio_edge);
    next.delay_samples_cloud.push(ratio_cloud);
    next
}

/// Time-averaged realized queuing delays `(edge, cloud)` in slots.
pub fn delay_metrics(state: &ServerState) -> (f64, f64) {
    (mean(&state.delay_samples_edge), mean(&state.delay_samples_cloud))
}

fn mean(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        0.0
    } else {
        samples.iter().sum::<f64>() / samples.len() as f64
    }
}

/// One slot of drift bookkeeping across all servers.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovSnapshot {
    /// Lyapunov function before the update.
    pub lyapunov_before: f64,
    /// Lyapunov function after the update.
    pub lyapunov_after: f64,
    /// Realized drift `L' - L`.
    pub drift: f64,
    /// Penalty term `V * slot_energy`.
    pub penalty: f64,
    /// Realized constant `B` of the drift bound.
    pub bound_b: f64,
    /// Realized queue-weighted cross term of the bound.
    pub cross_term: f64,
    /// Whether the per-slot inequality held (it must).
    pub holds: bool,
}

/// Computes the drift snapshot for a slot transition and checks the realized
/// drift inequality. `before` and `after` must be the same servers in the
/// same order, exactly one `advance_queues(_, _, _, delta, rho)` apart.
pub fn lyapunov_accounting(
    before: &[ServerState],
    after: &[ServerState],
    slot_energy: f64,
    v: f64,
    delta: f64,
    rho: f64,
) -> LyapunovSnapshot {
    debug_assert_eq!(before.len(), after.len());
    let mut l_before = 0.0;
    let mut l_after = 0.0;
    let mut bound_b = 0.0;
    let mut cross = 0.0;
    for (s0, s1) in before.iter().zip(after.iter()) {
        debug_assert_eq!(s0.slots_elapsed + 1, s1.slots_elapsed);
        l_before += 0.5
            * (s0.q_edge * s0.q_edge
                + s0.q_cloud * s0.q_cloud
                + s0.z_edge * s0.z_edge
                + s0.z_cloud * s0.z_cloud);
        l_after += 0.5
            * (s1.q_edge * s1.q_edge
                + s1.q_cloud * s1.q_cloud
                + s1.z_edge * s1.z_edge
                + s1.z_cloud * s1.z_cloud);
        let a_edge = s1.hist_edge - s0.hist_edge;
        let a_cloud = s1.hist_cloud - s0.hist_cloud;
        let svc_e = s0.edge_service(delta, rho);
        let svc_c = s0.cloud_service(delta);
        let ratio_edge = delay_ratio(s0.q_edge, s1.hist_edge, s1.slots_elapsed);
        let ratio_cloud = delay_ratio(s0.q_cloud, s1.hist_cloud, s1.slots_elapsed);
        bound_b += 0.5
            * (a_edge * a_edge
                + svc_e * svc_e
                + a_cloud * a_cloud
                + svc_c * svc_c
                + ratio_edge * ratio_edge
                + s0.delay_bound_edge * s0.delay_bound_edge
                + ratio_cloud * ratio_cloud
                + s0.delay_bound_cloud * s0.delay_bound_cloud);
        cross += s0.q_edge * (a_edge - svc_e)
            + s0.q_cloud * (a_cloud - svc_c)
            + s0.z_edge * (ratio_edge - s0.delay_bound_edge)
            + s0.z_cloud * (ratio_cloud - s0.delay_bound_cloud);
    }
    let drift = l_after - l_before;
    let rhs = bound_b + cross;
    let slack = 1e-9 * (1.0 + drift.abs() + rhs.abs() + l_before + l_after);
    LyapunovSnapshot {
        lyapunov_before: l_before,
        lyapunov_after: l_after,
        drift,
        penalty: v * slot_energy,
        bound_b,
        cross_term: cross,
        holds: drift <= rhs + slack,
    }
}
