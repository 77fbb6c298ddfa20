//! Per-slot decision composition and the online control loop.
//!
//! For one server and slot, the surrogate objective over the decision bits
//! `x` (offload) and `xc <= x` (forward to cloud) is
//!
//! ```text
//! J(x, xc) = V * E(x) + Q(x, xc)
//! E(x)     = sum_local zeta f^2 s rho + (sum_off sqrt(beta))^2 / B
//! Q(x, xc) = Qe (Ae - se) + Qc (Ac - sc)
//!          + Ze Qe t / (He + Ae + eps) + Zc Qc t / (Hc + Ac + eps)
//! ```
//!
//! with `Ae, Ac` the bits admitted to the edge and cloud queues. The
//! two-stage solver sweeps the admissible offloader count `n` from the
//! connection capacity down to zero: for each `n` the matching stage picks
//! the energy-minimizing offloading set, the relaxation-plus-rounding stage
//! picks the cloud split, and the best `J` over the sweep wins. Baseline
//! policies (`baselines`) and the genetic searcher (`genetic`) plug into the
//! same objective and the same queue updates.

pub mod baselines;
pub mod genetic;

use alloc::vec;
use alloc::vec::Vec;

use crate::allocation::{offload_energy_total, optimal_allocation, AllocationInstance};
use crate::channel::beta_coefficient;
use crate::cloud_round::{
    dependent_round_mode, solve_relaxation, RoundingMode, StabilityContext, DENOMINATOR_FLOOR,
};
use crate::energy::{local_energy, Task};
use crate::matching::{stable_match, MatchInit, MatchingInstance};
use crate::mobility::step_mobility;
use crate::queueing::{
    advance_queues, lyapunov_accounting, split_arrivals, LyapunovSnapshot, ServerState,
};
use crate::rng::{Purpose, Stream};
use crate::scenario::{Policy, World};

/// Relaxation tolerance for the cloud-split search, relative to the total
/// offloaded bits.
pub const RELAXATION_TOL: f64 = 1e-9;

/// Environment draws for one device in one slot.
#[derive(Debug, Clone)]
pub struct UdSlotInput {
    pub task: Task,
    /// Device CPU speed (cycles/s), for deadline accounting.
    pub cpu: f64,
    /// Energy of running the task locally.
    pub e_loc: f64,
    /// Allocation coefficient; infinite when the link is unusable.
    pub beta: f64,
    /// `sqrt(beta)`, cached for the matching stage.
    pub sigma: f64,
    /// Spectral efficiency `log2(1 + snr)`, for deadline accounting.
    pub rate_factor: f64,
}

impl UdSlotInput {
    pub fn offload_eligible(&self) -> bool {
        self.sigma.is_finite() && self.sigma > 0.0
    }
}

/// All environment draws for one slot, indexed by server.
#[derive(Debug, Clone)]
pub struct SlotInputs {
    pub per_server: Vec<Vec<UdSlotInput>>,
    pub clamp_events: u64,
}

/// Everything a per-server policy needs to decide one slot.
#[derive(Debug, Clone, Copy)]
pub struct ServerContext<'a> {
    pub inputs: &'a [UdSlotInput],
    pub state: &'a ServerState,
    pub v: f64,
    pub delta: f64,
    pub rho: f64,
    /// Current slot, 1-based.
    pub slot: u32,
    /// Connection capacity of this server.
    pub capacity: u32,
    /// Whether cloud forwarding exists (cleared for the no-collaboration
    /// policy, which also drops the cloud terms from `Q`).
    pub cloud_enabled: bool,
    pub match_init: MatchInit,
    pub rounding_mode: RoundingMode,
}

/// One server's decision for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub offload: Vec<bool>,
    pub to_cloud: Vec<bool>,
    /// Bandwidth fractions; positive exactly on offloaders.
    pub alloc: Vec<f64>,
}

impl Decision {
    pub fn all_local(n: usize) -> Self {
        Decision {
            offload: vec![false; n],
            to_cloud: vec![false; n],
            alloc: vec![0.0; n],
        }
    }

    pub fn offloader_count(&self) -> usize {
        self.offload.iter().filter(|&&b| b).count()
    }

    /// Checks the structural invariants against a capacity.
    pub fn invariants_ok(&self, capacity: u32) -> bool {
        let n = self.offload.len();
        if self.to_cloud.len() != n || self.alloc.len() != n {
            return false;
        }
        let mut total = 0.0;
        for u in 0..n {
            if self.to_cloud[u] && !self.offload[u] {
                return false;
            }
            if self.offload[u] != (self.alloc[u] > 0.0) {
                return false;
            }
            total += self.alloc[u];
        }
        self.offloader_count() <= capacity as usize && total <= 1.0 + 1e-9
    }
}

/// Decision plus its objective decomposition.
#[derive(Debug, Clone)]
pub struct ServerDecision {
    pub decision: Decision,
    /// Device energy `E(x)` under the derived allocation (J).
    pub energy: f64,
    /// Queue pressure `Q(x, xc)`.
    pub queue_term: f64,
    /// `V * energy + queue_term`.
    pub objective: f64,
    /// Capacity value the sweep settled on (meaningful for swept policies).
    pub chosen_capacity: u32,
    /// The recorded `(n, J_n)` sweep, empty for non-swept policies.
    pub sweep: Vec<(u32, f64)>,
}

/// Device energy of an offloading set under the optimal allocation.
pub fn energy_objective(ctx: &ServerContext<'_>, offload: &[bool]) -> f64 {
    debug_assert_eq!(offload.len(), ctx.inputs.len());
    let mut local = 0.0;
    let mut sigma_sum = 0.0;
    for (input, &on) in ctx.inputs.iter().zip(offload.iter()) {
        if on {
            debug_assert!(input.offload_eligible());
            sigma_sum += input.sigma;
        } else {
            local += input.e_loc;
        }
    }
    local + offload_energy_total(sigma_sum, ctx.state.bandwidth)
}

/// Queue-pressure term of the objective for a full decision.
pub fn queue_objective(ctx: &ServerContext<'_>, offload: &[bool], to_cloud: &[bool]) -> f64 {
    let sizes: Vec<f64> = ctx.inputs.iter().map(|i| i.task.size).collect();
    let (a_edge, a_cloud) = split_arrivals(offload, to_cloud, &sizes)
        .expect("decision invariant: to_cloud <= offload");
    queue_objective_from_arrivals(ctx, a_edge, a_cloud)
}

/// Queue-pressure term from aggregated arrivals.
pub fn queue_objective_from_arrivals(ctx: &ServerContext<'_>, a_edge: f64, a_cloud: f64) -> f64 {
    let s = ctx.state;
    let t = ctx.slot as f64;
    let mut value = s.q_edge * (a_edge - s.edge_service(ctx.delta, ctx.rho));
    value += s.z_edge * s.q_edge * t / (s.hist_edge + a_edge + DENOMINATOR_FLOOR);
    if ctx.cloud_enabled {
        value += s.q_cloud * (a_cloud - s.cloud_service(ctx.delta));
        value += s.z_cloud * s.q_cloud * t / (s.hist_cloud + a_cloud + DENOMINATOR_FLOOR);
    } else {
        debug_assert_eq!(a_cloud, 0.0);
    }
    value
}

/// Bandwidth fractions for an offloading set via the closed form, mapped
/// back onto device indices.
pub fn derive_allocation(ctx: &ServerContext<'_>, offload: &[bool]) -> Vec<f64> {
    let ids: Vec<usize> = (0..ctx.inputs.len()).filter(|&u| offload[u]).collect();
    let inst = AllocationInstance {
        betas: ids.iter().map(|&u| ctx.inputs[u].beta).collect(),
        bandwidth: ctx.state.bandwidth,
        v: ctx.v,
        phi: 0.0,
    };
    let fractions = optimal_allocation(&inst).expect("offloaders carry finite positive betas");
    let mut alloc = vec![0.0; ctx.inputs.len()];
    for (&u, &a) in ids.iter().zip(fractions.iter()) {
        alloc[u] = a;
    }
    alloc
}

/// Picks the cloud split for a fixed offloading set: 1-D relaxation, then
/// dependent rounding. Returns the cloud bits and the resulting queue term.
pub fn choose_cloud_split(
    ctx: &ServerContext<'_>,
    offload: &[bool],
    rng: Option<&mut Stream>,
) -> (Vec<bool>, f64) {
    let n = ctx.inputs.len();
    if !ctx.cloud_enabled {
        let to_cloud = vec![false; n];
        let q = queue_objective(ctx, offload, &to_cloud);
        return (to_cloud, q);
    }
    let ids: Vec<usize> = (0..n).filter(|&u| offload[u]).collect();
    let stability = StabilityContext {
        sizes: ids.iter().map(|&u| ctx.inputs[u].task.size).collect(),
        q_edge: ctx.state.q_edge,
        q_cloud: ctx.state.q_cloud,
        z_edge: ctx.state.z_edge,
        z_cloud: ctx.state.z_cloud,
        hist_edge: ctx.state.hist_edge,
        hist_cloud: ctx.state.hist_cloud,
        slot: ctx.slot,
    };
    let (_, fractions) = solve_relaxation(&stability, RELAXATION_TOL);
    let bits = dependent_round_mode(&fractions, &stability.sizes, ctx.rounding_mode, rng);
    let mut to_cloud = vec![false; n];
    for (&u, &bit) in ids.iter().zip(bits.iter()) {
        to_cloud[u] = bit;
    }
    let q = queue_objective(ctx, offload, &to_cloud);
    (to_cloud, q)
}

/// Wraps explicit decision bits into a `ServerDecision` with the derived
/// allocation and objective parts.
pub fn assemble(ctx: &ServerContext<'_>, offload: Vec<bool>, to_cloud: Vec<bool>) -> ServerDecision {
    let energy = energy_objective(ctx, &offload);
    let queue_term = queue_objective(ctx, &offload, &to_cloud);
    let alloc = derive_allocation(ctx, &offload);
    ServerDecision {
        objective: ctx.v * energy + queue_term,
        energy,
        queue_term,
        chosen_capacity: 0,
        sweep: Vec::new(),
        decision: Decision {
            offload,
            to_cloud,
            alloc,
        },
    }
}

/// The capacity-swept two-stage solver.
///
/// For `n = capacity .. 0`: matching at capacity `n` gives the offloading
/// set and its energy `E_n`; relaxation plus rounding gives the cloud split
/// and queue term `Q_n`; the sweep keeps the first strict minimizer of
/// `V E_n + Q_n`. Counts beyond the number of eligible devices cannot bind,
/// so their entries reuse the first unconstrained solution.
pub fn two_stage(ctx: &ServerContext<'_>, mut rng: Option<&mut Stream>) -> ServerDecision {
    let n_uds = ctx.inputs.len();
    let eligible = ctx.inputs.iter().filter(|i| i.offload_eligible()).count() as u32;
    let inst = MatchingInstance {
        local_energy: ctx.inputs.iter().map(|i| i.e_loc).collect(),
        sigma: ctx.inputs.iter().map(|i| i.sigma).collect(),
        bandwidth: ctx.state.bandwidth,
    };

    let mut sweep = Vec::with_capacity(ctx.capacity as usize + 1);
    let mut best: Option<Candidate> = None;
    let mut unconstrained: Option<Candidate> = None;
    for n in (0..=ctx.capacity).rev() {
        let candidate = if n >= eligible {
            match &unconstrained {
                Some(c) => c.clone(),
                None => {
                    let c = solve_for_capacity(ctx, &inst, n, rng.as_deref_mut());
                    unconstrained = Some(c.clone());
                    c
                }
            }
        } else {
            solve_for_capacity(ctx, &inst, n, rng.as_deref_mut())
        };
        sweep.push((n, candidate.objective));
        let better = match &best {
            None => true,
            Some(b) => candidate.objective < b.objective,
        };
        if better {
            best = Some(Candidate {
                capacity: n,
                ..candidate
            });
        }
    }
    let best = best.expect("sweep visits at least n = 0");
    let sweep_min = sweep.iter().map(|&(_, j)| j).fold(f64::INFINITY, f64::min);
    debug_assert_eq!(best.objective, sweep_min, "chosen n must be the sweep argmin");
    let alloc = derive_allocation(ctx, &best.offload);
    let decision = Decision {
        offload: best.offload,
        to_cloud: best.to_cloud,
        alloc,
    };
    debug_assert!(decision.invariants_ok(ctx.capacity));
    debug_assert_eq!(decision.offload.len(), n_uds);
    ServerDecision {
        decision,
        energy: best.energy,
        queue_term: best.queue_term,
        objective: best.objective,
        chosen_capacity: best.capacity,
        sweep,
    }
}

#[derive(Clone)]
struct Candidate {
    objective: f64,
    offload: Vec<bool>,
    to_cloud: Vec<bool>,
    energy: f64,
    queue_term: f64,
    capacity: u32,
}

fn solve_for_capacity(
    ctx: &ServerContext<'_>,
    inst: &MatchingInstance,
    n: u32,
    mut rng: Option<&mut Stream>,
) -> Candidate {
    let matching = stable_match(inst, n as usize, ctx.match_init, rng.as_deref_mut());
    let energy = energy_objective(ctx, &matching.offload);
    let (to_cloud, queue_term) = choose_cloud_split(ctx, &matching.offload, rng);
    Candidate {
        objective: ctx.v * energy + queue_term,
        offload: matching.offload,
        to_cloud,
        energy,
        queue_term,
        capacity: n,
    }
}

/// Builds the per-server decision context for the current slot.
pub fn server_context<'a>(
    world: &'a World,
    inputs: &'a [UdSlotInput],
    server: usize,
    cloud_enabled: bool,
) -> ServerContext<'a> {
    let cfg = &world.config;
    ServerContext {
        inputs,
        state: &world.servers[server],
        v: cfg.lyapunov_v,
        delta: cfg.slot_duration,
        rho: cfg.computation_intensity,
        slot: world.slot,
        capacity: cfg.connection_capacity,
        cloud_enabled,
        match_init: if cfg.random_matching_init {
            MatchInit::Random
        } else {
            MatchInit::AllLocal
        },
        rounding_mode: if cfg.randomized_rounding {
            RoundingMode::Randomized
        } else {
            RoundingMode::Deterministic
        },
    }
}

/// Draws tasks and channels for every device this slot. Pure function of the
/// world state and the addressed streams.
pub fn draw_slot_inputs(world: &World) -> SlotInputs {
    let cfg = &world.config;
    let loss = cfg.loss_params();
    let mut per_server: Vec<Vec<UdSlotInput>> = (0..cfg.num_servers)
        .map(|_| Vec::with_capacity(cfg.uds_per_server as usize))
        .collect();
    let mut clamp_events = 0;
    for ud in &world.uds {
        let slot = world.slot as u64;
        let mut task_rng = Stream::new(cfg.rng_seed, Purpose::TaskSize, ud.id as u64, slot);
        let task = crate::scenario::sample_task(cfg, &mut task_rng);

        let center = world.server_positions[ud.home as usize];
        let distance = libm::hypot(
            ud.mobility.position[0] - center[0],
            ud.mobility.position[1] - center[1],
        );
        if distance < cfg.ref_distance {
            clamp_events += 1;
        }
        let mut shadow_rng = Stream::new(cfg.rng_seed, Purpose::Shadowing, ud.id as u64, slot);
        let mut fading_rng = Stream::new(cfg.rng_seed, Purpose::SmallScale, ud.id as u64, slot);
        let shadow_db = if cfg.shadow_sigma > 0.0 {
            cfg.shadow_sigma * shadow_rng.gaussian()
        } else {
            0.0
        };
        let (large_scale, _) = crate::channel::large_scale_loss(distance, &loss, shadow_db);
        let small_scale = crate::channel::sample_small_scale(cfg.rayleigh_alpha, &mut fading_rng);
        let gain = small_scale * small_scale / large_scale;

        let beta = beta_coefficient(ud.profile.transmit_power, task.size, gain, cfg.noise_power);
        let snr = ud.profile.transmit_power * gain / cfg.noise_power;
        let e_loc = local_energy(&ud.profile, &task, false);
        per_server[ud.home as usize].push(UdSlotInput {
            task,
            cpu: ud.profile.cpu,
            e_loc,
            beta,
            sigma: if beta.is_finite() {
                libm::sqrt(beta)
            } else {
                f64::INFINITY
            },
            rate_factor: libm::log2(1.0 + snr),
        });
    }
    SlotInputs {
        per_server,
        clamp_events,
    }
}

/// Decides one server's slot under a policy. Pure given the world and
/// inputs, so servers can be evaluated concurrently in any order.
pub fn decide_server(
    world: &World,
    inputs: &SlotInputs,
    server: usize,
    policy: Policy,
) -> ServerDecision {
    let cfg = &world.config;
    let mut rng = Stream::for_policy(cfg.rng_seed, policy.tag(), server as u64, world.slot as u64);
    let per_ud = &inputs.per_server[server];
    let decision = match policy {
        Policy::Ojcta => {
            let ctx = server_context(world, per_ud, server, true);
            two_stage(&ctx, Some(&mut rng))
        }
        Policy::Lc => {
            let ctx = server_context(world, per_ud, server, true);
            assemble(&ctx, vec![false; per_ud.len()], vec![false; per_ud.len()])
        }
        Policy::Ro => {
            let ctx = server_context(world, per_ud, server, true);
            baselines::random_offloading(&ctx, &mut rng)
        }
        Policy::Ecf => {
            let ctx = server_context(world, per_ud, server, true);
            baselines::energy_first(&ctx, &mut rng)
        }
        Policy::Ssc => {
            let ctx = server_context(world, per_ud, server, true);
            baselines::single_slot_constrained(&ctx, &mut rng)
        }
        Policy::Ncc => {
            let ctx = server_context(world, per_ud, server, false);
            two_stage(&ctx, Some(&mut rng))
        }
        Policy::Gjtora => {
            let ctx = server_context(world, per_ud, server, true);
            genetic::genetic_offloading(&ctx, &genetic::GaParams::default(), &mut rng)
        }
    };
    debug_assert!(decision.decision.invariants_ok(cfg.connection_capacity));
    decision
}

/// Post-update per-server observations for one slot.
#[derive(Debug, Clone)]
pub struct ServerSlotStats {
    pub arrivals_edge: f64,
    pub arrivals_cloud: f64,
    pub q_edge: f64,
    pub q_cloud: f64,
    pub z_edge: f64,
    pub z_cloud: f64,
    /// Realized delay ratios recorded this slot.
    pub delay_edge: f64,
    pub delay_cloud: f64,
    /// Devices whose execution or upload did not fit the slot.
    pub deadline_violations: u32,
}

/// Everything observed in one slot.
#[derive(Debug, Clone)]
pub struct SlotRecord {
    pub slot: u32,
    pub total_energy: f64,
    pub snapshot: LyapunovSnapshot,
    pub decisions: Vec<ServerDecision>,
    pub servers: Vec<ServerSlotStats>,
}

/// Applies decisions to the world: energy accounting, queue updates, drift
/// bookkeeping, then mobility. Summation runs in fixed server order so
/// results are bit-stable.
pub fn apply_slot(
    world: &mut World,
    inputs: &SlotInputs,
    decisions: Vec<ServerDecision>,
) -> SlotRecord {
    let cfg = world.config.clone();
    let slot = world.slot;
    debug_assert_eq!(decisions.len(), world.servers.len());

    let before = world.servers.clone();
    let mut total_energy = 0.0;
    let mut stats = Vec::with_capacity(decisions.len());
    for (m, server_decision) in decisions.iter().enumerate() {
        let per_ud = &inputs.per_server[m];
        let d = &server_decision.decision;
        let sizes: Vec<f64> = per_ud.iter().map(|i| i.task.size).collect();
        let (a_edge, a_cloud) = split_arrivals(&d.offload, &d.to_cloud, &sizes)
            .expect("decisions uphold to_cloud <= offload");
        total_energy += server_decision.energy;

        let mut violations = 0;
        for (u, input) in per_ud.iter().enumerate() {
            let fits = if d.offload[u] {
                let rate = d.alloc[u] * world.servers[m].bandwidth * input.rate_factor;
                rate > 0.0 && input.task.size / rate <= cfg.slot_duration
            } else {
                input.task.size * input.task.intensity / input.cpu <= cfg.slot_duration
            };
            if !fits {
                violations += 1;
            }
        }

        let next = advance_queues(
            &world.servers[m],
            a_edge,
            a_cloud,
            cfg.slot_duration,
            cfg.computation_intensity,
        );
        stats.push(ServerSlotStats {
            arrivals_edge: a_edge,
            arrivals_cloud: a_cloud,
            q_edge: next.q_edge,
            q_cloud: next.q_cloud,
            z_edge: next.z_edge,
            z_cloud: next.z_cloud,
            delay_edge: *next.delay_samples_edge.last().unwrap(),
            delay_cloud: *next.delay_samples_cloud.last().unwrap(),
            deadline_violations: violations,
        });
        world.servers[m] = next;
    }

    let snapshot = lyapunov_accounting(
        &before,
        &world.servers,
        total_energy,
        cfg.lyapunov_v,
        cfg.slot_duration,
        cfg.computation_intensity,
    );

    for ud in &mut world.uds {
        let mut rng = Stream::new(cfg.rng_seed, Purpose::Mobility, ud.id as u64, slot as u64);
        ud.mobility = step_mobility(&ud.mobility, cfg.slot_duration, &mut rng);
    }
    world.clamp_events += inputs.clamp_events;
    world.slot += 1;

    SlotRecord {
        slot,
        total_energy,
        snapshot,
        decisions,
        servers: stats,
    }
}

/// Runs one full slot sequentially: draw, decide every server, apply.
pub fn step_slot(world: &mut World, policy: Policy) -> SlotRecord {
    let inputs = draw_slot_inputs(world);
    let decisions: Vec<ServerDecision> = (0..world.servers.len())
        .map(|m| decide_server(world, &inputs, m, policy))
        .collect();
    apply_slot(world, &inputs, decisions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud_round::relaxed_objective;

    fn input(size: f64, e_loc: f64, beta: f64) -> UdSlotInput {
        UdSlotInput {
            task: Task {
                size,
                intensity: 1000.0,
            },
            cpu: 1.5e9,
            e_loc,
            beta,
            sigma: if beta.is_finite() {
                libm::sqrt(beta)
            } else {
                f64::INFINITY
            },
            rate_factor: 4.0,
        }
    }

    fn state() -> ServerState {
        ServerState::new(2.5e9, 2.5e6, 2.0e7, 12, 5.0, 5.0)
    }

    fn ctx<'a>(inputs: &'a [UdSlotInput], state: &'a ServerState) -> ServerContext<'a> {
        ServerContext {
            inputs,
            state,
            v: 10.0,
            delta: 1.0,
            rho: 1000.0,
            slot: 1,
            capacity: state.capacity,
            cloud_enabled: true,
            match_init: MatchInit::AllLocal,
            rounding_mode: RoundingMode::Deterministic,
        }
    }

    #[test]
    fn energy_objective_cases() {
        let inputs = [
            input(1.0e5, 0.02, 4.0e4),
            input(2.0e5, 0.05, 1.0e4),
            input(3.0e5, 0.09, 9.0e4),
        ];
        let s = state();
        let c = ctx(&inputs, &s);
        // No offloaders: plain sum of local energies.
        let all_local = energy_objective(&c, &[false; 3]);
        assert!((all_local - 0.16).abs() < 1e-12);
        // One offloader pays beta / B, the single-device closed form.
        let one = energy_objective(&c, &[true, false, false]);
        assert!((one - (0.14 + 4.0e4 / 2.0e7)).abs() < 1e-12);
        // Adding an offloader never shrinks an existing offloader's share.
        let sum_one = inputs[0].sigma;
        let sum_two = inputs[0].sigma + inputs[1].sigma;
        assert!(
            crate::allocation::offload_energy_member(inputs[0].sigma, sum_two, 2.0e7)
                > crate::allocation::offload_energy_member(inputs[0].sigma, sum_one, 2.0e7)
        );
    }

    #[test]
    fn queue_objective_cases() {
        let inputs = [input(2.0e5, 0.02, 4.0e4)];
        let mut s = state();
        let c = ctx(&inputs, &s);
        // Zero queues: every term carries a zero weight.
        assert_eq!(queue_objective(&c, &[false], &[false]), 0.0);

        // Only the edge queue loaded, all-local: minus the service term.
        s.q_edge = 1.0;
        s.cpu = 5.0e9;
        let c = ctx(&inputs, &s);
        let v = queue_objective(&c, &[false], &[false]);
        // 1 * (0 - 5e6) + Z-terms(0) = -5e6 ... plus the tiny floored ratio.
        let expected = -5.0e6 + 0.0;
        assert!((v - expected).abs() < 1e-6, "{v}");
    }

    #[test]
    fn queue_objective_matches_relaxation_plus_constants() {
        let inputs = [
            input(2.0e5, 0.02, 4.0e4),
            input(5.0e5, 0.07, 1.0e4),
            input(1.0e5, 0.01, 2.0e4),
        ];
        let mut s = state();
        s.q_edge = 3.0e6;
        s.q_cloud = 1.0e6;
        s.z_edge = 4.0;
        s.z_cloud = 2.0;
        s.hist_edge = 9.0e6;
        s.hist_cloud = 2.0e6;
        let mut c = ctx(&inputs, &s);
        c.slot = 7;
        // All three offload; middle one goes to the cloud.
        let offload = [true, true, true];
        let to_cloud = [false, true, false];
        let q = queue_objective(&c, &offload, &to_cloud);
        let stability = StabilityContext {
            sizes: inputs.iter().map(|i| i.task.size).collect(),
            q_edge: s.q_edge,
            q_cloud: s.q_cloud,
            z_edge: s.z_edge,
            z_cloud: s.z_cloud,
            hist_edge: s.hist_edge,
            hist_cloud: s.hist_cloud,
            slot: 7,
        };
        let g = relaxed_objective(5.0e5, &stability).unwrap();
        let consts = s.q_edge * s.edge_service(1.0, 1000.0) + s.q_cloud * s.cloud_service(1.0);
        assert!((q - (g - consts)).abs() < 1e-9 * (1.0 + q.abs()), "{q} vs {g}");
    }

    #[test]
    fn queue_objective_finite_difference() {
        // Moving one task from edge to cloud changes the affine part by
        // (Qc - Qe) * s plus the two hyperbolic deltas.
        let inputs = [input(2.0e5, 0.02, 4.0e4), input(3.0e5, 0.03, 3.0e4)];
        let mut s = state();
        s.q_edge = 2.0e6;
        s.q_cloud = 5.0e5;
        s.z_edge = 3.0;
        s.z_cloud = 1.0;
        s.hist_edge = 4.0e6;
        s.hist_cloud = 1.0e6;
        let mut c = ctx(&inputs, &s);
        c.slot = 3;
        let before = queue_objective(&c, &[true, true], &[false, false]);
        let after = queue_objective(&c, &[true, true], &[true, false]);
        let size = inputs[0].task.size;
        let t = 3.0;
        let z_delta = s.z_edge * s.q_edge * t
            * (1.0 / (s.hist_edge + 3.0e5 + DENOMINATOR_FLOOR)
                - 1.0 / (s.hist_edge + 5.0e5 + DENOMINATOR_FLOOR))
            + s.z_cloud * s.q_cloud * t
                * (1.0 / (s.hist_cloud + 2.0e5 + DENOMINATOR_FLOOR)
                    - 1.0 / (s.hist_cloud + DENOMINATOR_FLOOR));
        let expected = (s.q_cloud - s.q_edge) * size + z_delta;
        assert!(
            ((after - before) - expected).abs() < 1e-6 * (1.0 + expected.abs()),
            "{} vs {expected}",
            after - before
        );
    }

    #[test]
    fn two_stage_zero_capacity_is_all_local() {
        let inputs = [input(2.0e5, 0.02, 4.0e4), input(3.0e5, 0.03, 3.0e4)];
        let mut s = state();
        s.capacity = 0;
        let mut c = ctx(&inputs, &s);
        c.capacity = 0;
        let out = two_stage(&c, None);
        assert_eq!(out.decision.offload, vec![false, false]);
        assert_eq!(out.chosen_capacity, 0);
        let expected = c.v * (0.02 + 0.03) + queue_objective(&c, &[false, false], &[false, false]);
        assert!((out.objective - expected).abs() < 1e-12 * (1.0 + expected.abs()));
    }

    #[test]
    fn two_stage_never_worse_than_all_local() {
        let inputs = [
            input(2.0e5, 0.05, 4.0e4),
            input(3.0e5, 0.01, 8.0e4),
            input(7.0e5, 0.11, 2.0e4),
        ];
        let mut s = state();
        s.q_edge = 2.0e6;
        s.z_edge = 3.0;
        s.hist_edge = 6.0e6;
        let c = ctx(&inputs, &s);
        let out = two_stage(&c, None);
        let j_local =
            c.v * energy_objective(&c, &[false; 3]) + queue_objective(&c, &[false; 3], &[false; 3]);
        assert!(out.objective <= j_local + 1e-9 * (1.0 + j_local.abs()));
        // The sweep records every candidate count down to zero.
        assert_eq!(out.sweep.len(), c.capacity as usize + 1);
        assert_eq!(out.sweep.last().unwrap().0, 0);
    }

    #[test]
    fn single_ud_three_candidates() {
        // One device, offloading cheaper than local. The controller must pick
        // the best of {local, edge, cloud} by the composed objective.
        let inputs = [input(4.0e5, 0.09, 4.0e4)];
        let hand = |s: &ServerState, slot: u32| -> (f64, [f64; 3], Decision) {
            let mut c = ctx(&inputs, s);
            c.slot = slot;
            let j_local =
                c.v * energy_objective(&c, &[false]) + queue_objective(&c, &[false], &[false]);
            let j_edge =
                c.v * energy_objective(&c, &[true]) + queue_objective(&c, &[true], &[false]);
            let j_cloud =
                c.v * energy_objective(&c, &[true]) + queue_objective(&c, &[true], &[true]);
            let out = two_stage(&c, None);
            (out.objective, [j_local, j_edge, j_cloud], out.decision)
        };

        let argmin = |c: &[f64; 3]| {
            c.iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0
        };

        // Empty queues: offloading wins on energy, edge and cloud tie on
        // queue pressure, the rounding tie-break keeps bits at the edge.
        let s = state();
        let (j, cands, d) = hand(&s, 1);
        assert!((j - cands[argmin(&cands)]).abs() <= 1e-9 * (1.0 + j.abs()));
        assert_eq!((d.offload[0], d.to_cloud[0]), (true, false));

        // Edge queue congested, cloud empty: cloud route must win.
        let mut s2 = state();
        s2.q_edge = 8.0e6;
        s2.hist_edge = 8.0e6;
        let (j2, cands2, d2) = hand(&s2, 2);
        assert_eq!(argmin(&cands2), 2);
        assert!((j2 - cands2[2]).abs() <= 1e-9 * (1.0 + j2.abs()));
        assert_eq!((d2.offload[0], d2.to_cloud[0]), (true, true));

        // Both queues heavily congested: staying local must win.
        let mut s3 = state();
        s3.q_edge = 3.0e7;
        s3.q_cloud = 3.0e7;
        s3.hist_edge = 3.0e7;
        s3.hist_cloud = 3.0e7;
        let (j3, cands3, d3) = hand(&s3, 2);
        assert_eq!(argmin(&cands3), 0);
        assert!((j3 - cands3[0]).abs() <= 1e-9 * (1.0 + j3.abs()));
        assert!(!d3.offload[0]);
    }
}
