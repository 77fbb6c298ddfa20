//! Baseline policies. All of them reuse the closed-form allocation and the
//! same queue updates as the online controller, so comparisons isolate the
//! decision rule itself. Devices with unusable links are forced local under
//! every policy.

use alloc::vec;
use alloc::vec::Vec;

use super::{assemble, two_stage, ServerContext, ServerDecision};
use crate::matching::{stable_match, MatchingInstance};
use crate::rng::Stream;

/// Random offloading: each eligible device offloads with probability 1/2,
/// random drops enforce the connection capacity, and each offloader is
/// forwarded to the cloud with probability 1/2.
pub fn random_offloading(ctx: &ServerContext<'_>, rng: &mut Stream) -> ServerDecision {
    let n = ctx.inputs.len();
    let mut offload: Vec<bool> = (0..n)
        .map(|u| ctx.inputs[u].offload_eligible() && rng.bernoulli(0.5))
        .collect();
    let mut count = offload.iter().filter(|&&b| b).count();
    while count > ctx.capacity as usize {
        let victim = rng.index(count);
        let id = offload
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .nth(victim)
            .unwrap();
        offload[id] = false;
        count -= 1;
    }
    let to_cloud: Vec<bool> = offload.iter().map(|&on| on && rng.bernoulli(0.5)).collect();
    assemble(ctx, offload, to_cloud)
}

/// Energy-considered-first: full-capacity matching on energy alone, then a
/// join-the-shorter-queue cloud split measured in slots-to-drain, with the
/// hypothetical additions of already-routed bits counted.
pub fn energy_first(ctx: &ServerContext<'_>, rng: &mut Stream) -> ServerDecision {
    let inst = MatchingInstance {
        local_energy: ctx.inputs.iter().map(|i| i.e_loc).collect(),
        sigma: ctx.inputs.iter().map(|i| i.sigma).collect(),
        bandwidth: ctx.state.bandwidth,
    };
    let matching = stable_match(&inst, ctx.capacity as usize, ctx.match_init, Some(rng));
    let offload = matching.offload;

    let svc_edge = ctx.state.edge_service(ctx.delta, ctx.rho).max(f64::MIN_POSITIVE);
    let svc_cloud = ctx.state.cloud_service(ctx.delta).max(f64::MIN_POSITIVE);
    let mut added_edge = 0.0;
    let mut added_cloud = 0.0;
    let mut to_cloud = vec![false; ctx.inputs.len()];
    for (u, input) in ctx.inputs.iter().enumerate() {
        if !offload[u] {
            continue;
        }
        let edge_backlog = (ctx.state.q_edge + added_edge) / svc_edge;
        let cloud_backlog = (ctx.state.q_cloud + added_cloud) / svc_cloud;
        if ctx.cloud_enabled && cloud_backlog < edge_backlog {
            to_cloud[u] = true;
            added_cloud += input.task.size;
        } else {
            added_edge += input.task.size;
        }
    }
    assemble(ctx, offload, to_cloud)
}

/// Single-slot-constrained: take the online controller's decision, then
/// force offloaders back local — largest task first — until accepting the
/// remaining arrivals keeps each queue's realized delay ratio within its
/// bound this slot.
pub fn single_slot_constrained(ctx: &ServerContext<'_>, rng: &mut Stream) -> ServerDecision {
    let base = two_stage(ctx, Some(rng));
    let mut offload = base.decision.offload;
    let mut to_cloud = base.decision.to_cloud;
    let sizes: Vec<f64> = ctx.inputs.iter().map(|i| i.task.size).collect();

    let post_ratio = |queue: f64, service: f64, hist: f64, arrivals: f64| -> f64 {
        let next_q = (queue - service).max(0.0) + arrivals;
        let denom = hist + arrivals + crate::cloud_round::DENOMINATOR_FLOOR;
        next_q * ctx.slot as f64 / denom
    };
    let arrivals_cloud = |to_cloud: &[bool]| -> f64 {
        to_cloud
            .iter()
            .zip(sizes.iter())
            .filter(|(&b, _)| b)
            .map(|(_, &s)| s)
            .sum()
    };
    let arrivals_edge = |offload: &[bool], to_cloud: &[bool]| -> f64 {
        offload
            .iter()
            .zip(to_cloud.iter())
            .zip(sizes.iter())
            .filter(|((&on, &cloud), _)| on && !cloud)
            .map(|(_, &s)| s)
            .sum()
    };

    // Cloud queue first: dropping a cloud-bound offloader entirely avoids
    // shifting its bits onto the already-loaded edge queue.
    let s = ctx.state;
    while post_ratio(
        s.q_cloud,
        s.cloud_service(ctx.delta),
        s.hist_cloud,
        arrivals_cloud(&to_cloud),
    ) > s.delay_bound_cloud
    {
        let Some(victim) = largest(&to_cloud, &sizes) else { break };
        to_cloud[victim] = false;
        offload[victim] = false;
    }
    while post_ratio(
        s.q_edge,
        s.edge_service(ctx.delta, ctx.rho),
        s.hist_edge,
        arrivals_edge(&offload, &to_cloud),
    ) > s.delay_bound_edge
    {
        let edge_only: Vec<bool> = offload
            .iter()
            .zip(to_cloud.iter())
            .map(|(&on, &cloud)| on && !cloud)
            .collect();
        let Some(victim) = largest(&edge_only, &sizes) else { break };
        offload[victim] = false;
    }
    assemble(ctx, offload, to_cloud)
}

fn largest(mask: &[bool], sizes: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for u in 0..mask.len() {
        if mask[u] && best.map_or(true, |b| sizes[u] > sizes[b]) {
            best = Some(u);
        }
    }
    best
}
