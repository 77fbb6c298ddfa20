//! Offloading-set selection by many-to-one swap matching.
//!
//! Devices are matched to one of two sides: the local side (their own CPU,
//! unbounded capacity) or the MEC side (capacity `q`). Under the optimal
//! bandwidth split the MEC side's total uplink energy has the closed form
//! `(sum_{u in O} sqrt(beta_u))^2 / B`, so every candidate move is evaluated
//! in O(1) from the running root sum.
//!
//! Utilities are negated energies: `phi_u = -(E_loc + E_off)` for a device,
//! `phi_local = -sum E_loc` and `phi_mec = -sum E_off` for the two sides,
//! so `phi_local + phi_mec` is exactly minus the total energy. Because every
//! new MEC member shrinks all existing members' bandwidth, the MEC side's
//! own utility never welcomes growth; the acceptance rule therefore requires
//! each involved device to weakly improve and the two sides' joint utility —
//! equivalently total energy — to strictly improve. Strict decrease of a
//! function over finitely many configurations guarantees termination, and
//! the final matching is certified by an exhaustive pair scan.
//!
//! Besides true pair exchanges, a single device may move against a vacant
//! slot (capacity permitting); without such degenerate swaps the offloader
//! count could never change. A closing refinement pass drops offloaders
//! whose removal does not increase total energy, re-deriving the allocation
//! after every drop, and the swap scan re-runs until both phases are quiet.

use alloc::vec;
use alloc::vec::Vec;

use crate::allocation::{offload_energy_member, offload_energy_total};
use crate::rng::Stream;

/// Inputs of the energy-minimization stage for one server and slot.
///
/// `sigma[u]` is `sqrt(beta_u)`; a non-finite value marks an unreachable
/// link, which pins the device to the local side.
#[derive(Debug, Clone)]
pub struct MatchingInstance {
    pub local_energy: Vec<f64>,
    pub sigma: Vec<f64>,
    pub bandwidth: f64,
}

impl MatchingInstance {
    pub fn len(&self) -> usize {
        self.local_energy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local_energy.is_empty()
    }

    /// A device may offload only over a usable link carrying actual bits.
    pub fn eligible(&self, u: usize) -> bool {
        self.sigma[u].is_finite() && self.sigma[u] > 0.0
    }

    fn sigma_sum(&self, offload: &[bool]) -> f64 {
        offload
            .iter()
            .zip(self.sigma.iter())
            .filter(|(&on, _)| on)
            .map(|(_, &s)| s)
            .sum()
    }

    /// Total device energy of an assignment under the optimal allocation.
    pub fn total_energy(&self, offload: &[bool]) -> f64 {
        debug_assert_eq!(offload.len(), self.len());
        let local: f64 = offload
            .iter()
            .zip(self.local_energy.iter())
            .filter(|(&on, _)| !on)
            .map(|(_, &e)| e)
            .sum();
        local + offload_energy_total(self.sigma_sum(offload), self.bandwidth)
    }
}

/// An assignment of devices to the two sides plus the MEC capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub offload: Vec<bool>,
    pub capacity: usize,
}

impl Matching {
    pub fn offloader_count(&self) -> usize {
        self.offload.iter().filter(|&&b| b).count()
    }
}

/// Initial assignment for the swap loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchInit {
    /// Everyone starts on the local side; always feasible.
    #[default]
    AllLocal,
    /// Random eligible subset up to capacity.
    Random,
}

/// Per-agent utilities under an assignment: one entry per device plus
/// `[phi_local, phi_mec]` for the two sides.
pub fn agent_utilities(inst: &MatchingInstance, offload: &[bool]) -> (Vec<f64>, [f64; 2]) {
    let sigma_sum = inst.sigma_sum(offload);
    let mut per_ud = Vec::with_capacity(inst.len());
    let mut local_total = 0.0;
    for u in 0..inst.len() {
        if offload[u] {
            per_ud.push(-offload_energy_member(inst.sigma[u], sigma_sum, inst.bandwidth));
        } else {
            per_ud.push(-inst.local_energy[u]);
            local_total += inst.local_energy[u];
        }
    }
    let mec = -offload_energy_total(sigma_sum, inst.bandwidth);
    (per_ud, [-local_total, mec])
}

/// A candidate transformation of the assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    /// True pair exchange: `local` joins the MEC side, `off` leaves it.
    Exchange { local: usize, off: usize },
    /// Degenerate swap against a vacant MEC slot.
    ToMec(usize),
    /// Degenerate swap back to the local side.
    ToLocal(usize),
}

/// Evaluates a candidate move. Returns the new total energy if the move is
/// blocking (every involved device weakly improves, total energy strictly
/// improves), else `None`.
fn blocking_gain(
    inst: &MatchingInstance,
    offload: &[bool],
    sigma_sum: f64,
    energy: f64,
    mv: Move,
) -> Option<f64> {
    let b = inst.bandwidth;
    match mv {
        Move::Exchange { local, off } => {
            debug_assert!(!offload[local] && offload[off]);
            if !inst.eligible(local) {
                return None;
            }
            let sum_new = sigma_sum - inst.sigma[off] + inst.sigma[local];
            // Joining device must not pay more than its local run did.
            if offload_energy_member(inst.sigma[local], sum_new, b) > inst.local_energy[local] {
                return None;
            }
            // Leaving device must not pay more than its uplink did.
            if inst.local_energy[off] > offload_energy_member(inst.sigma[off], sigma_sum, b) {
                return None;
            }
            let new_energy = energy - inst.local_energy[local] + inst.local_energy[off]
                - offload_energy_total(sigma_sum, b)
                + offload_energy_total(sum_new, b);
            (new_energy < energy).then_some(new_energy)
        }
        Move::ToMec(u) => {
            debug_assert!(!offload[u]);
            if !inst.eligible(u) {
                return None;
            }
            let sum_new = sigma_sum + inst.sigma[u];
            if offload_energy_member(inst.sigma[u], sum_new, b) > inst.local_energy[u] {
                return None;
            }
            let new_energy = energy - inst.local_energy[u] - offload_energy_total(sigma_sum, b)
                + offload_energy_total(sum_new, b);
            (new_energy < energy).then_some(new_energy)
        }
        Move::ToLocal(u) => {
            debug_assert!(offload[u]);
            if inst.local_energy[u] > offload_energy_member(inst.sigma[u], sigma_sum, b) {
                return None;
            }
            let sum_new = sigma_sum - inst.sigma[u];
            let new_energy = energy + inst.local_energy[u] - offload_energy_total(sigma_sum, b)
                + offload_energy_total(sum_new, b);
            (new_energy < energy).then_some(new_energy)
        }
    }
}

/// Exhaustive scan for a blocking pair of devices matched to distinct sides.
/// Returns the first one in lexicographic order, or `None` when the matching
/// is pairwise stable.
pub fn find_blocking_pair(inst: &MatchingInstance, matching: &Matching) -> Option<(usize, usize)> {
    let offload = &matching.offload;
    let sigma_sum = inst.sigma_sum(offload);
    let energy = inst.total_energy(offload);
    for a in 0..inst.len() {
        for b in (a + 1)..inst.len() {
            if offload[a] == offload[b] {
                continue;
            }
            let (local, off) = if offload[a] { (b, a) } else { (a, b) };
            if blocking_gain(inst, offload, sigma_sum, energy, Move::Exchange { local, off })
                .is_some()
            {
                return Some((a, b));
            }
        }
    }
    None
}

fn first_blocking_move(
    inst: &MatchingInstance,
    offload: &[bool],
    capacity: usize,
    sigma_sum: f64,
    energy: f64,
) -> Option<(Move, f64)> {
    let n = inst.len();
    let count = offload.iter().filter(|&&b| b).count();
    for a in 0..n {
        for b in (a + 1)..n {
            if offload[a] == offload[b] {
                continue;
            }
            let (local, off) = if offload[a] { (b, a) } else { (a, b) };
            let mv = Move::Exchange { local, off };
            if let Some(e) = blocking_gain(inst, offload, sigma_sum, energy, mv) {
                return Some((mv, e));
            }
        }
    }
    if count < capacity {
        for u in 0..n {
            if !offload[u] {
                let mv = Move::ToMec(u);
                if let Some(e) = blocking_gain(inst, offload, sigma_sum, energy, mv) {
                    return Some((mv, e));
                }
            }
        }
    }
    for u in 0..n {
        if offload[u] {
            let mv = Move::ToLocal(u);
            if let Some(e) = blocking_gain(inst, offload, sigma_sum, energy, mv) {
                return Some((mv, e));
            }
        }
    }
    None
}

/// Drops offloaders whose removal does not increase total energy, in id
/// order, re-deriving the allocation after each drop. Returns whether any
/// drop happened.
fn refine_removals(inst: &MatchingInstance, offload: &mut [bool]) -> bool {
    let mut changed = false;
    loop {
        let sigma_sum = inst.sigma_sum(offload);
        let b = inst.bandwidth;
        let mut dropped = false;
        for u in 0..inst.len() {
            if !offload[u] {
                continue;
            }
            let sum_new = sigma_sum - inst.sigma[u];
            let delta = inst.local_energy[u] + offload_energy_total(sum_new, b)
                - offload_energy_total(sigma_sum, b);
            if delta <= 0.0 {
                offload[u] = false;
                changed = true;
                dropped = true;
                break;
            }
        }
        if !dropped {
            return changed;
        }
    }
}

/// Runs the full stage: swap loop to pairwise stability, then removal
/// refinement, iterated until both are quiet. The result respects the MEC
/// capacity and never exceeds the all-local energy.
pub fn stable_match(
    inst: &MatchingInstance,
    capacity: usize,
    init: MatchInit,
    rng: Option<&mut Stream>,
) -> Matching {
    let n = inst.len();
    let mut offload = vec![false; n];
    if let (MatchInit::Random, Some(stream)) = (init, rng) {
        let mut budget = capacity;
        for u in 0..n {
            if budget == 0 {
                break;
            }
            if inst.eligible(u) && stream.bernoulli(0.5) {
                offload[u] = true;
                budget -= 1;
            }
        }
    }

    loop {
        // Swap phase: restart the scan after every accepted move.
        let mut energy = inst.total_energy(&offload);
        while let Some((mv, new_energy)) = first_blocking_move(
            inst,
            &offload,
            capacity,
            inst.sigma_sum(&offload),
            energy,
        ) {
            debug_assert!(new_energy < energy);
            match mv {
                Move::Exchange { local, off } => {
                    offload[local] = true;
                    offload[off] = false;
                }
                Move::ToMec(u) => offload[u] = true,
                Move::ToLocal(u) => offload[u] = false,
            }
            energy = new_energy;
        }
        if !refine_removals(inst, &mut offload) {
            break;
        }
    }
    debug_assert!(offload.iter().filter(|&&b| b).count() <= capacity);
    Matching { offload, capacity }
}
