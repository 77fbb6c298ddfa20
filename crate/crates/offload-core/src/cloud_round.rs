//! Edge/cloud split of the offloaded bits: convex relaxation plus dependent
//! rounding.
//!
//! With the offloading set fixed, the queue-pressure objective depends on the
//! cloud-forwarding bits only through `y = sum_u x_u s_u`, the bits routed to
//! the cloud queue:
//!
//! ```text
//! g(y) = Qe (S - y) + Qc y + Ze Qe t / (He + S - y + eps) + Zc Qc t / (Hc + y + eps)
//! ```
//!
//! `g` is convex on `[0, S]`, so a golden-section search (checked against the
//! interval endpoints) replaces a general solver. The minimizing budget is
//! realized as a fractional vector with at most one non-binary entry, which
//! dependent rounding then snaps pairwise: each step preserves the
//! size-weighted sum exactly and forces at least one of the two entries
//! binary.

use alloc::vec::Vec;

use crate::error::ContractError;

/// Denominator floor in bits; keeps the delay terms finite on the very first
/// slot when no bits have ever arrived. Negligible at operating scale.
pub const DENOMINATOR_FLOOR: f64 = 1.0;

/// Inputs of the queue-stability subproblem for one server and slot.
#[derive(Debug, Clone)]
pub struct StabilityContext {
    /// Task sizes of the offloaders (bits).
    pub sizes: Vec<f64>,
    pub q_edge: f64,
    pub q_cloud: f64,
    pub z_edge: f64,
    pub z_cloud: f64,
    /// Cumulative edge arrivals before this slot (bits).
    pub hist_edge: f64,
    /// Cumulative cloud arrivals before this slot (bits).
    pub hist_cloud: f64,
    /// Current slot index, 1-based.
    pub slot: u32,
}

impl StabilityContext {
    /// Total offloaded bits `S`.
    pub fn total_size(&self) -> f64 {
        self.sizes.iter().sum()
    }
}

/// Relaxed objective `g(y)` for cloud budget `y` in `[0, S]`.
pub fn relaxed_objective(y: f64, ctx: &StabilityContext) -> Result<f64, ContractError> {
    let total = ctx.total_size();
    if !(0.0..=total * (1.0 + 1e-12) + 1e-9).contains(&y) {
        return Err(ContractError::BudgetOutOfRange);
    }
    let t = ctx.slot as f64;
    let edge_term = ctx.z_edge * ctx.q_edge * t / (ctx.hist_edge + total - y + DENOMINATOR_FLOOR);
    let cloud_term = ctx.z_cloud * ctx.q_cloud * t / (ctx.hist_cloud + y + DENOMINATOR_FLOOR);
    Ok(ctx.q_edge * (total - y) + ctx.q_cloud * y + edge_term + cloud_term)
}

/// Golden-section minimizer of a unimodal function on `[lo, hi]`.
fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minimizes `g` on `[0, S]` and realizes the budget as a fractional vector.
///
/// Returns `(y*, x_bar)` where `x_bar` fills devices in id order until the
/// budget runs out, leaving at most one strictly fractional entry. An empty
/// offloader set returns `(0, [])`.
pub fn solve_relaxation(ctx: &StabilityContext, tol: f64) -> (f64, Vec<f64>) {
    let total = ctx.total_size();
    if total <= 0.0 {
        return (0.0, ctx.sizes.iter().map(|_| 0.0).collect());
    }
    let g = |y: f64| relaxed_objective(y, ctx).unwrap_or(f64::INFINITY);
    let interior = golden_section(g, 0.0, total, tol * total);
    // The endpoints frequently are the exact optimum (affine regimes); prefer
    // them over a near-endpoint interior estimate.
    let mut best = 0.0;
    let mut best_val = g(0.0);
    for cand in [total, interior] {
        let val = g(cand);
        if val < best_val {
            best_val = val;
            best = cand;
        }
    }
    let budget = best;

    let mut remaining = budget;
    let mut fractions = Vec::with_capacity(ctx.sizes.len());
    for &size in &ctx.sizes {
        if size <= 0.0 {
            fractions.push(0.0);
        } else if remaining >= size {
            fractions.push(1.0);
            remaining -= size;
        } else if remaining > 0.0 {
            fractions.push(remaining / size);
            remaining = 0.0;
        } else {
            fractions.push(0.0);
        }
    }
    (budget, fractions)
}

/// A pair of fractional decisions with their size weights.
#[derive(Debug, Clone, Copy)]
pub struct RoundingPair {
    pub x1: f64,
    pub x2: f64,
    pub w1: f64,
    pub w2: f64,
}

/// Whether a rounding pass picks its rule by the deterministic threshold
/// `rho1 >= rho2` or samples rule 1 with probability `rho1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RoundingMode {
    #[default]
    Deterministic,
    Randomized,
}

fn step_with_rule(pair: RoundingPair, use_rule1: bool) -> (f64, f64) {
    let RoundingPair { x1, x2, w1, w2 } = pair;
    let k = w2 / w1;
    let i1_a = 1.0 - x1;
    let i1_b = k * x2;
    let i2_a = x1;
    let i2_b = k * (1.0 - x2);
    let (mut y1, mut y2);
    if use_rule1 {
        // Rule 1: x1 down by i2, x2 up by i2 / k.
        let i2 = i2_a.min(i2_b);
        y1 = x1 - i2;
        y2 = x2 + i2 / k;
        // The entry whose headroom bound was hit lands exactly on a bit
        // (both, when the bounds tie); set it exactly to keep the invariant
        // float-proof.
        if i2_a <= i2_b {
            y1 = 0.0;
        }
        if i2_b <= i2_a {
            y2 = 1.0;
        }
    } else {
        // Rule 2: x1 up by i1, x2 down by i1 / k.
        let i1 = i1_a.min(i1_b);
        y1 = x1 + i1;
        y2 = x2 - i1 / k;
        if i1_a <= i1_b {
            y1 = 1.0;
        }
        if i1_b <= i1_a {
            y2 = 0.0;
        }
    }
    (y1.clamp(0.0, 1.0), y2.clamp(0.0, 1.0))
}

fn headroom_shares(pair: RoundingPair) -> f64 {
    let RoundingPair { x1, x2, w1, w2 } = pair;
    debug_assert!(x1 > 0.0 && x1 < 1.0 && x2 > 0.0 && x2 < 1.0);
    debug_assert!(w1 > 0.0 && w2 > 0.0);
    let k = w2 / w1;
    let i1 = (1.0 - x1).min(k * x2);
    let i2 = x1.min(k * (1.0 - x2));
    debug_assert!(i1 + i2 > 0.0);
    i1 / (i1 + i2)
}

/// One pairwise rounding move, deterministic rule choice.
///
/// With `k = w2 / w1`, the headrooms are `i1 = min(1 - x1, k x2)` and
/// `i2 = min(x1, k (1 - x2))`; rule 1 fires when `i1 / (i1 + i2) >= 1/2`.
/// Either rule shifts weight between the entries so the weighted sum
/// `w1 x1 + w2 x2` is preserved exactly while at least one entry lands
/// exactly on 0 or 1.
pub fn rounding_step(pair: RoundingPair) -> (f64, f64) {
    let rho1 = headroom_shares(pair);
    step_with_rule(pair, rho1 >= 0.5)
}

/// One pairwise rounding move, sampling rule 1 with probability `rho1`.
pub fn rounding_step_randomized(pair: RoundingPair, rng: &mut crate::rng::Stream) -> (f64, f64) {
    let rho1 = headroom_shares(pair);
    step_with_rule(pair, rng.bernoulli(rho1))
}

fn is_binary(x: f64) -> bool {
    x == 0.0 || x == 1.0
}

/// Rounds a fractional vector to binary decisions, preserving the
/// size-weighted sum through every pairwise step.
///
/// Zero-size entries are forced to 0 upfront (they carry no weight). A final
/// lone fractional entry — possible when the budget is not representable as a
/// subset sum — is snapped to the nearer bit, ties to 0.
pub fn dependent_round(fractions: &[f64], sizes: &[f64]) -> Vec<bool> {
    dependent_round_mode(fractions, sizes, RoundingMode::Deterministic, None)
}

/// `dependent_round` with an explicit rule-selection mode. The randomized
/// mode needs a stream to draw the rule choices from.
pub fn dependent_round_mode(
    fractions: &[f64],
    sizes: &[f64],
    mode: RoundingMode,
    mut rng: Option<&mut crate::rng::Stream>,
) -> Vec<bool> {
    debug_assert_eq!(fractions.len(), sizes.len());
    let mut x: Vec<f64> = fractions.to_vec();
    for (xi, &s) in x.iter_mut().zip(sizes.iter()) {
        debug_assert!((0.0..=1.0).contains(xi));
        if s <= 0.0 {
            *xi = 0.0;
        }
    }
    loop {
        let mut frac_ids = x
            .iter()
            .enumerate()
            .filter(|(_, &v)| !is_binary(v))
            .map(|(i, _)| i);
        let Some(first) = frac_ids.next() else { break };
        match frac_ids.next() {
            Some(second) => {
                let pair = RoundingPair {
                    x1: x[first],
                    x2: x[second],
                    w1: sizes[first],
                    w2: sizes[second],
                };
                let (y1, y2) = match mode {
                    RoundingMode::Deterministic => rounding_step(pair),
                    RoundingMode::Randomized => {
                        let stream = rng
                            .as_deref_mut()
                            .expect("randomized rounding needs a stream");
                        rounding_step_randomized(pair, stream)
                    }
                };
                debug_assert!(is_binary(y1) || is_binary(y2));
                x[first] = y1;
                x[second] = y2;
            }
            None => {
                x[first] = if x[first] > 0.5 { 1.0 } else { 0.0 };
            }
        }
    }
    x.into_iter().map(|v| v >= 1.0).collect()
}
