//! Bandwidth allocation over a server's offloading set.
//!
//! The per-slot objective restricted to the bandwidth fractions is
//! `sum_u V beta_u / (a_u B) + phi` with `phi` independent of the fractions:
//! strictly convex in each `a_u` and decreasing, so the budget `sum a <= 1`
//! is tight at the optimum and the minimizer has the closed form
//!
//! ```text
//! a_u* = sqrt(beta_u) / sum_k sqrt(beta_k)
//! ```
//!
//! `verify_kkt` is the independent optimality check: it confirms that the
//! stationarity values `V beta_u / (a_u^2 B)` agree on a common multiplier
//! `lambda >= 0` and that complementary slackness holds.

use alloc::vec::Vec;

use crate::error::ContractError;

/// One server's allocation subproblem.
#[derive(Debug, Clone)]
pub struct AllocationInstance {
    /// Beta coefficients of the offloaders, all strictly positive.
    pub betas: Vec<f64>,
    /// Server bandwidth (Hz).
    pub bandwidth: f64,
    /// Energy/queueing trade-off weight.
    pub v: f64,
    /// Allocation-independent remainder of the objective.
    pub phi: f64,
}

/// Closed-form optimal fractions; empty set yields an empty vector.
pub fn optimal_allocation(inst: &AllocationInstance) -> Result<Vec<f64>, ContractError> {
    if inst.betas.is_empty() {
        return Ok(Vec::new());
    }
    let mut roots = Vec::with_capacity(inst.betas.len());
    let mut total = 0.0;
    for &beta in &inst.betas {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(ContractError::NonpositiveBeta);
        }
        let r = libm::sqrt(beta);
        roots.push(r);
        total += r;
    }
    Ok(roots.into_iter().map(|r| r / total).collect())
}

/// Checks the optimality conditions for feasible fractions `a` at absolute
/// tolerance `tol`. An offloader with zero bandwidth fails the check
/// (stationarity is undefined there); an empty set passes vacuously.
pub fn verify_kkt(inst: &AllocationInstance, a: &[f64], tol: f64) -> bool {
    debug_assert_eq!(a.len(), inst.betas.len());
    if inst.betas.is_empty() {
        return true;
    }
    let mut lambda = None;
    for (&beta, &frac) in inst.betas.iter().zip(a.iter()) {
        if frac <= 0.0 {
            return false;
        }
        let stationarity = inst.v * beta / (frac * frac * inst.bandwidth);
        match lambda {
            None => lambda = Some(stationarity),
            Some(l) => {
                if (stationarity - l).abs() > tol {
                    return false;
                }
            }
        }
    }
    let lambda = lambda.unwrap();
    if lambda < 0.0 {
        return false;
    }
    // Compensated sum keeps the slackness check meaningful at tight tolerances.
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &frac in a {
        let y = frac - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    if sum > 1.0 + tol {
        return false;
    }
    (lambda * (sum - 1.0)).abs() <= tol
}

/// Objective value `sum V beta_u / (a_u B) + phi`.
pub fn allocation_objective(inst: &AllocationInstance, a: &[f64]) -> Result<f64, ContractError> {
    debug_assert_eq!(a.len(), inst.betas.len());
    let mut acc = inst.phi;
    for (&beta, &frac) in inst.betas.iter().zip(a.iter()) {
        if frac <= 0.0 {
            return Err(ContractError::ZeroAllocation);
        }
        acc += inst.v * beta / (frac * inst.bandwidth);
    }
    Ok(acc)
}

/// Total uplink energy of the offloading set under the optimal allocation:
/// `(sum sqrt(beta))^2 / B`. This is the closed form the matching layer
/// leans on for O(1) swap evaluation.
pub fn offload_energy_total(sigma_sum: f64, bandwidth: f64) -> f64 {
    sigma_sum * sigma_sum / bandwidth
}

/// Uplink energy of one offloader under the optimal allocation:
/// `sqrt(beta_u) * sum sqrt(beta) / B`.
pub fn offload_energy_member(sigma_u: f64, sigma_sum: f64, bandwidth: f64) -> f64 {
    sigma_u * sigma_sum / bandwidth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, Stream};

    fn inst(betas: &[f64], v: f64, bandwidth: f64) -> AllocationInstance {
        AllocationInstance {
            betas: betas.to_vec(),
            bandwidth,
            v,
            phi: 0.0,
        }
    }

    #[test]
    fn closed_form_examples() {
        let a = optimal_allocation(&inst(&[4.0, 1.0], 1.0, 1.0)).unwrap();
        assert!((a[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((a[1] - 1.0 / 3.0).abs() < 1e-15);

        let single = optimal_allocation(&inst(&[7.0], 1.0, 1.0)).unwrap();
        assert_eq!(single, vec![1.0]);

        let equal = optimal_allocation(&inst(&[3.0; 5], 1.0, 1.0)).unwrap();
        for &f in &equal {
            assert!((f - 0.2).abs() < 1e-15);
        }

        assert_eq!(
            optimal_allocation(&inst(&[1.0, 0.0], 1.0, 1.0)),
            Err(ContractError::NonpositiveBeta)
        );
        assert_eq!(
            optimal_allocation(&inst(&[1.0, f64::INFINITY], 1.0, 1.0)),
            Err(ContractError::NonpositiveBeta)
        );
    }

    #[test]
    fn kkt_examples() {
        let i = inst(&[4.0, 1.0, 9.0], 2.0, 5.0);
        let a = optimal_allocation(&i).unwrap();
        assert!(verify_kkt(&i, &a, 1e-9));
        // Uniform fractions over unequal betas break stationarity.
        assert!(!verify_kkt(&i, &[1.0 / 3.0; 3], 1e-9));
        // Zero fraction for an offloader is rejected outright.
        assert!(!verify_kkt(&i, &[0.5, 0.0, 0.5], 1e-9));
        // Empty instance passes vacuously.
        assert!(verify_kkt(&inst(&[], 1.0, 1.0), &[], 1e-9));
    }

    #[test]
    fn objective_examples() {
        let i = inst(&[1.0], 1.0, 1.0);
        assert_eq!(allocation_objective(&i, &[1.0]).unwrap(), 1.0);

        let i2 = inst(&[4.0, 1.0], 1.0, 1.0);
        let j = allocation_objective(&i2, &[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((j - 9.0).abs() < 1e-12);
        assert_eq!(
            allocation_objective(&i2, &[1.0, 0.0]),
            Err(ContractError::ZeroAllocation)
        );
    }

    #[test]
    fn closed_form_energy_matches_objective() {
        let betas = [2.5, 0.4, 11.0, 7.3];
        let i = inst(&betas, 1.0, 2.0e7);
        let a = optimal_allocation(&i).unwrap();
        let j = allocation_objective(&i, &a).unwrap();
        let sigma: f64 = betas.iter().map(|&b| libm::sqrt(b)).sum();
        let closed = offload_energy_total(sigma, 2.0e7);
        assert!((j - closed).abs() < 1e-12 * closed);
        let member_sum: f64 = betas
            .iter()
            .map(|&b| offload_energy_member(libm::sqrt(b), sigma, 2.0e7))
            .sum();
        assert!((member_sum - closed).abs() < 1e-12 * closed);
    }

    #[test]
    fn optimum_beats_random_feasible_points() {
        let mut rng = Stream::new(99, Purpose::Decision, 0, 0);
        for _ in 0..200 {
            let n = 1 + rng.index(8);
            let betas: alloc::vec::Vec<f64> =
                (0..n).map(|_| rng.uniform_in(1e-3, 1e3)).collect();
            let i = inst(&betas, 1.0, 1.0);
            let a = optimal_allocation(&i).unwrap();
            let j_opt = allocation_objective(&i, &a).unwrap();
            for _ in 0..50 {
                // Random point on the open simplex.
                let raw: alloc::vec::Vec<f64> =
                    (0..n).map(|_| -libm::log(rng.uniform_open())).collect();
                let total: f64 = raw.iter().sum();
                let feas: alloc::vec::Vec<f64> = raw.iter().map(|&x| x / total).collect();
                let j = allocation_objective(&i, &feas).unwrap();
                assert!(j >= j_opt - 1e-12, "{j} < {j_opt}");
            }
        }
    }
}
