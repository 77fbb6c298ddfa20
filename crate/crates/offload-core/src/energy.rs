//! Per-slot device energy for local execution and uplink offloading.
//!
//! Local: `(1 - x) * zeta * f^2 * s * rho`. Offload: `x * p * s / r`. Binary
//! offloading means exactly one of the two is nonzero per device (both zero
//! for an empty task). Local execution is charged regardless of whether it
//! fits the slot; deadline misses are recorded as metrics, not enforced.

use crate::error::ContractError;

/// Static energy-relevant parameters of one device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UdProfile {
    /// CPU speed in cycles/s.
    pub cpu: f64,
    /// Effective switched capacitance coefficient.
    pub capacitance: f64,
    /// Uplink transmit power in W.
    pub transmit_power: f64,
}

/// One task: size in bits and computation intensity in cycles/bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub size: f64,
    pub intensity: f64,
}

/// Energy to compute the task locally; zero when the task is offloaded.
pub fn local_energy(profile: &UdProfile, task: &Task, offloaded: bool) -> f64 {
    if offloaded {
        0.0
    } else {
        profile.capacitance * profile.cpu * profile.cpu * task.size * task.intensity
    }
}

/// Energy to upload the task at rate `rate`; zero when computed locally.
pub fn offload_energy(
    transmit_power: f64,
    size: f64,
    rate: f64,
    offloaded: bool,
) -> Result<f64, ContractError> {
    if !offloaded {
        return Ok(0.0);
    }
    if rate <= 0.0 {
        return Err(ContractError::InfeasibleOffload);
    }
    Ok(transmit_power * size / rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROFILE: UdProfile = UdProfile {
        cpu: 1.0e9,
        capacitance: 1.0e-28,
        transmit_power: 0.1,
    };

    #[test]
    fn local_energy_examples() {
        let task = Task {
            size: 1.0e5,
            intensity: 1000.0,
        };
        assert_eq!(local_energy(&PROFILE, &task, true), 0.0);
        let e = local_energy(&PROFILE, &task, false);
        assert!((e - 0.01).abs() < 1e-15);
        let doubled = Task {
            size: 2.0e5,
            ..task
        };
        assert!((local_energy(&PROFILE, &doubled, false) - 2.0 * e).abs() < 1e-15);
    }

    #[test]
    fn offload_energy_examples() {
        assert_eq!(offload_energy(0.1, 1.0e6, 0.0, false).unwrap(), 0.0);
        let e = offload_energy(0.1, 1.0e6, 2.0e7, true).unwrap();
        assert!((e - 0.005).abs() < 1e-15);
        let faster = offload_energy(0.1, 1.0e6, 4.0e7, true).unwrap();
        assert!((faster - e / 2.0).abs() < 1e-15);
        assert_eq!(
            offload_energy(0.1, 1.0e6, 0.0, true),
            Err(ContractError::InfeasibleOffload)
        );
    }

    #[test]
    fn exactly_one_branch_nonzero() {
        let task = Task {
            size: 5.0e5,
            intensity: 1000.0,
        };
        for &offloaded in &[false, true] {
            let e_loc = local_energy(&PROFILE, &task, offloaded);
            let e_off = offload_energy(PROFILE.transmit_power, task.size, 1.0e7, offloaded).unwrap();
            assert!(
                (e_loc == 0.0) != (e_off == 0.0),
                "offloaded={offloaded}: {e_loc} {e_off}"
            );
        }
    }
}
