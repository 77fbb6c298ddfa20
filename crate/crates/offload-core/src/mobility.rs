//! Gauss-Markov mobility.
//!
//! Velocity is an AR(1) process around a per-device mean:
//!
//! ```text
//! v(t+1) = w * v(t) + (1 - w) * v_mean + sqrt(1 - w^2) * noise,  noise ~ N(0, sigma^2) per axis
//! q(t+1) = q(t) + v(t) * delta
//! ```
//!
//! The position update uses the pre-update velocity. Motion is planar; the
//! channel layer clamps distances below the path-loss reference distance, so
//! no boundary reflection is applied here.

use crate::rng::Stream;

/// Kinematic state of one device plus its process parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityState {
    pub velocity: [f64; 2],
    pub position: [f64; 2],
    pub mean_velocity: [f64; 2],
    /// Memory degree `w` in `[0, 1]`; 1 keeps velocity frozen, 0 forgets it.
    pub memory: f64,
    /// Asymptotic per-axis standard deviation of velocity.
    pub noise_sigma: f64,
}

/// Advances one slot of duration `delta`, drawing the two per-axis Gaussian
/// noise terms from `rng`.
pub fn step_mobility(state: &MobilityState, delta: f64, rng: &mut Stream) -> MobilityState {
    debug_assert!((0.0..=1.0).contains(&state.memory));
    debug_assert!(state.noise_sigma >= 0.0);
    let w = state.memory;
    let noise_gain = libm::sqrt((1.0 - w * w).max(0.0)) * state.noise_sigma;
    let (gx, gy) = rng.gaussian_pair();
    let velocity = [
        w * state.velocity[0] + (1.0 - w) * state.mean_velocity[0] + noise_gain * gx,
        w * state.velocity[1] + (1.0 - w) * state.mean_velocity[1] + noise_gain * gy,
    ];
    let position = [
        state.position[0] + state.velocity[0] * delta,
        state.position[1] + state.velocity[1] * delta,
    ];
    MobilityState {
        velocity,
        position,
        ..state.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Purpose;

    fn state(v: [f64; 2], q: [f64; 2], mean: [f64; 2], w: f64, sigma: f64) -> MobilityState {
        MobilityState {
            velocity: v,
            position: q,
            mean_velocity: mean,
            memory: w,
            noise_sigma: sigma,
        }
    }

    #[test]
    fn full_memory_freezes_velocity() {
        let mut rng = Stream::new(1, Purpose::Mobility, 0, 0);
        let s = state([2.0, -1.0], [0.0, 0.0], [5.0, 5.0], 1.0, 3.0);
        let s2 = step_mobility(&s, 1.0, &mut rng);
        assert_eq!(s2.velocity, [2.0, -1.0]);
    }

    #[test]
    fn zero_memory_zero_noise_jumps_to_mean() {
        let mut rng = Stream::new(1, Purpose::Mobility, 0, 0);
        let s = state([2.0, -1.0], [0.0, 0.0], [5.0, 4.0], 0.0, 0.0);
        let s2 = step_mobility(&s, 1.0, &mut rng);
        assert_eq!(s2.velocity, [5.0, 4.0]);
    }

    #[test]
    fn position_uses_pre_update_velocity() {
        let mut rng = Stream::new(1, Purpose::Mobility, 0, 0);
        let s = state([3.0, 4.0], [0.0, 0.0], [0.0, 0.0], 0.5, 10.0);
        let s2 = step_mobility(&s, 1.0, &mut rng);
        assert_eq!(s2.position, [3.0, 4.0]);
    }

    #[test]
    fn noiseless_velocity_converges_geometrically() {
        let mut rng = Stream::new(1, Purpose::Mobility, 0, 0);
        let w = 0.7;
        let mean = [1.0, -2.0];
        let mut s = state([6.0, 3.0], [0.0, 0.0], mean, w, 0.0);
        let d0 = libm::hypot(s.velocity[0] - mean[0], s.velocity[1] - mean[1]);
        for t in 1..=100u32 {
            s = step_mobility(&s, 1.0, &mut rng);
            let d = libm::hypot(s.velocity[0] - mean[0], s.velocity[1] - mean[1]);
            let expected = libm::pow(w, t as f64) * d0;
            assert!(
                (d - expected).abs() <= 1e-9 * (1.0 + expected),
                "step {t}: {d} vs {expected}"
            );
        }
    }

    #[test]
    fn sample_mean_tracks_asymptotic_mean() {
        let mut rng = Stream::new(9, Purpose::Mobility, 2, 0);
        let w = 0.5;
        let sigma = 2.0;
        let mean = [1.5, -0.5];
        let mut s = state(mean, [0.0, 0.0], mean, w, sigma);
        let n = 100_000;
        let mut acc = [0.0f64; 2];
        for _ in 0..n {
            s = step_mobility(&s, 1.0, &mut rng);
            acc[0] += s.velocity[0];
            acc[1] += s.velocity[1];
        }
        // AR(1) sample-mean standard error: sigma / sqrt(n) * sqrt((1+w)/(1-w)).
        let se = sigma / libm::sqrt(n as f64) * libm::sqrt((1.0 + w) / (1.0 - w));
        for axis in 0..2 {
            let m = acc[axis] / n as f64;
            assert!(
                (m - mean[axis]).abs() < 3.0 * se,
                "axis {axis}: {m} vs {} (se {se})",
                mean[axis]
            );
        }
    }
}
