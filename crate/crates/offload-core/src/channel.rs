//! Uplink channel model: path loss with log-normal shadowing, Rayleigh
//! small-scale fading, OFDMA rate, and the per-device coefficient `beta`
//! that the bandwidth allocator works with.
//!
//! Channels are redrawn independently each slot. Rayleigh amplitudes come
//! from the inverse CDF `h = alpha * sqrt(-2 ln(1 - U))`, which is exact and
//! rejection-free.

use crate::rng::Stream;

/// Speed of light as used by the path-loss reference term (m/s).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Parameters of the large-scale loss model.
#[derive(Debug, Clone, Copy)]
pub struct LossParams {
    pub carrier_freq: f64,
    pub ref_distance: f64,
    pub path_loss_exp: f64,
    /// Shadowing standard deviation in dB; 0 disables shadowing.
    pub shadow_sigma_db: f64,
}

/// One slot's channel realization for a device-server link.
#[derive(Debug, Clone, Copy)]
pub struct ChannelRealization {
    pub small_scale: f64,
    pub large_scale: f64,
    pub gain: f64,
    pub distance: f64,
}

impl ChannelRealization {
    pub fn draw(distance: f64, params: &LossParams, alpha: f64, rng: &mut Stream) -> Self {
        let shadow_db = if params.shadow_sigma_db > 0.0 {
            params.shadow_sigma_db * rng.gaussian()
        } else {
            0.0
        };
        let (large_scale, _clamped) = large_scale_loss(distance, params, shadow_db);
        let small_scale = sample_small_scale(alpha, rng);
        ChannelRealization {
            small_scale,
            large_scale,
            gain: small_scale * small_scale / large_scale,
            distance,
        }
    }
}

/// Large-scale loss `(4 pi d0 fc / C)^2 * (d / d0)^beta * 10^(chi / 10)`.
///
/// Distances below the reference distance are clamped to it (the model is
/// undefined there); the returned flag reports whether clamping happened so
/// the caller can log it once per run.
pub fn large_scale_loss(distance: f64, params: &LossParams, shadow_db: f64) -> (f64, bool) {
    let clamped = distance < params.ref_distance;
    let d = if clamped { params.ref_distance } else { distance };
    let ref_term = 4.0 * core::f64::consts::PI * params.ref_distance * params.carrier_freq
        / SPEED_OF_LIGHT;
    let shadow = libm::pow(10.0, shadow_db / 10.0);
    let loss = ref_term * ref_term * libm::pow(d / params.ref_distance, params.path_loss_exp) * shadow;
    (loss, clamped)
}

/// Rayleigh amplitude with scale `alpha`, drawn through the inverse CDF.
pub fn sample_small_scale(alpha: f64, rng: &mut Stream) -> f64 {
    debug_assert!(alpha > 0.0);
    let u = rng.uniform();
    alpha * libm::sqrt(-2.0 * libm::log(1.0 - u))
}

/// OFDMA uplink rate `a * B * log2(1 + p g / N0)` in bits/s.
///
/// `fraction = 0` yields rate zero; callers must not divide by it.
pub fn transmission_rate(fraction: f64, bandwidth: f64, power: f64, gain: f64, noise: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&fraction));
    debug_assert!(bandwidth > 0.0 && noise > 0.0);
    fraction * bandwidth * libm::log2(1.0 + power * gain / noise)
}

/// Allocation-independent coefficient `beta = p s / log2(1 + p g / N0)`.
///
/// The uplink energy of an offloader is exactly `beta / (a B)`, so `beta`
/// alone ranks devices for the bandwidth split. A vanishing SNR makes the
/// link unusable; that is signalled as `f64::INFINITY`, and the offloading
/// layer must then treat offloading as infeasible for this device this slot.
pub fn beta_coefficient(power: f64, size: f64, gain: f64, noise: f64) -> f64 {
    let snr = power * gain / noise;
    if snr <= 0.0 {
        return f64::INFINITY;
    }
    power * size / libm::log2(1.0 + snr)
}

/// True when `beta` marks a usable link.
pub fn link_reachable(beta: f64) -> bool {
    beta.is_finite()
}
