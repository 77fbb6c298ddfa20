//! Scenario configuration, entity construction, and task generation.
//!
//! `SimConfig` is the single source of truth for a run: topology, radio and
//! compute constants, queue bounds, the control weight `V`, the policy, and
//! the seed. `build_world` turns it into a fully initialized `World`:
//! servers on a grid over the area, each covering a fixed set of devices
//! placed at a uniform angle and uniform distance from their home server.
//!
//! Randomness is addressed, not sequential: every draw is keyed by
//! `(seed, purpose, entity, slot)`, so identical configs produce
//! bit-identical worlds and runs regardless of evaluation order or thread
//! count.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::channel::LossParams;
use crate::energy::{Task, UdProfile};
use crate::error::ConfigError;
use crate::mobility::MobilityState;
use crate::queueing::ServerState;
use crate::rng::{Purpose, Stream};

/// Decision policy run by the orchestrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Policy {
    /// The online joint controller: capacity-swept two-stage decisions under
    /// the drift-plus-penalty objective.
    #[serde(rename = "OJCTA")]
    Ojcta,
    /// Local computing only.
    #[serde(rename = "LC")]
    Lc,
    /// Uniformly random offload and cloud bits, truncated to capacity.
    #[serde(rename = "RO")]
    Ro,
    /// Energy-first: full-capacity matching, queue state ignored.
    #[serde(rename = "ECF")]
    Ecf,
    /// Per-slot hard delay caps instead of the long-term constraint.
    #[serde(rename = "SSC")]
    Ssc,
    /// No cloud collaboration: edge-only two-stage decisions.
    #[serde(rename = "NCC")]
    Ncc,
    /// Genetic search over the joint decision bits.
    #[serde(rename = "GJTORA")]
    Gjtora,
}

impl Policy {
    pub const ALL: [Policy; 7] = [
        Policy::Ojcta,
        Policy::Lc,
        Policy::Ro,
        Policy::Ecf,
        Policy::Ssc,
        Policy::Ncc,
        Policy::Gjtora,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Ojcta => "OJCTA",
            Policy::Lc => "LC",
            Policy::Ro => "RO",
            Policy::Ecf => "ECF",
            Policy::Ssc => "SSC",
            Policy::Ncc => "NCC",
            Policy::Gjtora => "GJTORA",
        }
    }

    /// Stable tag for decision-stream addressing.
    pub fn tag(self) -> u64 {
        match self {
            Policy::Ojcta => 1,
            Policy::Lc => 2,
            Policy::Ro => 3,
            Policy::Ecf => 4,
            Policy::Ssc => 5,
            Policy::Ncc => 6,
            Policy::Gjtora => 7,
        }
    }

    pub fn parse(name: &str) -> Option<Policy> {
        Policy::ALL.iter().copied().find(|p| p.name() == name)
    }
}

/// Full simulation configuration. Serialized form mirrors these field names;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub num_servers: u32,
    pub uds_per_server: u32,
    /// Side of the square deployment area (m).
    pub area_side: f64,
    /// Number of slots to simulate.
    pub horizon: u32,
    /// Slot duration (s).
    pub slot_duration: f64,
    /// Energy/queue trade-off weight `V`.
    pub lyapunov_v: f64,
    /// Max simultaneous offloaders per server.
    pub connection_capacity: u32,
    /// Server bandwidth (Hz).
    pub bandwidth: f64,
    /// Server CPU speed (cycles/s).
    pub server_cpu: f64,
    /// Server-to-cloud rate (bits/s).
    pub cloud_rate: f64,
    /// Edge-queue delay bound (slots).
    pub delay_bound_edge: f64,
    /// Cloud-queue delay bound (slots).
    pub delay_bound_cloud: f64,
    /// Computation intensity (cycles/bit).
    pub computation_intensity: f64,
    /// Task size range (bits), inclusive.
    pub task_size_range: [f64; 2],
    /// Device CPU range (cycles/s), inclusive.
    pub ud_cpu_range: [f64; 2],
    /// Device transmit power range (W), inclusive.
    pub transmit_power_range: [f64; 2],
    /// Effective switched capacitance coefficient.
    pub capacitance: f64,
    /// Noise power (W).
    pub noise_power: f64,
    /// Carrier frequency (Hz).
    pub carrier_freq: f64,
    /// Path-loss reference distance (m).
    pub ref_distance: f64,
    /// Path-loss exponent.
    pub path_loss_exp: f64,
    /// Shadowing standard deviation (dB); 0 disables shadowing.
    pub shadow_sigma: f64,
    /// Rayleigh fading scale.
    pub rayleigh_alpha: f64,
    /// Velocity memory degree in `[0, 1]`.
    pub mobility_memory: f64,
    /// Asymptotic velocity standard deviation (m/s).
    pub mobility_sigma: f64,
    /// Asymptotic mean speed (m/s); per-device direction is random.
    pub mean_speed: f64,
    /// Initial device distance from its home server (m), inclusive.
    pub distance_range: [f64; 2],
    pub rng_seed: u64,
    pub policy: Policy,
    /// Start the matching from a random assignment instead of all-local.
    pub random_matching_init: bool,
    /// Sample the rounding rule with probability `rho1` instead of the
    /// deterministic threshold.
    pub randomized_rounding: bool,
}

impl Default for SimConfig {
    /// Full-scale defaults: 4 servers and a cloud in a 500 x 500 m area,
    /// 50 devices per server, 200 one-second slots.
    fn default() -> Self {
        Self {
            num_servers: 4,
            uds_per_server: 50,
            area_side: 500.0,
            horizon: 200,
            slot_duration: 1.0,
            lyapunov_v: 10.0,
            connection_capacity: 30,
            bandwidth: 20.0e6,
            server_cpu: 5.0e9,
            cloud_rate: 8.0e6,
            delay_bound_edge: 5.0,
            delay_bound_cloud: 5.0,
            computation_intensity: 1000.0,
            task_size_range: [1.0e4, 1.0e6],
            ud_cpu_range: [1.0e9, 2.0e9],
            transmit_power_range: [0.1, 0.5],
            capacitance: 1.0e-28,
            // -98 dBm.
            noise_power: 1.584_893_192_461_114e-13,
            carrier_freq: 2.4e9,
            ref_distance: 1.0,
            path_loss_exp: 3.0,
            shadow_sigma: 4.0,
            rayleigh_alpha: core::f64::consts::FRAC_1_SQRT_2,
            mobility_memory: 0.5,
            mobility_sigma: 0.5,
            mean_speed: 1.0,
            distance_range: [50.0, 500.0],
            rng_seed: 1,
            policy: Policy::Ojcta,
            random_matching_init: false,
            randomized_rounding: false,
        }
    }
}

impl SimConfig {
    /// Small profile for fast paired experiments: 2 servers, 20 devices
    /// each, 50 slots, with service rates scaled down so the offered load
    /// genuinely contends for edge and cloud capacity.
    pub fn desk_profile() -> Self {
        Self {
            num_servers: 2,
            uds_per_server: 20,
            horizon: 50,
            connection_capacity: 12,
            server_cpu: 2.5e9,
            cloud_rate: 2.5e6,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn range_ok(field: &'static str, r: [f64; 2], lo_min: f64) -> Result<(), ConfigError> {
            if !(r[0].is_finite() && r[1].is_finite()) || r[0] < lo_min || r[0] > r[1] {
                return Err(ConfigError::new(
                    field,
                    "range must be finite with min <= max and nonnegative",
                ));
            }
            Ok(())
        }
        fn positive(field: &'static str, x: f64) -> Result<(), ConfigError> {
            if !(x > 0.0) || !x.is_finite() {
                return Err(ConfigError::new(field, "must be strictly positive"));
            }
            Ok(())
        }
        positive("area_side", self.area_side)?;
        positive("slot_duration", self.slot_duration)?;
        positive("bandwidth", self.bandwidth)?;
        positive("server_cpu", self.server_cpu)?;
        positive("cloud_rate", self.cloud_rate)?;
        positive("computation_intensity", self.computation_intensity)?;
        positive("capacitance", self.capacitance)?;
        positive("noise_power", self.noise_power)?;
        positive("carrier_freq", self.carrier_freq)?;
        positive("ref_distance", self.ref_distance)?;
        positive("rayleigh_alpha", self.rayleigh_alpha)?;
        if self.num_servers == 0 {
            return Err(ConfigError::new("num_servers", "need at least one server"));
        }
        if !(0.0..=1.0).contains(&self.mobility_memory) {
            return Err(ConfigError::new("mobility_memory", "must lie in [0, 1]"));
        }
        if self.mobility_sigma < 0.0 || !self.mobility_sigma.is_finite() {
            return Err(ConfigError::new("mobility_sigma", "must be nonnegative"));
        }
        if self.mean_speed < 0.0 || !self.mean_speed.is_finite() {
            return Err(ConfigError::new("mean_speed", "must be nonnegative"));
        }
        if self.lyapunov_v < 0.0 || !self.lyapunov_v.is_finite() {
            return Err(ConfigError::new("lyapunov_v", "must be nonnegative"));
        }
        if self.shadow_sigma < 0.0 || !self.shadow_sigma.is_finite() {
            return Err(ConfigError::new("shadow_sigma", "must be nonnegative"));
        }
        if self.path_loss_exp < 0.0 || !self.path_loss_exp.is_finite() {
            return Err(ConfigError::new("path_loss_exp", "must be nonnegative"));
        }
        if self.delay_bound_edge < 0.0 {
            return Err(ConfigError::new("delay_bound_edge", "must be nonnegative"));
        }
        if self.delay_bound_cloud < 0.0 {
            return Err(ConfigError::new("delay_bound_cloud", "must be nonnegative"));
        }
        range_ok("task_size_range", self.task_size_range, 0.0)?;
        range_ok("ud_cpu_range", self.ud_cpu_range, f64::MIN_POSITIVE)?;
        range_ok("transmit_power_range", self.transmit_power_range, f64::MIN_POSITIVE)?;
        range_ok("distance_range", self.distance_range, 0.0)?;
        Ok(())
    }

    pub fn loss_params(&self) -> LossParams {
        LossParams {
            carrier_freq: self.carrier_freq,
            ref_distance: self.ref_distance,
            path_loss_exp: self.path_loss_exp,
            shadow_sigma_db: self.shadow_sigma,
        }
    }

    /// Total device count across servers.
    pub fn total_uds(&self) -> u32 {
        self.num_servers * self.uds_per_server
    }
}

/// One device: identity, placement, and static profile. Its task for the
/// current slot is sampled by the slot pipeline, not stored here.
#[derive(Debug, Clone, PartialEq)]
pub struct UdState {
    /// Global device id.
    pub id: u32,
    /// Home server index; fixed for the whole run.
    pub home: u32,
    pub profile: UdProfile,
    pub mobility: MobilityState,
}

/// Full mutable simulation state.
#[derive(Debug, Clone)]
pub struct World {
    pub config: SimConfig,
    /// Next slot to execute, 1-based.
    pub slot: u32,
    pub servers: Vec<ServerState>,
    pub server_positions: Vec<[f64; 2]>,
    pub uds: Vec<UdState>,
    /// Links whose distance had to be clamped to the reference distance.
    pub clamp_events: u64,
}

impl World {
    /// Device ids covered by server `m`, in id order.
    pub fn coverage(&self, server: u32) -> impl Iterator<Item = &UdState> {
        self.uds.iter().filter(move |ud| ud.home == server)
    }
}

/// Grid positions for `n` servers over a square of side `side`.
fn server_grid(n: u32, side: f64) -> Vec<[f64; 2]> {
    let cols = libm::ceil(libm::sqrt(n as f64)) as u32;
    let rows = n.div_ceil(cols);
    (0..n)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            [
                side * (c as f64 + 0.5) / cols as f64,
                side * (r as f64 + 0.5) / rows as f64,
            ]
        })
        .collect()
}

/// Builds the initial world: validates the config, places servers and
/// devices, and draws the static device profiles.
pub fn build_world(config: &SimConfig) -> Result<World, ConfigError> {
    config.validate()?;
    let server_positions = server_grid(config.num_servers, config.area_side);
    let servers = (0..config.num_servers)
        .map(|_| {
            ServerState::new(
                config.server_cpu,
                config.cloud_rate,
                config.bandwidth,
                config.connection_capacity,
                config.delay_bound_edge,
                config.delay_bound_cloud,
            )
        })
        .collect();

    let mut uds = Vec::with_capacity(config.total_uds() as usize);
    for home in 0..config.num_servers {
        for k in 0..config.uds_per_server {
            let id = home * config.uds_per_server + k;
            let mut place = Stream::new(config.rng_seed, Purpose::Placement, id as u64, 0);
            let angle = place.uniform_in(0.0, 2.0 * core::f64::consts::PI);
            let dist = place.uniform_in(config.distance_range[0], config.distance_range[1]);
            let center = server_positions[home as usize];
            let position = [
                center[0] + dist * libm::cos(angle),
                center[1] + dist * libm::sin(angle),
            ];
            let dir = place.uniform_in(0.0, 2.0 * core::f64::consts::PI);
            let mean_velocity = [
                config.mean_speed * libm::cos(dir),
                config.mean_speed * libm::sin(dir),
            ];

            let mut prof = Stream::new(config.rng_seed, Purpose::Profile, id as u64, 0);
            let profile = UdProfile {
                cpu: prof.uniform_in(config.ud_cpu_range[0], config.ud_cpu_range[1]),
                capacitance: config.capacitance,
                transmit_power: prof
                    .uniform_in(config.transmit_power_range[0], config.transmit_power_range[1]),
            };
            uds.push(UdState {
                id,
                home,
                profile,
                mobility: MobilityState {
                    velocity: mean_velocity,
                    position,
                    mean_velocity,
                    memory: config.mobility_memory,
                    noise_sigma: config.mobility_sigma,
                },
            });
        }
    }

    Ok(World {
        config: config.clone(),
        slot: 1,
        servers,
        server_positions,
        uds,
        clamp_events: 0,
    })
}

/// Draws the device's task for one slot.
pub fn sample_task(config: &SimConfig, rng: &mut Stream) -> Task {
    Task {
        size: rng.uniform_in(config.task_size_range[0], config.task_size_range[1]),
        intensity: config.computation_intensity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_world_shape() {
        let cfg = SimConfig::default();
        let world = build_world(&cfg).unwrap();
        assert_eq!(world.servers.len(), 4);
        assert_eq!(world.uds.len(), 200);
        for m in 0..4 {
            assert_eq!(world.coverage(m).count(), 50);
        }
        // Placement distances honor the configured range.
        for ud in &world.uds {
            let c = world.server_positions[ud.home as usize];
            let d = libm::hypot(ud.mobility.position[0] - c[0], ud.mobility.position[1] - c[1]);
            assert!(
                d >= cfg.distance_range[0] - 1e-9 && d <= cfg.distance_range[1] + 1e-9,
                "{d}"
            );
        }
    }

    #[test]
    fn same_seed_same_world() {
        let cfg = SimConfig::desk_profile();
        let a = build_world(&cfg).unwrap();
        let b = build_world(&cfg).unwrap();
        assert_eq!(a.uds, b.uds);
    }

    #[test]
    fn zero_uds_per_server_is_fine() {
        let cfg = SimConfig {
            uds_per_server: 0,
            ..SimConfig::desk_profile()
        };
        let world = build_world(&cfg).unwrap();
        assert!(world.uds.is_empty());
    }

    #[test]
    fn invalid_config_names_field() {
        let cfg = SimConfig {
            bandwidth: 0.0,
            ..SimConfig::default()
        };
        let err = build_world(&cfg).unwrap_err();
        assert_eq!(err.field, "bandwidth");

        let cfg = SimConfig {
            task_size_range: [5.0, 1.0],
            ..SimConfig::default()
        };
        assert_eq!(cfg.validate().unwrap_err().field, "task_size_range");

        let cfg = SimConfig {
            mobility_memory: 1.5,
            ..SimConfig::default()
        };
        assert_eq!(cfg.validate().unwrap_err().field, "mobility_memory");
    }

    #[test]
    fn task_sampling_bounds_and_degenerate_range() {
        let cfg = SimConfig::default();
        let mut rng = Stream::new(3, Purpose::TaskSize, 0, 1);
        for _ in 0..10_000 {
            let task = sample_task(&cfg, &mut rng);
            assert!(task.size >= 1.0e4 && task.size <= 1.0e6);
            assert_eq!(task.intensity, 1000.0);
        }
        let degenerate = SimConfig {
            task_size_range: [4.2e5, 4.2e5],
            ..cfg
        };
        let task = sample_task(&degenerate, &mut rng);
        assert_eq!(task.size, 4.2e5);
    }

    #[test]
    fn profiles_within_ranges() {
        let cfg = SimConfig::default();
        let world = build_world(&cfg).unwrap();
        for ud in &world.uds {
            assert!(ud.profile.cpu >= 1.0e9 && ud.profile.cpu <= 2.0e9);
            assert!(ud.profile.transmit_power >= 0.1 && ud.profile.transmit_power <= 0.5);
        }
    }

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(Policy::parse(p.name()), Some(p));
        }
        assert_eq!(Policy::parse("nope"), None);
    }
}
