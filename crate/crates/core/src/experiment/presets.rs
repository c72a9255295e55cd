//! Ready-made noise scenarios. All angles are full Bloch rotation angles.

use std::f64::consts::PI;

use super::{NoiseModel, SweepConfig, TelegraphMode};
use crate::noise::NoiseColor;
use crate::protocol::Protocol;

/// Pulse axis used by the amplitude-noise scenarios.
pub const AMPLITUDE_AXIS: f64 = -PI / 2.0;

pub const BINARY_TOTAL_TIME: f64 = 10e-6;
pub const BINARY_SAMPLE_RATE: f64 = 1e9;
/// Switching grid: at most 20 switches within T.
pub const BINARY_HOLD: f64 = BINARY_TOTAL_TIME / 20.0;
pub const BINARY_STRONG: f64 = PI / 250.0;
pub const BINARY_WEAK: f64 = PI / 1000.0;

pub const CLUSTERING_TOTAL_TIME: f64 = 10e-6;

fn n_range(lo: usize, hi: usize) -> Vec<usize> {
    (lo..=hi).collect()
}

/// Zero-sum amplitude noise, |θ| ≤ 2π.
pub fn zero_sum_amplitude(protocol: Protocol, realizations: usize, seed: u64) -> SweepConfig {
    SweepConfig {
        protocol,
        noise: NoiseModel::ZeroSum {
            theta_max: 2.0 * PI,
            phi: AMPLITUDE_AXIS,
        },
        n_values: n_range(2, 100),
        params: vec![0.0],
        realizations,
        master_seed: seed,
    }
}

/// Amplitude θ ∈ [0, 2π] and phase φ ∈ [−π, π], two samples per pulse.
pub fn amplitude_and_phase(protocol: Protocol, realizations: usize, seed: u64) -> SweepConfig {
    SweepConfig {
        protocol,
        noise: NoiseModel::White {
            theta_lo: 0.0,
            theta_hi: 2.0 * PI,
            phi_lo: -PI,
            phi_hi: PI,
            samples_per_pulse: 2,
        },
        n_values: n_range(1, 100),
        params: vec![0.0],
        realizations,
        master_seed: seed,
    }
}

/// Small amplitude θ ∈ [0, π/3] on a fixed axis.
pub fn small_amplitude(protocol: Protocol, realizations: usize, seed: u64) -> SweepConfig {
    SweepConfig {
        protocol,
        noise: NoiseModel::White {
            theta_lo: 0.0,
            theta_hi: PI / 3.0,
            phi_lo: AMPLITUDE_AXIS,
            phi_hi: AMPLITUDE_AXIS,
            samples_per_pulse: 1,
        },
        n_values: n_range(1, 100),
        params: vec![0.0],
        realizations,
        master_seed: seed,
    }
}

/// Phase noise φ ∈ [−π, π] at a constant amplitude θ.
pub fn phase_only(protocol: Protocol, theta: f64, realizations: usize, seed: u64) -> SweepConfig {
    SweepConfig {
        protocol,
        noise: NoiseModel::White {
            theta_lo: theta,
            theta_hi: theta,
            phi_lo: -PI,
            phi_hi: PI,
            samples_per_pulse: 1,
        },
        n_values: n_range(1, 100),
        params: vec![0.0],
        realizations,
        master_seed: seed,
    }
}

/// ±δθ per 1 ns sample over T = 10 μs, switching on a T/20 grid.
pub fn held_binary_noise(delta_theta: f64) -> NoiseModel {
    NoiseModel::Telegraph {
        delta_theta,
        phi: AMPLITUDE_AXIS,
        total_time: BINARY_TOTAL_TIME,
        mode: TelegraphMode::Held {
            sample_rate: BINARY_SAMPLE_RATE,
            hold: BINARY_HOLD,
        },
    }
}

pub fn binary_kappa_inverse_grid() -> Vec<f64> {
    [250.0, 25.0, 10.0, 5.0, 2.0, 1.0]
        .iter()
        .map(|d| BINARY_TOTAL_TIME / d)
        .collect()
}

/// ±π telegraph noise with one sample per pulse.
pub fn per_pulse_pi_telegraph() -> NoiseModel {
    NoiseModel::Telegraph {
        delta_theta: PI,
        phi: AMPLITUDE_AXIS,
        total_time: CLUSTERING_TOTAL_TIME,
        mode: TelegraphMode::PerPulse,
    }
}

/// κ⁻¹/T values spanning [0.1, 1].
pub fn clustering_kappa_inverse_fractions() -> Vec<f64> {
    (0..=9).map(|k| 0.1 + 0.1 * k as f64).collect()
}

/// θ = π/2 pulses whose axes follow colored noise scaled by π/3.
pub fn colored_phase_sweep(protocol: Protocol, color: NoiseColor, realizations: usize, seed: u64) -> SweepConfig {
    SweepConfig {
        protocol,
        noise: NoiseModel::ColoredPhase {
            color,
            theta: PI / 2.0,
            phase_scale: PI / 3.0,
        },
        n_values: n_range(1, 40),
        params: vec![0.0],
        realizations,
        master_seed: seed,
    }
}
