//! Monte Carlo ensembles over (N, parameter) grids.
//!
//! Each realization draws its noise from a private stream seeded by
//! `(master_seed, N, parameter index, realization index)`. Realizations run
//! through a rayon parallel map, are collected in index order and reduced
//! sequentially, so the statistics are bit-identical for any worker count.

pub mod exact;
pub mod fcs;
pub mod presets;
pub mod table1;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{
    binary_iid_samples, colored_samples, telegraph_held_samples, telegraph_realization,
    trace_to_schedule, white_samples, zero_sum_samples, ClippedGaussian, NoiseColor, NoiseTrace,
    ProtocolTiming, PulseSchedule, TelegraphSpec,
};
use crate::protocol::Protocol;
use crate::rng::{derive_seed, rng_from_seed, DetRng};

pub use exact::{binomial_gaussian_limit, binomial_pmf, exact_binary_mean};
pub use fcs::{
    fcs_estimate, moments_from_gf, poisson_generating_function, poisson_moment_report,
    zero_freq_psd_check, FcsConfig, GFEstimate, PoissonMomentReport, ZeroFreqReport,
};
pub use table1::{table1, Table1Row, TABLE1_CONFIGS, TABLE1_REFERENCE};

fn one() -> usize {
    1
}

/// How a binary telegraph trace is put on the sample grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TelegraphMode {
    /// Exponential waiting times, sampled at `sample_rate`.
    Continuous { sample_rate: f64 },
    /// Sampled every `hold` seconds and held on a `sample_rate` grid.
    Held { sample_rate: f64, hold: f64 },
    /// One sample per pulse window (𝒫 = 1).
    PerPulse,
}

/// Noise driving the detector, one variant per scenario family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// ± pairs of clipped-Gaussian magnitudes on [0, θ_max], fixed axis, 𝒫 = 1.
    ZeroSum { theta_max: f64, phi: f64 },
    /// Clipped-Gaussian pulse angles and axes. With `samples_per_pulse`
    /// 𝒫 > 1 each sample carries θ/𝒫 about its own axis.
    White {
        theta_lo: f64,
        theta_hi: f64,
        phi_lo: f64,
        phi_hi: f64,
        #[serde(default = "one")]
        samples_per_pulse: usize,
    },
    /// ±δθ per sample with switching rate κ = 1/param over a window of
    /// `total_time` seconds.
    Telegraph {
        delta_theta: f64,
        phi: f64,
        total_time: f64,
        mode: TelegraphMode,
    },
    /// Fixed angle θ; axis φ_j = clip(phase_scale·x_j, −π, π) with x a
    /// unit-variance colored sequence.
    ColoredPhase {
        color: NoiseColor,
        theta: f64,
        phase_scale: f64,
    },
    /// Independent equiprobable ±θ per pulse.
    BinaryIid { theta: f64, phi: f64 },
}

fn range(key: &'static str, lo: f64, hi: f64) -> Result<()> {
    ClippedGaussian::new(lo, hi)
        .map(|_| ())
        .map_err(|_| Error::invalid(key, format!("[{lo}, {hi}] is not a valid range")))
}

impl NoiseModel {
    fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::ZeroSum { theta_max, .. } => {
                range("theta_max", 0.0, theta_max)?;
            }
            NoiseModel::White {
                theta_lo,
                theta_hi,
                phi_lo,
                phi_hi,
                samples_per_pulse,
            } => {
                range("theta_hi", theta_lo, theta_hi)?;
                range("phi_hi", phi_lo, phi_hi)?;
                if samples_per_pulse == 0 {
                    return Err(Error::invalid("samples_per_pulse", "must be positive"));
                }
            }
            NoiseModel::Telegraph {
                total_time, mode, ..
            } => {
                if !(total_time > 0.0) {
                    return Err(Error::invalid("total_time", "must be positive"));
                }
                match mode {
                    TelegraphMode::Continuous { sample_rate }
                    | TelegraphMode::Held { sample_rate, .. }
                        if !(sample_rate > 0.0) =>
                    {
                        return Err(Error::invalid("sample_rate", "must be positive"));
                    }
                    _ => {}
                }
            }
            NoiseModel::ColoredPhase { phase_scale, .. } => {
                if !phase_scale.is_finite() {
                    return Err(Error::invalid("phase_scale", "must be finite"));
                }
            }
            NoiseModel::BinaryIid { .. } => {}
        }
        Ok(())
    }

    /// Whether the grid parameter is meaningful (it is κ⁻¹ in seconds for
    /// telegraph noise and ignored otherwise).
    pub fn uses_param(&self) -> bool {
        matches!(self, NoiseModel::Telegraph { .. })
    }

    /// True when every pulse window holds a whole number of 4π rotations
    /// for any switching pattern, i.e. δθ·𝒫/(4π) is an integer.
    pub fn transparency_anomaly(&self, n: usize) -> bool {
        let NoiseModel::Telegraph {
            delta_theta,
            total_time,
            mode,
            ..
        } = *self
        else {
            return false;
        };
        let per_pulse = match mode {
            TelegraphMode::Continuous { sample_rate } | TelegraphMode::Held { sample_rate, .. } => {
                total_time * sample_rate / n as f64
            }
            TelegraphMode::PerPulse => 1.0,
        };
        let ratio = delta_theta * per_pulse / (4.0 * PI);
        (ratio - ratio.round()).abs() < 1e-9
    }

    /// Draws one noise realization for an `n`-pulse protocol and slices it
    /// into pulses.
    pub fn realize(&self, n: usize, param: f64, rng: &mut DetRng) -> Result<PulseSchedule> {
        match *self {
            NoiseModel::ZeroSum { theta_max, phi } => {
                let thetas = zero_sum_samples(theta_max, n, rng)?;
                unit_window_schedule(&thetas, vec![phi; n], 1)
            }
            NoiseModel::White {
                theta_lo,
                theta_hi,
                phi_lo,
                phi_hi,
                samples_per_pulse,
            } => {
                let count = n * samples_per_pulse;
                let per = samples_per_pulse as f64;
                let thetas: Vec<f64> = white_samples(theta_lo, theta_hi, count, rng)?
                    .into_iter()
                    .map(|t| t / per)
                    .collect();
                let phis = white_samples(phi_lo, phi_hi, count, rng)?;
                unit_window_schedule(&thetas, phis, samples_per_pulse)
            }
            NoiseModel::Telegraph {
                delta_theta,
                phi,
                total_time,
                mode,
            } => {
                if !(param > 0.0 && param <= total_time * (1.0 + 1e-12)) {
                    return Err(Error::invalid(
                        "kappa_inverse",
                        format!("{param} s must lie in (0, T = {total_time} s]"),
                    ));
                }
                let kappa = 1.0 / param;
                let timing = ProtocolTiming::tiled(n, total_time)?;
                let (sample_rate, values) = match mode {
                    TelegraphMode::Continuous { sample_rate } => {
                        let spec = TelegraphSpec::new(kappa, delta_theta, sample_rate)?;
                        (sample_rate, telegraph_realization(&spec, total_time, rng)?.values)
                    }
                    TelegraphMode::Held { sample_rate, hold } => {
                        let spec = TelegraphSpec::new(kappa, delta_theta, sample_rate)?;
                        (sample_rate, telegraph_held_samples(&spec, total_time, hold, rng)?)
                    }
                    TelegraphMode::PerPulse => {
                        let sample_rate = n as f64 / total_time;
                        let spec = TelegraphSpec::new(kappa, delta_theta, sample_rate)?;
                        (
                            sample_rate,
                            telegraph_held_samples(&spec, total_time, timing.tau_b(), rng)?,
                        )
                    }
                };
                let chi = vec![phi; values.len()];
                let trace = NoiseTrace::from_angles(sample_rate, &values, chi)?;
                trace_to_schedule(&trace, &timing)
            }
            NoiseModel::ColoredPhase {
                color,
                theta,
                phase_scale,
            } => {
                let len = n.next_power_of_two().max(64);
                let xs = colored_samples(color, len, rng)?;
                let phis = xs[..n]
                    .iter()
                    .map(|x| (phase_scale * x).clamp(-PI, PI))
                    .collect();
                unit_window_schedule(&vec![theta; n], phis, 1)
            }
            NoiseModel::BinaryIid { theta, phi } => {
                let thetas = binary_iid_samples(theta, n, rng);
                unit_window_schedule(&thetas, vec![phi; n], 1)
            }
        }
    }
}

/// Pulse windows of unit length sampled at `per_pulse` samples per window.
fn unit_window_schedule(delta_theta: &[f64], chi: Vec<f64>, per_pulse: usize) -> Result<PulseSchedule> {
    let n = delta_theta.len() / per_pulse;
    let trace = NoiseTrace::from_angles(per_pulse as f64, delta_theta, chi)?;
    trace_to_schedule(&trace, &ProtocolTiming::tiled(n, n as f64)?)
}

fn default_params() -> Vec<f64> {
    vec![0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub protocol: Protocol,
    pub noise: NoiseModel,
    pub n_values: Vec<usize>,
    /// Second grid axis; κ⁻¹ in seconds for telegraph noise.
    #[serde(default = "default_params")]
    pub params: Vec<f64>,
    pub realizations: usize,
    pub master_seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::invalid("realizations", "must be at least 1"));
        }
        if self.n_values.is_empty() {
            return Err(Error::invalid("n_values", "must not be empty"));
        }
        if let Some(&bad) = self.n_values.iter().find(|&&n| n == 0) {
            return Err(Error::invalid("n_values", format!("N = {bad} is not allowed")));
        }
        if self.params.is_empty() {
            return Err(Error::invalid("params", "must not be empty"));
        }
        self.noise.validate()
    }
}

/// Mean, variance (unbiased) and standard deviation of the marker at one
/// grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n: usize,
    pub param: f64,
    pub mean: f64,
    pub variance: f64,
    pub std: f64,
    pub count: usize,
    pub anomaly: bool,
}

impl EnsembleStats {
    /// Two-pass statistics over samples in the given order.
    pub fn from_samples(n: usize, param: f64, samples: &[f64]) -> Self {
        let count = samples.len();
        let mean = samples.iter().sum::<f64>() / count as f64;
        let variance = if count > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        EnsembleStats {
            n,
            param,
            mean,
            variance,
            std: variance.sqrt(),
            count,
            anomaly: false,
        }
    }

    pub fn standard_error(&self) -> f64 {
        self.std / (self.count as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub protocol: Protocol,
    pub master_seed: u64,
    pub points: Vec<EnsembleStats>,
}

impl SweepResult {
    pub fn point(&self, n: usize, param: f64) -> Option<&EnsembleStats> {
        self.points.iter().find(|p| p.n == n && p.param == param)
    }

    /// Points at one parameter value, in N order of the grid.
    pub fn row(&self, param: f64) -> Vec<&EnsembleStats> {
        self.points.iter().filter(|p| p.param == param).collect()
    }
}

/// Marker values of all realizations at one grid point, in index order.
pub fn realization_markers(config: &SweepConfig, n: usize, param_idx: usize) -> Result<Vec<f64>> {
    let param = config.params[param_idx];
    (0..config.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(config.master_seed, &[n as u64, param_idx as u64, r as u64]);
            let mut rng = rng_from_seed(seed);
            let schedule = config.noise.realize(n, param, &mut rng)?;
            Ok(config.protocol.run(&schedule)?.marker)
        })
        .collect::<Result<Vec<f64>>>()
        .map_err(|e| e.at_grid_point(n, param))
}

/// Ensemble statistics for every (N, param) pair, N varying fastest.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut points = Vec::with_capacity(config.n_values.len() * config.params.len());
    for (pi, &param) in config.params.iter().enumerate() {
        for &n in &config.n_values {
            let markers = realization_markers(config, n, pi)?;
            let mut stats = EnsembleStats::from_samples(n, param, &markers);
            stats.anomaly = config.noise.transparency_anomaly(n);
            points.push(stats);
        }
    }
    Ok(SweepResult {
        protocol: config.protocol,
        master_seed: config.master_seed,
        points,
    })
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(config: &SweepConfig, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    pool.install(|| run_sweep(config))
}

/// Binary-noise sweep over N and κ⁻¹ with held switching; anomaly rows
/// (δθ·𝒫/(4π) integral) are flagged in the result.
pub fn sweep_kappa_n(
    protocol: Protocol,
    delta_theta: f64,
    kappa_inverse: &[f64],
    n_values: &[usize],
    realizations: usize,
    master_seed: u64,
) -> Result<SweepResult> {
    let total = presets::BINARY_TOTAL_TIME;
    if let Some(&bad) = kappa_inverse.iter().find(|&&k| !(k > 0.0 && k <= total)) {
        return Err(Error::invalid(
            "kappa_inverse",
            format!("{bad} s lies outside (0, T = {total} s]"),
        ));
    }
    run_sweep(&SweepConfig {
        protocol,
        noise: presets::held_binary_noise(delta_theta),
        n_values: n_values.to_vec(),
        params: kappa_inverse.to_vec(),
        realizations,
        master_seed,
    })
}

/// cIFM and pIFM under ±π telegraph noise with one sample per pulse, for
/// κ⁻¹ given as fractions of T.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub cifm: SweepResult,
    pub pifm: SweepResult,
}

pub fn clustering_sweep(
    n_values: &[usize],
    kappa_inverse_fraction: &[f64],
    realizations: usize,
    master_seed: u64,
) -> Result<ClusteringResult> {
    if let Some(&bad) = kappa_inverse_fraction.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::invalid("kappa_inverse", format!("fraction {bad} of T outside (0, 1]")));
    }
    let total = presets::CLUSTERING_TOTAL_TIME;
    let config = |protocol| SweepConfig {
        protocol,
        noise: presets::per_pulse_pi_telegraph(),
        n_values: n_values.to_vec(),
        params: kappa_inverse_fraction.iter().map(|f| f * total).collect(),
        realizations,
        master_seed,
    };
    Ok(ClusteringResult {
        cifm: run_sweep(&config(Protocol::Cifm))?,
        pifm: run_sweep(&config(Protocol::Pifm))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(protocol: Protocol, noise: NoiseModel) -> SweepConfig {
        SweepConfig {
            protocol,
            noise,
            n_values: vec![2, 5],
            params: vec![0.0],
            realizations: 20,
            master_seed: 3,
        }
    }

    #[test]
    fn zero_noise_gives_zero_marker() {
        let noise = NoiseModel::White {
            theta_lo: 0.0,
            theta_hi: 0.0,
            phi_lo: 0.0,
            phi_hi: 0.0,
            samples_per_pulse: 3,
        };
        for p in Protocol::ALL {
            let res = run_sweep(&small(p, noise.clone())).unwrap();
            for pt in &res.points {
                assert!(pt.mean.abs() < 1e-12 && pt.variance < 1e-20);
            }
        }
    }

    #[test]
    fn stats_of_known_samples() {
        let s = EnsembleStats::from_samples(1, 0.0, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(EnsembleStats::from_samples(1, 0.0, &[0.3]).variance, 0.0);
    }

    #[test]
    fn config_validation() {
        let noise = NoiseModel::BinaryIid { theta: 1.0, phi: 0.0 };
        let mut c = small(Protocol::Cifm, noise);
        c.realizations = 0;
        assert!(run_sweep(&c).is_err());
        c.realizations = 1;
        c.n_values.clear();
        assert!(run_sweep(&c).is_err());
    }

    #[test]
    fn errors_carry_grid_point() {
        let c = SweepConfig {
            n_values: vec![1],
            ..small(Protocol::Qubit, NoiseModel::ZeroSum { theta_max: 1.0, phi: 0.0 })
        };
        match run_sweep(&c) {
            Err(Error::GridPoint { n: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let c = small(
            Protocol::Pifm,
            NoiseModel::White {
                theta_lo: 0.0,
                theta_hi: PI,
                phi_lo: -PI,
                phi_hi: PI,
                samples_per_pulse: 2,
            },
        );
        let a = run_sweep_with_threads(&c, 1).unwrap();
        let b = run_sweep_with_threads(&c, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn anomaly_flags_follow_ratio() {
        let strong = presets::held_binary_noise(PI / 250.0);
        let flagged: Vec<usize> = (1..=40).filter(|&n| strong.transparency_anomaly(n)).collect();
        assert_eq!(flagged, vec![1, 2, 5, 10]);
        let weak = presets::held_binary_noise(PI / 1000.0);
        assert!((1..=40).all(|n| !weak.transparency_anomaly(n)));
    }

    #[test]
    fn colored_phase_schedule_shape() {
        let noise = NoiseModel::ColoredPhase {
            color: NoiseColor::Pink,
            theta: PI / 2.0,
            phase_scale: PI / 3.0,
        };
        let s = noise.realize(7, 0.0, &mut rng_from_seed(1)).unwrap();
        assert_eq!(s.n(), 7);
        for p in s.pulses() {
            assert_eq!(p.len(), 1);
            assert_eq!(p.segments()[0].delta_theta, PI / 2.0);
            assert!(p.segments()[0].chi.abs() <= PI);
        }
    }
}
