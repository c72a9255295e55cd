//! Counting statistics read out with the qubit detector.
//!
//! A realization is a Poisson number m of θ-events dropped into uniformly
//! random pulse slots. Scaling every pulse by λ and reading p_e from |g⟩ and
//! from (|g⟩+|e⟩)/√2 gives 1 − ℜΛ(λ) and 1 + ℑΛ(λ). The same event trains are
//! reused for every λ.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::presets::AMPLITUDE_AXIS;
use crate::error::{Error, Result};
use crate::noise::{estimate_psd, PulseSchedule, Window};
use crate::protocol::run_qubit;
use crate::quantum::{Dim, PureState, C64};
use crate::rng::{derive_seed, rng_from_seed};

fn default_slots() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcsConfig {
    /// Event rate κ (Hz).
    pub kappa: f64,
    /// Rotation per event (rad).
    pub theta: f64,
    /// Counting window T (s).
    pub total_time: f64,
    #[serde(default = "default_slots")]
    pub n_slots: usize,
    pub lambdas: Vec<f64>,
    pub realizations: usize,
    pub master_seed: u64,
}

impl FcsConfig {
    pub fn kappa_t(&self) -> f64 {
        self.kappa * self.total_time
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid("kappa", "must be finite and non-negative"));
        }
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(Error::invalid("total_time", "must be positive"));
        }
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite"));
        }
        if self.n_slots == 0 {
            return Err(Error::invalid("n_slots", "must be positive"));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !l.is_finite()) {
            return Err(Error::invalid("lambdas", "must be a non-empty list of finite values"));
        }
        if self.realizations < 100 {
            return Err(Error::invalid(
                "realizations",
                format!("{} is below the minimum of 100", self.realizations),
            ));
        }
        Ok(())
    }

    /// Events per slot for realization `r`.
    pub fn event_counts(&self, r: usize) -> Result<Vec<u32>> {
        let mut rng = rng_from_seed(derive_seed(self.master_seed, &[r as u64]));
        let mut counts = vec![0u32; self.n_slots];
        let mean = self.kappa_t();
        if mean == 0.0 {
            return Ok(counts);
        }
        let poisson = Poisson::new(mean).map_err(|e| Error::invalid("kappa", e.to_string()))?;
        let m = poisson.sample(&mut rng) as u64;
        for _ in 0..m {
            counts[rng.random_range(0..self.n_slots)] += 1;
        }
        Ok(counts)
    }
}

/// Estimated Λ(λ) with standard errors of the real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GFEstimate {
    pub lambda_values: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub re_err: Vec<f64>,
    pub im_err: Vec<f64>,
    /// max(re_err, im_err) per λ.
    pub statistical_error: Vec<f64>,
}

/// exp[κT(e^{iλθ} − 1)].
pub fn poisson_generating_function(kappa_t: f64, theta: f64, lambda: f64) -> C64 {
    (kappa_t * (C64::from_polar(1.0, lambda * theta) - 1.0)).exp()
}

fn mean_and_error(xs: impl Iterator<Item = f64> + Clone, count: usize) -> (f64, f64) {
    let n = count as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn fcs_estimate(config: &FcsConfig) -> Result<GFEstimate> {
    config.validate()?;
    let ground = PureState::basis(Dim::Two, 0)?;
    let plus = PureState::from_real(&[1.0, 1.0])?;
    let lambdas = &config.lambdas;
    let per_realization: Vec<Vec<(f64, f64)>> = (0..config.realizations)
        .into_par_iter()
        .map(|r| {
            let counts = config.event_counts(r)?;
            lambdas
                .iter()
                .map(|&lambda| {
                    let thetas: Vec<f64> = counts
                        .iter()
                        .map(|&c| c as f64 * lambda * config.theta)
                        .collect();
                    let schedule = PulseSchedule::from_angles_fixed_axis(&thetas, AMPLITUDE_AXIS)?;
                    // p_g − p_e equals 1 − 2p_e and is exact at λ = 0
                    let from_g = run_qubit(&schedule, &ground)?.populations;
                    let from_plus = run_qubit(&schedule, &plus)?.populations;
                    Ok((from_g[0] - from_g[1], from_plus[1] - from_plus[0]))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let r = config.realizations;
    let mut est = GFEstimate {
        lambda_values: lambdas.clone(),
        re: Vec::with_capacity(lambdas.len()),
        im: Vec::with_capacity(lambdas.len()),
        re_err: Vec::with_capacity(lambdas.len()),
        im_err: Vec::with_capacity(lambdas.len()),
        statistical_error: Vec::with_capacity(lambdas.len()),
    };
    for k in 0..lambdas.len() {
        let (re, re_err) = mean_and_error(per_realization.iter().map(|v| v[k].0), r);
        let (im, im_err) = mean_and_error(per_realization.iter().map(|v| v[k].1), r);
        est.re.push(re);
        est.im.push(im);
        est.re_err.push(re_err);
        est.im_err.push(im_err);
        est.statistical_error.push(re_err.max(im_err));
    }
    Ok(est)
}

fn grid_index(gf: &GFEstimate, lambda: f64) -> Result<usize> {
    gf.lambda_values
        .iter()
        .position(|&l| (l - lambda).abs() < 1e-12)
        .ok_or_else(|| Error::invalid("lambdas", format!("grid lacks λ = {lambda}")))
}

/// ⟨θ_T^k⟩ for k ∈ {1, 2} by central differences with step `h`:
/// ⟨θ_T⟩ = [ℑΛ(h) − ℑΛ(−h)]/(2h), ⟨θ_T²⟩ = −[ℜΛ(h) − 2ℜΛ(0) + ℜΛ(−h)]/h².
pub fn moments_from_gf(gf: &GFEstimate, order: u32, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid("h", "must be positive"));
    }
    let plus = grid_index(gf, h)?;
    let minus = grid_index(gf, -h)?;
    match order {
        1 => Ok((gf.im[plus] - gf.im[minus]) / (2.0 * h)),
        2 => {
            let zero = grid_index(gf, 0.0)?;
            Ok(-(gf.re[plus] - 2.0 * gf.re[zero] + gf.re[minus]) / (h * h))
        }
        _ => Err(Error::invalid("order", format!("{order} is not 1 or 2"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonMomentReport {
    pub kappa_t: f64,
    pub theta: f64,
    pub h: f64,
    pub realizations: usize,
    pub mean_theta_t: f64,
    pub second_moment_theta_t: f64,
    pub variance_theta_t: f64,
    pub analytic_mean_theta_t: f64,
    pub analytic_second_moment_theta_t: f64,
    pub mean_m: f64,
    pub variance_m: f64,
    pub variance_mean_ratio: f64,
    pub ratio_deviation: f64,
}

/// Moments from the finite-difference grid {−h, 0, h} on the event trains
/// of `config` (its own λ grid is ignored).
pub fn poisson_moment_report(config: &FcsConfig, h: f64) -> Result<PoissonMomentReport> {
    if config.theta == 0.0 {
        return Err(Error::invalid("theta", "event size must be nonzero to recover m"));
    }
    let fine = FcsConfig {
        lambdas: vec![-h, 0.0, h],
        ..config.clone()
    };
    let gf = fcs_estimate(&fine)?;
    let m1 = moments_from_gf(&gf, 1, h)?;
    let m2 = moments_from_gf(&gf, 2, h)?;
    let theta = config.theta;
    let kt = config.kappa_t();
    let variance = m2 - m1 * m1;
    let mean_m = m1 / theta;
    let variance_m = variance / (theta * theta);
    let ratio = variance_m / mean_m;
    Ok(PoissonMomentReport {
        kappa_t: kt,
        theta,
        h,
        realizations: config.realizations,
        mean_theta_t: m1,
        second_moment_theta_t: m2,
        variance_theta_t: variance,
        analytic_mean_theta_t: kt * theta,
        analytic_second_moment_theta_t: kt * theta * theta + (kt * theta).powi(2),
        mean_m,
        variance_m,
        variance_mean_ratio: ratio,
        ratio_deviation: ratio - 1.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroFreqReport {
    /// ⟨θ_T²⟩ − ⟨θ_T⟩² from the generating function.
    pub fcs_variance: f64,
    /// T·S_Ω(0), with S two-sided and averaged over the lowest bins.
    pub psd_variance: f64,
    pub relative_difference: f64,
    pub bins: usize,
}

/// Number of low-frequency bins averaged for S_Ω(0).
pub const ZERO_FREQ_BINS: usize = 4;

/// Compares the counting variance with T times the zero-frequency PSD of
/// the slot-binned rate Ω_j = count_j·θ/Δt, on the same event trains.
pub fn zero_freq_psd_check(config: &FcsConfig, h: f64) -> Result<ZeroFreqReport> {
    config.validate()?;
    if config.n_slots < 2 * (ZERO_FREQ_BINS + 1) {
        return Err(Error::invalid(
            "n_slots",
            format!("need at least {} slots for the low-frequency bins", 2 * (ZERO_FREQ_BINS + 1)),
        ));
    }
    let fcs_variance = if config.theta == 0.0 || config.kappa == 0.0 {
        0.0
    } else {
        poisson_moment_report(config, h)?.variance_theta_t
    };
    let dt = config.total_time / config.n_slots as f64;
    let fs = 1.0 / dt;
    let spectra: Vec<Vec<f64>> = (0..config.realizations)
        .into_par_iter()
        .map(|r| {
            let omega: Vec<f64> = config
                .event_counts(r)?
                .iter()
                .map(|&c| c as f64 * config.theta / dt)
                .collect();
            Ok(estimate_psd(&omega, fs, Window::Rectangular, 1)?.density)
        })
        .collect::<Result<_>>()?;
    let mut low = 0.0;
    for s in &spectra {
        low += s[1..=ZERO_FREQ_BINS].iter().sum::<f64>();
    }
    // one-sided → two-sided
    let s0 = 0.5 * low / (spectra.len() * ZERO_FREQ_BINS) as f64;
    let psd_variance = config.total_time * s0;
    let scale = fcs_variance.abs().max(psd_variance.abs());
    let relative_difference = if scale == 0.0 {
        0.0
    } else {
        (fcs_variance - psd_variance).abs() / scale
    };
    Ok(ZeroFreqReport {
        fcs_variance,
        psd_variance,
        relative_difference,
        bins: ZERO_FREQ_BINS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(lambdas: Vec<f64>) -> FcsConfig {
        FcsConfig {
            kappa: 4.0,
            theta: 0.3,
            total_time: 1.0,
            n_slots: 16,
            lambdas,
            realizations: 400,
            master_seed: 9,
        }
    }

    #[test]
    fn lambda_zero_is_exactly_one() {
        let gf = fcs_estimate(&cfg(vec![0.0, 1.0])).unwrap();
        assert_eq!(gf.re[0], 1.0);
        assert_eq!(gf.im[0], 0.0);
        assert_eq!(gf.statistical_error[0], 0.0);
    }

    #[test]
    fn analytic_gf_at_lambda_zero() {
        assert_eq!(poisson_generating_function(4.0, 0.5, 0.0), C64::new(1.0, 0.0));
        let v = poisson_generating_function(4.0, 1.0, std::f64::consts::PI);
        assert!((v.re - (-8f64).exp()).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn plane_wave_moment() {
        let h = 0.01;
        let a = 0.7;
        let gf = GFEstimate {
            lambda_values: vec![-h, 0.0, h],
            re: vec![(-h * a).cos(), 1.0, (h * a).cos()],
            im: vec![(-h * a).sin(), 0.0, (h * a).sin()],
            re_err: vec![0.0; 3],
            im_err: vec![0.0; 3],
            statistical_error: vec![0.0; 3],
        };
        assert!((moments_from_gf(&gf, 1, h).unwrap() - a).abs() < a.powi(3) * h * h);
        assert!((moments_from_gf(&gf, 2, h).unwrap() - a * a).abs() < 1e-4);
        assert!(moments_from_gf(&gf, 3, h).is_err());
        assert!(moments_from_gf(&gf, 1, 0.02).is_err());
    }

    #[test]
    fn too_few_realizations_rejected() {
        let mut c = cfg(vec![0.0]);
        c.realizations = 10;
        assert!(fcs_estimate(&c).is_err());
    }

    #[test]
    fn zero_noise_zero_frequency() {
        let mut c = cfg(vec![0.0]);
        c.theta = 0.0;
        let rep = zero_freq_psd_check(&c, 0.01).unwrap();
        assert_eq!(rep.fcs_variance, 0.0);
        assert_eq!(rep.psd_variance, 0.0);
        assert_eq!(rep.relative_difference, 0.0);
    }
}
