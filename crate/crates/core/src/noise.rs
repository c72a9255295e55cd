//! Noise processes, their slicing into pulse schedules, and the ACF/PSD
//! estimators used to check them.

use std::f64::consts::PI;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, StandardNormal};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::pulse::{PulseSegment, PulseSpec};
use crate::quantum::C64;
use crate::rng::rng_from_seed;

/// Slack, in samples, when mapping window edges onto the sample grid.
const GRID_SLACK: f64 = 1e-6;

/// Uniformly sampled amplitude noise ζ (rad/s) and phase noise χ (rad).
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTrace {
    sample_rate: f64,
    zeta: Vec<f64>,
    chi: Vec<f64>,
}

impl NoiseTrace {
    pub fn new(sample_rate: f64, zeta: Vec<f64>, chi: Vec<f64>) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::invalid("sample_rate", format!("{sample_rate} must be positive")));
        }
        if zeta.len() != chi.len() {
            return Err(Error::DimensionMismatch {
                expected: zeta.len(),
                actual: chi.len(),
            });
        }
        Ok(NoiseTrace {
            sample_rate,
            zeta,
            chi,
        })
    }

    /// Trace whose samples are given as rotation angles per sample rather
    /// than as a rate.
    pub fn from_angles(sample_rate: f64, delta_theta: &[f64], chi: Vec<f64>) -> Result<Self> {
        let zeta = delta_theta.iter().map(|d| d * sample_rate).collect();
        NoiseTrace::new(sample_rate, zeta, chi)
    }

    pub fn constant(sample_rate: f64, duration: f64, zeta: f64, chi: f64) -> Result<Self> {
        let n = (sample_rate * duration).round() as usize;
        NoiseTrace::new(sample_rate, vec![zeta; n], vec![chi; n])
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.zeta.len() as f64 / self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }
}

/// N pulse windows of length τ_B separated by beam splitters of length τ_bs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolTiming {
    n: usize,
    tau_b: f64,
    tau_bs: f64,
}

impl ProtocolTiming {
    pub fn new(n: usize, tau_b: f64, tau_bs: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        if !(tau_b > 0.0 && tau_b.is_finite()) {
            return Err(Error::invalid("tau_B", format!("{tau_b} must be positive")));
        }
        if !(tau_bs >= 0.0 && tau_bs.is_finite()) {
            return Err(Error::invalid("tau_bs", format!("{tau_bs} must be non-negative")));
        }
        Ok(ProtocolTiming { n, tau_b, tau_bs })
    }

    /// Timing for a protocol whose pulse windows tile `total` with
    /// instantaneous beam splitters.
    pub fn tiled(n: usize, total: f64) -> Result<Self> {
        ProtocolTiming::new(n, total / n as f64, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau_b(&self) -> f64 {
        self.tau_b
    }

    pub fn tau_bs(&self) -> f64 {
        self.tau_bs
    }

    /// T = (N+1)(τ_B + τ_bs).
    pub fn total(&self) -> f64 {
        (self.n as f64 + 1.0) * (self.tau_b + self.tau_bs)
    }

    /// Start of pulse window `j` (1-based): j·τ_bs + (j−1)·τ_B.
    pub fn window_start(&self, j: usize) -> f64 {
        j as f64 * self.tau_bs + (j as f64 - 1.0) * self.tau_b
    }

    /// End of the last pulse window.
    pub fn last_window_end(&self) -> f64 {
        self.window_start(self.n) + self.tau_b
    }

    /// Set when beam splitters are not short compared to the pulses.
    pub fn warning(&self) -> Option<String> {
        (self.tau_bs > self.tau_b / 5.0).then(|| {
            format!(
                "tau_bs = {:e} s exceeds tau_B/5 = {:e} s; beam splitters are treated as instantaneous",
                self.tau_bs,
                self.tau_b / 5.0
            )
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    pulses: Vec<PulseSpec>,
    timing: ProtocolTiming,
}

impl PulseSchedule {
    pub fn new(pulses: Vec<PulseSpec>, timing: ProtocolTiming) -> Result<Self> {
        if pulses.len() != timing.n {
            return Err(Error::DimensionMismatch {
                expected: timing.n,
                actual: pulses.len(),
            });
        }
        Ok(PulseSchedule { pulses, timing })
    }

    /// One sample per pulse (𝒫 = 1) with angles θ_j about axes φ_j, on unit
    /// pulse windows.
    pub fn from_angles(thetas: &[f64], phis: &[f64]) -> Result<Self> {
        if thetas.len() != phis.len() {
            return Err(Error::DimensionMismatch {
                expected: thetas.len(),
                actual: phis.len(),
            });
        }
        let pulses = thetas
            .iter()
            .zip(phis)
            .map(|(&t, &p)| PulseSpec::single(t, p))
            .collect::<Result<Vec<_>>>()?;
        PulseSchedule::new(pulses, ProtocolTiming::new(thetas.len(), 1.0, 0.0)?)
    }

    /// [`PulseSchedule::from_angles`] with a common axis.
    pub fn from_angles_fixed_axis(thetas: &[f64], phi: f64) -> Result<Self> {
        PulseSchedule::from_angles(thetas, &vec![phi; thetas.len()])
    }

    pub fn pulses(&self) -> &[PulseSpec] {
        &self.pulses
    }

    pub fn timing(&self) -> &ProtocolTiming {
        &self.timing
    }

    pub fn n(&self) -> usize {
        self.timing.n
    }

    /// Σ_j 𝒫_j.
    pub fn total_segments(&self) -> usize {
        self.pulses.iter().map(PulseSpec::len).sum()
    }
}

/// First sample index at or after time `t`.
fn grid_index(t: f64, sample_rate: f64) -> usize {
    (t * sample_rate - GRID_SLACK).ceil().max(0.0) as usize
}

/// Slices a trace into the N pulse windows; samples in beam-splitter windows
/// are dropped. Each sample becomes a segment δθ = ζ/f_s about axis χ.
pub fn trace_to_schedule(trace: &NoiseTrace, timing: &ProtocolTiming) -> Result<PulseSchedule> {
    let fs = trace.sample_rate;
    let required = timing.last_window_end();
    if grid_index(required, fs) > trace.len() {
        return Err(Error::TraceTooShort {
            available: trace.duration(),
            required,
        });
    }
    let mut pulses = Vec::with_capacity(timing.n);
    for j in 1..=timing.n {
        let start = timing.window_start(j);
        let lo = grid_index(start, fs);
        let hi = grid_index(start + timing.tau_b, fs);
        if hi <= lo {
            return Err(Error::EmptyWindow { window: j });
        }
        let segments = (lo..hi)
            .map(|k| PulseSegment {
                delta_theta: trace.zeta[k] / fs,
                chi: trace.chi[k],
            })
            .collect();
        pulses.push(PulseSpec::new(segments)?);
    }
    PulseSchedule::new(pulses, *timing)
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        Err(Error::invalid("count", "must be positive"))
    } else {
        Ok(())
    }
}

/// Gaussian with mean (lo+hi)/2 and σ = (hi−lo)/6, clipped to [lo, hi].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClippedGaussian {
    lo: f64,
    hi: f64,
}

impl ClippedGaussian {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::invalid("range", format!("[{lo}, {hi}] is not a valid range")));
        }
        Ok(ClippedGaussian { lo, hi })
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn sigma(&self) -> f64 {
        (self.hi - self.lo) / 6.0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let z: f64 = StandardNormal.sample(rng);
        (self.mean() + self.sigma() * z).clamp(self.lo, self.hi)
    }
}

pub fn white_samples<R: Rng + ?Sized>(lo: f64, hi: f64, count: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_count(count)?;
    let law = ClippedGaussian::new(lo, hi)?;
    Ok((0..count).map(|_| law.sample(rng)).collect())
}

/// White clipped-Gaussian samples on [lo, hi].
pub fn gen_white(lo: f64, hi: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    white_samples(lo, hi, count, &mut rng_from_seed(seed))
}

pub fn zero_sum_samples<R: Rng + ?Sized>(theta_max: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid("N", format!("{n} < 2; a zero-sum series needs two slots")));
    }
    let law = ClippedGaussian::new(0.0, theta_max)?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n / 2 {
        let m = law.sample(rng);
        out.push(m);
        out.push(-m);
    }
    if n % 2 == 1 {
        out.push(0.0);
    }
    out.shuffle(rng);
    Ok(out)
}

/// N angles in ± pairs (plus a zero for odd N), shuffled, so Σθ_j = 0.
pub fn gen_zero_sum(theta_max: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    zero_sum_samples(theta_max, n, &mut rng_from_seed(seed))
}

/// Binary ±amplitude noise with switching rate κ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TelegraphSpec {
    kappa: f64,
    amplitude: f64,
    sample_rate: f64,
}

impl TelegraphSpec {
    pub fn new(kappa: f64, amplitude: f64, sample_rate: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid("kappa", format!("{kappa} must be positive")));
        }
        if !amplitude.is_finite() {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::invalid("sample_rate", format!("{sample_rate} must be positive")));
        }
        Ok(TelegraphSpec {
            kappa,
            amplitude,
            sample_rate,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Probability that the sign differs after time `dt`.
    pub fn flip_probability(&self, dt: f64) -> f64 {
        0.5 * (1.0 - (-2.0 * self.kappa * dt).exp())
    }
}

/// Switching times of a rate-κ Poisson process on [0, duration).
pub fn poisson_event_times<R: Rng + ?Sized>(kappa: f64, duration: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(duration > 0.0) {
        return Err(Error::invalid("duration", format!("{duration} must be positive")));
    }
    let exp = Exp::new(kappa).map_err(|e| Error::invalid("kappa", e.to_string()))?;
    let mut times = Vec::new();
    let mut t = exp.sample(rng);
    while t < duration {
        times.push(t);
        t += exp.sample(rng);
    }
    Ok(times)
}

/// A continuous-time telegraph realization sampled onto the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TelegraphRealization {
    pub values: Vec<f64>,
    pub switch_times: Vec<f64>,
}

pub fn telegraph_realization<R: Rng + ?Sized>(
    spec: &TelegraphSpec,
    duration: f64,
    rng: &mut R,
) -> Result<TelegraphRealization> {
    let switch_times = poisson_event_times(spec.kappa, duration, rng)?;
    let mut sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let count = (duration * spec.sample_rate).round() as usize;
    let mut values = Vec::with_capacity(count);
    let mut next = 0;
    for k in 0..count {
        let t = k as f64 / spec.sample_rate;
        while next < switch_times.len() && switch_times[next] <= t {
            sign = -sign;
            next += 1;
        }
        values.push(sign * spec.amplitude);
    }
    Ok(TelegraphRealization {
        values,
        switch_times,
    })
}

/// Telegraph series with exponential waiting times, sampled at the spec's rate.
pub fn gen_telegraph(spec: &TelegraphSpec, duration: f64, seed: u64) -> Result<Vec<f64>> {
    Ok(telegraph_realization(spec, duration, &mut rng_from_seed(seed))?.values)
}

/// Telegraph process observed every `hold` seconds and held constant in
/// between; consecutive held values differ with probability (1−e^{−2κ·hold})/2.
pub fn telegraph_held_samples<R: Rng + ?Sized>(
    spec: &TelegraphSpec,
    duration: f64,
    hold: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(duration > 0.0) {
        return Err(Error::invalid("duration", format!("{duration} must be positive")));
    }
    let per_hold = hold * spec.sample_rate;
    if !(per_hold >= 1.0 - GRID_SLACK) {
        return Err(Error::invalid("hold", format!("{hold} s is shorter than one sample")));
    }
    let count = (duration * spec.sample_rate).round() as usize;
    let flip = spec.flip_probability(hold);
    let mut sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut current = 0usize;
    let mut values = Vec::with_capacity(count);
    for k in 0..count {
        let slot = (k as f64 / per_hold + GRID_SLACK).floor() as usize;
        while current < slot {
            if rng.random::<f64>() < flip {
                sign = -sign;
            }
            current += 1;
        }
        values.push(sign * spec.amplitude);
    }
    Ok(values)
}

pub fn gen_telegraph_held(spec: &TelegraphSpec, duration: f64, hold: f64, seed: u64) -> Result<Vec<f64>> {
    telegraph_held_samples(spec, duration, hold, &mut rng_from_seed(seed))
}

/// Independent, equiprobable ±amplitude values.
pub fn binary_iid_samples<R: Rng + ?Sized>(amplitude: f64, count: usize, rng: &mut R) -> Vec<f64> {
    (0..count)
        .map(|_| if rng.random::<bool>() { amplitude } else { -amplitude })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseColor {
    Purple,
    Blue,
    White,
    Pink,
    Brown,
}

impl NoiseColor {
    pub const ALL: [NoiseColor; 5] = [
        NoiseColor::Purple,
        NoiseColor::Blue,
        NoiseColor::White,
        NoiseColor::Pink,
        NoiseColor::Brown,
    ];

    /// Exponent α in PSD ∝ f^{−α}.
    pub fn alpha(self) -> f64 {
        match self {
            NoiseColor::Purple => -2.0,
            NoiseColor::Blue => -1.0,
            NoiseColor::White => 0.0,
            NoiseColor::Pink => 1.0,
            NoiseColor::Brown => 2.0,
        }
    }

    pub fn from_alpha(alpha: f64) -> Result<Self> {
        NoiseColor::ALL
            .into_iter()
            .find(|c| c.alpha() == alpha)
            .ok_or_else(|| Error::invalid("alpha", format!("{alpha} is not one of -2, -1, 0, 1, 2")))
    }

    pub fn name(self) -> &'static str {
        match self {
            NoiseColor::Purple => "purple",
            NoiseColor::Blue => "blue",
            NoiseColor::White => "white",
            NoiseColor::Pink => "pink",
            NoiseColor::Brown => "brown",
        }
    }

    /// Expected PSD slope in dB per decade.
    pub fn slope_db_per_decade(self) -> f64 {
        -10.0 * self.alpha()
    }
}

impl std::str::FromStr for NoiseColor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseColor::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid("color", format!("unsupported color `{s}`")))
    }
}

pub fn colored_samples<R: Rng + ?Sized>(color: NoiseColor, count: usize, rng: &mut R) -> Result<Vec<f64>> {
    if count < 64 || !count.is_power_of_two() {
        return Err(Error::invalid(
            "count",
            format!("{count} must be a power of two and at least 64"),
        ));
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut buf: Vec<C64> = (0..count).map(|_| C64::new(normal.sample(rng), 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(count).process(&mut buf);
    let half_alpha = 0.5 * color.alpha();
    buf[0] = C64::new(0.0, 0.0);
    for (k, x) in buf.iter_mut().enumerate().skip(1) {
        let f = k.min(count - k) as f64;
        *x *= f.powf(-half_alpha);
    }
    planner.plan_fft_inverse(count).process(&mut buf);
    let mut out: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let mean = out.iter().sum::<f64>() / count as f64;
    let var = out.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / count as f64;
    let scale = var.sqrt().recip();
    out.iter_mut().for_each(|x| *x = (*x - mean) * scale);
    Ok(out)
}

/// Zero-mean, unit-variance noise with PSD ∝ f^{−α}, by spectral shaping.
pub fn gen_colored(color: NoiseColor, count: usize, seed: u64) -> Result<Vec<f64>> {
    colored_samples(color, count, &mut rng_from_seed(seed))
}

/// Biased estimator R(τ) = (1/n) Σ_t x_t x_{t+τ} for τ = 0..=max_lag.
pub fn estimate_acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::invalid("series", "is empty"));
    }
    if max_lag >= series.len() {
        return Err(Error::invalid(
            "max_lag",
            format!("{max_lag} must be below the series length {}", series.len()),
        ));
    }
    let n = series.len() as f64;
    Ok((0..=max_lag)
        .map(|lag| {
            series
                .iter()
                .zip(&series[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n
        })
        .collect())
}

/// R(τ) = (1/(n−τ)) Σ_t x_t x_{t+τ}, free of the (1 − τ/n) taper of
/// [`estimate_acf`].
pub fn estimate_acf_unbiased(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    let mut acf = estimate_acf(series, max_lag)?;
    for (lag, r) in acf.iter_mut().enumerate() {
        *r *= n as f64 / (n - lag) as f64;
    }
    Ok(acf)
}

/// Decay rate κ from an autocorrelation sampled every `1/sample_rate`,
/// assuming R(τ)/R(0) = e^{−2κτ}. Uses lags up to the first one where the
/// normalized ACF drops below e^{−2}; least squares through the origin.
pub fn fit_telegraph_kappa(acf: &[f64], sample_rate: f64) -> Result<f64> {
    let r0 = *acf.first().ok_or_else(|| Error::invalid("acf", "is empty"))?;
    if !(r0 > 0.0) {
        return Err(Error::invalid("acf", "zero-lag value must be positive"));
    }
    let cutoff = (-2.0f64).exp();
    let (mut stt, mut sty) = (0.0, 0.0);
    for (k, r) in acf.iter().enumerate().skip(1) {
        let rho = r / r0;
        if rho < cutoff {
            break;
        }
        let tau = k as f64 / sample_rate;
        stt += tau * tau;
        sty += tau * rho.ln();
    }
    if stt == 0.0 {
        return Err(Error::invalid("acf", "decays within one lag; raise the sample rate"));
    }
    Ok(-sty / stt / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hann,
}

impl Window {
    fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            // periodic Hann
            Window::Hann => (0..len)
                .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / len as f64).cos())
                .collect(),
        }
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rectangular" | "rect" => Ok(Window::Rectangular),
            "hann" => Ok(Window::Hann),
            other => Err(Error::invalid("window", format!("unknown window `{other}`"))),
        }
    }
}

/// One-sided power spectral density on frequencies k·f_s/L, k = 0..=L/2.
#[derive(Clone, Debug, PartialEq)]
pub struct Psd {
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
}

impl Psd {
    pub fn resolution(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    /// Σ P_k Δf, which equals the windowed mean square.
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.resolution()
    }

    pub fn density_db(&self) -> Vec<f64> {
        self.density.iter().map(|p| 10.0 * p.log10()).collect()
    }

    /// Two-sided density S(f) = P(f)/2 for f > 0.
    pub fn two_sided(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.density.len() {
            self.density[k]
        } else {
            0.5 * self.density[k]
        }
    }

    /// Pointwise average of spectra sharing one frequency grid.
    pub fn mean_of(spectra: &[Psd]) -> Result<Psd> {
        let first = spectra
            .first()
            .ok_or_else(|| Error::invalid("spectra", "nothing to average"))?;
        let mut density = vec![0.0; first.density.len()];
        for s in spectra {
            if s.frequencies != first.frequencies {
                return Err(Error::invalid("spectra", "frequency grids differ"));
            }
            density.iter_mut().zip(&s.density).for_each(|(d, x)| *d += x);
        }
        let n = spectra.len() as f64;
        density.iter_mut().for_each(|d| *d /= n);
        Ok(Psd {
            frequencies: first.frequencies.clone(),
            density,
        })
    }

    /// Least-squares slope of 10·log10 P against log10 f over the decade
    /// centred (geometrically) between the first bin and Nyquist. DC and
    /// Nyquist are excluded.
    pub fn slope_db_per_decade(&self) -> Result<f64> {
        let n = self.frequencies.len();
        if n < 4 {
            return Err(Error::invalid("psd", "too few bins for a slope fit"));
        }
        let f1 = self.frequencies[1];
        let fmax = self.frequencies[n - 1];
        let centre = (f1 * fmax).sqrt();
        let (lo, hi) = (centre / 10f64.sqrt(), centre * 10f64.sqrt());
        let points: Vec<(f64, f64)> = (1..n - 1)
            .filter(|&k| self.frequencies[k] >= lo && self.frequencies[k] <= hi)
            .filter(|&k| self.density[k] > 0.0)
            .map(|k| (self.frequencies[k].log10(), 10.0 * self.density[k].log10()))
            .collect();
        if points.len() < 2 {
            return Err(Error::invalid("psd", "central decade holds fewer than two bins"));
        }
        let m = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
        let my = points.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Ok(sxy / sxx)
    }
}

/// Averaged periodogram over `segments` equal, non-overlapping pieces.
pub fn estimate_psd(series: &[f64], sample_rate: f64, window: Window, segments: usize) -> Result<Psd> {
    if segments == 0 || !series.len().is_multiple_of(segments) || series.len() / segments < 2 {
        return Err(Error::invalid(
            "segments",
            format!("cannot split {} samples into {segments} segments", series.len()),
        ));
    }
    if !(sample_rate > 0.0) {
        return Err(Error::invalid("sample_rate", "must be positive"));
    }
    let len = series.len() / segments;
    let w = window.coefficients(len);
    let w2: f64 = w.iter().map(|x| x * x).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);
    let bins = len / 2 + 1;
    let mut density = vec![0.0; bins];
    let mut buf = vec![C64::new(0.0, 0.0); len];
    for seg in series.chunks_exact(len) {
        for ((b, x), wk) in buf.iter_mut().zip(seg).zip(&w) {
            *b = C64::new(x * wk, 0.0);
        }
        fft.process(&mut buf);
        for (k, d) in density.iter_mut().enumerate() {
            let one_sided = if k == 0 || 2 * k == len { 1.0 } else { 2.0 };
            *d += one_sided * buf[k].norm_sqr();
        }
    }
    let norm = sample_rate * w2 * segments as f64;
    density.iter_mut().for_each(|d| *d /= norm);
    let frequencies = (0..bins).map(|k| k as f64 * sample_rate / len as f64).collect();
    Ok(Psd {
        frequencies,
        density,
    })
}

/// x² e^{−2κ|τ|}.
pub fn telegraph_acf(amplitude: f64, kappa: f64, lag: f64) -> f64 {
    amplitude * amplitude * (-2.0 * kappa * lag.abs()).exp()
}

/// Two-sided Lorentzian x²κ/(κ² + π²f²).
pub fn telegraph_lorentzian(amplitude: f64, kappa: f64, f: f64) -> f64 {
    amplitude * amplitude * kappa / (kappa * kappa + PI * PI * f * f)
}

/// P(m, T) = (κT)^m e^{−κT}/m! for m = 0..=m_max.
pub fn poisson_pmf(mean: f64, m_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m_max + 1);
    let mut p = (-mean).exp();
    out.push(p);
    for m in 1..=m_max {
        p *= mean / m as f64;
        out.push(p);
    }
    out
}

/// Writes `time_s,value` rows.
pub fn write_trace_csv<W: Write>(mut out: W, values: &[f64], sample_rate: f64) -> std::io::Result<()> {
    writeln!(out, "time_s,value")?;
    for (k, v) in values.iter().enumerate() {
        writeln!(out, "{:.16e},{:.16e}", k as f64 / sample_rate, v)?;
    }
    Ok(())
}

/// Writes `freq_hz,psd_db` rows, skipping the DC bin.
pub fn write_psd_csv<W: Write>(mut out: W, psd: &Psd) -> std::io::Result<()> {
    writeln!(out, "freq_hz,psd_db")?;
    for (f, p) in psd.frequencies.iter().zip(psd.density_db()).skip(1) {
        writeln!(out, "{:.16e},{:.16e}", f, p)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_degenerate_and_deterministic() {
        assert_eq!(gen_white(0.0, 0.0, 5, 1).unwrap(), vec![0.0; 5]);
        assert_eq!(gen_white(0.0, 1.0, 100, 9).unwrap(), gen_white(0.0, 1.0, 100, 9).unwrap());
        assert_ne!(gen_white(0.0, 1.0, 100, 9).unwrap(), gen_white(0.0, 1.0, 100, 10).unwrap());
        assert!(gen_white(0.0, 1.0, 0, 1).is_err());
        assert!(gen_white(1.0, 0.0, 3, 1).is_err());
        assert!(gen_white(-0.5, 0.5, 1000, 3).unwrap().iter().all(|x| x.abs() <= 0.5));
    }

    #[test]
    fn white_mean_within_clt_bound() {
        let n = 100_000;
        let xs = gen_white(0.0, PI, n, 42).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sigma = PI / 6.0;
        assert!((mean - PI / 2.0).abs() < 3.0 * sigma / (n as f64).sqrt());
    }

    #[test]
    fn zero_sum_structure() {
        let two = gen_zero_sum(PI, 2, 5).unwrap();
        assert_eq!(two[0], -two[1]);
        assert!(two[0].abs() <= PI);
        for n in [3, 7, 10, 101] {
            let xs = gen_zero_sum(1.0, n, n as u64).unwrap();
            assert_eq!(xs.len(), n);
            assert!(xs.iter().sum::<f64>().abs() < 1e-12);
            assert!(xs.iter().all(|x| x.abs() <= 1.0));
        }
        assert!(gen_zero_sum(1.0, 1, 0).is_err());
    }

    #[test]
    fn timing_geometry() {
        let t = ProtocolTiming::new(4, 1.0, 0.1).unwrap();
        assert!((t.total() - 5.5).abs() < 1e-15);
        assert!((t.window_start(1) - 0.1).abs() < 1e-15);
        assert!((t.window_start(3) - 2.3).abs() < 1e-15);
        assert!(t.warning().is_none());
        assert!(ProtocolTiming::new(4, 1.0, 0.5).unwrap().warning().is_some());
        assert!(ProtocolTiming::new(0, 1.0, 0.0).is_err());
        assert!(ProtocolTiming::new(2, 1.0, -1.0).is_err());
    }

    #[test]
    fn constant_trace_collapses_to_product() {
        let timing = ProtocolTiming::new(5, 2e-6, 0.0).unwrap();
        let trace = NoiseTrace::constant(1e8, 1.2e-5, 3e5, 0.2).unwrap();
        let sched = trace_to_schedule(&trace, &timing).unwrap();
        for p in sched.pulses() {
            assert_eq!(p.len(), 200);
            assert!((p.total_theta() - 3e5 * 2e-6).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_drops_beam_splitter_samples() {
        // 10 samples per τ_B, 2 per τ_bs
        let timing = ProtocolTiming::new(3, 1.0, 0.2).unwrap();
        let vals: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let trace = NoiseTrace::from_angles(10.0, &vals, vec![0.0; 50]).unwrap();
        let sched = trace_to_schedule(&trace, &timing).unwrap();
        assert_eq!(sched.total_segments(), 30);
        let first: Vec<f64> = sched.pulses()[0].segments().iter().map(|s| s.delta_theta).collect();
        assert_eq!(first, (2..12).map(|k| k as f64).collect::<Vec<_>>());
        let second = sched.pulses()[1].segments()[0].delta_theta;
        assert_eq!(second, 14.0);
    }

    #[test]
    fn schedule_errors() {
        let timing = ProtocolTiming::new(4, 1.0, 0.0).unwrap();
        let short = NoiseTrace::constant(10.0, 3.0, 0.0, 0.0).unwrap();
        assert!(matches!(trace_to_schedule(&short, &timing), Err(Error::TraceTooShort { .. })));
        let sparse = ProtocolTiming::new(4, 0.01, 0.0).unwrap();
        let trace = NoiseTrace::constant(10.0, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(trace_to_schedule(&trace, &sparse), Err(Error::EmptyWindow { window: 2 })));
    }

    #[test]
    fn one_sample_per_pulse_regime() {
        let n = 8;
        let timing = ProtocolTiming::tiled(n, 1e-5).unwrap();
        let trace = NoiseTrace::constant(n as f64 / 1e-5, 1e-5, 1.0, 0.0).unwrap();
        let sched = trace_to_schedule(&trace, &timing).unwrap();
        assert!(sched.pulses().iter().all(|p| p.len() == 1));
    }

    #[test]
    fn binary_window_size() {
        let timing = ProtocolTiming::tiled(40, 1e-5).unwrap();
        let trace = NoiseTrace::constant(1e9, 1e-5, 0.0, 0.0).unwrap();
        let sched = trace_to_schedule(&trace, &timing).unwrap();
        assert!(sched.pulses().iter().all(|p| p.len() == 250));
    }

    #[test]
    fn telegraph_frozen_and_two_valued() {
        let frozen = TelegraphSpec::new(1e-12, 0.5, 100.0).unwrap();
        let xs = gen_telegraph(&frozen, 10.0, 3).unwrap();
        assert!(xs.iter().all(|&x| x == xs[0]));
        let fast = TelegraphSpec::new(5.0, 0.5, 100.0).unwrap();
        let ys = gen_telegraph(&fast, 10.0, 4).unwrap();
        assert_eq!(ys.len(), 1000);
        assert!(ys.iter().all(|&y| y == 0.5 || y == -0.5));
        assert!(gen_telegraph(&fast, 0.0, 1).is_err());
        assert!(TelegraphSpec::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn held_telegraph_is_piecewise_constant() {
        let spec = TelegraphSpec::new(3.0, 1.0, 100.0).unwrap();
        let xs = gen_telegraph_held(&spec, 1.0, 0.1, 8).unwrap();
        for block in xs.chunks(10) {
            assert!(block.iter().all(|&x| x == block[0]));
        }
        assert!(gen_telegraph_held(&spec, 1.0, 0.001, 8).is_err());
    }

    #[test]
    fn colored_checks_length_and_normalizes() {
        assert!(gen_colored(NoiseColor::Pink, 100, 1).is_err());
        assert!(gen_colored(NoiseColor::Pink, 32, 1).is_err());
        for c in NoiseColor::ALL {
            let xs = gen_colored(c, 4096, 2).unwrap();
            let mean = xs.iter().sum::<f64>() / 4096.0;
            let var = xs.iter().map(|x| x * x).sum::<f64>() / 4096.0;
            assert!(mean.abs() < 1e-10);
            assert!((var - 1.0).abs() < 0.01);
        }
        assert_eq!(NoiseColor::from_alpha(1.0).unwrap(), NoiseColor::Pink);
        assert!(NoiseColor::from_alpha(0.5).is_err());
        assert_eq!("Brown".parse::<NoiseColor>().unwrap(), NoiseColor::Brown);
        assert!("green".parse::<NoiseColor>().is_err());
    }

    #[test]
    fn acf_simple_series() {
        let c = estimate_acf(&[2.0; 10], 3).unwrap();
        let expected: Vec<f64> = (0..4).map(|k| 4.0 * (10 - k) as f64 / 10.0).collect();
        assert_eq!(c, expected);
        let alt: Vec<f64> = (0..1000).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = estimate_acf(&alt, 4).unwrap();
        for (k, v) in r.iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - sign).abs() <= k as f64 / 1000.0 + 1e-12);
        }
        let xs = gen_white(-1.0, 1.0, 500, 1).unwrap();
        let ms = xs.iter().map(|x| x * x).sum::<f64>() / 500.0;
        assert!((estimate_acf(&xs, 0).unwrap()[0] - ms).abs() < 1e-12);
        assert!(estimate_acf(&[], 0).is_err());
        assert!(estimate_acf(&[1.0], 1).is_err());
    }

    #[test]
    fn psd_sinusoid_peak_and_parseval() {
        let fs = 1000.0;
        let f0 = 125.0;
        let xs: Vec<f64> = (0..4096).map(|k| (2.0 * PI * f0 * k as f64 / fs).sin()).collect();
        let psd = estimate_psd(&xs, fs, Window::Rectangular, 4).unwrap();
        let peak = (0..psd.density.len())
            .max_by(|&a, &b| psd.density[a].total_cmp(&psd.density[b]))
            .unwrap();
        assert!((psd.frequencies[peak] - f0).abs() < 1e-9);
        let ms = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((psd.total_power() - ms).abs() < 1e-12 * ms.max(1.0));
        let white = gen_white(-3.0, 3.0, 8192, 5).unwrap();
        let p = estimate_psd(&white, 1.0, Window::Rectangular, 8).unwrap();
        let ms = white.iter().map(|x| x * x).sum::<f64>() / white.len() as f64;
        assert!((p.total_power() - ms).abs() < 0.02 * ms);
        assert!(estimate_psd(&xs, fs, Window::Hann, 3).is_err());
    }

    #[test]
    fn white_psd_is_flat() {
        let xs = gen_colored(NoiseColor::White, 1 << 16, 4).unwrap();
        let psd = estimate_psd(&xs, 1.0, Window::Hann, 16).unwrap();
        assert!(psd.slope_db_per_decade().unwrap().abs() < 1.5);
    }

    #[test]
    fn poisson_pmf_sums_to_one() {
        let p = poisson_pmf(4.0, 60);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((p[4] - 4f64.powi(4) * (-4f64).exp() / 24.0).abs() < 1e-15);
    }

    #[test]
    fn csv_writers() {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &[1.0, -1.0], 2.0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time_s,value\n0.0000000000000000e0,1.0000000000000000e0\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn kappa_fit_on_exact_exponential() {
        let fs = 100.0;
        let acf: Vec<f64> = (0..200).map(|k| telegraph_acf(2.0, 3.0, k as f64 / fs)).collect();
        assert!((fit_telegraph_kappa(&acf, fs).unwrap() - 3.0).abs() < 1e-12);
        assert!(fit_telegraph_kappa(&[1.0, 1e-3], fs).is_err());
    }

    #[test]
    fn unbiased_acf_of_constant_series() {
        let xs = vec![2.0; 10];
        let acf = estimate_acf_unbiased(&xs, 9).unwrap();
        assert!(acf.iter().all(|r| (r - 4.0).abs() < 1e-12));
        assert!((estimate_acf(&xs, 9).unwrap()[9] - 0.4).abs() < 1e-12);
    }
}
