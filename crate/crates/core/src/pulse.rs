//! Beam splitters, noise-driven B pulses, the pIFM measurement channels and
//! the closed-form amplitudes used as oracles.
//!
//! Both pulse families are SU(2) rotations on a two-level block (0–1 for the
//! beam splitter, 1–2 or g–e for B), so products are formed on 2×2 blocks and
//! embedded at the end.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quantum::{
    apply_unitary_dm, zero_mat, DensityMatrix, Dim, Mat3, PureState, UnitaryOp, C64, ONE, ZERO,
};

type Block = [[C64; 2]; 2];

const BLOCK_ID: Block = [[ONE, ZERO], [ZERO, ONE]];

fn block_mul(a: &Block, b: &Block) -> Block {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// cos(θ/2)·I − i sin(θ/2)·(n̂·σ), n̂ = (cos φ, −sin φ).
fn rotation_block(theta: f64, phi: f64) -> Block {
    let (s, c) = (0.5 * theta).sin_cos();
    let off = C64::new(0.0, -s);
    [
        [C64::new(c, 0.0), off * C64::from_polar(1.0, phi)],
        [off * C64::from_polar(1.0, -phi), C64::new(c, 0.0)],
    ]
}

fn embed(block: &Block, dim: Dim, offset: usize) -> UnitaryOp {
    let mut m: Mat3 = zero_mat();
    for i in 0..dim.size() {
        m[i][i] = ONE;
    }
    for i in 0..2 {
        for j in 0..2 {
            m[offset + i][offset + j] = block[i][j];
        }
    }
    UnitaryOp::from_raw(dim, m)
}

/// Offset of the sensing transition inside the detector's Hilbert space.
fn sensing_offset(dim: Dim) -> usize {
    match dim {
        Dim::Two => 0,
        Dim::Three => 1,
    }
}

fn check_finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{x} is not finite")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterSpec {
    n: usize,
    phi: f64,
}

impl BeamSplitterSpec {
    /// Beam splitter for an `n`-slot protocol, φ_N = π/(N+1).
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        Ok(BeamSplitterSpec {
            n,
            phi: PI / (n as f64 + 1.0),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// S(φ_N) = cos(φ_N/2)I₀₁ − i sin(φ_N/2)σ^y₀₁ + |2⟩⟨2|.
pub fn beam_splitter(spec: &BeamSplitterSpec) -> UnitaryOp {
    let (s, c) = (0.5 * spec.phi).sin_cos();
    let block = [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ];
    embed(&block, Dim::Three, 0)
}

/// B pulse on the g–e transition of the qubit.
pub fn qubit_b_pulse(theta: f64, phi: f64) -> UnitaryOp {
    embed(&rotation_block(theta, phi), Dim::Two, 0)
}

/// B pulse on the 1–2 transition of the qutrit; |0⟩ is untouched.
pub fn qutrit_b_pulse(theta: f64, phi: f64) -> UnitaryOp {
    embed(&rotation_block(theta, phi), Dim::Three, 1)
}

/// The B pulse appropriate for a detector of dimension `dim`.
pub fn b_pulse(dim: Dim, theta: f64, phi: f64) -> UnitaryOp {
    embed(&rotation_block(theta, phi), dim, sensing_offset(dim))
}

/// One noise sample inside a pulse window: rotation δθ about axis χ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSegment {
    pub delta_theta: f64,
    pub chi: f64,
}

impl PulseSegment {
    pub fn new(delta_theta: f64, chi: f64) -> Result<Self> {
        check_finite("delta_theta", delta_theta)?;
        check_finite("chi", chi)?;
        Ok(PulseSegment { delta_theta, chi })
    }
}

/// Time-ordered noise samples of one B pulse (earliest first).
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSpec {
    segments: Vec<PulseSegment>,
}

impl PulseSpec {
    pub fn new(segments: Vec<PulseSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyPulse);
        }
        for s in &segments {
            check_finite("delta_theta", s.delta_theta)?;
            check_finite("chi", s.chi)?;
        }
        Ok(PulseSpec { segments })
    }

    /// A pulse made of a single sample (𝒫 = 1).
    pub fn single(theta: f64, phi: f64) -> Result<Self> {
        PulseSpec::new(vec![PulseSegment::new(theta, phi)?])
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// θ_j = Σ_p δθ_p.
    pub fn total_theta(&self) -> f64 {
        self.segments.iter().map(|s| s.delta_theta).sum()
    }
}

fn pulse_block(spec: &PulseSpec) -> Block {
    let mut acc = BLOCK_ID;
    let mut cached: Option<(PulseSegment, Block)> = None;
    for seg in &spec.segments {
        let factor = match cached {
            Some((prev, f)) if prev == *seg => f,
            _ => {
                let f = rotation_block(seg.delta_theta, seg.chi);
                cached = Some((*seg, f));
                f
            }
        };
        // later samples act after earlier ones: left-multiply
        acc = block_mul(&factor, &acc);
    }
    acc
}

/// Ordered product of the segment rotations, earliest segment rightmost.
pub fn composed_pulse(spec: &PulseSpec, dim: Dim) -> Result<UnitaryOp> {
    if spec.segments.is_empty() {
        return Err(Error::EmptyPulse);
    }
    Ok(embed(&pulse_block(spec), dim, sensing_offset(dim)))
}

fn require_qutrit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() == Dim::Three {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 3,
            actual: rho.dim().size(),
        })
    }
}

/// Nonselective measurement P₂ρP₂ + P₀₁ρP₀₁: coherences between |2⟩ and the
/// 0–1 subspace are set to exactly zero.
pub fn pifm_measure_channel(rho: &DensityMatrix) -> Result<DensityMatrix> {
    require_qutrit(rho)?;
    let mut m = *rho.raw();
    m[0][2] = ZERO;
    m[1][2] = ZERO;
    m[2][0] = ZERO;
    m[2][1] = ZERO;
    Ok(DensityMatrix::from_raw(Dim::Three, m))
}

/// pIFM state under absorbing detection: the unnormalized part of ρ that has
/// never been found in |2⟩, plus the total weight detected there so far.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsorbingState {
    live: Mat3,
    absorbed: f64,
}

impl AbsorbingState {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        require_qutrit(rho)?;
        Ok(AbsorbingState {
            live: *rho.raw(),
            absorbed: 0.0,
        })
    }

    /// Probability that some measurement has found the detector in |2⟩.
    pub fn absorbed(&self) -> f64 {
        self.absorbed
    }

    pub fn live_populations(&self) -> [f64; 3] {
        [self.live[0][0].re, self.live[1][1].re, self.live[2][2].re]
    }

    /// Populations of the full mixture; detected weight is counted in |2⟩.
    pub fn populations(&self) -> [f64; 3] {
        let [p0, p1, p2] = self.live_populations();
        [p0, p1, p2 + self.absorbed]
    }

    pub fn evolve(&self, u: &UnitaryOp) -> Result<AbsorbingState> {
        let rho = DensityMatrix::from_raw(Dim::Three, self.live);
        let out = apply_unitary_dm(u, &rho)?;
        Ok(AbsorbingState {
            live: *out.raw(),
            absorbed: self.absorbed,
        })
    }
}

/// Measures |2⟩ and removes the detected weight from the dynamics.
pub fn pifm_absorbing_channel(state: &AbsorbingState) -> AbsorbingState {
    let mut live = state.live;
    let detected = live[2][2].re;
    for k in 0..3 {
        live[2][k] = ZERO;
        live[k][2] = ZERO;
    }
    AbsorbingState {
        live,
        absorbed: state.absorbed + detected,
    }
}

/// Amplitudes (c₀, c₁, c₂) of [S]^{N+1−n} B(Nθ) [S]^n |0⟩ with the pulse axis
/// at φ = −π/2.
pub fn lumped_pulse_amplitudes(n_slots: usize, n: usize, theta: f64) -> Result<[f64; 3]> {
    if n == 0 || n >= n_slots {
        return Err(Error::invalid(
            "n",
            format!("{n} must satisfy 0 < n < N = {n_slots}"),
        ));
    }
    check_finite("theta", theta)?;
    let phi = PI / (n_slots as f64 + 1.0);
    let big = n_slots as f64 * theta;
    let sq = (0.25 * big).sin().powi(2);
    let nphi = n as f64 * phi;
    Ok([
        nphi.sin() * sq,
        (0.25 * big).cos().powi(2) + nphi.cos() * sq,
        (0.5 * big).sin() * (0.5 * nphi).sin(),
    ])
}

/// Closed form of S₂ B(−θ) S₂ B(θ) S₂ |0⟩ with φ = −π/2.
pub fn n2_alternating_state(theta: f64) -> Result<PureState> {
    check_finite("theta", theta)?;
    let r3 = 3f64.sqrt();
    let (s, c) = (0.5 * theta).sin_cos();
    let c0 = 3.0 * r3 / 8.0 - 2.0 * r3 / 8.0 * c - r3 / 8.0 * c * c - s * s / 4.0;
    let c1 = 3.0 / 8.0 + 2.0 / 8.0 * c + 3.0 / 8.0 * c * c + r3 / 4.0 * s * s;
    let c2 = (2.0 - r3) / 4.0 * s * c - r3 / 4.0 * s;
    Ok(PureState::from_raw(
        Dim::Three,
        [C64::new(c0, 0.0), C64::new(c1, 0.0), C64::new(c2, 0.0)],
    ))
}

/// Second-order Taylor expansion of [`n2_alternating_state`] about θ = 0.
pub fn n2_small_theta_expansion(theta: f64) -> [f64; 3] {
    let r3 = 3f64.sqrt();
    let t2 = theta * theta;
    [
        (r3 - 1.0) * t2 / 16.0,
        1.0 - (2.0 - r3) * t2 / 16.0,
        (1.0 - r3) * theta / 4.0,
    ]
}

/// pIFM marker for a train of N π pulses: cos^{2(N+1)}(π/(2(N+1))).
pub fn pifm_pi_train_p0(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("N", "must be at least 1"));
    }
    let k = n as f64 + 1.0;
    Ok((PI / (2.0 * k)).cos().powi(2 * (n as i32 + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{apply_unitary, Populations};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn beam_splitter_n1_on_ground() {
        let s = beam_splitter(&BeamSplitterSpec::new(1).unwrap());
        let out = apply_unitary(&s, &PureState::basis(Dim::Three, 0).unwrap()).unwrap();
        let a = out.amplitudes();
        assert!(close(a[0], C64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(a[1], C64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert_eq!(a[2], ZERO);
    }

    #[test]
    fn beam_splitter_n2_matrix() {
        let s = beam_splitter(&BeamSplitterSpec::new(2).unwrap());
        let h = 3f64.sqrt() / 2.0;
        assert!((s.element(0, 0).re - h).abs() < 1e-15);
        assert!((s.element(0, 1).re + 0.5).abs() < 1e-15);
        assert!((s.element(1, 0).re - 0.5).abs() < 1e-15);
        assert_eq!(s.element(2, 2), ONE);
        for n in 1..20 {
            let spec = BeamSplitterSpec::new(n).unwrap();
            assert!((spec.phi() * (n as f64 + 1.0) - PI).abs() < 1e-12);
        }
        assert!(BeamSplitterSpec::new(0).is_err());
    }

    #[test]
    fn qubit_pulse_special_angles() {
        assert!(qubit_b_pulse(0.0, 0.3).max_abs_diff(&UnitaryOp::identity(Dim::Two)) < 1e-15);
        let minus = qubit_b_pulse(2.0 * PI, 1.1);
        assert!((minus.element(0, 0).re + 1.0).abs() < 1e-12);
        assert!((minus.element(1, 1).re + 1.0).abs() < 1e-12);
        let g = PureState::basis(Dim::Two, 0).unwrap();
        let e = apply_unitary(&qubit_b_pulse(PI, -PI / 2.0), &g).unwrap();
        assert!((e.populations()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn qutrit_pulse_transparency_and_sign_flip() {
        for phi in [0.0, 0.4, -PI / 2.0, 2.0] {
            let b4 = qutrit_b_pulse(4.0 * PI, phi);
            assert!(b4.max_abs_diff(&UnitaryOp::identity(Dim::Three)) < 1e-12);
            let b2 = qutrit_b_pulse(2.0 * PI, phi);
            assert!((b2.element(0, 0) - ONE).norm() < 1e-15);
            assert!((b2.element(1, 1) + ONE).norm() < 1e-12);
            assert!((b2.element(2, 2) + ONE).norm() < 1e-12);
            assert!(b2.element(1, 2).norm() < 1e-12);
        }
    }

    #[test]
    fn composed_single_and_split_segments() {
        let single = composed_pulse(&PulseSpec::single(0.8, 0.3).unwrap(), Dim::Three).unwrap();
        assert!(single.max_abs_diff(&qutrit_b_pulse(0.8, 0.3)) < 1e-15);
        let split = PulseSpec::new(vec![PulseSegment::new(0.4, 0.3).unwrap(); 2]).unwrap();
        let u = composed_pulse(&split, Dim::Three).unwrap();
        assert!(u.max_abs_diff(&qutrit_b_pulse(0.8, 0.3)) < 1e-12);
        assert!(PulseSpec::new(vec![]).is_err());
    }

    #[test]
    fn composed_noncommuting_order() {
        let spec = PulseSpec::new(vec![
            PulseSegment::new(PI, 0.0).unwrap(),
            PulseSegment::new(PI, PI / 2.0).unwrap(),
        ])
        .unwrap();
        let u = composed_pulse(&spec, Dim::Three).unwrap();
        let direct = &qutrit_b_pulse(PI, PI / 2.0) * &qutrit_b_pulse(PI, 0.0);
        assert!(u.max_abs_diff(&direct) < 1e-15);
        assert!(u.max_abs_diff(&qutrit_b_pulse(2.0 * PI, 0.0)) > 0.5);
    }

    #[test]
    fn measure_channel_erases_coherence() {
        let plus = PureState::from_real(&[0.0, 1.0, 1.0]).unwrap();
        let rho = DensityMatrix::from_pure(&plus);
        let out = pifm_measure_channel(&rho).unwrap();
        let p = out.populations();
        assert!(p[0] == 0.0 && (p[1] - 0.5).abs() < 1e-15 && (p[2] - 0.5).abs() < 1e-15);
        assert_eq!(out.element(1, 2), ZERO);
        let twice = pifm_measure_channel(&out).unwrap();
        assert_eq!(twice, out);
        let qubit = DensityMatrix::from_pure(&PureState::basis(Dim::Two, 0).unwrap());
        assert!(pifm_measure_channel(&qubit).is_err());
    }

    #[test]
    fn absorbing_channel_moves_weight() {
        let plus = PureState::from_real(&[0.0, 1.0, 1.0]).unwrap();
        let st = AbsorbingState::new(&DensityMatrix::from_pure(&plus)).unwrap();
        let out = pifm_absorbing_channel(&st);
        assert!((out.absorbed() - 0.5).abs() < 1e-15);
        assert_eq!(out.live_populations()[2], 0.0);
        let p = out.populations();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lumped_amplitudes_range_and_trivial_case() {
        assert!(lumped_pulse_amplitudes(4, 0, 0.1).is_err());
        assert!(lumped_pulse_amplitudes(4, 4, 0.1).is_err());
        let c = lumped_pulse_amplitudes(6, 2, 0.0).unwrap();
        assert_eq!(c, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn lumped_amplitudes_vanish_for_large_n() {
        // Nθ fixed at 4π: B(Nθ) is transparent
        let n = 400;
        let c = lumped_pulse_amplitudes(n, 1, 4.0 * PI / n as f64).unwrap();
        assert!(c[0].abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12 && c[2].abs() < 1e-12);
        // generic fixed Nθ: c₀, c₂ shrink like sin(nφ_N)
        let small = lumped_pulse_amplitudes(10_000, 1, 2.0 / 10_000.0).unwrap();
        assert!(small[0].abs() < 1e-3 && (small[1] - 1.0).abs() < 1e-3 && small[2].abs() < 1e-3);
    }

    #[test]
    fn n2_state_at_zero_and_normalized() {
        let s = n2_alternating_state(0.0).unwrap();
        let p = s.populations();
        assert!(p[0].abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
        for k in 0..50 {
            let th = k as f64 * PI / 49.0;
            assert!((n2_alternating_state(th).unwrap().norm_sqr() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pi_train_closed_form() {
        assert!((pifm_pi_train_p0(1).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(format!("{:.3}", pifm_pi_train_p0(4).unwrap()), "0.605");
        let mut prev = 0.0;
        for n in 1..200 {
            let p = pifm_pi_train_p0(n).unwrap();
            assert!(p > prev);
            prev = p;
        }
        assert!(prev > 0.98);
        assert!(pifm_pi_train_p0(0).is_err());
    }
}
