//! Fixed-size complex linear algebra for two- and three-level detectors.
//!
//! Every object carries its dimension (2 or 3) and stores its entries in a
//! 3×3 block; for qubits only the top-left 2×2 corner is used. Nothing is
//! renormalized after an operation, so drift shows up in the invariant
//! checks instead of being silently repaired.

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) type Mat3 = [[C64; 3]; 3];

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance used when validating user-supplied states and operators.
pub const INPUT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn size(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn from_size(size: usize) -> Result<Dim> {
        match size {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }
}

fn check_same(expected: Dim, actual: Dim) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: expected.size(),
            actual: actual.size(),
        })
    }
}

pub(crate) fn zero_mat() -> Mat3 {
    [[ZERO; 3]; 3]
}

pub(crate) fn identity_mat(dim: Dim) -> Mat3 {
    let mut m = zero_mat();
    for (i, row) in m.iter_mut().enumerate().take(dim.size()) {
        row[i] = ONE;
    }
    m
}

pub(crate) fn mat_mul(a: &Mat3, b: &Mat3, n: usize) -> Mat3 {
    let mut out = zero_mat();
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub(crate) fn adjoint(a: &Mat3, n: usize) -> Mat3 {
    let mut out = zero_mat();
    for i in 0..n {
        for j in 0..n {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// A normalized state vector of a qubit or qutrit.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dim: Dim,
    amps: [C64; 3],
}

impl PureState {
    /// Builds a state from its amplitudes; the norm must be 1 within
    /// [`INPUT_TOLERANCE`].
    pub fn new(amplitudes: &[C64]) -> Result<Self> {
        let dim = Dim::from_size(amplitudes.len())?;
        let mut amps = [ZERO; 3];
        amps[..amplitudes.len()].copy_from_slice(amplitudes);
        let state = PureState { dim, amps };
        let n2 = state.norm_sqr();
        if !n2.is_finite() || (n2 - 1.0).abs() > INPUT_TOLERANCE {
            return Err(Error::NotNormalized(n2));
        }
        Ok(state)
    }

    /// Real amplitudes, normalized on construction.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        let amps: Vec<C64> = amplitudes.iter().map(|a| C64::new(a / norm, 0.0)).collect();
        PureState::new(&amps)
    }

    pub fn basis(dim: Dim, level: usize) -> Result<Self> {
        if level >= dim.size() {
            return Err(Error::invalid(
                "level",
                format!("{level} is not a basis state of a {}-level system", dim.size()),
            ));
        }
        let mut amps = [ZERO; 3];
        amps[level] = ONE;
        Ok(PureState { dim, amps })
    }

    pub(crate) fn from_raw(dim: Dim, amps: [C64; 3]) -> Self {
        PureState { dim, amps }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps[..self.dim.size()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    /// Multiplies every amplitude by `e^{i·phase}`.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        let f = C64::from_polar(1.0, phase);
        let mut amps = self.amps;
        amps.iter_mut().for_each(|a| *a *= f);
        PureState { dim: self.dim, amps }
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: Dim,
    m: Mat3,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and eigenvalues ≥ −1e-10.
    pub fn new(dim: Dim, rows: &[Vec<C64>]) -> Result<Self> {
        let n = dim.size();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: rows.len(),
            });
        }
        let mut m = zero_mat();
        for (i, row) in rows.iter().enumerate() {
            m[i][..n].copy_from_slice(row);
        }
        let rho = DensityMatrix { dim, m };
        if !rho.is_hermitian(INPUT_TOLERANCE) {
            return Err(Error::invalid("density matrix", "not Hermitian"));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > INPUT_TOLERANCE || tr.im.abs() > INPUT_TOLERANCE {
            return Err(Error::invalid("density matrix", format!("trace is {tr}")));
        }
        if rho.eigenvalues().iter().any(|&l| l < -INPUT_TOLERANCE) {
            return Err(Error::invalid("density matrix", "negative eigenvalue"));
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let n = psi.dim.size();
        let mut m = zero_mat();
        for i in 0..n {
            for j in 0..n {
                m[i][j] = psi.amps[i] * psi.amps[j].conj();
            }
        }
        DensityMatrix { dim: psi.dim, m }
    }

    pub(crate) fn from_raw(dim: Dim, m: Mat3) -> Self {
        DensityMatrix { dim, m }
    }

    pub(crate) fn raw(&self) -> &Mat3 {
        &self.m
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.m[row][col]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim.size()).map(|i| self.m[i][i]).sum()
    }

    /// Tr(ρ²).
    pub fn purity(&self) -> f64 {
        let n = self.dim.size();
        let sq = mat_mul(&self.m, &self.m, n);
        (0..n).map(|i| sq[i][i].re).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim.size();
        (0..n).all(|i| (0..n).all(|j| (self.m[i][j] - self.m[j][i].conj()).norm() <= tol))
    }

    /// Eigenvalues in ascending order, computed from the characteristic
    /// polynomial of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = &self.m;
        match self.dim {
            Dim::Two => {
                let a = m[0][0].re;
                let d = m[1][1].re;
                let off = m[0][1].norm();
                let mean = 0.5 * (a + d);
                let r = (0.25 * (a - d) * (a - d) + off * off).sqrt();
                vec![mean - r, mean + r]
            }
            Dim::Three => hermitian3_eigenvalues(m),
        }
    }
}

fn hermitian3_eigenvalues(m: &Mat3) -> Vec<f64> {
    // Trigonometric solution of det(λI − H) = 0 for a Hermitian 3×3 matrix.
    let (a, b, c) = (m[0][0].re, m[1][1].re, m[2][2].re);
    let (d, e, f) = (m[0][1], m[1][2], m[0][2]);
    let p1 = d.norm_sqr() + e.norm_sqr() + f.norm_sqr();
    let q = (a + b + c) / 3.0;
    if p1 == 0.0 {
        let mut v = vec![a, b, c];
        v.sort_by(|x, y| x.total_cmp(y));
        return v;
    }
    let p2 = (a - q).powi(2) + (b - q).powi(2) + (c - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    // B = (H − qI)/p, r = det(B)/2
    let (ba, bb, bc) = ((a - q) / p, (b - q) / p, (c - q) / p);
    let (bd, be, bf) = (d / p, e / p, f / p);
    let det = ba * bb * bc + 2.0 * (bd * be * bf.conj()).re
        - ba * be.norm_sqr()
        - bb * bf.norm_sqr()
        - bc * bd.norm_sqr();
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let l2 = 3.0 * q - l1 - l3;
    let mut v = vec![l1, l2, l3];
    v.sort_by(|x, y| x.total_cmp(y));
    v
}

/// A unitary operator on a qubit or qutrit.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOp {
    dim: Dim,
    m: Mat3,
}

impl UnitaryOp {
    pub fn identity(dim: Dim) -> Self {
        UnitaryOp {
            dim,
            m: identity_mat(dim),
        }
    }

    /// Builds an operator from rows and checks U†U = I within
    /// [`INPUT_TOLERANCE`].
    pub fn new(dim: Dim, rows: &[Vec<C64>]) -> Result<Self> {
        let n = dim.size();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: rows.len(),
            });
        }
        let mut m = zero_mat();
        for (i, row) in rows.iter().enumerate() {
            m[i][..n].copy_from_slice(row);
        }
        let u = UnitaryOp { dim, m };
        let err = u.unitarity_error();
        if !(err <= INPUT_TOLERANCE) {
            return Err(Error::NotUnitary(err));
        }
        Ok(u)
    }

    pub(crate) fn from_raw(dim: Dim, m: Mat3) -> Self {
        UnitaryOp { dim, m }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.m[row][col]
    }

    pub fn dagger(&self) -> Self {
        UnitaryOp {
            dim: self.dim,
            m: adjoint(&self.m, self.dim.size()),
        }
    }

    /// Largest elementwise deviation of U†U from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim.size();
        let prod = mat_mul(&adjoint(&self.m, n), &self.m, n);
        let id = identity_mat(self.dim);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = (prod[i][j] - id[i][j]).norm();
                // NaN must not compare as "small"
                worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
            }
        }
        worst
    }

    /// Largest elementwise distance to another operator of the same size.
    pub fn max_abs_diff(&self, other: &UnitaryOp) -> f64 {
        let n = self.dim.size();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }

    /// `self · rhs`, i.e. `rhs` acts first.
    pub fn try_mul(&self, rhs: &UnitaryOp) -> Result<UnitaryOp> {
        check_same(self.dim, rhs.dim)?;
        Ok(UnitaryOp {
            dim: self.dim,
            m: mat_mul(&self.m, &rhs.m, self.dim.size()),
        })
    }
}

impl Mul for &UnitaryOp {
    type Output = UnitaryOp;

    /// Panics on dimension mismatch; use [`UnitaryOp::try_mul`] otherwise.
    fn mul(self, rhs: &UnitaryOp) -> UnitaryOp {
        self.try_mul(rhs).expect("operator dimensions differ")
    }
}

pub fn apply_unitary(u: &UnitaryOp, psi: &PureState) -> Result<PureState> {
    check_same(u.dim, psi.dim)?;
    let n = psi.dim.size();
    let mut out = [ZERO; 3];
    for (i, o) in out.iter_mut().enumerate().take(n) {
        *o = (0..n).map(|k| u.m[i][k] * psi.amps[k]).sum();
    }
    Ok(PureState {
        dim: psi.dim,
        amps: out,
    })
}

/// `U ρ U†`.
pub fn apply_unitary_dm(u: &UnitaryOp, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_same(u.dim, rho.dim)?;
    let n = rho.dim.size();
    let left = mat_mul(&u.m, &rho.m, n);
    Ok(DensityMatrix {
        dim: rho.dim,
        m: mat_mul(&left, &adjoint(&u.m, n), n),
    })
}

/// Occupation probabilities of the computational basis states.
pub trait Populations {
    fn populations(&self) -> Vec<f64>;
}

impl Populations for PureState {
    fn populations(&self) -> Vec<f64> {
        self.amplitudes().iter().map(|a| a.norm_sqr()).collect()
    }
}

impl Populations for DensityMatrix {
    fn populations(&self) -> Vec<f64> {
        (0..self.dim.size()).map(|i| self.m[i][i].re).collect()
    }
}

pub fn populations<S: Populations + ?Sized>(state: &S) -> Vec<f64> {
    state.populations()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_x() -> UnitaryOp {
        UnitaryOp::new(Dim::Two, &[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap()
    }

    #[test]
    fn identity_leaves_state_alone() {
        let psi = PureState::basis(Dim::Three, 0).unwrap();
        let out = apply_unitary(&UnitaryOp::identity(Dim::Three), &psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn bit_flip_on_qubit() {
        let g = PureState::basis(Dim::Two, 0).unwrap();
        let out = apply_unitary(&sigma_x(), &g).unwrap();
        assert_eq!(out.populations(), vec![0.0, 1.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let psi = PureState::basis(Dim::Three, 1).unwrap();
        assert!(matches!(
            apply_unitary(&sigma_x(), &psi),
            Err(Error::DimensionMismatch { expected: 2, actual: 3 })
        ));
        let rho = DensityMatrix::from_pure(&psi);
        assert!(apply_unitary_dm(&sigma_x(), &rho).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PureState::new(&[ONE, ONE]).is_err());
        assert!(PureState::new(&[ONE]).is_err());
        assert!(UnitaryOp::new(Dim::Two, &[vec![ONE, ONE], vec![ZERO, ONE]]).is_err());
        let not_psd = DensityMatrix::new(
            Dim::Two,
            &[vec![c(1.5, 0.0), ZERO], vec![ZERO, c(-0.5, 0.0)]],
        );
        assert!(not_psd.is_err());
    }

    #[test]
    fn populations_of_simple_states() {
        let one = PureState::basis(Dim::Three, 1).unwrap();
        assert_eq!(populations(&one), vec![0.0, 1.0, 0.0]);
        let s = PureState::from_real(&[1.0, 0.0, 1.0]).unwrap();
        let p = populations(&s);
        assert!((p[0] - 0.5).abs() < 1e-15 && p[1] == 0.0 && (p[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dm_conjugation_keeps_trace_and_purity() {
        let h = UnitaryOp::new(
            Dim::Two,
            &[
                vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
                vec![c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
            ],
        )
        .unwrap();
        let rho = DensityMatrix::from_pure(&PureState::basis(Dim::Two, 0).unwrap());
        let out = apply_unitary_dm(&h, &rho).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-12);
        assert!((out.purity() - 1.0).abs() < 1e-12);
        assert!(out.is_hermitian(1e-12));
        let id = apply_unitary_dm(&UnitaryOp::identity(Dim::Two), &rho).unwrap();
        assert_eq!(id, rho);
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let rho = DensityMatrix::new(
            Dim::Three,
            &[
                vec![c(0.5, 0.0), ZERO, ZERO],
                vec![ZERO, c(0.3, 0.0), ZERO],
                vec![ZERO, ZERO, c(0.2, 0.0)],
            ],
        )
        .unwrap();
        let ev = rho.eigenvalues();
        assert!((ev[0] - 0.2).abs() < 1e-12 && (ev[1] - 0.3).abs() < 1e-12 && (ev[2] - 0.5).abs() < 1e-12);

        let psi = PureState::new(&[c(0.6, 0.0), c(0.0, 0.48), c(0.64, 0.0)]).unwrap();
        let ev = DensityMatrix::from_pure(&psi).eigenvalues();
        assert!(ev[0].abs() < 1e-12 && ev[1].abs() < 1e-12 && (ev[2] - 1.0).abs() < 1e-12);
    }
}
