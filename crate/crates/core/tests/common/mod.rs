//! A deliberately plain simulator, written straight from the gate
//! definitions, used as an independent route for cross-checks.
#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M3 = [[C; 3]; 3];
pub type V3 = [C; 3];

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn mat_vec(m: &M3, v: &V3) -> V3 {
    let mut out = [c(0.0); 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

/// Rotation by π/(N+1) in the 0–1 subspace.
pub fn beam_splitter(n: usize) -> M3 {
    let half = std::f64::consts::PI / (n as f64 + 1.0) / 2.0;
    let (s, co) = half.sin_cos();
    [
        [c(co), c(-s), c(0.0)],
        [c(s), c(co), c(0.0)],
        [c(0.0), c(0.0), c(1.0)],
    ]
}

/// exp(−iθ/2 (cos φ X + sin φ Y)) on levels (a, b) of a 3-level system.
pub fn rotation(theta: f64, phi: f64, a: usize, b: usize) -> M3 {
    let mut m = [[c(0.0); 3]; 3];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = c(1.0);
    }
    let (s, co) = (theta / 2.0).sin_cos();
    let i = C::new(0.0, 1.0);
    m[a][a] = c(co);
    m[b][b] = c(co);
    m[a][b] = -i * s * C::from_polar(1.0, phi);
    m[b][a] = -i * s * C::from_polar(1.0, -phi);
    m
}

pub fn cifm_state(thetas: &[f64], phis: &[f64]) -> V3 {
    let n = thetas.len();
    let s = beam_splitter(n);
    let mut v = mat_vec(&s, &[c(1.0), c(0.0), c(0.0)]);
    for (&t, &p) in thetas.iter().zip(phis) {
        v = mat_vec(&rotation(t, p, 1, 2), &v);
        v = mat_vec(&s, &v);
    }
    v
}

pub fn pops(v: &V3) -> [f64; 3] {
    [v[0].norm_sqr(), v[1].norm_sqr(), v[2].norm_sqr()]
}

/// pIFM marker: after each pulse the |2⟩ component is discarded. Starting
/// from a pure state the unnormalized live part stays pure.
pub fn pifm_p0(thetas: &[f64], phis: &[f64]) -> f64 {
    let n = thetas.len();
    let s = beam_splitter(n);
    let mut v = mat_vec(&s, &[c(1.0), c(0.0), c(0.0)]);
    for (&t, &p) in thetas.iter().zip(phis) {
        v = mat_vec(&rotation(t, p, 1, 2), &v);
        v[2] = c(0.0);
        v = mat_vec(&s, &v);
    }
    v[0].norm_sqr()
}

/// Qubit p_e, using the 0–1 block of the 3-level rotation.
pub fn qubit_pe(thetas: &[f64], phis: &[f64]) -> f64 {
    let mut v = [c(1.0), c(0.0), c(0.0)];
    for (&t, &p) in thetas.iter().zip(phis) {
        v = mat_vec(&rotation(t, p, 0, 1), &v);
    }
    v[1].norm_sqr()
}
