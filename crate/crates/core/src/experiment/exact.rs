//! Exhaustive oracles for binary noise.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::noise::PulseSchedule;
use crate::protocol::Protocol;

/// Largest N accepted by [`exact_binary_mean`].
pub const MAX_EXACT_N: usize = 20;

/// Exact E[marker] for ±θ noise with one sample per pulse, where the sign
/// starts equiprobable and flips between consecutive pulses with
/// probability `flip_prob`. All 2^N sign sequences are enumerated.
pub fn exact_binary_mean(protocol: Protocol, n: usize, theta: f64, phi: f64, flip_prob: f64) -> Result<f64> {
    if n == 0 || n > MAX_EXACT_N {
        return Err(Error::invalid("N", format!("{n} outside 1..={MAX_EXACT_N}")));
    }
    if !(0.0..=1.0).contains(&flip_prob) {
        return Err(Error::invalid("flip_prob", format!("{flip_prob} is not a probability")));
    }
    let mut total = 0.0;
    let mut thetas = vec![0.0; n];
    for bits in 0u32..(1 << n) {
        let mut weight = 0.5;
        for (j, t) in thetas.iter_mut().enumerate() {
            let up = bits >> j & 1 == 1;
            *t = if up { theta } else { -theta };
            if j > 0 {
                let prev = bits >> (j - 1) & 1 == 1;
                weight *= if up == prev { 1.0 - flip_prob } else { flip_prob };
            }
        }
        if weight == 0.0 {
            continue;
        }
        let schedule = PulseSchedule::from_angles_fixed_axis(&thetas, phi)?;
        total += weight * protocol.run(&schedule)?.marker;
    }
    Ok(total)
}

/// C(N, k)/2^N.
pub fn binomial_pmf(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let ln_c: f64 = (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum();
    (ln_c - n as f64 * std::f64::consts::LN_2).exp()
}

/// Gaussian approximation √(2/(πN)) exp(−2(k−N/2)²/N) of [`binomial_pmf`].
pub fn binomial_gaussian_limit(n: usize, k: usize) -> f64 {
    let nf = n as f64;
    let d = k as f64 - nf / 2.0;
    (2.0 / (PI * nf)).sqrt() * (-2.0 * d * d / nf).exp()
}
