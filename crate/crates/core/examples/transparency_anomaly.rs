//! Binary noise at N where every pulse window sums to a multiple of 4π.

use ifm_noise::experiment::presets::{BINARY_STRONG, BINARY_TOTAL_TIME, BINARY_WEAK};
use ifm_noise::experiment::sweep_kappa_n;
use ifm_noise::protocol::Protocol;

fn main() -> ifm_noise::Result<()> {
    let n_values = [1, 2, 3, 5, 10, 15, 20, 40];
    for (label, dt) in [("δθ = π/250", BINARY_STRONG), ("δθ = π/1000", BINARY_WEAK)] {
        let result = sweep_kappa_n(Protocol::Cifm, dt, &[BINARY_TOTAL_TIME / 10.0], &n_values, 100, 9)?;
        println!("{label}, κ⁻¹ = T/10, cIFM:");
        for p in &result.points {
            println!("  N = {:>2}  E[p0] = {:.3}{}", p.n, p.mean, if p.anomaly { "  (transparent)" } else { "" });
        }
    }
    Ok(())
}
