//! Generating function of Poisson kicks read out by a qubit.

use ifm_noise::cli::config::linspace;
use ifm_noise::experiment::fcs::{fcs_estimate, poisson_generating_function, poisson_moment_report, zero_freq_psd_check};
use ifm_noise::experiment::FcsConfig;

fn main() -> ifm_noise::Result<()> {
    let config = FcsConfig {
        kappa: 2.0e6,
        theta: 0.3,
        total_time: 2.0e-6,
        n_slots: 64,
        lambdas: linspace(-6.0, 6.0, 13),
        realizations: 4000,
        master_seed: 8,
    };
    let gf = fcs_estimate(&config)?;
    for (k, &l) in gf.lambda_values.iter().enumerate() {
        let exact = poisson_generating_function(config.kappa_t(), config.theta, l);
        println!(
            "λ = {l:+5.1}  Λ = {:+.4}{:+.4}i  exact {:+.4}{:+.4}i  (±{:.4})",
            gf.re[k], gf.im[k], exact.re, exact.im, gf.statistical_error[k]
        );
    }
    let m = poisson_moment_report(&config, 0.01)?;
    println!("⟨m⟩ = {:.3}, var(m)/⟨m⟩ = {:.3} (Poisson: 1)", m.mean_m, m.variance_mean_ratio);
    let z = zero_freq_psd_check(&config, 0.01)?;
    println!("variance {:.4e} vs T·S(0) {:.4e}", z.fcs_variance, z.psd_variance);
    Ok(())
}
