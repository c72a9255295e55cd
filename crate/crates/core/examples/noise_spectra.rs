//! Spectral slopes of the colored generators and telegraph statistics.

use ifm_noise::noise::{
    estimate_acf, estimate_psd, fit_telegraph_kappa, gen_colored, gen_telegraph, telegraph_lorentzian,
    NoiseColor, Psd, TelegraphSpec, Window,
};
use ifm_noise::rng::derive_seed;

fn main() -> ifm_noise::Result<()> {
    for color in NoiseColor::ALL {
        let spectra = (0..8)
            .map(|r| estimate_psd(&gen_colored(color, 1 << 16, derive_seed(1, &[r]))?, 1.0, Window::Hann, 16))
            .collect::<ifm_noise::Result<Vec<_>>>()?;
        let slope = Psd::mean_of(&spectra)?.slope_db_per_decade()?;
        println!("{:<7} slope {slope:+6.2} dB/decade (nominal {:+})", color.name(), color.slope_db_per_decade());
    }

    let (kappa, fs, len, traces) = (50.0, 2000.0, 8192, 200);
    let spec = TelegraphSpec::new(kappa, 1.0, fs)?;
    let mut acf = vec![0.0; 200];
    let mut spectra = Vec::new();
    for r in 0..traces {
        let xs = gen_telegraph(&spec, len as f64 / fs, derive_seed(2, &[r]))?;
        for (a, x) in acf.iter_mut().zip(estimate_acf(&xs, 199)?) {
            *a += x / traces as f64;
        }
        spectra.push(estimate_psd(&xs, fs, Window::Hann, 8)?);
    }
    println!("telegraph κ = {kappa}: ACF fit gives κ = {:.2}", fit_telegraph_kappa(&acf, fs)?);
    let psd = Psd::mean_of(&spectra)?;
    for k in [1, 4, 16, 64] {
        let f = psd.frequencies[k];
        println!("  S({f:7.2} Hz) = {:.4e}, Lorentzian {:.4e}", psd.two_sided(k), telegraph_lorentzian(1.0, kappa, f));
    }
    Ok(())
}
