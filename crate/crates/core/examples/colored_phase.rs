//! Fixed-amplitude pulses whose axis follows colored noise.

use ifm_noise::experiment::presets::colored_phase_sweep;
use ifm_noise::experiment::run_sweep;
use ifm_noise::noise::NoiseColor;
use ifm_noise::protocol::Protocol;

fn main() -> ifm_noise::Result<()> {
    for protocol in [Protocol::Cifm, Protocol::Pifm] {
        for color in NoiseColor::ALL {
            let mut config = colored_phase_sweep(protocol, color, 200, 13);
            config.n_values = vec![5, 10, 20, 40];
            let means: Vec<String> = run_sweep(&config)?
                .points
                .iter()
                .map(|p| format!("{:.3}", p.mean))
                .collect();
            println!("{:<5} {:<7} E[p0] at N = 5, 10, 20, 40: {}", protocol.name(), color.name(), means.join(" "));
        }
    }
    Ok(())
}
