//! Zero-sum, general and small-amplitude white noise at a few N.

use ifm_noise::experiment::presets::{amplitude_and_phase, small_amplitude, zero_sum_amplitude};
use ifm_noise::experiment::{run_sweep, SweepConfig};
use ifm_noise::protocol::Protocol;

fn show(title: &str, make: fn(Protocol, usize, u64) -> SweepConfig) -> ifm_noise::Result<()> {
    println!("{title}");
    for protocol in Protocol::ALL {
        let mut config = make(protocol, 200, 17);
        config.n_values = vec![2, 10, 30, 100];
        let result = run_sweep(&config)?;
        let means: Vec<String> = result
            .points
            .iter()
            .map(|p| format!("N={} {:.3}±{:.3}", p.n, p.mean, p.standard_error()))
            .collect();
        println!("  {:<6} {}", protocol.name(), means.join("  "));
    }
    Ok(())
}

fn main() -> ifm_noise::Result<()> {
    show("zero-sum amplitude noise", zero_sum_amplitude)?;
    show("amplitude and phase noise", amplitude_and_phase)?;
    show("small amplitude noise", small_amplitude)
}
