//! Closed forms that the pulse algebra reproduces.

use std::f64::consts::PI;

use ifm_noise::noise::PulseSchedule;
use ifm_noise::protocol::Protocol;
use ifm_noise::pulse::{lumped_pulse_amplitudes, n2_alternating_state, pifm_pi_train_p0};

fn main() -> ifm_noise::Result<()> {
    println!("pIFM under N π pulses vs cos^(2(N+1))(π/(2(N+1))):");
    for n in [1, 2, 4, 10, 40] {
        let simulated = Protocol::Pifm
            .run(&PulseSchedule::from_angles_fixed_axis(&vec![PI; n], -PI / 2.0)?)?
            .marker;
        println!("  N = {n:>2}: {simulated:.12} {:.12}", pifm_pi_train_p0(n)?);
    }

    let (n, slot, theta) = (6, 2, 0.8);
    let mut thetas = vec![0.0; n];
    thetas[slot - 1] = n as f64 * theta;
    let schedule = PulseSchedule::from_angles_fixed_axis(&thetas, -PI / 2.0)?;
    let pops = Protocol::Cifm.run(&schedule)?.populations;
    let amps = lumped_pulse_amplitudes(n, slot, theta)?;
    println!("lumped pulse, N = {n}, slot {slot}, θ = {theta}:");
    for k in 0..3 {
        println!("  |{k}⟩ simulated {:.12}  formula {:.12}", pops[k], amps[k] * amps[k]);
    }

    let theta = 0.01;
    let state = n2_alternating_state(theta)?;
    println!("N = 2, (+θ, −θ) with θ = {theta}: amplitudes {:?}", state.amplitudes());
    Ok(())
}
