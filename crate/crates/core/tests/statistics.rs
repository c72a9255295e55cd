use ifm_noise::experiment::FcsConfig;
use ifm_noise::noise::{poisson_pmf, telegraph_held_samples, telegraph_realization, white_samples, TelegraphSpec};
use ifm_noise::rng::{derive_seed, rng_from_seed};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Smallest p-value accepted; the tests use fixed seeds, so this only
/// guards against a wrong distribution, not bad luck.
const P_MIN: f64 = 1e-3;

/// Pearson χ² p-value for counts against expected probabilities, pooling
/// the tail so every expected cell holds at least five.
fn chi_square_p(observed: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        o_acc += o as f64;
        e_acc += p * total as f64;
        if e_acc >= 5.0 {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    // remaining tail mass goes into the last cell
    let tail = total as f64 - cells.iter().map(|c| c.1).sum::<f64>();
    if let Some(last) = cells.last_mut() {
        last.0 += o_acc;
        last.1 += tail.max(0.0);
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = (cells.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

fn z_p(z: f64) -> f64 {
    2.0 * (1.0 - Normal::standard().cdf(z.abs()))
}

#[test]
fn telegraph_switch_counts_are_poisson() {
    let spec = TelegraphSpec::new(3.0, 1.0, 50.0).unwrap();
    let duration = 2.0;
    let mut counts = vec![0u64; 40];
    for r in 0..5000u64 {
        let real = telegraph_realization(&spec, duration, &mut rng_from_seed(derive_seed(1, &[r]))).unwrap();
        counts[real.switch_times.len().min(39)] += 1;
    }
    let p = chi_square_p(&counts, &poisson_pmf(6.0, 39));
    assert!(p > P_MIN, "p = {p}");
}

#[test]
fn held_telegraph_flips_at_the_predicted_rate() {
    let spec = TelegraphSpec::new(2.0, 1.0, 100.0).unwrap();
    let hold = 0.1;
    let (mut flips, mut pairs) = (0u64, 0u64);
    for r in 0..400u64 {
        let xs = telegraph_held_samples(&spec, 10.0, hold, &mut rng_from_seed(derive_seed(2, &[r]))).unwrap();
        for w in xs.chunks(10).collect::<Vec<_>>().windows(2) {
            pairs += 1;
            flips += (w[0][0] != w[1][0]) as u64;
        }
    }
    let q = spec.flip_probability(hold);
    let z = (flips as f64 - q * pairs as f64) / (q * (1.0 - q) * pairs as f64).sqrt();
    assert!(z_p(z) > P_MIN, "z = {z}");
}

#[test]
fn clipped_gaussian_sits_on_its_midpoint() {
    let xs = white_samples(0.0, 3.0, 20_000, &mut rng_from_seed(3)).unwrap();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(z_p((mean - 1.5) / (sd / n.sqrt())) > P_MIN);
    // ±3σ clipping keeps the spread just under (hi − lo)/6
    assert!((sd - 0.5).abs() < 0.01, "sd = {sd}");
}

#[test]
fn counting_events_are_poisson() {
    let config = FcsConfig {
        kappa: 4.0,
        theta: 0.1,
        total_time: 1.5,
        n_slots: 16,
        lambdas: vec![0.0],
        realizations: 100,
        master_seed: 4,
    };
    let mut counts = vec![0u64; 30];
    for r in 0..4000 {
        let m: u32 = config.event_counts(r).unwrap().iter().sum();
        counts[(m as usize).min(29)] += 1;
    }
    let p = chi_square_p(&counts, &poisson_pmf(6.0, 29));
    assert!(p > P_MIN, "p = {p}");
}
