//! The `ifm-noise` command line.
//!
//! Exit codes: 0 on success, 2 for usage and configuration errors, 3 when a
//! run fails after its configuration was accepted.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::experiment::fcs::{fcs_estimate, poisson_generating_function, poisson_moment_report, zero_freq_psd_check};
use crate::experiment::{run_sweep, table1, SweepResult};
use crate::noise::{
    estimate_acf, estimate_psd, fit_telegraph_kappa, gen_colored, gen_telegraph, telegraph_acf,
    telegraph_lorentzian, NoiseColor, Psd, TelegraphSpec, Window,
};
use crate::rng::derive_seed;

pub use config::{ConfigError, FcsFile, ResolvedFcs, ResolvedSweep, SweepFile, SweepMode};
pub use output::{Format, Manifest, OutDir, SeedSource, Table};

/// Environment variable that overrides a config file's seed (but not `--seed`).
pub const SEED_ENV: &str = "IFM_NOISE_SEED";

#[derive(Debug, Parser)]
#[command(name = "ifm-noise", about = "Interaction-free noise detector simulations", disable_version_flag = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration (sweep and fcs).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo ensemble sweep over N and a noise parameter.
    Sweep,
    /// The twelve N = 4 π-pulse configurations.
    Table1,
    /// Counting-statistics generating function and moments.
    Fcs,
    /// Generate noise traces with their spectra.
    Noise(NoiseArgs),
    /// Print the version.
    Version,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NoiseArgs {
    #[arg(long, value_parser = parse_color, conflicts_with = "telegraph", required_unless_present = "telegraph")]
    pub color: Option<NoiseColor>,
    #[arg(long)]
    pub telegraph: bool,
    #[arg(long, default_value_t = 50_000)]
    pub samples: usize,
    /// Hz; telegraph traces default to 20κ.
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Telegraph switching rate (Hz).
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Periodogram segments per trace.
    #[arg(long, default_value_t = 8)]
    pub segments: usize,
    #[arg(long, default_value_t = 1)]
    pub traces: usize,
    #[arg(long, default_value = "noise")]
    pub name: String,
}

fn parse_color(s: &str) -> Result<NoiseColor, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Run(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Run(_) => 3,
        }
    }
}

/// What a successful command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: PathBuf,
    pub outputs: Vec<PathBuf>,
}

/// Seed precedence: `--seed`, then the environment, then the config file.
pub fn resolve_seed(
    flag: Option<u64>,
    env: Option<&str>,
    from_config: Option<u64>,
) -> Result<(u64, SeedSource), CliError> {
    if let Some(s) = flag {
        return Ok((s, SeedSource::Flag));
    }
    if let Some(raw) = env {
        let s = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}=`{raw}` is not an unsigned 64-bit integer")))?;
        return Ok((s, SeedSource::Env));
    }
    Ok(match from_config {
        Some(s) => (s, SeedSource::Config),
        None => (0, SeedSource::Default),
    })
}

fn read_config(cli: &Cli) -> Result<(String, String), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("this command needs --config PATH".into()))?;
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: shown.clone(),
        key: None,
        line: None,
        message: format!("cannot read file: {e}"),
    })?;
    Ok((shown, text))
}

struct Run<'a> {
    cli: &'a Cli,
    command: &'static str,
    started: String,
    threads: usize,
    out: OutDir,
    warnings: Vec<String>,
}

impl<'a> Run<'a> {
    fn start(cli: &'a Cli, command: &'static str, threads: usize) -> Result<Self, CliError> {
        Ok(Run {
            cli,
            command,
            started: output::now_rfc3339(),
            threads,
            out: OutDir::create(&cli.out)?,
            warnings: Vec::new(),
        })
    }

    fn finish<T: Serialize>(mut self, stem: &str, config: &T, seed: (u64, SeedSource)) -> Result<Outcome, CliError> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command.to_string(),
            config_path: self.cli.config.as_ref().map(|p| p.display().to_string()),
            config: serde_json::to_value(config).expect("configuration serializes"),
            config_hash: output::config_hash(config),
            seed: seed.0,
            seed_source: seed.1,
            threads: self.threads,
            format: self.cli.format,
            started_at: self.started,
            finished_at: output::now_rfc3339(),
            outputs: self.out.written().to_vec(),
            warnings: self.warnings,
        };
        let path = self.out.json(&format!("{stem}_manifest.json"), &manifest)?;
        let outputs = manifest.outputs.iter().map(|o| self.out.path().join(o)).collect();
        Ok(Outcome {
            manifest: path,
            outputs,
        })
    }
}

fn sweep_table(results: &[SweepResult]) -> Table {
    let mut t = Table::new(&[
        "protocol",
        "n",
        "param",
        "mean",
        "variance",
        "std",
        "standard_error",
        "realizations",
        "anomaly",
        "seed",
    ]);
    for r in results {
        for p in &r.points {
            t.push(vec![
                r.protocol.name().into(),
                p.n.into(),
                p.param.into(),
                p.mean.into(),
                p.variance.into(),
                p.std.into(),
                p.standard_error().into(),
                p.count.into(),
                p.anomaly.into(),
                r.master_seed.into(),
            ]);
        }
    }
    t
}

fn cmd_sweep(cli: &Cli, env_seed: Option<&str>, threads: usize) -> Result<Outcome, CliError> {
    let (path, text) = read_config(cli)?;
    let file: SweepFile = config::parse_toml(&path, &text)?;
    let seed = resolve_seed(cli.seed, env_seed, file.seed)?;
    let resolved = file.resolve(&path, &text, seed.0)?;
    let mut run = Run::start(cli, "sweep", threads)?;
    let mut results = Vec::new();
    for config in resolved.configs() {
        let result = run_sweep(&config)?;
        for p in result.points.iter().filter(|p| p.anomaly) {
            run.warnings.push(format!(
                "{} N = {} param = {}: pulse windows are multiples of 4π (transparency)",
                result.protocol.name(),
                p.n,
                p.param
            ));
        }
        results.push(result);
    }
    let table = sweep_table(&results);
    run.out.table(&format!("{}_stats", resolved.name), &table, cli.format)?;
    println!(
        "sweep `{}`: {} protocol(s), {} grid points, R = {}, seed {} ({:?})",
        resolved.name,
        results.len(),
        table.rows.len(),
        resolved.realizations,
        seed.0,
        seed.1
    );
    run.finish(&resolved.name, &resolved, seed)
}

fn cmd_table1(cli: &Cli, threads: usize) -> Result<Outcome, CliError> {
    let mut run = Run::start(cli, "table1", threads)?;
    let rows = table1()?;
    let mut t = Table::new(&[
        "configuration",
        "cifm_p0",
        "pifm_p0",
        "cifm_3dp",
        "pifm_3dp",
        "reference_cifm",
        "reference_pifm",
        "cifm_match",
        "pifm_match",
    ]);
    for r in &rows {
        use crate::experiment::table1::round3;
        println!(
            "{:<18} cIFM {} (reference {}) {}   pIFM {} (reference {}) {}",
            r.label,
            round3(r.cifm),
            round3(r.reference_cifm),
            if r.cifm_matches() { "match" } else { "DIFFERS" },
            round3(r.pifm),
            round3(r.reference_pifm),
            if r.pifm_matches() { "match" } else { "DIFFERS" },
        );
        t.push(vec![
            r.label.clone().into(),
            r.cifm.into(),
            r.pifm.into(),
            round3(r.cifm).into(),
            round3(r.pifm).into(),
            round3(r.reference_cifm).into(),
            round3(r.reference_pifm).into(),
            r.cifm_matches().into(),
            r.pifm_matches().into(),
        ]);
    }
    run.out.table("table1", &t, cli.format)?;
    let seed = resolve_seed(cli.seed, None, None)?;
    run.finish("table1", &serde_json::json!({ "command": "table1" }), seed)
}

fn cmd_fcs(cli: &Cli, env_seed: Option<&str>, threads: usize) -> Result<Outcome, CliError> {
    let (path, text) = read_config(cli)?;
    let file: FcsFile = config::parse_toml(&path, &text)?;
    let seed = resolve_seed(cli.seed, env_seed, file.seed)?;
    let resolved = file.resolve(&path, &text, seed.0)?;
    let mut run = Run::start(cli, "fcs", threads)?;
    let fcs = &resolved.fcs;
    let gf = fcs_estimate(fcs)?;
    let mut t = Table::new(&["lambda", "re", "im", "re_err", "im_err", "analytic_re", "analytic_im"]);
    for (k, &l) in gf.lambda_values.iter().enumerate() {
        let exact = poisson_generating_function(fcs.kappa_t(), fcs.theta, l);
        t.push(vec![
            l.into(),
            gf.re[k].into(),
            gf.im[k].into(),
            gf.re_err[k].into(),
            gf.im_err[k].into(),
            exact.re.into(),
            exact.im.into(),
        ]);
    }
    run.out.table(&format!("{}_gf", resolved.name), &t, cli.format)?;
    let moments = poisson_moment_report(fcs, resolved.h)?;
    let zero_freq = zero_freq_psd_check(fcs, resolved.h)?;
    println!(
        "fcs `{}`: κT = {}, ⟨m⟩ = {:.4}, var/mean = {:.4}, T·S(0) vs variance: {:.3e} relative",
        resolved.name, moments.kappa_t, moments.mean_m, moments.variance_mean_ratio, zero_freq.relative_difference
    );
    run.out.json(
        &format!("{}_moments.json", resolved.name),
        &serde_json::json!({ "moments": moments, "zero_frequency": zero_freq }),
    )?;
    run.finish(&resolved.name, &resolved, seed)
}

#[derive(Serialize)]
struct NoiseRun<'a> {
    args: &'a NoiseArgs,
    sample_rate: f64,
    generated_samples: usize,
    seed: u64,
}

fn psd_table(psd: &Psd, reference: Option<&dyn Fn(f64) -> f64>) -> Table {
    let mut cols = vec!["freq_hz", "psd", "psd_db"];
    if reference.is_some() {
        cols.push("reference");
    }
    let mut t = Table::new(&cols);
    for (k, (&f, &p)) in psd.frequencies.iter().zip(&psd.density).enumerate().skip(1) {
        let mut row = vec![f.into(), p.into(), (10.0 * p.log10()).into()];
        if let Some(r) = reference {
            let one_sided = if k + 1 == psd.frequencies.len() { 1.0 } else { 2.0 };
            row.push((one_sided * r(f)).into());
        }
        t.push(row);
    }
    t
}

fn cmd_noise(cli: &Cli, args: &NoiseArgs, env_seed: Option<&str>, threads: usize) -> Result<Outcome, CliError> {
    if args.samples < 2 || args.traces == 0 || args.segments == 0 {
        return Err(CliError::Usage("--samples must be ≥ 2, --traces and --segments ≥ 1".into()));
    }
    let seed = resolve_seed(cli.seed, env_seed, None)?;
    let fs = match (args.sample_rate, args.telegraph) {
        (Some(fs), _) => fs,
        (None, true) => 20.0 * args.kappa,
        (None, false) => 1.0,
    };
    let generated = if args.telegraph {
        args.samples
    } else {
        args.samples.next_power_of_two().max(64)
    };
    let mut run = Run::start(cli, "noise", threads)?;
    let traces: Vec<Vec<f64>> = (0..args.traces)
        .map(|r| {
            let s = derive_seed(seed.0, &[r as u64]);
            let mut xs = match args.color {
                Some(color) => gen_colored(color, generated, s)?,
                None => {
                    let spec = TelegraphSpec::new(args.kappa, args.amplitude, fs)?;
                    gen_telegraph(&spec, args.samples as f64 / fs, s)?
                }
            };
            xs.truncate(args.samples);
            if args.color.is_some() {
                xs.iter_mut().for_each(|x| *x *= args.amplitude);
            }
            Ok(xs)
        })
        .collect::<Result<_, Error>>()?;
    let usable = args.samples - args.samples % args.segments;
    if usable < 2 * args.segments {
        return Err(CliError::Usage(format!(
            "{} samples are too few for {} segments",
            args.samples, args.segments
        )));
    }
    let spectra = traces
        .iter()
        .map(|xs| estimate_psd(&xs[..usable], fs, Window::Hann, args.segments))
        .collect::<Result<Vec<_>, _>>()?;
    let psd = Psd::mean_of(&spectra)?;
    let slope = psd.slope_db_per_decade()?;
    let stem = &args.name;
    run.out.write_with(&format!("{stem}_trace.{}", cli.format.extension()), |w| {
        let mut t = Table::new(&["time_s", "value"]);
        for (k, &v) in traces[0].iter().enumerate() {
            t.push(vec![(k as f64 / fs).into(), v.into()]);
        }
        t.write(w, cli.format)
    })?;
    let mut summary = serde_json::json!({
        "sample_rate": fs,
        "samples": args.samples,
        "traces": args.traces,
        "psd_samples_per_trace": usable,
        "slope_db_per_decade": slope,
    });
    if let Some(color) = args.color {
        run.out.table(&format!("{stem}_psd"), &psd_table(&psd, None), cli.format)?;
        summary["color"] = serde_json::json!(color.name());
        summary["expected_slope_db_per_decade"] = serde_json::json!(color.slope_db_per_decade());
        println!(
            "{} noise: {} x {} samples, PSD slope {:+.2} dB/decade (nominal {:+.0})",
            color.name(),
            args.traces,
            args.samples,
            slope,
            color.slope_db_per_decade()
        );
    } else {
        let (x, kappa) = (args.amplitude, args.kappa);
        let lorentz = move |f: f64| telegraph_lorentzian(x, kappa, f);
        run.out.table(&format!("{stem}_psd"), &psd_table(&psd, Some(&lorentz)), cli.format)?;
        let max_lag = (args.samples / 4).max(1).min(args.samples - 1);
        let mut acf = vec![0.0; max_lag + 1];
        for xs in &traces {
            for (a, r) in acf.iter_mut().zip(estimate_acf(xs, max_lag)?) {
                *a += r / args.traces as f64;
            }
        }
        let fitted = fit_telegraph_kappa(&acf, fs)?;
        let mut t = Table::new(&["lag_s", "acf", "reference"]);
        for (k, &r) in acf.iter().enumerate() {
            let tau = k as f64 / fs;
            t.push(vec![tau.into(), r.into(), telegraph_acf(x, kappa, tau).into()]);
        }
        run.out.table(&format!("{stem}_acf"), &t, cli.format)?;
        summary["kappa"] = serde_json::json!(kappa);
        summary["fitted_kappa"] = serde_json::json!(fitted);
        println!(
            "telegraph noise: {} x {} samples at {} Hz, κ = {}, ACF-fitted κ = {:.4}",
            args.traces, args.samples, fs, kappa, fitted
        );
    }
    run.out.json(&format!("{stem}_summary.json"), &summary)?;
    let config = NoiseRun {
        args,
        sample_rate: fs,
        generated_samples: generated,
        seed: seed.0,
    };
    run.finish(stem, &config, seed)
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs a parsed command line. `env_seed` is the value of [`SEED_ENV`].
pub fn run(cli: &Cli, env_seed: Option<&str>) -> Result<Option<Outcome>, CliError> {
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => n,
        None => default_threads(),
    };
    if let Command::Version = cli.command {
        println!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
        return Ok(None);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    pool.install(|| {
        match &cli.command {
            Command::Sweep => cmd_sweep(cli, env_seed, threads),
            Command::Table1 => cmd_table1(cli, threads),
            Command::Fcs => cmd_fcs(cli, env_seed, threads),
            Command::Noise(args) => cmd_noise(cli, args, env_seed, threads),
            Command::Version => unreachable!(),
        }
        .map(Some)
    })
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    match run(&cli, env_seed.as_deref()) {
        Ok(Some(outcome)) => {
            println!("manifest: {}", outcome.manifest.display());
            0
        }
        Ok(None) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some("2"), Some(3)).unwrap(), (1, SeedSource::Flag));
        assert_eq!(resolve_seed(None, Some("2"), Some(3)).unwrap(), (2, SeedSource::Env));
        assert_eq!(resolve_seed(None, None, Some(3)).unwrap(), (3, SeedSource::Config));
        assert_eq!(resolve_seed(None, None, None).unwrap(), (0, SeedSource::Default));
        assert_eq!(resolve_seed(None, Some("x"), None).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["ifm-noise", "noise", "--color", "pink", "--seed", "9", "--format", "json"]).unwrap();
        assert_eq!(cli.seed, Some(9));
        assert_eq!(cli.format, Format::Json);
        assert!(matches!(cli.command, Command::Noise(ref a) if a.color == Some(NoiseColor::Pink)));
        assert!(Cli::try_parse_from(["ifm-noise", "noise", "--color", "pink", "--telegraph"]).is_err());
        assert!(Cli::try_parse_from(["ifm-noise", "noise"]).is_err());
    }
}
