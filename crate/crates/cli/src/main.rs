// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use centrifuge::analysis::{
    extract_byz, fit_decaying_sinusoid, fit_exponential_decay, fit_resonance_peak, PeakModel, ISOTROPIC_OFFSET,
};
use centrifuge::rotor::{asymmetric_levels, resonance_frequency, RotorParams};
use centrifuge::runner::{
    decay_record, execute, parse_scan_csv, parse_trace_csv, peak_record, sinusoid_record, validate, write_file,
    ExperimentConfig, Record, Scenario,
};
use centrifuge::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status of a run that produced a failed check or a runtime error.
const EXIT_FAILURE: u8 = 1;
/// Exit status of a bad command line, config or input file.
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "centrifuge", version, about = "Optical-centrifuge rotor simulations and trace fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Alignment during the pulse and its decaying-sinusoid fit.
    Infield(RunArgs),
    /// Alignment at a fixed delay versus centrifuge frequency, with a peak fit.
    Scan(RunArgs),
    /// Post-pulse decay, its exponential fit and the adiabatic reference.
    Decay(RunArgs),
    /// The linear-static reference pulse alone.
    Reference(RunArgs),
    /// Fit a trace or scan CSV.
    Fit(FitArgs),
    /// Rotational levels and J -> J+2 resonance frequencies.
    Levels(LevelsArgs),
    /// Operator, frame, convergence and sampler checks for a config.
    Validate(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Output table format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Also write long-format plot_data.csv.
    #[arg(long)]
    plot_data: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitModel {
    Sinusoid,
    Decay,
    Peak,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    model: FitModel,
    /// Trace CSV (sinusoid, decay) or scan CSV (peak).
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Delay window `START:STOP` in ps (trace models).
    #[arg(long, value_name = "START:STOP")]
    window: Option<String>,
    /// Asymptote of the decay model.
    #[arg(long, default_value_t = ISOTROPIC_OFFSET)]
    offset: f64,
    /// Peak line shape.
    #[arg(long, default_value = "gaussian")]
    peak_shape: String,
    /// Initial J assumed when converting the peak center to B_yz.
    #[arg(long, default_value_t = 0)]
    byz_level: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct LevelsArgs {
    /// Molecule preset, ignored when --config is given.
    #[arg(long, default_value = "no-dimer-droplet")]
    preset: String,
    /// Take the molecule from a config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    j_max: u32,
    #[command(flatten)]
    common: Common,
}

/// An error together with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

fn usage(e: impl ToString) -> Failure {
    Failure { code: EXIT_USAGE, message: e.to_string() }
}

fn failure(e: impl ToString) -> Failure {
    Failure { code: EXIT_FAILURE, message: e.to_string() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let workers = match &command {
        Command::Infield(a) | Command::Scan(a) | Command::Decay(a) | Command::Reference(a) | Command::Validate(a) => {
            a.common.workers
        }
        Command::Fit(a) => a.common.workers,
        Command::Levels(a) => a.common.workers,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(usage("--workers must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(failure)?;
    pool.install(|| dispatch(command))
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Infield(a) => experiment(a, Scenario::Infield),
        Command::Scan(a) => experiment(a, Scenario::Scan),
        Command::Decay(a) => experiment(a, Scenario::Decay),
        Command::Reference(a) => experiment(a, Scenario::AdiabaticReference),
        Command::Validate(a) => run_validate(a),
        Command::Fit(a) => run_fit(a),
        Command::Levels(a) => run_levels(a),
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::from_file(path).map_err(usage)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn experiment(a: RunArgs, scenario: Scenario) -> Result<(), Failure> {
    let cfg = load_config(&a.config, a.seed)?;
    if cfg.scenario != scenario {
        return Err(usage(format!(
            "config scenario is `{}` but the subcommand runs `{}`",
            cfg.scenario.name(),
            scenario.name()
        )));
    }
    let out = a.common.out.unwrap_or_else(|| PathBuf::from("out"));
    let record = execute(&cfg, &out, a.plot_data).map_err(failure)?;
    print!("{}", record.to_text());
    Ok(())
}

fn run_validate(a: RunArgs) -> Result<(), Failure> {
    let cfg = load_config(&a.config, a.seed)?;
    let report = validate(&cfg).map_err(failure)?;
    let text = report.to_text();
    print!("{text}");
    if let Some(out) = &a.common.out {
        fs::create_dir_all(out).map_err(failure)?;
        write_file(out, "validation.txt", &text).map_err(failure)?;
    }
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(failure(format!("validation failed: {}", failed.join(", "))))
    }
}

fn parse_window(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || usage(format!("--window expects START:STOP in ps, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a < b) {
        return Err(bad());
    }
    Ok((a, b))
}

fn run_fit(a: FitArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.input).map_err(|e| usage(format!("{}: {e}", a.input.display())))?;
    let window = a.window.as_deref().map(parse_window).transpose()?;
    let meta = a.input.display().to_string();
    let in_window = |t: centrifuge::observables::AlignmentTrace| match window {
        Some((lo, hi)) => t.window(lo, hi),
        None => t,
    };
    let record: Record = match a.model {
        FitModel::Sinusoid => {
            let trace = in_window(parse_trace_csv(&text, &meta).map_err(usage)?);
            sinusoid_record(&fit_decaying_sinusoid(&trace).map_err(failure)?)
        }
        FitModel::Decay => {
            let trace = in_window(parse_trace_csv(&text, &meta).map_err(usage)?);
            decay_record(&fit_exponential_decay(&trace, a.offset).map_err(failure)?)
        }
        FitModel::Peak => {
            let model = PeakModel::parse(&a.peak_shape).map_err(usage)?;
            let curve = parse_scan_csv(&text).map_err(usage)?;
            let peak = fit_resonance_peak(&curve, model);
            let byz = match &peak {
                Ok(p) if p.center > 0.0 => {
                    let b = extract_byz(p.center, a.byz_level).map_err(failure)?;
                    Some((b, b * p.center_err() / p.center))
                }
                _ => None,
            };
            let peak = peak.map_err(|e: Error| e.to_string());
            let failed = peak.as_ref().err().cloned();
            let rec = peak_record(&peak, byz);
            if let Some(reason) = failed {
                print!("{}", rec.to_text());
                return Err(failure(format!("peak fit failed: {reason}")));
            }
            rec
        }
    };
    let text = record.to_text();
    print!("{text}");
    if let Some(out) = &a.common.out {
        fs::create_dir_all(out).map_err(failure)?;
        write_file(out, "fit.txt", &text).map_err(failure)?;
    }
    Ok(())
}

/// Rows `J,K,E_cm1,f_res_GHz`. Levels come from diagonalizing the rigid
/// asymmetric top and are labeled by the prolate K they correlate with;
/// the distortion shift `−D [J(J+1)]²` is then added. The resonance column
/// is the K = 0 frequency of J → J+2, which the K² term does not change.
fn levels_csv(params: &RotorParams, j_max: u32) -> String {
    let mut s = String::from("J,K,E_cm1,f_res_GHz\n");
    for j in 0..=j_max {
        let jj = (j * (j + 1)) as f64;
        let f = resonance_frequency(j, params);
        for (i, e) in asymmetric_levels(j, params).iter().enumerate() {
            let k = i.div_ceil(2);
            s.push_str(&format!("{j},{k},{},{f}\n", e - params.d * jj * jj));
        }
    }
    s
}

fn run_levels(a: LevelsArgs) -> Result<(), Failure> {
    let params = match &a.config {
        Some(p) => load_config(p, None)?.molecule,
        None => RotorParams::preset(&a.preset).map_err(usage)?,
    };
    let text = levels_csv(&params, a.j_max);
    print!("{text}");
    if let Some(out) = &a.common.out {
        fs::create_dir_all(out).map_err(failure)?;
        write_file(out, "levels.csv", &text).map_err(failure)?;
    }
    Ok(())
}
