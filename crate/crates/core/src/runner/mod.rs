//! Declarative experiment configuration, the three experiments plus the
//! adiabatic reference and validation, and their file outputs.

mod config;
mod experiments;
mod output;
mod validate;

use std::path::Path;
use std::time::Instant;

pub use config::{
    DelayGrid, ExperimentConfig, FieldConfig, FrequencyGrid, RelaxConfig, Scenario, SimConfig, MANIFEST_SECTION,
};
pub use experiments::{
    convergence_deltas, diagnostic_setup, reference_field, run_adiabatic_reference, run_decay, run_infield, run_scan,
    scan_point, ConvergenceDeltas, DecayResult, InfieldResult, ScanResult, Simulation, J_MAX_CHECK_STEP,
};
pub use output::{
    decay_record, parse_scan_csv, parse_trace_csv, peak_record, scan_csv, sinusoid_record, trace_csv, write_file,
    PlotData, Record, PLOT_HEADER, SCAN_HEADER, TRACE_HEADER,
};
pub use validate::{operator_errors, validate, Check, ValidationReport};

use crate::error::Result;

pub const TOOL_NAME: &str = "centrifuge";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Runs the configured scenario, writes its CSV and record files plus the
/// manifest into `out`, and returns the fit record.
pub fn execute(cfg: &ExperimentConfig, out: &Path, plot_data: bool) -> Result<Record> {
    std::fs::create_dir_all(out)?;
    let start = Instant::now();
    let mut plot = PlotData::new();
    let record = match cfg.scenario {
        Scenario::Infield => {
            let r = run_infield(cfg)?;
            write_file(out, "trace.csv", &trace_csv(&r.trace))?;
            let rec = sinusoid_record(&r.fit);
            write_file(out, "fit.txt", &rec.to_text())?;
            plot.series("sampled", &r.trace.delays, &r.trace.values, Some(&r.trace.stderr));
            plot.series("exact", &r.exact.delays, &r.exact.values, None);
            if let Some(f) = r.fit.fit() {
                let x = &r.trace.window(cfg.fit_window.0, cfg.fit_window.1).delays;
                plot.series("fit", x, &x.iter().map(|&t| f.eval(t)).collect::<Vec<_>>(), None);
            }
            rec
        }
        Scenario::Scan => {
            let r = run_scan(cfg)?;
            write_file(out, "scan.csv", &scan_csv(&r.curve))?;
            let rec = peak_record(&r.peak, r.byz);
            write_file(out, "fit.txt", &rec.to_text())?;
            plot.series("sampled", &r.curve.frequencies, &r.curve.values, Some(&r.curve.stderr));
            plot.series("exact", &r.curve.frequencies, &r.exact, None);
            if let Ok(p) = &r.peak {
                let x = &r.curve.frequencies[p.window.0..=p.window.1];
                plot.series("fit", x, &x.iter().map(|&f| p.eval(f)).collect::<Vec<_>>(), None);
            }
            rec
        }
        Scenario::Decay => {
            let r = run_decay(cfg)?;
            write_file(out, "trace.csv", &trace_csv(&r.resonant))?;
            write_file(out, "reference.csv", &trace_csv(&r.reference))?;
            let mut rec = decay_record(&r.fit);
            rec.push("reference_final_exact", r.reference_exact.values.last().copied().unwrap_or(f64::NAN));
            write_file(out, "fit.txt", &rec.to_text())?;
            plot.series("sampled", &r.resonant.delays, &r.resonant.values, Some(&r.resonant.stderr));
            plot.series("exact", &r.resonant_exact.delays, &r.resonant_exact.values, None);
            plot.series("reference", &r.reference.delays, &r.reference.values, Some(&r.reference.stderr));
            plot.series("reference_exact", &r.reference_exact.delays, &r.reference_exact.values, None);
            let x = &r.resonant.window(cfg.fit_window.0, cfg.fit_window.1).delays;
            plot.series("fit", x, &x.iter().map(|&t| r.fit.eval(t)).collect::<Vec<_>>(), None);
            rec
        }
        Scenario::AdiabaticReference => {
            let (sampled, exact) = run_adiabatic_reference(cfg)?;
            write_file(out, "trace.csv", &trace_csv(&sampled))?;
            plot.series("sampled", &sampled.delays, &sampled.values, Some(&sampled.stderr));
            plot.series("exact", &exact.delays, &exact.values, None);
            let mut rec = Record::default();
            rec.push("final_exact", exact.values.last().copied().unwrap_or(f64::NAN));
            write_file(out, "fit.txt", &rec.to_text())?;
            rec
        }
    };
    if plot_data {
        write_file(out, "plot_data.csv", &plot.into_string())?;
    }
    let (field, times) = diagnostic_setup(cfg)?;
    let deltas = convergence_deltas(cfg, &field, &times)?;
    write_file(out, MANIFEST_FILE, &manifest(cfg, &deltas, start.elapsed().as_secs_f64()))?;
    Ok(record)
}

/// The resolved config followed by `manifest.*` provenance lines. Parsing
/// it as a config reproduces the run.
pub fn manifest(cfg: &ExperimentConfig, deltas: &ConvergenceDeltas, wall_time_s: f64) -> String {
    let mut r = Record::default();
    r.push(format!("{MANIFEST_SECTION}tool"), TOOL_NAME);
    r.push(format!("{MANIFEST_SECTION}version"), TOOL_VERSION);
    r.push(format!("{MANIFEST_SECTION}seed"), cfg.seed);
    r.push(format!("{MANIFEST_SECTION}dt_halving_delta"), deltas.dt_halving);
    r.push(format!("{MANIFEST_SECTION}jmax_delta"), deltas.j_max);
    r.push(format!("{MANIFEST_SECTION}jmax_checked"), cfg.sim.j_max + J_MAX_CHECK_STEP);
    r.push(format!("{MANIFEST_SECTION}wall_time_s"), format!("{wall_time_s:.3}"));
    format!("{}{}", cfg.to_text(), r.to_text())
}
