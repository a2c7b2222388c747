use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analysis::{DecayFit, PeakFit, ScanCurve, SinusoidOutcome};
use crate::error::{Error, Result};
use crate::observables::AlignmentTrace;

pub const TRACE_HEADER: &str = "delay_ps,value,stderr";
pub const SCAN_HEADER: &str = "fcfg_ghz,value,stderr";
pub const PLOT_HEADER: &str = "series,x,y,stderr";

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    pub entries: Vec<(String, String)>,
}

impl Record {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn trace_csv(trace: &AlignmentTrace) -> String {
    rows_csv(TRACE_HEADER, &trace.delays, &trace.values, &trace.stderr)
}

pub fn scan_csv(scan: &ScanCurve) -> String {
    rows_csv(SCAN_HEADER, &scan.frequencies, &scan.values, &scan.stderr)
}

fn rows_csv(header: &str, x: &[f64], y: &[f64], e: &[f64]) -> String {
    let mut s = String::with_capacity(32 * (x.len() + 1));
    s.push_str(header);
    s.push('\n');
    for ((a, b), c) in x.iter().zip(y).zip(e) {
        let _ = writeln!(s, "{a},{b},{c}");
    }
    s
}

/// Long-format rows `series,x,y,stderr`.
#[derive(Debug, Clone, Default)]
pub struct PlotData {
    text: String,
}

impl PlotData {
    pub fn new() -> Self {
        Self { text: format!("{PLOT_HEADER}\n") }
    }

    pub fn series(&mut self, name: &str, x: &[f64], y: &[f64], stderr: Option<&[f64]>) {
        for (i, (a, b)) in x.iter().zip(y).enumerate() {
            let e = stderr.map_or(0.0, |s| s[i]);
            let _ = writeln!(self.text, "{name},{a},{b},{e}");
        }
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Reads a `delay_ps,value,stderr` CSV.
pub fn parse_trace_csv(text: &str, metadata: &str) -> Result<AlignmentTrace> {
    let (d, v, e) = parse_rows(text, TRACE_HEADER)?;
    AlignmentTrace::new(d, v, e, metadata)
}

/// Reads a `fcfg_ghz,value,stderr` CSV.
pub fn parse_scan_csv(text: &str) -> Result<ScanCurve> {
    let (f, v, e) = parse_rows(text, SCAN_HEADER)?;
    ScanCurve::new(f, v, e)
}

fn parse_rows(text: &str, header: &str) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next().map(str::trim) {
        Some(h) if h == header => {}
        Some(h) => return Err(Error::Config(format!("expected header `{header}`, got `{h}`"))),
        None => return Err(Error::Config("empty CSV file".into())),
    }
    let (mut x, mut y, mut e) = (Vec::new(), Vec::new(), Vec::new());
    for (n, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::Config(format!("row {}: expected 3 columns", n + 1)));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Config(format!("row {}: bad number `{s}`", n + 1)));
        x.push(num(cols[0])?);
        y.push(num(cols[1])?);
        e.push(num(cols[2])?);
    }
    Ok((x, y, e))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::from(e).context(path.display().to_string()))
}

pub fn sinusoid_record(out: &SinusoidOutcome) -> Record {
    let mut r = Record::default();
    r.push("model", "decaying-sinusoid");
    match out {
        SinusoidOutcome::NoOscillation { peak_power, noise_floor } => {
            r.push("result", "no-oscillation");
            r.push("spectral_peak_power", peak_power);
            r.push("noise_floor", noise_floor);
        }
        SinusoidOutcome::Fit(f) => {
            r.push("result", "fit");
            r.push("frequency_ghz", f.frequency_ghz);
            r.push("frequency_err_ghz", f.frequency_err());
            r.push("amplitude", f.amplitude);
            r.push("amplitude_err", f.amplitude_err());
            r.push("offset", f.offset);
            r.push("offset_err", f.std_error(0));
            r.push("phase_rad", f.phase);
            r.push("phase_err_rad", f.std_error(3));
            r.push("damping_rate_per_ps", f.damping_rate);
            r.push("damping_rate_err_per_ps", f.std_error(4));
            r.push("damping_time_ps", f.damping_time());
            r.push("t_ref_ps", f.t_ref);
            r.push("rms_residual", f.rms_residual);
        }
    }
    r
}

pub fn decay_record(f: &DecayFit) -> Record {
    let mut r = Record::default();
    r.push("model", "exponential-decay");
    r.push("offset", f.offset);
    r.push("amplitude", f.amplitude);
    r.push("amplitude_err", f.amplitude_err());
    r.push("tau_ps", f.tau);
    r.push("tau_err_ps", f.tau_err());
    r.push("resolvable", f.resolvable);
    r.push("rms_residual", f.rms_residual);
    r
}

pub fn peak_record(p: &std::result::Result<PeakFit, String>, byz: Option<(f64, f64)>) -> Record {
    let mut r = Record::default();
    match p {
        Err(e) => {
            r.push("model", "resonance-peak");
            r.push("result", "failed");
            r.push("reason", e);
        }
        Ok(p) => {
            r.push("model", p.model.name());
            r.push("result", "fit");
            r.push("center_ghz", p.center);
            r.push("center_err_ghz", p.center_err());
            r.push("width_ghz", p.width);
            r.push("width_err_ghz", p.width_err());
            r.push("height", p.height);
            r.push("baseline", p.baseline);
            r.push("window_start_index", p.window.0);
            r.push("window_stop_index", p.window.1);
            r.push("rms_residual", p.rms_residual);
        }
    }
    if let Some((b, e)) = byz {
        r.push("b_yz_cm1", b);
        r.push("b_yz_err_cm1", e);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_csv_round_trips() {
        let t =
            AlignmentTrace::new(vec![-2.0, 0.0, 2.5], vec![0.5, 0.51234567890123, 0.49], vec![0.01, 0.0, 0.011], "m")
                .unwrap();
        let text = trace_csv(&t);
        assert!(text.starts_with("delay_ps,value,stderr\n-2,0.5,0.01\n"));
        let back = parse_trace_csv(&text, "m").unwrap();
        assert_eq!(back, t);
        assert!(parse_trace_csv("a,b,c\n1,2,3\n", "m").is_err());
        assert!(parse_trace_csv("delay_ps,value,stderr\n1,2\n", "m").is_err());
    }
}
