//! CSV and metadata emission. Files are written in a fixed order from a
//! single thread.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use swipt_core::mimo::Zeta;
use swipt_core::swipt::Architecture;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliResult;
use crate::experiments::{
    CcdfResult, CorrelationResult, FitResult, PsdResult, RateSweepResult, ReRegionResult,
};

/// Collects the files of one run and their shared metadata.
pub struct OutputSet {
    dir: PathBuf,
    experiment: Experiment,
    config: Value,
    written: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(dir: &Path, experiment: Experiment, cfg: &ExperimentConfig) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            experiment,
            config: cfg.to_json_value(),
            written: Vec::new(),
        })
    }

    fn write_file(&mut self, name: &str, body: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        let mut out = BufWriter::new(fs::File::create(&path)?);
        out.write_all(body)?;
        out.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes `name` and its `.meta.json` sidecar.
    pub fn csv(&mut self, name: &str, body: String, results: Value) -> CliResult<()> {
        self.write_file(name, body.as_bytes())?;
        let stem = name.strip_suffix(".csv").unwrap_or(name);
        let meta = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "experiment": self.experiment.name(),
            "seed": self.config["seed"],
            "csv": name,
            "config": self.config,
            "results": results,
        });
        let mut text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        text.push('\n');
        self.write_file(&format!("{stem}.meta.json"), text.as_bytes())?;
        Ok(())
    }

    pub fn json(&mut self, name: &str, body: String) -> CliResult<()> {
        let mut body = body;
        if !body.ends_with('\n') {
            body.push('\n');
        }
        self.write_file(name, body.as_bytes())?;
        Ok(())
    }

    pub fn into_paths(self) -> Vec<PathBuf> {
        self.written
    }
}

fn io_to_string(write: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> CliResult<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV writers emit UTF-8"))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

pub fn write_fit(out: &mut OutputSet, r: &FitResult) -> CliResult<()> {
    let mut csv = String::from("order_p,memory_m,nmse_db,condition_estimate\n");
    for row in &r.table {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            row.order_p, row.memory_m, row.nmse_db, row.condition_estimate
        );
    }
    let best = r.best();
    out.json("fit_model.json", r.model.to_json())?;
    out.csv(
        "fit_nmse.csv",
        csv,
        json!({
            "model_file": "fit_model.json",
            "fit_report": to_value(&r.report),
            "held_out_nmse_db": r.held_out_nmse_db,
            "best": to_value(best),
        }),
    )
}

fn psd_rows(r: &PsdResult) -> String {
    let mut csv = String::from("freq_hz,input_psd_db,hpa_psd_db,dpd_hpa_psd_db\n");
    for (k, f) in r.input.freqs_hz.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            f, r.input.psd_db[k], r.hpa.psd_db[k], r.dpd_hpa.psd_db[k]
        );
    }
    csv
}

pub fn write_psd(out: &mut OutputSet, r: &PsdResult) -> CliResult<()> {
    let summary = json!({
        "occupied_bandwidth_hz": r.occupied_bandwidth_hz,
        "acpr_input": to_value(&r.acpr_input),
        "acpr_hpa": to_value(&r.acpr_hpa),
        "acpr_dpd_hpa": to_value(&r.acpr_dpd_hpa),
        "acpr_improvement_db": r.acpr_improvement_db(),
        "unachievable_samples": r.report.unachievable_count(),
        "clipped_samples": r.report.clipped_count(),
    });
    out.csv("psd.csv", psd_rows(r), summary.clone())?;
    let mut acpr = String::from("signal,lower_dbc,upper_dbc,acpr_dbc,adjacent_power\n");
    for (name, row) in [
        ("input", &r.acpr_input),
        ("hpa", &r.acpr_hpa),
        ("dpd_hpa", &r.acpr_dpd_hpa),
    ] {
        let _ = writeln!(
            acpr,
            "{name},{},{},{},{}",
            row.lower_dbc, row.upper_dbc, row.acpr_dbc, row.adjacent_power
        );
    }
    out.csv("psd_acpr.csv", acpr, summary.clone())?;
    let report = io_to_string(|buf| r.report.write_csv(buf))?;
    out.csv("psd_dpd_report.csv", report, summary)
}

pub fn write_ccdf(out: &mut OutputSet, r: &CcdfResult) -> CliResult<()> {
    let mut csv = String::from("threshold_db,input,hpa,dpd_hpa\n");
    for (k, t) in r.thresholds_db.iter().enumerate() {
        let _ = writeln!(csv, "{},{},{},{}", t, r.input[k], r.hpa[k], r.dpd_hpa[k]);
    }
    let summary = json!({
        "probability": r.probability,
        "papr_input": to_value(&r.papr_input),
        "papr_hpa": to_value(&r.papr_hpa),
        "papr_dpd_hpa": to_value(&r.papr_dpd_hpa),
        "clipping_gap_db": r.clipping_gap_db(),
        "dpd_deviation_db": r.dpd_deviation_db(),
        "unachievable_samples": r.unachievable_samples,
    });
    out.csv("ccdf.csv", csv, summary.clone())?;
    let mut papr = String::from("signal,papr_db,papr_at_probability_db\n");
    for (name, row) in [
        ("input", &r.papr_input),
        ("hpa", &r.papr_hpa),
        ("dpd_hpa", &r.papr_dpd_hpa),
    ] {
        let _ = writeln!(
            papr,
            "{name},{},{}",
            row.papr_db, row.papr_at_probability_db
        );
    }
    out.csv("ccdf_papr.csv", papr, summary)
}

pub fn write_rate_sweep(out: &mut OutputSet, r: &RateSweepResult) -> CliResult<()> {
    let mut csv = String::from(
        "tx_power_dbm,rate_dpd_bps_hz,rate_no_dpd_bps_hz,relative_gap,unachievable_fraction\n",
    );
    for row in &r.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.tx_power_dbm,
            row.rate_dpd_bps_hz,
            row.rate_no_dpd_bps_hz,
            row.relative_gap,
            row.unachievable_fraction
        );
    }
    let last = r.rows.last().expect("sweep is non-empty");
    out.csv(
        "rate_sweep.csv",
        csv,
        json!({
            "n_channels": r.n_channels,
            "max_gap": to_value(r.max_gap()),
            "gap_at_max_power": last.relative_gap,
        }),
    )
}

fn arch_tag(a: Architecture) -> &'static str {
    match a {
        Architecture::TimeSwitching => "ts",
        Architecture::PowerSplitting => "ps",
    }
}

pub fn write_re_region(out: &mut OutputSet, r: &ReRegionResult) -> CliResult<()> {
    let gains: Vec<Value> = r
        .comparisons
        .iter()
        .map(|(a, c)| json!({"architecture": a.label(), "comparison": to_value(c)}))
        .collect();
    let summary = json!({
        "n_channels": r.n_channels,
        "mean_unachievable_fraction": r.mean_unachievable_fraction,
        "gains": gains,
    });
    for region in &r.regions {
        let body = io_to_string(|buf| region.write_csv(buf))?;
        let name = format!(
            "re_region_{}_zeta{}.csv",
            arch_tag(region.architecture),
            region.zeta.flag()
        );
        let mut results = summary.clone();
        results["area"] = json!(region.area);
        out.csv(&name, body, results)?;
    }
    let mut csv = String::from(
        "architecture,area_dpd,area_no_dpd,area_gain,eh_endpoint_gain,id_endpoint_gain\n",
    );
    for (arch, c) in &r.comparisons {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            arch.label(),
            r.region(*arch, Zeta::WithDpd).area,
            r.region(*arch, Zeta::WithoutDpd).area,
            c.area_gain,
            c.eh_endpoint_gain,
            c.id_endpoint_gain
        );
    }
    out.csv("re_region_gains.csv", csv, summary)
}

pub fn write_correlation(out: &mut OutputSet, r: &CorrelationResult) -> CliResult<()> {
    let mut csv = String::from("input,model,re,im,magnitude,standard_error,z_score,samples\n");
    for row in &r.rows {
        let e = &row.estimate;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            row.input,
            row.model,
            e.value.re,
            e.value.im,
            e.value.norm(),
            e.standard_error,
            e.z_score(),
            e.samples
        );
    }
    out.csv("correlation.csv", csv, to_value(&r.rows))
}
