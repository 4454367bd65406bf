//! Experiment runners. Each returns an in-memory result; writing is left to
//! [`crate::output`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use swipt_core::dpd::{dpd_invert, DpdReport};
use swipt_core::hpa::{
    eval_mpm, eval_reference, fit_mpm_with_report, input_distortion_correlation, nmse_db,
    CorrelationEstimate, FitReport, MemoryPolynomial, ReferenceAmplifier,
};
use swipt_core::mimo::{
    evaluate_link, gen_channel, hpa_aware_weights, principal_eig, ChannelMatrix, LinkBudget, Zeta,
};
use swipt_core::seed::derive_seed;
use swipt_core::signal::{
    acpr_db, ccdf, gen_multichannel, gen_multisine, gen_ofdm_like, papr_at_probability, papr_db,
    psd_welch, ComplexSignal, OfdmParams, Phases, SpectrumEstimate,
};
use swipt_core::swipt::{
    compare_regions, id_rate, re_region, Architecture, ReRegion, RegionComparison,
};
use swipt_core::units::dbm_to_w;
use swipt_core::Complex64;

use crate::config::{AmplifierKind, ExperimentConfig, WaveformConfig, WaveformKind};
use crate::error::{CliError, CliResult};

/// Amplifier model used by every downstream chain.
#[derive(Debug, Clone)]
pub struct Plant {
    pub model: MemoryPolynomial,
    /// Identification diagnostics when the model was fitted.
    pub fit_report: Option<FitReport>,
    pub source: &'static str,
}

fn identification_params(cfg: &ExperimentConfig) -> OfdmParams {
    OfdmParams {
        n_subcarriers: 64,
        n_symbols: cfg.amplifier.fit_n_symbols,
        oversampling: 8,
        ..OfdmParams::default()
    }
}

type Amplifier = Box<dyn Fn(&ComplexSignal) -> CliResult<ComplexSignal>>;

/// Physical amplifier the identification experiment measures.
fn measured_amplifier(cfg: &ExperimentConfig) -> CliResult<Amplifier> {
    Ok(match cfg.amplifier.kind {
        AmplifierKind::Reference => {
            let amp = cfg.amplifier.reference()?;
            Box::new(move |x| Ok(eval_reference(&amp, x)))
        }
        AmplifierKind::Identity => {
            let amp = ReferenceAmplifier::identity();
            Box::new(move |x| Ok(eval_reference(&amp, x)))
        }
        AmplifierKind::Mpm => {
            let model = load_model(cfg)?;
            Box::new(move |x| Ok(eval_mpm(&model, x)?))
        }
    })
}

fn load_model(cfg: &ExperimentConfig) -> CliResult<MemoryPolynomial> {
    if let Some(model) = cfg.amplifier.inline_model()? {
        return Ok(model);
    }
    let path = cfg.amplifier.model_path.as_ref().ok_or_else(|| {
        CliError::Config("amplifier kind \"mpm\" needs model_path or coeffs".into())
    })?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read model {path}: {e}")))?;
    Ok(MemoryPolynomial::from_json(&text)?)
}

fn excitation(cfg: &ExperimentConfig, label: &str) -> CliResult<ComplexSignal> {
    let seed = derive_seed(cfg.seed, label, 0);
    Ok(gen_ofdm_like(&identification_params(cfg), seed)?
        .scaled(cfg.amplifier.fit_drive * cfg.amplifier.saturation_amplitude))
}

/// Builds the memory polynomial standing for the transmit amplifier: the
/// reference amplifier identified at the configured orders, the identity,
/// or a model read from disk.
pub fn build_plant(cfg: &ExperimentConfig) -> CliResult<Plant> {
    match cfg.amplifier.kind {
        AmplifierKind::Identity => Ok(Plant {
            model: MemoryPolynomial::identity(),
            fit_report: None,
            source: "identity",
        }),
        AmplifierKind::Mpm => Ok(Plant {
            model: load_model(cfg)?,
            fit_report: None,
            source: "model_file",
        }),
        AmplifierKind::Reference => {
            let amp = cfg.amplifier.reference()?;
            let x = excitation(cfg, "plant/excitation")?;
            let y = eval_reference(&amp, &x);
            let (model, report) =
                fit_mpm_with_report(&x, &y, cfg.amplifier.order_p, cfg.amplifier.memory_m)?;
            Ok(Plant {
                model,
                fit_report: Some(report),
                source: "fitted_reference",
            })
        }
    }
}

/// Unit-power test waveform and its occupied bandwidth.
#[derive(Debug, Clone)]
pub struct Waveform {
    pub signal: ComplexSignal,
    pub occupied_bandwidth_hz: f64,
}

pub fn build_waveform(wf: &WaveformConfig, seed: u64) -> CliResult<Waveform> {
    Ok(match wf.kind {
        WaveformKind::Ofdm => {
            let params = wf.ofdm_params();
            Waveform {
                signal: gen_ofdm_like(&params, seed)?,
                occupied_bandwidth_hz: params.occupied_bandwidth_hz(),
            }
        }
        WaveformKind::Multichannel => {
            let params = wf.ofdm_params();
            Waveform {
                signal: gen_multichannel(&params, wf.n_channels, wf.channel_spacing_hz, seed)?,
                occupied_bandwidth_hz: (wf.n_channels as f64 - 1.0) * wf.channel_spacing_hz
                    + params.occupied_bandwidth_hz(),
            }
        }
        WaveformKind::Multisine => {
            let phases = if wf.phases == "zero" {
                Phases::Zero
            } else {
                Phases::Random(seed)
            };
            Waveform {
                signal: gen_multisine(
                    wf.n_tones,
                    wf.tone_spacing_hz,
                    wf.n_samples,
                    wf.sample_rate_hz,
                    &phases,
                )?,
                occupied_bandwidth_hz: wf.n_tones as f64 * wf.tone_spacing_hz,
            }
        }
    })
}

/// Test waveform scaled to the configured backoff below saturation.
fn driven_waveform(cfg: &ExperimentConfig, label: &str) -> CliResult<Waveform> {
    let mut wf = build_waveform(&cfg.waveform, derive_seed(cfg.seed, label, 0))?;
    let rms =
        cfg.amplifier.saturation_amplitude * 10f64.powf(-cfg.waveform.input_backoff_db / 20.0);
    wf.signal = wf.signal.scaled(rms);
    Ok(wf)
}

/// Input, amplifier output without and with predistortion.
struct Chain {
    input: ComplexSignal,
    hpa: ComplexSignal,
    dpd_hpa: ComplexSignal,
    report: DpdReport,
}

fn run_chain(cfg: &ExperimentConfig, plant: &Plant, input: ComplexSignal) -> CliResult<Chain> {
    let hpa = eval_mpm(&plant.model, &input)?;
    let (pre, report) = dpd_invert(&plant.model, &input, &cfg.dpd)?;
    let dpd_hpa = eval_mpm(&plant.model, &pre)?;
    Ok(Chain {
        input,
        hpa,
        dpd_hpa,
        report,
    })
}

// ---------------------------------------------------------------- fit

#[derive(Debug, Clone, Serialize)]
pub struct FitRow {
    pub order_p: usize,
    pub memory_m: usize,
    /// Held-out NMSE in dB.
    pub nmse_db: f64,
    pub condition_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub table: Vec<FitRow>,
    pub model: MemoryPolynomial,
    pub report: FitReport,
    pub held_out_nmse_db: f64,
}

impl FitResult {
    /// Table row with the lowest held-out NMSE.
    pub fn best(&self) -> &FitRow {
        self.table
            .iter()
            .min_by(|a, b| a.nmse_db.total_cmp(&b.nmse_db))
            .expect("table is non-empty")
    }
}

fn held_out_nmse(model: &MemoryPolynomial, x: &ComplexSignal, y: &ComplexSignal) -> CliResult<f64> {
    let m = model.memory_m();
    let est = eval_mpm(model, x)?;
    let cut = |s: &ComplexSignal| s.with_samples(s.samples()[m..].to_vec());
    Ok(nmse_db(&cut(y)?, &cut(&est)?)?)
}

/// Identifies the amplifier over the configured (P, M) grid and at the
/// configured orders, scoring each fit on an independent excitation.
pub fn run_fit(cfg: &ExperimentConfig) -> CliResult<FitResult> {
    let amp = measured_amplifier(cfg)?;
    let x = excitation(cfg, "plant/excitation")?;
    let y = amp(&x)?;
    let xt = excitation(cfg, "fit/held_out")?;
    let yt = amp(&xt)?;
    if cfg.fit.sweep_orders.is_empty() || cfg.fit.sweep_memory.is_empty() {
        return Err(CliError::Config(
            "fit sweep needs orders and memory depths".into(),
        ));
    }
    let mut table = Vec::new();
    for &p in &cfg.fit.sweep_orders {
        for &m in &cfg.fit.sweep_memory {
            let (model, report) = fit_mpm_with_report(&x, &y, p, m)?;
            table.push(FitRow {
                order_p: p,
                memory_m: m,
                nmse_db: held_out_nmse(&model, &xt, &yt)?,
                condition_estimate: report.condition_estimate,
            });
        }
    }
    let (model, report) =
        fit_mpm_with_report(&x, &y, cfg.amplifier.order_p, cfg.amplifier.memory_m)?;
    let held_out_nmse_db = held_out_nmse(&model, &xt, &yt)?;
    Ok(FitResult {
        table,
        model,
        report,
        held_out_nmse_db,
    })
}

// ---------------------------------------------------------------- psd

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AcprRow {
    pub lower_dbc: f64,
    pub upper_dbc: f64,
    /// The worse (smaller) of the two sides.
    pub acpr_dbc: f64,
    /// Total adjacent-band power (both sides), W.
    pub adjacent_power: f64,
}

#[derive(Debug, Clone)]
pub struct PsdResult {
    pub input: SpectrumEstimate,
    pub hpa: SpectrumEstimate,
    pub dpd_hpa: SpectrumEstimate,
    pub acpr_input: AcprRow,
    pub acpr_hpa: AcprRow,
    pub acpr_dpd_hpa: AcprRow,
    pub occupied_bandwidth_hz: f64,
    pub report: DpdReport,
}

impl PsdResult {
    /// ACPR gained by predistortion, dB.
    pub fn acpr_improvement_db(&self) -> f64 {
        self.acpr_dpd_hpa.acpr_dbc - self.acpr_hpa.acpr_dbc
    }

    /// Largest per-bin difference between the three spectra, dB.
    pub fn max_spectrum_spread_db(&self) -> f64 {
        self.input
            .psd_db
            .iter()
            .zip(&self.hpa.psd_db)
            .zip(&self.dpd_hpa.psd_db)
            .map(|((a, b), c)| (a - b).abs().max((a - c).abs()))
            .fold(0.0, f64::max)
    }
}

fn acpr_row(spectrum: &SpectrumEstimate, bw: f64, cfg: &ExperimentConfig) -> CliResult<AcprRow> {
    let main = (-bw / 2.0, bw / 2.0);
    let (lo, hi) = (cfg.spectrum.adjacent_lo * bw, cfg.spectrum.adjacent_hi * bw);
    let lower = acpr_db(spectrum, main, (-hi, -lo))?;
    let upper = acpr_db(spectrum, main, (lo, hi))?;
    let adjacent_power = spectrum.band_power((-hi, -lo)).unwrap_or(0.0)
        + spectrum.band_power((lo, hi)).unwrap_or(0.0);
    Ok(AcprRow {
        lower_dbc: lower,
        upper_dbc: upper,
        acpr_dbc: lower.min(upper),
        adjacent_power,
    })
}

/// Spectra of the input, the amplifier output and the predistorted
/// amplifier output, with their adjacent-channel power ratios.
pub fn run_psd(cfg: &ExperimentConfig) -> CliResult<PsdResult> {
    let plant = build_plant(cfg)?;
    let wf = driven_waveform(cfg, "psd/waveform")?;
    let chain = run_chain(cfg, &plant, wf.signal)?;
    let welch = |s: &ComplexSignal| {
        psd_welch(
            s,
            cfg.spectrum.segment_length,
            cfg.spectrum.overlap_fraction,
        )
    };
    let input = welch(&chain.input)?;
    let hpa = welch(&chain.hpa)?;
    let dpd_hpa = welch(&chain.dpd_hpa)?;
    let bw = wf.occupied_bandwidth_hz;
    Ok(PsdResult {
        acpr_input: acpr_row(&input, bw, cfg)?,
        acpr_hpa: acpr_row(&hpa, bw, cfg)?,
        acpr_dpd_hpa: acpr_row(&dpd_hpa, bw, cfg)?,
        input,
        hpa,
        dpd_hpa,
        occupied_bandwidth_hz: bw,
        report: chain.report,
    })
}

// ---------------------------------------------------------------- ccdf

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PaprRow {
    pub papr_db: f64,
    pub papr_at_probability_db: f64,
}

#[derive(Debug, Clone)]
pub struct CcdfResult {
    pub thresholds_db: Vec<f64>,
    pub input: Vec<f64>,
    pub hpa: Vec<f64>,
    pub dpd_hpa: Vec<f64>,
    pub papr_input: PaprRow,
    pub papr_hpa: PaprRow,
    pub papr_dpd_hpa: PaprRow,
    pub probability: f64,
    pub unachievable_samples: usize,
}

impl CcdfResult {
    /// PAPR lost by the amplifier without predistortion, dB.
    pub fn clipping_gap_db(&self) -> f64 {
        self.papr_input.papr_at_probability_db - self.papr_hpa.papr_at_probability_db
    }

    /// |PAPR(DPD+HPA) − PAPR(input)|, dB.
    pub fn dpd_deviation_db(&self) -> f64 {
        (self.papr_dpd_hpa.papr_at_probability_db - self.papr_input.papr_at_probability_db).abs()
    }
}

/// PAPR distributions of the input and of both amplifier outputs.
pub fn run_ccdf(cfg: &ExperimentConfig) -> CliResult<CcdfResult> {
    let plant = build_plant(cfg)?;
    let wf = driven_waveform(cfg, "ccdf/waveform")?;
    let chain = run_chain(cfg, &plant, wf.signal)?;
    let thresholds_db = cfg.ccdf.thresholds()?;
    let prob = cfg.ccdf.papr_probability;
    let curve = |s: &ComplexSignal| -> CliResult<Vec<f64>> {
        Ok(ccdf(s, &thresholds_db)?
            .into_iter()
            .map(|(_, p)| p)
            .collect())
    };
    let papr = |s: &ComplexSignal| -> CliResult<PaprRow> {
        Ok(PaprRow {
            papr_db: papr_db(s)?,
            papr_at_probability_db: papr_at_probability(s, prob)?,
        })
    };
    Ok(CcdfResult {
        input: curve(&chain.input)?,
        hpa: curve(&chain.hpa)?,
        dpd_hpa: curve(&chain.dpd_hpa)?,
        papr_input: papr(&chain.input)?,
        papr_hpa: papr(&chain.hpa)?,
        papr_dpd_hpa: papr(&chain.dpd_hpa)?,
        probability: prob,
        unachievable_samples: chain.report.unachievable_count(),
        thresholds_db,
    })
}

// ---------------------------------------------------------------- link

/// Channel draws shared by every transmit power of a run.
fn channels(cfg: &ExperimentConfig, label: &str, count: usize) -> CliResult<Vec<ChannelMatrix>> {
    (0..count)
        .map(|i| {
            Ok(gen_channel(
                cfg.link.n_t,
                cfg.link.n_r,
                cfg.link.distance_m,
                cfg.link.pathloss_exponent,
                derive_seed(cfg.seed, label, i as u64),
            )?)
        })
        .collect()
}

/// Simulates both transmit chains over one channel realization.
pub fn simulate_channel(
    cfg: &ExperimentConfig,
    model: &MemoryPolynomial,
    h: &ChannelMatrix,
    symbols: &ComplexSignal,
    tx_power_w: f64,
) -> CliResult<LinkBudget> {
    let eig = principal_eig(h)?;
    let sol = hpa_aware_weights(h, &eig.w_r, model, tx_power_w, symbols, &cfg.dpd)?;
    Ok(evaluate_link(
        h,
        &sol,
        model,
        symbols,
        tx_power_w,
        cfg.link.noise()?,
        &cfg.dpd,
    )?)
}

fn link_budgets(
    cfg: &ExperimentConfig,
    model: &MemoryPolynomial,
    hs: &[ChannelMatrix],
    symbols: &[ComplexSignal],
    tx_power_w: f64,
) -> CliResult<Vec<LinkBudget>> {
    hs.par_iter()
        .zip(symbols.par_iter())
        .map(|(h, x)| simulate_channel(cfg, model, h, x, tx_power_w))
        .collect()
}

fn symbol_streams(
    cfg: &ExperimentConfig,
    label: &str,
    count: usize,
) -> CliResult<Vec<ComplexSignal>> {
    let params = cfg.link.symbol_params();
    (0..count)
        .map(|i| {
            Ok(gen_ofdm_like(
                &params,
                derive_seed(cfg.seed, label, i as u64),
            )?)
        })
        .collect()
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateRow {
    pub tx_power_dbm: f64,
    pub rate_dpd_bps_hz: f64,
    pub rate_no_dpd_bps_hz: f64,
    /// (with − without) / with.
    pub relative_gap: f64,
    pub unachievable_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct RateSweepResult {
    pub rows: Vec<RateRow>,
    pub n_channels: usize,
}

impl RateSweepResult {
    pub fn max_gap(&self) -> &RateRow {
        self.rows
            .iter()
            .max_by(|a, b| a.relative_gap.total_cmp(&b.relative_gap))
            .expect("sweep is non-empty")
    }
}

/// Ergodic information rate with and without predistortion against
/// transmit power, over a fixed set of channel draws.
pub fn run_rate_sweep(cfg: &ExperimentConfig) -> CliResult<RateSweepResult> {
    let plant = build_plant(cfg)?;
    let n = cfg.rate_sweep.n_channels;
    let hs = channels(cfg, "rate_sweep/channel", n)?;
    let xs = symbol_streams(cfg, "rate_sweep/symbols", n)?;
    let mut rows = Vec::new();
    for p_dbm in cfg.rate_sweep.powers_dbm()? {
        let budgets = link_budgets(cfg, &plant.model, &hs, &xs, dbm_to_w(p_dbm))?;
        let with = mean(budgets.iter().map(|b| id_rate(b, Zeta::WithDpd)));
        let without = mean(budgets.iter().map(|b| id_rate(b, Zeta::WithoutDpd)));
        rows.push(RateRow {
            tx_power_dbm: p_dbm,
            rate_dpd_bps_hz: with,
            rate_no_dpd_bps_hz: without,
            relative_gap: (with - without) / with,
            unachievable_fraction: mean(budgets.iter().map(|b| b.unachievable_fraction)),
        });
    }
    Ok(RateSweepResult {
        rows,
        n_channels: n,
    })
}

// ---------------------------------------------------------------- re region

#[derive(Debug, Clone)]
pub struct ReRegionResult {
    /// TS with DPD, TS without, PS with, PS without.
    pub regions: Vec<ReRegion>,
    pub comparisons: Vec<(Architecture, RegionComparison)>,
    pub n_channels: usize,
    pub mean_unachievable_fraction: f64,
}

impl ReRegionResult {
    pub fn comparison(&self, arch: Architecture) -> &RegionComparison {
        &self
            .comparisons
            .iter()
            .find(|(a, _)| *a == arch)
            .expect("both architectures compared")
            .1
    }

    pub fn region(&self, arch: Architecture, zeta: Zeta) -> &ReRegion {
        self.regions
            .iter()
            .find(|r| r.architecture == arch && r.zeta == zeta)
            .expect("all regions computed")
    }
}

/// Rate-energy regions for both receiver architectures with and without
/// predistortion at the configured transmit power.
pub fn run_re_region(cfg: &ExperimentConfig) -> CliResult<ReRegionResult> {
    let plant = build_plant(cfg)?;
    let n = cfg.re_region.n_channels;
    let hs = channels(cfg, "re_region/channel", n)?;
    let xs = symbol_streams(cfg, "re_region/symbols", n)?;
    let budgets = link_budgets(cfg, &plant.model, &hs, &xs, dbm_to_w(cfg.link.tx_power_dbm))?;
    let eh = cfg.harvester.model()?;
    let mut regions = Vec::new();
    let mut comparisons = Vec::new();
    for arch in [Architecture::TimeSwitching, Architecture::PowerSplitting] {
        let with = re_region(
            arch,
            Zeta::WithDpd,
            cfg.re_region.grid_points,
            &budgets,
            &eh,
        )?;
        let without = re_region(
            arch,
            Zeta::WithoutDpd,
            cfg.re_region.grid_points,
            &budgets,
            &eh,
        )?;
        comparisons.push((arch, compare_regions(&with, &without)?));
        regions.push(with);
        regions.push(without);
    }
    Ok(ReRegionResult {
        regions,
        comparisons,
        n_channels: n,
        mean_unachievable_fraction: mean(budgets.iter().map(|b| b.unachievable_fraction)),
    })
}

// ---------------------------------------------------------------- correlation

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationRow {
    pub input: &'static str,
    pub model: &'static str,
    pub estimate: CorrelationEstimate,
}

#[derive(Debug, Clone)]
pub struct CorrelationResult {
    pub rows: Vec<CorrelationRow>,
}

impl CorrelationResult {
    pub fn find(&self, input: &str, model: &str) -> Option<&CorrelationEstimate> {
        self.rows
            .iter()
            .find(|r| r.input == input && r.model == model)
            .map(|r| &r.estimate)
    }
}

/// White and FIR-coloured circular Gaussian inputs of unit power.
pub fn correlation_inputs(
    n: usize,
    fir: &[f64],
    seed: u64,
) -> CliResult<(ComplexSignal, ComplexSignal)> {
    let energy: f64 = fir.iter().map(|t| t * t).sum();
    if fir.is_empty() || !(energy > 0.0) {
        return Err(CliError::Config("colouring FIR needs a nonzero tap".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let white: Vec<Complex64> = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    let norm = energy.sqrt();
    let coloured: Vec<Complex64> = (0..n)
        .map(|k| {
            fir.iter()
                .enumerate()
                .take(k + 1)
                .map(|(j, t)| white[k - j] * (t / norm))
                .sum()
        })
        .collect();
    Ok((
        ComplexSignal::new(white, 1.0)?,
        ComplexSignal::new(coloured, 1.0)?,
    ))
}

/// Sample input-distortion correlation with standard errors for white and
/// coloured inputs, for the configured probe model and the plant.
pub fn run_correlation(cfg: &ExperimentConfig) -> CliResult<CorrelationResult> {
    let probe = cfg.correlation.model()?;
    let plant = build_plant(cfg)?;
    let (white, coloured) = correlation_inputs(
        cfg.correlation.n_samples,
        &cfg.correlation.colouring_fir,
        derive_seed(cfg.seed, "correlation/input", 0),
    )?;
    let a = cfg.amplifier.saturation_amplitude * 10f64.powf(-cfg.waveform.input_backoff_db / 20.0);
    let mut rows = Vec::new();
    for (input, sig) in [("iid_gaussian", &white), ("fir_coloured", &coloured)] {
        rows.push(CorrelationRow {
            input,
            model: "probe",
            estimate: input_distortion_correlation(&probe, sig)?,
        });
        rows.push(CorrelationRow {
            input,
            model: "plant",
            estimate: input_distortion_correlation(&plant.model, &sig.scaled(a))?,
        });
    }
    Ok(CorrelationResult { rows })
}

/// Run-independent facts recorded in every metadata sidecar.
pub fn plant_summary(plant: &Plant) -> serde_json::Value {
    json!({
        "source": plant.source,
        "order_p": plant.model.order_p(),
        "memory_m": plant.model.memory_m(),
        "saturation_amplitude": plant.model.saturation_amplitude(),
        "fit": plant.fit_report,
    })
}
