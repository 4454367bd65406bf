//! Experiment configuration file.
//!
//! Every key has a default, so an empty file is a valid configuration.
//! Physical quantities carry their unit in the key name.

use std::path::Path;

use serde::{Deserialize, Serialize};
use swipt_core::dpd::DpdConfig;
use swipt_core::hpa::{MemoryPolynomial, ReferenceAmplifier};
use swipt_core::mimo::LinkNoise;
use swipt_core::signal::{Constellation, OfdmParams};
use swipt_core::swipt::EhModel;
use swipt_core::units::dbm_to_w;
use swipt_core::Complex64;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    Fit,
    Psd,
    Ccdf,
    RateSweep,
    ReRegion,
    Correlation,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fit => "fit",
            Experiment::Psd => "psd",
            Experiment::Ccdf => "ccdf",
            Experiment::RateSweep => "rate_sweep",
            Experiment::ReRegion => "re_region",
            Experiment::Correlation => "correlation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Informational; the command line selects what runs.
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub out_dir: String,
    pub waveform: WaveformConfig,
    pub amplifier: AmplifierConfig,
    pub dpd: DpdConfig,
    pub spectrum: SpectrumConfig,
    pub ccdf: CcdfConfig,
    pub link: LinkConfig,
    pub harvester: HarvesterConfig,
    pub rate_sweep: RateSweepConfig,
    pub re_region: ReRegionConfig,
    pub fit: FitConfig,
    pub correlation: CorrelationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 1,
            out_dir: "out".into(),
            waveform: WaveformConfig::default(),
            amplifier: AmplifierConfig::default(),
            dpd: DpdConfig::default(),
            spectrum: SpectrumConfig::default(),
            ccdf: CcdfConfig::default(),
            link: LinkConfig::default(),
            harvester: HarvesterConfig::default(),
            rate_sweep: RateSweepConfig::default(),
            re_region: ReRegionConfig::default(),
            fit: FitConfig::default(),
            correlation: CorrelationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformKind {
    /// Single OFDM-like carrier.
    Ofdm,
    /// Frequency-shifted OFDM-like sub-bands standing in for a
    /// multichannel WCDMA carrier.
    Multichannel,
    Multisine,
}

/// Test waveform for the spectrum and CCDF experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformConfig {
    pub kind: WaveformKind,
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub constellation: Constellation,
    pub oversampling: usize,
    pub subcarrier_spacing_hz: f64,
    pub n_channels: usize,
    pub channel_spacing_hz: f64,
    pub n_tones: usize,
    pub tone_spacing_hz: f64,
    pub n_samples: usize,
    pub sample_rate_hz: f64,
    /// "zero" or "random".
    pub phases: String,
    /// Mean input power below saturation_amplitude², dB.
    pub input_backoff_db: f64,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self {
            kind: WaveformKind::Multichannel,
            n_subcarriers: 16,
            n_symbols: 128,
            constellation: Constellation::Qpsk,
            oversampling: 32,
            subcarrier_spacing_hz: 240e3,
            n_channels: 4,
            channel_spacing_hz: 5e6,
            n_tones: 16,
            tone_spacing_hz: 1e5,
            n_samples: 65_536,
            sample_rate_hz: 4e7,
            phases: "random".into(),
            input_backoff_db: 10.0,
        }
    }
}

impl WaveformConfig {
    pub fn ofdm_params(&self) -> OfdmParams {
        OfdmParams {
            n_subcarriers: self.n_subcarriers,
            n_symbols: self.n_symbols,
            constellation: self.constellation,
            oversampling: self.oversampling,
            subcarrier_spacing_hz: self.subcarrier_spacing_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplifierKind {
    /// Reference amplifier, identified as a memory polynomial.
    Reference,
    /// Pass-through amplifier.
    Identity,
    /// Memory polynomial given inline by `coeffs` or read from `model_path`.
    Mpm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmplifierConfig {
    pub kind: AmplifierKind,
    /// Real FIR memory taps (normalized to unit energy).
    pub fir_taps: Vec<f64>,
    pub smoothness: f64,
    /// Rapp saturation amplitude; also the reference level for input backoff.
    pub saturation_amplitude: f64,
    pub small_signal_gain: f64,
    pub order_p: usize,
    pub memory_m: usize,
    /// RMS of the identification excitation relative to saturation_amplitude.
    pub fit_drive: f64,
    pub fit_n_symbols: usize,
    pub model_path: Option<String>,
    /// Inline MPM coefficients as [re, im] pairs in (p, m) order, sized by
    /// order_p and memory_m.
    pub coeffs: Option<Vec<[f64; 2]>>,
}

impl Default for AmplifierConfig {
    fn default() -> Self {
        let amp = ReferenceAmplifier::default();
        Self {
            kind: AmplifierKind::Reference,
            fir_taps: vec![1.0, 0.01, -0.004, 0.001],
            smoothness: amp.smoothness(),
            saturation_amplitude: amp.saturation_amplitude(),
            small_signal_gain: amp.small_signal_gain(),
            order_p: 7,
            memory_m: 3,
            fit_drive: 1.5,
            fit_n_symbols: 64,
            model_path: None,
            coeffs: None,
        }
    }
}

impl AmplifierConfig {
    /// Model from the inline coefficients, if any.
    pub fn inline_model(&self) -> CliResult<Option<MemoryPolynomial>> {
        self.coeffs
            .as_ref()
            .map(|coeffs| {
                Ok(MemoryPolynomial::new(
                    self.order_p,
                    self.memory_m,
                    coeffs
                        .iter()
                        .map(|[re, im]| Complex64::new(*re, *im))
                        .collect(),
                )?)
            })
            .transpose()
    }

    pub fn reference(&self) -> CliResult<ReferenceAmplifier> {
        Ok(ReferenceAmplifier::new(
            self.fir_taps
                .iter()
                .map(|t| Complex64::new(*t, 0.0))
                .collect(),
            self.smoothness,
            self.saturation_amplitude,
            self.small_signal_gain,
        )?)
    }
}

/// Welch estimator and ACPR bands. Band edges are fractions of the
/// occupied bandwidth B: main band [−B/2, B/2], adjacent bands
/// ±[adjacent_lo·B, adjacent_hi·B].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub segment_length: usize,
    pub overlap_fraction: f64,
    pub adjacent_lo: f64,
    pub adjacent_hi: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            segment_length: 4096,
            overlap_fraction: 0.5,
            adjacent_lo: 0.55,
            adjacent_hi: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcdfConfig {
    pub threshold_min_db: f64,
    pub threshold_max_db: f64,
    pub threshold_step_db: f64,
    /// Exceedance probability at which PAPR is reported.
    pub papr_probability: f64,
}

impl Default for CcdfConfig {
    fn default() -> Self {
        Self {
            threshold_min_db: 0.0,
            threshold_max_db: 12.0,
            threshold_step_db: 0.1,
            papr_probability: 1e-3,
        }
    }
}

impl CcdfConfig {
    pub fn thresholds(&self) -> CliResult<Vec<f64>> {
        if !(self.threshold_step_db > 0.0 && self.threshold_max_db >= self.threshold_min_db) {
            return Err(CliError::Config("CCDF threshold grid is empty".into()));
        }
        let n = ((self.threshold_max_db - self.threshold_min_db) / self.threshold_step_db + 1e-9)
            .floor() as usize;
        Ok((0..=n)
            .map(|k| self.threshold_min_db + k as f64 * self.threshold_step_db)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub distance_m: f64,
    pub pathloss_exponent: f64,
    pub tx_power_dbm: f64,
    pub sigma_v_sq_dbm: f64,
    pub sigma_a_sq_dbm: f64,
    /// OFDM-like symbol stream driving each channel realization.
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub oversampling: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            n_t: 3,
            n_r: 2,
            distance_m: 12.0,
            pathloss_exponent: 2.6,
            tx_power_dbm: 14.0,
            sigma_v_sq_dbm: -70.0,
            sigma_a_sq_dbm: -50.0,
            n_subcarriers: 64,
            n_symbols: 4,
            oversampling: 8,
        }
    }
}

impl LinkConfig {
    pub fn noise(&self) -> CliResult<LinkNoise> {
        Ok(LinkNoise::new(
            dbm_to_w(self.sigma_v_sq_dbm),
            dbm_to_w(self.sigma_a_sq_dbm),
        )?)
    }

    pub fn symbol_params(&self) -> OfdmParams {
        OfdmParams {
            n_subcarriers: self.n_subcarriers,
            n_symbols: self.n_symbols,
            oversampling: self.oversampling,
            ..OfdmParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarvesterConfig {
    pub p_h_l_dbm: f64,
    pub p_h_u_dbm: f64,
    pub eta: f64,
}

impl Default for HarvesterConfig {
    fn default() -> Self {
        Self {
            p_h_l_dbm: -10.0,
            p_h_u_dbm: 2.0,
            eta: 0.24,
        }
    }
}

impl HarvesterConfig {
    pub fn model(&self) -> CliResult<EhModel> {
        Ok(EhModel::new(
            dbm_to_w(self.p_h_l_dbm),
            dbm_to_w(self.p_h_u_dbm),
            self.eta,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateSweepConfig {
    pub tx_power_min_dbm: f64,
    pub tx_power_max_dbm: f64,
    pub tx_power_step_dbm: f64,
    pub n_channels: usize,
}

impl Default for RateSweepConfig {
    fn default() -> Self {
        Self {
            tx_power_min_dbm: -10.0,
            tx_power_max_dbm: 40.0,
            tx_power_step_dbm: 2.0,
            n_channels: 100,
        }
    }
}

impl RateSweepConfig {
    pub fn powers_dbm(&self) -> CliResult<Vec<f64>> {
        if !(self.tx_power_step_dbm > 0.0 && self.tx_power_max_dbm >= self.tx_power_min_dbm) {
            return Err(CliError::Config("transmit power grid is empty".into()));
        }
        let n = ((self.tx_power_max_dbm - self.tx_power_min_dbm) / self.tx_power_step_dbm + 1e-9)
            .floor() as usize;
        Ok((0..=n)
            .map(|k| self.tx_power_min_dbm + k as f64 * self.tx_power_step_dbm)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReRegionConfig {
    pub grid_points: usize,
    pub n_channels: usize,
}

impl Default for ReRegionConfig {
    fn default() -> Self {
        Self {
            grid_points: 101,
            n_channels: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Orders and memory depths of the NMSE table.
    pub sweep_orders: Vec<usize>,
    pub sweep_memory: Vec<usize>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            sweep_orders: vec![1, 3, 5, 7],
            sweep_memory: vec![0, 1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelationConfig {
    pub n_samples: usize,
    /// FIR that colours white Gaussian noise for the correlated input.
    pub colouring_fir: Vec<f64>,
    pub order_p: usize,
    pub memory_m: usize,
    /// Model coefficients as [re, im] pairs in (p, m) order.
    pub coeffs: Vec<[f64; 2]>,
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            colouring_fir: vec![1.0, 0.8, 0.5, 0.2],
            order_p: 3,
            memory_m: 1,
            coeffs: vec![
                [1.0, 0.0],
                [0.3, 0.0],
                [0.0, 0.0],
                [0.0, 0.0],
                [-0.1, 0.0],
                [0.02, 0.0],
            ],
        }
    }
}

impl CorrelationConfig {
    pub fn model(&self) -> CliResult<MemoryPolynomial> {
        Ok(MemoryPolynomial::new(
            self.order_p,
            self.memory_m,
            self.coeffs
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect(),
        )?)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks that cannot be expressed by field types.
    pub fn validate(&self) -> CliResult<()> {
        self.dpd.validate()?;
        self.harvester.model()?;
        self.link.noise()?;
        if self.amplifier.kind == AmplifierKind::Mpm {
            match (&self.amplifier.model_path, &self.amplifier.coeffs) {
                (Some(_), None) => {}
                (None, Some(_)) => {
                    self.amplifier.inline_model()?;
                }
                _ => {
                    return Err(CliError::Config(
                        "amplifier kind \"mpm\" needs exactly one of model_path and coeffs".into(),
                    ))
                }
            }
        }
        if self.amplifier.kind == AmplifierKind::Reference {
            self.amplifier.reference()?;
        }
        if !(self.amplifier.saturation_amplitude > 0.0) {
            return Err(CliError::Config(
                "saturation_amplitude must be positive".into(),
            ));
        }
        if !(self.spectrum.adjacent_lo >= 0.5
            && self.spectrum.adjacent_hi > self.spectrum.adjacent_lo)
        {
            return Err(CliError::Config(
                "adjacent band must start at or beyond the main band edge (0.5) and be non-empty"
                    .into(),
            ));
        }
        if !matches!(self.waveform.phases.as_str(), "zero" | "random") {
            return Err(CliError::Config(format!(
                "phases must be \"zero\" or \"random\", got {:?}",
                self.waveform.phases
            )));
        }
        if self.link.n_t == 0 || self.link.n_r == 0 {
            return Err(CliError::Config("antenna counts must be positive".into()));
        }
        if self.rate_sweep.n_channels == 0 || self.re_region.n_channels == 0 {
            return Err(CliError::Config("channel counts must be positive".into()));
        }
        self.ccdf.thresholds()?;
        self.rate_sweep.powers_dbm()?;
        Ok(())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
