//! Test waveforms and their scalar/spectral statistics.
//!
//! Every generator is a pure function of its arguments and an explicit seed.
//! Spectra are two-sided and ordered by ascending frequency.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

/// Uniformly sampled complex baseband sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return config("signal must contain at least one sample");
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return config(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            ));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// (1/N) Σ|s_n|².
    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    /// Same sample rate, new samples.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, self.sample_rate_hz)
    }

    /// Multiplies every sample by a real gain.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Rescales to unit mean power.
    pub fn normalized(&self) -> Result<Self> {
        let p = self.mean_power();
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::UndefinedStatistic(
                "cannot normalize a zero-power signal".into(),
            ));
        }
        Ok(self.scaled(1.0 / p.sqrt()))
    }
}

pub(crate) fn mean_power(samples: &[Complex64]) -> f64 {
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Phase assignment for [`gen_multisine`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phases {
    Zero,
    Random(u64),
    Explicit(Vec<f64>),
}

/// Sum of `n_tones` equal-amplitude complex exponentials centred on DC and
/// spaced `tone_spacing_hz` apart, scaled to unit mean power.
pub fn gen_multisine(
    n_tones: usize,
    tone_spacing_hz: f64,
    n_samples: usize,
    sample_rate_hz: f64,
    phases: &Phases,
) -> Result<ComplexSignal> {
    if n_tones == 0 || n_samples == 0 {
        return config("multisine needs at least one tone and one sample");
    }
    if !(tone_spacing_hz > 0.0 && sample_rate_hz > 0.0) {
        return config("tone spacing and sample rate must be positive");
    }
    if n_tones as f64 * tone_spacing_hz >= sample_rate_hz {
        return config(format!(
            "{n_tones} tones at {tone_spacing_hz} Hz spacing alias at {sample_rate_hz} Hz sampling"
        ));
    }
    let phi: Vec<f64> = match phases {
        Phases::Zero => vec![0.0; n_tones],
        Phases::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n_tones)
                .map(|_| rng.random::<f64>() * 2.0 * PI)
                .collect()
        }
        Phases::Explicit(v) => {
            if v.len() != n_tones {
                return config(format!("expected {n_tones} phases, got {}", v.len()));
            }
            v.clone()
        }
    };
    let centre = (n_tones as f64 - 1.0) / 2.0;
    let freqs: Vec<f64> = (0..n_tones)
        .map(|k| (k as f64 - centre) * tone_spacing_hz)
        .collect();
    let samples = (0..n_samples)
        .map(|n| {
            let t = n as f64 / sample_rate_hz;
            freqs
                .iter()
                .zip(&phi)
                .map(|(f, p)| Complex64::from_polar(1.0, 2.0 * PI * f * t + p))
                .sum::<Complex64>()
        })
        .collect();
    ComplexSignal::new(samples, sample_rate_hz)?.normalized()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
}

impl Constellation {
    /// Unit-energy random symbol.
    fn draw(self, rng: &mut impl Rng) -> Complex64 {
        match self {
            Constellation::Qpsk => {
                let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
                Complex64::new(re, im) / 2f64.sqrt()
            }
            Constellation::Qam16 => {
                let level = |b: u32| [-3.0, -1.0, 1.0, 3.0][b as usize];
                let re = level(rng.random_range(0..4));
                let im = level(rng.random_range(0..4));
                Complex64::new(re, im) / 10f64.sqrt()
            }
        }
    }
}

/// Parameters of the cyclic-prefix-free multicarrier surrogate waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfdmParams {
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub constellation: Constellation,
    pub oversampling: usize,
    pub subcarrier_spacing_hz: f64,
}

impl Default for OfdmParams {
    fn default() -> Self {
        Self {
            n_subcarriers: 64,
            n_symbols: 32,
            constellation: Constellation::Qpsk,
            oversampling: 8,
            subcarrier_spacing_hz: 15e3,
        }
    }
}

impl OfdmParams {
    pub fn occupied_bandwidth_hz(&self) -> f64 {
        self.n_subcarriers as f64 * self.subcarrier_spacing_hz
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.occupied_bandwidth_hz() * self.oversampling as f64
    }

    fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 || self.n_symbols == 0 {
            return config("OFDM-like waveform needs subcarriers and symbols");
        }
        if self.oversampling < 2 {
            return config(format!(
                "oversampling must be at least 2, got {}",
                self.oversampling
            ));
        }
        if !(self.subcarrier_spacing_hz > 0.0) {
            return config("subcarrier spacing must be positive");
        }
        Ok(())
    }
}

/// Critically sampled multicarrier sequence: one unitary IDFT per symbol,
/// subcarriers centred on DC, symbols concatenated without cyclic prefix.
pub fn multicarrier_baseband(params: &OfdmParams, seed: u64) -> Result<Vec<Complex64>> {
    params.validate()?;
    let n = params.n_subcarriers;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(n);
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = Vec::with_capacity(n * params.n_symbols);
    for _ in 0..params.n_symbols {
        // Subcarrier k in [-n/2, n/2) lives in DFT bin k mod n.
        let mut bins = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let offset = k as isize - (n / 2) as isize;
            bins[offset.rem_euclid(n as isize) as usize] = params.constellation.draw(&mut rng);
        }
        ifft.process(&mut bins);
        out.extend(bins.into_iter().map(|b| b * scale));
    }
    Ok(out)
}

/// Ideal band-limited interpolation by `factor` (DFT zero padding of the
/// whole sequence, so the result is exactly periodic and alias-free).
fn interpolate(samples: &[Complex64], factor: usize) -> Vec<Complex64> {
    let len = samples.len();
    let long = len * factor;
    let mut planner = FftPlanner::<f64>::new();
    let mut spectrum = samples.to_vec();
    planner.plan_fft_forward(len).process(&mut spectrum);
    let mut padded = vec![Complex64::new(0.0, 0.0); long];
    let positive = len.div_ceil(2);
    padded[..positive].copy_from_slice(&spectrum[..positive]);
    let negative = len - positive;
    padded[long - negative..].copy_from_slice(&spectrum[positive..]);
    planner.plan_fft_inverse(long).process(&mut padded);
    padded
}

/// Multicarrier waveform oversampled by ideal interpolation, unit mean power.
pub fn gen_ofdm_like(params: &OfdmParams, seed: u64) -> Result<ComplexSignal> {
    let base = multicarrier_baseband(params, seed)?;
    let samples = interpolate(&base, params.oversampling);
    ComplexSignal::new(samples, params.sample_rate_hz())?.normalized()
}

/// Sum of `n_channels` independent OFDM-like sub-bands, each shifted to its
/// own carrier spaced `channel_spacing_hz` apart and centred on DC. Stands in
/// for a multichannel WCDMA carrier. `params.oversampling` is relative to a
/// single sub-band.
pub fn gen_multichannel(
    params: &OfdmParams,
    n_channels: usize,
    channel_spacing_hz: f64,
    seed: u64,
) -> Result<ComplexSignal> {
    if n_channels == 0 {
        return config("need at least one channel");
    }
    let fs = params.sample_rate_hz();
    let span = (n_channels as f64 - 1.0) * channel_spacing_hz + params.occupied_bandwidth_hz();
    if span >= fs {
        return config(format!(
            "{n_channels} channels spanning {span} Hz do not fit in {fs} Hz sampling"
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total: Option<Vec<Complex64>> = None;
    let centre = (n_channels as f64 - 1.0) / 2.0;
    for c in 0..n_channels {
        let band = gen_ofdm_like(params, rng.random())?;
        let fc = (c as f64 - centre) * channel_spacing_hz;
        let shifted = band
            .samples()
            .iter()
            .enumerate()
            .map(|(n, s)| s * Complex64::from_polar(1.0, 2.0 * PI * fc * n as f64 / fs));
        match total.as_mut() {
            None => total = Some(shifted.collect()),
            Some(acc) => acc.iter_mut().zip(shifted).for_each(|(a, s)| *a += s),
        }
    }
    ComplexSignal::new(total.unwrap_or_default(), fs)?.normalized()
}

fn checked_mean_power(sig: &ComplexSignal) -> Result<f64> {
    let p = sig.mean_power();
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::UndefinedStatistic(
            "statistic needs a signal with positive mean power".into(),
        ));
    }
    Ok(p)
}

/// 10·log10(max|s|² / mean|s|²).
pub fn papr_db(sig: &ComplexSignal) -> Result<f64> {
    let mean = checked_mean_power(sig)?;
    let peak = sig
        .samples()
        .iter()
        .map(|s| s.norm_sqr())
        .fold(0.0, f64::max);
    // Rounding can push a constant envelope a hair below its own mean.
    Ok((10.0 * (peak / mean).log10()).max(0.0))
}

/// Fraction of samples whose instantaneous-to-mean power ratio exceeds each
/// threshold.
pub fn ccdf(sig: &ComplexSignal, thresholds_db: &[f64]) -> Result<Vec<(f64, f64)>> {
    if thresholds_db.windows(2).any(|w| w[1] < w[0]) {
        return config("CCDF thresholds must be sorted ascending");
    }
    let mean = checked_mean_power(sig)?;
    let mut ratios: Vec<f64> = sig.samples().iter().map(|s| s.norm_sqr() / mean).collect();
    ratios.sort_by(f64::total_cmp);
    let n = ratios.len() as f64;
    Ok(thresholds_db
        .iter()
        .map(|&t| {
            let lin = 10f64.powf(t / 10.0);
            let at_or_below = ratios.partition_point(|&r| r <= lin);
            (t, (ratios.len() - at_or_below) as f64 / n)
        })
        .collect())
}

/// Power-ratio level (dB) exceeded by a fraction `probability` of samples.
pub fn papr_at_probability(sig: &ComplexSignal, probability: f64) -> Result<f64> {
    if !(probability > 0.0 && probability < 1.0) {
        return config("probability must lie in (0, 1)");
    }
    let mean = checked_mean_power(sig)?;
    let mut ratios: Vec<f64> = sig.samples().iter().map(|s| s.norm_sqr() / mean).collect();
    ratios.sort_by(|a, b| b.total_cmp(a));
    let idx = ((probability * ratios.len() as f64).floor() as usize).min(ratios.len() - 1);
    Ok(10.0 * ratios[idx].max(f64::MIN_POSITIVE).log10())
}

/// Welch estimate of a two-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub freqs_hz: Vec<f64>,
    /// Linear density in signal-units²/Hz.
    pub psd: Vec<f64>,
    /// Bin power relative to the signal's total mean power, in dB.
    pub psd_db: Vec<f64>,
    pub segment_length: usize,
    pub overlap_fraction: f64,
    pub bin_width_hz: f64,
}

impl SpectrumEstimate {
    /// Σ PSD·Δf.
    pub fn integrated_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.bin_width_hz
    }

    /// Power in [lo, hi); `None` when no bin centre falls inside.
    pub fn band_power(&self, band: (f64, f64)) -> Option<f64> {
        let (lo, hi) = (band.0.min(band.1), band.0.max(band.1));
        let mut hit = false;
        let mut acc = 0.0;
        for (f, p) in self.freqs_hz.iter().zip(&self.psd) {
            if *f >= lo && *f < hi {
                hit = true;
                acc += p;
            }
        }
        hit.then_some(acc * self.bin_width_hz)
    }
}

const PSD_FLOOR: f64 = 1e-30;

/// Hann-windowed Welch periodogram, normalized so Σ PSD·Δf matches the mean
/// power of the signal.
pub fn psd_welch(
    sig: &ComplexSignal,
    segment_length: usize,
    overlap_fraction: f64,
) -> Result<SpectrumEstimate> {
    let n = sig.len();
    if segment_length < 2 || segment_length > n {
        return config(format!(
            "segment length {segment_length} must be in [2, {n}]"
        ));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return config(format!(
            "overlap fraction {overlap_fraction} outside [0, 1)"
        ));
    }
    let total_power = checked_mean_power(sig)?;
    let l = segment_length;
    let hop = ((l as f64 * (1.0 - overlap_fraction)).round() as usize).max(1);
    // Periodic Hann.
    let window: Vec<f64> = (0..l)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / l as f64).cos())
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(l);
    let mut acc = vec![0.0; l];
    let mut segments = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    let mut start = 0;
    while start + l <= n {
        for ((b, s), w) in buf
            .iter_mut()
            .zip(&sig.samples()[start..start + l])
            .zip(&window)
        {
            *b = s * w;
        }
        fft.process(&mut buf);
        acc.iter_mut()
            .zip(&buf)
            .for_each(|(a, b)| *a += b.norm_sqr());
        segments += 1;
        start += hop;
    }
    let fs = sig.sample_rate_hz();
    let df = fs / l as f64;
    let norm = 1.0 / (segments as f64 * window_energy * fs);
    let half = l / 2;
    let mut freqs_hz = Vec::with_capacity(l);
    let mut psd = Vec::with_capacity(l);
    // Rotate so bins run from -fs/2 upward.
    for k in 0..l {
        let bin = (k + l - half) % l;
        freqs_hz.push((k as f64 - half as f64) * df);
        psd.push(acc[bin] * norm);
    }
    let psd_db = psd
        .iter()
        .map(|p| 10.0 * (p * df / total_power).max(PSD_FLOOR).log10())
        .collect();
    Ok(SpectrumEstimate {
        freqs_hz,
        psd,
        psd_db,
        segment_length,
        overlap_fraction,
        bin_width_hz: df,
    })
}

/// 10·log10(main-band power / adjacent-band power), in dBc.
pub fn acpr_db(
    spectrum: &SpectrumEstimate,
    main_band: (f64, f64),
    adjacent_band: (f64, f64),
) -> Result<f64> {
    let nyquist = spectrum.bin_width_hz * spectrum.segment_length as f64 / 2.0;
    for (name, b) in [("main", main_band), ("adjacent", adjacent_band)] {
        if b.0 >= b.1 {
            return config(format!(
                "{name} band ({}, {}) is empty or reversed",
                b.0, b.1
            ));
        }
        if b.0 < -nyquist - 1e-9 || b.1 > nyquist + 1e-9 {
            return config(format!(
                "{name} band exceeds the Nyquist range ±{nyquist} Hz"
            ));
        }
    }
    if main_band.0 < adjacent_band.1 && adjacent_band.0 < main_band.1 {
        return config("main and adjacent bands overlap");
    }
    let main = spectrum
        .band_power(main_band)
        .ok_or_else(|| Error::Config("main band contains no frequency bins".into()))?;
    let adj = spectrum
        .band_power(adjacent_band)
        .ok_or_else(|| Error::Config("adjacent band contains no frequency bins".into()))?;
    Ok(10.0 * (main.max(PSD_FLOOR) / adj.max(PSD_FLOOR)).log10())
}

/// `threshold_db,probability` rows.
pub fn write_ccdf_csv<W: Write>(mut out: W, rows: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(out, "threshold_db,probability")?;
    for (t, p) in rows {
        writeln!(out, "{t},{p}")?;
    }
    Ok(())
}

/// `freq_hz,psd_db` rows.
pub fn write_psd_csv<W: Write>(mut out: W, spectrum: &SpectrumEstimate) -> std::io::Result<()> {
    writeln!(out, "freq_hz,psd_db")?;
    for (f, p) in spectrum.freqs_hz.iter().zip(&spectrum.psd_db) {
        writeln!(out, "{f},{p}")?;
    }
    Ok(())
}
