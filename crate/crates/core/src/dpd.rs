//! Iterative digital predistortion by per-sample fixed-point inversion of a
//! memory-polynomial amplifier.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::hpa::{self, MemoryPolynomial};
use crate::signal::ComplexSignal;

/// Stopping and range parameters of the inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpdConfig {
    /// Largest accepted change of the fixed-point map, amplitude units.
    pub tolerance: f64,
    pub max_iterations: u32,
    /// Largest admissible |x_dpd| as a multiple of the model's saturation
    /// amplitude.
    pub saturation_guard: f64,
}

impl Default for DpdConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 50,
            saturation_guard: 1.0,
        }
    }
}

impl DpdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return config(format!(
                "DPD tolerance must be positive, got {}",
                self.tolerance
            ));
        }
        if self.max_iterations == 0 {
            return config("DPD max_iterations must be at least 1");
        }
        if !(self.saturation_guard > 0.0) {
            return config(format!(
                "saturation guard must be positive, got {}",
                self.saturation_guard
            ));
        }
        Ok(())
    }
}

/// Largest drive amplitude admitted in front of `model`: the guard multiple
/// of its saturation amplitude, or `None` for a model that never saturates.
pub fn amplitude_limit(model: &MemoryPolynomial, cfg: &DpdConfig) -> Option<f64> {
    model
        .saturation_amplitude()
        .map(|a| a * cfg.saturation_guard)
        .filter(|a| a.is_finite())
}

/// Per-sample convergence record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DpdReport {
    /// Map updates applied before exit.
    pub iterations_per_sample: Vec<u32>,
    pub converged: Vec<bool>,
    /// Distance between the last iterate and its image under the map.
    pub residual: Vec<f64>,
    /// Output held at the amplitude limit (target beyond saturation).
    pub clipped: Vec<bool>,
}

impl DpdReport {
    /// Samples whose target could not be reached.
    pub fn unachievable_count(&self) -> usize {
        self.converged.iter().filter(|c| !**c).count()
    }

    pub fn clipped_count(&self) -> usize {
        self.clipped.iter().filter(|c| **c).count()
    }

    /// `n,iterations,converged,residual` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,iterations,converged,residual")?;
        for (n, ((it, ok), r)) in self
            .iterations_per_sample
            .iter()
            .zip(&self.converged)
            .zip(&self.residual)
            .enumerate()
        {
            writeln!(out, "{n},{it},{ok},{r}")?;
        }
        Ok(())
    }
}

/// Solves x = (x_in(n) − δ(n)) / Δ(|x|) sample by sample, where δ(n) is the
/// memory contribution of the already inverted past samples.
///
/// The iteration starts at x_in(n). Its step is halved whenever the map
/// residual grows on two consecutive iterations. Iterates beyond the
/// amplitude limit are clipped onto it and the sample is flagged as
/// unachievable.
pub fn dpd_invert(
    model: &MemoryPolynomial,
    x_in: &ComplexSignal,
    cfg: &DpdConfig,
) -> Result<(ComplexSignal, DpdReport)> {
    cfg.validate()?;
    if model.coeff(1, 0).norm() == 0.0 {
        return Err(Error::NonInvertible(
            "linear gain c(1,0) is zero, the model cannot be inverted".into(),
        ));
    }
    let (samples, report) = invert_samples(model, x_in.samples(), cfg, amplitude_limit(model, cfg));
    Ok((x_in.with_samples(samples)?, report))
}

pub(crate) fn invert_samples(
    model: &MemoryPolynomial,
    target: &[Complex64],
    cfg: &DpdConfig,
    limit: Option<f64>,
) -> (Vec<Complex64>, DpdReport) {
    let order_p = model.order_p();
    let memory_m = model.memory_m();
    let n_samples = target.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n_samples];
    // Basis values of the inverted outputs, filled as we go.
    let mut table = vec![Complex64::new(0.0, 0.0); n_samples * order_p];
    let mut report = DpdReport {
        iterations_per_sample: Vec::with_capacity(n_samples),
        converged: Vec::with_capacity(n_samples),
        residual: Vec::with_capacity(n_samples),
        clipped: Vec::with_capacity(n_samples),
    };
    let clip = |v: Complex64| -> (Complex64, bool) {
        match limit {
            Some(l) if v.norm() > l => (v * (l / v.norm()), true),
            _ => (v, false),
        }
    };

    for n in 0..n_samples {
        let mut memory = Complex64::new(0.0, 0.0);
        for m in 1..=memory_m.min(n) {
            let row = &table[(n - m) * order_p..(n - m + 1) * order_p];
            for (p_idx, b) in row.iter().enumerate() {
                memory += model.coeff(p_idx + 1, m) * b;
            }
        }
        let goal = target[n] - memory;

        let (mut x, mut at_limit) = clip(target[n]);
        let mut step = 1.0;
        let mut growth = 0;
        let mut prev_residual = f64::INFINITY;
        let mut iterations = 0;
        let mut residual;
        let mut ok = false;
        loop {
            let gain = model.scaling_factor(x.norm());
            let image = if gain.norm() > 0.0 {
                goal / gain
            } else {
                Complex64::new(f64::INFINITY, 0.0)
            };
            residual = (image - x).norm();
            if !residual.is_finite() {
                residual = f64::INFINITY;
            }
            if residual <= cfg.tolerance && !at_limit {
                ok = true;
                break;
            }
            if iterations >= cfg.max_iterations {
                break;
            }
            growth = if residual > prev_residual {
                growth + 1
            } else {
                0
            };
            if growth >= 2 {
                step *= 0.5;
                growth = 0;
            }
            prev_residual = residual;
            let proposal = if image.re.is_finite() && image.im.is_finite() {
                if step == 1.0 {
                    image
                } else {
                    x + (image - x) * step
                }
            } else {
                // Δ vanished: push outward, the limit will catch it.
                x * 2.0 + Complex64::new(f64::MIN_POSITIVE, 0.0)
            };
            let (next, hit) = clip(proposal);
            iterations += 1;
            let moved = (next - x).norm();
            x = next;
            at_limit = hit;
            if at_limit && moved <= cfg.tolerance {
                // Pinned at the limit: the target is out of range.
                break;
            }
        }
        if at_limit {
            ok = false;
        }
        out[n] = x;
        hpa_basis(x, &mut table[n * order_p..(n + 1) * order_p]);
        report.iterations_per_sample.push(iterations);
        report.converged.push(ok);
        report.residual.push(residual);
        report.clipped.push(at_limit);
    }
    (out, report)
}

fn hpa_basis(x: Complex64, row: &mut [Complex64]) {
    let a = x.norm();
    let mut term = x;
    for slot in row.iter_mut() {
        *slot = term;
        term *= a;
    }
}

/// NMSE in dB between the amplified predistorted signal and the target.
pub fn linearization_error(
    model: &MemoryPolynomial,
    x_in: &ComplexSignal,
    x_dpd: &ComplexSignal,
) -> Result<f64> {
    if x_in.len() != x_dpd.len() {
        return config("target and predistorted signals differ in length");
    }
    let y = hpa::eval_mpm(model, x_dpd)?;
    hpa::nmse_db(x_in, &y)
}
