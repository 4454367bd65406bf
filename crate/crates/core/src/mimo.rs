//! Rayleigh MIMO channels, eigen-beamforming with amplifier-aware transmit
//! compensation, and the distorted post-combining link budget.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dpd::{self, DpdConfig};
use crate::error::{config, Error, Result};
use crate::hpa::{self, MemoryPolynomial};
use crate::signal::ComplexSignal;

/// N_R×N_T small-scale gains with a common pathloss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMatrix {
    n_r: usize,
    n_t: usize,
    /// Row-major small-scale gains before pathloss.
    gains: Vec<Complex64>,
    pathloss_linear: f64,
}

impl ChannelMatrix {
    /// `rows` are receive-antenna rows of small-scale gains.
    pub fn from_rows(rows: &[Vec<Complex64>], pathloss_linear: f64) -> Result<Self> {
        let n_r = rows.len();
        let n_t = rows.first().map_or(0, Vec::len);
        if n_r == 0 || n_t == 0 || rows.iter().any(|r| r.len() != n_t) {
            return config("channel matrix must be a non-empty rectangle");
        }
        if !(pathloss_linear > 0.0 && pathloss_linear.is_finite()) {
            return config(format!("pathloss must be positive, got {pathloss_linear}"));
        }
        Ok(Self {
            n_r,
            n_t,
            gains: rows.concat(),
            pathloss_linear,
        })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn pathloss_linear(&self) -> f64 {
        self.pathloss_linear
    }

    /// Small-scale gain before pathloss.
    pub fn gain(&self, row: usize, col: usize) -> Complex64 {
        self.gains[row * self.n_t + col]
    }

    /// Effective entry √pathloss · gain.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.gain(row, col) * self.pathloss_linear.sqrt()
    }

    /// Same channel with every small-scale gain multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            gains: self.gains.iter().map(|g| g * alpha).collect(),
            ..self.clone()
        }
    }

    /// Hᴴ·v for a receive-side vector.
    pub fn adjoint_apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n_t)
            .map(|j| (0..self.n_r).map(|i| self.entry(i, j).conj() * v[i]).sum())
            .collect()
    }

    /// H·H ᴴ, row-major N_R×N_R.
    pub fn gram(&self) -> Vec<Complex64> {
        let n = self.n_r;
        let mut g = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                g[i * n + k] = (0..self.n_t)
                    .map(|j| self.entry(i, j) * self.entry(k, j).conj())
                    .sum();
            }
        }
        g
    }

    /// Row-major `[re, im]` pairs of the small-scale gains plus pathloss.
    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.n_r)
            .map(|i| {
                (0..self.n_t)
                    .map(|j| {
                        let g = self.gain(i, j);
                        [g.re, g.im]
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string(&serde_json::json!({
            "n_r": self.n_r,
            "n_t": self.n_t,
            "pathloss_linear": self.pathloss_linear,
            "h": rows,
        }))
        .expect("channel serializes")
    }
}

/// I.i.d. CN(0,1) gains with pathloss distance^(−exponent).
pub fn gen_channel(
    n_t: usize,
    n_r: usize,
    distance_m: f64,
    pathloss_exponent: f64,
    seed: u64,
) -> Result<ChannelMatrix> {
    if n_t == 0 || n_r == 0 {
        return config("antenna counts must be positive");
    }
    if !(distance_m > 0.0 && pathloss_exponent > 0.0) {
        return config("distance and pathloss exponent must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<Complex64>> = (0..n_r)
        .map(|_| {
            (0..n_t)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect()
        })
        .collect();
    ChannelMatrix::from_rows(&rows, distance_m.powf(-pathloss_exponent))
}

/// Dominant eigenpair of H·Hᴴ.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda_max: f64,
    /// Unit norm; first non-negligible component real and positive.
    pub w_r: Vec<Complex64>,
    /// λ_max minus the next eigenvalue (λ_max itself when N_R = 1).
    pub eigengap: f64,
    /// Relative eigengap below 1e-10: the eigenvector is not unique.
    pub degenerate: bool,
    pub iterations: usize,
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 1_000_000;

fn matvec(g: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|k| g[i * n + k] * v[k]).sum())
        .collect()
}

fn vnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Power iteration on a Hermitian PSD matrix. Stops when the eigen-residual
/// drops below 1e-12 of the Rayleigh quotient.
fn power_iteration(g: &[Complex64], start: Vec<Complex64>) -> (f64, Vec<Complex64>, usize) {
    let mut v = start;
    let scale = vnorm(&v);
    if scale == 0.0 {
        return (0.0, v, 0);
    }
    v.iter_mut().for_each(|z| *z /= scale);
    let mut lambda = 0.0;
    for it in 1..=POWER_MAX_ITER {
        let gv = matvec(g, &v);
        lambda = dot(&v, &gv).re;
        let residual = vnorm(
            &gv.iter()
                .zip(&v)
                .map(|(a, b)| a - b * lambda)
                .collect::<Vec<_>>(),
        );
        let norm = vnorm(&gv);
        if norm == 0.0 {
            return (0.0, v, it);
        }
        if residual <= POWER_TOL * lambda.abs() {
            return (lambda, v, it);
        }
        v = gv.into_iter().map(|z| z / norm).collect();
    }
    (lambda, v, POWER_MAX_ITER)
}

fn fix_phase(v: &mut [Complex64]) {
    let norm = vnorm(v);
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-12 * norm).copied() {
        let rot = first.conj() / first.norm();
        v.iter_mut().for_each(|z| *z *= rot);
        if let Some(lead) = v.iter_mut().find(|z| z.norm() > 1e-12 * norm) {
            *lead = Complex64::new(lead.norm(), 0.0);
        }
    }
}

/// Dominant eigenpair of H·Hᴴ by power iteration from the all-ones vector.
///
/// The second eigenvalue is estimated by deflation from an alternating-sign
/// start; if deflation uncovers a larger eigenvalue (the all-ones start was
/// orthogonal to the dominant eigenvector), iteration restarts from it.
pub fn principal_eig(h: &ChannelMatrix) -> Result<EigenPair> {
    let n = h.n_r();
    let g = h.gram();
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let (mut lambda, mut w, mut iterations) = power_iteration(&g, ones);
    let mut second = 0.0;
    if n > 1 {
        for _ in 0..2 {
            let deflated: Vec<Complex64> = (0..n * n)
                .map(|idx| {
                    let (i, k) = (idx / n, idx % n);
                    g[idx] - w[i] * w[k].conj() * lambda
                })
                .collect();
            let mut start: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.5 * i as f64))
                .collect();
            let overlap = dot(&w, &start);
            start
                .iter_mut()
                .zip(&w)
                .for_each(|(s, wi)| *s -= wi * overlap);
            let (l2, v2, it2) = power_iteration(&deflated, start);
            iterations += it2;
            second = l2;
            if l2 > lambda * (1.0 + 1e-12) {
                let (l, v, it) = power_iteration(&g, v2);
                lambda = l;
                w = v;
                iterations += it;
            } else {
                break;
            }
        }
    }
    if !lambda.is_finite() {
        return Err(Error::Numerical("power iteration diverged".into()));
    }
    fix_phase(&mut w);
    let norm = vnorm(&w);
    w.iter_mut().for_each(|z| *z /= norm);
    let eigengap = if n > 1 {
        lambda - second.max(0.0)
    } else {
        lambda
    };
    Ok(EigenPair {
        lambda_max: lambda,
        degenerate: n > 1 && eigengap <= 1e-10 * lambda.abs(),
        eigengap,
        w_r: w,
        iterations,
    })
}

/// Receive combiner, compensated transmit weights and the operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub w_r: Vec<Complex64>,
    /// MRT direction Hᴴw_r/‖Hᴴw_r‖ divided elementwise by `delta_vec`.
    pub w_t: Vec<Complex64>,
    /// Hᴴw_r/‖Hᴴw_r‖.
    pub mrt: Vec<Complex64>,
    pub lambda_max: f64,
    /// Time-averaged Δ of each antenna's amplifier at the drive set by `w_t`.
    pub delta_vec: Vec<Complex64>,
    pub iterations: usize,
}

const WEIGHT_TOL: f64 = 1e-9;
const WEIGHT_MAX_ITER: usize = 20;

/// Per-antenna drive √P·w·x(n), limited to `limit`.
fn drive(
    weight: Complex64,
    x: &[Complex64],
    symbol_power_w: f64,
    limit: Option<f64>,
) -> Vec<Complex64> {
    let gain = weight * symbol_power_w.sqrt();
    x.iter()
        .map(|s| {
            let v = s * gain;
            match limit {
                Some(l) if v.norm() > l => v * (l / v.norm()),
                _ => v,
            }
        })
        .collect()
}

fn mean_scaling(model: &MemoryPolynomial, drive: &[Complex64]) -> Complex64 {
    drive
        .iter()
        .map(|v| model.scaling_factor(v.norm()))
        .sum::<Complex64>()
        / drive.len() as f64
}

/// Eq.-style compensated MRT: w_t = mrt ⊘ Δ̄ where Δ̄_i is the average of
/// Δ(|√P·w_t,i·x(n)|) over the symbol sequence `x`, solved by fixed-point
/// iteration from pure MRT. The drive is limited to the DPD amplitude limit
/// of `model`, the same limit the transmit chain enforces.
pub fn hpa_aware_weights(
    h: &ChannelMatrix,
    w_r: &[Complex64],
    model: &MemoryPolynomial,
    symbol_power_w: f64,
    x: &ComplexSignal,
    dpd_cfg: &DpdConfig,
) -> Result<BeamformingSolution> {
    if w_r.len() != h.n_r() {
        return config(format!(
            "combiner has {} entries for {} receive antennas",
            w_r.len(),
            h.n_r()
        ));
    }
    if !(symbol_power_w > 0.0 && symbol_power_w.is_finite()) {
        return config(format!(
            "symbol power must be positive, got {symbol_power_w}"
        ));
    }
    let g = h.adjoint_apply(w_r);
    let g_norm = vnorm(&g);
    if g_norm == 0.0 {
        return Err(Error::Numerical(
            "combiner is orthogonal to the channel".into(),
        ));
    }
    let mrt: Vec<Complex64> = g.iter().map(|v| v / g_norm).collect();
    let gram = h.gram();
    let hw = matvec(&gram, w_r);
    let lambda_max = dot(w_r, &hw).re;
    let limit = dpd::amplitude_limit(model, dpd_cfg);
    let floor = 1e-12 * model.coeff(1, 0).norm();

    let deltas = |w: &[Complex64]| -> Result<Vec<Complex64>> {
        w.iter()
            .enumerate()
            .map(|(i, wi)| {
                let d = mean_scaling(model, &drive(*wi, x.samples(), symbol_power_w, limit));
                if !(d.norm() > floor) || !d.re.is_finite() {
                    return Err(Error::NonInvertible(format!(
                        "average gain on antenna {i} vanishes ({d})"
                    )));
                }
                Ok(d)
            })
            .collect()
    };

    let mut w_t = mrt.clone();
    let mut iterations = 0;
    for _ in 0..WEIGHT_MAX_ITER {
        let d = deltas(&w_t)?;
        let next: Vec<Complex64> = mrt.iter().zip(&d).map(|(m, d)| m / d).collect();
        let change = vnorm(
            &next
                .iter()
                .zip(&w_t)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        );
        w_t = next;
        iterations += 1;
        if change <= WEIGHT_TOL * vnorm(&w_t) {
            break;
        }
    }
    let delta_vec = deltas(&w_t)?;
    Ok(BeamformingSolution {
        w_r: w_r.to_vec(),
        w_t,
        mrt,
        lambda_max,
        delta_vec,
        iterations,
    })
}

/// Receiver noise powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkNoise {
    /// Antenna noise variance, W.
    pub sigma_v_sq_w: f64,
    /// RF-to-baseband conversion noise variance, W.
    pub sigma_a_sq_w: f64,
}

impl LinkNoise {
    pub fn new(sigma_v_sq_w: f64, sigma_a_sq_w: f64) -> Result<Self> {
        if !(sigma_v_sq_w > 0.0 && sigma_a_sq_w > 0.0) {
            return config("noise variances must be strictly positive");
        }
        Ok(Self {
            sigma_v_sq_w,
            sigma_a_sq_w,
        })
    }
}

/// Whether the memory distortion term is counted: present without
/// predistortion, removed with it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zeta {
    WithDpd,
    WithoutDpd,
}

impl Zeta {
    pub fn value(self) -> f64 {
        match self {
            Zeta::WithDpd => 0.0,
            Zeta::WithoutDpd => 1.0,
        }
    }

    pub fn from_flag(flag: u8) -> Result<Self> {
        match flag {
            0 => Ok(Zeta::WithDpd),
            1 => Ok(Zeta::WithoutDpd),
            other => config(format!("zeta must be 0 or 1, got {other}")),
        }
    }

    pub fn flag(self) -> u8 {
        self.value() as u8
    }
}

/// Simulated link quantities for one channel with and without DPD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    pub symbol_power_w: f64,
    pub lambda_max: f64,
    /// Projection gain of the DPD-chain output onto the ideal combined
    /// signal; exactly 1 when every target sample was reachable.
    pub bussgang_gain: Complex64,
    /// Power of the DPD-chain output uncorrelated with the ideal signal,
    /// caused by targets beyond saturation; common to both chains.
    pub saturation_floor_w: f64,
    /// Time-averaged |w_rᴴ H δ(n)|² of the chain without DPD.
    pub distortion_without_dpd_w: f64,
    /// Same quantity for the amplifier driven by the predistorted signal.
    pub distortion_with_dpd_w: f64,
    /// Time-averaged combined output power plus antenna noise.
    pub eh_input_without_dpd_w: f64,
    pub eh_input_with_dpd_w: f64,
    pub noise: LinkNoise,
    pub unachievable_fraction: f64,
}

impl LinkBudget {
    /// |α|²·P_t·Λ_max.
    pub fn signal_power_w(&self) -> f64 {
        self.bussgang_gain.norm_sqr() * self.symbol_power_w * self.lambda_max
    }

    /// Memory distortion power of the chain selected by `zeta`.
    pub fn distortion_w(&self, zeta: Zeta) -> f64 {
        match zeta {
            Zeta::WithDpd => self.distortion_with_dpd_w,
            Zeta::WithoutDpd => self.distortion_without_dpd_w,
        }
    }

    /// ζ·D + C + σ_v², the post-combining impairment without conversion
    /// noise.
    pub fn impairment_w(&self, zeta: Zeta) -> f64 {
        zeta.value() * self.distortion_w(zeta) + self.saturation_floor_w + self.noise.sigma_v_sq_w
    }

    /// Post-combining SNR.
    pub fn gamma(&self, zeta: Zeta) -> f64 {
        self.signal_power_w() / self.impairment_w(zeta)
    }

    pub fn eh_input_w(&self, zeta: Zeta) -> f64 {
        match zeta {
            Zeta::WithDpd => self.eh_input_with_dpd_w,
            Zeta::WithoutDpd => self.eh_input_without_dpd_w,
        }
    }
}

/// w_rᴴ H v(n) for per-antenna sequences `v`.
fn combine(h: &ChannelMatrix, w_r: &[Complex64], per_antenna: &[Vec<Complex64>]) -> Vec<Complex64> {
    let coupling: Vec<Complex64> = (0..h.n_t())
        .map(|j| (0..h.n_r()).map(|i| w_r[i].conj() * h.entry(i, j)).sum())
        .collect();
    let len = per_antenna.first().map_or(0, Vec::len);
    (0..len)
        .map(|n| {
            coupling
                .iter()
                .zip(per_antenna)
                .map(|(c, v)| c * v[n])
                .sum()
        })
        .collect()
}

fn mean_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64
}

/// Runs both transmit chains through the per-antenna amplifier `model`.
///
/// Without DPD each antenna is driven by √P·w_t,i·x(n). With DPD each
/// antenna's target √P·mrt_i·x(n) is predistorted first. Samples where any
/// antenna's target was unreachable are taken from the DPD-chain output;
/// the rest equal the ideal combined signal. Projecting that sequence onto
/// the ideal signal gives the gain α and the uncorrelated floor C.
pub fn evaluate_link(
    h: &ChannelMatrix,
    sol: &BeamformingSolution,
    model: &MemoryPolynomial,
    x: &ComplexSignal,
    symbol_power_w: f64,
    noise: LinkNoise,
    dpd_cfg: &DpdConfig,
) -> Result<LinkBudget> {
    dpd_cfg.validate()?;
    if sol.w_t.len() != h.n_t() || sol.w_r.len() != h.n_r() {
        return config("beamforming solution does not match the channel dimensions");
    }
    if model.coeff(1, 0).norm() == 0.0 {
        return Err(Error::NonInvertible("linear gain c(1,0) is zero".into()));
    }
    let limit = dpd::amplitude_limit(model, dpd_cfg);
    let samples = x.samples();
    let amp = symbol_power_w.sqrt();

    let raw_drive: Vec<Vec<Complex64>> = sol
        .w_t
        .iter()
        .map(|w| drive(*w, samples, symbol_power_w, limit))
        .collect();
    let raw_out: Vec<Vec<Complex64>> = raw_drive
        .iter()
        .map(|d| hpa::eval_slice(model, d))
        .collect();
    let raw_distortion: Vec<Vec<Complex64>> = raw_drive
        .iter()
        .map(|d| hpa::memory_distortion(model, d))
        .collect();

    let mut unreachable = vec![false; samples.len()];
    let mut dpd_out = Vec::with_capacity(h.n_t());
    let mut dpd_distortion = Vec::with_capacity(h.n_t());
    for m in &sol.mrt {
        let target: Vec<Complex64> = samples.iter().map(|s| s * (m * amp)).collect();
        let (pre, report) = dpd::invert_samples(model, &target, dpd_cfg, limit);
        unreachable
            .iter_mut()
            .zip(&report.converged)
            .for_each(|(u, ok)| *u |= !ok);
        dpd_out.push(hpa::eval_slice(model, &pre));
        dpd_distortion.push(hpa::memory_distortion(model, &pre));
    }

    let psi_dpd = combine(h, &sol.w_r, &dpd_out);
    let psi_raw = combine(h, &sol.w_r, &raw_out);

    // Ideal combined signal: w_rᴴ H mrt √P x = √P‖Hᴴw_r‖ x.
    let g_norm = vnorm(&h.adjoint_apply(&sol.w_r));
    let ideal: Vec<Complex64> = samples.iter().map(|s| s * (amp * g_norm)).collect();

    let n_bad = unreachable.iter().filter(|u| **u).count();
    let (bussgang_gain, saturation_floor_w) = if n_bad == 0 {
        (Complex64::new(1.0, 0.0), 0.0)
    } else {
        let effective: Vec<Complex64> = ideal
            .iter()
            .zip(&psi_dpd)
            .zip(&unreachable)
            .map(|((t, d), bad)| if *bad { *d } else { *t })
            .collect();
        let alpha = dot(&ideal, &effective) / dot(&ideal, &ideal).re;
        let floor = effective
            .iter()
            .zip(&ideal)
            .map(|(e, t)| (e - t * alpha).norm_sqr())
            .sum::<f64>()
            / ideal.len() as f64;
        (alpha, floor)
    };

    Ok(LinkBudget {
        symbol_power_w,
        lambda_max: sol.lambda_max,
        bussgang_gain,
        saturation_floor_w,
        distortion_without_dpd_w: mean_sq(&combine(h, &sol.w_r, &raw_distortion)),
        distortion_with_dpd_w: mean_sq(&combine(h, &sol.w_r, &dpd_distortion)),
        eh_input_without_dpd_w: mean_sq(&psi_raw) + noise.sigma_v_sq_w,
        eh_input_with_dpd_w: mean_sq(&psi_dpd) + noise.sigma_v_sq_w,
        noise,
        unachievable_fraction: n_bad as f64 / samples.len() as f64,
    })
}

/// Post-combining SNR and distortion power for one ζ setting.
#[allow(clippy::too_many_arguments)]
pub fn link_snr(
    h: &ChannelMatrix,
    sol: &BeamformingSolution,
    model: &MemoryPolynomial,
    x: &ComplexSignal,
    symbol_power_w: f64,
    noise: LinkNoise,
    zeta: Zeta,
    dpd_cfg: &DpdConfig,
) -> Result<(f64, f64)> {
    let budget = evaluate_link(h, sol, model, x, symbol_power_w, noise, dpd_cfg)?;
    Ok((budget.gamma(zeta), budget.distortion_w(zeta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{gen_ofdm_like, OfdmParams};
    use crate::units::dbm_to_w;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(h: &ChannelMatrix, e: &EigenPair) -> f64 {
        let gv = matvec(&h.gram(), &e.w_r);
        vnorm(
            &gv.iter()
                .zip(&e.w_r)
                .map(|(a, b)| a - b * e.lambda_max)
                .collect::<Vec<_>>(),
        )
    }

    /// Larger root of λ² − tr·λ + det for a 2×2 Hermitian matrix.
    fn closed_form_2x2(g: &[Complex64]) -> f64 {
        let (a, d) = (g[0].re, g[3].re);
        let b2 = g[1].norm_sqr();
        let tr = a + d;
        let disc = ((a - d) * (a - d) + 4.0 * b2).sqrt();
        0.5 * (tr + disc)
    }

    fn cubic() -> MemoryPolynomial {
        MemoryPolynomial::new(3, 0, vec![c(1.0, 0.0), c(0.0, 0.0), c(-0.1, 0.0)]).unwrap()
    }

    fn symbols(n_sym: usize, seed: u64) -> ComplexSignal {
        gen_ofdm_like(
            &OfdmParams {
                n_subcarriers: 16,
                n_symbols: n_sym,
                oversampling: 4,
                ..OfdmParams::default()
            },
            seed,
        )
        .unwrap()
    }

    fn noise() -> LinkNoise {
        LinkNoise::new(dbm_to_w(-70.0), dbm_to_w(-50.0)).unwrap()
    }

    #[test]
    fn pathloss_values() {
        assert_eq!(
            gen_channel(3, 2, 1.0, 2.6, 0).unwrap().pathloss_linear(),
            1.0
        );
        let pl = gen_channel(3, 2, 12.0, 2.6, 0).unwrap().pathloss_linear();
        assert!((pl - 1.563_611_155_695_154e-3).abs() < 1e-15, "{pl}");
    }

    #[test]
    fn channel_is_seeded() {
        assert_eq!(
            gen_channel(3, 2, 12.0, 2.6, 5).unwrap(),
            gen_channel(3, 2, 12.0, 2.6, 5).unwrap()
        );
        assert_ne!(
            gen_channel(3, 2, 12.0, 2.6, 5).unwrap(),
            gen_channel(3, 2, 12.0, 2.6, 6).unwrap()
        );
    }

    #[test]
    fn unit_mean_gain_power() {
        let mut acc = 0.0;
        let mut count = 0.0;
        for seed in 0..25_000u64 {
            let h = gen_channel(2, 2, 1.0, 2.0, seed).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    acc += h.gain(i, j).norm_sqr();
                    count += 1.0;
                }
            }
        }
        let mean = acc / count;
        assert!((mean - 1.0).abs() <= 0.02, "{mean}");
    }

    #[test]
    fn identity_channel_eigen() {
        let h = ChannelMatrix::from_rows(
            &[
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0)],
            ],
            1.0,
        )
        .unwrap();
        let e = principal_eig(&h).unwrap();
        assert!((e.lambda_max - 1.0).abs() < 1e-14);
        assert!(residual(&h, &e) <= 1e-12);
        assert!(e.degenerate);
    }

    #[test]
    fn diagonal_channel_eigen() {
        let h = ChannelMatrix::from_rows(
            &[
                vec![c(2.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0)],
            ],
            1.0,
        )
        .unwrap();
        let e = principal_eig(&h).unwrap();
        assert!((e.lambda_max - 4.0).abs() < 1e-12);
        assert!((e.w_r[0] - c(1.0, 0.0)).norm() < 1e-9 && e.w_r[1].norm() < 1e-9);
        assert!(!e.degenerate);
    }

    #[test]
    fn orthogonal_start_is_recovered() {
        // H Hᴴ = [[2,-1],[-1,2]]: dominant eigenvector ∝ (1,-1), orthogonal to ones.
        let s = 0.5f64.sqrt();
        let h = ChannelMatrix::from_rows(
            &[
                vec![c(s * 3f64.sqrt(), 0.0), c(s, 0.0)],
                vec![c(-s * 3f64.sqrt(), 0.0), c(s, 0.0)],
            ],
            1.0,
        )
        .unwrap();
        let g = h.gram();
        assert!((g[0].re - 2.0).abs() < 1e-12 && (g[1].re + 1.0).abs() < 1e-12);
        let e = principal_eig(&h).unwrap();
        assert!((e.lambda_max - 3.0).abs() < 1e-10, "{}", e.lambda_max);
    }

    #[test]
    fn random_channels_match_closed_form() {
        for seed in 0..1000u64 {
            let h = gen_channel(3, 2, 12.0, 2.6, seed).unwrap();
            let e = principal_eig(&h).unwrap();
            let oracle = closed_form_2x2(&h.gram());
            assert!(
                (e.lambda_max - oracle).abs() <= 1e-10 * oracle,
                "seed {seed}"
            );
            assert!(residual(&h, &e) <= 1e-8 * e.lambda_max);
            assert!((vnorm(&e.w_r) - 1.0).abs() <= 1e-12);
            assert!(e.w_r[0].im == 0.0 && e.w_r[0].re > 0.0);
        }
    }

    #[test]
    fn single_receive_antenna() {
        let h = ChannelMatrix::from_rows(&[vec![c(1.0, 1.0), c(0.0, 2.0)]], 1.0).unwrap();
        let e = principal_eig(&h).unwrap();
        assert!((e.lambda_max - 6.0).abs() < 1e-12);
        assert_eq!(e.w_r, vec![c(1.0, 0.0)]);
    }

    #[test]
    fn linear_hpa_weights_are_scaled_mrt() {
        let g = c(2.0, -0.5);
        let model = MemoryPolynomial::linear(g);
        let h = gen_channel(3, 2, 12.0, 2.6, 3).unwrap();
        let e = principal_eig(&h).unwrap();
        let sol = hpa_aware_weights(
            &h,
            &e.w_r,
            &model,
            0.025,
            &symbols(4, 1),
            &DpdConfig::default(),
        )
        .unwrap();
        for ((w, m), d) in sol.w_t.iter().zip(&sol.mrt).zip(&sol.delta_vec) {
            assert!((w - m / g).norm() <= 1e-15);
            assert!((w * d - m).norm() <= 1e-15);
        }
    }

    #[test]
    fn identity_channel_linear_signal_term() {
        let h = ChannelMatrix::from_rows(
            &[
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0)],
            ],
            1.0,
        )
        .unwrap();
        let e = principal_eig(&h).unwrap();
        let model = MemoryPolynomial::identity();
        let x = symbols(2, 4);
        let p = 0.3;
        let sol = hpa_aware_weights(&h, &e.w_r, &model, p, &x, &DpdConfig::default()).unwrap();
        let per_antenna: Vec<Vec<Complex64>> = sol
            .w_t
            .iter()
            .map(|w| x.samples().iter().map(|s| s * w * p.sqrt()).collect())
            .collect();
        let psi = combine(&h, &sol.w_r, &per_antenna);
        let ratio = psi[5] / (x.samples()[5] * p.sqrt());
        assert!((ratio.norm() - 1.0).abs() < 1e-12);
        for (a, s) in psi.iter().zip(x.samples()) {
            assert!((a - s * p.sqrt() * ratio).norm() < 1e-12);
        }
    }

    #[test]
    fn cubic_weights_reproduce_mrt_direction() {
        let model = cubic();
        let h = gen_channel(3, 2, 1.0, 2.6, 8).unwrap();
        let e = principal_eig(&h).unwrap();
        let sol = hpa_aware_weights(
            &h,
            &e.w_r,
            &model,
            0.5,
            &symbols(4, 2),
            &DpdConfig::default(),
        )
        .unwrap();
        let eff: Vec<Complex64> = sol
            .w_t
            .iter()
            .zip(&sol.delta_vec)
            .map(|(w, d)| w * d)
            .collect();
        let scale = vnorm(&eff);
        for (a, m) in eff.iter().zip(&sol.mrt) {
            assert!((a / scale - m).norm() <= 1e-6);
        }
        assert!(sol.iterations > 1);
    }

    #[test]
    fn vanishing_gain_is_rejected() {
        // Δ(a) = 1 − a²: zero average near a = 1.
        let model =
            MemoryPolynomial::new(3, 0, vec![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let h = ChannelMatrix::from_rows(&[vec![c(1.0, 0.0)]], 1.0).unwrap();
        let x = ComplexSignal::new(vec![c(1.0, 0.0); 8], 1.0).unwrap();
        let cfg = DpdConfig {
            saturation_guard: 10.0,
            ..DpdConfig::default()
        };
        assert!(matches!(
            hpa_aware_weights(&h, &[c(1.0, 0.0)], &model, 1.0, &x, &cfg),
            Err(Error::NonInvertible(_))
        ));
    }

    #[test]
    fn distortion_free_gamma_is_classical() {
        let model = MemoryPolynomial::linear(c(1.5, 0.2));
        let h = gen_channel(3, 2, 12.0, 2.6, 9).unwrap();
        let e = principal_eig(&h).unwrap();
        let p = dbm_to_w(14.0);
        let x = symbols(4, 3);
        let sol = hpa_aware_weights(&h, &e.w_r, &model, p, &x, &DpdConfig::default()).unwrap();
        for zeta in [Zeta::WithDpd, Zeta::WithoutDpd] {
            let (gamma, d) = link_snr(
                &h,
                &sol,
                &model,
                &x,
                p,
                noise(),
                zeta,
                &DpdConfig::default(),
            )
            .unwrap();
            assert_eq!(d, 0.0);
            assert_eq!(gamma, p * sol.lambda_max / noise().sigma_v_sq_w);
        }
    }

    #[test]
    fn memoryless_gamma_ignores_zeta() {
        let model = cubic();
        let h = gen_channel(3, 2, 1.0, 2.6, 10).unwrap();
        let e = principal_eig(&h).unwrap();
        let x = symbols(4, 5);
        let sol = hpa_aware_weights(&h, &e.w_r, &model, 1.0, &x, &DpdConfig::default()).unwrap();
        let b = evaluate_link(&h, &sol, &model, &x, 1.0, noise(), &DpdConfig::default()).unwrap();
        assert!(b.unachievable_fraction > 0.0);
        assert_eq!(b.gamma(Zeta::WithDpd), b.gamma(Zeta::WithoutDpd));
    }

    #[test]
    fn distortion_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut coeffs = vec![c(1.0, 0.0)];
        for _ in 1..9 {
            coeffs.push(c(
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
            ));
        }
        let model = MemoryPolynomial::new(3, 2, coeffs).unwrap();
        let h = gen_channel(3, 2, 12.0, 2.6, 11).unwrap();
        let e = principal_eig(&h).unwrap();
        let x = gen_ofdm_like(
            &OfdmParams {
                n_subcarriers: 25,
                n_symbols: 100,
                oversampling: 4,
                ..OfdmParams::default()
            },
            6,
        )
        .unwrap();
        assert_eq!(x.len(), 10_000);
        let p = 0.02;
        let cfg = DpdConfig {
            saturation_guard: 1e6,
            ..DpdConfig::default()
        };
        let sol = hpa_aware_weights(&h, &e.w_r, &model, p, &x, &cfg).unwrap();
        let (_, d) = link_snr(&h, &sol, &model, &x, p, noise(), Zeta::WithoutDpd, &cfg).unwrap();

        let xs = x.samples();
        let mut acc = 0.0;
        for n in 0..xs.len() {
            let mut psi = c(0.0, 0.0);
            for i in 0..2 {
                for j in 0..3 {
                    let mut delta = c(0.0, 0.0);
                    for pp in 1..=3 {
                        for m in 1..=2 {
                            if n >= m {
                                let v = xs[n - m] * sol.w_t[j] * p.sqrt();
                                delta += model.coeff(pp, m) * v * v.norm().powi(pp as i32 - 1);
                            }
                        }
                    }
                    psi += sol.w_r[i].conj() * h.entry(i, j) * delta;
                }
            }
            acc += psi.norm_sqr();
        }
        let brute = acc / xs.len() as f64;
        assert!((d - brute).abs() <= 1e-10 * brute, "{d} vs {brute}");
    }

    #[test]
    fn json_export_shape() {
        let h = gen_channel(3, 2, 12.0, 2.6, 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&h.to_json()).unwrap();
        assert_eq!(v["h"].as_array().unwrap().len(), 2);
        assert_eq!(v["h"][0].as_array().unwrap().len(), 3);
        assert_eq!(v["h"][1][2][0].as_f64().unwrap(), h.gain(1, 2).re);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn eigen_invariants(seed in any::<u64>(), alpha in 0.01f64..100.0, n_r in 1usize..=4, n_t in 1usize..=4) {
            let h = gen_channel(n_t, n_r, 12.0, 2.6, seed).unwrap();
            let e = principal_eig(&h).unwrap();
            prop_assert!(residual(&h, &e) <= 1e-8 * e.lambda_max);
            let scaled = principal_eig(&h.scaled(alpha)).unwrap();
            prop_assert!((scaled.lambda_max - alpha * alpha * e.lambda_max).abs() <= 1e-9 * scaled.lambda_max);
            if !e.degenerate && e.eigengap > 1e-6 * e.lambda_max {
                let overlap = dot(&e.w_r, &scaled.w_r).norm();
                prop_assert!((overlap - 1.0).abs() <= 1e-8);
            }
        }
    }
}
