//! Piecewise-linear energy harvester and rate-energy regions of
//! time-switching and power-splitting receivers.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::mimo::{BeamformingSolution, ChannelMatrix, LinkBudget, Zeta};
use crate::units::dbm_to_w;

/// Harvester with sensitivity `p_h_l_w`, saturation `p_h_u_w` and
/// conversion efficiency `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EhModel {
    pub p_h_l_w: f64,
    pub p_h_u_w: f64,
    pub eta: f64,
}

impl EhModel {
    pub fn new(p_h_l_w: f64, p_h_u_w: f64, eta: f64) -> Result<Self> {
        if !(p_h_l_w >= 0.0 && p_h_u_w > 0.0 && p_h_l_w < p_h_u_w) {
            return config(format!(
                "harvester thresholds need 0 <= lower < upper, got {p_h_l_w} and {p_h_u_w}"
            ));
        }
        if !(0.0..=1.0).contains(&eta) {
            return config(format!("efficiency must lie in [0, 1], got {eta}"));
        }
        Ok(Self {
            p_h_l_w,
            p_h_u_w,
            eta,
        })
    }
}

impl Default for EhModel {
    /// −10 dBm sensitivity, 2 dBm saturation, 24 % efficiency.
    fn default() -> Self {
        Self::new(dbm_to_w(-10.0), dbm_to_w(2.0), 0.24).expect("default harvester is valid")
    }
}

/// Harvested power for input power `xi_w`: zero below the sensitivity,
/// η·ξ between the knees (inclusive), η·p_h_u above.
pub fn harvest(eh: &EhModel, xi_w: f64) -> f64 {
    if xi_w < eh.p_h_l_w {
        0.0
    } else if xi_w <= eh.p_h_u_w {
        eh.eta * xi_w
    } else {
        eh.eta * eh.p_h_u_w
    }
}

/// P_t·Λ_max·‖w_r‖² + D + σ_v²·‖w_r‖²: combined-signal power seen by the
/// harvester for a given distortion power.
pub fn eh_input_power(
    h: &ChannelMatrix,
    sol: &BeamformingSolution,
    symbol_power_w: f64,
    distortion_power_w: f64,
    sigma_v_sq: f64,
) -> Result<f64> {
    if symbol_power_w < 0.0 || distortion_power_w < 0.0 || sigma_v_sq < 0.0 {
        return config("powers must be non-negative");
    }
    if sol.w_r.len() != h.n_r() {
        return config("combiner does not match the channel");
    }
    let wr_sq: f64 = sol.w_r.iter().map(|w| w.norm_sqr()).sum();
    Ok(symbol_power_w * sol.lambda_max * wr_sq + distortion_power_w + sigma_v_sq * wr_sq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Architecture {
    #[serde(rename = "TS")]
    TimeSwitching,
    #[serde(rename = "PS")]
    PowerSplitting,
}

impl Architecture {
    pub fn label(self) -> &'static str {
        match self {
            Architecture::TimeSwitching => "TS",
            Architecture::PowerSplitting => "PS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RePoint {
    /// τ for time switching, ρ for power splitting.
    pub split: f64,
    pub rate_bps_hz: f64,
    pub energy_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReRegion {
    pub architecture: Architecture,
    pub zeta: Zeta,
    /// Ascending split.
    pub points: Vec<RePoint>,
    /// Trapezoidal area under the energy-versus-rate frontier.
    pub area: f64,
}

impl ReRegion {
    /// Point at split = 0 (information decoding only).
    pub fn id_endpoint(&self) -> &RePoint {
        &self.points[0]
    }

    /// Point at split = 1 (harvesting only).
    pub fn eh_endpoint(&self) -> &RePoint {
        self.points.last().expect("region has points")
    }

    /// `split,rate_bps_hz,energy_w` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "split,rate_bps_hz,energy_w")?;
        for p in &self.points {
            writeln!(out, "{},{},{}", p.split, p.rate_bps_hz, p.energy_w)?;
        }
        Ok(())
    }
}

/// Fixed-order mean.
fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Rate at split 0: log2(1 + S / (ζD + C + σ_v² + σ_a²)).
pub fn id_rate(budget: &LinkBudget, zeta: Zeta) -> f64 {
    (1.0 + budget.signal_power_w() / (budget.impairment_w(zeta) + budget.noise.sigma_a_sq_w)).log2()
}

fn ps_rate(budget: &LinkBudget, zeta: Zeta, rho: f64) -> f64 {
    let keep = 1.0 - rho;
    (1.0 + keep * budget.signal_power_w()
        / (keep * budget.impairment_w(zeta) + budget.noise.sigma_a_sq_w))
        .log2()
}

/// Ergodic rate-energy frontier: rate and harvested energy are averaged
/// over the channel budgets at each of `grid_points` uniform split values.
pub fn re_region(
    arch: Architecture,
    zeta: Zeta,
    grid_points: usize,
    budgets: &[LinkBudget],
    eh: &EhModel,
) -> Result<ReRegion> {
    if grid_points < 2 {
        return config("rate-energy grid needs at least 2 points");
    }
    if budgets.is_empty() {
        return config("rate-energy region needs at least one channel");
    }
    let mean_energy = mean(budgets.iter().map(|b| harvest(eh, b.eh_input_w(zeta))));
    let mean_id_rate = mean(budgets.iter().map(|b| id_rate(b, zeta)));
    let points: Vec<RePoint> = (0..grid_points)
        .map(|k| {
            let split = if k + 1 == grid_points {
                1.0
            } else {
                k as f64 / (grid_points - 1) as f64
            };
            let rate_bps_hz = match arch {
                Architecture::TimeSwitching => (1.0 - split) * mean_id_rate,
                Architecture::PowerSplitting => {
                    mean(budgets.iter().map(|b| ps_rate(b, zeta, split)))
                }
            };
            RePoint {
                split,
                rate_bps_hz,
                energy_w: split * mean_energy,
            }
        })
        .collect();
    let area = points
        .windows(2)
        .map(|w| (w[0].rate_bps_hz - w[1].rate_bps_hz) * 0.5 * (w[0].energy_w + w[1].energy_w))
        .sum::<f64>()
        .max(0.0);
    Ok(ReRegion {
        architecture: arch,
        zeta,
        points,
        area,
    })
}

/// (area(with) − area(without)) / area(without).
pub fn region_gain(with_dpd: &ReRegion, without_dpd: &ReRegion) -> Result<f64> {
    check_comparable(with_dpd, without_dpd)?;
    relative_gain(with_dpd.area, without_dpd.area, "region area")
}

fn check_comparable(a: &ReRegion, b: &ReRegion) -> Result<()> {
    if a.architecture != b.architecture {
        return config("regions use different architectures");
    }
    if a.points.len() != b.points.len()
        || a.points
            .iter()
            .zip(&b.points)
            .any(|(p, q)| p.split != q.split)
    {
        return config("regions use different split grids");
    }
    Ok(())
}

fn relative_gain(with: f64, without: f64, what: &str) -> Result<f64> {
    if !(without > 0.0) {
        return Err(Error::UndefinedStatistic(format!(
            "{what} baseline is zero"
        )));
    }
    Ok((with - without) / without)
}

/// Area gain with the two endpoint gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionComparison {
    pub area_gain: f64,
    /// Energy gain at split = 1.
    pub eh_endpoint_gain: f64,
    /// Rate gain at split = 0.
    pub id_endpoint_gain: f64,
}

pub fn compare_regions(with_dpd: &ReRegion, without_dpd: &ReRegion) -> Result<RegionComparison> {
    Ok(RegionComparison {
        area_gain: region_gain(with_dpd, without_dpd)?,
        eh_endpoint_gain: relative_gain(
            with_dpd.eh_endpoint().energy_w,
            without_dpd.eh_endpoint().energy_w,
            "harvested energy",
        )?,
        id_endpoint_gain: relative_gain(
            with_dpd.id_endpoint().rate_bps_hz,
            without_dpd.id_endpoint().rate_bps_hz,
            "rate",
        )?,
    })
}
