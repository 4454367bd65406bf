//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use swipt_core::dpd::{dpd_invert, linearization_error, DpdConfig};
use swipt_core::hpa::{
    decompose, eval_mpm, fit_mpm, input_distortion_correlation, MemoryPolynomial,
};
use swipt_core::mimo::{
    evaluate_link, gen_channel, hpa_aware_weights, principal_eig, LinkBudget, LinkNoise, Zeta,
};
use swipt_core::signal::{gen_ofdm_like, ComplexSignal, OfdmParams};
use swipt_core::swipt::{harvest, id_rate, re_region, Architecture, EhModel};
use swipt_core::units::dbm_to_w;
use swipt_core::Complex64;
use swipt_sim::config::ExperimentConfig;
use swipt_sim::experiments::{
    correlation_inputs, run_ccdf, run_psd, run_rate_sweep, run_re_region,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gaussian(n: usize, seed: u64) -> ComplexSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            c(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    ComplexSignal::new(v, 1.0).unwrap()
}

fn random_model(p: usize, m: usize, rng: &mut ChaCha8Rng) -> MemoryPolynomial {
    let coeffs = (0..p * (m + 1))
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    MemoryPolynomial::new(p, m, coeffs).unwrap()
}

/// Unit linear gain plus small random higher-order and memory terms.
fn weak_model(p: usize, m: usize, rng: &mut ChaCha8Rng) -> MemoryPolynomial {
    let coeffs = (0..p * (m + 1))
        .map(|k| {
            if k == 0 {
                c(1.0, 0.0)
            } else {
                let scale = if k % (m + 1) == 0 { 0.1 } else { 0.03 };
                c(
                    rng.random_range(-scale..scale),
                    rng.random_range(-scale..scale),
                )
            }
        })
        .collect();
    MemoryPolynomial::new(p, m, coeffs).unwrap()
}

fn mpm_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let model = random_model(5, 2, &mut rng);
    let x = gaussian(4096, 102);
    let y = eval_mpm(&model, &x).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let fit = fit_mpm(&x, &y, 5, 2).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let err = fit
        .coeffs()
        .iter()
        .zip(model.coeffs())
        .map(|(a, b)| (a - b).norm() / b.norm())
        .fold(0.0, f64::max);
    check(
        err <= 1e-8 && secs <= 1.0,
        format!("max relative coefficient error {err:.2e}, fit time {secs:.3} s"),
    )
}

fn decomposition_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let p = rng.random_range(1..=7);
        let m = rng.random_range(0..=3);
        let model = random_model(p, m, &mut rng);
        let x = gaussian(rng.random_range(8..512), 2000 + trial);
        let y = eval_mpm(&model, &x).unwrap();
        let d = decompose(&model, &x).unwrap();
        let r = d.recompose(x.samples());
        let num: f64 = r
            .iter()
            .zip(y.samples())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = y.samples().iter().map(|b| b.norm_sqr()).sum();
        worst = worst.max((num / den).sqrt());
    }
    check(
        worst <= 1e-12,
        format!("worst relative recomposition error {worst:.2e} over 100 models"),
    )
}

fn cubic_root_by_bisection(target: f64) -> f64 {
    let f = |r: f64| r - 0.1 * r * r * r - target;
    let (mut lo, mut hi) = (0.0f64, (1.0f64 / 0.3).sqrt());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn dpd_fixed_point() -> Outcome {
    let cubic = MemoryPolynomial::new(3, 0, vec![c(1.0, 0.0), c(0.0, 0.0), c(-0.1, 0.0)]).unwrap();
    let cfg = DpdConfig::default();
    let target = ComplexSignal::new(vec![c(0.5, 0.0)], 1.0).unwrap();
    let (x, _) = dpd_invert(&cubic, &target, &cfg).map_err(|e| e.to_string())?;
    let root = cubic_root_by_bisection(0.5);
    let root_err = (x.samples()[0] - c(root, 0.0)).norm();

    let a_sat = (1.0f64 / 0.3).sqrt();
    let peak_out = a_sat - 0.1 * a_sat.powi(3);
    let ofdm = gen_ofdm_like(&OfdmParams::default(), 303).unwrap();
    let peak_in = ofdm.samples().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let drive = ofdm.scaled(peak_out * 10f64.powf(-6.0 / 20.0) / peak_in);
    let (pre, _) = dpd_invert(&cubic, &drive, &cfg).map_err(|e| e.to_string())?;
    let nmse = linearization_error(&cubic, &drive, &pre).map_err(|e| e.to_string())?;
    check(
        root_err <= 1e-6 && nmse <= -50.0,
        format!(
            "x_dpd = {:.7} (bisection {root:.7}), cascade NMSE {nmse:.1} dB",
            x.samples()[0].re
        ),
    )
}

fn eigen_beamforming() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..1000 {
        let h = gen_channel(3, 2, 1.0, 2.6, 4000 + seed).unwrap();
        let g = h.gram();
        let (a, d, b2) = (g[0].re, g[3].re, g[1].norm_sqr());
        let closed = 0.5 * (a + d + ((a - d) * (a - d) + 4.0 * b2).sqrt());
        let eig = principal_eig(&h).map_err(|e| e.to_string())?;
        worst = worst.max((eig.lambda_max - closed).abs() / closed);
    }
    let h = gen_channel(3, 2, 12.0, 2.6, 5).unwrap();
    let eig = principal_eig(&h).unwrap();
    let noise = LinkNoise::new(dbm_to_w(-70.0), dbm_to_w(-50.0)).unwrap();
    let p = dbm_to_w(14.0);
    let x = gen_ofdm_like(
        &OfdmParams {
            n_symbols: 2,
            ..OfdmParams::default()
        },
        6,
    )
    .unwrap();
    let linear = MemoryPolynomial::identity();
    let cfg = DpdConfig::default();
    let sol = hpa_aware_weights(&h, &eig.w_r, &linear, p, &x, &cfg).unwrap();
    let b = evaluate_link(&h, &sol, &linear, &x, p, noise, &cfg).unwrap();
    let classical = p / noise.sigma_v_sq_w * eig.lambda_max;
    let gamma_err = [Zeta::WithDpd, Zeta::WithoutDpd]
        .iter()
        .map(|z| (b.gamma(*z) - classical).abs() / classical)
        .fold(0.0, f64::max);
    check(
        worst <= 1e-10 && gamma_err <= 1e-12,
        format!("worst eigenvalue error {worst:.2e} over 1000 channels, distortion-free gamma error {gamma_err:.2e}"),
    )
}

fn correlation_dichotomy() -> Outcome {
    let model = ExperimentConfig::default().correlation.model().unwrap();
    if model.coeff(1, 1) != c(0.3, 0.0) {
        return Err("probe model must have c(1,1) = 0.3".into());
    }
    let (white, coloured) = correlation_inputs(100_000, &[1.0, 0.8, 0.5, 0.2], 505).unwrap();
    let zi = input_distortion_correlation(&model, &white)
        .unwrap()
        .z_score();
    let zc = input_distortion_correlation(&model, &coloured)
        .unwrap()
        .z_score();
    check(
        zi <= 3.0 && zc >= 10.0,
        format!("i.i.d. {zi:.2} standard errors, coloured {zc:.1} standard errors"),
    )
}

fn harvester() -> Outcome {
    let eh = EhModel::default();
    let got = [
        harvest(&eh, dbm_to_w(-20.0)),
        harvest(&eh, dbm_to_w(0.0)),
        harvest(&eh, dbm_to_w(10.0)),
    ];
    let oracle = [0.0, 0.24 * 1e-3, 0.24 * 10f64.powf(0.2) * 1e-3];
    let exact = got[0] == 0.0
        && (got[1] - oracle[1]).abs() <= 1e-15
        && (got[2] - oracle[2]).abs() <= 1e-15
        && (got[2] - 3.803e-4).abs() / 3.803e-4 <= 1e-3;
    check(
        exact,
        format!("{:.4e} W, {:.4e} W, {:.4e} W", got[0], got[1], got[2]),
    )
}

fn acpr_improvement(cfg: &ExperimentConfig) -> Outcome {
    let r = run_psd(cfg).map_err(|e| e.to_string())?;
    let gain = r.acpr_improvement_db();
    check(
        gain >= 10.0,
        format!(
            "ACPR {:.1} dBc without DPD, {:.1} dBc with DPD, improvement {gain:.1} dB",
            r.acpr_hpa.acpr_dbc, r.acpr_dpd_hpa.acpr_dbc
        ),
    )
}

fn papr_gap(cfg: &ExperimentConfig) -> Outcome {
    let r = run_ccdf(cfg).map_err(|e| e.to_string())?;
    let gap = r.clipping_gap_db();
    let dev = r.dpd_deviation_db();
    check(
        (1.0..=5.0).contains(&gap) && dev <= 0.5,
        format!(
            "clipping gap {gap:.2} dB, DPD deviation {dev:.3} dB at CCDF {}",
            r.probability
        ),
    )
}

fn rate_merge(cfg: &ExperimentConfig) -> Outcome {
    let r = run_rate_sweep(cfg).map_err(|e| e.to_string())?;
    let last = r.rows.last().unwrap();
    let peak = r.max_gap();
    check(
        last.relative_gap.abs() <= 0.01 && peak.relative_gap > 0.0 && peak.relative_gap <= 0.08,
        format!(
            "gap {:.3}% at {} dBm, peak gap {:.2}% at {} dBm",
            100.0 * last.relative_gap,
            last.tx_power_dbm,
            100.0 * peak.relative_gap,
            peak.tx_power_dbm
        ),
    )
}

fn region_gain(cfg: &ExperimentConfig) -> Outcome {
    let r = run_re_region(cfg).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for arch in [Architecture::TimeSwitching, Architecture::PowerSplitting] {
        let g = r.comparison(arch);
        ok &= (0.10..=0.40).contains(&g.area_gain) && g.eh_endpoint_gain > g.id_endpoint_gain;
        parts.push(format!(
            "{} area {:.1}% (EH {:.1}%, ID {:.2}%)",
            arch.label(),
            100.0 * g.area_gain,
            100.0 * g.eh_endpoint_gain,
            100.0 * g.id_endpoint_gain
        ));
    }
    check(ok, parts.join(", "))
}

fn random_budget(rng: &mut ChaCha8Rng, memory_m: usize, idx: u64) -> LinkBudget {
    let p = rng.random_range(1..=5);
    let model = weak_model(p, memory_m, rng);
    let n_t = rng.random_range(1..=4);
    let n_r = rng.random_range(1..=3);
    let h = gen_channel(n_t, n_r, rng.random_range(1.0..20.0), 2.6, 7000 + idx).unwrap();
    let x = gen_ofdm_like(
        &OfdmParams {
            n_symbols: 1,
            ..OfdmParams::default()
        },
        8000 + idx,
    )
    .unwrap();
    let power = dbm_to_w(rng.random_range(-10.0..30.0));
    let noise = LinkNoise::new(
        dbm_to_w(rng.random_range(-90.0..-60.0)),
        dbm_to_w(rng.random_range(-70.0..-40.0)),
    )
    .unwrap();
    let cfg = DpdConfig::default();
    let eig = principal_eig(&h).unwrap();
    let sol = hpa_aware_weights(&h, &eig.w_r, &model, power, &x, &cfg).unwrap();
    evaluate_link(&h, &sol, &model, &x, power, noise, &cfg).unwrap()
}

fn structural_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let eh = EhModel::default();
    let grid = 21;
    let mut violations = Vec::new();
    let configs = 120;
    for k in 0..configs {
        let memory_m = rng.random_range(1..=3);
        let budgets = [random_budget(&mut rng, memory_m, k)];
        for zeta in [Zeta::WithDpd, Zeta::WithoutDpd] {
            let ts = re_region(Architecture::TimeSwitching, zeta, grid, &budgets, &eh).unwrap();
            let r0 = ts.id_endpoint().rate_bps_hz;
            let e1 = ts.eh_endpoint().energy_w;
            for pt in &ts.points {
                let rate_line = (1.0 - pt.split) * r0;
                let energy_line = pt.split * e1;
                if (pt.rate_bps_hz - rate_line).abs() > 1e-12 * r0.max(1.0)
                    || (pt.energy_w - energy_line).abs() > 1e-12 * e1.max(1e-300)
                {
                    violations.push(format!("config {k}: TS not affine at {}", pt.split));
                }
            }
            let ps = re_region(Architecture::PowerSplitting, zeta, grid, &budgets, &eh).unwrap();
            for w in ps.points.windows(2) {
                if w[1].rate_bps_hz > w[0].rate_bps_hz || w[1].energy_w < w[0].energy_w {
                    violations.push(format!("config {k}: PS not monotone at {}", w[1].split));
                }
            }
        }
        let b = &budgets[0];
        if id_rate(b, Zeta::WithDpd) < id_rate(b, Zeta::WithoutDpd) {
            violations.push(format!("config {k}: rate with DPD below rate without"));
        }
        let memoryless = random_budget(&mut rng, 0, 10_000 + k);
        if memoryless.gamma(Zeta::WithDpd) != memoryless.gamma(Zeta::WithoutDpd) {
            violations.push(format!("config {k}: memoryless gamma depends on zeta"));
        }
    }
    let detail = format!(
        "{configs} random configurations, {} violations",
        violations.len()
    );
    match violations.first() {
        None => Ok(detail),
        Some(first) => Err(format!("{detail}; first: {first}")),
    }
}

fn main() {
    let defaults = ExperimentConfig::default();
    let criteria: Vec<Criterion> = vec![
        ("MPM recovery", Box::new(mpm_recovery)),
        ("decomposition identity", Box::new(decomposition_identity)),
        ("DPD fixed point", Box::new(dpd_fixed_point)),
        ("eigen-beamforming", Box::new(eigen_beamforming)),
        ("correlation dichotomy", Box::new(correlation_dichotomy)),
        ("harvester branches", Box::new(harvester)),
        ("ACPR improvement", Box::new(|| acpr_improvement(&defaults))),
        ("PAPR clipping gap", Box::new(|| papr_gap(&defaults))),
        (
            "rate merge at saturation",
            Box::new(|| rate_merge(&defaults)),
        ),
        ("RE-region gain", Box::new(|| region_gain(&defaults))),
        ("structural invariants", Box::new(structural_invariants)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
