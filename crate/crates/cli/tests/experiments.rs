use swipt_sim::config::{AmplifierKind, ExperimentConfig, WaveformKind};
use swipt_sim::experiments::{run_ccdf, run_fit, run_psd, run_rate_sweep};

fn small_link(mut cfg: ExperimentConfig) -> ExperimentConfig {
    cfg.rate_sweep.n_channels = 8;
    cfg.link.n_symbols = 2;
    cfg
}

#[test]
fn identity_amplifier_fits_exactly_at_first_order() {
    let mut cfg = ExperimentConfig::default();
    cfg.amplifier.kind = AmplifierKind::Identity;
    cfg.amplifier.order_p = 1;
    cfg.amplifier.memory_m = 0;
    cfg.fit.sweep_orders = vec![1];
    cfg.fit.sweep_memory = vec![0];
    let r = run_fit(&cfg).unwrap();
    assert!(r.held_out_nmse_db <= -200.0, "{}", r.held_out_nmse_db);
    assert!(r.table[0].nmse_db <= -200.0);
}

#[test]
fn fit_sweep_covers_grid_and_improves_with_order() {
    let r = run_fit(&ExperimentConfig::default()).unwrap();
    assert_eq!(r.table.len(), 16);
    let at = |p, m| {
        r.table
            .iter()
            .find(|row| row.order_p == p && row.memory_m == m)
            .unwrap()
            .nmse_db
    };
    assert!(at(7, 3) < at(3, 3) && at(3, 3) < at(1, 3));
    // The chosen orders sit within 0.5 dB of the best table entry.
    assert!(at(7, 3) - r.best().nmse_db <= 0.5, "best {:?}", r.best());
}

#[test]
fn linear_amplifier_leaves_spectra_unchanged() {
    let mut cfg = ExperimentConfig::default();
    cfg.amplifier.kind = AmplifierKind::Identity;
    let r = run_psd(&cfg).unwrap();
    assert!(
        r.max_spectrum_spread_db() <= 0.2,
        "{}",
        r.max_spectrum_spread_db()
    );
}

#[test]
fn amplifier_regrows_adjacent_band_power() {
    let r = run_psd(&ExperimentConfig::default()).unwrap();
    assert!(r.acpr_hpa.adjacent_power > r.acpr_input.adjacent_power);
    assert!(r.acpr_improvement_db() >= 10.0);
}

#[test]
fn constant_envelope_ccdfs_step_at_zero_db() {
    let mut cfg = ExperimentConfig::default();
    cfg.waveform.kind = WaveformKind::Multisine;
    cfg.waveform.n_tones = 1;
    cfg.waveform.n_samples = 8192;
    cfg.ccdf.threshold_min_db = -1.0;
    cfg.ccdf.threshold_max_db = 1.0;
    let r = run_ccdf(&cfg).unwrap();
    for curve in [&r.input, &r.hpa, &r.dpd_hpa] {
        for (t, p) in r.thresholds_db.iter().zip(curve) {
            if *t < -0.05 {
                assert_eq!(*p, 1.0, "threshold {t}");
            } else if *t > 0.05 {
                assert_eq!(*p, 0.0, "threshold {t}");
            }
        }
    }
}

#[test]
fn linear_region_rate_gap_is_negligible() {
    let mut cfg = small_link(ExperimentConfig::default());
    cfg.rate_sweep.tx_power_min_dbm = -10.0;
    cfg.rate_sweep.tx_power_max_dbm = -10.0;
    let r = run_rate_sweep(&cfg).unwrap();
    let gap = r.rows[0].relative_gap;
    assert!(gap.abs() <= 0.005, "gap {gap}");
}

#[test]
fn memoryless_plant_gives_no_rate_gap_below_saturation() {
    let mut cfg = small_link(ExperimentConfig::default());
    cfg.amplifier.memory_m = 0;
    cfg.rate_sweep.tx_power_min_dbm = 0.0;
    cfg.rate_sweep.tx_power_max_dbm = 0.0;
    let r = run_rate_sweep(&cfg).unwrap();
    assert_eq!(r.rows[0].unachievable_fraction, 0.0);
    assert!(
        r.rows[0].relative_gap.abs() <= 1e-12,
        "{}",
        r.rows[0].relative_gap
    );
}

#[test]
fn inline_linear_model_leaves_spectra_unchanged() {
    let cfg = ExperimentConfig::from_toml(
        "[amplifier]\nkind = \"mpm\"\norder_p = 1\nmemory_m = 0\ncoeffs = [[0.5, 0.5]]\n",
    )
    .unwrap();
    let r = run_psd(&cfg).unwrap();
    assert!(
        r.max_spectrum_spread_db() <= 0.2,
        "{}",
        r.max_spectrum_spread_db()
    );
}
