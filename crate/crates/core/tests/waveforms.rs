use swipt_core::hpa::{eval_reference, ReferenceAmplifier};
use swipt_core::signal::{acpr_db, gen_ofdm_like, papr_db, psd_welch, OfdmParams};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn papr_grows_with_subcarrier_count() {
    let papr_at = |n_subcarriers: usize| {
        let params = OfdmParams {
            n_subcarriers,
            n_symbols: 4,
            ..OfdmParams::default()
        };
        median(
            (0..100)
                .map(|seed| papr_db(&gen_ofdm_like(&params, seed).unwrap()).unwrap())
                .collect(),
        )
    };
    let (p64, p256) = (papr_at(64), papr_at(256));
    assert!(p256 >= p64, "median PAPR 64: {p64} dB, 256: {p256} dB");
}

#[test]
fn reference_amplifier_regrowth_at_3db_backoff() {
    let params = OfdmParams::default();
    let amp = ReferenceAmplifier::default();
    let rms = amp.saturation_amplitude() * 10f64.powf(-3.0 / 20.0);
    let x = gen_ofdm_like(&params, 5).unwrap().scaled(rms);
    let y = eval_reference(&amp, &x);
    let bw = params.occupied_bandwidth_hz();
    let main = (-bw / 2.0, bw / 2.0);
    let adjacent = (0.55 * bw, 1.5 * bw);
    let acpr = |s| acpr_db(&psd_welch(s, 1024, 0.5).unwrap(), main, adjacent).unwrap();
    let (a_in, a_out) = (acpr(&x), acpr(&y));
    assert!(a_in - a_out >= 10.0, "input {a_in} dBc, output {a_out} dBc");
}
