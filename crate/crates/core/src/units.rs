//! Power unit conversions.

/// dBm to watts.
pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Watts to dBm.
pub fn w_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// Power ratio to dB.
pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        assert!((dbm_to_w(0.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_w(14.0) - 0.025_118_864_315_095_8).abs() < 1e-15);
        assert!((w_to_dbm(dbm_to_w(-70.0)) + 70.0).abs() < 1e-9);
    }
}
