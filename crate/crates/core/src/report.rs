//! Deterministic number formatting for reports.

/// Rounds to 12 significant digits so that reports are stable across runs.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// `round_sig` printed in plain decimal notation.
pub fn fmt_sig(x: f64) -> String {
    format!("{}", round_sig(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 7.0), 0.142857142857);
        assert_eq!(round_sig(-1234567.891234567), -1234567.89123);
        assert_eq!(fmt_sig(2.0), "2");
        assert!(round_sig(f64::NAN).is_nan());
    }
}
