//! Locale-independent numeric formatting for tabular output.

/// Formats `x` with 17 significant digits in scientific notation, the
/// shortest fixed width that round-trips every `f64`.
pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.0, 1.0, -8.36e-5, 0.1 + 0.2, f64::MIN_POSITIVE, 1.0e300] {
            let s = sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(sig17(0.5), "5.0000000000000000e-1");
    }
}
