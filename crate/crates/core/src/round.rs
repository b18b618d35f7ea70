//! Presentation rounding shared by the statistics and gap-report modules.

/// Round to two decimals the way standard float formatters do: nearest
/// representable two-decimal value, ties to even on the exact binary value.
/// This reproduces the rounding behavior of common numeric tooling, which is
/// what published score tables go through.
pub fn round2(x: f64) -> f64 {
    format!("{x:.2}").parse().expect("formatted float reparses")
}

/// Round half away from zero to the nearest integer.
pub fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round2_basic() {
        assert_eq!(round2(0.13978), 0.14);
        assert_eq!(round2(0.10523), 0.11);
        assert_eq!(round2(6.4699999), 6.47);
    }

    #[test]
    fn round2_exact_tie_goes_even() {
        // 0.625 is exactly representable; the tie resolves to 0.62.
        assert_eq!(round2(0.625), 0.62);
    }

    #[test]
    fn round_half_up_basic() {
        assert_eq!(round_half_up(5.4), 5);
        assert_eq!(round_half_up(5.5), 6);
        assert_eq!(round_half_up(0.0), 0);
        assert_eq!(round_half_up(2.5), 3);
    }
}
