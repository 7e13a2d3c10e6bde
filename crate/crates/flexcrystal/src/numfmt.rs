//! Deterministic float formatting for the interchange formats.

/// Formats a finite `f64` with 17 significant digits in exponent form,
/// enough to reproduce the value bit-for-bit on re-parse.
pub fn sig17(x: f64) -> String {
    debug_assert!(x.is_finite(), "interchange formats carry finite numbers only");
    format!("{x:.16e}")
}
