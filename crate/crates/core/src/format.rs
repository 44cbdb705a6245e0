//! Fixed-width decimal formatting for CSV output.

/// Positional decimal with 17 significant digits, never in exponent form.
/// Non-finite values print as `nan`, `inf` or `-inf`.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0.0000000000000000".into();
    }
    // the exponent of the value as rounded to 17 digits decides the precision
    let sci = format!("{:.16e}", x);
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    let decimals = (16 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}
