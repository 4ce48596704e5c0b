//! Locale-independent float formatting used by every report.
//!
//! All reports print floats with 17 significant digits, which round-trips
//! every finite `f64` exactly. Values in `[1e-5, 1e17)` use positional
//! notation, the rest use scientific notation.

use serde_json::{Number, Value};

pub const SIGNIFICANT_DIGITS: usize = 17;

/// Formats `x` with exactly 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() {
        // not representable in JSON; callers validate before formatting
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", SIGNIFICANT_DIGITS - 1, 0.0);
    }
    // The decimal exponent from `{:e}` is exact, unlike log10 near powers of ten.
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-5..17).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        format!("{:.*}", decimals, x)
    } else {
        sci
    }
}

/// A JSON number carrying the exact 17-digit text of `x`.
pub fn json_number(x: f64) -> Value {
    let text = fmt17(x);
    match text.parse::<Number>() {
        Ok(n) => Value::Number(n),
        Err(_) => Value::Null,
    }
}
