//! Number formatting shared by the CSV writers and the CLI.

use std::fmt::Write;

const SIGNIFICANT_DIGITS: i32 = 17;

/// Formats `value` like C's `%.17g`: 17 significant digits, trailing zeros
/// stripped, scientific notation outside `1e-4 <= |value| < 1e17`.
///
/// Seventeen digits are enough for any `f64` to parse back to the same bits.
pub fn fmt_sig17(value: f64) -> String {
    if value.is_nan() {
        return "nan".to_owned();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf" } else { "-inf" }.to_owned();
    }
    if value == 0.0 {
        return if value.is_sign_negative() { "-0" } else { "0" }.to_owned();
    }

    let sci = format!("{:.*e}", (SIGNIFICANT_DIGITS - 1) as usize, value);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");

    if !(-4..SIGNIFICANT_DIGITS).contains(&exp) {
        let mut out = trim_fraction(mantissa).to_owned();
        let sign = if exp < 0 { '-' } else { '+' };
        write!(out, "e{sign}{:02}", exp.abs()).unwrap();
        out
    } else {
        let decimals = (SIGNIFICANT_DIGITS - 1 - exp) as usize;
        trim_fraction(&format!("{value:.decimals$}")).to_owned()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Comma-joined 17-digit rendering of a slice.
pub fn join_sig17(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_sig17(v)).collect::<Vec<_>>().join(",")
}
