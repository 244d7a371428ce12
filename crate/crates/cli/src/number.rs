//! Number formatting shared by every output file.

/// C's `%.12g`: 12 significant digits, trailing zeros trimmed, exponent
/// notation below `1e-4` or from `1e12` up.
pub fn g12(x: f64) -> String {
    general(x, 12)
}

/// `%.<digits>g` for `digits >= 1`.
pub fn general(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = digits.max(1);
    // round first so the exponent reflects carries like 9.9999 -> 10.000
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `g12` of an optional value; empty when absent.
pub fn opt(x: Option<f64>) -> String {
    x.map(g12).unwrap_or_default()
}
