//! `%g`-style number formatting.

/// Formats `x` with `sig` significant digits, switching to exponent notation
/// for very small or very large magnitudes and trimming trailing zeros.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Table precision.
pub fn short(x: f64) -> String {
    fmt_sig(x, 6)
}

/// CSV precision; 17 significant digits round-trip every `f64`.
pub fn full(x: f64) -> String {
    fmt_sig(x, 17)
}
