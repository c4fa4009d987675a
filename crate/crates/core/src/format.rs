//! Locale-free number formatting shared by every CSV writer and report.

/// Significant digits used for every serialized number.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Formats `x` with nine significant digits.
///
/// Values whose decimal exponent lies in `-4..9` are written in plain
/// positional notation, anything else in `d.ddde±x` form. Trailing zeros are
/// trimmed, so `0.5` prints as `0.5` and `2.5167958e-5` keeps its exponent.
/// The output always parses back with `str::parse::<f64>`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// Parses a decimal number, also accepting a simple `p/q` fraction such as `50/3`.
pub fn parse_number(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num.trim().parse().ok()?;
        let den: f64 = den.trim().parse().ok()?;
        if den == 0.0 {
            return None;
        }
        let v = num / den;
        return v.is_finite().then_some(v);
    }
    let v: f64 = text.parse().ok()?;
    v.is_finite().then_some(v)
}
