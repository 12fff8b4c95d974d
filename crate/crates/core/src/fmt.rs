//! Fixed float formatting shared by every text artifact.

/// Formats like C's `%.{p}g`.
pub fn g(v: f64, p: usize) -> String {
    let p = p.max(1);
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", p - 1, v);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let x: i32 = exp.parse().expect("integer exponent");
    if x < -4 || x >= p as i32 {
        let mant = strip_zeros(mant);
        let sign = if x < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", x.abs())
    } else {
        strip_zeros(&format!("{:.*}", (p as i32 - 1 - x) as usize, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `%.17g`: enough digits to round-trip every f64.
pub fn g17(v: f64) -> String {
    g(v, 17)
}

/// Parses the output of [`g`], including `inf`, `-inf` and `nan`.
pub fn parse_g(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}
