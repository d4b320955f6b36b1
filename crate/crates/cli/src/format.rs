//! Text formatting of numbers: 12 significant digits, `%g` style.

const SIGNIFICANT: i32 = 12;

/// Format with 12 significant digits, trailing zeros removed; fixed notation
/// for exponents in `[-5, 12)`, scientific otherwise.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // round to the target precision first so 9.9999999999999 → 10 picks the right branch
    let sci = format!("{:.*e}", (SIGNIFICANT - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT).contains(&exp) {
        let decimals = (SIGNIFICANT - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Zero out entries below `1e-12` relative to the largest magnitude (at least 1).
pub fn chop(values: &[f64]) -> Vec<f64> {
    let scale = values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    values
        .iter()
        .map(|&x| if x.abs() <= 1e-12 * scale { 0.0 } else { x })
        .collect()
}

pub fn join(values: &[f64]) -> String {
    values.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}
