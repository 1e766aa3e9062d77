//! Decimal text for interchange files: at least 9 significant digits and an
//! exact round trip through `str::parse::<f64>`.

/// Formats `v` losslessly with no fewer than 9 significant digits.
pub fn format_f64(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0.00000000".to_string();
    }
    let shortest = v.to_string();
    let significant = shortest
        .chars()
        .filter(char::is_ascii_digit)
        .skip_while(|&c| c == '0')
        .count();
    if significant >= 9 {
        return shortest;
    }
    // shortest repr has < 9 digits, so padding it to 9 digits reproduces it
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (8 - exponent).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Space-separated list of formatted values.
pub fn format_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| format_f64(v))
        .collect::<Vec<_>>()
        .join(" ")
}
