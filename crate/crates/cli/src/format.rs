//! Text formatting shared by every CSV writer.

use std::path::Path;

use crate::bundle::Bundle;
use crate::exit::CliError;

/// Marker written for values that are undefined (e.g. a Sharpe ratio with zero
/// risk).
pub const UNDEFINED: &str = "NA";

/// Fixed-point decimal with 6 significant digits. Very large or small
/// magnitudes fall back to scientific notation.
pub fn sig6(v: f64) -> String {
    if !v.is_finite() {
        return UNDEFINED.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    // Round once in scientific form so the exponent reflects carries such as
    // 9.999996 → 1.00000e1.
    let sci = format!("{v:.5e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if !(-7..=15).contains(&exp) {
        return sci;
    }
    let decimals = (5 - exp).max(0) as usize;
    let rounded: f64 = sci.parse().expect("float");
    let s = format!("{rounded:.decimals$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0".to_string()
    } else {
        s
    }
}

pub fn opt6(v: Option<f64>) -> String {
    v.map(sig6).unwrap_or_else(|| UNDEFINED.to_string())
}

/// Writes rows with a header to `rel` inside the bundle.
pub fn write_csv(bundle: &mut Bundle, rel: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::io(Path::new(rel), e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::io(Path::new(rel), e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(Path::new(rel), e.to_string()))?;
    bundle.write(rel, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(123.456789), "123.457");
        assert_eq!(sig6(-0.000123456789), "-0.000123457");
        assert_eq!(sig6(9.999996), "10.0000");
        assert_eq!(sig6(1234567.0), "1234570");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(-0.0), "0");
        assert_eq!(sig6(1e-12), "1.00000e-12");
        assert_eq!(sig6(f64::NAN), "NA");
    }
}
