//! Output helpers shared by the scan writers.

use std::io::Write;

/// Formats `v` rounded to 9 significant digits, printed in the shortest
/// form that round-trips the rounded value; magnitudes outside `[1e-4, 1e15)`
/// use exponent notation. Non-finite values print as `nan`.
pub fn sig9(v: f64) -> String {
    if !v.is_finite() {
        return "nan".into();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if mag != 0.0 && !(1e-4..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

/// Writes `rows` under `header` as CSV.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> crate::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(2.0 / 3.0), "0.666666667");
        assert_eq!(sig9(0.5), "0.5");
        assert_eq!(sig9(-1234567891.2), "-1234567890");
        assert_eq!(sig9(f64::NAN), "nan");
        assert_eq!(sig9(1.0982211345e-13), "1.09822113e-13");
        assert_eq!(sig9(0.0), "0");
    }
}
