//! Shared text-output conventions: UTF-8 CSV with a header row, '.'
//! decimal separator, 17 significant digits for floats (enough to
//! round-trip an f64 bit-exactly).

use std::io::Write;

use crate::error::Result;

/// A float as 17 significant decimal digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one CSV table: a header row, then rows of preformatted cells.
pub fn write_csv_table<W: Write>(
    mut w: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_round_trips_f64_bits() {
        for &x in &[
            0.1,
            1.0 / 3.0,
            2.0 / 3.0,
            1.0 - 2f64.powi(-53),
            6.02e23,
            -0.437_219_118_4,
            0.0,
        ] {
            let parsed: f64 = format_float(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits());
        }
    }
}
