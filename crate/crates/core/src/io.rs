//! Plain-text output helpers shared by the library and the CLI.

use std::io::{self, Write};

/// Formats a real with 17 significant digits, independent of locale.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        // keep the sign bit out of the output
        return "0.0000000000000000e0".to_owned();
    }
    format!("{x:.16e}")
}

/// Writes a header line followed by one line per row.
pub fn write_csv<W, R>(w: &mut W, header: &[&str], rows: R) -> io::Result<()>
where
    W: Write,
    R: IntoIterator,
    R::Item: AsRef<[f64]>,
{
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|&v| fmt_real(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [1.0 / 3.0, -2.5e-300, std::f64::consts::PI * 1e10, 0.1 + 0.2] {
            let s = fmt_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
        assert_eq!(fmt_real(-0.0), fmt_real(0.0));
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], [[1.0, 2.0]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "a,b\n1.0000000000000000e0,2.0000000000000000e0\n");
    }
}
