//! Fixed numeric formatting shared by every CSV and JSON emitter.

use std::io::{self, Write};

/// Scientific notation with 17 significant digits, `.` as decimal separator.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one comma-separated line.
pub fn csv_row<W: Write, S: AsRef<str>>(out: &mut W, fields: &[S]) -> io::Result<()> {
    let mut first = true;
    for f in fields {
        if !first {
            out.write_all(b",")?;
        }
        out.write_all(f.as_ref().as_bytes())?;
        first = false;
    }
    out.write_all(b"\n")
}
