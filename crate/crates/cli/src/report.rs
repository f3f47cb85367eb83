//! Run reports: tables, RFC-4180 CSV emission, complex-number formatting and
//! the input digest. The CSV output carries no timing or other run-varying
//! data, so identical inputs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use mapgroup::error::{Error, Result};
use mapgroup::matrix::Matrix;

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug)]
pub struct RunReport {
    pub command: String,
    pub digest: String,
    pub tables: Vec<Table>,
    pub verdicts: Vec<String>,
    pub elapsed_ms: u128,
}

impl RunReport {
    pub fn new(command: &str, digest: String) -> Self {
        RunReport {
            command: command.to_string(),
            digest,
            tables: Vec::new(),
            verdicts: Vec::new(),
            elapsed_ms: 0,
        }
    }

    /// Print the human-readable view (tables inline, then verdicts).
    pub fn print(&self) {
        println!("command: {} (input digest {})", self.command, self.digest);
        for table in &self.tables {
            println!("-- {}", table.name);
            println!("{}", table.header.join(" | "));
            for row in &table.rows {
                println!("{}", row.join(" | "));
            }
        }
        for v in &self.verdicts {
            println!("verdict: {v}");
        }
        println!("elapsed: {} ms", self.elapsed_ms);
    }

    /// Write each table as `<out>/<command>_<table>.csv`.
    pub fn write_csv(&self, out_dir: &Path) -> Result<()> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| Error::invalid(format!("cannot create {}: {e}", out_dir.display())))?;
        for table in &self.tables {
            let path = out_dir.join(format!("{}_{}.csv", self.command, table.name));
            let mut body = String::new();
            writeln_csv_row(&mut body, &table.header);
            for row in &table.rows {
                writeln_csv_row(&mut body, row);
            }
            std::fs::write(&path, body)
                .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// RFC 4180: quote a cell if it has commas, quotes or line breaks; double
/// embedded quotes; CRLF row endings.
fn writeln_csv_row(out: &mut String, cells: &[String]) {
    for (i, cell) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let needs_quoting = cell.contains(',') || cell.contains('"') || cell.contains('\n');
        if needs_quoting {
            out.push('"');
            out.push_str(&cell.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(cell);
        }
    }
    out.push_str("\r\n");
}

/// Complex entries print as `re+imi` (e.g. `1.5+0.25i`, `0-2i`).
pub fn format_complex(z: Complex64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{}", z.re);
    if z.im >= 0.0 || z.im.is_nan() {
        let _ = write!(s, "+{}i", z.im);
    } else {
        let _ = write!(s, "-{}i", -z.im);
    }
    s
}

/// Inverse of [`format_complex`].
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t = text.trim();
    if !t.ends_with('i') {
        // plain real
        return t
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| Error::invalid(format!("bad complex literal '{text}'")));
    }
    let body = &t[..t.len() - 1];
    // split at the sign of the imaginary part (skip a leading sign and signs
    // inside exponents)
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let b = bytes[i];
        if (b == b'+' || b == b'-') && bytes[i - 1] != b'e' && bytes[i - 1] != b'E' {
            split = Some(i);
            break;
        }
    }
    let i = split.ok_or_else(|| Error::invalid(format!("bad complex literal '{text}'")))?;
    let re: f64 = body[..i]
        .parse()
        .map_err(|_| Error::invalid(format!("bad complex literal '{text}'")))?;
    let im_text = &body[i..];
    let im: f64 = if im_text == "+" {
        1.0
    } else if im_text == "-" {
        -1.0
    } else {
        im_text
            .parse()
            .map_err(|_| Error::invalid(format!("bad complex literal '{text}'")))?
    };
    Ok(Complex64::new(re, im))
}

pub fn matrix_cells(m: &Matrix) -> Vec<String> {
    let n = m.dim();
    let mut cells = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            cells.push(format_complex(m[(i, j)]));
        }
    }
    cells
}

pub fn entry_header(n: usize) -> Vec<String> {
    let mut header = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            header.push(format!("e{i}{j}"));
        }
    }
    header
}

/// FNV-1a digest of the canonical input (file text plus the flags that
/// influence the run), rendered as 16 hex digits.
pub fn digest(parts: &[&str]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for part in parts {
        for b in part.as_bytes() {
            hash ^= u64::from(*b);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        hash ^= 0xff;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_roundtrip() {
        for z in [
            Complex64::new(1.5, 0.25),
            Complex64::new(0.0, -2.0),
            Complex64::new(-1e-9, 3.25e4),
            Complex64::new(0.1 + 0.2, -0.30000000000000004),
        ] {
            let s = format_complex(z);
            let back = parse_complex(&s).unwrap();
            assert_eq!(z.re.to_bits(), back.re.to_bits(), "text {s}");
            assert_eq!(z.im.to_bits(), back.im.to_bits(), "text {s}");
        }
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn csv_quoting() {
        let mut s = String::new();
        writeln_csv_row(&mut s, &["a,b".into(), "plain".into(), "with \"q\"".into()]);
        assert_eq!(s, "\"a,b\",plain,\"with \"\"q\"\"\"\r\n");
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(&["abc"]), digest(&["abc"]));
        assert_ne!(digest(&["abc"]), digest(&["abd"]));
    }
}
