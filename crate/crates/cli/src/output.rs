use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::ser::Formatter;

/// Compact JSON with every float written to 17 significant digits.
struct Fixed17;

pub fn format_f64(value: f64) -> String {
    if !value.is_finite() {
        return "null".to_string();
    }
    let sci = format!("{value:.16e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("scientific float formatting");
    if (-5..=15).contains(&exp) {
        format!("{value:.*}", (16 - exp) as usize)
    } else {
        sci
    }
}

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Write to `path`, or stdout when absent.
pub fn emit<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let bytes = to_json(value)?;
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

/// One JSON document per line.
pub fn emit_lines<T: Serialize>(items: &[T], path: &Path) -> Result<()> {
    let mut bytes = Vec::new();
    for item in items {
        bytes.extend(to_json(item)?);
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(3.0), "3.0000000000000000");
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(1e20), "1.0000000000000000e20");
        assert_eq!(format_f64(f64::NAN), "null");
        for x in [1.0 / 3.0, 12345.678, 2.5e-7, 9.999999999999999e15] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
