//! Report serialization: JSON with floating-point values pinned to 17
//! significant digits so identical configurations produce byte-identical
//! files.

use serde::Serialize;
use std::io;

use crate::error::Result;

struct FixedDigitsFormatter;

impl serde_json::ser::Formatter for FixedDigitsFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        // 1 leading + 16 fractional digits = 17 significant digits, enough to
        // round-trip any f64 and stable across runs.
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.8e}")
    }
}

/// Serialize with deterministic float formatting (17 significant digits).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigitsFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Write a report JSON file.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<std::path::Path>) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}
