//! JSON serialization with every finite float printed at 17 significant
//! digits, so documents round-trip bit-exactly and reruns are
//! byte-identical.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

/// Compact JSON formatter writing f64 values as `d.dddddddddddddddde±e`.
pub struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.8e}")
    }
}

/// Serialize a document with the 17-significant-digit float convention.
pub fn to_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut serializer)?;
    Ok(String::from_utf8(out).expect("serializer emits UTF-8"))
}

/// The same convention for a single float in CSV cells.
pub fn fmt_f64(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else if value.is_infinite() {
        if value > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{value:.16e}")
    }
}
