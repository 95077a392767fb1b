//! JSON with fixed-width scientific floats, so reruns produce identical bytes
//! and every float round-trips exactly.

use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct SciFloats;

impl Formatter for SciFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{:.16e}", v as f64)
    }
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFloats);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = to_string(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Parse with the failing field path in the error.
pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

pub fn read_file<T: DeserializeOwned>(path: &Path, expected: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::FileNotFound {
            path: path.display().to_string(),
            expected: expected.to_string(),
        },
        _ => Error::Io(e),
    })?;
    from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Probe {
        a: f64,
        b: Vec<f64>,
        n: u32,
    }

    #[test]
    fn floats_round_trip_exactly() {
        let p = Probe {
            a: 0.1 + 0.2,
            b: vec![1.0, -2.5e-300, 123_456_789.123_456_78, f64::MIN_POSITIVE],
            n: 4,
        };
        let s = to_string(&p).unwrap();
        assert!(s.contains("\"a\":3.0000000000000004e-1"));
        let back: Probe = from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn schema_error_names_field() {
        let err = from_str::<Probe>(r#"{"a":1.0,"b":[1.0,"x"],"n":1}"#).unwrap_err();
        match err {
            Error::Schema { path, .. } => assert_eq!(path, "b[1]"),
            e => panic!("{e}"),
        }
    }
}
