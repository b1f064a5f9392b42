//! Number formatting for tables and the flat binary array format.
//!
//! Binary layout: `u32` little-endian header length, a UTF-8 JSON header of
//! that many bytes, then the samples as little-endian `f64` pairs `(re, im)`.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use serde_json::Value;

use crate::error::{Error, Result};

/// Shortest round-trip-exact rendering with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // Normalise negative zero so tables do not depend on sign noise.
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

pub fn write_binary(mut w: impl Write, header: &Value, data: &[C64]) -> Result<()> {
    let head = serde_json::to_vec(header)?;
    let len = u32::try_from(head.len()).map_err(|_| Error::Format("header too large".into()))?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(&head)?;
    let mut buf = Vec::with_capacity(16 * data.len());
    for z in data {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<(Value, Vec<C64>)> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut head = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut head)?;
    let header: Value = serde_json::from_slice(&head)?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % 16 != 0 {
        return Err(Error::Format(format!("payload of {} bytes is not a whole number of complex samples", body.len())));
    }
    let data = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect();
    Ok((header, data))
}

pub(crate) fn header_usize(h: &Value, key: &str) -> Result<usize> {
    h.get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::Format(format!("header field '{key}' missing or not an integer")))
}

pub(crate) fn header_f64(h: &Value, key: &str) -> Result<f64> {
    h.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Format(format!("header field '{key}' missing or not a number")))
}

pub(crate) fn header_str<'a>(h: &'a Value, key: &str) -> Result<&'a str> {
    h.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Format(format!("header field '{key}' missing or not a string")))
}
