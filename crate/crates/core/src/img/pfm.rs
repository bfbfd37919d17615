//! Grayscale PFM ("Pf") disparity map I/O.
//!
//! Header: magic line, "width height" line, then a scale line whose sign
//! encodes endianness (negative = little-endian). Scanlines are stored
//! bottom-up. Round trips are bit-exact.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::img::DisparityMap;

pub fn save_pfm(map: &DisparityMap, path: &Path) -> Result<()> {
    if map.data().iter().any(|v| v.is_nan()) {
        return Err(Error::Parameter(
            "disparity map contains NaN, refusing to write".to_string(),
        ));
    }

    let width = map.width();
    let height = map.height();
    let mut out = Vec::with_capacity(width * height * 4 + 32);
    out.extend_from_slice(format!("Pf\n{width} {height}\n-1.0\n").as_bytes());
    for y in (0..height).rev() {
        for x in 0..width {
            out.extend_from_slice(&map.get(x, y).to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_pfm(path: &Path) -> Result<DisparityMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pfm(&bytes).map_err(|reason| Error::format(path, reason))
}

fn parse_pfm(bytes: &[u8]) -> std::result::Result<DisparityMap, String> {
    let (magic, rest) = read_line(bytes).ok_or("truncated header")?;
    if magic != "Pf" {
        return Err(format!(
            "unsupported magic \"{magic}\", expected grayscale Pf"
        ));
    }

    let (dims, rest) = read_line(rest).ok_or("truncated header")?;
    let mut parts = dims.split_whitespace();
    let width: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| format!("invalid dimensions line \"{dims}\""))?;
    let height: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| format!("invalid dimensions line \"{dims}\""))?;

    let (scale_line, rest) = read_line(rest).ok_or("truncated header")?;
    let scale: f32 = scale_line
        .trim()
        .parse()
        .map_err(|_| format!("invalid scale \"{scale_line}\""))?;
    let little_endian = scale < 0.0;

    let count = width * height;
    if rest.len() < count * 4 {
        return Err(format!(
            "truncated payload: expected {} bytes, found {}",
            count * 4,
            rest.len()
        ));
    }

    let mut data = vec![0.0f32; count];
    for (i, chunk) in rest[..count * 4].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let value = if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        // Scanlines are bottom-up on disk.
        let y = height - 1 - i / width;
        let x = i % width;
        data[y * width + x] = value;
    }

    DisparityMap::from_raw(width, height, data).map_err(|e| e.to_string())
}

/// Split off one `\n`-terminated header line as UTF-8.
fn read_line(bytes: &[u8]) -> Option<(String, &[u8])> {
    let nl = bytes.iter().position(|&b| b == b'\n')?;
    let line = std::str::from_utf8(&bytes[..nl]).ok()?.to_string();
    Some((line, &bytes[nl + 1..]))
}
