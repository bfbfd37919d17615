//! Netpbm PGM (P2 ASCII / P5 binary) reading and writing, maxval <= 255.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::img::GrayImage;

/// Load a PGM image. Header comments (`#` to end of line) are allowed
/// anywhere whitespace is.
pub fn load_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes).map_err(|reason| Error::format(path, reason))
}

/// Write a binary (P5) PGM.
pub fn save_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(img.data().len() + 32);
    out.extend_from_slice(format!("P5\n{} {}\n255\n", img.width(), img.height()).as_bytes());
    out.extend_from_slice(img.data());
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut cursor = Cursor { bytes, pos: 0 };

    let magic = cursor.token()?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(format!("unsupported magic \"{other}\", expected P2 or P5")),
    };

    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(format!("degenerate dimensions {width}x{height}"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }

    let count = width * height;
    let data = if binary {
        // One whitespace byte separates the header from the raster.
        cursor.skip_single_whitespace()?;
        let raster = &bytes[cursor.pos..];
        if raster.len() < count {
            return Err(format!(
                "truncated payload: expected {count} bytes, found {}",
                raster.len()
            ));
        }
        raster[..count].to_vec()
    } else {
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let sample = cursor.number("sample")?;
            if sample > maxval {
                return Err(format!("sample {sample} exceeds maxval {maxval}"));
            }
            data.push(sample as u8);
        }
        data
    };

    GrayImage::from_raw(width, height, data).map_err(|e| e.to_string())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    /// Skip whitespace and `#` comments, then read one whitespace-delimited
    /// token.
    fn token(&mut self) -> std::result::Result<String, String> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.bytes.len() {
            return Err("truncated header".to_string());
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        String::from_utf8(self.bytes[start..self.pos].to_vec())
            .map_err(|_| "non-ASCII header token".to_string())
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, String> {
        let tok = self.token()?;
        tok.parse::<usize>()
            .map_err(|_| format!("invalid {what} \"{tok}\""))
    }

    fn skip_single_whitespace(&mut self) -> std::result::Result<(), String> {
        if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_whitespace() {
            return Err("missing whitespace after maxval".to_string());
        }
        self.pos += 1;
        Ok(())
    }
}
