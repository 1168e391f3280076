//! Binary PGM (`P5`) reading and writing, 8- and 16-bit.

use crate::error::{PhsdError, Result};
use crate::image::Image;

/// Serialize as canonical binary PGM: `P5\n<w> <h>\n<maxval>\n` followed by
/// big-endian samples. Pixels are rounded half-away-from-zero and clamped
/// to [0, maxval].
pub fn write_pgm(img: &Image) -> Vec<u8> {
    let maxval = img.peak();
    let mut out = format!("P5\n{} {}\n{}\n", img.width, img.height, maxval as u64).into_bytes();
    for &p in &img.pixels {
        let q = p.round().clamp(0.0, maxval) as u64;
        if img.bit_depth == 8 {
            out.push(q as u8);
        } else {
            out.extend_from_slice(&(q as u16).to_be_bytes());
        }
    }
    out
}

struct Tokenizer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokenizer<'a> {
    /// Next whitespace-delimited token, skipping `#` comments to end of line.
    fn token(&mut self) -> Result<&'a [u8]> {
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
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PhsdError::format("truncated PGM header"));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self) -> Result<usize> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PhsdError::format("non-numeric PGM header field"))
    }
}

/// Parse a binary PGM. Maxval must be 255 or 65535; 16-bit samples are
/// big-endian per the format.
pub fn read_pgm(bytes: &[u8]) -> Result<Image> {
    let mut tk = Tokenizer { bytes, pos: 0 };
    let magic = tk.token()?;
    if magic != b"P5" {
        return Err(PhsdError::format(format!(
            "unsupported PGM variant {:?} (only binary P5 is handled)",
            String::from_utf8_lossy(magic)
        )));
    }
    let width = tk.number()?;
    let height = tk.number()?;
    let maxval = tk.number()?;
    let bit_depth = match maxval {
        255 => 8u8,
        65535 => 16,
        other => return Err(PhsdError::format(format!("unsupported PGM maxval {other}"))),
    };
    // exactly one whitespace byte separates maxval from the payload
    if tk.pos >= bytes.len() || !bytes[tk.pos].is_ascii_whitespace() {
        return Err(PhsdError::format("missing separator before PGM payload"));
    }
    let data = &bytes[tk.pos + 1..];
    let sample_bytes = if bit_depth == 8 { 1 } else { 2 };
    let expect = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(sample_bytes))
        .ok_or_else(|| PhsdError::format("PGM dimensions overflow"))?;
    if data.len() < expect {
        return Err(PhsdError::format(format!(
            "truncated PGM payload: expected {expect} bytes, found {}",
            data.len()
        )));
    }
    if data.len() > expect {
        return Err(PhsdError::format("trailing bytes after PGM payload"));
    }
    let pixels: Vec<f64> = if bit_depth == 8 {
        data.iter().map(|&b| b as f64).collect()
    } else {
        data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as f64).collect()
    };
    Image::new(width, height, bit_depth, pixels)
}
