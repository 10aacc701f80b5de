//! Binary PGM (`P5`) reading and writing.
//!
//! Samples are one byte when `maxval < 256` and two big-endian bytes
//! otherwise. Header comments (`#` to end of line) are skipped on input.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::median_filter::GrayImage;

fn malformed(msg: impl Into<String>) -> Error {
    Error::Pgm(msg.into())
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self
                    .bytes
                    .get(self.pos)
                    .is_some_and(|&c| c != b'\n' && c != b'\r')
                {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(malformed(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| malformed(format!("{what} out of range")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(malformed("missing P5 magic number"));
    }
    let mut h = Header { bytes, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(malformed(format!("maxval {maxval} not in 1..=65535")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(malformed("missing whitespace after maxval")),
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| malformed("image dimensions overflow"))?;
    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    let raster = &bytes[h.pos..];
    if raster.len() < count * sample_bytes {
        return Err(malformed(format!(
            "raster holds {} bytes, expected {}",
            raster.len(),
            count * sample_bytes
        )));
    }
    let pixels = if sample_bytes == 1 {
        raster[..count].iter().map(|&b| u16::from(b)).collect()
    } else {
        raster[..2 * count]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    GrayImage::new(width, height, maxval as u16, pixels).map_err(|e| match e {
        Error::Pgm(_) => e,
        other => malformed(other.to_string()),
    })
}

pub fn encode(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), img.maxval()).into_bytes();
    if img.maxval() < 256 {
        out.extend(img.pixels().iter().map(|&p| p as u8));
    } else {
        out.extend(img.pixels().iter().flat_map(|p| p.to_be_bytes()));
    }
    out
}

pub fn read(mut reader: impl Read) -> Result<GrayImage> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| malformed(format!("read failed: {e}")))?;
    decode(&bytes)
}

pub fn write(img: &GrayImage, mut writer: impl Write) -> std::io::Result<()> {
    writer.write_all(&encode(img))
}
