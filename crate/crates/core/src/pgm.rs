//! Binary greymap (P5, maxval 255) reading and writing.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, fill: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![fill; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::ArenaLoad(format!("malformed PGM: {msg}"));
        if bytes.len() < 2 || &bytes[..2] != b"P5" {
            return Err(bad("missing P5 magic"));
        }
        let mut pos = 2;
        let mut header = [0usize; 3];
        for field in header.iter_mut() {
            // Whitespace and comments between header tokens.
            loop {
                match bytes.get(pos) {
                    Some(b) if b.is_ascii_whitespace() => pos += 1,
                    Some(b'#') => {
                        while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                            pos += 1;
                        }
                    }
                    _ => break,
                }
            }
            let start = pos;
            while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
                pos += 1;
            }
            if start == pos {
                return Err(bad("expected a header number"));
            }
            *field = std::str::from_utf8(&bytes[start..pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("header number out of range"))?;
        }
        let [width, height, maxval] = header;
        if maxval != 255 {
            return Err(bad(&format!("maxval must be 255, got {maxval}")));
        }
        if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(bad("missing whitespace after header"));
        }
        pos += 1;
        let n = width.checked_mul(height).ok_or_else(|| bad("image too large"))?;
        let data = bytes
            .get(pos..pos + n)
            .ok_or_else(|| bad(&format!("expected {n} pixel bytes, got {}", bytes.len() - pos)))?;
        Ok(Self {
            width,
            height,
            pixels: data.to_vec(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }
}
