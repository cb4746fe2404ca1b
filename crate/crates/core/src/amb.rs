//! Adjacency-matrix binary images.
//!
//! Pixel `(i, j)` is white (1) when vertices `i` and `j` are adjacent and
//! black (0) otherwise. Images are stored row-major, one byte per pixel, and
//! serialize to binary PGM (`P5`) with white = 255.

use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AmbError {
    #[error("cannot pad a {side}x{side} image into {target}x{target}")]
    PadTooSmall { side: usize, target: usize },
    #[error("malformed PGM header: {0}")]
    Header(String),
    #[error("PGM payload truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("PGM pixel value {0} at offset {1} is neither 0 nor 255")]
    NonBinary(u8, usize),
    #[error("pixel buffer of length {len} is not {side}x{side}")]
    Shape { side: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AmbImage {
    side: usize,
    pixels: Vec<u8>,
}

impl AmbImage {
    pub fn black(side: usize) -> Self {
        Self { side, pixels: vec![0; side * side] }
    }

    /// Builds an image from 0/1 pixel values, row-major.
    pub fn from_pixels(side: usize, pixels: Vec<u8>) -> Result<Self, AmbError> {
        if pixels.len() != side * side {
            return Err(AmbError::Shape { side, len: pixels.len() });
        }
        if let Some(pos) = pixels.iter().position(|&p| p > 1) {
            return Err(AmbError::NonBinary(pixels[pos], pos));
        }
        Ok(Self { side, pixels })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.pixels[row * self.side + col] == 1
    }

    pub fn white_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == 1).count()
    }

    /// Coordinates of white pixels in row-major order.
    pub fn white_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let side = self.side;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == 1)
            .map(move |(i, _)| (i / side, i % side))
    }
}

pub fn render(g: &Graph) -> AmbImage {
    let n = g.n();
    let mut img = AmbImage::black(n);
    for u in 0..n {
        for v in g.neighbors(u) {
            img.pixels[u * n + v] = 1;
        }
    }
    img
}

/// Places `img` at offset `⌊(target − side) / 2⌋` on both axes of a black canvas.
pub fn pad_center(img: &AmbImage, target: usize) -> Result<AmbImage, AmbError> {
    if target < img.side {
        return Err(AmbError::PadTooSmall { side: img.side, target });
    }
    let offset = (target - img.side) / 2;
    let mut out = AmbImage::black(target);
    for r in 0..img.side {
        let src = &img.pixels[r * img.side..(r + 1) * img.side];
        let start = (r + offset) * target + offset;
        out.pixels[start..start + img.side].copy_from_slice(src);
    }
    Ok(out)
}

pub fn encode(img: &AmbImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.side, img.side).into_bytes();
    out.extend(img.pixels.iter().map(|&p| if p == 1 { 255 } else { 0 }));
    out
}

pub fn decode(bytes: &[u8]) -> Result<AmbImage, AmbError> {
    let mut pos = 0;
    let magic = header_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(AmbError::Header(format!(
            "expected magic P5, found {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let mut number = |what: &str| -> Result<usize, AmbError> {
        let tok = header_token(bytes, &mut pos)?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| AmbError::Header(format!("invalid {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if width != height {
        return Err(AmbError::Header(format!("image is {width}x{height}, not square")));
    }
    if maxval != 255 {
        return Err(AmbError::Header(format!("maxval {maxval}, expected 255")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(AmbError::Header("missing separator after maxval".into()));
    }
    pos += 1;
    let expected = width * height;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(AmbError::Truncated { expected, found: payload.len() });
    }
    let pixels = payload[..expected]
        .iter()
        .enumerate()
        .map(|(i, &b)| match b {
            0 => Ok(0),
            255 => Ok(1),
            other => Err(AmbError::NonBinary(other, i)),
        })
        .collect::<Result<Vec<u8>, _>>()?;
    Ok(AmbImage { side: width, pixels })
}

fn header_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], AmbError> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(_) => break,
            None => return Err(AmbError::Header("unexpected end of header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}
