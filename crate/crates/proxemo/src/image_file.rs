//! Gait images on disk.
//!
//! The lossless float format (`.pxim`) is little-endian:
//!
//! | bytes | field                                   |
//! |-------|-----------------------------------------|
//! | 4     | magic `PXIM`                            |
//! | 4     | format version (u32, currently 1)       |
//! | 4     | channels (u32, always 3)                |
//! | 4     | height (u32)                            |
//! | 4     | width (u32)                             |
//! | 8·n   | f64 samples, channel-major then row-major |
//!
//! PNG export is 8-bit RGB with `x, y, z` in the red, green and blue
//! channels and each sample stored as `round(255 v)`.

use std::path::Path;

use proxemo_core::embedding::{GaitImage, CHANNELS};

use crate::error::{read_bytes, write_bytes, CliError, Result};

pub const MAGIC: &[u8; 4] = b"PXIM";
pub const VERSION: u32 = 1;
pub const EXTENSION: &str = "pxim";
const HEADER: usize = 20;

pub fn encode(image: &GaitImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 8 * image.data().len());
    out.extend_from_slice(MAGIC);
    for v in [VERSION, CHANNELS as u32, image.height() as u32, image.width() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in image.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<GaitImage> {
    let bad = |m: String| CliError::malformed(path, m);
    if bytes.len() < HEADER || &bytes[..4] != MAGIC {
        return Err(bad("not a PXIM float image".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let (version, channels, height, width) = (word(0), word(1), word(2) as usize, word(3) as usize);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    if channels as usize != CHANNELS {
        return Err(bad(format!("{channels} channels, expected {CHANNELS}")));
    }
    let n = CHANNELS * height * width;
    if bytes.len() != HEADER + 8 * n {
        return Err(bad(format!("{} payload bytes for a {height}x{width} image", bytes.len() - HEADER)));
    }
    let data = bytes[HEADER..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(GaitImage::new(height, width, data)?)
}

pub fn write(path: &Path, image: &GaitImage) -> Result<()> {
    write_bytes(path, &encode(image))
}

pub fn read(path: &Path) -> Result<GaitImage> {
    decode(&read_bytes(path)?, path)
}

/// `round(255 v)`, clamped to the byte range.
pub fn to_byte(v: f64) -> u8 {
    (255.0 * v).round().clamp(0.0, 255.0) as u8
}

pub fn encode_png(image: &GaitImage) -> Vec<u8> {
    let (h, w) = (image.height(), image.width());
    let mut pixels = Vec::with_capacity(h * w * CHANNELS);
    for r in 0..h {
        for c in 0..w {
            for ch in 0..CHANNELS {
                pixels.push(to_byte(image.get(ch, r, c)));
            }
        }
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("writing to memory");
        writer.write_image_data(&pixels).expect("pixel count matches header");
    }
    out
}

pub fn write_png(path: &Path, image: &GaitImage) -> Result<()> {
    write_bytes(path, &encode_png(image))
}
