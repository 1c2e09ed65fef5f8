//! Scalar fields, binary masks and image I/O.
//!
//! Every image, level set, pressure field and local fit in this crate is a
//! [`ScalarField`]: a row-major grid of finite `f64` values, at least 3x3 so
//! central differences always have interior points. Images are normalized to
//! `[0, 1]` on load.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pnm;

/// Smallest legal width or height.
pub const MIN_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        let expected = width * height;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(ScalarField {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a field by evaluating `f(x, y)` at every pixel, `x` being the column.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dims(width, height)?;
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Reads with replicate (nearest-pixel) padding outside the grid.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.values[yc * self.width + xc]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn ensure_same_dims(&self, other: &ScalarField) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }

    /// Pointwise map. The closure must keep values finite; this is checked in
    /// debug builds only since every caller here maps finite to finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        debug_assert!(values.iter().all(|v| v.is_finite()));
        ScalarField {
            width: self.width,
            height: self.height,
            values,
        }
    }

    /// Pointwise combination of two fields of equal size.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.ensure_same_dims(other)?;
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Ok(ScalarField {
            width: self.width,
            height: self.height,
            values,
        })
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, values: Vec<f64>) -> ScalarField {
        debug_assert_eq!(values.len(), width * height);
        debug_assert!(values.iter().all(|v| v.is_finite()));
        ScalarField {
            width,
            height,
            values,
        }
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width < MIN_DIM || height < MIN_DIM {
        return Err(Error::TooSmall { width, height });
    }
    Ok(())
}

/// Binary segmentation mask; `true` marks object pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl SegMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if bits.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: bits.len(),
            });
        }
        Ok(SegMask { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> SegMask {
        SegMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Object pixels with at least one 4-neighbour outside the object.
    /// Pixels on the image border only consider neighbours inside the grid.
    pub fn boundary(&self) -> SegMask {
        let (w, h) = self.dims();
        let mut bits = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                if !self.get(x, y) {
                    continue;
                }
                let outside = (x > 0 && !self.get(x - 1, y))
                    || (x + 1 < w && !self.get(x + 1, y))
                    || (y > 0 && !self.get(x, y - 1))
                    || (y + 1 < h && !self.get(x, y + 1));
                bits[y * w + x] = outside;
            }
        }
        SegMask { width: w, height: h, bits }
    }

    /// 0.0 / 1.0 field, for writing masks as images.
    pub fn to_field(&self) -> ScalarField {
        ScalarField::from_parts_unchecked(
            self.width,
            self.height,
            self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
    }

    /// Reads a mask back from a grayscale image: pixels at or above one half are object.
    pub fn from_field(field: &ScalarField) -> SegMask {
        SegMask {
            width: field.width(),
            height: field.height(),
            bits: field.values().iter().map(|&v| v >= 0.5).collect(),
        }
    }
}

/// Inside of the contour is `phi >= 0`; the zero level set counts as inside.
pub fn mask_from_phi(phi: &ScalarField) -> SegMask {
    SegMask {
        width: phi.width(),
        height: phi.height(),
        bits: phi.values().iter().map(|&v| v >= 0.0).collect(),
    }
}

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Decodes an in-memory 8-bit grayscale PGM (P5) or PNG into a `[0, 1]` field.
pub fn decode_image(bytes: &[u8]) -> Result<ScalarField> {
    let raw = if bytes.starts_with(PNG_MAGIC) {
        decode_png(bytes)?
    } else if bytes.starts_with(b"P") {
        pnm::decode_pgm(bytes)?
    } else {
        return Err(Error::Unsupported("expected a PGM (P5) or PNG file".into()));
    };
    raw.into_field()
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

/// Writes an 8-bit P5 PGM, `pixel = round(clamp(v, 0, 1) * 255)` with halves rounded up.
pub fn save_image(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(field)).map_err(|e| Error::io(path, e))
}

pub fn encode_pgm(field: &ScalarField) -> Vec<u8> {
    let pixels: Vec<u8> = field.values().iter().map(|&v| quantize(v)).collect();
    pnm::encode_pgm(field.width(), field.height(), &pixels)
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    // floor(x + 0.5) rounds halves up; f64::round would too for positives,
    // but spelling it out keeps 127.5 -> 128 obvious.
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// 8-bit grayscale raster straight out of a decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGray {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl RawGray {
    pub fn into_field(self) -> Result<ScalarField> {
        check_dims(self.width, self.height)?;
        let values = self.pixels.iter().map(|&p| p as f64 / 255.0).collect();
        ScalarField::new(self.width, self.height, values)
    }
}

fn decode_png(bytes: &[u8]) -> Result<RawGray> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Decode(format!("png: {e}")))?;
    let (color, depth) = reader.output_color_type();
    match color {
        png::ColorType::Grayscale => {}
        png::ColorType::GrayscaleAlpha => {
            return Err(Error::Unsupported("grayscale+alpha PNG".into()));
        }
        other => return Err(Error::ColorImage(format!("PNG color type {other:?}"))),
    }
    if depth != png::BitDepth::Eight {
        return Err(Error::Unsupported(format!("PNG bit depth {depth:?}, expected 8")));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Decode("png: image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Decode(format!("png: {e}")))?;
    let width = info.width as usize;
    let height = info.height as usize;
    let mut pixels = Vec::with_capacity(width * height);
    for row in buf.chunks(info.line_size).take(height) {
        pixels.extend_from_slice(&row[..width]);
    }
    Ok(RawGray { width, height, pixels })
}
