//! Binary PGM (P5) codec.
//!
//! Header: `P5`, whitespace, width, whitespace, height, whitespace, maxval,
//! exactly one whitespace byte, then `width * height` raw bytes in row-major
//! order. `#` comments are accepted between header tokens. Only maxval 255 is
//! supported.

use crate::error::{Error, Result};
use crate::grid::RawGray;

/// Upper bound on decoded pixel count; guards allocations on hostile headers.
pub const MAX_PIXELS: usize = 1 << 28;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
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
            return Err(Error::Decode(format!("pgm: expected {what}")));
        }
        // 10 digits is already past any dimension we accept.
        if self.pos - start > 10 {
            return Err(Error::Decode(format!("pgm: {what} out of range")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Decode(format!("pgm: bad {what}")))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<RawGray> {
    let magic = bytes.get(..2).ok_or_else(|| Error::Decode("pgm: truncated magic".into()))?;
    match magic {
        b"P5" => {}
        b"P3" | b"P6" => return Err(Error::ColorImage("PPM".into())),
        b"P1" | b"P2" | b"P4" | b"P7" => {
            return Err(Error::Unsupported(format!(
                "netpbm {}; only binary PGM (P5) is read",
                String::from_utf8_lossy(magic)
            )))
        }
        _ => return Err(Error::Decode("pgm: bad magic".into())),
    }
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(cur.pos).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(Error::Decode("pgm: missing whitespace after magic".into()));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Decode(format!("pgm: maxval {maxval} out of range")));
    }
    if maxval != 255 {
        return Err(Error::Unsupported(format!("pgm maxval {maxval}, expected 255")));
    }
    match cur.bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::Decode("pgm: missing whitespace after maxval".into())),
    }
    let count = width
        .checked_mul(height)
        .filter(|&n| n <= MAX_PIXELS)
        .ok_or_else(|| Error::Decode(format!("pgm: {width}x{height} is too large")))?;
    let data = &bytes[cur.pos..];
    if data.len() < count {
        return Err(Error::Decode(format!(
            "pgm: expected {count} pixel bytes, found {}",
            data.len()
        )));
    }
    Ok(RawGray {
        width,
        height,
        pixels: data[..count].to_vec(),
    })
}

pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height, "pixel buffer does not match dimensions");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_canonical() {
        let bytes = encode_pgm(3, 2, &[1, 2, 3, 4, 5, 6]);
        assert_eq!(&bytes[..11], b"P5\n3 2\n255\n");
        assert_eq!(&bytes[11..], &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn comments_and_extra_whitespace() {
        let mut bytes = b"P5 # made by hand\n  4\t3 \n# max\n255\n".to_vec();
        bytes.extend(0u8..12);
        let raw = decode_pgm(&bytes).unwrap();
        assert_eq!((raw.width, raw.height), (4, 3));
        assert_eq!(raw.pixels[11], 11);
    }

    #[test]
    fn single_whitespace_after_maxval_allows_whitespace_pixel() {
        // A first pixel value of 0x0A must not be eaten as header whitespace.
        let mut bytes = b"P5\n3 3\n255\n".to_vec();
        bytes.extend([b'\n'; 9]);
        assert_eq!(decode_pgm(&bytes).unwrap().pixels, vec![b'\n'; 9]);
    }

    #[test]
    fn rejects_color_and_other_depths() {
        assert!(matches!(decode_pgm(b"P6\n3 3\n255\n"), Err(Error::ColorImage(_))));
        assert!(matches!(decode_pgm(b"P5\n3 3\n65535\n"), Err(Error::Unsupported(_))));
        assert!(matches!(decode_pgm(b"P2\n3 3\n255\n"), Err(Error::Unsupported(_))));
    }

    #[test]
    fn truncated_inputs_error() {
        for bad in [&b""[..], b"P", b"P5", b"P5\n", b"P5\n3", b"P5\n3 3", b"P5\n3 3\n255", b"P5\n3 3\n255\n\x00"] {
            assert!(decode_pgm(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn huge_header_does_not_allocate() {
        assert!(decode_pgm(b"P5\n4000000000 4000000000\n255\n").is_err());
        assert!(decode_pgm(b"P5\n99999999999999999999 1\n255\n").is_err());
    }
}
