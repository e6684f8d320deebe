//! Binary PGM (P5) and PBM (P4) reading and writing.

use std::fs;
use std::path::Path;

use super::{BinaryImage, GrayImage, RasterError};

/// Writes an 8-bit grayscale buffer as P5.
pub fn write_pgm(path: &Path, width: usize, height: usize, data: &[u8]) -> Result<(), RasterError> {
    assert_eq!(data.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(data);
    fs::write(path, out)?;
    Ok(())
}

/// Writes a grayscale image (intensity 1 = ink) as P5, ink rendered dark.
pub fn write_gray_pgm(path: &Path, img: &GrayImage) -> Result<(), RasterError> {
    let data: Vec<u8> = img
        .values
        .iter()
        .map(|&v| 255 - (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    write_pgm(path, img.width, img.height, &data)
}

/// Writes a binary image as P4 (1 bits are black).
pub fn write_pbm(path: &Path, img: &BinaryImage) -> Result<(), RasterError> {
    let (w, h) = (img.width(), img.height());
    let mut out = format!("P4\n{w} {h}\n").into_bytes();
    let stride = w.div_ceil(8);
    for y in 0..h {
        let mut row = vec![0u8; stride];
        for x in 0..w {
            if img.get(x, y) {
                row[x / 8] |= 0x80 >> (x % 8);
            }
        }
        out.extend_from_slice(&row);
    }
    fs::write(path, out)?;
    Ok(())
}

struct Header {
    magic: [u8; 2],
    fields: Vec<usize>,
    data_start: usize,
}

fn parse_header(bytes: &[u8], n_fields: usize) -> Result<Header, RasterError> {
    if bytes.len() < 2 {
        return Err(RasterError::Malformed("missing magic".into()));
    }
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut fields = Vec::with_capacity(n_fields);
    while fields.len() < n_fields {
        // whitespace and comments
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap_or("");
        let v = text
            .parse()
            .map_err(|_| RasterError::Malformed(format!("bad header field {text:?}")))?;
        fields.push(v);
    }
    // exactly one whitespace byte separates header and raster
    Ok(Header {
        magic,
        fields,
        data_start: pos + 1,
    })
}

/// Reads a P4 file.
pub fn read_pbm(path: &Path) -> Result<BinaryImage, RasterError> {
    let bytes = fs::read(path)?;
    let hdr = parse_header(&bytes, 2)?;
    if &hdr.magic != b"P4" {
        return Err(RasterError::Malformed("not a P4 file".into()));
    }
    let (w, h) = (hdr.fields[0], hdr.fields[1]);
    let stride = w.div_ceil(8);
    let data = &bytes[hdr.data_start.min(bytes.len())..];
    if data.len() < stride * h {
        return Err(RasterError::Truncated {
            expected: stride * h,
            found: data.len(),
        });
    }
    let mut img = BinaryImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if data[y * stride + x / 8] & (0x80 >> (x % 8)) != 0 {
                img.set(x, y, true);
            }
        }
    }
    Ok(img)
}

/// Reads a P5 file (maxval ≤ 255) as intensities where dark pixels are ink:
/// value = 1 - gray / maxval.
pub fn read_pgm(path: &Path) -> Result<GrayImage, RasterError> {
    let bytes = fs::read(path)?;
    let hdr = parse_header(&bytes, 3)?;
    if &hdr.magic != b"P5" {
        return Err(RasterError::Malformed("not a P5 file".into()));
    }
    let (w, h, maxval) = (hdr.fields[0], hdr.fields[1], hdr.fields[2]);
    if maxval == 0 || maxval > 255 {
        return Err(RasterError::Malformed(format!("unsupported maxval {maxval}")));
    }
    let data = &bytes[hdr.data_start.min(bytes.len())..];
    if data.len() < w * h {
        return Err(RasterError::Truncated {
            expected: w * h,
            found: data.len(),
        });
    }
    let values = data[..w * h]
        .iter()
        .map(|&g| 1.0 - (g as f32 / maxval as f32).min(1.0))
        .collect();
    Ok(GrayImage::new(w, h, values, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pbm_roundtrip_odd_width() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pbm");
        let img = BinaryImage::from_ascii(&["#.#.#.#.#.#", "...........", "##########."]);
        write_pbm(&p, &img).unwrap();
        assert_eq!(read_pbm(&p).unwrap(), img);
    }

    #[test]
    fn pgm_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        let img = GrayImage::new(3, 1, vec![0.0, 1.0, 0.0], None);
        write_gray_pgm(&p, &img).unwrap();
        assert_eq!(read_pgm(&p).unwrap().values, img.values);
    }
}
