//! IDX reader (the MNIST container format). Gzip-compressed files are
//! detected by their magic bytes and decompressed transparently.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use super::{GrayImage, RasterError};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

fn read_bytes(path: &Path) -> Result<Vec<u8>, RasterError> {
    let raw = fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32, RasterError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(RasterError::Truncated {
            expected: at + 4,
            found: bytes.len(),
        })
}

/// Parses an IDX3 image payload into images with intensities in `[0, 1]`.
pub fn load_idx_images(bytes: &[u8]) -> Result<Vec<GrayImage>, RasterError> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(RasterError::BadMagic {
            found: magic,
            expected: IMAGE_MAGIC,
        });
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let expected = 16 + count * rows * cols;
    if bytes.len() < expected {
        return Err(RasterError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    Ok(bytes[16..expected]
        .chunks_exact((rows * cols).max(1))
        .take(count)
        .map(|chunk| {
            let values = chunk.iter().map(|&b| b as f32 / 255.0).collect();
            GrayImage::new(cols, rows, values, None)
        })
        .collect())
}

/// Parses an IDX1 label payload.
pub fn load_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, RasterError> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(RasterError::BadMagic {
            found: magic,
            expected: LABEL_MAGIC,
        });
    }
    let count = be_u32(bytes, 4)? as usize;
    let expected = 8 + count;
    if bytes.len() < expected {
        return Err(RasterError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    Ok(bytes[8..expected].to_vec())
}

/// Loads an IDX image file, pairing each image with its label when a
/// companion label file is given.
pub fn load_idx(images: &Path, labels: Option<&Path>) -> Result<Vec<GrayImage>, RasterError> {
    let mut imgs = load_idx_images(&read_bytes(images)?)?;
    if let Some(path) = labels {
        let labs = load_idx_labels(&read_bytes(path)?)?;
        if labs.len() != imgs.len() {
            return Err(RasterError::CountMismatch {
                images: imgs.len(),
                labels: labs.len(),
            });
        }
        for (img, lab) in imgs.iter_mut().zip(labs) {
            img.label = Some(lab);
        }
    }
    Ok(imgs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(magic: u32, dims: &[u32]) -> Vec<u8> {
        let mut v = magic.to_be_bytes().to_vec();
        for d in dims {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v
    }

    #[test]
    fn empty_payload() {
        let bytes = header(IMAGE_MAGIC, &[0, 28, 28]);
        assert!(load_idx_images(&bytes).unwrap().is_empty());
    }

    #[test]
    fn rescales_intensities() {
        let mut bytes = header(IMAGE_MAGIC, &[1, 1, 2]);
        bytes.extend_from_slice(&[0, 255]);
        let imgs = load_idx_images(&bytes).unwrap();
        assert_eq!(imgs[0].values, vec![0.0, 1.0]);
        assert_eq!((imgs[0].width, imgs[0].height), (2, 1));
    }

    #[test]
    fn bad_magic_and_truncation() {
        let bytes = header(LABEL_MAGIC, &[0, 28, 28]);
        assert!(matches!(
            load_idx_images(&bytes),
            Err(RasterError::BadMagic { .. })
        ));
        let mut bytes = header(IMAGE_MAGIC, &[2, 2, 2]);
        bytes.extend_from_slice(&[1, 2, 3]);
        assert!(matches!(
            load_idx_images(&bytes),
            Err(RasterError::Truncated { .. })
        ));
    }

    #[test]
    fn label_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let ip = dir.path().join("img");
        let lp = dir.path().join("lab");
        let mut img = header(IMAGE_MAGIC, &[2, 1, 1]);
        img.extend_from_slice(&[0, 9]);
        let mut lab = header(LABEL_MAGIC, &[3]);
        lab.extend_from_slice(&[1, 2, 3]);
        fs::write(&ip, img).unwrap();
        fs::write(&lp, lab).unwrap();
        assert!(matches!(
            load_idx(&ip, Some(&lp)),
            Err(RasterError::CountMismatch { images: 2, labels: 3 })
        ));
    }
}
