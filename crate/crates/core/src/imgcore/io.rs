//! File formats: sRGB PNG (8/16-bit) for interchange, little-endian PFM
//! for lossless float data, JSON for crops.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{ImageBuffer, Rgb};

use super::color::{decode_srgb, encode_srgb};
use super::{FaceCrop, ImageBuf, ShadowMask};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

/// Loads an sRGB PNG (any bit depth, alpha dropped) into linear light.
pub fn load_png(path: impl AsRef<Path>) -> Result<ImageBuf> {
    let decoded = image::open(path.as_ref())?.to_rgb32f();
    let (w, h) = decoded.dimensions();
    let data = decoded
        .into_raw()
        .into_iter()
        .map(|v| decode_srgb(f64::from(v.clamp(0.0, 1.0))) as f32)
        .collect();
    ImageBuf::new(w as usize, h as usize, data)
}

/// Encodes linear light to sRGB (clamped) and writes a PNG.
pub fn save_png(img: &ImageBuf, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let encode = |v: f32, max: f64| (encode_srgb(f64::from(v)) * max).round();
    match depth {
        BitDepth::Eight => {
            let raw: Vec<u8> = img.data().iter().map(|&v| encode(v, 255.0) as u8).collect();
            let buf: ImageBuffer<Rgb<u8>, _> =
                ImageBuffer::from_raw(w, h, raw).expect("buffer size matches");
            buf.save_with_format(path.as_ref(), image::ImageFormat::Png)?;
        }
        BitDepth::Sixteen => {
            let raw: Vec<u16> = img
                .data()
                .iter()
                .map(|&v| encode(v, 65535.0) as u16)
                .collect();
            let buf: ImageBuffer<Rgb<u16>, _> =
                ImageBuffer::from_raw(w, h, raw).expect("buffer size matches");
            buf.save_with_format(path.as_ref(), image::ImageFormat::Png)?;
        }
    }
    Ok(())
}

/// Serializes a color PFM: `PF`, dimensions, scale `-1.0` (little-endian),
/// rows stored bottom to top.
pub fn encode_pfm(img: &ImageBuf) -> Vec<u8> {
    let (w, h) = img.dims();
    let mut out = format!("PF\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 12);
    for y in (0..h).rev() {
        for v in &img.data()[y * w * 3..(y + 1) * w * 3] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn malformed(reason: impl Into<String>) -> Error {
    Error::Malformed {
        format: "PFM",
        reason: reason.into(),
    }
}

/// Parses color (`PF`) or grayscale (`Pf`, replicated to RGB) PFM data of
/// either endianness.
pub fn decode_pfm(bytes: &[u8]) -> Result<ImageBuf> {
    // Header: three whitespace-separated lines.
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(malformed("truncated header"));
        }
        fields.push(
            std::str::from_utf8(&bytes[start..pos]).map_err(|_| malformed("non-ASCII header"))?,
        );
    }
    // Exactly one whitespace byte separates the scale from the raster.
    pos += 1;
    let channels = match fields[0] {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(malformed(format!("bad magic `{other}`"))),
    };
    let parse_dim = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| malformed(format!("bad {what} `{s}`")))
    };
    let w = parse_dim(fields[1], "width")?;
    let h = parse_dim(fields[2], "height")?;
    let scale: f32 = fields[3]
        .parse()
        .map_err(|_| malformed(format!("bad scale `{}`", fields[3])))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(malformed("scale must be non-zero"));
    }
    let little = scale < 0.0;
    let expected = w * h * channels * 4;
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() != expected {
        return Err(malformed(format!(
            "raster has {} bytes, header implies {expected}",
            raster.len()
        )));
    }
    let mut data = vec![0f32; w * h * 3];
    for (i, chunk) in raster.chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        };
        let pix = i / channels;
        let (fx, fy) = (pix % w, h - 1 - pix / w);
        let base = (fy * w + fx) * 3;
        if channels == 3 {
            data[base + i % 3] = v;
        } else {
            data[base..base + 3].fill(v);
        }
    }
    ImageBuf::new(w, h, data)
}

pub fn save_pfm(img: &ImageBuf, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path.as_ref())?;
    f.write_all(&encode_pfm(img))?;
    Ok(())
}

pub fn load_pfm(path: impl AsRef<Path>) -> Result<ImageBuf> {
    decode_pfm(&fs::read(path.as_ref())?)
}

pub fn save_mask(mask: &ShadowMask, path: impl AsRef<Path>) -> Result<()> {
    save_pfm(mask.image(), path)
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<ShadowMask> {
    ShadowMask::new(load_pfm(path)?)
}

/// Loads `.pfm` as raw linear data and anything else as an sRGB PNG.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuf> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("pfm") => load_pfm(path),
        _ => load_png(path),
    }
}

pub fn load_crop(path: impl AsRef<Path>) -> Result<FaceCrop> {
    Ok(serde_json::from_str(&fs::read_to_string(path.as_ref())?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(w: usize, h: usize) -> ImageBuf {
        ImageBuf::from_fn(w, h, |x, y| {
            [
                x as f32 / w as f32,
                y as f32 / h as f32,
                0.123_456_79 * (x + y) as f32 % 1.0,
            ]
        })
        .unwrap()
    }

    #[test]
    fn pfm_round_trip_is_bit_exact() {
        let img = gradient(7, 5);
        let back = decode_pfm(&encode_pfm(&img)).unwrap();
        assert_eq!(back, img);
        assert!(encode_pfm(&img).starts_with(b"PF\n7 5\n-1.0\n"));
    }

    #[test]
    fn pfm_rows_are_bottom_up() {
        let img = ImageBuf::from_fn(1, 2, |_, y| [y as f32; 3]).unwrap();
        let bytes = encode_pfm(&img);
        let raster = &bytes[bytes.len() - 24..];
        assert_eq!(f32::from_le_bytes(raster[0..4].try_into().unwrap()), 1.0);
    }

    #[test]
    fn pfm_grayscale_and_big_endian() {
        let mut bytes = b"Pf\n2 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&0.25f32.to_be_bytes());
        bytes.extend_from_slice(&0.75f32.to_be_bytes());
        let img = decode_pfm(&bytes).unwrap();
        assert_eq!(img.pixel(0, 0), [0.25; 3]);
        assert_eq!(img.pixel(1, 0), [0.75; 3]);
    }

    #[test]
    fn pfm_rejects_malformed_headers() {
        assert!(decode_pfm(b"P6\n1 1\n-1.0\n").is_err());
        assert!(decode_pfm(b"PF\n1 x\n-1.0\n").is_err());
        assert!(decode_pfm(b"PF\n2 2\n-1.0\n\0\0\0\0").is_err());
        assert!(decode_pfm(b"PF\n1").is_err());
    }

    #[test]
    fn png_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let img = gradient(16, 9);
        for (depth, tol) in [(BitDepth::Eight, 6e-3), (BitDepth::Sixteen, 3e-5)] {
            let p = dir.path().join(format!("{depth:?}.png"));
            save_png(&img, &p, depth).unwrap();
            let back = load_png(&p).unwrap();
            assert_eq!(back.dims(), img.dims());
            for (a, b) in img.data().iter().zip(back.data()) {
                assert!((a - b).abs() < tol, "{depth:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn mask_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mask = ShadowMask::new(gradient(5, 4)).unwrap();
        let p = dir.path().join("m.pfm");
        save_mask(&mask, &p).unwrap();
        assert_eq!(load_mask(&p).unwrap(), mask);
        let bytes = fs::read(&p).unwrap();
        save_mask(&load_mask(&p).unwrap(), &p).unwrap();
        assert_eq!(fs::read(&p).unwrap(), bytes);
    }
}
