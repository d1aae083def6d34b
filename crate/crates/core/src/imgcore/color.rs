//! sRGB transfer function (IEC 61966-2-1) and luma weights.

use super::ImageBuf;
use crate::error::{Error, Result};

/// Rec. 709 / sRGB luminance weights for linear RGB.
pub const LUMA_REC709: [f64; 3] = [0.2126, 0.7152, 0.0722];

pub fn decode_srgb(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

pub fn encode_srgb(l: f64) -> f64 {
    let l = l.clamp(0.0, 1.0);
    if l <= 0.003_130_8 {
        l * 12.92
    } else {
        1.055 * l.powf(1.0 / 2.4) - 0.055
    }
}

pub fn luma(rgb: [f32; 3]) -> f64 {
    rgb.iter()
        .zip(LUMA_REC709)
        .map(|(&c, w)| f64::from(c) * w)
        .sum()
}

/// Decodes an sRGB-encoded image to linear light. Samples must lie in [0, 1].
pub fn srgb_to_linear(encoded: &ImageBuf) -> Result<ImageBuf> {
    if let Some((index, &v)) = encoded
        .data()
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(Error::param(
            "encoded",
            format!("sample {v} at index {index} is outside [0, 1]"),
        ));
    }
    encoded.map(|v| decode_srgb(f64::from(v)) as f32)
}

/// Encodes linear light to sRGB, clamping to [0, 1] first.
pub fn linear_to_srgb(linear: &ImageBuf) -> Result<ImageBuf> {
    linear.map(|v| encode_srgb(f64::from(v)) as f32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent evaluation of the IEC decode at 0.5.
    fn reference_decode_half() -> f64 {
        ((0.5f64 + 0.055) / 1.055).powf(2.4)
    }

    #[test]
    fn fixed_points_and_midpoint() {
        let img = ImageBuf::new(3, 1, vec![0.0, 1.0, 0.5, 0.0, 1.0, 0.5, 0.0, 1.0, 0.5]).unwrap();
        let lin = srgb_to_linear(&img).unwrap();
        assert_eq!(lin.pixel(0, 0)[0], 0.0);
        assert_eq!(lin.pixel(0, 0)[1], 1.0);
        let half = f64::from(lin.pixel(0, 0)[2]);
        assert!((half - reference_decode_half()).abs() < 1e-7);
        assert!((half - 0.2140).abs() < 1e-4);
        let enc = linear_to_srgb(&lin).unwrap();
        assert_eq!(enc.pixel(0, 0)[0], 0.0);
        assert_eq!(enc.pixel(0, 0)[1], 1.0);
    }

    #[test]
    fn encode_clamps_headroom() {
        let img = ImageBuf::filled(1, 1, [2.5, -0.1, 1.0]).unwrap();
        assert_eq!(linear_to_srgb(&img).unwrap().pixel(0, 0), [1.0, 0.0, 1.0]);
    }

    #[test]
    fn decode_rejects_out_of_range() {
        let img = ImageBuf::filled(1, 1, [1.5, 0.0, 0.0]).unwrap();
        assert!(srgb_to_linear(&img).is_err());
    }

    #[test]
    fn round_trip_on_uniform_grid() {
        use rand::Rng;
        let mut rng = crate::rng::stream(11);
        let data: Vec<f32> = (0..1002).map(|_| rng.random::<f32>()).collect();
        let img = ImageBuf::new(334, 1, data.clone()).unwrap();
        let back = linear_to_srgb(&srgb_to_linear(&img).unwrap()).unwrap();
        for (a, b) in data.iter().zip(back.data()) {
            assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn decode_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(decode_srgb(lo) <= decode_srgb(hi));
            prop_assert!(encode_srgb(lo) <= encode_srgb(hi));
        }
    }
}
