use crate::error::{Error, Result};

/// H×W×3 linear-light image, row-major, interleaved RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuf {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

pub(crate) fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { width, height });
    }
    Ok(())
}

fn check_finite(data: &[f32]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

impl ImageBuf {
    pub const CHANNELS: usize = 3;

    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height * 3 {
            return Err(Error::BufferLength {
                width,
                height,
                channels: 3,
                got: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width * height * 3)
            .collect();
        Self::new(width, height, data)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f32; 3],
    ) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Builds without re-validating; callers guarantee finiteness.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height * 3);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self {
            width,
            height,
            data,
        }
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

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn pixels(&self) -> impl Iterator<Item = [f32; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    pub fn ensure_same_dims(&self, other: &ImageBuf) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::ShapeMismatch {
                expected: self.dims(),
                got: other.dims(),
            });
        }
        Ok(())
    }

    /// Applies `f` to every sample; the result must stay finite.
    pub fn map(&self, mut f: impl FnMut(f32) -> f32) -> Result<ImageBuf> {
        ImageBuf::new(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Channel `c` as a scalar plane.
    pub fn channel(&self, c: usize) -> Plane {
        assert!(c < 3, "channel {c} out of range");
        Plane::from_raw(
            self.width,
            self.height,
            self.data
                .iter()
                .skip(c)
                .step_by(3)
                .map(|&v| f64::from(v))
                .collect(),
        )
    }

    /// Reassembles three planes into an image, rounding to f32.
    pub fn from_channels(planes: [&Plane; 3]) -> Result<ImageBuf> {
        let (w, h) = planes[0].dims();
        for p in &planes[1..] {
            if p.dims() != (w, h) {
                return Err(Error::ShapeMismatch {
                    expected: (w, h),
                    got: p.dims(),
                });
            }
        }
        let mut data = Vec::with_capacity(w * h * 3);
        for i in 0..w * h {
            for p in &planes {
                data.push(p.data()[i] as f32);
            }
        }
        ImageBuf::new(w, h, data)
    }

    /// Bilinear sample with pixel centers on integer coordinates and
    /// edge-clamped borders.
    pub fn sample(&self, x: f64, y: f64) -> [f32; 3] {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let x = x.clamp(0.0, max_x);
        let y = y.clamp(0.0, max_y);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let tx = x - x0 as f64;
        let ty = y - y0 as f64;
        if tx == 0.0 && ty == 0.0 {
            return self.pixel(x0, y0);
        }
        let p00 = self.pixel(x0, y0);
        let p10 = self.pixel(x1, y0);
        let p01 = self.pixel(x0, y1);
        let p11 = self.pixel(x1, y1);
        let mut out = [0.0f32; 3];
        for c in 0..3 {
            let top = f64::from(p00[c]) * (1.0 - tx) + f64::from(p10[c]) * tx;
            let bottom = f64::from(p01[c]) * (1.0 - tx) + f64::from(p11[c]) * tx;
            out[c] = (top * (1.0 - ty) + bottom * ty) as f32;
        }
        out
    }

    /// Bilinear sample where pixel `(c, r)` is centered at `(c + 0.5, r + 0.5)`.
    pub fn sample_at_center_coords(&self, x: f64, y: f64) -> [f32; 3] {
        self.sample(x - 0.5, y - 0.5)
    }
}

/// Single-channel f64 field used for noise, blur and metric intermediates.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::BufferLength {
                width,
                height,
                channels: 1,
                got: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane::from_raw(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Affine remap of the field's own [min, max] onto [0, 1]. A flat
    /// field maps to all zeros.
    pub fn normalized(&self) -> Plane {
        let (lo, hi) = self.min_max();
        let span = hi - lo;
        if span <= 0.0 {
            return self.map(|_| 0.0);
        }
        self.map(|v| ((v - lo) / span).clamp(0.0, 1.0))
    }
}

/// H×W×3 blend mask with every sample in [0, 1]; 1 means fully shadowed.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowMask(ImageBuf);

impl ShadowMask {
    pub fn new(image: ImageBuf) -> Result<Self> {
        if let Some((index, &value)) = image
            .data()
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::MaskRange { index, value });
        }
        Ok(Self(image))
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(ImageBuf::filled(width, height, [value; 3])?)
    }

    /// Replicates a scalar field into all three channels.
    pub fn from_plane(plane: &Plane) -> Result<Self> {
        Self::from_planes([plane, plane, plane])
    }

    pub fn from_planes(planes: [&Plane; 3]) -> Result<Self> {
        let clamped = planes.map(|p| p.map(|v| v.clamp(0.0, 1.0)));
        Self::new(ImageBuf::from_channels([
            &clamped[0],
            &clamped[1],
            &clamped[2],
        ])?)
    }

    pub fn image(&self) -> &ImageBuf {
        &self.0
    }

    pub fn into_image(self) -> ImageBuf {
        self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn data(&self) -> &[f32] {
        self.0.data()
    }

    pub fn channel(&self, c: usize) -> Plane {
        self.0.channel(c)
    }
}

/// Channel-stacked buffer, e.g. an image concatenated with its mirror.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStack {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ChannelStack {
    pub fn concat(parts: &[&ImageBuf]) -> Result<Self> {
        let first = parts.first().ok_or(Error::LengthMismatch {
            expected: 1,
            got: 0,
        })?;
        for p in &parts[1..] {
            first.ensure_same_dims(p)?;
        }
        let (width, height) = first.dims();
        let channels = 3 * parts.len();
        let mut data = Vec::with_capacity(width * height * channels);
        for i in 0..width * height {
            for p in parts {
                data.extend_from_slice(&p.data()[i * 3..i * 3 + 3]);
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(
            ImageBuf::new(0, 4, vec![]),
            Err(Error::EmptyImage { .. })
        ));
        assert!(matches!(
            ImageBuf::new(2, 2, vec![0.0; 11]),
            Err(Error::BufferLength { .. })
        ));
        let mut data = vec![0.5; 12];
        data[7] = f32::NAN;
        assert!(matches!(
            ImageBuf::new(2, 2, data),
            Err(Error::NonFinite { index: 7 })
        ));
    }

    #[test]
    fn mask_range_is_enforced() {
        let img = ImageBuf::filled(2, 2, [0.5, 1.2, 0.0]).unwrap();
        assert!(matches!(
            ShadowMask::new(img),
            Err(Error::MaskRange { index: 1, .. })
        ));
    }

    #[test]
    fn bilinear_sample_hits_pixels_and_midpoints() {
        let img = ImageBuf::from_fn(3, 2, |x, y| [x as f32, y as f32, (x + y) as f32]).unwrap();
        assert_eq!(img.sample(2.0, 1.0), img.pixel(2, 1));
        assert_eq!(img.sample(0.5, 0.5), [0.5, 0.5, 1.0]);
        assert_eq!(img.sample(-4.0, 9.0), img.pixel(0, 1));
        assert_eq!(img.sample_at_center_coords(1.5, 0.5), img.pixel(1, 0));
    }

    #[test]
    fn normalized_plane_spans_unit_interval() {
        let p = Plane::from_fn(4, 3, |x, y| (x * 3 + y) as f64 - 2.0).unwrap();
        let (lo, hi) = p.normalized().min_max();
        assert_eq!((lo, hi), (0.0, 1.0));
        assert_eq!(
            Plane::filled(2, 2, 3.0).unwrap().normalized().min_max(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn channel_stack_interleaves() {
        let a = ImageBuf::filled(2, 1, [1.0, 2.0, 3.0]).unwrap();
        let b = ImageBuf::filled(2, 1, [4.0, 5.0, 6.0]).unwrap();
        let s = ChannelStack::concat(&[&a, &b]).unwrap();
        assert_eq!(s.channels(), 6);
        assert_eq!(&s.data()[..6], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }
}
