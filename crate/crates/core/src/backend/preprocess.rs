use super::{BackendError, ModelSpec, ResizePolicy, Tensor};
use crate::detpost::Detection;
use crate::geometry::{clip_to_bounds, Point, Polygon};

/// Interleaved 8-bit image, row-major `H x W x C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<u8>,
}

impl RasterImage {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<u8>) -> Result<Self, BackendError> {
        if height == 0 || width == 0 {
            return Err(BackendError::Shape("image must be non-empty".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(BackendError::UnsupportedChannels(channels));
        }
        if data.len() != height * width * channels {
            return Err(BackendError::Shape(format!(
                "{height}x{width}x{channels} image needs {} bytes, got {}",
                height * width * channels,
                data.len()
            )));
        }
        Ok(Self { height, width, channels, data })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: u8) -> Result<Self, BackendError> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> &[u8] {
        let i = (row * self.width + col) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn pixel_mut(&mut self, row: usize, col: usize) -> &mut [u8] {
        let i = (row * self.width + col) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    /// Bilinear sample of channel `ch` at continuous pixel coordinates, where
    /// pixel `(r, c)` has its center at `(c + 0.5, r + 0.5)`. Edges clamp.
    pub fn sample(&self, x: f64, y: f64, ch: usize) -> f64 {
        let fx = (x - 0.5).clamp(0.0, (self.width - 1) as f64);
        let fy = (y - 0.5).clamp(0.0, (self.height - 1) as f64);
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(self.width - 1), (y0 + 1).min(self.height - 1));
        let (ax, ay) = (fx - x0 as f64, fy - y0 as f64);
        let v = |r: usize, c: usize| f64::from(self.data[(r * self.width + c) * self.channels + ch]);
        let top = v(y0, x0) * (1.0 - ax) + v(y0, x1) * ax;
        let bottom = v(y1, x0) * (1.0 - ax) + v(y1, x1) * ax;
        top * (1.0 - ay) + bottom * ay
    }
}

/// Geometry of one preprocessing call, kept for mapping results back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessRecord {
    pub orig_height: usize,
    pub orig_width: usize,
    /// Size of the resized image content inside the tensor.
    pub content_height: usize,
    pub content_width: usize,
    /// Tensor spatial size, padding included.
    pub input_height: usize,
    pub input_width: usize,
}

impl PreprocessRecord {
    pub fn scale_x(&self) -> f64 {
        self.content_width as f64 / self.orig_width as f64
    }

    pub fn scale_y(&self) -> f64 {
        self.content_height as f64 / self.orig_height as f64
    }

    pub fn to_input(&self, p: Point) -> Point {
        Point::new(p.x * self.scale_x(), p.y * self.scale_y())
    }

    pub fn to_original(&self, p: Point) -> Point {
        Point::new(p.x / self.scale_x(), p.y / self.scale_y())
    }
}

fn target_size(h: usize, w: usize, spec: &ModelSpec) -> Result<(usize, usize, usize, usize), BackendError> {
    let (th, tw) = (spec.input.height, spec.input.width);
    let scaled = |v: usize, s: f64| ((v as f64 * s).round() as usize).max(1);
    Ok(match spec.input.resize {
        ResizePolicy::None => {
            if th.is_some_and(|t| t != h) || tw.is_some_and(|t| t != w) {
                return Err(BackendError::Shape(format!(
                    "image is {h}x{w} but the model input is fixed at {th:?}x{tw:?} without resizing"
                )));
            }
            (h, w, h, w)
        }
        ResizePolicy::Stretch => {
            let (ch, cw) = match (th, tw) {
                (Some(a), Some(b)) => (a, b),
                (Some(a), None) => (a, scaled(w, a as f64 / h as f64)),
                (None, Some(b)) => (scaled(h, b as f64 / w as f64), b),
                (None, None) => (h, w),
            };
            (ch, cw, ch, cw)
        }
        ResizePolicy::FitPad => {
            let (th, tw) = (th.expect("validated"), tw.expect("validated"));
            let s = (th as f64 / h as f64).min(tw as f64 / w as f64);
            (scaled(h, s).min(th), scaled(w, s).min(tw), th, tw)
        }
    })
}

/// Resizes, scales bytes to [0,1], normalizes per channel and lays the
/// result out as `[1, C, H, W]`. Padding is zero in tensor space.
pub fn preprocess(image: &RasterImage, spec: &ModelSpec) -> Result<(Tensor, PreprocessRecord), BackendError> {
    let c = spec.input.channels;
    if c != 1 && c != 3 {
        return Err(BackendError::UnsupportedChannels(c));
    }
    let (h, w) = (image.height(), image.width());
    let (ch, cw, ih, iw) = target_size(h, w, spec)?;
    let record = PreprocessRecord {
        orig_height: h,
        orig_width: w,
        content_height: ch,
        content_width: cw,
        input_height: ih,
        input_width: iw,
    };
    let mean = |k: usize| f64::from(spec.input.mean.get(k).copied().unwrap_or(0.0));
    let std = |k: usize| f64::from(spec.input.std.get(k).copied().unwrap_or(1.0));
    let identity = ch == h && cw == w;
    let (sx, sy) = (w as f64 / cw as f64, h as f64 / ch as f64);

    let mut data = vec![0.0f32; c * ih * iw];
    for r in 0..ch {
        for col in 0..cw {
            let mut src = [0.0f64; 3];
            for (k, s) in src.iter_mut().enumerate().take(image.channels()) {
                *s = if identity {
                    f64::from(image.pixel(r, col)[k])
                } else {
                    image.sample((col as f64 + 0.5) * sx, (r as f64 + 0.5) * sy, k)
                };
            }
            for k in 0..c {
                let v = match (image.channels(), c) {
                    (1, _) => src[0],
                    (3, 1) => (src[0] + src[1] + src[2]) / 3.0,
                    _ => src[k],
                };
                data[(k * ih + r) * iw + col] = ((v / 255.0 - mean(k)) / std(k)) as f32;
            }
        }
    }
    Ok((Tensor::new(vec![1, c, ih, iw], data)?, record))
}

/// Maps a polygon from tensor space back to the original image, clipped to
/// its bounds. `None` when nothing remains inside.
pub fn map_polygon(p: &Polygon, record: &PreprocessRecord) -> Option<Polygon> {
    let pts: Vec<Point> = p.vertices().iter().map(|&v| record.to_original(v)).collect();
    let mapped = Polygon::new(pts).ok()?;
    clip_to_bounds(&mapped, record.orig_width as f64, record.orig_height as f64)
}

pub fn map_coords(detections: &[Detection], record: &PreprocessRecord) -> Vec<Detection> {
    detections
        .iter()
        .filter_map(|d| map_polygon(&d.polygon, record).map(|polygon| Detection { polygon, score: d.score }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::{ModelSpec, OutputRole};
    use super::*;

    fn spec(h: Option<usize>, w: Option<usize>, resize: ResizePolicy) -> ModelSpec {
        let mut s = ModelSpec::with_roles(&[OutputRole::ProbMap]);
        s.input.height = h;
        s.input.width = w;
        s.input.resize = resize;
        s.validated().unwrap()
    }

    #[test]
    fn identity_scaling() {
        let data: Vec<u8> = (0..32 * 32 * 3).map(|i| (i % 251) as u8).collect();
        let img = RasterImage::new(32, 32, 3, data.clone()).unwrap();
        let (t, _) = preprocess(&img, &spec(Some(32), Some(32), ResizePolicy::Stretch)).unwrap();
        assert_eq!(t.shape(), &[1, 3, 32, 32]);
        for r in 0..32 {
            for c in 0..32 {
                for k in 0..3 {
                    let expect = f32::from(data[(r * 32 + c) * 3 + k]) / 255.0;
                    assert_eq!(t.data()[(k * 32 + r) * 32 + c], expect);
                }
            }
        }
    }

    #[test]
    fn mid_gray_normalizes_to_zero() {
        let img = RasterImage::filled(8, 8, 3, 128).unwrap();
        let mut s = spec(None, None, ResizePolicy::None);
        s.input.mean = vec![0.5; 3];
        s.input.std = vec![0.5; 3];
        let (t, _) = preprocess(&img, &s).unwrap();
        assert!(t.data().iter().all(|&v| v.abs() < 0.5 / 127.5 * 1.01));
    }

    #[test]
    fn fit_pad_record() {
        let img = RasterImage::filled(50, 100, 3, 200).unwrap();
        let (t, rec) = preprocess(&img, &spec(Some(64), Some(64), ResizePolicy::FitPad)).unwrap();
        assert_eq!((rec.content_height, rec.content_width), (32, 64));
        assert_eq!(rec.scale_x(), 0.64);
        assert_eq!(rec.scale_y(), 0.64);
        assert_eq!(t.data()[63 * 64], 0.0);
        let corner = rec.to_original(rec.to_input(Point::new(100.0, 50.0)));
        assert!(corner.distance(Point::new(100.0, 50.0)) < 1.0);
    }

    #[test]
    fn aspect_preserving_height() {
        let img = RasterImage::filled(16, 40, 1, 0).unwrap();
        let (t, _) = preprocess(&img, &spec(Some(32), None, ResizePolicy::Stretch)).unwrap();
        assert_eq!(t.shape(), &[1, 3, 32, 80]);
    }

    #[test]
    fn fixed_size_without_resize_is_a_shape_error() {
        let img = RasterImage::filled(16, 16, 3, 0).unwrap();
        assert!(matches!(preprocess(&img, &spec(Some(32), None, ResizePolicy::None)), Err(BackendError::Shape(_))));
    }

    #[test]
    fn map_back_doubles_on_half_scale() {
        let rec = PreprocessRecord {
            orig_height: 100,
            orig_width: 100,
            content_height: 50,
            content_width: 50,
            input_height: 50,
            input_width: 50,
        };
        let p = map_polygon(&Polygon::rect(5.0, 5.0, 10.0, 10.0).unwrap(), &rec).unwrap();
        assert_eq!(p.bounds(), (Point::new(10.0, 10.0), Point::new(30.0, 30.0)));
        let outside = Polygon::rect(40.0, 40.0, 20.0, 20.0).unwrap();
        assert_eq!(map_polygon(&outside, &rec).unwrap().bounds().1, Point::new(100.0, 100.0));
    }
}
