use crate::backend::RasterImage;
use crate::geometry::{clip_to_bounds, min_area_rect, Point, Polygon};

/// Rectifies the minimum-area rectangle of `polygon` into an upright patch.
///
/// The patch is `round(long side) x round(short side)` (at least 1x1), its
/// x axis running along the rectangle's long side, pointing right in the
/// source image (downward for exactly vertical boxes). Sampling is bilinear.
pub fn crop_region(image: &RasterImage, polygon: &Polygon) -> Result<RasterImage, String> {
    let clipped = clip_to_bounds(polygon, image.width() as f64, image.height() as f64)
        .ok_or_else(|| "region lies outside the image".to_string())?;
    let rect = min_area_rect(clipped.vertices()).map_err(|e| e.to_string())?;
    let (u, v) = rect.axes();
    let (long, short, along) = if rect.width >= rect.height {
        (rect.width, rect.height, u)
    } else {
        (rect.height, rect.width, v)
    };
    let across = Point::new(-along.y, along.x);
    let out_w = (long.round() as usize).max(1);
    let out_h = (short.round() as usize).max(1);
    let ch = image.channels();
    let mut data = Vec::with_capacity(out_w * out_h * ch);
    for r in 0..out_h {
        let fy = ((r as f64 + 0.5) / out_h as f64 - 0.5) * short;
        for c in 0..out_w {
            let fx = ((c as f64 + 0.5) / out_w as f64 - 0.5) * long;
            let p = rect.center + along * fx + across * fy;
            for k in 0..ch {
                data.push(image.sample(p.x, p.y, k).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RasterImage::new(out_h, out_w, ch, data).map_err(|e| e.to_string())
}
