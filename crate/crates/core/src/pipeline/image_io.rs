use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::backend::RasterImage;

/// Decodes PNG, JPEG or BMP into 8-bit RGB.
pub fn load_image(path: &Path) -> Result<RasterImage, String> {
    let img = image::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    from_dynamic(img)
}

pub fn decode_image(bytes: &[u8]) -> Result<RasterImage, String> {
    from_dynamic(image::load_from_memory(bytes).map_err(|e| e.to_string())?)
}

fn from_dynamic(img: DynamicImage) -> Result<RasterImage, String> {
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    RasterImage::new(h as usize, w as usize, 3, rgb.into_raw()).map_err(|e| e.to_string())
}

fn to_dynamic(img: &RasterImage) -> DynamicImage {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let data = img.data().to_vec();
    if img.channels() == 1 {
        DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, data).expect("sizes checked on construction"))
    } else {
        DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, data).expect("sizes checked on construction"))
    }
}

pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>, String> {
    let mut buf = Cursor::new(Vec::new());
    to_dynamic(img).write_to(&mut buf, ImageFormat::Png).map_err(|e| e.to_string())?;
    Ok(buf.into_inner())
}

pub fn save_image(img: &RasterImage, path: &Path) -> Result<(), String> {
    to_dynamic(img).save(path).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip() {
        let data: Vec<u8> = (0..4 * 5 * 3).map(|i| (i * 7) as u8).collect();
        let img = RasterImage::new(4, 5, 3, data).unwrap();
        assert_eq!(decode_image(&encode_png(&img).unwrap()).unwrap(), img);
    }

    #[test]
    fn gray_becomes_rgb() {
        let img = RasterImage::new(2, 2, 1, vec![0, 50, 100, 150]).unwrap();
        let back = decode_image(&encode_png(&img).unwrap()).unwrap();
        assert_eq!(back.channels(), 3);
        assert_eq!(back.pixel(1, 0), &[100, 100, 100]);
    }

    #[test]
    fn garbage_rejected() {
        assert!(decode_image(b"not an image").is_err());
    }
}
