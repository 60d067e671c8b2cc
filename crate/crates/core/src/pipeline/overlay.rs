use std::fmt::Write as _;
use std::path::Path;

use base64::Engine;

use super::{encode_png, save_image, DocumentResult, PipelineError};
use crate::backend::RasterImage;
use crate::geometry::Polygon;

const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [128, 128, 0],
];

/// Outline color for a class index; `None` is used when no classes exist.
pub fn class_color(class: Option<usize>) -> [u8; 3] {
    match class {
        None => [255, 215, 0],
        Some(k) => PALETTE[k % PALETTE.len()],
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' => {}
            c => out.push(c),
        }
    }
    out
}

fn label(result: &DocumentResult, i: usize, class_names: &[String]) -> Option<String> {
    let text = result.transcriptions.get(i).map(|t| t.text.clone());
    let class = result.kie_classes.get(i).and_then(|&k| class_names.get(k)).cloned();
    match (text, class) {
        (Some(t), Some(c)) => Some(format!("{t} [{c}]")),
        (Some(t), None) => Some(t),
        (None, Some(c)) => Some(format!("[{c}]")),
        (None, None) => None,
    }
}

/// An SVG document with the image embedded and one outlined polygon per
/// detection, colored by its class.
pub fn render_svg(image: &RasterImage, result: &DocumentResult, class_names: &[String]) -> Result<String, PipelineError> {
    let png = encode_png(image).map_err(|message| PipelineError::Io { path: result.image.clone(), message })?;
    let (w, h) = (image.width(), image.height());
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<image width="{w}" height="{h}" href="data:image/png;base64,{}"/>"#,
        base64::engine::general_purpose::STANDARD.encode(png)
    );
    for (i, d) in result.detections.iter().enumerate() {
        let [r, g, b] = class_color(result.kie_classes.get(i).copied());
        let points: Vec<String> = d.polygon.vertices().iter().map(|p| format!("{:.2},{:.2}", p.x, p.y)).collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="none" stroke="rgb({r},{g},{b})" stroke-width="2"/>"#,
            points.join(" ")
        );
        if let Some(text) = label(result, i, class_names) {
            let (lo, _) = d.polygon.bounds();
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="rgb({r},{g},{b})" font-size="12">{}</text>"#,
                lo.x,
                (lo.y - 2.0).max(10.0),
                escape(&text)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn put(img: &mut RasterImage, x: i64, y: i64, color: [u8; 3]) {
    if x < 0 || y < 0 || x as usize >= img.width() || y as usize >= img.height() {
        return;
    }
    let px = img.pixel_mut(y as usize, x as usize);
    if px.len() == 3 {
        px.copy_from_slice(&color);
    } else {
        px[0] = ((color[0] as u32 + color[1] as u32 + color[2] as u32) / 3) as u8;
    }
}

fn draw_line(img: &mut RasterImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), color: [u8; 3]) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        put(img, x, y, color);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

fn draw_polygon(img: &mut RasterImage, polygon: &Polygon, color: [u8; 3]) {
    let pts: Vec<(i64, i64)> = polygon.vertices().iter().map(|p| (p.x.floor() as i64, p.y.floor() as i64)).collect();
    for i in 0..pts.len() {
        draw_line(img, pts[i], pts[(i + 1) % pts.len()], color);
    }
}

/// Writes an overlay to `path`: SVG when the extension is `svg`, otherwise
/// a raster copy with polygon outlines (text labels are SVG only).
pub fn render_overlay(
    image: &RasterImage,
    result: &DocumentResult,
    class_names: &[String],
    path: &Path,
) -> Result<(), PipelineError> {
    let io_err = |message: String| PipelineError::Io { path: path.display().to_string(), message };
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg")) {
        let svg = render_svg(image, result, class_names)?;
        return std::fs::write(path, svg).map_err(|e| io_err(e.to_string()));
    }
    let mut out = image.clone();
    for (i, d) in result.detections.iter().enumerate() {
        draw_polygon(&mut out, &d.polygon, class_color(result.kie_classes.get(i).copied()));
    }
    save_image(&out, path).map_err(io_err)
}
