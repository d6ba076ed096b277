//! Debug rasterization of a frame to a binary PPM image.

use crate::geometry::{BBox, Point};
use crate::view::{Layer, MarkerKind, Overlay, SceneFrame};

pub type Rgb = [u8; 3];

pub struct Canvas {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
}

impl Canvas {
    pub fn new(width: u32, height: u32, fill: Rgb) -> Self {
        Self {
            width,
            height,
            pixels: vec![fill; (width * height) as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[(y * self.width + x) as usize]
    }

    fn put(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && (x as u32) < self.width && (y as u32) < self.height {
            let i = (y as u32 * self.width + x as u32) as usize;
            self.pixels[i] = c;
        }
    }

    /// Even-odd scanline fill sampled at pixel centres, rows `[y0, y1)`.
    pub fn fill_polygon(&mut self, poly: &[Point], c: Rgb, y0: u32, y1: u32) {
        let Some(b) = BBox::of(poly) else { return };
        let n = poly.len();
        if n < 3 {
            return;
        }
        let top = (b.min_y.floor().max(y0 as f64)) as u32;
        let bottom = (b.max_y.ceil().min(y1 as f64).min(self.height as f64)) as u32;
        let mut xs = Vec::new();
        for y in top..bottom {
            let yc = y as f64 + 0.5;
            xs.clear();
            for i in 0..n {
                let (p, q) = (poly[i], poly[(i + 1) % n]);
                if (p.y > yc) != (q.y > yc) {
                    xs.push(p.x + (yc - p.y) * (q.x - p.x) / (q.y - p.y));
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                let start = (pair[0] - 0.5).ceil().max(0.0) as i64;
                let end = (pair[1] - 0.5).floor() as i64;
                for x in start..=end {
                    self.put(x, y as i64, c);
                }
            }
        }
    }

    pub fn line(&mut self, a: Point, b: Point, c: Rgb) {
        let steps = a.dist(b).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let p = a.add(b.sub(a).scale(k as f64 / steps as f64));
            self.put(p.x.floor() as i64, p.y.floor() as i64, c);
        }
    }

    pub fn polyline(&mut self, pts: &[Point], closed: bool, c: Rgb) {
        for w in pts.windows(2) {
            self.line(w[0], w[1], c);
        }
        if closed && pts.len() > 2 {
            self.line(pts[pts.len() - 1], pts[0], c);
        }
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 3);
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }
}

pub fn style_color(style: &str) -> Rgb {
    match style {
        "ground" => [92, 84, 72],
        "tag" => [20, 20, 20],
        "panel:button" => [230, 230, 230],
        "curtain:cloth" => [170, 60, 60],
        "cup" | "footprint:cup" => [240, 200, 40],
        "light:on" => [255, 240, 150],
        "light:off" => [90, 90, 70],
        s if s.starts_with("door") => [130, 90, 50],
        s if s.starts_with("curtain") => [120, 120, 140],
        s if s.starts_with("wheelchair") => [60, 90, 160],
        s if s.starts_with("footprint:") => [150, 140, 120],
        _ => [128, 128, 128],
    }
}

/// Draws primitives in list order, then overlays.
pub fn render(frame: &SceneFrame) -> Canvas {
    let mut c = Canvas::new(frame.width, frame.height, [25, 28, 35]);
    let df_top = frame.seam_row - frame.overlap_rows;
    let ff_bottom = frame.seam_row + frame.overlap_rows;
    for p in &frame.primitives {
        let (y0, y1) = match p.layer {
            Layer::FF => (0, ff_bottom),
            Layer::DF => (df_top, frame.height),
        };
        c.fill_polygon(&p.polygon_px, style_color(&p.style), y0, y1);
    }
    for o in &frame.overlays {
        match o {
            Overlay::LockBox { bbox, .. } => c.polyline(&bbox.corners(), true, [40, 220, 60]),
            Overlay::LassoEcho { path_px } => c.polyline(path_px, true, [230, 40, 40]),
            Overlay::Marker { kind, points_px, .. } => {
                let color = match kind {
                    MarkerKind::Obstacle => [230, 60, 200],
                    MarkerKind::RouteEdge => [60, 200, 230],
                    MarkerKind::Door => [250, 150, 30],
                };
                if points_px.len() == 1 {
                    let p = points_px[0];
                    c.fill_polygon(
                        &BBox {
                            min_x: p.x - 4.0,
                            min_y: p.y - 4.0,
                            max_x: p.x + 4.0,
                            max_y: p.y + 4.0,
                        }
                        .corners(),
                        color,
                        0,
                        frame.height,
                    );
                } else {
                    c.polyline(points_px, *kind == MarkerKind::Obstacle, color);
                }
            }
            Overlay::Advisory { .. } | Overlay::Hint { .. } => {}
        }
    }
    c
}

pub fn render_ppm(frame: &SceneFrame) -> Vec<u8> {
    render(frame).to_ppm()
}
