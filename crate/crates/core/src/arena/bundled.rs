//! Arena maps shipped with the presets.
//!
//! Each map is drawn procedurally here and also checked in as a PGM under
//! `arenas/`; the presets decode the checked-in bytes, and a test keeps the
//! files in step with the drawing code.

use super::{CODE_HABITABLE, CODE_OBSTACLE, CODE_SOURCE, CODE_WALL};
use crate::pgm::GrayImage;

/// `(name, pgm bytes)` for every bundled arena.
pub const FILES: &[(&str, &[u8])] = &[
    ("polygon", include_bytes!("../../arenas/polygon.pgm")),
    ("four_points", include_bytes!("../../arenas/four_points.pgm")),
    ("polygon_offset", include_bytes!("../../arenas/polygon_offset.pgm")),
    ("obstacles", include_bytes!("../../arenas/obstacles.pgm")),
    ("obstacle_field", include_bytes!("../../arenas/obstacle_field.pgm")),
];

pub fn bytes(name: &str) -> Option<&'static [u8]> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, b)| *b)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(n, _)| *n)
}

/// Draw the named arena.
pub fn draw(name: &str) -> Option<GrayImage> {
    Some(match name {
        "polygon" => polygon(&[(40, 140), (160, 140)]),
        "polygon_offset" => polygon(&[(35, 60), (165, 150)]),
        "four_points" => four_points(),
        "obstacles" => obstacles(),
        "obstacle_field" => obstacle_field(),
        _ => return None,
    })
}

struct Canvas(GrayImage);

impl Canvas {
    fn new(side: usize) -> Self {
        Canvas(GrayImage::new(side, side, CODE_WALL))
    }

    fn put(&mut self, x: i64, y: i64, code: u8) {
        let (w, h) = (self.0.width as i64, self.0.height as i64);
        if x >= 0 && y >= 0 && x < w && y < h {
            self.0.pixels[(y * w + x) as usize] = code;
        }
    }

    /// Fill pixels whose centres fall inside the polygon (even-odd rule).
    fn polygon(&mut self, pts: &[(f64, f64)], code: u8) {
        let (w, h) = (self.0.width as i64, self.0.height as i64);
        for y in 0..h {
            for x in 0..w {
                if inside(pts, x as f64 + 0.5, y as f64 + 0.5) {
                    self.put(x, y, code);
                }
            }
        }
    }

    fn disc(&mut self, cx: f64, cy: f64, r: f64, code: u8) {
        let (x0, x1) = ((cx - r).floor() as i64, (cx + r).ceil() as i64);
        let (y0, y1) = ((cy - r).floor() as i64, (cy + r).ceil() as i64);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= r * r {
                    self.put(x, y, code);
                }
            }
        }
    }

    /// Keep the outermost `t` pixels as wall.
    fn frame(&mut self, t: i64) {
        let (w, h) = (self.0.width as i64, self.0.height as i64);
        for y in 0..h {
            for x in 0..w {
                if x < t || y < t || x >= w - t || y >= h - t {
                    self.put(x, y, CODE_WALL);
                }
            }
        }
    }

    fn source(&mut self, x: f64, y: f64) {
        self.disc(x, y, 3.0, CODE_SOURCE);
    }
}

fn inside(pts: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut c = false;
    let mut j = pts.len() - 1;
    for i in 0..pts.len() {
        let (xi, yi) = pts[i];
        let (xj, yj) = pts[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            c = !c;
        }
        j = i;
    }
    c
}

/// Irregular 200x200 polygon with a wall spur rising from the bottom edge
/// between the two lower corners, so the shortest route must bend over it.
fn polygon(sources: &[(i64, i64)]) -> GrayImage {
    let mut c = Canvas::new(200);
    c.polygon(
        &[
            (12.0, 35.0),
            (75.0, 12.0),
            (188.0, 35.0),
            (186.0, 175.0),
            (110.0, 190.0),
            (14.0, 168.0),
        ],
        CODE_HABITABLE,
    );
    c.polygon(&[(82.0, 200.0), (118.0, 200.0), (100.0, 95.0)], CODE_WALL);
    c.frame(2);
    for &(x, y) in sources {
        c.source(x as f64, y as f64);
    }
    c.0
}

/// 200x200 arena with notched walls and four sources numbered top to bottom:
/// outer points 1 and 4 on the diagonal, inner points 2 and 3 either side.
fn four_points() -> GrayImage {
    let mut c = Canvas::new(200);
    c.polygon(
        &[(10.0, 10.0), (190.0, 10.0), (190.0, 190.0), (10.0, 190.0)],
        CODE_HABITABLE,
    );
    // Notches protruding inwards from the top-right and bottom-left sides.
    c.polygon(&[(190.0, 95.0), (190.0, 135.0), (150.0, 112.0)], CODE_WALL);
    c.polygon(&[(10.0, 65.0), (10.0, 105.0), (50.0, 88.0)], CODE_WALL);
    c.polygon(&[(95.0, 10.0), (125.0, 10.0), (110.0, 40.0)], CODE_WALL);
    c.polygon(&[(75.0, 190.0), (105.0, 190.0), (90.0, 160.0)], CODE_WALL);
    c.frame(2);
    c.source(32.0, 32.0);
    c.source(150.0, 62.0);
    c.source(50.0, 138.0);
    c.source(168.0, 168.0);
    c.0
}

/// 200x200 open rectangle with four obstacles between sources at the
/// left and right ends.
fn obstacles() -> GrayImage {
    let mut c = Canvas::new(200);
    c.polygon(
        &[(10.0, 30.0), (190.0, 30.0), (190.0, 170.0), (10.0, 170.0)],
        CODE_HABITABLE,
    );
    c.disc(75.0, 82.0, 14.0, CODE_OBSTACLE);
    c.disc(100.0, 128.0, 16.0, CODE_OBSTACLE);
    c.disc(128.0, 78.0, 13.0, CODE_OBSTACLE);
    c.polygon(
        &[(55.0, 120.0), (70.0, 120.0), (70.0, 150.0), (55.0, 150.0)],
        CODE_OBSTACLE,
    );
    c.frame(2);
    c.source(30.0, 100.0);
    c.source(170.0, 100.0);
    c.0
}

/// 256x256 arena with a regular field of small circular obstacles.
fn obstacle_field() -> GrayImage {
    let mut c = Canvas::new(256);
    c.polygon(
        &[(10.0, 10.0), (246.0, 10.0), (246.0, 246.0), (10.0, 246.0)],
        CODE_HABITABLE,
    );
    for row in 0..6 {
        for col in 0..6 {
            let stagger = if row % 2 == 0 { 0.0 } else { 16.0 };
            let x = 56.0 + 30.0 * col as f64 + stagger;
            let y = 53.0 + 30.0 * row as f64;
            if x < 220.0 {
                c.disc(x, y, 6.0 + ((row * 7 + col * 3) % 4) as f64, CODE_OBSTACLE);
            }
        }
    }
    c.frame(2);
    c.source(28.0, 28.0);
    c.source(228.0, 228.0);
    c.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::Arena;

    #[test]
    fn checked_in_files_match_drawings() {
        for name in names() {
            let drawn = draw(name).unwrap();
            if std::env::var_os("MORPHADAPT_REGENERATE_ARENAS").is_some() {
                let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
                    .join("arenas")
                    .join(format!("{name}.pgm"));
                drawn.write(&path).unwrap();
                continue;
            }
            let stored = GrayImage::decode(bytes(name).unwrap()).unwrap();
            assert!(stored == drawn, "arenas/{name}.pgm is stale; regenerate it");
        }
    }

    #[test]
    fn source_counts() {
        let counts = [
            ("polygon", 2),
            ("polygon_offset", 2),
            ("four_points", 4),
            ("obstacles", 2),
            ("obstacle_field", 2),
        ];
        for (name, n) in counts {
            let arena = Arena::from_image(&draw(name).unwrap()).unwrap();
            assert_eq!(arena.sources().len(), n, "{name}");
        }
    }
}
