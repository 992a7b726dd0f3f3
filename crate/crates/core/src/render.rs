//! Grayscale snapshots of the blob and the field.

use crate::arena::{Arena, CellClass};
use crate::error::{Error, Result};
use crate::lattice::{ChemoLattice, OccupancyGrid};
use crate::pgm::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RenderMode {
    /// Particles over the arena map.
    #[default]
    Occupancy,
    /// The signed field, zero at mid-grey.
    Field,
    /// The field with particles drawn white on top.
    Composite,
}

impl std::str::FromStr for RenderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "occupancy" => Ok(Self::Occupancy),
            "field" => Ok(Self::Field),
            "composite" => Ok(Self::Composite),
            other => Err(Error::Config(format!(
                "render mode must be occupancy, field or composite, got `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for RenderMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Occupancy => "occupancy",
            Self::Field => "field",
            Self::Composite => "composite",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderParams {
    /// Exponent applied to field pixels; below 1 brightens faint values.
    pub gamma: f64,
    pub mode: RenderMode,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            gamma: 0.6,
            mode: RenderMode::Occupancy,
        }
    }
}

impl RenderParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// `frame_<step>.pgm` with the step zero-padded to eight digits.
pub fn frame_file_name(step: u64) -> String {
    format!("frame_{step:08}.pgm")
}

/// Map a field value to a pixel: zero at 128, `±scale` at the ends, then
/// gamma.
pub fn field_pixel(value: f64, scale: f64, gamma: f64) -> u8 {
    let linear = if scale <= 0.0 {
        128.0
    } else {
        let t = (value / scale).clamp(-1.0, 1.0);
        if t >= 0.0 {
            128.0 + 127.0 * t
        } else {
            128.0 + 128.0 * t
        }
    };
    (255.0 * (linear / 255.0).powf(gamma)).round() as u8
}

pub fn render_frame(
    lattice: &ChemoLattice,
    occupancy: &OccupancyGrid,
    arena: &Arena,
    params: &RenderParams,
) -> Result<GrayImage> {
    params.validate()?;
    let dims = (arena.width(), arena.height());
    for actual in [
        (lattice.width(), lattice.height()),
        (occupancy.width(), occupancy.height()),
    ] {
        if actual != dims {
            return Err(Error::DimensionMismatch { expected: dims, actual });
        }
    }
    let mut img = GrayImage::new(dims.0, dims.1, 0);
    match params.mode {
        RenderMode::Occupancy => {
            for (px, &class) in img.pixels.iter_mut().zip(arena.classes()) {
                *px = match class {
                    CellClass::Wall => 128,
                    CellClass::Obstacle => 64,
                    _ => 0,
                };
            }
        }
        RenderMode::Field | RenderMode::Composite => {
            let scale = lattice.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (px, &v) in img.pixels.iter_mut().zip(lattice.values()) {
                *px = field_pixel(v, scale, params.gamma);
            }
        }
    }
    if params.mode != RenderMode::Field {
        for (i, px) in img.pixels.iter_mut().enumerate() {
            if occupancy.is_occupied(i) {
                *px = 255;
            }
        }
    }
    Ok(img)
}
