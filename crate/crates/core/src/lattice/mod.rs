//! The shared diffusive chemoattractant field and the particle occupancy grid.
//!
//! A single signed scalar field carries every stimulus in the model: source
//! attractant, particle trails and (as negative values) repellents. Sink cells
//! model the arena walls; they absorb whatever diffuses into them and always
//! read zero.

mod occupancy;

pub use occupancy::{CensusTable, OccupancyGrid, ParticleId};

use crate::error::{Error, Result};

/// A cell coordinate on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

/// Mean-filter diffusion with multiplicative damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    /// Side of the square mean kernel; odd and at least 3.
    pub kernel_size: usize,
    /// Factor applied to the kernel mean each step, in `(0, 1]`.
    pub damping: f64,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            kernel_size: 3,
            damping: 0.9,
        }
    }
}

impl DiffusionParams {
    pub fn validate(&self) -> Result<()> {
        if self.kernel_size < 3 || self.kernel_size % 2 == 0 {
            return Err(Error::Config(format!(
                "kernel size must be odd and >= 3, got {}",
                self.kernel_size
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// Signed concentration field with absorbing sink cells.
#[derive(Debug, Clone)]
pub struct ChemoLattice {
    width: usize,
    height: usize,
    values: Vec<f64>,
    sink: Vec<bool>,
    sink_cells: Vec<usize>,
    row_sums: Vec<f64>,
    next: Vec<f64>,
}

impl PartialEq for ChemoLattice {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.values == other.values
            && self.sink == other.sink
    }
}

impl ChemoLattice {
    /// An all-zero lattice without sinks.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::with_sinks(width, height, vec![false; width * height])
    }

    pub fn with_sinks(width: usize, height: usize, sink: Vec<bool>) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::Config(format!(
                "lattice must be at least 3x3, got {width}x{height}"
            )));
        }
        if sink.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                actual: (sink.len(), 1),
            });
        }
        let sink_cells = sink.iter().enumerate().filter_map(|(i, &s)| s.then_some(i)).collect();
        let n = width * height;
        Ok(Self {
            width,
            height,
            values: vec![0.0; n],
            sink,
            sink_cells,
            row_sums: vec![0.0; n],
            next: vec![0.0; n],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Replace the field contents; sink cells are clamped afterwards.
    pub fn set_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: (self.width, self.height),
                actual: (values.len(), 1),
            });
        }
        self.values.copy_from_slice(values);
        self.clamp_sinks();
        Ok(())
    }

    pub fn is_sink(&self, cell: Cell) -> bool {
        self.sink[self.index(cell)]
    }

    pub fn sink_mask(&self) -> &[bool] {
        &self.sink
    }

    #[inline]
    pub fn index(&self, cell: Cell) -> usize {
        cell.y * self.width + cell.x
    }

    pub fn checked_cell(&self, x: i64, y: i64) -> Result<Cell> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return Err(Error::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(Cell::new(x as usize, y as usize))
    }

    pub fn value(&self, cell: Cell) -> f64 {
        self.values[self.index(cell)]
    }

    /// Add `amount` at `cell`; a no-op on sink cells. Negative amounts
    /// project repellent.
    pub fn deposit(&mut self, cell: Cell, amount: f64) -> Result<()> {
        let idx = self.checked_cell(cell.x as i64, cell.y as i64).map(|c| self.index(c))?;
        self.deposit_index(idx, amount);
        Ok(())
    }

    #[inline]
    pub(crate) fn deposit_index(&mut self, idx: usize, amount: f64) {
        if !self.sink[idx] {
            self.values[idx] += amount;
        }
    }

    /// Value of the cell containing `(x, y)`. Off-lattice points and sink
    /// cells read zero.
    #[inline]
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        // Truncation floors non-negative values; NaN fails the test too.
        if !(x >= 0.0 && y >= 0.0) {
            return 0.0;
        }
        let (cx, cy) = (x as i32 as usize, y as i32 as usize);
        if cx >= self.width || cy >= self.height {
            return 0.0;
        }
        let idx = cy * self.width + cx;
        // Sinks hold exactly zero between steps.
        self.values[idx]
    }

    pub fn clamp_sinks(&mut self) {
        for &i in &self.sink_cells {
            self.values[i] = 0.0;
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn total_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    /// One diffusion step: every cell becomes `damping` times the mean of its
    /// `k x k` neighbourhood in the pre-step field. Off-lattice and sink samples
    /// count as zero against the fixed divisor `k * k`.
    pub fn diffuse_and_damp(&mut self, params: &DiffusionParams) {
        self.clamp_sinks();
        let (w, h) = (self.width, self.height);
        let r = params.kernel_size / 2;

        // Horizontal box sums.
        for y in 0..h {
            let row = &self.values[y * w..(y + 1) * w];
            let out = &mut self.row_sums[y * w..(y + 1) * w];
            if r == 1 {
                out[0] = row[0] + row[1];
                for x in 1..w - 1 {
                    out[x] = row[x - 1] + row[x] + row[x + 1];
                }
                out[w - 1] = row[w - 2] + row[w - 1];
            } else {
                for (x, o) in out.iter_mut().enumerate() {
                    let lo = x.saturating_sub(r);
                    let hi = (x + r).min(w - 1);
                    *o = row[lo..=hi].iter().sum();
                }
            }
        }

        // Vertical box sums of the row sums.
        let scale = params.damping / (params.kernel_size * params.kernel_size) as f64;
        for y in 0..h {
            let lo = y.saturating_sub(r);
            let hi = (y + r).min(h - 1);
            let out = &mut self.next[y * w..(y + 1) * w];
            out.copy_from_slice(&self.row_sums[lo * w..(lo + 1) * w]);
            for yy in lo + 1..=hi {
                let src = &self.row_sums[yy * w..(yy + 1) * w];
                for (o, s) in out.iter_mut().zip(src) {
                    *o += s;
                }
            }
            for o in out.iter_mut() {
                *o *= scale;
            }
        }

        std::mem::swap(&mut self.values, &mut self.next);
        self.clamp_sinks();
    }
}
