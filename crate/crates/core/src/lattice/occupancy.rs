/// Index of a particle in its population's storage.
pub type ParticleId = u32;

const EMPTY: ParticleId = ParticleId::MAX;

/// One-particle-per-cell occupancy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    cells: Vec<ParticleId>,
    count: usize,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![EMPTY; width * height],
            count: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of occupied cells.
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn occupant(&self, idx: usize) -> Option<ParticleId> {
        let id = self.cells[idx];
        (id != EMPTY).then_some(id)
    }

    #[inline]
    pub fn is_occupied(&self, idx: usize) -> bool {
        self.cells[idx] != EMPTY
    }

    /// Register `id` at an empty cell. Returns false if the cell is taken.
    #[inline]
    pub fn claim(&mut self, idx: usize, id: ParticleId) -> bool {
        if self.cells[idx] != EMPTY {
            return false;
        }
        self.cells[idx] = id;
        self.count += 1;
        true
    }

    #[inline]
    pub fn release(&mut self, idx: usize) {
        if self.cells[idx] != EMPTY {
            self.cells[idx] = EMPTY;
            self.count -= 1;
        }
    }

    /// Move the occupant of `from` into the empty cell `to`.
    #[inline]
    pub(crate) fn relocate(&mut self, from: usize, to: usize) {
        debug_assert!(self.cells[to] == EMPTY && self.cells[from] != EMPTY);
        self.cells[to] = self.cells[from];
        self.cells[from] = EMPTY;
    }

    /// Point an occupied cell at a different particle id.
    #[inline]
    pub(crate) fn reassign(&mut self, idx: usize, id: ParticleId) {
        debug_assert!(self.cells[idx] != EMPTY);
        self.cells[idx] = id;
    }

    /// Count of occupied cells in the `window x window` square centred on
    /// `(x, y)`, clipped to the lattice.
    pub fn window_count(&self, x: usize, y: usize, window: usize) -> u32 {
        let r = window / 2;
        let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(self.width));
        let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(self.height));
        (y0..y1)
            .map(|yy| {
                let row = &self.cells[yy * self.width + x0..yy * self.width + x1];
                row.iter().filter(|&&c| c != EMPTY).count() as u32
            })
            .sum()
    }

    pub fn occupied_mask(&self) -> Vec<bool> {
        self.cells.iter().map(|&c| c != EMPTY).collect()
    }

    pub fn census_table(&self) -> CensusTable {
        CensusTable::from_mask(self.width, self.height, self.cells.iter().map(|&c| c != EMPTY))
    }
}

/// Summed-area table over a boolean mask, for O(1) window counts.
#[derive(Debug, Clone)]
pub struct CensusTable {
    width: usize,
    height: usize,
    // (width + 1) x (height + 1), first row and column zero.
    sums: Vec<u32>,
}

impl CensusTable {
    pub fn from_mask(width: usize, height: usize, mask: impl IntoIterator<Item = bool>) -> Self {
        let stride = width + 1;
        let mut sums = vec![0u32; stride * (height + 1)];
        let mut it = mask.into_iter();
        for y in 0..height {
            let mut row = 0u32;
            for x in 0..width {
                row += u32::from(it.next().unwrap_or(false));
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { width, height, sums }
    }

    /// Count of set cells in the `window x window` square centred on
    /// `(x, y)`, clipped to the lattice.
    #[inline]
    pub fn window_count(&self, x: usize, y: usize, window: usize) -> u32 {
        let r = window / 2;
        let x0 = x.saturating_sub(r);
        let y0 = y.saturating_sub(r);
        let x1 = (x + r + 1).min(self.width);
        let y1 = (y + r + 1).min(self.height);
        let s = self.width + 1;
        self.sums[y1 * s + x1] + self.sums[y0 * s + x0] - self.sums[y0 * s + x1] - self.sums[y1 * s + x0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claim_release_relocate() {
        let mut g = OccupancyGrid::new(4, 4);
        assert!(g.claim(5, 0));
        assert!(!g.claim(5, 1));
        assert_eq!(g.count(), 1);
        g.relocate(5, 6);
        assert_eq!(g.occupant(6), Some(0));
        assert_eq!(g.occupant(5), None);
        g.release(6);
        g.release(6);
        assert_eq!(g.count(), 0);
    }

    #[test]
    fn census_matches_brute_force() {
        let (w, h) = (13, 11);
        let mask: Vec<bool> = (0..w * h).map(|i| (i * 7919) % 5 < 2).collect();
        let table = CensusTable::from_mask(w, h, mask.iter().copied());
        for window in [1, 3, 9, 11] {
            let r = (window / 2) as i64;
            for y in 0..h {
                for x in 0..w {
                    let mut brute = 0;
                    for dy in -r..=r {
                        for dx in -r..=r {
                            let (xx, yy) = (x as i64 + dx, y as i64 + dy);
                            if xx >= 0 && yy >= 0 && (xx as usize) < w && (yy as usize) < h {
                                brute += u32::from(mask[yy as usize * w + xx as usize]);
                            }
                        }
                    }
                    assert_eq!(table.window_count(x, y, window), brute);
                }
            }
        }
    }

    #[test]
    fn live_window_count_matches_table() {
        let mut g = OccupancyGrid::new(13, 9);
        for i in (0..13 * 9).filter(|i| i % 3 != 1) {
            g.claim(i, i as ParticleId);
        }
        let t = g.census_table();
        for y in 0..9 {
            for x in 0..13 {
                assert_eq!(g.window_count(x, y, 5), t.window_count(x, y, 5));
            }
        }
    }
}
