//! The particle population, its growth and survival tests, and the
//! per-step scheduler that drives the whole model.

mod scheduler;

pub use scheduler::{Simulation, StepReport};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agents::Particle;
use crate::arena::{Arena, CellClass};
use crate::error::{Error, Result};
use crate::lattice::{CensusTable, OccupancyGrid, ParticleId};

pub type SimRng = rand_chacha::ChaCha8Rng;

/// Census windows, thresholds and test intervals for population turnover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowthShrinkParams {
    pub census_window: usize,
    pub growth_min: u32,
    pub growth_max: u32,
    pub survival_max: u32,
    pub spawn_window: usize,
    pub division_interval: u64,
    pub removal_interval: u64,
}

impl Default for GrowthShrinkParams {
    fn default() -> Self {
        Self {
            census_window: 9,
            growth_min: 1,
            growth_max: 10,
            survival_max: 79,
            spawn_window: 3,
            division_interval: 10,
            removal_interval: 2,
        }
    }
}

impl GrowthShrinkParams {
    /// Survival threshold used by the figure presets. At the default of 79 a
    /// full blob settles at a steady size instead of contracting.
    pub const SHRINKING_SURVIVAL_MAX: u32 = 75;

    /// Defaults with the survival threshold lowered to
    /// [`Self::SHRINKING_SURVIVAL_MAX`].
    pub fn shrinking() -> Self {
        Self {
            survival_max: Self::SHRINKING_SURVIVAL_MAX,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.census_window % 2 == 0 || self.spawn_window % 2 == 0 {
            return err(format!(
                "census and spawn windows must be odd, got {} and {}",
                self.census_window, self.spawn_window
            ));
        }
        if self.spawn_window < 3 {
            return err(format!("spawn window must be >= 3, got {}", self.spawn_window));
        }
        if self.growth_min > self.growth_max {
            return err(format!(
                "growth_min {} exceeds growth_max {}",
                self.growth_min, self.growth_max
            ));
        }
        if self.survival_max as usize >= self.census_window * self.census_window {
            return err(format!(
                "survival_max {} must be below the census window area {}",
                self.survival_max,
                self.census_window * self.census_window
            ));
        }
        if self.division_interval == 0 || self.removal_interval == 0 {
            return err("test intervals must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    Keep,
    Delete,
}

/// Which cells the initial blob may cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    #[default]
    HabitableOnly,
    /// Habitable cells and obstacle cells alike.
    FullCover,
}

impl std::str::FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "habitable-only" => Ok(Self::HabitableOnly),
            "full-cover" => Ok(Self::FullCover),
            other => Err(Error::Config(format!(
                "init_mode must be `habitable-only` or `full-cover`, got `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for InitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::HabitableOnly => "habitable-only",
            Self::FullCover => "full-cover",
        })
    }
}

/// Census of particles in the census window around `p`, counting `p` itself.
#[inline]
pub fn census(p: &Particle, table: &CensusTable, params: &GrowthShrinkParams) -> u32 {
    let (x, y) = p.cell();
    table.window_count(x, y, params.census_window)
}

/// Division test. Returns the offspring (not yet registered) when the
/// census is within the growth band, the parent moved last step and an
/// empty enterable cell exists around it.
pub fn growth_test<R: Rng + ?Sized>(
    p: &Particle,
    table: &CensusTable,
    occ: &OccupancyGrid,
    enterable: &[bool],
    params: &GrowthShrinkParams,
    rng: &mut R,
) -> Option<Particle> {
    let n = census(p, table, params);
    if !(params.growth_min..=params.growth_max).contains(&n) || !p.moved_last_step {
        return None;
    }
    let (w, h) = (occ.width() as i64, occ.height() as i64);
    let (cx, cy) = p.cell();
    let r = (params.spawn_window / 2) as i64;
    let mut free = Vec::with_capacity(params.spawn_window * params.spawn_window);
    for dy in -r..=r {
        for dx in -r..=r {
            if dx == 0 && dy == 0 {
                continue;
            }
            let (x, y) = (cx as i64 + dx, cy as i64 + dy);
            if x < 0 || y < 0 || x >= w || y >= h {
                continue;
            }
            let idx = (y * w + x) as usize;
            if enterable[idx] && !occ.is_occupied(idx) {
                free.push((x as usize, y as usize));
            }
        }
    }
    let &(x, y) = free.choose(rng)?;
    Some(Particle::at_cell(x, y, rng.gen::<f64>() * 360.0))
}

/// Survival test: keep while the census does not exceed `survival_max`.
pub fn survival_test(p: &Particle, table: &CensusTable, params: &GrowthShrinkParams) -> Fate {
    if census(p, table, params) <= params.survival_max {
        Fate::Keep
    } else {
        Fate::Delete
    }
}

/// The particle collection together with its random stream and step count.
#[derive(Debug, Clone)]
pub struct Population {
    particles: Vec<Particle>,
    rng: SimRng,
    step_counter: u64,
    order: Vec<u32>,
}

impl Population {
    pub fn empty(rng: SimRng) -> Self {
        Self {
            particles: Vec::new(),
            rng,
            step_counter: 0,
            order: Vec::new(),
        }
    }

    /// Seed the blob: every eligible cell independently receives a particle
    /// with probability `density`, with a uniformly random heading.
    pub fn initialize(
        arena: &Arena,
        occ: &mut OccupancyGrid,
        density: f64,
        mode: InitMode,
        mut rng: SimRng,
    ) -> Result<Self> {
        if !(density > 0.0 && density <= 1.0) {
            return Err(Error::Config(format!(
                "initial density must lie in (0, 1], got {density}"
            )));
        }
        let w = arena.width();
        let enterable = arena.enterable_mask();
        let mut particles = Vec::new();
        for (i, &class) in arena.classes().iter().enumerate() {
            let eligible = match class {
                CellClass::Habitable | CellClass::Source => enterable[i],
                CellClass::Obstacle => mode == InitMode::FullCover && enterable[i],
                CellClass::Wall => false,
            };
            if !eligible || rng.gen::<f64>() >= density {
                continue;
            }
            let p = Particle::at_cell(i % w, i / w, rng.gen::<f64>() * 360.0);
            let claimed = occ.claim(i, particles.len() as ParticleId);
            debug_assert!(claimed);
            particles.push(p);
        }
        Ok(Self {
            particles,
            rng,
            step_counter: 0,
            order: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn step_counter(&self) -> u64 {
        self.step_counter
    }

    pub fn rng_mut(&mut self) -> &mut SimRng {
        &mut self.rng
    }

    /// Register a new particle in the grid. Fails if its cell is taken.
    pub fn spawn(&mut self, p: Particle, occ: &mut OccupancyGrid) -> bool {
        let (x, y) = p.cell();
        let idx = y * occ.width() + x;
        if !occ.claim(idx, self.particles.len() as ParticleId) {
            return false;
        }
        self.particles.push(p);
        true
    }

    /// Remove the particles at the given indices, vacating their cells.
    fn remove_many(&mut self, mut ids: Vec<usize>, occ: &mut OccupancyGrid) {
        ids.sort_unstable_by(|a, b| b.cmp(a));
        let w = occ.width();
        for i in ids {
            let (x, y) = self.particles[i].cell();
            occ.release(y * w + x);
            self.particles.swap_remove(i);
            if let Some(moved) = self.particles.get(i) {
                let (mx, my) = moved.cell();
                occ.reassign(my * w + mx, i as ParticleId);
            }
        }
    }

    /// Indices of the particles passing `keep`, in a fresh random order.
    fn shuffled_subset(&mut self, keep: impl Fn(&Particle) -> bool) -> Vec<u32> {
        let mut order = std::mem::take(&mut self.order);
        order.clear();
        order.extend(
            self.particles
                .iter()
                .enumerate()
                .filter(|(_, p)| keep(p))
                .map(|(i, _)| i as u32),
        );
        order.shuffle(&mut self.rng);
        order
    }

    fn shuffled_order(&mut self) -> Vec<u32> {
        let mut order = std::mem::take(&mut self.order);
        order.clear();
        order.extend(0..self.particles.len() as u32);
        order.shuffle(&mut self.rng);
        order
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgm::GrayImage;
    use rand::SeedableRng;

    fn rng(seed: u64) -> SimRng {
        SimRng::seed_from_u64(seed)
    }

    fn open_arena(w: usize, h: usize) -> Arena {
        let mut img = GrayImage::new(w, h, 0);
        img.pixels[w + 1] = 255;
        Arena::from_image(&img).unwrap()
    }

    fn table_with(occ: &OccupancyGrid) -> CensusTable {
        occ.census_table()
    }

    /// Grid with a particle at (10, 10) plus `extra` more packed around it.
    fn cluster(extra: usize) -> (OccupancyGrid, Particle) {
        let mut occ = OccupancyGrid::new(21, 21);
        let mut id = 0;
        assert!(occ.claim(10 * 21 + 10, id));
        let mut placed = 0;
        'outer: for y in 6..=14 {
            for x in 6..=14 {
                if placed == extra {
                    break 'outer;
                }
                if (x, y) == (10, 10) {
                    continue;
                }
                id += 1;
                assert!(occ.claim(y * 21 + x, id));
                placed += 1;
            }
        }
        let mut p = Particle::at_cell(10, 10, 0.0);
        p.moved_last_step = true;
        (occ, p)
    }

    #[test]
    fn growth_spawns_into_neighbourhood() {
        // Four extra particles fill the top row of the 9x9 window only.
        let (occ, p) = cluster(4);
        let t = table_with(&occ);
        assert_eq!(census(&p, &t, &GrowthShrinkParams::default()), 5);
        let enterable = vec![true; 21 * 21];
        let child = growth_test(&p, &t, &occ, &enterable, &GrowthShrinkParams::default(), &mut rng(1))
            .expect("space available");
        let (x, y) = child.cell();
        assert!((9..=11).contains(&x) && (9..=11).contains(&y) && (x, y) != (10, 10));
        assert!(!occ.is_occupied(y * 21 + x));
    }

    #[test]
    fn growth_requires_band_and_motion() {
        let params = GrowthShrinkParams::default();
        let enterable = vec![true; 21 * 21];
        let (occ, p) = cluster(29);
        let t = table_with(&occ);
        assert_eq!(census(&p, &t, &params), 30);
        assert!(growth_test(&p, &t, &occ, &enterable, &params, &mut rng(1)).is_none());

        let (occ, mut p) = cluster(4);
        p.moved_last_step = false;
        let t = table_with(&occ);
        assert!(growth_test(&p, &t, &occ, &enterable, &params, &mut rng(1)).is_none());
    }

    #[test]
    fn growth_needs_free_neighbour() {
        let params = GrowthShrinkParams::default();
        let mut occ = OccupancyGrid::new(21, 21);
        let mut id = 0;
        for y in 9..=11 {
            for x in 9..=11 {
                assert!(occ.claim(y * 21 + x, id));
                id += 1;
            }
        }
        let mut p = Particle::at_cell(10, 10, 0.0);
        p.moved_last_step = true;
        let t = table_with(&occ);
        assert_eq!(census(&p, &t, &params), 9);
        let enterable = vec![true; 21 * 21];
        assert!(growth_test(&p, &t, &occ, &enterable, &params, &mut rng(1)).is_none());
        // Free cells that are not enterable do not count either.
        let mut occ = occ.clone();
        occ.release(9 * 21 + 9);
        let mut enterable = enterable;
        enterable[9 * 21 + 9] = false;
        let t = table_with(&occ);
        assert!(growth_test(&p, &t, &occ, &enterable, &params, &mut rng(1)).is_none());
    }

    #[test]
    fn survival_thresholds() {
        let params = GrowthShrinkParams::default();
        let (occ, p) = cluster(80);
        let t = table_with(&occ);
        assert_eq!(census(&p, &t, &params), 81);
        assert_eq!(survival_test(&p, &t, &params), Fate::Delete);
        let (occ, p) = cluster(39);
        assert_eq!(survival_test(&p, &table_with(&occ), &params), Fate::Keep);
        let (occ, p) = cluster(0);
        assert_eq!(census(&p, &table_with(&occ), &params), 1);
        assert_eq!(survival_test(&p, &table_with(&occ), &params), Fate::Keep);
        let (occ, p) = cluster(78);
        assert_eq!(survival_test(&p, &table_with(&occ), &params), Fate::Keep);
        let (occ, p) = cluster(79);
        assert_eq!(survival_test(&p, &table_with(&occ), &params), Fate::Delete);
    }

    #[test]
    fn full_density_fills_habitable_only() {
        let mut img = GrayImage::new(20, 20, 128);
        for y in 2..18 {
            for x in 2..18 {
                img.pixels[y * 20 + x] = 0;
            }
        }
        img.pixels[3 * 20 + 3] = 255;
        img.pixels[10 * 20 + 10] = 64;
        let arena = Arena::from_image(&img).unwrap();
        let mut occ = OccupancyGrid::new(20, 20);
        let pop = Population::initialize(&arena, &mut occ, 1.0, InitMode::HabitableOnly, rng(3)).unwrap();
        assert_eq!(pop.len(), 16 * 16 - 1);
        assert!(!occ.is_occupied(10 * 20 + 10));
        assert!(!occ.is_occupied(0));
        assert!(occ.is_occupied(3 * 20 + 3));

        let mut arena = arena;
        arena.set_obstacle_mode(crate::arena::ObstacleMode::Exposure);
        let mut occ = OccupancyGrid::new(20, 20);
        let pop = Population::initialize(&arena, &mut occ, 1.0, InitMode::FullCover, rng(3)).unwrap();
        assert_eq!(pop.len(), 16 * 16);
        assert!(occ.is_occupied(10 * 20 + 10));
    }

    #[test]
    fn half_density_binomial_bound() {
        // 100x100 open arena minus the source cell's neighbours: all 10000
        // cells are eligible.
        let arena = open_arena(100, 100);
        for seed in 0..20 {
            let mut occ = OccupancyGrid::new(100, 100);
            let pop = Population::initialize(&arena, &mut occ, 0.5, InitMode::HabitableOnly, rng(seed)).unwrap();
            assert!((4600..=5400).contains(&pop.len()), "seed {seed}: {}", pop.len());
            assert_eq!(occ.count(), pop.len());
        }
    }

    #[test]
    fn density_out_of_range() {
        let arena = open_arena(20, 20);
        for d in [0.0, -0.1, 1.5, f64::NAN] {
            let mut occ = OccupancyGrid::new(20, 20);
            assert!(Population::initialize(&arena, &mut occ, d, InitMode::HabitableOnly, rng(0)).is_err());
        }
    }

    #[test]
    fn remove_many_keeps_grid_consistent() {
        let arena = open_arena(30, 30);
        let mut occ = OccupancyGrid::new(30, 30);
        let mut pop = Population::initialize(&arena, &mut occ, 0.5, InitMode::HabitableOnly, rng(9)).unwrap();
        let n = pop.len();
        pop.remove_many(vec![0, 5, n - 1, 17, 3], &mut occ);
        assert_eq!(pop.len(), n - 5);
        assert_eq!(occ.count(), pop.len());
        for (i, p) in pop.particles().iter().enumerate() {
            let (x, y) = p.cell();
            assert_eq!(occ.occupant(y * 30 + x), Some(i as ParticleId));
        }
    }

    #[test]
    fn params_validation() {
        assert!(GrowthShrinkParams::default().validate().is_ok());
        let p = GrowthShrinkParams {
            census_window: 8,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = GrowthShrinkParams {
            growth_min: 11,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = GrowthShrinkParams {
            survival_max: 81,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = GrowthShrinkParams {
            removal_interval: 0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
