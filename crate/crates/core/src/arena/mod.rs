//! Arena maps and the stimuli they project into the lattice each step.
//!
//! Attractant sources, optional wall repellent and (in exposure mode)
//! obstacle repellent are all projected into the same field the particles
//! deposit their trails into. In exposure mode an obstacle cell projects the
//! weak covered strength while any particle lies within its window, and the
//! full exposed strength once the blob has withdrawn from it.

pub mod bundled;

use std::collections::VecDeque;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{Cell, ChemoLattice, OccupancyGrid};
use crate::pgm::GrayImage;

pub const CODE_HABITABLE: u8 = 0;
pub const CODE_OBSTACLE: u8 = 64;
pub const CODE_WALL: u8 = 128;
pub const CODE_SOURCE: u8 = 255;

pub const MIN_SIDE: usize = 16;
pub const MAX_SIDE: usize = 4096;

pub const DEFAULT_SOURCE_STRENGTH: f64 = 6.375;
pub const DEFAULT_EXPOSED_STRENGTH: f64 = -6.375;
pub const DEFAULT_COVERED_STRENGTH: f64 = -0.006375;
pub const DEFAULT_EXPOSURE_WINDOW: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellClass {
    Habitable,
    Wall,
    Obstacle,
    Source,
}

impl CellClass {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            CODE_HABITABLE => Some(Self::Habitable),
            CODE_WALL => Some(Self::Wall),
            CODE_OBSTACLE => Some(Self::Obstacle),
            CODE_SOURCE => Some(Self::Source),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Self::Habitable => CODE_HABITABLE,
            Self::Wall => CODE_WALL,
            Self::Obstacle => CODE_OBSTACLE,
            Self::Source => CODE_SOURCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObstacleMode {
    /// Obstacles are walls: absorbing and not enterable.
    #[default]
    Impassable,
    /// Obstacles are enterable and project repellent depending on coverage.
    Exposure,
}

impl std::str::FromStr for ObstacleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "impassable" => Ok(Self::Impassable),
            "exposure" => Ok(Self::Exposure),
            other => Err(Error::Config(format!(
                "obstacle_mode must be `impassable` or `exposure`, got `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for ObstacleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Impassable => "impassable",
            Self::Exposure => "exposure",
        })
    }
}

/// A numbered attractant source: one 8-connected group of source pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub id: u32,
    pub cells: Vec<Cell>,
    pub strength: f64,
    pub active: bool,
}

impl Source {
    pub fn centroid(&self) -> (f64, f64) {
        let n = self.cells.len() as f64;
        let sx: f64 = self.cells.iter().map(|c| c.x as f64 + 0.5).sum();
        let sy: f64 = self.cells.iter().map(|c| c.y as f64 + 0.5).sum();
        (sx / n, sy / n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArenaEvent {
    RemoveSource(u32),
}

impl std::fmt::Display for ArenaEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::RemoveSource(id) => write!(f, "remove_source {id}"),
        }
    }
}

/// Per-obstacle-cell exposure flags, parallel to [`Arena::obstacle_cells`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExposureState {
    pub exposed: Vec<bool>,
}

impl ExposureState {
    pub fn exposed_count(&self) -> usize {
        self.exposed.iter().filter(|&&e| e).count()
    }
}

#[derive(Debug, Clone)]
pub struct Arena {
    width: usize,
    height: usize,
    classes: Vec<CellClass>,
    sources: Vec<Source>,
    obstacle_cells: Vec<usize>,
    wall_repellent_strength: f64,
    obstacle_mode: ObstacleMode,
    exposure_window: usize,
    exposed_strength: f64,
    covered_strength: f64,
    // Derived from classes and obstacle mode.
    sink: Vec<bool>,
    enterable: Vec<bool>,
    wall_adjacent: Vec<usize>,
}

impl Arena {
    /// Build an arena from per-cell classes, numbering sources in raster
    /// order of their first pixel.
    pub fn from_classes(width: usize, height: usize, classes: Vec<CellClass>) -> Result<Self> {
        if classes.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                actual: (classes.len(), 1),
            });
        }
        let sources = label_sources(width, height, &classes);
        if sources.is_empty() {
            return Err(Error::ArenaLoad("arena contains no source pixels".into()));
        }
        let obstacle_cells = classes
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c == CellClass::Obstacle).then_some(i))
            .collect();
        let mut arena = Self {
            width,
            height,
            classes,
            sources,
            obstacle_cells,
            wall_repellent_strength: 0.0,
            obstacle_mode: ObstacleMode::Impassable,
            exposure_window: DEFAULT_EXPOSURE_WINDOW,
            exposed_strength: DEFAULT_EXPOSED_STRENGTH,
            covered_strength: DEFAULT_COVERED_STRENGTH,
            sink: Vec::new(),
            enterable: Vec::new(),
            wall_adjacent: Vec::new(),
        };
        arena.rebuild_masks();
        Ok(arena)
    }

    pub fn from_image(img: &GrayImage) -> Result<Self> {
        for (name, side) in [("width", img.width), ("height", img.height)] {
            if !(MIN_SIDE..=MAX_SIDE).contains(&side) {
                return Err(Error::ArenaLoad(format!(
                    "{name} {side} outside [{MIN_SIDE}, {MAX_SIDE}]"
                )));
            }
        }
        let mut classes = Vec::with_capacity(img.pixels.len());
        for (i, &code) in img.pixels.iter().enumerate() {
            let class = CellClass::from_code(code).ok_or(Error::UnknownPixelCode {
                code,
                x: i % img.width,
                y: i / img.width,
            })?;
            classes.push(class);
        }
        Self::from_classes(img.width, img.height, classes)
    }

    /// Load an arena map from a binary PGM file.
    pub fn load(path: &Path) -> Result<Self> {
        let img = GrayImage::read(path)?;
        Self::from_image(&img).map_err(|e| match e {
            Error::ArenaLoad(msg) => Error::ArenaLoad(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.classes.iter().map(|c| c.code()).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn class(&self, cell: Cell) -> CellClass {
        self.classes[cell.y * self.width + cell.x]
    }

    pub fn classes(&self) -> &[CellClass] {
        &self.classes
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn source(&self, id: u32) -> Option<&Source> {
        self.sources.iter().find(|s| s.id == id)
    }

    pub fn active_sources(&self) -> impl Iterator<Item = &Source> {
        self.sources.iter().filter(|s| s.active)
    }

    pub fn obstacle_cells(&self) -> &[usize] {
        &self.obstacle_cells
    }

    pub fn obstacle_mode(&self) -> ObstacleMode {
        self.obstacle_mode
    }

    pub fn wall_repellent_strength(&self) -> f64 {
        self.wall_repellent_strength
    }

    pub fn exposure_window(&self) -> usize {
        self.exposure_window
    }

    pub fn exposed_strength(&self) -> f64 {
        self.exposed_strength
    }

    pub fn covered_strength(&self) -> f64 {
        self.covered_strength
    }

    pub fn set_obstacle_mode(&mut self, mode: ObstacleMode) {
        self.obstacle_mode = mode;
        self.rebuild_masks();
    }

    pub fn set_source_strength(&mut self, strength: f64) -> Result<()> {
        if !strength.is_finite() {
            return Err(Error::Config("source strength must be finite".into()));
        }
        for s in &mut self.sources {
            s.strength = strength;
        }
        Ok(())
    }

    pub fn set_wall_repellent_strength(&mut self, strength: f64) -> Result<()> {
        if !strength.is_finite() {
            return Err(Error::Config("wall repellent must be finite".into()));
        }
        self.wall_repellent_strength = strength;
        Ok(())
    }

    /// Configure the exposure mechanism. Strengths must be non-positive.
    pub fn set_exposure(&mut self, window: usize, exposed: f64, covered: f64) -> Result<()> {
        if window == 0 || window % 2 == 0 {
            return Err(Error::Config(format!("exposure window must be odd, got {window}")));
        }
        for (name, v) in [("exposed_strength", exposed), ("covered_strength", covered)] {
            if !(v.is_finite() && v <= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and <= 0, got {v}")));
            }
        }
        self.exposure_window = window;
        self.exposed_strength = exposed;
        self.covered_strength = covered;
        Ok(())
    }

    /// Cells that absorb diffusion and always read zero.
    pub fn sink_mask(&self) -> &[bool] {
        &self.sink
    }

    /// Cells a particle may occupy.
    pub fn enterable_mask(&self) -> &[bool] {
        &self.enterable
    }

    /// Habitable cells bordering a sink (8-neighbourhood); these receive the
    /// wall repellent.
    pub fn wall_adjacent_cells(&self) -> &[usize] {
        &self.wall_adjacent
    }

    /// Cells counted as walls for clearance: walls, plus obstacles when
    /// they are impassable.
    pub fn is_blocking(&self, idx: usize) -> bool {
        self.sink[idx]
    }

    pub fn new_lattice(&self) -> ChemoLattice {
        ChemoLattice::with_sinks(self.width, self.height, self.sink.clone()).expect("arena dimensions are validated")
    }

    fn rebuild_masks(&mut self) {
        let impassable = self.obstacle_mode == ObstacleMode::Impassable;
        self.sink = self
            .classes
            .iter()
            .map(|&c| c == CellClass::Wall || (impassable && c == CellClass::Obstacle))
            .collect();
        self.enterable = self.sink.iter().map(|&s| !s).collect();
        let (w, h) = (self.width as i64, self.height as i64);
        self.wall_adjacent = (0..self.classes.len())
            .filter(|&i| {
                if self.classes[i] != CellClass::Habitable {
                    return false;
                }
                let (x, y) = ((i % self.width) as i64, (i / self.width) as i64);
                NEIGHBOURS_8.iter().any(|&(dx, dy)| {
                    let (nx, ny) = (x + dx, y + dy);
                    nx >= 0 && ny >= 0 && nx < w && ny < h && self.sink[(ny * w + nx) as usize]
                })
            })
            .collect();
    }

    /// Mark each obstacle cell exposed when no particle lies within the
    /// exposure window around it, covered otherwise.
    pub fn update_exposure(&self, occ: &OccupancyGrid) -> ExposureState {
        let census = occ.census_table();
        let exposed = self
            .obstacle_cells
            .iter()
            .map(|&i| census.window_count(i % self.width, i / self.width, self.exposure_window) == 0)
            .collect();
        ExposureState { exposed }
    }

    /// Add this step's stimuli to the lattice. `exposure` is consulted only
    /// in exposure mode.
    pub fn project_stimuli(&self, exposure: Option<&ExposureState>, lattice: &mut ChemoLattice) {
        debug_assert_eq!((lattice.width(), lattice.height()), (self.width, self.height));
        for s in self.active_sources() {
            for &c in &s.cells {
                lattice.deposit_index(c.y * self.width + c.x, s.strength);
            }
        }
        if self.wall_repellent_strength != 0.0 {
            for &i in &self.wall_adjacent {
                lattice.deposit_index(i, self.wall_repellent_strength);
            }
        }
        if self.obstacle_mode == ObstacleMode::Exposure {
            if let Some(exposure) = exposure {
                for (&i, &exposed) in self.obstacle_cells.iter().zip(&exposure.exposed) {
                    let amount = if exposed {
                        self.exposed_strength
                    } else {
                        self.covered_strength
                    };
                    lattice.deposit_index(i, amount);
                }
            }
        }
    }

    pub fn apply_event(&mut self, event: ArenaEvent) -> Result<()> {
        match event {
            ArenaEvent::RemoveSource(id) => {
                let source = self
                    .sources
                    .iter_mut()
                    .find(|s| s.id == id)
                    .ok_or_else(|| Error::Scenario(format!("no source with id {id}")))?;
                if !source.active {
                    return Err(Error::Scenario(format!("source {id} already removed")));
                }
                source.active = false;
                Ok(())
            }
        }
    }
}

pub(crate) const NEIGHBOURS_8: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

fn label_sources(width: usize, height: usize, classes: &[CellClass]) -> Vec<Source> {
    let mut seen = vec![false; classes.len()];
    let mut sources = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..classes.len() {
        if classes[start] != CellClass::Source || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut cells = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % width, i / width);
            cells.push(Cell::new(x, y));
            for &(dx, dy) in &NEIGHBOURS_8 {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                    continue;
                }
                let n = ny as usize * width + nx as usize;
                if classes[n] == CellClass::Source && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        cells.sort_by_key(|c| (c.y, c.x));
        sources.push(Source {
            id: sources.len() as u32 + 1,
            cells,
            strength: DEFAULT_SOURCE_STRENGTH,
            active: true,
        });
    }
    sources
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 20x20: grey border two cells thick, black interior, the given
    /// source and obstacle cells.
    fn image(sources: &[(usize, usize)], obstacles: &[(usize, usize)]) -> GrayImage {
        let mut img = GrayImage::new(20, 20, CODE_WALL);
        for y in 2..18 {
            for x in 2..18 {
                img.pixels[y * 20 + x] = CODE_HABITABLE;
            }
        }
        for &(x, y) in sources {
            img.pixels[y * 20 + x] = CODE_SOURCE;
        }
        for &(x, y) in obstacles {
            img.pixels[y * 20 + x] = CODE_OBSTACLE;
        }
        img
    }

    #[test]
    fn decodes_two_source_layout() {
        let img = image(&[(4, 4), (5, 4), (4, 5), (14, 14), (15, 15)], &[]);
        let arena = Arena::from_image(&img).unwrap();
        assert_eq!(arena.sources().len(), 2);
        assert_eq!(arena.sources()[0].cells.len(), 3);
        assert_eq!(arena.sources()[1].cells.len(), 2);
        assert_eq!(arena.class(Cell::new(0, 0)), CellClass::Wall);
        assert_eq!(arena.class(Cell::new(8, 8)), CellClass::Habitable);
        assert!(arena.sink_mask()[0]);
        assert!(!arena.sink_mask()[4 * 20 + 4]);
        assert!(arena.enterable_mask()[4 * 20 + 4]);
    }

    #[test]
    fn no_sources_is_an_error() {
        assert!(matches!(
            Arena::from_image(&GrayImage::new(20, 20, 0)),
            Err(Error::ArenaLoad(_))
        ));
    }

    #[test]
    fn unknown_code_names_value_and_position() {
        let mut img = image(&[(4, 4)], &[]);
        img.pixels[7 * 20 + 3] = 99;
        let err = Arena::from_image(&img).unwrap_err();
        assert!(matches!(err, Error::UnknownPixelCode { code: 99, x: 3, y: 7 }));
        assert!(err.to_string().contains("99"));
    }

    #[test]
    fn size_limits() {
        let mut img = GrayImage::new(15, 20, 0);
        img.pixels[20] = CODE_SOURCE;
        assert!(Arena::from_image(&img).is_err());
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        let img = image(&[(4, 4)], &[(10, 10)]);
        img.write(&path).unwrap();
        let arena = Arena::load(&path).unwrap();
        assert_eq!(arena.to_image(), img);
        assert!(Arena::load(&dir.path().join("missing.pgm")).is_err());
    }

    #[test]
    fn obstacle_mode_switches_masks() {
        let mut arena = Arena::from_image(&image(&[(4, 4)], &[(10, 10)])).unwrap();
        let i = 10 * 20 + 10;
        assert!(arena.sink_mask()[i] && !arena.enterable_mask()[i]);
        assert!(arena.wall_adjacent_cells().contains(&(10 * 20 + 11)));
        arena.set_obstacle_mode(ObstacleMode::Exposure);
        assert!(!arena.sink_mask()[i] && arena.enterable_mask()[i]);
        assert!(!arena.wall_adjacent_cells().contains(&(10 * 20 + 11)));
    }

    #[test]
    fn source_projection_before_diffusion() {
        let arena = Arena::from_image(&image(&[(4, 4)], &[])).unwrap();
        let mut lat = arena.new_lattice();
        arena.project_stimuli(None, &mut lat);
        assert_eq!(lat.value(Cell::new(4, 4)), 6.375);
        assert_eq!(lat.total(), 6.375);
    }

    #[test]
    fn disabled_wall_repellent_leaves_field() {
        let arena = Arena::from_image(&image(&[(9, 9)], &[])).unwrap();
        let mut lat = arena.new_lattice();
        arena.project_stimuli(None, &mut lat);
        for &i in arena.wall_adjacent_cells() {
            assert_eq!(lat.values()[i], 0.0);
        }
    }

    #[test]
    fn projection_accounting() {
        let mut arena = Arena::from_image(&image(&[(9, 9), (9, 10)], &[(5, 5), (5, 6)])).unwrap();
        arena.set_obstacle_mode(ObstacleMode::Exposure);
        arena.set_wall_repellent_strength(-6.375).unwrap();
        let mut occ = OccupancyGrid::new(20, 20);
        assert!(occ.claim(6 * 20 + 8, 0));
        let exposure = arena.update_exposure(&occ);
        let mut lat = arena.new_lattice();
        arena.project_stimuli(Some(&exposure), &mut lat);
        let expected = 2.0 * 6.375 + arena.wall_adjacent_cells().len() as f64 * -6.375 + 2.0 * -0.006375;
        assert!((lat.total() - expected).abs() < 1e-9);
    }

    #[test]
    fn exposure_window_bounds() {
        let mut arena = Arena::from_image(&image(&[(3, 3)], &[(9, 9)])).unwrap();
        arena.set_obstacle_mode(ObstacleMode::Exposure);
        let mut occ = OccupancyGrid::new(20, 20);
        assert!(arena.update_exposure(&occ).exposed[0]);
        // Three cells away: inside the 11x11 window.
        assert!(occ.claim(9 * 20 + 12, 0));
        assert!(!arena.update_exposure(&occ).exposed[0]);
        occ.release(9 * 20 + 12);
        // Eight cells away: outside.
        assert!(occ.claim(9 * 20 + 17, 0));
        assert!(arena.update_exposure(&occ).exposed[0]);
    }

    #[test]
    fn covered_obstacle_gets_weak_repellent() {
        let mut arena = Arena::from_image(&image(&[(3, 3)], &[(9, 9), (10, 9)])).unwrap();
        arena.set_obstacle_mode(ObstacleMode::Exposure);
        let mut occ = OccupancyGrid::new(20, 20);
        assert!(occ.claim(9 * 20 + 9, 0));
        let exposure = arena.update_exposure(&occ);
        let mut lat = arena.new_lattice();
        arena.project_stimuli(Some(&exposure), &mut lat);
        assert_eq!(lat.value(Cell::new(9, 9)), -0.006375);
        assert_eq!(lat.value(Cell::new(10, 9)), -0.006375);
    }

    #[test]
    fn remove_source_events() {
        let mut arena = Arena::from_image(&image(&[(4, 4), (14, 14)], &[])).unwrap();
        arena.apply_event(ArenaEvent::RemoveSource(2)).unwrap();
        assert!(!arena.source(2).unwrap().active);
        assert!(matches!(
            arena.apply_event(ArenaEvent::RemoveSource(2)),
            Err(Error::Scenario(_))
        ));
        assert!(arena.apply_event(ArenaEvent::RemoveSource(9)).is_err());
        let mut lat = arena.new_lattice();
        arena.project_stimuli(None, &mut lat);
        assert_eq!(lat.value(Cell::new(14, 14)), 0.0);
        assert_eq!(lat.value(Cell::new(4, 4)), 6.375);
    }

    #[test]
    fn exposure_settings_validated() {
        let mut arena = Arena::from_image(&image(&[(4, 4)], &[])).unwrap();
        assert!(arena.set_exposure(10, -1.0, -0.1).is_err());
        assert!(arena.set_exposure(11, 1.0, -0.1).is_err());
        assert!(arena.set_exposure(11, -1.0, 0.1).is_err());
        assert!(arena.set_exposure(11, -1.0, 0.0).is_ok());
    }

    proptest::proptest! {
        #[test]
        fn retreat_keeps_obstacles_exposed(
            occupied in proptest::collection::vec(proptest::bool::weighted(0.3), 400),
            order in proptest::collection::vec(0usize..400, 0..200),
            window in proptest::prop_oneof![proptest::strategy::Just(3usize), proptest::strategy::Just(5), proptest::strategy::Just(11)],
        ) {
            let mut arena = Arena::from_image(&image(&[(3, 3)], &[(9, 9), (10, 9), (12, 14), (6, 15)])).unwrap();
            arena.set_obstacle_mode(ObstacleMode::Exposure);
            arena.set_exposure(window, -6.375, -0.006375).unwrap();
            let mut occ = OccupancyGrid::new(20, 20);
            for (i, &o) in occupied.iter().enumerate() {
                if o && arena.enterable_mask()[i] {
                    occ.claim(i, 0);
                }
            }
            let mut before = arena.update_exposure(&occ).exposed;
            // The blob only recedes: particles leave, none arrive.
            for i in order {
                occ.release(i);
                let now = arena.update_exposure(&occ).exposed;
                for (b, n) in before.iter().zip(&now) {
                    proptest::prop_assert!(!b || *n);
                }
                before = now;
            }
        }
    }
}
