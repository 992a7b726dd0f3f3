//! Measurements of a blob against its arena: connectivity between sources,
//! path length against a shortest-path oracle, clearance from walls and the
//! number of enclosed holes.
//!
//! Per-step metrics are taken on the blob mask: the occupied cells closed
//! with a 3x3 square, so that the scattered single vacancies of a jammed
//! blob neither split it nor count as holes, with stray fragments under
//! [`MIN_BLOB_CELLS`] cells dropped. Wall clearance is taken over occupied
//! cells inside that mask.

mod geometry;
mod topology;

pub use geometry::{distance_transform, geodesic_distances};
pub use topology::{close, connected_components, hole_count, holes, Components};

use crate::arena::{Arena, CellClass};
use crate::error::{Error, Result};
use crate::lattice::OccupancyGrid;

/// Chebyshev distance from a source cell within which a blob cell anchors
/// that source.
pub const ANCHOR_RADIUS: usize = 2;

/// Cells a path may use: habitable and source cells.
pub fn passable_mask(arena: &Arena) -> Vec<bool> {
    arena
        .classes()
        .iter()
        .map(|&c| matches!(c, CellClass::Habitable | CellClass::Source))
        .collect()
}

fn source_cells(arena: &Arena, id: u32) -> Result<Vec<usize>> {
    let s = arena
        .source(id)
        .ok_or_else(|| Error::Scenario(format!("no source with id {id}")))?;
    Ok(s.cells.iter().map(|c| c.y * arena.width() + c.x).collect())
}

/// Cells within [`ANCHOR_RADIUS`] (Chebyshev) of any cell of the source.
pub fn anchor_cells(arena: &Arena, id: u32) -> Result<Vec<usize>> {
    let (w, h) = (arena.width(), arena.height());
    let mut mark = vec![false; w * h];
    for i in source_cells(arena, id)? {
        let (x, y) = (i % w, i / w);
        for ny in y.saturating_sub(ANCHOR_RADIUS)..(y + ANCHOR_RADIUS + 1).min(h) {
            for nx in x.saturating_sub(ANCHOR_RADIUS)..(x + ANCHOR_RADIUS + 1).min(w) {
                mark[ny * w + nx] = true;
            }
        }
    }
    Ok((0..w * h).filter(|&i| mark[i]).collect())
}

/// Geodesic distance over passable cells from the nearest cell of a source.
fn source_distances(arena: &Arena, passable: &[bool], id: u32) -> Result<Vec<f64>> {
    let seeds = source_cells(arena, id)?.into_iter().map(|i| (i, 0.0));
    Ok(geodesic_distances(arena.width(), arena.height(), passable, seeds))
}

/// Shortest octile path between the nearest cells of two sources through
/// habitable and source cells, or `None` when no route exists.
pub fn oracle_shortest_path(arena: &Arena, a: u32, b: u32) -> Result<Option<f64>> {
    let passable = passable_mask(arena);
    let da = source_distances(arena, &passable, a)?;
    let best = source_cells(arena, b)?
        .into_iter()
        .map(|i| da[i])
        .fold(f64::INFINITY, f64::min);
    Ok(best.is_finite().then_some(best))
}

/// Octile length of the shortest route between two sources that runs
/// through `occupied` passable cells, or `None` when the blob does not link
/// them.
///
/// The route starts at a blob cell anchoring `a` and ends at one anchoring
/// `b`; the stretches between each source and its anchoring blob cell are
/// charged at their geodesic length, so the result is never shorter than
/// the oracle.
pub fn occupied_path_length(arena: &Arena, occupied: &[bool], a: u32, b: u32) -> Result<Option<f64>> {
    let passable = passable_mask(arena);
    let ga = source_distances(arena, &passable, a)?;
    let gb = source_distances(arena, &passable, b)?;
    Ok(path_through(
        arena,
        &passable,
        occupied,
        &anchor_cells(arena, a)?,
        &ga,
        &anchor_cells(arena, b)?,
        &gb,
    ))
}

fn path_through(
    arena: &Arena,
    passable: &[bool],
    occupied: &[bool],
    anchors_a: &[usize],
    ga: &[f64],
    anchors_b: &[usize],
    gb: &[f64],
) -> Option<f64> {
    let usable: Vec<bool> = occupied.iter().zip(passable).map(|(&o, &p)| o && p).collect();
    let seeds = anchors_a.iter().filter(|&&i| usable[i]).map(|&i| (i, ga[i]));
    let d = geodesic_distances(arena.width(), arena.height(), &usable, seeds);
    let best = anchors_b.iter().map(|&i| d[i] + gb[i]).fold(f64::INFINITY, f64::min);
    best.is_finite().then_some(best)
}

/// Distance from each cell to the nearest wall (or impassable obstacle).
pub fn clearance_map(arena: &Arena) -> Vec<f64> {
    distance_transform(arena.width(), arena.height(), arena.sink_mask())
}

/// Smallest distance from an occupied cell to a wall; infinite when nothing
/// is occupied or there are no walls.
pub fn wall_clearance(arena: &Arena, occupied: &[bool]) -> f64 {
    min_clearance(&clearance_map(arena), occupied)
}

fn min_clearance(map: &[f64], occupied: &[bool]) -> f64 {
    map.iter()
        .zip(occupied)
        .filter(|(_, &o)| o)
        .map(|(&d, _)| d)
        .fold(f64::INFINITY, f64::min)
}

/// Components of the closed mask smaller than this are stray particles
/// rather than blob.
pub const MIN_BLOB_CELLS: usize = 25;

/// Occupied cells closed with a 3x3 square, restricted to cells a particle
/// could stand on, without components smaller than `min_cells`.
pub fn blob_mask(arena: &Arena, occupancy: &OccupancyGrid, min_cells: usize) -> Vec<bool> {
    let (w, h) = (arena.width(), arena.height());
    let mut mask = close(w, h, &occupancy.occupied_mask(), 1);
    for (m, &e) in mask.iter_mut().zip(arena.enterable_mask()) {
        *m &= e;
    }
    if min_cells > 1 {
        let comps = connected_components(w, h, &mask);
        let sizes = comps.sizes();
        for (m, &l) in mask.iter_mut().zip(&comps.labels) {
            *m = l > 0 && sizes[l as usize - 1] >= min_cells;
        }
    }
    mask
}

/// Occupied cells whose centres lie within `radius` of `(cx, cy)`.
pub fn occupied_within(occupancy: &OccupancyGrid, cx: f64, cy: f64, radius: f64) -> usize {
    let w = occupancy.width();
    (0..w * occupancy.height())
        .filter(|&i| {
            let dx = (i % w) as f64 + 0.5 - cx;
            let dy = (i / w) as f64 + 0.5 - cy;
            occupancy.is_occupied(i) && dx * dx + dy * dy <= radius * radius
        })
        .count()
}

/// One row of run metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub step: u64,
    pub population: usize,
    pub component_count: usize,
    pub sources_connected: bool,
    /// Blob route length between the measured source pair.
    pub occupied_path_length: Option<f64>,
    pub min_wall_clearance: Option<f64>,
    pub hole_count: usize,
}

impl RunMetrics {
    pub const CSV_HEADER: &'static str = "step,population,components,sources_connected,path_length,clearance,holes";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.step,
            self.population,
            self.component_count,
            self.sources_connected,
            opt(self.occupied_path_length),
            opt(self.min_wall_clearance),
            self.hole_count
        )
    }
}

/// Arena-dependent quantities computed once and reused for every sample.
#[derive(Debug, Clone)]
pub struct Analyzer {
    width: usize,
    height: usize,
    passable: Vec<bool>,
    clearance: Vec<f64>,
    anchors: Vec<(u32, Vec<usize>)>,
    pair: Option<PairData>,
    min_blob_cells: usize,
}

#[derive(Debug, Clone)]
struct PairData {
    a: u32,
    b: u32,
    oracle: Option<f64>,
    ga: Vec<f64>,
    gb: Vec<f64>,
}

impl Analyzer {
    /// Prepare measurements for the arena's active sources. Path length is
    /// measured between the two active sources farthest apart by the
    /// oracle.
    pub fn new(arena: &Arena) -> Self {
        let passable = passable_mask(arena);
        let active: Vec<u32> = arena.active_sources().map(|s| s.id).collect();
        let anchors = active
            .iter()
            .map(|&id| (id, anchor_cells(arena, id).expect("active source exists")))
            .collect();
        let dists: Vec<Vec<f64>> = active
            .iter()
            .map(|&id| source_distances(arena, &passable, id).expect("active source exists"))
            .collect();
        let mut pair: Option<(usize, usize, f64)> = None;
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let d = source_cells(arena, active[j])
                    .expect("active source exists")
                    .into_iter()
                    .map(|c| dists[i][c])
                    .fold(f64::INFINITY, f64::min);
                let key = if d.is_finite() { d } else { -1.0 };
                if pair.map_or(true, |(_, _, best)| key > best) {
                    pair = Some((i, j, key));
                }
            }
        }
        let pair = pair.map(|(i, j, d)| PairData {
            a: active[i],
            b: active[j],
            oracle: (d >= 0.0).then_some(d),
            ga: dists[i].clone(),
            gb: dists[j].clone(),
        });
        Self {
            width: arena.width(),
            height: arena.height(),
            passable,
            clearance: clearance_map(arena),
            anchors,
            pair,
            min_blob_cells: MIN_BLOB_CELLS,
        }
    }

    /// Override [`MIN_BLOB_CELLS`].
    pub fn with_min_blob_cells(mut self, cells: usize) -> Self {
        self.min_blob_cells = cells;
        self
    }

    /// The mask all metrics are taken on.
    pub fn blob(&self, arena: &Arena, occupancy: &OccupancyGrid) -> Vec<bool> {
        blob_mask(arena, occupancy, self.min_blob_cells)
    }

    /// Source ids whose route length is reported.
    pub fn measured_pair(&self) -> Option<(u32, u32)> {
        self.pair.as_ref().map(|p| (p.a, p.b))
    }

    /// Oracle length for the measured pair.
    pub fn oracle_length(&self) -> Option<f64> {
        self.pair.as_ref().and_then(|p| p.oracle)
    }

    /// Whether one component of `mask` anchors every active source.
    pub fn sources_connected(&self, comps: &Components) -> bool {
        if self.anchors.is_empty() {
            return false;
        }
        let mut common: Option<Vec<u32>> = None;
        for (_, cells) in &self.anchors {
            let mut labels: Vec<u32> = cells.iter().map(|&i| comps.labels[i]).filter(|&l| l > 0).collect();
            labels.sort_unstable();
            labels.dedup();
            common = Some(match common {
                None => labels,
                Some(prev) => prev.into_iter().filter(|l| labels.binary_search(l).is_ok()).collect(),
            });
        }
        common.is_some_and(|c| !c.is_empty())
    }

    /// Metrics for the current occupancy.
    pub fn measure(&self, step: u64, arena: &Arena, occupancy: &OccupancyGrid) -> RunMetrics {
        let mask = self.blob(arena, occupancy);
        let comps = connected_components(self.width, self.height, &mask);
        let sources_connected = self.sources_connected(&comps);
        let occupied_path_length = match &self.pair {
            Some(p) if sources_connected => {
                let anchors = |id: u32| &self.anchors.iter().find(|(s, _)| *s == id).expect("anchored").1;
                path_through(arena, &self.passable, &mask, anchors(p.a), &p.ga, anchors(p.b), &p.gb)
            }
            _ => None,
        };
        let in_blob: Vec<bool> = occupancy
            .occupied_mask()
            .iter()
            .zip(&mask)
            .map(|(&o, &m)| o && m)
            .collect();
        let clearance = min_clearance(&self.clearance, &in_blob);
        RunMetrics {
            step,
            population: occupancy.count(),
            component_count: comps.count,
            sources_connected,
            occupied_path_length,
            min_wall_clearance: clearance.is_finite().then_some(clearance),
            hole_count: hole_count(self.width, self.height, &mask),
        }
    }
}
