//! Path planning by morphological adaptation of a shrinking particle blob.
//!
//! A population of simple particles on a diffusive lattice senses and
//! deposits a single chemoattractant. Collectively the particles form a
//! cohesive blob; removing particles faster than they divide shrinks it, and
//! attractant sources, repellent walls and exposure-triggered obstacle
//! repellent shape what remains into a path.

pub mod agents;
pub mod analysis;
pub mod arena;
pub mod error;
pub mod lattice;
pub mod pgm;
pub mod population;
pub mod render;
pub mod scenario;

pub use agents::{AgentParams, Motility, Particle, Steer};
pub use analysis::{Analyzer, RunMetrics};
pub use arena::{Arena, ArenaEvent, CellClass, ExposureState, ObstacleMode, Source};
pub use error::{Error, Result};
pub use lattice::{Cell, ChemoLattice, DiffusionParams, OccupancyGrid};
pub use population::{GrowthShrinkParams, InitMode, Population, SimRng, Simulation, StepReport};
pub use scenario::{preset, RunResult, ScenarioConfig, Termination};
