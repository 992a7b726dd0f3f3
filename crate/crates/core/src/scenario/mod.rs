//! Reproducible experiments: configuration, scripted events, termination
//! and metric sampling, plus one preset per figure-style experiment.

mod config_file;
mod convergence;
pub mod presets;

pub use convergence::{jaccard, ConvergenceDetector, ConvergenceParams};
pub use presets::{preset, PRESET_NAMES};

use std::path::{Path, PathBuf};

use crate::agents::AgentParams;
use crate::analysis::{Analyzer, RunMetrics};
use crate::arena::{self, Arena, ArenaEvent, ObstacleMode};
use crate::error::{Error, Result};
use crate::lattice::{DiffusionParams, OccupancyGrid};
use crate::pgm::GrayImage;
use crate::population::{GrowthShrinkParams, InitMode, Simulation};
use crate::render::{frame_file_name, render_frame, RenderMode, RenderParams};

/// Prefix naming an arena shipped with the crate instead of a file.
pub const BUNDLED_PREFIX: &str = "bundled:";

/// When a scripted event fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventTrigger {
    /// Before the projection pass of this step.
    Step(u64),
    /// The first time the run converges; the run then continues.
    Converged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledEvent {
    pub trigger: EventTrigger,
    pub event: ArenaEvent,
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// A PGM path, or `bundled:<name>`.
    pub arena: String,
    pub seed: u64,
    pub agent: AgentParams,
    pub growth: GrowthShrinkParams,
    pub diffusion: DiffusionParams,
    pub exposure_window: usize,
    pub source_strength: f64,
    pub wall_repellent: f64,
    pub obstacle_mode: ObstacleMode,
    pub exposed_strength: f64,
    pub covered_strength: f64,
    pub init_mode: InitMode,
    pub init_density: f64,
    /// Step-triggered events in step order, then convergence-triggered ones.
    pub events: Vec<ScheduledEvent>,
    pub max_steps: u64,
    pub convergence: ConvergenceParams,
    pub metric_interval: u64,
    /// Steps between frames; 0 disables frames.
    pub frame_interval: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            arena: String::new(),
            seed: 0,
            agent: AgentParams::default(),
            growth: GrowthShrinkParams::default(),
            diffusion: DiffusionParams::default(),
            exposure_window: arena::DEFAULT_EXPOSURE_WINDOW,
            source_strength: arena::DEFAULT_SOURCE_STRENGTH,
            wall_repellent: 0.0,
            obstacle_mode: ObstacleMode::Impassable,
            exposed_strength: arena::DEFAULT_EXPOSED_STRENGTH,
            covered_strength: arena::DEFAULT_COVERED_STRENGTH,
            init_mode: InitMode::HabitableOnly,
            init_density: 0.5,
            events: Vec::new(),
            max_steps: 500_000,
            convergence: ConvergenceParams::default(),
            metric_interval: 100,
            frame_interval: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.arena.is_empty() {
            return err("no arena given".into());
        }
        if self.max_steps < 1 {
            return err("max_steps must be >= 1".into());
        }
        if !(self.init_density > 0.0 && self.init_density <= 1.0) {
            return err(format!("init_density must lie in (0, 1], got {}", self.init_density));
        }
        if self.metric_interval < 1 {
            return err("metric_interval must be >= 1".into());
        }
        let steps: Vec<u64> = self
            .events
            .iter()
            .filter_map(|e| match e.trigger {
                EventTrigger::Step(s) => Some(s),
                EventTrigger::Converged => None,
            })
            .collect();
        if steps.windows(2).any(|w| w[0] > w[1]) {
            return err("events must be sorted by step".into());
        }
        if self.init_mode == InitMode::FullCover && self.obstacle_mode != ObstacleMode::Exposure {
            return err("init_mode full-cover needs obstacle_mode exposure".into());
        }
        self.agent.validate()?;
        self.growth.validate()?;
        self.diffusion.validate()?;
        self.convergence.validate()?;
        Ok(())
    }

    /// Load the arena and apply the configured stimulus settings.
    pub fn load_arena(&self, base_dir: Option<&Path>) -> Result<Arena> {
        let mut arena = match self.arena.strip_prefix(BUNDLED_PREFIX) {
            Some(name) => {
                let bytes = arena::bundled::bytes(name).ok_or_else(|| {
                    Error::ArenaLoad(format!(
                        "no bundled arena `{name}`; available: {}",
                        arena::bundled::names().collect::<Vec<_>>().join(", ")
                    ))
                })?;
                Arena::from_image(&GrayImage::decode(bytes)?)?
            }
            None => {
                let path = PathBuf::from(&self.arena);
                let path = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path,
                };
                Arena::load(&path)?
            }
        };
        arena.set_obstacle_mode(self.obstacle_mode);
        arena.set_source_strength(self.source_strength)?;
        arena.set_wall_repellent_strength(self.wall_repellent)?;
        arena.set_exposure(self.exposure_window, self.exposed_strength, self.covered_strength)?;
        Ok(arena)
    }

    /// Validate, load the arena and check that events name its sources.
    pub fn check(&self, base_dir: Option<&Path>) -> Result<Arena> {
        self.validate()?;
        let arena = self.load_arena(base_dir)?;
        for e in &self.events {
            let ArenaEvent::RemoveSource(id) = e.event;
            if arena.source(id).is_none() {
                return Err(Error::Scenario(format!("event `{}` names no source", e.event)));
            }
        }
        Ok(arena)
    }

    /// A populated simulation at step 0.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<Simulation> {
        let arena = self.check(base_dir)?;
        let mut sim = Simulation::new(arena, self.agent, self.growth, self.diffusion, self.seed)?;
        sim.populate(self.init_density, self.init_mode)?;
        Ok(sim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxSteps,
    /// The population died out.
    Extinct,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Converged => "converged",
            Self::MaxSteps => "max_steps",
            Self::Extinct => "extinct",
        })
    }
}

/// An event as it was applied, with the occupancy just before it.
#[derive(Debug, Clone)]
pub struct AppliedEvent {
    pub step: u64,
    pub event: ArenaEvent,
    pub occupancy_before: OccupancyGrid,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub termination: Termination,
    pub steps_executed: u64,
    /// One row every `metric_interval` steps, starting at step 0.
    pub metrics: Vec<RunMetrics>,
    /// Metrics of the final state.
    pub final_metrics: RunMetrics,
    pub oracle_length: Option<f64>,
    pub final_occupancy: OccupancyGrid,
    /// The arena as it ended, with removed sources marked inactive.
    pub final_arena: Arena,
    pub applied_events: Vec<AppliedEvent>,
}

impl RunResult {
    /// Metrics as CSV text with a header line.
    pub fn metrics_csv(&self) -> String {
        let mut s = String::from(RunMetrics::CSV_HEADER);
        s.push('\n');
        for m in &self.metrics {
            s.push_str(&m.csv_row());
            s.push('\n');
        }
        s
    }

    /// Line-oriented `key: value` summary.
    pub fn summary(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |v| format!("{v:.4}"));
        let m = &self.final_metrics;
        format!(
            "termination_reason: {}\nsteps: {}\nfinal_population: {}\nsources_connected: {}\n\
             components: {}\npath_length: {}\noracle_length: {}\nclearance: {}\nholes: {}\n",
            self.termination,
            self.steps_executed,
            m.population,
            m.sources_connected,
            m.component_count,
            opt(m.occupied_path_length),
            opt(self.oracle_length),
            opt(m.min_wall_clearance),
            m.hole_count
        )
    }
}

/// Side effects of a run beyond its result.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory for frames; frames go to `frames/` (occupancy) and
    /// `field/` (gamma-corrected field) inside it.
    pub frame_dir: Option<PathBuf>,
    /// Resolve relative arena paths against this directory.
    pub base_dir: Option<PathBuf>,
    /// Worker threads for the sensory pass; `None` runs sequentially.
    pub threads: Option<usize>,
    /// Check structural invariants at every metric sample.
    pub check_invariants: bool,
}

/// Run a scenario with no side effects.
pub fn run(config: &ScenarioConfig) -> Result<RunResult> {
    run_with(config, &RunOptions::default())
}

pub fn run_with(config: &ScenarioConfig, opts: &RunOptions) -> Result<RunResult> {
    let mut sim = config.build(opts.base_dir.as_deref())?;
    sim.set_threads(opts.threads)?;
    if let Some(dir) = &opts.frame_dir {
        for sub in ["frames", "field"] {
            let d = dir.join(sub);
            std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
    }

    let mut analyzer = Analyzer::new(sim.arena());
    let mut detector = ConvergenceDetector::new(config.convergence, config.metric_interval);
    let mut step_events: Vec<ArenaEvent> = Vec::new();
    let mut step_times: Vec<u64> = Vec::new();
    let mut converge_events: Vec<ArenaEvent> = Vec::new();
    for e in &config.events {
        match e.trigger {
            EventTrigger::Step(s) => {
                step_times.push(s);
                step_events.push(e.event);
            }
            EventTrigger::Converged => converge_events.push(e.event),
        }
    }
    let mut next_step_event = 0;
    let mut applied = Vec::new();
    let mut metrics = Vec::new();

    let termination = loop {
        let step = sim.step_counter();
        if config.frame_interval > 0 && step % config.frame_interval == 0 {
            if let Some(dir) = &opts.frame_dir {
                write_frames(&sim, dir, step)?;
            }
        }
        if step % config.metric_interval == 0 {
            if opts.check_invariants {
                sim.check_invariants()
                    .map_err(|e| Error::Scenario(format!("step {step}: {e}")))?;
            }
            let m = analyzer.measure(step, sim.arena(), sim.occupancy());
            if opts.check_invariants {
                check_path_bound(&m, analyzer.oracle_length())?;
            }
            metrics.push(m);
            let mask = analyzer.blob(sim.arena(), sim.occupancy());
            if detector.push(step, sim.population().len(), mask) {
                if !converge_events.is_empty() {
                    for event in converge_events.drain(..) {
                        apply(&mut sim, event, &mut applied)?;
                    }
                    analyzer = Analyzer::new(sim.arena());
                    detector.reset();
                } else if next_step_event == step_events.len() {
                    break Termination::Converged;
                }
            }
        }
        if sim.population().is_empty() {
            break Termination::Extinct;
        }
        if step >= config.max_steps {
            break Termination::MaxSteps;
        }
        let mut changed = false;
        while next_step_event < step_times.len() && step_times[next_step_event] == step {
            apply(&mut sim, step_events[next_step_event], &mut applied)?;
            next_step_event += 1;
            changed = true;
        }
        if changed {
            analyzer = Analyzer::new(sim.arena());
            detector.reset();
        }
        sim.step();
    };

    let steps_executed = sim.step_counter();
    let final_metrics = analyzer.measure(steps_executed, sim.arena(), sim.occupancy());
    Ok(RunResult {
        termination,
        steps_executed,
        metrics,
        final_metrics,
        oracle_length: analyzer.oracle_length(),
        final_occupancy: sim.occupancy().clone(),
        final_arena: sim.arena().clone(),
        applied_events: applied,
    })
}

fn apply(sim: &mut Simulation, event: ArenaEvent, log: &mut Vec<AppliedEvent>) -> Result<()> {
    log.push(AppliedEvent {
        step: sim.step_counter(),
        event,
        occupancy_before: sim.occupancy().clone(),
    });
    sim.apply_event(event)
}

fn check_path_bound(m: &RunMetrics, oracle: Option<f64>) -> Result<()> {
    if let (Some(path), Some(oracle)) = (m.occupied_path_length, oracle) {
        if path < oracle - 1e-9 {
            return Err(Error::Scenario(format!(
                "step {}: blob path {path} shorter than oracle {oracle}",
                m.step
            )));
        }
    }
    Ok(())
}

fn write_frames(sim: &Simulation, dir: &Path, step: u64) -> Result<()> {
    for (sub, mode) in [("frames", RenderMode::Occupancy), ("field", RenderMode::Field)] {
        let params = RenderParams {
            mode,
            ..RenderParams::default()
        };
        let img = render_frame(sim.lattice(), sim.occupancy(), sim.arena(), &params)?;
        img.write(&dir.join(sub).join(frame_file_name(step)))?;
    }
    Ok(())
}
