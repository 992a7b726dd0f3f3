use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use super::{census, growth_test, survival_test, Fate, GrowthShrinkParams, InitMode, Population, SimRng};
use crate::agents::{AgentParams, Motility};
use crate::arena::{Arena, ArenaEvent, ExposureState, ObstacleMode};
use crate::error::Result;
use crate::lattice::{ChemoLattice, DiffusionParams, OccupancyGrid, ParticleId};

/// What one scheduler step did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepReport {
    pub step: u64,
    pub moved: usize,
    /// Offspring created, when the growth pass ran this step.
    pub spawned: Option<usize>,
    /// Particles deleted, when the survival pass ran this step.
    pub removed: Option<usize>,
}

/// Arena, field, occupancy and population advanced together.
///
/// Each step runs, in order: stimulus projection, the sensory pass, the
/// motor pass, the growth pass (every `division_interval` steps), the
/// survival pass (every `removal_interval` steps) and diffusion. Sensory and
/// motor passes visit particles in independent fresh random orders.
#[derive(Debug)]
pub struct Simulation {
    arena: Arena,
    lattice: ChemoLattice,
    occupancy: OccupancyGrid,
    population: Population,
    motility: Motility,
    growth: GrowthShrinkParams,
    diffusion: DiffusionParams,
    exposure: Option<ExposureState>,
    pool: Option<rayon::ThreadPool>,
}

impl Simulation {
    /// Build a simulation with an empty population.
    pub fn new(
        arena: Arena,
        agent: AgentParams,
        growth: GrowthShrinkParams,
        diffusion: DiffusionParams,
        seed: u64,
    ) -> Result<Self> {
        agent.validate()?;
        growth.validate()?;
        diffusion.validate()?;
        let lattice = arena.new_lattice();
        let occupancy = OccupancyGrid::new(arena.width(), arena.height());
        Ok(Self {
            arena,
            lattice,
            occupancy,
            population: Population::empty(SimRng::seed_from_u64(seed)),
            motility: Motility::new(agent),
            growth,
            diffusion,
            exposure: None,
            pool: None,
        })
    }

    /// Seed the initial blob, replacing any existing population. The
    /// population's random stream continues from the initialisation draws.
    pub fn populate(&mut self, density: f64, mode: InitMode) -> Result<()> {
        self.occupancy = OccupancyGrid::new(self.arena.width(), self.arena.height());
        let rng = self.population.rng.clone();
        self.population = Population::initialize(&self.arena, &mut self.occupancy, density, mode, rng)?;
        Ok(())
    }

    /// Run the sensory pass on `threads` worker threads. Parallel runs are
    /// reproducible for a fixed thread count but differ from sequential runs.
    pub fn set_threads(&mut self, threads: Option<usize>) -> Result<()> {
        self.pool = match threads {
            Some(n) if n > 0 => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?,
            ),
            _ => None,
        };
        Ok(())
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn lattice(&self) -> &ChemoLattice {
        &self.lattice
    }

    pub fn lattice_mut(&mut self) -> &mut ChemoLattice {
        &mut self.lattice
    }

    pub fn occupancy(&self) -> &OccupancyGrid {
        &self.occupancy
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn step_counter(&self) -> u64 {
        self.population.step_counter
    }

    pub fn exposure(&self) -> Option<&ExposureState> {
        self.exposure.as_ref()
    }

    pub fn apply_event(&mut self, event: ArenaEvent) -> Result<()> {
        self.arena.apply_event(event)
    }

    pub fn spawn(&mut self, p: crate::agents::Particle) -> bool {
        self.population.spawn(p, &mut self.occupancy)
    }

    pub fn step(&mut self) -> StepReport {
        let step = self.population.step_counter;
        let mut report = StepReport {
            step,
            ..Default::default()
        };

        self.project();
        self.sensory_pass();
        report.moved = self.motor_pass();
        if step % self.growth.division_interval == 0 {
            report.spawned = Some(self.growth_pass());
        }
        if step % self.growth.removal_interval == 0 {
            report.removed = Some(self.survival_pass());
        }
        self.lattice.diffuse_and_damp(&self.diffusion);
        self.population.step_counter += 1;
        report
    }

    fn project(&mut self) {
        self.exposure = match self.arena.obstacle_mode() {
            ObstacleMode::Exposure if !self.arena.obstacle_cells().is_empty() => {
                Some(self.arena.update_exposure(&self.occupancy))
            }
            _ => None,
        };
        self.arena.project_stimuli(self.exposure.as_ref(), &mut self.lattice);
    }

    fn sensory_pass(&mut self) {
        let pop = &mut self.population;
        match &self.pool {
            None => {
                for p in pop.particles.iter_mut() {
                    self.motility.sense_and_orient(p, &self.lattice, &mut pop.rng);
                }
            }
            Some(pool) => {
                const CHUNK: usize = 4096;
                let seeds: Vec<u64> = (0..pop.particles.len().div_ceil(CHUNK))
                    .map(|_| pop.rng.gen())
                    .collect();
                let (motility, lattice) = (&self.motility, &self.lattice);
                pool.install(|| {
                    pop.particles
                        .par_chunks_mut(CHUNK)
                        .zip(seeds)
                        .for_each(|(chunk, seed)| {
                            let mut rng = SimRng::seed_from_u64(seed);
                            for p in chunk {
                                motility.sense_and_orient(p, lattice, &mut rng);
                            }
                        });
                });
            }
        }
    }

    fn motor_pass(&mut self) -> usize {
        let order = self.population.shuffled_order();
        let pop = &mut self.population;
        let enterable = self.arena.enterable_mask();
        let mut moved = 0;
        for &i in &order {
            moved += usize::from(self.motility.attempt_move(
                &mut pop.particles[i as usize],
                i as ParticleId,
                &mut self.occupancy,
                &mut self.lattice,
                enterable,
                &mut pop.rng,
            ));
        }
        self.population.order = order;
        moved
    }

    /// Census is taken from the pass-start occupancy; spawn sites are
    /// checked against live occupancy. Offspring are not tested this pass.
    fn growth_pass(&mut self) -> usize {
        let table = self.occupancy.census_table();
        let g = self.growth;
        // Only particles inside the growth band can divide, and the band test
        // reads the snapshot, so the random order is drawn over those alone.
        let order = self
            .population
            .shuffled_subset(|p| p.moved_last_step && (g.growth_min..=g.growth_max).contains(&census(p, &table, &g)));
        let enterable = self.arena.enterable_mask();
        let mut spawned = 0;
        for &i in &order {
            let parent = self.population.particles[i as usize];
            if let Some(child) = growth_test(
                &parent,
                &table,
                &self.occupancy,
                enterable,
                &self.growth,
                &mut self.population.rng,
            ) {
                let ok = self.population.spawn(child, &mut self.occupancy);
                debug_assert!(ok);
                spawned += 1;
            }
        }
        self.population.order = order;
        spawned
    }

    /// Survival tests visit particles in a fresh random order against live
    /// occupancy: each deletion vacates its cell before the next particle is
    /// counted.
    fn survival_pass(&mut self) -> usize {
        // Counts only fall during the pass, so a particle within the threshold
        // at pass start survives and needs no live recount.
        let table = self.occupancy.census_table();
        let g = self.growth;
        let order = self
            .population
            .shuffled_subset(|p| survival_test(p, &table, &g) == Fate::Delete);
        let w = self.occupancy.width();
        let window = self.growth.census_window;
        let mut doomed = Vec::new();
        for &i in &order {
            let (x, y) = self.population.particles[i as usize].cell();
            if self.occupancy.window_count(x, y, window) > self.growth.survival_max {
                self.occupancy.release(y * w + x);
                doomed.push(i as usize);
            }
        }
        self.population.order = order;
        let n = doomed.len();
        if n > 0 {
            self.population.remove_many(doomed, &mut self.occupancy);
        }
        n
    }

    /// Check that grid and particle list agree and sinks read zero.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let w = self.arena.width();
        if self.occupancy.count() != self.population.len() {
            return Err(format!(
                "grid holds {} particles, population {}",
                self.occupancy.count(),
                self.population.len()
            ));
        }
        for (i, p) in self.population.particles.iter().enumerate() {
            let (x, y) = p.cell();
            if self.occupancy.occupant(y * w + x) != Some(i as ParticleId) {
                return Err(format!("particle {i} not registered at its cell ({x}, {y})"));
            }
        }
        for (i, (&s, &v)) in self.arena.sink_mask().iter().zip(self.lattice.values()).enumerate() {
            if s && v != 0.0 {
                return Err(format!("sink cell {i} reads {v}"));
            }
            if !v.is_finite() {
                return Err(format!("cell {i} holds non-finite {v}"));
            }
        }
        Ok(())
    }
}
