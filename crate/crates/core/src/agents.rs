//! Particles and their two behavioural stages.
//!
//! Angles are in degrees, measured clockwise from +x in screen coordinates
//! (y grows downward). Rotating right adds the rotation angle, rotating left
//! subtracts it; the left sensor sits at `heading - SA`, the right one at
//! `heading + SA`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{ChemoLattice, OccupancyGrid, ParticleId};

/// A mobile particle with a continuous position inside its occupied cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    x: f64,
    y: f64,
    orientation: f64,
    // Unit heading vector kept in step with `orientation`.
    hx: f64,
    hy: f64,
    pub moved_last_step: bool,
}

impl Particle {
    pub fn new(x: f64, y: f64, orientation: f64) -> Self {
        let orientation = normalize_degrees(orientation);
        let (hy, hx) = orientation.to_radians().sin_cos();
        Self {
            x,
            y,
            orientation,
            hx,
            hy,
            moved_last_step: false,
        }
    }

    /// A particle at the centre of cell `(cx, cy)`.
    pub fn at_cell(cx: usize, cy: usize, orientation: f64) -> Self {
        Self::new(cx as f64 + 0.5, cy as f64 + 0.5, orientation)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn heading(&self) -> (f64, f64) {
        (self.hx, self.hy)
    }

    /// Cell containing the particle.
    #[inline]
    pub fn cell(&self) -> (usize, usize) {
        // Via i32: far cheaper than a saturating cast to usize.
        (self.x as i32 as usize, self.y as i32 as usize)
    }

    pub fn set_orientation(&mut self, degrees: f64) {
        *self = Particle {
            moved_last_step: self.moved_last_step,
            ..Particle::new(self.x, self.y, degrees)
        };
    }

    #[inline]
    fn rotate(&mut self, degrees: f64, cos: f64, sin: f64) {
        // |degrees| <= 180, so one wrap suffices.
        let mut o = self.orientation + degrees;
        if o >= 360.0 {
            o -= 360.0;
        } else if o < 0.0 {
            o += 360.0;
            if o >= 360.0 {
                o = 0.0;
            }
        }
        self.orientation = o;
        let (hx, hy) = (self.hx, self.hy);
        self.hx = hx * cos - hy * sin;
        self.hy = hy * cos + hx * sin;
    }

    #[inline]
    fn randomize_orientation<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.orientation = rng.gen::<f64>() * 360.0;
        let (hy, hx) = self.orientation.to_radians().sin_cos();
        self.hx = hx;
        self.hy = hy;
    }
}

#[inline]
pub fn normalize_degrees(deg: f64) -> f64 {
    let d = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs.
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentParams {
    /// Sensor offset distance in pixels.
    pub sensor_offset: f64,
    /// Angle of the side sensors from the heading, degrees.
    pub sensor_angle: f64,
    /// Rotation per steering decision, degrees.
    pub rotation_angle: f64,
    pub step_length: f64,
    /// Trail deposited on each successful move.
    pub deposit_amount: f64,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            sensor_offset: 7.0,
            sensor_angle: 90.0,
            rotation_angle: 45.0,
            step_length: 1.0,
            deposit_amount: 5.0,
        }
    }
}

impl AgentParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sensor_offset >= 3.0) {
            return Err(Error::Config(format!(
                "sensor offset must be >= 3 pixels, got {}",
                self.sensor_offset
            )));
        }
        for (name, v) in [
            ("sensor angle", self.sensor_angle),
            ("rotation angle", self.rotation_angle),
        ] {
            if !(v > 0.0 && v <= 180.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 180], got {v}")));
            }
        }
        if !(self.step_length > 0.0 && self.step_length.is_finite()) {
            return Err(Error::Config(format!(
                "step length must be positive, got {}",
                self.step_length
            )));
        }
        if !self.deposit_amount.is_finite() {
            return Err(Error::Config("deposit amount must be finite".into()));
        }
        Ok(())
    }
}

/// Which way the sensory stage turned a particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Steer {
    Straight,
    Left,
    Right,
    Random,
}

/// Agent parameters with their trigonometry precomputed.
#[derive(Debug, Clone, Copy)]
pub struct Motility {
    params: AgentParams,
    sa_cos: f64,
    sa_sin: f64,
    ra_cos: f64,
    ra_sin: f64,
}

impl Motility {
    pub fn new(params: AgentParams) -> Self {
        let (sa_sin, sa_cos) = params.sensor_angle.to_radians().sin_cos();
        let (ra_sin, ra_cos) = params.rotation_angle.to_radians().sin_cos();
        Self {
            params,
            sa_cos,
            sa_sin,
            ra_cos,
            ra_sin,
        }
    }

    pub fn params(&self) -> &AgentParams {
        &self.params
    }

    /// Read the three forward sensors as `(FL, F, FR)`.
    #[inline]
    pub fn sense(&self, p: &Particle, lattice: &ChemoLattice) -> (f64, f64, f64) {
        let so = self.params.sensor_offset;
        let (hx, hy) = (p.hx, p.hy);
        let (c, s) = (self.sa_cos, self.sa_sin);
        let front = lattice.sample(p.x + so * hx, p.y + so * hy);
        let left = lattice.sample(p.x + so * (hx * c + hy * s), p.y + so * (hy * c - hx * s));
        let right = lattice.sample(p.x + so * (hx * c - hy * s), p.y + so * (hy * c + hx * s));
        (left, front, right)
    }

    /// Sensory stage: turn towards the strongest of the three samples.
    /// Draws from `rng` only when front is weaker than both sides.
    #[inline]
    pub fn sense_and_orient<R: Rng + ?Sized>(&self, p: &mut Particle, lattice: &ChemoLattice, rng: &mut R) -> Steer {
        let (fl, f, fr) = self.sense(p, lattice);
        let steer = steer_decision(fl, f, fr);
        let ra = self.params.rotation_angle;
        match steer {
            Steer::Straight => {}
            Steer::Right => p.rotate(ra, self.ra_cos, self.ra_sin),
            Steer::Left => p.rotate(-ra, self.ra_cos, -self.ra_sin),
            Steer::Random => {
                if rng.gen::<bool>() {
                    p.rotate(ra, self.ra_cos, self.ra_sin)
                } else {
                    p.rotate(-ra, self.ra_cos, -self.ra_sin)
                }
            }
        }
        steer
    }

    /// Motor stage: step forward into an empty enterable cell, depositing
    /// trail there, or stay put and pick a fresh random heading.
    ///
    /// `id` is the particle's registration in `occ`; `enterable` is indexed
    /// like the lattice. Returns whether the particle moved.
    #[inline]
    pub fn attempt_move<R: Rng + ?Sized>(
        &self,
        p: &mut Particle,
        id: ParticleId,
        occ: &mut OccupancyGrid,
        lattice: &mut ChemoLattice,
        enterable: &[bool],
        rng: &mut R,
    ) -> bool {
        let w = lattice.width();
        let nx = p.x + self.params.step_length * p.hx;
        let ny = p.y + self.params.step_length * p.hy;
        let (cx, cy) = p.cell();
        let from = cy * w + cx;
        debug_assert_eq!(occ.occupant(from), Some(id));

        let target = if nx >= 0.0 && ny >= 0.0 && nx < w as f64 && ny < lattice.height() as f64 {
            let t = ny as i32 as usize * w + nx as i32 as usize;
            (t != from && enterable[t] && !occ.is_occupied(t)).then_some(t)
        } else {
            None
        };

        match target {
            Some(t) => {
                occ.relocate(from, t);
                p.x = nx;
                p.y = ny;
                lattice.deposit_index(t, self.params.deposit_amount);
                p.moved_last_step = true;
            }
            None => {
                p.randomize_orientation(rng);
                p.moved_last_step = false;
            }
        }
        p.moved_last_step
    }
}

/// The steering table applied to the left, front and right samples.
#[inline]
pub fn steer_decision(fl: f64, f: f64, fr: f64) -> Steer {
    if f > fl && f > fr {
        Steer::Straight
    } else if f < fl && f < fr {
        Steer::Random
    } else if fl < fr {
        Steer::Right
    } else if fr < fl {
        Steer::Left
    } else {
        Steer::Straight
    }
}
