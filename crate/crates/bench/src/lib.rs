//! Fixtures shared by the benchmarks.

use morphadapt_core::pgm::GrayImage;
use morphadapt_core::{Arena, GrowthShrinkParams, InitMode, Simulation};

/// Open square arena: two-cell wall frame and a source near each side.
pub fn open_arena(side: usize) -> Arena {
    let mut img = GrayImage::new(side, side, 0);
    for y in 0..side {
        for x in 0..side {
            if x < 2 || y < 2 || x >= side - 2 || y >= side - 2 {
                img.pixels[y * side + x] = 128;
            }
        }
    }
    for (sx, sy) in [(side / 8, side / 2), (side - side / 8, side / 2)] {
        for dy in 0..3 {
            for dx in 0..3 {
                img.pixels[(sy + dy) * side + sx + dx] = 255;
            }
        }
    }
    Arena::from_image(&img).expect("valid fixture arena")
}

/// A simulation on [`open_arena`] holding about `particles` particles.
pub fn simulation(side: usize, particles: usize, seed: u64) -> Simulation {
    let arena = open_arena(side);
    let habitable = arena.enterable_mask().iter().filter(|&&e| e).count();
    let density = (particles as f64 / habitable as f64).min(1.0);
    let mut sim = Simulation::new(
        arena,
        Default::default(),
        GrowthShrinkParams::shrinking(),
        Default::default(),
        seed,
    )
    .expect("default parameters are valid");
    sim.populate(density, InitMode::HabitableOnly)
        .expect("density in range");
    sim
}

/// Field of pseudo-random values for kernel benchmarks.
pub fn noise(len: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..len)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 10.0 - 5.0
        })
        .collect()
}
