//! One ready-made configuration per figure-style experiment.

use super::{ConvergenceParams, EventTrigger, ScenarioConfig, ScheduledEvent};
use crate::arena::{ArenaEvent, ObstacleMode, DEFAULT_SOURCE_STRENGTH};
use crate::error::{Error, Result};
use crate::population::{GrowthShrinkParams, InitMode};

pub const PRESET_NAMES: &[&str] = &[
    "fig1_simple",
    "fig2_multisource",
    "fig3_removal_23",
    "fig4_removal_24",
    "fig5_collision_free",
    "fig6_obstacles_multi",
    "fig7_exposure",
    "fig8_obstacle_field",
];

/// Stopping rule for the presets. Particle turnover keeps a settled blob's
/// population within a few percent and its outline moving by a cell or
/// two, so the stricter defaults would never fire. The long window lets
/// an abandoned arm finish retracting before the blob counts as settled.
pub const PRESET_CONVERGENCE: ConvergenceParams = ConvergenceParams {
    window: 4000,
    population_tolerance: 0.02,
    occupancy_jaccard: 0.75,
};

/// Removal interval for the slower shrinkage of the exposure presets.
pub const SLOW_REMOVAL_INTERVAL: u64 = 3;

/// Survival threshold for the collision-free preset. At the shared value
/// the wall-repelled blob stalls as two loose lobes either side of the
/// spur.
pub const COLLISION_FREE_SURVIVAL_MAX: u32 = 70;

fn base(arena: &str) -> ScenarioConfig {
    ScenarioConfig {
        arena: format!("{}{arena}", super::BUNDLED_PREFIX),
        seed: 42,
        growth: GrowthShrinkParams::shrinking(),
        init_density: 1.0,
        convergence: PRESET_CONVERGENCE,
        ..ScenarioConfig::default()
    }
}

fn on_convergence(ids: &[u32]) -> Vec<ScheduledEvent> {
    ids.iter()
        .map(|&id| ScheduledEvent {
            trigger: EventTrigger::Converged,
            event: ArenaEvent::RemoveSource(id),
        })
        .collect()
}

fn exposure(arena: &str) -> ScenarioConfig {
    let mut c = base(arena);
    c.obstacle_mode = ObstacleMode::Exposure;
    c.init_mode = InitMode::FullCover;
    c.growth.removal_interval = SLOW_REMOVAL_INTERVAL;
    c
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    Ok(match name {
        "fig1_simple" => base("polygon"),
        "fig2_multisource" => base("four_points"),
        "fig3_removal_23" => ScenarioConfig {
            events: on_convergence(&[2, 3]),
            ..base("four_points")
        },
        "fig4_removal_24" => ScenarioConfig {
            events: on_convergence(&[2, 4]),
            ..base("four_points")
        },
        "fig5_collision_free" => {
            let mut c = base("polygon_offset");
            c.wall_repellent = -DEFAULT_SOURCE_STRENGTH;
            c.growth.survival_max = COLLISION_FREE_SURVIVAL_MAX;
            c
        }
        "fig6_obstacles_multi" => base("obstacles"),
        "fig7_exposure" => exposure("obstacles"),
        "fig8_obstacle_field" => exposure("obstacle_field"),
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESET_NAMES.to_vec(),
            })
        }
    })
}
