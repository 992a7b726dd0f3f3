//! Flat `key = value` scenario files.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{EventTrigger, ScenarioConfig, ScheduledEvent};
use crate::arena::ArenaEvent;
use crate::error::{Error, Result};

const KEYS: &[&str] = &[
    "arena",
    "seed",
    "so",
    "sa",
    "ra",
    "step_length",
    "deposit",
    "damping",
    "kernel",
    "census_window",
    "growth_min",
    "growth_max",
    "survival_max",
    "division_interval",
    "removal_interval",
    "exposure_window",
    "source_strength",
    "wall_repellent",
    "obstacle_mode",
    "exposed_strength",
    "covered_strength",
    "init_mode",
    "init_density",
    "max_steps",
    "convergence_window",
    "population_tolerance",
    "occupancy_jaccard",
    "metric_interval",
    "frame_interval",
];

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("line {line}: bad value `{raw}` for `{key}`")))
}

fn parse_event(raw: &str, line: usize) -> Result<ScheduledEvent> {
    let bad = || {
        Error::Config(format!(
            "line {line}: event must read `<step|converged> remove_source <id>`, got `{raw}`"
        ))
    };
    let parts: Vec<&str> = raw.split_whitespace().collect();
    let [when, "remove_source", id] = parts[..] else {
        return Err(bad());
    };
    let trigger = match when {
        "converged" => EventTrigger::Converged,
        s => EventTrigger::Step(s.parse().map_err(|_| bad())?),
    };
    let id = id.parse().map_err(|_| bad())?;
    Ok(ScheduledEvent {
        trigger,
        event: ArenaEvent::RemoveSource(id),
    })
}

impl ScenarioConfig {
    /// Parse config text. Keys left out keep their defaults; `arena` is
    /// required.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ScenarioConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw_line) in text.lines().enumerate() {
            let n = n + 1;
            let line = raw_line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("line {n}: expected `key = value`")))?;
            if key == "event" {
                c.events.push(parse_event(raw, n)?);
                continue;
            }
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!("line {n}: unknown key `{key}`")));
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {n}: duplicate key `{key}`")));
            }
            match key {
                "arena" => c.arena = raw.to_string(),
                "seed" => c.seed = value(key, raw, n)?,
                "so" => c.agent.sensor_offset = value(key, raw, n)?,
                "sa" => c.agent.sensor_angle = value(key, raw, n)?,
                "ra" => c.agent.rotation_angle = value(key, raw, n)?,
                "step_length" => c.agent.step_length = value(key, raw, n)?,
                "deposit" => c.agent.deposit_amount = value(key, raw, n)?,
                "damping" => c.diffusion.damping = value(key, raw, n)?,
                "kernel" => c.diffusion.kernel_size = value(key, raw, n)?,
                "census_window" => c.growth.census_window = value(key, raw, n)?,
                "growth_min" => c.growth.growth_min = value(key, raw, n)?,
                "growth_max" => c.growth.growth_max = value(key, raw, n)?,
                "survival_max" => c.growth.survival_max = value(key, raw, n)?,
                "division_interval" => c.growth.division_interval = value(key, raw, n)?,
                "removal_interval" => c.growth.removal_interval = value(key, raw, n)?,
                "exposure_window" => c.exposure_window = value(key, raw, n)?,
                "source_strength" => c.source_strength = value(key, raw, n)?,
                "wall_repellent" => c.wall_repellent = value(key, raw, n)?,
                "obstacle_mode" => c.obstacle_mode = raw.parse()?,
                "exposed_strength" => c.exposed_strength = value(key, raw, n)?,
                "covered_strength" => c.covered_strength = value(key, raw, n)?,
                "init_mode" => c.init_mode = raw.parse()?,
                "init_density" => c.init_density = value(key, raw, n)?,
                "max_steps" => c.max_steps = value(key, raw, n)?,
                "convergence_window" => c.convergence.window = value(key, raw, n)?,
                "population_tolerance" => c.convergence.population_tolerance = value(key, raw, n)?,
                "occupancy_jaccard" => c.convergence.occupancy_jaccard = value(key, raw, n)?,
                "metric_interval" => c.metric_interval = value(key, raw, n)?,
                "frame_interval" => c.frame_interval = value(key, raw, n)?,
                _ => unreachable!("key list and match disagree on `{key}`"),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Config text listing every key; `parse` reads it back unchanged.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let a = &self.agent;
        let g = &self.growth;
        let c = &self.convergence;
        let pairs: [(&str, String); 29] = [
            ("arena", self.arena.clone()),
            ("seed", self.seed.to_string()),
            ("so", a.sensor_offset.to_string()),
            ("sa", a.sensor_angle.to_string()),
            ("ra", a.rotation_angle.to_string()),
            ("step_length", a.step_length.to_string()),
            ("deposit", a.deposit_amount.to_string()),
            ("damping", self.diffusion.damping.to_string()),
            ("kernel", self.diffusion.kernel_size.to_string()),
            ("census_window", g.census_window.to_string()),
            ("growth_min", g.growth_min.to_string()),
            ("growth_max", g.growth_max.to_string()),
            ("survival_max", g.survival_max.to_string()),
            ("division_interval", g.division_interval.to_string()),
            ("removal_interval", g.removal_interval.to_string()),
            ("exposure_window", self.exposure_window.to_string()),
            ("source_strength", self.source_strength.to_string()),
            ("wall_repellent", self.wall_repellent.to_string()),
            ("obstacle_mode", self.obstacle_mode.to_string()),
            ("exposed_strength", self.exposed_strength.to_string()),
            ("covered_strength", self.covered_strength.to_string()),
            ("init_mode", self.init_mode.to_string()),
            ("init_density", self.init_density.to_string()),
            ("max_steps", self.max_steps.to_string()),
            ("convergence_window", c.window.to_string()),
            ("population_tolerance", c.population_tolerance.to_string()),
            ("occupancy_jaccard", c.occupancy_jaccard.to_string()),
            ("metric_interval", self.metric_interval.to_string()),
            ("frame_interval", self.frame_interval.to_string()),
        ];
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        for e in &self.events {
            let when = match e.trigger {
                EventTrigger::Step(t) => t.to_string(),
                EventTrigger::Converged => "converged".into(),
            };
            let _ = writeln!(s, "event = {when} {}", e.event);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::ObstacleMode;
    use crate::population::InitMode;
    use proptest::prelude::*;

    #[test]
    fn parses_keys_comments_and_events() {
        let c = ScenarioConfig::parse(
            "# demo\narena = bundled:polygon\nseed = 9  # trailing\nso = 9\n\
             obstacle_mode = exposure\ninit_mode = full-cover\n\
             event = 100 remove_source 2\nevent = converged remove_source 3\n",
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.agent.sensor_offset, 9.0);
        assert_eq!(c.obstacle_mode, ObstacleMode::Exposure);
        assert_eq!(c.init_mode, InitMode::FullCover);
        assert_eq!(c.events[0].trigger, EventTrigger::Step(100));
        assert_eq!(c.events[1].trigger, EventTrigger::Converged);
        assert_eq!(c.events[1].event, ArenaEvent::RemoveSource(3));
    }

    #[test]
    fn rejects_malformed_input() {
        for text in [
            "arena = a\nbogus = 1\n",
            "arena = a\nseed = x\n",
            "arena = a\nseed = 1\nseed = 2\n",
            "arena = a\nno equals sign\n",
            "arena = a\nevent = 5 add_source 1\n",
            "arena = a\nevent = soon remove_source 1\n",
            "arena = a\nmax_steps = 0\n",
            "seed = 1\n",
        ] {
            assert!(matches!(ScenarioConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = ScenarioConfig::from_file(Path::new("/nonexistent/x.cfg")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.cfg"));
    }

    #[test]
    fn every_key_is_written() {
        let text = super::super::preset("fig7_exposure").unwrap().to_config_string();
        for k in KEYS {
            assert!(text.lines().any(|l| l.starts_with(&format!("{k} = "))), "{k}");
        }
    }

    proptest! {
        #[test]
        fn text_roundtrip(
            seed in any::<u64>(),
            so in 3.0f64..20.0,
            damping in 0.01f64..=1.0,
            density in 0.001f64..=1.0,
            wall in -20.0f64..0.0,
            events in proptest::collection::vec((0u64..10_000, 1u32..9), 0..4),
            exposure in any::<bool>(),
        ) {
            let mut events: Vec<ScheduledEvent> = events
                .into_iter()
                .map(|(t, id)| ScheduledEvent { trigger: EventTrigger::Step(t), event: ArenaEvent::RemoveSource(id) })
                .collect();
            events.sort_by_key(|e| match e.trigger { EventTrigger::Step(t) => t, EventTrigger::Converged => u64::MAX });
            events.push(ScheduledEvent { trigger: EventTrigger::Converged, event: ArenaEvent::RemoveSource(1) });
            let mut c = ScenarioConfig {
                arena: "arenas/x.pgm".into(),
                seed,
                init_density: density,
                wall_repellent: wall,
                events,
                ..Default::default()
            };
            c.agent.sensor_offset = so;
            c.diffusion.damping = damping;
            if exposure {
                c.obstacle_mode = ObstacleMode::Exposure;
                c.init_mode = InitMode::FullCover;
            }
            let back = ScenarioConfig::parse(&c.to_config_string()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
