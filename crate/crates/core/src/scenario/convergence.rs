//! Stopping rule: population and occupied set both stable over a window.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceParams {
    /// Steps between the compared samples.
    pub window: u64,
    /// Largest relative population change still counted as stable.
    pub population_tolerance: f64,
    /// Smallest Jaccard similarity of the occupied sets still counted as stable.
    pub occupancy_jaccard: f64,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        Self {
            window: 2000,
            population_tolerance: 0.005,
            occupancy_jaccard: 0.95,
        }
    }
}

impl ConvergenceParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::Config("convergence window must be >= 1".into()));
        }
        for (name, v) in [
            ("population_tolerance", self.population_tolerance),
            ("occupancy_jaccard", self.occupancy_jaccard),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// `|A ∩ B| / |A ∪ B|`, with two empty sets counted as identical.
pub fn jaccard(a: &[bool], b: &[bool]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

struct Sample {
    step: u64,
    population: usize,
    mask: Vec<bool>,
}

/// Compares each new sample with the one taken `window` steps earlier.
pub struct ConvergenceDetector {
    params: ConvergenceParams,
    history: VecDeque<Sample>,
}

impl ConvergenceDetector {
    /// `sample_interval` only sizes the history buffer.
    pub fn new(params: ConvergenceParams, sample_interval: u64) -> Self {
        let cap = (params.window / sample_interval.max(1)) as usize + 2;
        Self {
            params,
            history: VecDeque::with_capacity(cap),
        }
    }

    /// Forget all samples, e.g. after the arena changed.
    pub fn reset(&mut self) {
        self.history.clear();
    }

    /// Record a sample; true when it is stable against the latest sample at
    /// least `window` steps older.
    pub fn push(&mut self, step: u64, population: usize, mask: Vec<bool>) -> bool {
        self.history.push_back(Sample { step, population, mask });
        let Some(horizon) = step.checked_sub(self.params.window) else {
            return false;
        };
        while self.history.len() > 2 && self.history[1].step <= horizon {
            self.history.pop_front();
        }
        let (old, new) = (&self.history[0], self.history.back().unwrap());
        if old.step > horizon {
            return false;
        }
        let change = old.population.abs_diff(new.population) as f64 / old.population.max(1) as f64;
        change <= self.params.population_tolerance && jaccard(&old.mask, &new.mask) >= self.params.occupancy_jaccard
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> ConvergenceParams {
        ConvergenceParams {
            window: 200,
            population_tolerance: 0.01,
            occupancy_jaccard: 0.9,
        }
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard(&[false; 4], &[false; 4]), 1.0);
        assert_eq!(
            jaccard(&[true, true, false, false], &[true, false, true, false]),
            1.0 / 3.0
        );
        assert_eq!(jaccard(&[true, false], &[false, true]), 0.0);
    }

    #[test]
    fn fires_only_after_a_full_window() {
        let mut d = ConvergenceDetector::new(params(), 100);
        assert!(!d.push(0, 1000, vec![true; 8]));
        assert!(!d.push(100, 1000, vec![true; 8]));
        assert!(d.push(200, 1000, vec![true; 8]));
        d.reset();
        assert!(!d.push(300, 1000, vec![true; 8]));
    }

    #[test]
    fn compares_window_endpoints() {
        let mut d = ConvergenceDetector::new(params(), 100);
        let mut m = vec![true; 10];
        d.push(0, 1000, m.clone());
        m[0] = false;
        d.push(100, 2000, m.clone());
        // 1000 -> 1005 is within 1 %, the mask lost 1 of 10 cells.
        assert!(d.push(200, 1005, m.clone()));
        m[1] = false;
        // Against step 100: population halved.
        assert!(!d.push(300, 1000, m.clone()));
    }

    #[test]
    fn moving_mask_blocks_convergence() {
        let mut d = ConvergenceDetector::new(params(), 100);
        for k in 0..10u64 {
            let mask: Vec<bool> = (0..100).map(|i| (i + k as usize * 20) % 100 < 50).collect();
            assert!(!d.push(k * 100, 500, mask));
        }
    }

    proptest! {
        /// A population that always moves by more than the tolerance per
        /// window never converges, however still the mask is.
        #[test]
        fn never_fires_while_population_drifts(
            start in 1000usize..100_000,
            rate in 0.015f64..0.5,
            shrink in any::<bool>(),
            samples in 2usize..60,
        ) {
            let mut d = ConvergenceDetector::new(params(), 100);
            let mut p = start as f64;
            for k in 0..samples as u64 {
                prop_assert!(!d.push(k * 100, p.round() as usize, vec![true; 16]));
                // Two samples per window, so each halves the per-window change.
                let f = (1.0 + rate).sqrt();
                p = if shrink { p / f } else { p * f };
                if p < 1000.0 {
                    break;
                }
            }
        }
    }
}
