//! Adaptive simulation scheduling: which stylization iterations trigger a
//! drop-test simulation.
//!
//! Four strategies: fixed temporal schedules (uniform or quadratically
//! front-loaded), a geometry trigger (cumulative displacement vs. a fraction
//! of local thickness), and a stress trigger (the geometry threshold scaled
//! down where normalized stress is high). All trigger comparisons use `>=`,
//! which errs toward simulating sooner.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::failure::NormalizedStress;
use crate::thickness::ThicknessField;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("need 1 <= sims <= iterations, got sims = {sims}, iterations = {iterations}")]
    BadBudget { sims: usize, iterations: usize },
    #[error("field length {a} does not match {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("stress thresholds queried before any simulation populated them")]
    ThresholdsUninitialized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleStrategy {
    LinearTemporal,
    QuadraticTemporal,
    Geometry,
    Stress,
}

impl ScheduleStrategy {
    pub const ALL: [ScheduleStrategy; 4] = [
        ScheduleStrategy::LinearTemporal,
        ScheduleStrategy::QuadraticTemporal,
        ScheduleStrategy::Geometry,
        ScheduleStrategy::Stress,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScheduleStrategy::LinearTemporal => "linear-temporal",
            ScheduleStrategy::QuadraticTemporal => "quadratic-temporal",
            ScheduleStrategy::Geometry => "geometry",
            ScheduleStrategy::Stress => "stress",
        }
    }
}

impl std::str::FromStr for ScheduleStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "linear-temporal" | "linear_temporal" => Ok(Self::LinearTemporal),
            "quadratic-temporal" | "quadratic_temporal" => Ok(Self::QuadraticTemporal),
            "geometry" => Ok(Self::Geometry),
            "stress" => Ok(Self::Stress),
            other => Err(format!(
                "unknown schedule `{other}` (linear-temporal|quadratic-temporal|geometry|stress)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalShape {
    Linear,
    Quadratic,
}

/// Iterations (1-based) at which a temporal schedule simulates.
///
/// Linear spaces `sims` indices uniformly; quadratic places them at
/// `round(n (j/sims)^2)`, denser early where stylization moves the geometry
/// most. Both end exactly at `n`. Duplicates after rounding collapse.
pub fn temporal_schedule(
    n: usize,
    sims: usize,
    shape: TemporalShape,
) -> Result<Vec<usize>, ScheduleError> {
    if sims == 0 || sims > n {
        return Err(ScheduleError::BadBudget {
            sims,
            iterations: n,
        });
    }
    let mut out: Vec<usize> = (1..=sims)
        .map(|j| {
            let frac = j as f64 / sims as f64;
            let pos = match shape {
                TemporalShape::Linear => n as f64 * frac,
                TemporalShape::Quadratic => n as f64 * frac * frac,
            };
            (pos.round() as usize).max(1)
        })
        .collect();
    out.dedup();
    Ok(out)
}

/// Rolling per-vertex displacement tally between simulations.
#[derive(Debug, Clone)]
pub struct ScheduleState {
    /// Cumulative |displacement| per vertex since the last simulation.
    delta: Vec<f64>,
    /// Per-vertex trigger thresholds (stress strategy only).
    thresholds: Option<Vec<f64>>,
    pub last_sim_iteration: usize,
}

impl ScheduleState {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            delta: vec![0.0; vertex_count],
            thresholds: None,
            last_sim_iteration: 0,
        }
    }

    pub fn accumulate(&mut self, step: &[f64]) {
        debug_assert_eq!(step.len(), self.delta.len());
        for (d, s) in self.delta.iter_mut().zip(step) {
            *d += s.abs();
        }
    }

    /// Called after a simulation ran; clears the whole tally (the entire
    /// model was re-simulated).
    pub fn reset(&mut self, iteration: usize) {
        self.delta.iter_mut().for_each(|d| *d = 0.0);
        self.last_sim_iteration = iteration;
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn set_thresholds(&mut self, thresholds: Vec<f64>) {
        debug_assert_eq!(thresholds.len(), self.delta.len());
        self.thresholds = Some(thresholds);
    }
}

/// True when any vertex's cumulative displacement reaches `frac` of its local
/// thickness.
pub fn geometry_trigger(
    state: &ScheduleState,
    thickness: &ThicknessField,
    frac: f64,
) -> Result<bool, ScheduleError> {
    if thickness.len() != state.delta.len() {
        return Err(ScheduleError::LengthMismatch {
            a: thickness.len(),
            b: state.delta.len(),
        });
    }
    Ok(state
        .delta
        .iter()
        .zip(thickness.values())
        .any(|(d, t)| *d >= frac * t))
}

/// Stress-scaled per-vertex thresholds:
/// `t_v = frac * thickness_v * max(floor, 1 - min(s_norm_v, 1))`.
///
/// Decreasing in stress; the floor keeps fully critical vertices from forcing
/// a simulation every iteration.
pub fn stress_thresholds(
    thickness: &ThicknessField,
    sn: &NormalizedStress,
    frac: f64,
    floor: f64,
) -> Result<Vec<f64>, ScheduleError> {
    if thickness.len() != sn.len() {
        return Err(ScheduleError::LengthMismatch {
            a: thickness.len(),
            b: sn.len(),
        });
    }
    assert!(floor > 0.0 && floor < 1.0, "stress floor must be in (0,1)");
    Ok(thickness
        .values()
        .iter()
        .zip(sn.values())
        .map(|(t, s)| frac * t * (1.0 - s.min(1.0)).max(floor))
        .collect())
}

/// True when any vertex's cumulative displacement reaches its stress-scaled
/// threshold.
pub fn stress_trigger(state: &ScheduleState) -> Result<bool, ScheduleError> {
    let thresholds = state
        .thresholds
        .as_ref()
        .ok_or(ScheduleError::ThresholdsUninitialized)?;
    Ok(state
        .delta
        .iter()
        .zip(thresholds)
        .any(|(d, t)| *d >= *t))
}

/// Scheduling parameters; `sim_budget` applies to the temporal strategies,
/// `geometry_fraction` and `stress_floor` to the trigger strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub strategy: ScheduleStrategy,
    pub sim_budget: usize,
    pub geometry_fraction: f64,
    pub stress_floor: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            strategy: ScheduleStrategy::Stress,
            sim_budget: 10,
            geometry_fraction: 0.10,
            stress_floor: 0.05,
        }
    }
}

impl ScheduleConfig {
    pub fn validate(&self, iterations: usize) -> Result<(), ScheduleError> {
        if self.sim_budget == 0 || self.sim_budget > iterations {
            return Err(ScheduleError::BadBudget {
                sims: self.sim_budget,
                iterations,
            });
        }
        if !(self.geometry_fraction > 0.0 && self.geometry_fraction <= 1.0) {
            return Err(ScheduleError::BadBudget {
                sims: self.sim_budget,
                iterations,
            });
        }
        if !(self.stress_floor > 0.0 && self.stress_floor < 1.0) {
            return Err(ScheduleError::BadBudget {
                sims: self.sim_budget,
                iterations,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::failure::normalized_stress;
    use crate::thickness::ThicknessField;

    fn thick(values: Vec<f64>) -> ThicknessField {
        ThicknessField::from_values(values)
    }

    #[test]
    fn pinned_temporal_schedules() {
        assert_eq!(
            temporal_schedule(200, 10, TemporalShape::Linear).unwrap(),
            vec![20, 40, 60, 80, 100, 120, 140, 160, 180, 200]
        );
        assert_eq!(
            temporal_schedule(200, 10, TemporalShape::Quadratic).unwrap(),
            vec![2, 8, 18, 32, 50, 72, 98, 128, 162, 200]
        );
        assert_eq!(
            temporal_schedule(77, 1, TemporalShape::Linear).unwrap(),
            vec![77]
        );
        assert_eq!(
            temporal_schedule(77, 1, TemporalShape::Quadratic).unwrap(),
            vec![77]
        );
    }

    #[test]
    fn schedules_strictly_increasing_and_end_at_n() {
        for n in [10usize, 50, 200, 1000] {
            for j in [1usize, 2, 5, 10] {
                for shape in [TemporalShape::Linear, TemporalShape::Quadratic] {
                    let s = temporal_schedule(n, j, shape).unwrap();
                    assert_eq!(*s.last().unwrap(), n);
                    for w in s.windows(2) {
                        assert!(w[0] < w[1]);
                    }
                    assert!(*s.first().unwrap() >= 1);
                }
            }
        }
    }

    #[test]
    fn quadratic_is_front_loaded() {
        for (n, j) in [(200usize, 10usize), (100, 5), (400, 8), (1000, 10)] {
            let lin = temporal_schedule(n, j, TemporalShape::Linear).unwrap();
            let quad = temporal_schedule(n, j, TemporalShape::Quadratic).unwrap();
            let median = |v: &[usize]| v[v.len() / 2] as f64;
            assert!(median(&quad) < median(&lin), "n={n} j={j}");
        }
    }

    #[test]
    fn geometry_trigger_cases() {
        let t = thick(vec![1.0, 2.0, 4.0]);
        let mut st = ScheduleState::new(3);
        st.accumulate(&[0.05, 0.10, 0.20]);
        // Exactly half the 10% threshold everywhere.
        assert!(!geometry_trigger(&st, &t, 0.10).unwrap());
        st.accumulate(&[0.07, 0.0, 0.0]); // one vertex to 0.12 * t
        assert!(geometry_trigger(&st, &t, 0.10).unwrap());

        // Boundary: exactly at threshold triggers.
        let mut st = ScheduleState::new(1);
        st.accumulate(&[0.1]);
        assert!(geometry_trigger(&st, &thick(vec![1.0]), 0.10).unwrap());
    }

    #[test]
    fn stress_threshold_cases() {
        let t = thick(vec![2.0, 2.0, 2.0]);
        let sn = normalized_stress(&[0.0, 0.5, 1.0], 1.0);
        let th = stress_thresholds(&t, &sn, 0.1, 0.05).unwrap();
        assert_eq!(th[0], 0.2); // reduces to geometry threshold
        assert!((th[1] - 0.1).abs() < 1e-15);
        assert!((th[2] - 0.2 * 0.05).abs() < 1e-15); // floored
    }

    #[test]
    fn stress_thresholds_never_exceed_geometry() {
        let t = thick(vec![1.0, 3.0, 0.5, 2.0]);
        let sn = normalized_stress(&[0.0, 0.3, 0.9, 2.0], 1.0);
        let th = stress_thresholds(&t, &sn, 0.1, 0.05).unwrap();
        for (i, (&tv, &thick_v)) in th.iter().zip(t.values()).enumerate() {
            let geo = 0.1 * thick_v;
            assert!(tv <= geo + 1e-15);
            if sn.values()[i] == 0.0 {
                assert_eq!(tv, geo);
            } else {
                assert!(tv < geo);
            }
        }
    }

    #[test]
    fn stress_trigger_fires_no_later_than_geometry() {
        // Same displacement trace fed to both; stress must fire at an
        // iteration <= geometry whenever any s_norm > 0.
        let t = thick(vec![1.0, 1.0]);
        let sn = normalized_stress(&[0.6, 0.2], 1.0);
        let th = stress_thresholds(&t, &sn, 0.1, 0.05).unwrap();

        let mut geo_state = ScheduleState::new(2);
        let mut str_state = ScheduleState::new(2);
        str_state.set_thresholds(th);
        let step = [0.013, 0.008];
        let mut geo_at = None;
        let mut str_at = None;
        for i in 1..=20 {
            geo_state.accumulate(&step);
            str_state.accumulate(&step);
            if str_at.is_none() && stress_trigger(&str_state).unwrap() {
                str_at = Some(i);
            }
            if geo_at.is_none() && geometry_trigger(&geo_state, &t, 0.1).unwrap() {
                geo_at = Some(i);
            }
        }
        assert!(str_at.unwrap() <= geo_at.unwrap());
        assert!(str_at.unwrap() < geo_at.unwrap());
    }

    #[test]
    fn triggers_monotone_in_delta() {
        let t = thick(vec![1.0; 4]);
        let mut st = ScheduleState::new(4);
        st.accumulate(&[0.02, 0.11, 0.0, 0.0]);
        assert!(geometry_trigger(&st, &t, 0.1).unwrap());
        st.accumulate(&[0.5, 0.5, 0.5, 0.5]);
        assert!(geometry_trigger(&st, &t, 0.1).unwrap());
    }

    #[test]
    fn uninitialized_thresholds_error() {
        let st = ScheduleState::new(2);
        assert!(matches!(
            stress_trigger(&st),
            Err(ScheduleError::ThresholdsUninitialized)
        ));
    }

    #[test]
    fn zero_delta_never_triggers() {
        let st = ScheduleState::new(3);
        let t = thick(vec![1.0; 3]);
        assert!(!geometry_trigger(&st, &t, 0.1).unwrap());
    }

    #[test]
    fn bad_budget_rejected() {
        assert!(temporal_schedule(10, 0, TemporalShape::Linear).is_err());
        assert!(temporal_schedule(10, 11, TemporalShape::Linear).is_err());
    }
}
