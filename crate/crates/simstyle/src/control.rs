//! Stylization control: the three stress-driven masking strategies and mask
//! application.
//!
//! Masks weight proposed vertex displacements by a factor in `[0, 1]`:
//! - linear:      `max(0, 1 - s_norm)` -- clamped at 0 past the critical level
//!   (a negative weight would invert the displacement direction);
//! - exponential: `exp(-s_norm / (1 - s_norm))` for `s_norm < 1`, extended by
//!   its limit 0 at `s_norm >= 1`;
//! - frozen:      raw-stress indicator, 0 once a vertex reaches the original
//!   model's maximum stress.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::failure::NormalizedStress;
use crate::mesh::DisplacementField;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("mask length {mask} does not match displacement length {field}")]
    LengthMismatch { mask: usize, field: usize },
    #[error("frozen threshold must be positive, got {0}")]
    BadThreshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlStrategy {
    Linear,
    Exponential,
    Frozen,
    /// No masking; stylization runs free.
    None,
}

impl ControlStrategy {
    pub const ALL: [ControlStrategy; 4] = [
        ControlStrategy::Linear,
        ControlStrategy::Exponential,
        ControlStrategy::Frozen,
        ControlStrategy::None,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ControlStrategy::Linear => "linear",
            ControlStrategy::Exponential => "exponential",
            ControlStrategy::Frozen => "frozen",
            ControlStrategy::None => "none",
        }
    }
}

impl std::str::FromStr for ControlStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "exponential" => Ok(Self::Exponential),
            "frozen" => Ok(Self::Frozen),
            "none" => Ok(Self::None),
            other => Err(format!(
                "unknown control strategy `{other}` (linear|exponential|frozen|none)"
            )),
        }
    }
}

/// Per-vertex stylization weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskField(Vec<f64>);

impl MaskField {
    pub fn ones(len: usize) -> Self {
        Self(vec![1.0; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Linear weighting: `max(0, 1 - s_norm)`.
pub fn mask_linear(sn: &NormalizedStress) -> MaskField {
    MaskField(sn.values().iter().map(|&s| (1.0 - s).max(0.0)).collect())
}

/// Exponential weighting: `exp(-s / (1 - s))` below the critical level, 0 at
/// or above it.
pub fn mask_exponential(sn: &NormalizedStress) -> MaskField {
    MaskField(
        sn.values()
            .iter()
            .map(|&s| {
                if s < 1.0 {
                    (-s / (1.0 - s)).exp()
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

/// Selective freezing on raw stress: 0 where `s_v >= threshold`, else 1. The
/// threshold is the maximum stress of the original model.
pub fn mask_frozen(vertex_vm: &[f64], threshold: f64) -> Result<MaskField, ControlError> {
    if !(threshold > 0.0) {
        return Err(ControlError::BadThreshold(threshold));
    }
    Ok(MaskField(
        vertex_vm
            .iter()
            .map(|&s| if s >= threshold { 0.0 } else { 1.0 })
            .collect(),
    ))
}

/// Elementwise product `d_v * mask_v`.
pub fn apply_mask(d: &DisplacementField, m: &MaskField) -> Result<DisplacementField, ControlError> {
    if d.len() != m.len() {
        return Err(ControlError::LengthMismatch {
            mask: m.len(),
            field: d.len(),
        });
    }
    let masked: Vec<f64> = d
        .values()
        .iter()
        .zip(m.values())
        .map(|(dv, mv)| dv * mv)
        .collect();
    Ok(DisplacementField::new(masked).expect("product of finite values is finite"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::failure::normalized_stress;
    use approx::assert_relative_eq;

    fn sn(values: &[f64]) -> NormalizedStress {
        // sigma_c = 1 keeps the normalized values equal to the input.
        normalized_stress(values, 1.0)
    }

    #[test]
    fn linear_closed_form() {
        let m = mask_linear(&sn(&[0.0, 0.5, 1.0, 2.0]));
        assert_eq!(m.values(), &[1.0, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn exponential_closed_form() {
        let m = mask_exponential(&sn(&[0.0, 0.5, 0.999999, 1.0, 3.0]));
        assert_eq!(m.values()[0], 1.0);
        assert_relative_eq!(m.values()[1], 0.36787944117144233, max_relative = 1e-15);
        assert!(m.values()[2] < 1e-9);
        assert_eq!(m.values()[3], 0.0);
        assert_eq!(m.values()[4], 0.0);
    }

    #[test]
    fn frozen_is_an_indicator() {
        let m = mask_frozen(&[1.0, 2.0, 3.0, 2.0], 2.0).unwrap();
        assert_eq!(m.values(), &[1.0, 0.0, 0.0, 0.0]);
        let all_below = mask_frozen(&[0.1, 0.5], 2.0).unwrap();
        assert_eq!(all_below.values(), &[1.0, 1.0]);
        assert!(mask_frozen(&[1.0], 0.0).is_err());
    }

    #[test]
    fn masks_monotone_and_bounded() {
        let grid: Vec<f64> = (0..=10_000).map(|i| i as f64 * 2e-4).collect();
        let field = sn(&grid);
        for mask in [mask_linear(&field), mask_exponential(&field)] {
            let v = mask.values();
            assert_eq!(v[0], 1.0);
            for w in v.windows(2) {
                assert!(w[1] <= w[0] + 1e-15);
            }
            for &x in v {
                assert!((0.0..=1.0).contains(&x));
            }
        }
    }

    #[test]
    fn exponential_below_linear_on_open_interval() {
        for i in 1..10_000 {
            let s = i as f64 / 10_000.0;
            let e = (-s / (1.0 - s)).exp();
            assert!(e <= 1.0 - s + 1e-15, "s = {s}");
        }
    }

    #[test]
    fn apply_mask_cases() {
        let d = DisplacementField::new(vec![0.1, -0.2]).unwrap();
        let m = MaskField(vec![0.5, 0.0]);
        let out = apply_mask(&d, &m).unwrap();
        assert_eq!(out.values(), &[0.05, -0.0]);

        let ones = MaskField::ones(2);
        assert_eq!(apply_mask(&d, &ones).unwrap().values(), d.values());

        let short = MaskField::ones(3);
        assert!(apply_mask(&d, &short).is_err());
    }

    #[test]
    fn apply_mask_never_amplifies() {
        let d = DisplacementField::new(vec![0.5, -0.4, 0.0, 1.0]).unwrap();
        let m = MaskField(vec![1.0, 0.3, 0.9, 0.0]);
        let out = apply_mask(&d, &m).unwrap();
        for (a, b) in out.values().iter().zip(d.values()) {
            assert!(a.abs() <= b.abs());
        }
    }
}
