//! Critical-stress computation, stress normalization, and the structural
//! viability verdict.
//!
//! Two thresholds coexist on purpose: the safety-factored critical stress
//! `sigma_c = safety_lambda * yield_strength` (default factor 0.2) drives
//! masking and scheduling sensitivity, while the raw yield strength decides
//! the final break/no-break verdict. Stress exactly at a threshold counts as
//! failure (conservative for fabrication).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::material::Material;

#[derive(Debug, Error)]
pub enum FailureError {
    #[error("safety factor must be in (0, 1], got {0}")]
    BadSafetyFactor(f64),
    #[error("stress field is empty")]
    EmptyField,
}

/// Default safety factor relating critical stress to yield strength.
pub const DEFAULT_SAFETY_LAMBDA: f64 = 0.2;

/// `sigma_c = safety_lambda * yield_strength`.
pub fn critical_stress(mat: &Material, safety_lambda: f64) -> Result<f64, FailureError> {
    if !(safety_lambda > 0.0 && safety_lambda <= 1.0) {
        return Err(FailureError::BadSafetyFactor(safety_lambda));
    }
    Ok(safety_lambda * mat.yield_strength)
}

/// Safety-factored failure criterion for one material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureCriterion {
    pub safety_lambda: f64,
    pub sigma_c: f64,
    pub yield_strength: f64,
}

impl FailureCriterion {
    pub fn new(mat: &Material, safety_lambda: f64) -> Result<Self, FailureError> {
        Ok(Self {
            safety_lambda,
            sigma_c: critical_stress(mat, safety_lambda)?,
            yield_strength: mat.yield_strength,
        })
    }
}

/// Per-surface-vertex stress over `sigma_c`; 1.0 marks the critical level.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedStress(Vec<f64>);

impl NormalizedStress {
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

/// Elementwise `stress / sigma_c`.
pub fn normalized_stress(vertex_vm: &[f64], sigma_c: f64) -> NormalizedStress {
    assert!(sigma_c > 0.0, "sigma_c must be positive");
    NormalizedStress(vertex_vm.iter().map(|s| s / sigma_c).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Viability {
    Viable,
    Broken,
}

/// Outcome of the yield-strength failure analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: Viability,
    pub max_stress: f64,
    /// Arg-max vertex; ties break to the lowest index.
    pub worst_vertex: usize,
}

/// Broken iff the maximum vertex stress reaches the material's yield strength.
pub fn viability_verdict(vertex_vm: &[f64], mat: &Material) -> Result<Verdict, FailureError> {
    if vertex_vm.is_empty() {
        return Err(FailureError::EmptyField);
    }
    let (worst_vertex, &max_stress) = vertex_vm
        .iter()
        .enumerate()
        .fold((0usize, &vertex_vm[0]), |(bi, bv), (i, v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    let verdict = if max_stress >= mat.yield_strength {
        Viability::Broken
    } else {
        Viability::Viable
    };
    Ok(Verdict {
        verdict,
        max_stress,
        worst_vertex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::material_lookup;

    #[test]
    fn pla_critical_stress() {
        let pla = material_lookup("pla").unwrap();
        assert_eq!(critical_stress(&pla, 0.2).unwrap(), 9.12e6);
        assert_eq!(critical_stress(&pla, 1.0).unwrap(), pla.yield_strength);
        assert!(matches!(
            critical_stress(&pla, 0.0),
            Err(FailureError::BadSafetyFactor(_))
        ));
    }

    #[test]
    fn normalization_cases() {
        let sn = normalized_stress(&[0.0, 0.0], 9.12e6);
        assert_eq!(sn.values(), &[0.0, 0.0]);
        let sn = normalized_stress(&[4.56e6, 9.12e6, 18.24e6], 9.12e6);
        assert_eq!(sn.values(), &[0.5, 1.0, 2.0]);
    }

    #[test]
    fn normalization_is_homogeneous() {
        let field = [1.0e6, 3.0e6, 7.5e6];
        let alpha = 3.25;
        let scaled: Vec<f64> = field.iter().map(|s| s * alpha).collect();
        let a = normalized_stress(&field, 9.12e6);
        let b = normalized_stress(&scaled, 9.12e6);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((y - alpha * x).abs() <= 1e-12 * y.abs());
        }
    }

    #[test]
    fn verdict_cases() {
        let pla = material_lookup("pla").unwrap();
        let v = viability_verdict(&[44.0e6], &pla).unwrap();
        assert_eq!(v.verdict, Viability::Viable);
        // Boundary counts as failure.
        let v = viability_verdict(&[1.0e6, 45.6e6], &pla).unwrap();
        assert_eq!(v.verdict, Viability::Broken);
        assert_eq!(v.worst_vertex, 1);
        let v = viability_verdict(&[0.0, 0.0, 0.0], &pla).unwrap();
        assert_eq!(v.verdict, Viability::Viable);
        assert_eq!(v.max_stress, 0.0);
        assert_eq!(v.worst_vertex, 0);
    }

    #[test]
    fn verdict_ignores_vertex_order() {
        let pla = material_lookup("pla").unwrap();
        let field = [3.0e6, 50.0e6, 1.0e6, 50.0e6];
        let v = viability_verdict(&field, &pla).unwrap();
        assert_eq!(v.verdict, Viability::Broken);
        assert_eq!(v.worst_vertex, 1);
        let mut perm = field;
        perm.reverse();
        let vp = viability_verdict(&perm, &pla).unwrap();
        assert_eq!(vp.verdict, v.verdict);
        assert_eq!(vp.max_stress, v.max_stress);
        assert_eq!(vp.worst_vertex, 0);
    }

    #[test]
    fn verdict_consistent_with_normalized_threshold() {
        // broken by yield <=> max(s_norm * safety_lambda) >= 1
        let pla = material_lookup("pla").unwrap();
        let sigma_c = critical_stress(&pla, 0.2).unwrap();
        for field in [vec![1.0e6, 45.6e6], vec![45.5e6], vec![0.0]] {
            let verdict = viability_verdict(&field, &pla).unwrap();
            let sn = normalized_stress(&field, sigma_c);
            let by_norm = sn.values().iter().any(|s| s * 0.2 >= 1.0);
            assert_eq!(verdict.verdict == Viability::Broken, by_norm);
        }
    }
}
