//! Deterministic procedural stylizer: a seeded fractal value-noise field over
//! the mesh defines a signed target displacement per vertex, and each
//! iteration emits a capped step toward it (residual split over the remaining
//! iterations, so larger changes land early and the target is reached exactly
//! when unmasked).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{bbox_diagonal, DisplacementField, SurfaceMesh};
use crate::par;

#[derive(Debug, Error)]
pub enum StylizeError {
    #[error("style config out of domain: {0}")]
    BadConfig(String),
    #[error("iteration {i} outside 1..={n}")]
    IterOutOfRange { i: usize, n: usize },
    #[error("target has {target} vertices but mesh has {mesh}")]
    LengthMismatch { target: usize, mesh: usize },
}

/// Hard ceiling on the per-iteration step, as a fraction of the bounding-box
/// diagonal.
pub const MAX_PER_ITER_CAP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StyleConfig {
    pub seed: u64,
    /// Target amplitude as a fraction of the bounding-box diagonal.
    pub amplitude: f64,
    /// Noise frequency in cycles per bounding-box diagonal.
    pub frequency: f64,
    pub octaves: u32,
    pub iterations: usize,
    /// Per-iteration displacement cap as a fraction of the diagonal.
    pub per_iter_cap: f64,
}

impl Default for StyleConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            amplitude: 0.03,
            frequency: 6.0,
            octaves: 3,
            iterations: 200,
            per_iter_cap: MAX_PER_ITER_CAP,
        }
    }
}

impl StyleConfig {
    pub fn validate(&self) -> Result<(), StylizeError> {
        if !(self.amplitude > 0.0) {
            return Err(StylizeError::BadConfig(format!(
                "amplitude must be > 0, got {}",
                self.amplitude
            )));
        }
        if !(self.frequency > 0.0) {
            return Err(StylizeError::BadConfig(format!(
                "frequency must be > 0, got {}",
                self.frequency
            )));
        }
        if self.octaves < 1 {
            return Err(StylizeError::BadConfig("octaves must be >= 1".into()));
        }
        if self.iterations < 1 {
            return Err(StylizeError::BadConfig("iterations must be >= 1".into()));
        }
        if !(self.per_iter_cap > 0.0 && self.per_iter_cap <= MAX_PER_ITER_CAP) {
            return Err(StylizeError::BadConfig(format!(
                "per_iter_cap must be in (0, {MAX_PER_ITER_CAP}], got {}",
                self.per_iter_cap
            )));
        }
        Ok(())
    }
}

/// Signed target displacement per vertex plus the displacement achieved so
/// far. `scale` is the bounding-box diagonal of the mesh the field was built
/// on; caps and amplitudes resolve against it.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleTarget {
    target: Vec<f64>,
    achieved: Vec<f64>,
    scale: f64,
}

impl StyleTarget {
    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn achieved(&self) -> &[f64] {
        &self.achieved
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    /// Add an applied (post-mask) step into the achieved tally.
    pub fn record(&mut self, applied: &DisplacementField) {
        debug_assert_eq!(applied.len(), self.achieved.len());
        for (a, d) in self.achieved.iter_mut().zip(applied.values()) {
            *a += d;
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58476d1ce4e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Lattice corner value in [-1, 1), reproducible across platforms.
fn corner_value(seed: u64, ix: i64, iy: i64, iz: i64) -> f64 {
    let mut h = splitmix(seed ^ 0x51_73_59_33);
    h = splitmix(h ^ ix as u64);
    h = splitmix(h ^ iy as u64);
    h = splitmix(h ^ iz as u64);
    (h >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

/// Trilinearly interpolated value noise at `p`.
fn value_noise(seed: u64, p: [f64; 3]) -> f64 {
    let cell = [p[0].floor(), p[1].floor(), p[2].floor()];
    let (ix, iy, iz) = (cell[0] as i64, cell[1] as i64, cell[2] as i64);
    let f = [
        fade(p[0] - cell[0]),
        fade(p[1] - cell[1]),
        fade(p[2] - cell[2]),
    ];
    let mut value = 0.0;
    for c in 0..8 {
        let (dx, dy, dz) = ((c & 1) as i64, ((c >> 1) & 1) as i64, ((c >> 2) & 1) as i64);
        let w = (if dx == 1 { f[0] } else { 1.0 - f[0] })
            * (if dy == 1 { f[1] } else { 1.0 - f[1] })
            * (if dz == 1 { f[2] } else { 1.0 - f[2] });
        value += w * corner_value(seed, ix + dx, iy + dy, iz + dz);
    }
    value
}

/// Fractal sum: octave o contributes gain 0.5^o at double the frequency, with
/// a per-octave reseed. The sum is clamped to [-1, 1].
fn fbm(seed: u64, octaves: u32, p: [f64; 3]) -> f64 {
    let mut sum = 0.0;
    let mut gain = 1.0;
    let mut freq = 1.0;
    for o in 0..octaves {
        let oseed = splitmix(seed.wrapping_add(o as u64).rotate_left(17));
        sum += gain * value_noise(oseed, [p[0] * freq, p[1] * freq, p[2] * freq]);
        gain *= 0.5;
        freq *= 2.0;
    }
    sum.clamp(-1.0, 1.0)
}

/// Build the per-vertex style target for a mesh:
/// `T_v = amplitude * diag * fbm(frequency * v / diag)`.
pub fn style_field(mesh: &SurfaceMesh, cfg: &StyleConfig) -> Result<StyleTarget, StylizeError> {
    cfg.validate()?;
    let diag = bbox_diagonal(mesh);
    if !(diag > 0.0) {
        return Err(StylizeError::BadConfig(
            "mesh has zero bounding-box diagonal".into(),
        ));
    }
    let amp = cfg.amplitude * diag;
    let target = par::map_collect(mesh.vertex_count(), |i| {
        let p = mesh.vertices()[i];
        let sp = [
            p.x / diag * cfg.frequency,
            p.y / diag * cfg.frequency,
            p.z / diag * cfg.frequency,
        ];
        amp * fbm(cfg.seed, cfg.octaves, sp)
    });
    let n = target.len();
    Ok(StyleTarget {
        target,
        achieved: vec![0.0; n],
        scale: diag,
    })
}

/// Unmasked step proposal for iteration `i` (1-based): the remaining residual
/// split over the remaining iterations, clamped to the per-iteration cap.
/// Masking happens downstream.
pub fn displacement_step(
    target: &StyleTarget,
    i: usize,
    cfg: &StyleConfig,
) -> Result<DisplacementField, StylizeError> {
    let n = cfg.iterations;
    if i < 1 || i > n {
        return Err(StylizeError::IterOutOfRange { i, n });
    }
    let cap = cfg.per_iter_cap * target.scale;
    let remaining = (n - i + 1) as f64;
    let values: Vec<f64> = target
        .target
        .iter()
        .zip(&target.achieved)
        .map(|(t, a)| ((t - a) / remaining).clamp(-cap, cap))
        .collect();
    Ok(DisplacementField::new(values).expect("residual of finite values is finite"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use proptest::prelude::*;

    #[test]
    fn field_is_deterministic() {
        let mesh = shapes::icosphere(1.0, 3);
        let cfg = StyleConfig {
            seed: 42,
            ..Default::default()
        };
        let a = style_field(&mesh, &cfg).unwrap();
        let b = style_field(&mesh, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn amplitude_bounds_target() {
        let mesh = shapes::icosphere(1.0, 3);
        let cfg = StyleConfig {
            seed: 7,
            ..Default::default()
        };
        let field = style_field(&mesh, &cfg).unwrap();
        let bound = cfg.amplitude * field.scale();
        for &t in field.target() {
            assert!(t.abs() <= bound + 1e-15);
        }
    }

    #[test]
    fn zero_amplitude_rejected() {
        let cfg = StyleConfig {
            amplitude: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let over_cap = StyleConfig {
            per_iter_cap: 0.02,
            ..Default::default()
        };
        assert!(over_cap.validate().is_err());
    }

    #[test]
    fn seeds_decorrelate() {
        let mesh = shapes::icosphere(1.0, 3);
        let a = style_field(
            &mesh,
            &StyleConfig {
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let b = style_field(
            &mesh,
            &StyleConfig {
                seed: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let n = a.len() as f64;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
        let (ma, mb) = (mean(a.target()), mean(b.target()));
        let mut cov = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for (x, y) in a.target().iter().zip(b.target()) {
            cov += (x - ma) * (y - mb);
            va += (x - ma).powi(2);
            vb += (y - mb).powi(2);
        }
        let pearson = cov / (va.sqrt() * vb.sqrt());
        assert!(pearson.abs() < 0.3, "correlation {pearson}");
    }

    #[test]
    fn converged_vertex_gets_zero_step() {
        let mesh = shapes::unit_cube();
        let cfg = StyleConfig::default();
        let mut field = style_field(&mesh, &cfg).unwrap();
        let snapshot: Vec<f64> = field.target().to_vec();
        field.record(&DisplacementField::new(snapshot).unwrap());
        let step = displacement_step(&field, 1, &cfg).unwrap();
        for &d in step.values() {
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn final_step_takes_clamped_residual() {
        let mesh = shapes::unit_cube();
        let cfg = StyleConfig::default();
        let field = style_field(&mesh, &cfg).unwrap();
        let cap = cfg.per_iter_cap * field.scale();
        let step = displacement_step(&field, cfg.iterations, &cfg).unwrap();
        for (d, t) in step.values().iter().zip(field.target()) {
            assert_eq!(*d, t.clamp(-cap, cap));
        }
        assert!(displacement_step(&field, 0, &cfg).is_err());
        assert!(displacement_step(&field, cfg.iterations + 1, &cfg).is_err());
    }

    #[test]
    fn unmasked_steps_telescope_to_target() {
        let mesh = shapes::unit_cube();
        let cfg = StyleConfig {
            iterations: 40,
            ..Default::default()
        };
        let mut field = style_field(&mesh, &cfg).unwrap();
        // Overwrite the target with the uniform value 0.5 * cap * N.
        let uniform = 0.5 * cfg.per_iter_cap * field.scale * cfg.iterations as f64;
        field.target.iter_mut().for_each(|t| *t = uniform);
        for i in 1..=cfg.iterations {
            let step = displacement_step(&field, i, &cfg).unwrap();
            field.record(&step);
        }
        for a in field.achieved() {
            assert!((a - uniform).abs() < 1e-9 * field.scale());
        }
    }

    proptest! {
        /// Any target within cap * N converges after N unmasked steps, every
        /// step respects the cap, and progress never reverses direction.
        #[test]
        fn unmasked_convergence(seed in 0u64..1000, iters in 3usize..60) {
            let mesh = shapes::unit_cube();
            let cfg = StyleConfig { seed, iterations: iters, ..Default::default() };
            let mut field = style_field(&mesh, &cfg).unwrap();
            let cap = cfg.per_iter_cap * field.scale();
            prop_assume!(field.target().iter().all(|t| t.abs() <= cap * iters as f64));
            for i in 1..=iters {
                let step = displacement_step(&field, i, &cfg).unwrap();
                for (d, (t, a)) in step.values().iter().zip(field.target().iter().zip(field.achieved())) {
                    prop_assert!(d.abs() <= cap);
                    let residual = t - a;
                    if *d != 0.0 {
                        prop_assert_eq!(d.signum(), residual.signum());
                    }
                }
                field.record(&step);
            }
            for (t, a) in field.target().iter().zip(field.achieved()) {
                prop_assert!((t - a).abs() < 1e-9 * field.scale());
            }
        }
    }
}
