//! JSON config file support. Every CLI flag has a matching snake_case key
//! here; flags win over file values (with a note on stderr when they
//! conflict). The file may also carry keys with no flag equivalent
//! (simulation internals, material overrides).

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use simstyle::material::MaterialSpec;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    // Paths and identifiers.
    pub mesh: Option<String>,
    pub out: Option<String>,
    pub material: Option<String>,
    pub stress: Option<String>,
    pub stress_out: Option<String>,
    pub stats_out: Option<String>,
    pub trace: Option<String>,
    pub out_csv: Option<String>,
    pub reports_dir: Option<String>,
    // Geometry.
    pub scale: Option<f64>,
    pub voxel_size: Option<f64>,
    // Simulation.
    pub drop_height: Option<f64>,
    pub gravity: Option<f64>,
    pub timestep: Option<f64>,
    pub duration: Option<f64>,
    pub contact_stiffness: Option<f64>,
    pub damping: Option<f64>,
    pub substeps_per_frame: Option<usize>,
    // Failure analysis.
    pub safety_lambda: Option<f64>,
    // Stylization.
    pub seed: Option<u64>,
    pub amplitude: Option<f64>,
    pub frequency: Option<f64>,
    pub octaves: Option<u32>,
    pub iterations: Option<usize>,
    pub per_iter_cap: Option<f64>,
    // Control and scheduling.
    pub control: Option<String>,
    pub schedule: Option<String>,
    pub sim_budget: Option<usize>,
    pub geometry_fraction: Option<f64>,
    pub stress_floor: Option<f64>,
    // Batch evaluation.
    pub meshes: Option<Vec<String>>,
    pub seeds: Option<Vec<u64>>,
    pub controls: Option<Vec<String>>,
    pub schedules: Option<Vec<String>>,
    // Material database overrides: name -> {e, nu, yield, density}.
    pub materials: Option<BTreeMap<String, MaterialSpec>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fully populated sample used to check that every flag has a JSON key.
    #[cfg(test)]
    pub fn sample() -> Self {
        Self {
            mesh: Some(String::new()),
            out: Some(String::new()),
            material: Some(String::new()),
            stress: Some(String::new()),
            stress_out: Some(String::new()),
            stats_out: Some(String::new()),
            trace: Some(String::new()),
            out_csv: Some(String::new()),
            reports_dir: Some(String::new()),
            scale: Some(1.0),
            voxel_size: Some(1.0),
            drop_height: Some(1.0),
            gravity: Some(1.0),
            timestep: Some(1.0),
            duration: Some(1.0),
            contact_stiffness: Some(1.0),
            damping: Some(1.0),
            substeps_per_frame: Some(1),
            safety_lambda: Some(1.0),
            seed: Some(1),
            amplitude: Some(1.0),
            frequency: Some(1.0),
            octaves: Some(1),
            iterations: Some(1),
            per_iter_cap: Some(1.0),
            control: Some(String::new()),
            schedule: Some(String::new()),
            sim_budget: Some(1),
            geometry_fraction: Some(1.0),
            stress_floor: Some(1.0),
            meshes: Some(vec![]),
            seeds: Some(vec![]),
            controls: Some(vec![]),
            schedules: Some(vec![]),
            materials: Some(BTreeMap::new()),
        }
    }
}

/// Flag-wins merge: take the flag when present, otherwise the file value.
/// Notes the override on stderr when both are set and differ.
pub fn pick<T: PartialEq + std::fmt::Debug + Clone>(
    name: &str,
    flag: Option<T>,
    file: Option<T>,
) -> Option<T> {
    match (flag, file) {
        (Some(f), Some(c)) => {
            if f != c {
                eprintln!("note: --{name} {f:?} overrides config value {c:?}");
            }
            Some(f)
        }
        (Some(f), None) => Some(f),
        (None, Some(c)) => Some(c),
        (None, None) => None,
    }
}

/// Stress JSON emitted by `simulate` and consumed by `analyze`.
#[derive(Debug, Serialize, Deserialize)]
pub struct StressJson {
    pub mesh: Option<String>,
    pub material: Option<String>,
    pub sigma_c_pa: Option<f64>,
    pub max_vertex_vm_pa: f64,
    pub per_vertex_vm_pa: Vec<f64>,
    pub per_element_max_vm_pa: Vec<f64>,
}
