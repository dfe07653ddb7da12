//! Drop-test FEA: explicit dynamics of stable neo-Hookean tetrahedra with
//! penalty ground contact, tracking the running per-element maximum von Mises
//! stress.
//!
//! The free fall itself is replaced by its analytic outcome: the model starts
//! 1 mm above the plane moving at the impact velocity `sqrt(2 g h)`, which is
//! the same physics at impact for a fraction of the steps.
//!
//! Energy density (stable reparameterization, rest state force-free):
//! `psi = mu/2 (I_C - 3) - mu (J - 1) + (lambda + mu)/2 (J - 1)^2`
//! with `F` the deformation gradient, `J = det F`, `I_C = tr(F^T F)`.
//! First Piola stress `P = mu F + ((lambda + mu)(J - 1) - mu) cof F`;
//! Cauchy stress `sigma = P F^T / J`.
//!
//! Element force assembly runs in parallel; the per-node scatter is a fixed
//! element-order sequential pass, so results are bitwise reproducible across
//! thread counts.

use std::io::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::material::Material;
use crate::par;
use crate::tet::{Correspondence, TetMesh};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("timestep {dt} exceeds the stability bound {bound}")]
    StabilityBound { dt: f64, bound: f64 },
    #[error("simulation config out of domain: {0}")]
    BadConfig(String),
    #[error("element {0} is numerically degenerate")]
    DegenerateElement(usize),
    #[error("non-finite state at step {step} (node {node}); reduce dt or stiffness")]
    Instability { step: u64, node: usize },
    #[error("stress tensor asymmetric: relative skew {0}")]
    Asymmetry(f64),
    #[error("correspondence is stale: {0}")]
    StaleCorrespondence(String),
    #[error("trace io error on {path}: {source}")]
    TraceIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Factor applied to the stability bound when auto-selecting the timestep.
pub const DT_SAFETY: f64 = 0.8;
/// Starting gap between the model's lowest point and the ground plane (m).
pub const START_CLEARANCE: f64 = 1e-3;
/// Dynamic penetration target used to derive the auto contact stiffness (m).
pub const CONTACT_PENETRATION_TARGET: f64 = 5e-4;
/// Below this many items a pass runs sequentially; identical results either
/// way, this only dodges fork-join overhead on small meshes.
const PAR_THRESHOLD: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Drop height (m).
    pub drop_height: f64,
    /// Gravity magnitude (m/s^2), acting along -z.
    pub gravity: f64,
    /// Explicit timestep (s); `None` picks `DT_SAFETY` times the stability
    /// bound `0.5 h_min sqrt(rho / (lambda + 2 mu))`.
    pub timestep: Option<f64>,
    /// Simulated time after impact (s).
    pub duration: f64,
    /// Uniform penalty contact stiffness (N/m per node); `None` derives a
    /// per-node value from the node mass and the impact velocity such that
    /// dynamic penetration stays near `CONTACT_PENETRATION_TARGET`.
    pub contact_stiffness: Option<f64>,
    /// Mass-proportional damping rate (1/s).
    pub damping: f64,
    /// Steps per trace frame when stress tracing is enabled.
    pub substeps_per_frame: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            drop_height: 1.5,
            gravity: 9.81,
            timestep: None,
            duration: 0.030,
            contact_stiffness: None,
            damping: 5.0,
            substeps_per_frame: 16,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.drop_height < 0.0 {
            return Err(SimError::BadConfig(format!(
                "drop_height = {}",
                self.drop_height
            )));
        }
        if self.gravity < 0.0 {
            return Err(SimError::BadConfig(format!("gravity = {}", self.gravity)));
        }
        if !(self.duration > 0.0) {
            return Err(SimError::BadConfig(format!("duration = {}", self.duration)));
        }
        if self.damping < 0.0 {
            return Err(SimError::BadConfig(format!("damping = {}", self.damping)));
        }
        if let Some(dt) = self.timestep {
            if !(dt > 0.0) {
                return Err(SimError::BadConfig(format!("timestep = {dt}")));
            }
        }
        if let Some(k) = self.contact_stiffness {
            if !(k > 0.0) {
                return Err(SimError::BadConfig(format!("contact_stiffness = {k}")));
            }
        }
        if self.substeps_per_frame == 0 {
            return Err(SimError::BadConfig("substeps_per_frame = 0".into()));
        }
        Ok(())
    }

    /// Timestep actually used for a mesh/material pair, checked against the
    /// stability bound.
    pub fn resolve_timestep(&self, tm: &TetMesh, mat: &Material) -> Result<f64, SimError> {
        let bound = stability_dt_bound(tm, mat);
        match self.timestep {
            Some(dt) if dt > bound => Err(SimError::StabilityBound { dt, bound }),
            Some(dt) => Ok(dt),
            None => Ok(DT_SAFETY * bound),
        }
    }
}

/// Free-fall impact speed `sqrt(2 g h)`.
pub fn impact_velocity(height: f64, gravity: f64) -> f64 {
    (2.0 * gravity * height).sqrt()
}

/// Explicit-integration timestep bound `0.5 h_min sqrt(rho / (lambda + 2 mu))`.
pub fn stability_dt_bound(tm: &TetMesh, mat: &Material) -> f64 {
    let h_min = tm.min_edge_length();
    0.5 * h_min * (mat.density / (mat.lame_lambda + 2.0 * mat.lame_mu)).sqrt()
}

/// Per-element (and optionally per-surface-vertex) maximum von Mises stress
/// over a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressField {
    pub per_element_max_vm: Vec<f64>,
    pub per_vertex_vm: Option<Vec<f64>>,
}

/// Von Mises stress of a symmetric Cauchy tensor:
/// `sqrt(3/2 s : s)` with `s` the deviatoric part.
pub fn element_von_mises(cauchy: &Matrix3<f64>) -> Result<f64, SimError> {
    let scale = cauchy.amax();
    if scale > 0.0 {
        let skew = (cauchy - cauchy.transpose()).amax() / scale;
        if skew > 1e-9 {
            return Err(SimError::Asymmetry(skew));
        }
    }
    Ok(von_mises_unchecked(cauchy))
}

fn von_mises_unchecked(s: &Matrix3<f64>) -> f64 {
    let p = (s[(0, 0)] + s[(1, 1)] + s[(2, 2)]) / 3.0;
    let d00 = s[(0, 0)] - p;
    let d11 = s[(1, 1)] - p;
    let d22 = s[(2, 2)] - p;
    let off = s[(0, 1)].powi(2) + s[(0, 2)].powi(2) + s[(1, 2)].powi(2);
    // s : s counts the off-diagonal entries twice.
    (1.5 * (d00 * d00 + d11 * d11 + d22 * d22 + 2.0 * off)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub elastic: f64,
    pub potential: f64,
    pub contact: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.elastic + self.potential + self.contact
    }
}

struct ElementData<'a> {
    positions: &'a [Point3<f64>],
    tets: &'a [[usize; 4]],
    inv_rest: &'a [Matrix3<f64>],
    rest_volume: &'a [f64],
    mu: f64,
    lambda_hat: f64,
}

impl ElementData<'_> {
    /// Nodal forces and current von Mises stress of one element.
    fn response(&self, ei: usize) -> ([Vector3<f64>; 4], f64) {
        let t = self.tets[ei];
        let x0 = self.positions[t[0]];
        let ds = Matrix3::from_columns(&[
            self.positions[t[1]] - x0,
            self.positions[t[2]] - x0,
            self.positions[t[3]] - x0,
        ]);
        let f = ds * self.inv_rest[ei];
        let c0: Vector3<f64> = f.column(0).into();
        let c1: Vector3<f64> = f.column(1).into();
        let c2: Vector3<f64> = f.column(2).into();
        let j = c0.dot(&c1.cross(&c2));
        let cof = Matrix3::from_columns(&[c1.cross(&c2), c2.cross(&c0), c0.cross(&c1)]);
        let p = f * self.mu + cof * (self.lambda_hat * (j - 1.0) - self.mu);

        let h = p * self.inv_rest[ei].transpose() * (-self.rest_volume[ei]);
        let f1: Vector3<f64> = h.column(0).into();
        let f2: Vector3<f64> = h.column(1).into();
        let f3: Vector3<f64> = h.column(2).into();
        let f0 = -(f1 + f2 + f3);

        let vm = if j.abs() > 1e-300 {
            let sigma = p * f.transpose() / j;
            let sym = (sigma + sigma.transpose()) * 0.5;
            von_mises_unchecked(&sym)
        } else {
            f64::INFINITY
        };
        ([f0, f1, f2, f3], vm)
    }
}

/// Explicit symplectic-Euler integrator over a tetrahedral mesh.
///
/// A pure function of its construction inputs: two instances stepped the same
/// number of times produce bitwise-identical state regardless of thread count.
pub struct Simulator {
    positions: Vec<Point3<f64>>,
    velocities: Vec<Vector3<f64>>,
    tets: Vec<[usize; 4]>,
    inv_rest: Vec<Matrix3<f64>>,
    rest_volume: Vec<f64>,
    node_mass: Vec<f64>,
    contact_stiffness: Vec<f64>,
    mu: f64,
    /// Reparameterized volume-term coefficient `lambda + mu`.
    lambda_hat: f64,
    gravity: Vector3<f64>,
    damping: f64,
    ground: bool,
    dt: f64,
    step_count: u64,
    max_vm: Vec<f64>,
    elem_out: Vec<([Vector3<f64>; 4], f64)>,
    node_force: Vec<Vector3<f64>>,
}

impl Simulator {
    pub fn new(tm: &TetMesh, mat: &Material, dt: f64) -> Result<Self, SimError> {
        if !(dt > 0.0) {
            return Err(SimError::BadConfig(format!("timestep = {dt}")));
        }
        let n_nodes = tm.node_count();
        let n_elems = tm.tet_count();
        let mut inv_rest = Vec::with_capacity(n_elems);
        let mut rest_volume = Vec::with_capacity(n_elems);
        let mut node_mass = vec![0.0; n_nodes];
        for (ei, t) in tm.tets().iter().enumerate() {
            let x0 = tm.nodes()[t[0]];
            let dm = Matrix3::from_columns(&[
                tm.nodes()[t[1]] - x0,
                tm.nodes()[t[2]] - x0,
                tm.nodes()[t[3]] - x0,
            ]);
            let vol = dm.determinant() / 6.0;
            let inv = dm.try_inverse().filter(|_| vol > 0.0);
            let inv = inv.ok_or(SimError::DegenerateElement(ei))?;
            inv_rest.push(inv);
            rest_volume.push(vol);
            let share = mat.density * vol / 4.0;
            for &n in t {
                node_mass[n] += share;
            }
        }
        Ok(Self {
            positions: tm.nodes().to_vec(),
            velocities: vec![Vector3::zeros(); n_nodes],
            tets: tm.tets().to_vec(),
            inv_rest,
            rest_volume,
            node_mass,
            contact_stiffness: vec![0.0; n_nodes],
            mu: mat.lame_mu,
            lambda_hat: mat.lame_lambda + mat.lame_mu,
            gravity: Vector3::zeros(),
            damping: 0.0,
            ground: false,
            dt,
            step_count: 0,
            max_vm: vec![0.0; n_elems],
            elem_out: vec![([Vector3::zeros(); 4], 0.0); n_elems],
            node_force: vec![Vector3::zeros(); n_nodes],
        })
    }

    pub fn set_gravity(&mut self, g: Vector3<f64>) {
        self.gravity = g;
    }

    pub fn set_damping(&mut self, c: f64) {
        self.damping = c;
    }

    /// Enable the penalty ground plane at z = 0 with per-node stiffness.
    pub fn set_ground(&mut self, stiffness: Vec<f64>) {
        assert_eq!(stiffness.len(), self.positions.len());
        self.contact_stiffness = stiffness;
        self.ground = true;
    }

    pub fn positions(&self) -> &[Point3<f64>] {
        &self.positions
    }

    pub fn positions_mut(&mut self) -> &mut [Point3<f64>] {
        &mut self.positions
    }

    pub fn velocities_mut(&mut self) -> &mut [Vector3<f64>] {
        &mut self.velocities
    }

    pub fn node_masses(&self) -> &[f64] {
        &self.node_mass
    }

    pub fn max_von_mises(&self) -> &[f64] {
        &self.max_vm
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Elastic nodal forces at the current state (no integration); also folds
    /// the current per-element stress into the running maxima.
    pub fn internal_forces(&mut self) -> &[Vector3<f64>] {
        let data = ElementData {
            positions: &self.positions,
            tets: &self.tets,
            inv_rest: &self.inv_rest,
            rest_volume: &self.rest_volume,
            mu: self.mu,
            lambda_hat: self.lambda_hat,
        };
        if self.tets.len() >= PAR_THRESHOLD {
            par::fill_indexed(&mut self.elem_out, |ei| data.response(ei));
        } else {
            for (ei, slot) in self.elem_out.iter_mut().enumerate() {
                *slot = data.response(ei);
            }
        }

        self.node_force
            .iter_mut()
            .for_each(|f| *f = Vector3::zeros());
        for (ei, (forces, vm)) in self.elem_out.iter().enumerate() {
            let t = self.tets[ei];
            for (k, fk) in forces.iter().enumerate() {
                self.node_force[t[k]] += fk;
            }
            if *vm > self.max_vm[ei] {
                self.max_vm[ei] = *vm;
            }
        }
        &self.node_force
    }

    /// One symplectic-Euler step: `v += dt a`, `x += dt v`.
    pub fn step(&mut self) -> Result<(), SimError> {
        self.internal_forces();
        let dt = self.dt;
        let damping = self.damping;
        let gravity = self.gravity;
        let ground = self.ground;
        let node_force = &self.node_force;
        let node_mass = &self.node_mass;
        let contact = &self.contact_stiffness;
        let n = self.positions.len();
        let update = |i: usize, p: &mut Point3<f64>, v: &mut Vector3<f64>| {
            let mut accel = node_force[i] / node_mass[i] + gravity - *v * damping;
            if ground {
                let depth = -p.z;
                if depth > 0.0 {
                    accel.z += contact[i] * depth / node_mass[i];
                }
            }
            *v += accel * dt;
            *p += *v * dt;
        };
        if n >= PAR_THRESHOLD {
            par::update_pairs(&mut self.positions, &mut self.velocities, update);
        } else {
            for (i, (p, v)) in self
                .positions
                .iter_mut()
                .zip(self.velocities.iter_mut())
                .enumerate()
            {
                update(i, p, v);
            }
        }
        self.step_count += 1;
        if let Some(node) = self
            .positions
            .iter()
            .position(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
        {
            return Err(SimError::Instability {
                step: self.step_count,
                node,
            });
        }
        Ok(())
    }

    pub fn energy(&self) -> Energy {
        let mut kinetic = 0.0;
        let mut potential = 0.0;
        let mut contact = 0.0;
        for i in 0..self.positions.len() {
            kinetic += 0.5 * self.node_mass[i] * self.velocities[i].norm_squared();
            potential -= self.node_mass[i] * self.gravity.dot(&self.positions[i].coords);
            if self.ground {
                let depth = -self.positions[i].z;
                if depth > 0.0 {
                    contact += 0.5 * self.contact_stiffness[i] * depth * depth;
                }
            }
        }
        let mut elastic = 0.0;
        for ei in 0..self.tets.len() {
            let t = self.tets[ei];
            let x0 = self.positions[t[0]];
            let ds = Matrix3::from_columns(&[
                self.positions[t[1]] - x0,
                self.positions[t[2]] - x0,
                self.positions[t[3]] - x0,
            ]);
            let f = ds * self.inv_rest[ei];
            let j = f.determinant();
            let ic = (f.transpose() * f).trace();
            let psi = 0.5 * self.mu * (ic - 3.0) - self.mu * (j - 1.0)
                + 0.5 * self.lambda_hat * (j - 1.0) * (j - 1.0);
            elastic += self.rest_volume[ei] * psi;
        }
        Energy {
            kinetic,
            elastic,
            potential,
            contact,
        }
    }
}

/// Binary stress-trace header magic.
const TRACE_MAGIC: &[u8; 8] = b"SIMTRACE";
const TRACE_VERSION: u32 = 1;

struct TraceWriter {
    file: std::io::BufWriter<std::fs::File>,
    path: String,
}

impl TraceWriter {
    fn create(path: &Path, n_elements: usize, dt: f64, substeps: usize) -> Result<Self, SimError> {
        let to_err = |source| SimError::TraceIo {
            path: path.display().to_string(),
            source,
        };
        let file = std::fs::File::create(path).map_err(to_err)?;
        let mut w = Self {
            file: std::io::BufWriter::new(file),
            path: path.display().to_string(),
        };
        w.write(TRACE_MAGIC)?;
        w.write(&TRACE_VERSION.to_le_bytes())?;
        w.write(&(n_elements as u32).to_le_bytes())?;
        w.write(&dt.to_le_bytes())?;
        w.write(&(substeps as u32).to_le_bytes())?;
        Ok(w)
    }

    fn write(&mut self, bytes: &[u8]) -> Result<(), SimError> {
        self.file.write_all(bytes).map_err(|source| SimError::TraceIo {
            path: self.path.clone(),
            source,
        })
    }

    fn frame(&mut self, step: u64, time: f64, vm: &[f64]) -> Result<(), SimError> {
        self.write(&step.to_le_bytes())?;
        self.write(&time.to_le_bytes())?;
        for v in vm {
            self.write(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Drop the model onto the plane z = 0 and return the per-element maximum von
/// Mises stress over the simulated window.
///
/// The rest orientation is preserved; the model is translated so its lowest
/// point sits `START_CLEARANCE` above the plane and given the downward impact
/// velocity for the configured height.
pub fn drop_test(tm: &TetMesh, mat: &Material, cfg: &SimConfig) -> Result<StressField, SimError> {
    drop_test_traced(tm, mat, cfg, None)
}

/// [`drop_test`] with an optional binary stress trace (one frame of running
/// per-element maxima every `substeps_per_frame` steps).
pub fn drop_test_traced(
    tm: &TetMesh,
    mat: &Material,
    cfg: &SimConfig,
    trace_path: Option<&Path>,
) -> Result<StressField, SimError> {
    cfg.validate()?;
    let dt = cfg.resolve_timestep(tm, mat)?;
    let mut sim = Simulator::new(tm, mat, dt)?;
    sim.set_gravity(Vector3::new(0.0, 0.0, -cfg.gravity));
    sim.set_damping(cfg.damping);

    let v_impact = impact_velocity(cfg.drop_height, cfg.gravity);

    // Rest the model just above the plane, falling at impact speed.
    let min_z = sim
        .positions()
        .iter()
        .map(|p| p.z)
        .fold(f64::INFINITY, f64::min);
    let lift = START_CLEARANCE - min_z;
    for p in sim.positions_mut() {
        p.z += lift;
    }
    for v in sim.velocities_mut() {
        v.z = -v_impact;
    }

    let stiffness: Vec<f64> = match cfg.contact_stiffness {
        Some(k) => vec![k; tm.node_count()],
        None => {
            // Penalty stiffness from a penetration target: k = m (v/delta)^2
            // stops a node of mass m moving at v within delta. For a static
            // (v = 0) configuration fall back to a 0.1 mm sag under standard
            // gravity.
            sim.node_masses()
                .iter()
                .map(|m| {
                    if v_impact > 0.0 {
                        m * (v_impact / CONTACT_PENETRATION_TARGET).powi(2)
                    } else {
                        m * 9.81 / 1e-4
                    }
                })
                .collect()
        }
    };
    sim.set_ground(stiffness);

    let n_steps = (cfg.duration / dt).ceil() as u64;
    let mut trace = match trace_path {
        Some(path) => Some(TraceWriter::create(
            path,
            tm.tet_count(),
            dt,
            cfg.substeps_per_frame,
        )?),
        None => None,
    };
    for s in 0..n_steps {
        sim.step()?;
        if let Some(w) = trace.as_mut() {
            if s % cfg.substeps_per_frame as u64 == 0 || s + 1 == n_steps {
                w.frame(sim.step_count(), sim.step_count() as f64 * dt, sim.max_von_mises())?;
            }
        }
    }

    Ok(StressField {
        per_element_max_vm: sim.max_vm,
        per_vertex_vm: None,
    })
}

/// Map per-element stress onto surface vertices: each boundary node takes the
/// maximum over its incident elements, each surface vertex its matched
/// boundary node's value.
pub fn element_to_vertex_stress(
    sf: &StressField,
    tm: &TetMesh,
    corr: &Correspondence,
) -> Result<Vec<f64>, SimError> {
    if sf.per_element_max_vm.len() != tm.tet_count() {
        return Err(SimError::StaleCorrespondence(format!(
            "stress field has {} elements, mesh has {}",
            sf.per_element_max_vm.len(),
            tm.tet_count()
        )));
    }
    if corr.tet_to_surf.len() != tm.boundary_nodes().len() {
        return Err(SimError::StaleCorrespondence(format!(
            "correspondence covers {} boundary nodes, mesh has {}",
            corr.tet_to_surf.len(),
            tm.boundary_nodes().len()
        )));
    }
    let mut node_max = vec![0.0f64; tm.node_count()];
    for (t, &vm) in tm.tets().iter().zip(&sf.per_element_max_vm) {
        for &n in t {
            if vm > node_max[n] {
                node_max[n] = vm;
            }
        }
    }
    corr.surf_to_tet
        .iter()
        .map(|&n| {
            node_max
                .get(n)
                .copied()
                .ok_or_else(|| SimError::StaleCorrespondence(format!("node {n} out of range")))
        })
        .collect()
}
