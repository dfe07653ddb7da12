//! Material database and elastic-constant conversion.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("Poisson ratio {0} is at or past the incompressible limit 0.5")]
    Incompressible(f64),
    #[error("elastic constants out of domain: E = {e}, nu = {nu}")]
    Domain { e: f64, nu: f64 },
    #[error("material field out of domain: {0}")]
    BadField(String),
    #[error("unknown material `{0}`")]
    Unknown(String),
    #[error("could not read material file {path}: {msg}")]
    File { path: String, msg: String },
}

/// Lamé parameters from Young's modulus and Poisson ratio:
/// `lambda = E nu / ((1 + nu)(1 - 2 nu))`, `mu = E / (2 (1 + nu))`.
pub fn lame_from_elastic(e: f64, nu: f64) -> Result<(f64, f64), MaterialError> {
    if nu >= 0.5 {
        return Err(MaterialError::Incompressible(nu));
    }
    if !(e > 0.0) || nu < 0.0 {
        return Err(MaterialError::Domain { e, nu });
    }
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    Ok((lambda, mu))
}

/// Inverse conversion, used for consistency checks.
pub fn elastic_from_lame(lambda: f64, mu: f64) -> (f64, f64) {
    let e = mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu);
    let nu = lambda / (2.0 * (lambda + mu));
    (e, nu)
}

/// An isotropic elastic print material with derived Lamé constants (SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// Young's modulus (Pa).
    pub young_modulus: f64,
    /// Poisson ratio.
    pub poisson_ratio: f64,
    /// Yield strength (Pa); the break threshold for the viability verdict.
    pub yield_strength: f64,
    /// Density (kg/m^3).
    pub density: f64,
    pub lame_lambda: f64,
    pub lame_mu: f64,
}

impl Material {
    pub fn from_elastic(
        name: impl Into<String>,
        young_modulus: f64,
        poisson_ratio: f64,
        yield_strength: f64,
        density: f64,
    ) -> Result<Self, MaterialError> {
        if !(yield_strength > 0.0) {
            return Err(MaterialError::BadField(format!(
                "yield_strength = {yield_strength}"
            )));
        }
        if !(density > 0.0) {
            return Err(MaterialError::BadField(format!("density = {density}")));
        }
        let (lame_lambda, lame_mu) = lame_from_elastic(young_modulus, poisson_ratio)?;
        Ok(Self {
            name: name.into(),
            young_modulus,
            poisson_ratio,
            yield_strength,
            density,
            lame_lambda,
            lame_mu,
        })
    }
}

/// Raw entry of a `materials.json` map: `name -> {e, nu, yield, density}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub e: f64,
    pub nu: f64,
    #[serde(rename = "yield")]
    pub yield_strength: f64,
    pub density: f64,
}

/// Named material lookup with builtin defaults and optional user overrides.
///
/// Builtin PLA: yield 45.6 MPa; E = 3.5 GPa, nu = 0.35, rho = 1240 kg/m^3 are
/// engineering defaults from public datasheets and can be overridden.
#[derive(Debug, Clone)]
pub struct MaterialDb {
    entries: BTreeMap<String, MaterialSpec>,
}

impl Default for MaterialDb {
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(
            "pla".to_string(),
            MaterialSpec {
                e: 3.5e9,
                nu: 0.35,
                yield_strength: 45.6e6,
                density: 1240.0,
            },
        );
        entries.insert(
            "abs".to_string(),
            MaterialSpec {
                e: 2.3e9,
                nu: 0.35,
                yield_strength: 40.0e6,
                density: 1040.0,
            },
        );
        entries.insert(
            "petg".to_string(),
            MaterialSpec {
                e: 2.1e9,
                nu: 0.37,
                yield_strength: 50.0e6,
                density: 1270.0,
            },
        );
        Self { entries }
    }
}

impl MaterialDb {
    /// Merge entries from a `materials.json` map; user entries win.
    pub fn with_overrides(mut self, overrides: BTreeMap<String, MaterialSpec>) -> Self {
        self.entries.extend(overrides);
        self
    }

    pub fn load_overrides(path: impl AsRef<Path>) -> Result<BTreeMap<String, MaterialSpec>, MaterialError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| MaterialError::File {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| MaterialError::File {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }

    pub fn lookup(&self, name: &str) -> Result<Material, MaterialError> {
        let key = name.to_ascii_lowercase();
        let spec = self
            .entries
            .get(&key)
            .ok_or_else(|| MaterialError::Unknown(name.to_string()))?;
        Material::from_elastic(key, spec.e, spec.nu, spec.yield_strength, spec.density)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }
}

/// Convenience lookup against the builtin database.
pub fn material_lookup(name: &str) -> Result<Material, MaterialError> {
    MaterialDb::default().lookup(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_poisson_zeroes_lambda() {
        let (lambda, mu) = lame_from_elastic(1.0, 0.0).unwrap();
        assert_eq!(lambda, 0.0);
        assert_eq!(mu, 0.5);
    }

    #[test]
    fn hand_evaluated_case() {
        let (lambda, mu) = lame_from_elastic(3.0, 0.25).unwrap();
        assert_relative_eq!(lambda, 1.2, max_relative = 1e-15);
        assert_relative_eq!(mu, 1.2, max_relative = 1e-15);
    }

    #[test]
    fn incompressible_rejected() {
        assert!(matches!(
            lame_from_elastic(1.0, 0.5),
            Err(MaterialError::Incompressible(_))
        ));
        assert!(matches!(
            lame_from_elastic(-1.0, 0.3),
            Err(MaterialError::Domain { .. })
        ));
    }

    #[test]
    fn pla_yield_and_consistency() {
        let pla = material_lookup("pla").unwrap();
        assert_eq!(pla.yield_strength, 45.6e6);
        let (lambda, mu) = lame_from_elastic(pla.young_modulus, pla.poisson_ratio).unwrap();
        assert_eq!(pla.lame_lambda, lambda);
        assert_eq!(pla.lame_mu, mu);
    }

    #[test]
    fn unknown_material() {
        assert!(matches!(
            material_lookup("unobtainium"),
            Err(MaterialError::Unknown(_))
        ));
    }

    #[test]
    fn elastic_round_trip() {
        for (e, nu) in [(3.5e9, 0.35), (1.0, 0.0), (2.1e9, 0.45), (7.7e8, 0.2)] {
            let (lambda, mu) = lame_from_elastic(e, nu).unwrap();
            let (e2, nu2) = elastic_from_lame(lambda, mu);
            assert_relative_eq!(e, e2, max_relative = 1e-10);
            assert_relative_eq!(nu, nu2 + 1e-300, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn overrides_win() {
        let mut o = BTreeMap::new();
        o.insert(
            "pla".to_string(),
            MaterialSpec {
                e: 2.0e9,
                nu: 0.3,
                yield_strength: 40.0e6,
                density: 1200.0,
            },
        );
        let db = MaterialDb::default().with_overrides(o);
        assert_eq!(db.lookup("pla").unwrap().young_modulus, 2.0e9);
    }
}
