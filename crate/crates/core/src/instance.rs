//! Instance files and the seeded hidden-triangularization generator.
//!
//! The random model draws `k` strictly upper triangular matrices with
//! standard complex normal entries and conjugates them by a hidden
//! invertible `S0 = U diag(sigma) V*` whose singular values run from 1 up to
//! `cond_cap`. `S0` is stored with the instance so it can serve as an
//! oracle.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`).
//! Uniforms are `rng.random::<f64>()` in `[0, 1)`; a standard complex normal is
//! `(z0 + i z1) / sqrt(2)` with `(z0, z1)` from one Box-Muller pair. Draw
//! order: generator entries (generator-major, then row-major over `i < j`),
//! then `U`, then `V` (column-major), then the interior singular-value
//! exponents.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::GeneratorSet;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

pub const SCHEMA_VERSION: u32 = 1;
pub const HIDDEN_MODEL: &str = "hidden-triangularization";

/// Tolerance on `S0^-1 g S0` being strictly upper, relative to
/// `cond(S0)^2 * (1 + ||g||)`, the scale at which conjugation roundoff lives.
pub const HIDDEN_ORACLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    #[serde(default)]
    pub seed: Option<u64>,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_conjugator: Option<ComplexMatrix>,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub dim: usize,
    pub generators: Vec<ComplexMatrix>,
    pub metadata: InstanceMetadata,
}

impl InstanceFile {
    /// A hand-built instance without a hidden oracle.
    pub fn from_generators(generators: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let dim = generators.first().map(|g| g.dim()).unwrap_or(0);
        let f = InstanceFile {
            schema_version: SCHEMA_VERSION,
            dim,
            generators,
            metadata: InstanceMetadata {
                seed: None,
                model: "explicit".into(),
                hidden_conjugator: None,
                label: label.into(),
            },
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        if self.generators.is_empty() {
            return Err(Error::InvalidParameter("instance has no generators".into()));
        }
        for g in &self.generators {
            if g.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: g.dim(),
                });
            }
        }
        if let Some(s) = &self.metadata.hidden_conjugator {
            if s.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: s.dim(),
                });
            }
            let r = self.hidden_oracle_residual().expect("conjugator present");
            if !(r <= HIDDEN_ORACLE_TOL) {
                return Err(Error::InvalidParameter(format!(
                    "hidden conjugator does not triangularize the generators (residual {r:e})"
                )));
            }
        }
        Ok(())
    }

    /// Largest lower-plus-diagonal mass of `S0^-1 g S0`, relative to
    /// `cond(S0)^2 (1 + ||g||)`; `None` without a hidden conjugator or when
    /// `S0` is numerically singular.
    pub fn hidden_oracle_residual(&self) -> Option<f64> {
        let s = self.metadata.hidden_conjugator.as_ref()?;
        let sv = crate::matrix::singular_values(s);
        let (hi, lo) = (sv[0], *sv.last().unwrap());
        if !(lo > 0.0) {
            return Some(f64::INFINITY);
        }
        let cond = hi / lo;
        let inv = s.as_dmatrix().clone().try_inverse()?;
        let worst = self
            .generators
            .iter()
            .map(|g| {
                let t = ComplexMatrix::wrap(&inv * g.as_dmatrix() * s.as_dmatrix());
                t.lower_mass() / (cond * cond * (1.0 + g.op_norm()))
            })
            .fold(0.0, f64::max);
        Some(worst)
    }

    pub fn generator_set(&self) -> Result<GeneratorSet> {
        GeneratorSet::new(self.generators.clone(), self.metadata.label.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: InstanceFile = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Standard complex normal sampler over a seeded ChaCha20 stream.
pub struct ComplexNormal {
    rng: ChaCha20Rng,
}

impl ComplexNormal {
    pub fn new(seed: u64) -> Self {
        ComplexNormal {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn sample(&mut self) -> C64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        C64::new(r * theta.cos(), r * theta.sin()) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn matrix(&mut self, n: usize) -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |_, _| self.sample())
    }

    pub fn strictly_upper(&mut self, n: usize) -> DMatrix<C64> {
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                m[(i, j)] = self.sample();
            }
        }
        m
    }

    /// Haar-distributed unitary: QR of a complex Ginibre matrix with the
    /// phases of `R`'s diagonal folded back into `Q`.
    pub fn unitary(&mut self, n: usize) -> DMatrix<C64> {
        let qr = self.matrix(n).qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        q
    }
}

/// `S0 = U diag(sigma) V*` with `sigma_1 = 1`, `sigma_n = cond_cap` and the
/// rest `cond_cap^u` for uniform `u`; returns `(S0, S0^-1)`.
fn hidden_conjugator(rng: &mut ComplexNormal, n: usize, cond_cap: f64) -> (DMatrix<C64>, DMatrix<C64>) {
    let u = rng.unitary(n);
    let v = rng.unitary(n);
    let mut sigma = vec![1.0; n];
    sigma[n - 1] = cond_cap;
    for s in sigma.iter_mut().take(n - 1).skip(1) {
        *s = cond_cap.powf(rng.uniform());
    }
    let d = DMatrix::<C64>::from_diagonal(&nalgebra::DVector::from_iterator(n, sigma.iter().map(|&s| C64::new(s, 0.0))));
    let dinv = DMatrix::<C64>::from_diagonal(&nalgebra::DVector::from_iterator(n, sigma.iter().map(|&s| C64::new(1.0 / s, 0.0))));
    (&u * d * v.adjoint(), &v * dinv * u.adjoint())
}

/// Seeded hidden-triangularization instance: `k` strictly upper triangular
/// generators conjugated by a hidden `S0` with `cond(S0) = cond_cap`.
pub fn gen_random(seed: u64, n: usize, k: usize, cond_cap: f64) -> Result<InstanceFile> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {n}")));
    }
    if k < 1 {
        return Err(Error::InvalidParameter("need at least one generator".into()));
    }
    if !(cond_cap.is_finite() && cond_cap >= 1.0) {
        return Err(Error::InvalidParameter(format!("cond_cap must be finite and >= 1, got {cond_cap}")));
    }
    let mut rng = ComplexNormal::new(seed);
    let hidden: Vec<DMatrix<C64>> = (0..k).map(|_| rng.strictly_upper(n)).collect();
    let (s, sinv) = hidden_conjugator(&mut rng, n, cond_cap);
    let generators = hidden
        .iter()
        .map(|h| ComplexMatrix::from_dmatrix(&s * h * &sinv))
        .collect::<Result<Vec<_>>>()?;
    let f = InstanceFile {
        schema_version: SCHEMA_VERSION,
        dim: n,
        generators,
        metadata: InstanceMetadata {
            seed: Some(seed),
            model: HIDDEN_MODEL.into(),
            hidden_conjugator: Some(ComplexMatrix::from_dmatrix(s)?),
            label: format!("hidden n={n} k={k} cond={cond_cap}"),
        },
    };
    f.validate()?;
    Ok(f)
}

/// The canned `{E12, E23}` instance on `C^3`.
pub fn canned_shift_pair() -> InstanceFile {
    InstanceFile::from_generators(vec![ComplexMatrix::unit(3, 0, 1), ComplexMatrix::unit(3, 1, 2)], "E12/E23")
        .expect("canned instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{is_nilpotent, trace};
    use crate::ToleranceConfig;

    #[test]
    fn small_unitary_instance() {
        let f = gen_random(1, 2, 1, 1.0).unwrap();
        assert_eq!(f.generators.len(), 1);
        let s = f.metadata.hidden_conjugator.as_ref().unwrap();
        let sts = s.adjoint() * s.clone();
        assert!(sts.approx_eq(&ComplexMatrix::identity(2), 1e-14));
        assert!(is_nilpotent(&f.generators[0], &ToleranceConfig::default()).unwrap());
    }

    #[test]
    fn traceless_generators() {
        for seed in 0..20 {
            let f = gen_random(seed, 2, 1, 100.0).unwrap();
            assert!(trace(&f.generators[0]).norm() < 1e-12 * (1.0 + f.generators[0].op_norm()) * 100.0);
        }
    }

    #[test]
    fn deterministic_bytes() {
        let a = gen_random(1, 5, 3, 100.0).unwrap().to_json().unwrap();
        let b = gen_random(1, 5, 3, 100.0).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random(2, 5, 3, 100.0).unwrap().to_json().unwrap());
    }

    #[test]
    fn conditioning_is_capped() {
        let f = gen_random(9, 6, 2, 1e3).unwrap();
        let sv = crate::matrix::singular_values(f.metadata.hidden_conjugator.as_ref().unwrap());
        let cond = sv[0] / sv[5];
        assert!((cond - 1e3).abs() <= 1e-7);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let f = gen_random(4, 4, 2, 10.0).unwrap();
        let back = InstanceFile::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
        let mut bad = f.clone();
        bad.schema_version = 2;
        assert!(bad.validate().is_err());
        let mut bad = f.clone();
        bad.generators.clear();
        assert!(bad.validate().is_err());
        let mut bad = f;
        bad.generators[0] = ComplexMatrix::unit(4, 3, 0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn parameter_errors() {
        assert!(gen_random(1, 1, 1, 1.0).is_err());
        assert!(gen_random(1, 3, 0, 1.0).is_err());
        assert!(gen_random(1, 3, 1, 0.5).is_err());
        assert!(gen_random(1, 3, 1, f64::NAN).is_err());
    }
}
