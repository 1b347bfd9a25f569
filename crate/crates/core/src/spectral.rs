//! Riesz projections of `A` and of `ad(A)`.
//!
//! Projections come from a clustered, reordered Schur form: eigenvalues are
//! grouped, each group is moved into a contiguous diagonal block, and the
//! spectral projector of a group is the indicator function of that block
//! evaluated by a block Parlett recurrence. Jordan structure is never formed.
//!
//! Matrices are vectorized by stacking columns, so `vec(A X B) = (B^T ⊗ A) vec(X)`
//! and `ad(A) = I ⊗ A - A^T ⊗ I`.

use nalgebra::DMatrix;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ToleranceConfig, C64};
use crate::schur::ClusteredSchur;
use crate::subspace::MatrixSpace;

#[derive(Debug, Clone)]
pub struct SpectralCluster {
    pub lambda: C64,
    pub multiplicity: usize,
    pub projection: ComplexMatrix,
    /// Largest distance from a member eigenvalue to `lambda`.
    pub spread: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub matrix_dim: usize,
    pub clusters: Vec<SpectralCluster>,
    /// Matching radius used for eigenvalue comparisons, `cluster_tol * (1 + ||A||)`.
    pub radius: f64,
}

impl SpectralDecomposition {
    /// Index of the cluster whose representative is nearest to `lambda`,
    /// accepted if within the matching radius plus the cluster's spread.
    pub fn find(&self, lambda: C64) -> Option<usize> {
        let (i, d) = self
            .clusters
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c.lambda - lambda).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        (d <= self.radius + self.clusters[i].spread).then_some(i)
    }

    /// Largest deviation among the structural identities: resolution of the
    /// identity, idempotence, mutual annihilation, commutation with `a`.
    pub fn invariant_residual(&self, a: &ComplexMatrix) -> f64 {
        let n = self.matrix_dim;
        let mut sum = ComplexMatrix::zeros(n);
        let mut worst = 0.0f64;
        for (i, c) in self.clusters.iter().enumerate() {
            let p = &c.projection;
            sum = &sum + p;
            let scale = 1.0 + p.op_norm();
            worst = worst.max((&(p * p) - p).max_abs() / (scale * scale));
            worst = worst.max((&(p * a) - &(a * p)).max_abs() / (scale * (1.0 + a.op_norm())));
            for d in &self.clusters[i + 1..] {
                let s2 = scale * (1.0 + d.projection.op_norm());
                worst = worst.max((p * &d.projection).max_abs() / s2);
            }
        }
        let total: f64 = self.clusters.iter().map(|c| c.projection.op_norm()).sum();
        worst.max(sum.max_abs_diff(&ComplexMatrix::identity(n)) / (1.0 + total))
    }
}

impl Serialize for SpectralDecomposition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            lambda: [f64; 2],
            multiplicity: usize,
            projection: &'a ComplexMatrix,
        }
        let mut seq = serializer.serialize_seq(Some(self.clusters.len()))?;
        for c in &self.clusters {
            seq.serialize_element(&Entry {
                lambda: [c.lambda.re, c.lambda.im],
                multiplicity: c.multiplicity,
                projection: &c.projection,
            })?;
        }
        seq.end()
    }
}

fn decompose(m: &DMatrix<C64>, cfg: &ToleranceConfig) -> Result<SpectralDecomposition> {
    cfg.validate()?;
    let cs = ClusteredSchur::new(m, cfg)?;
    let clusters = cs
        .clusters()
        .iter()
        .enumerate()
        .map(|(i, c)| SpectralCluster {
            lambda: c.rep,
            multiplicity: c.multiplicity,
            projection: ComplexMatrix::wrap(cs.projector(i)),
            spread: c.spread,
        })
        .collect();
    Ok(SpectralDecomposition {
        matrix_dim: m.nrows(),
        clusters,
        radius: cs.radius(),
    })
}

/// Cluster the spectrum of `a` and return one Riesz projection per cluster,
/// ordered by representative (real part, then imaginary part).
pub fn riesz_decomposition(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<SpectralDecomposition> {
    decompose(a.as_dmatrix(), cfg)
}

/// The `n^2 x n^2` matrix of `B -> AB - BA` on column-stacked matrices.
pub fn ad_matrix(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let id = DMatrix::<C64>::identity(n, n);
    let m = a.as_dmatrix();
    ComplexMatrix::wrap(id.kronecker(m) - m.transpose().kronecker(&id))
}

/// The spectral decomposition of `ad(A)`, computed once and queried per `λ`.
#[derive(Debug, Clone)]
pub struct AdSpectrum {
    dim: usize,
    decomposition: SpectralDecomposition,
}

impl AdSpectrum {
    pub fn new(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        Ok(AdSpectrum {
            dim: a.dim(),
            decomposition: decompose(ad_matrix(a).as_dmatrix(), cfg)?,
        })
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.decomposition.clusters.iter().map(|c| c.lambda).collect()
    }

    pub fn projector(&self, lambda: C64) -> Result<&ComplexMatrix> {
        self.decomposition
            .find(lambda)
            .map(|i| &self.decomposition.clusters[i].projection)
            .ok_or_else(|| Error::NotInSpectrum(format!("{lambda} is not an eigenvalue of ad(A)")))
    }

    /// Range of the projector at `lambda`, as a space of `n x n` matrices.
    pub fn manifold(&self, lambda: C64, cfg: &ToleranceConfig) -> Result<MatrixSpace> {
        let i = self
            .decomposition
            .find(lambda)
            .ok_or_else(|| Error::NotInSpectrum(format!("{lambda} is not an eigenvalue of ad(A)")))?;
        let c = &self.decomposition.clusters[i];
        range_space(self.dim, &c.projection, c.multiplicity, cfg)
    }
}

/// Orthonormal basis of the leading `rank` left singular vectors of `p`,
/// unvectorized into `n x n` matrices.
fn range_space(n: usize, p: &ComplexMatrix, rank: usize, cfg: &ToleranceConfig) -> Result<MatrixSpace> {
    let pairs = crate::jacobi::left_singular_pairs(p.as_dmatrix());
    let top = pairs.first().map(|x| x.0).unwrap_or(0.0);
    let mut space = MatrixSpace::zero(n);
    for (sigma, u) in pairs.iter().take(rank) {
        if *sigma <= cfg.rank_tol * top {
            break;
        }
        space.push(&ComplexMatrix::unvectorize(u)?, cfg.rank_tol)?;
    }
    Ok(space)
}

/// Riesz projection of `ad(A)` at the cluster containing `lambda`.
pub fn ad_riesz(a: &ComplexMatrix, lambda: C64, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    AdSpectrum::new(a, cfg)?.projector(lambda).cloned()
}

/// `Σ (P_β^T ⊗ P_α)` over cluster pairs with `α - β` within the matching
/// radius of `lambda`; the matrix of `B -> Σ P_α B P_β`.
pub fn adproj_formula(a: &ComplexMatrix, lambda: C64, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    adproj_from_decomposition(&riesz_decomposition(a, cfg)?, lambda)
}

pub fn adproj_from_decomposition(dec: &SpectralDecomposition, lambda: C64) -> Result<ComplexMatrix> {
    let n = dec.matrix_dim;
    let mut acc = DMatrix::<C64>::zeros(n * n, n * n);
    let mut matched = false;
    for alpha in &dec.clusters {
        for beta in &dec.clusters {
            if (alpha.lambda - beta.lambda - lambda).norm() <= dec.radius {
                acc += beta.projection.as_dmatrix().transpose().kronecker(alpha.projection.as_dmatrix());
                matched = true;
            }
        }
    }
    if !matched {
        return Err(Error::NotInSpectrum(format!(
            "{lambda} is not a difference of eigenvalues"
        )));
    }
    Ok(ComplexMatrix::wrap(acc))
}

/// The generalized eigenspace of `ad(A)` at `lambda`, as a space of matrices.
pub fn spectral_manifold(a: &ComplexMatrix, lambda: C64, cfg: &ToleranceConfig) -> Result<MatrixSpace> {
    AdSpectrum::new(a, cfg)?.manifold(lambda, cfg)
}
