//! Subspaces of `C^n` and linear spans of matrices.
//!
//! Both types keep an orthonormal basis built by classical Gram-Schmidt with
//! a second re-orthogonalization pass. A candidate is dropped when its
//! residual after deflation is below `rank_tol` times a reference scale
//! (the largest input norm, or the operator norm for images). Surviving
//! generators keep their insertion order. Matrix spans additionally track a
//! first-order error for every basis element and refuse candidates whose
//! remainder is within reach of that noise.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ToleranceConfig, C64};

fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthogonalize `v` against `basis` (two passes) and append it normalized
/// if the remainder exceeds `threshold`; returns the remainder's norm.
fn gram_schmidt_push(basis: &mut Vec<Vec<C64>>, mut v: Vec<C64>, threshold: f64) -> Option<f64> {
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dotc(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let r = norm(&v);
    if r <= threshold || r == 0.0 {
        return None;
    }
    for x in v.iter_mut() {
        *x /= r;
    }
    basis.push(v);
    Some(r)
}

/// Two passes of modified Gram-Schmidt against an orthonormal `basis`.
fn project_out(basis: &[Vec<C64>], w: &mut [C64]) {
    for _ in 0..2 {
        for b in basis {
            let c = dotc(b, w);
            for (x, y) in w.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
}

fn residual_after_projection(basis: &[Vec<C64>], v: &[C64]) -> f64 {
    let mut w = v.to_vec();
    project_out(basis, &mut w);
    norm(&w)
}

/// A subspace of `C^n` with an orthonormal column basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<C64>>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut v = vec![C64::new(0.0, 0.0); ambient_dim];
                v[i] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        Subspace { ambient_dim, basis }
    }

    /// Span of the first `k` standard basis vectors.
    pub fn standard(ambient_dim: usize, k: usize) -> Self {
        let mut s = Self::full(ambient_dim);
        s.basis.truncate(k);
        s
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient_dim
    }

    pub fn basis_vectors(&self) -> Vec<DVector<C64>> {
        self.basis.iter().map(|b| DVector::from_column_slice(b)).collect()
    }

    /// `n x k` matrix whose columns are the orthonormal basis.
    pub fn basis_matrix(&self) -> DMatrix<C64> {
        let n = self.ambient_dim;
        DMatrix::from_fn(n, self.dim(), |i, j| self.basis[j][i])
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &DVector<C64>) -> f64 {
        residual_after_projection(&self.basis, v.as_slice())
    }

    fn check_ambient(&self, n: usize) -> Result<()> {
        if self.ambient_dim != n {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: n,
            });
        }
        Ok(())
    }

    /// Largest `||(I - P) A v|| / (1 + ||A||)` over basis vectors `v`.
    pub fn invariance_residual(&self, a: &ComplexMatrix) -> Result<f64> {
        self.check_ambient(a.dim())?;
        let scale = 1.0 + a.op_norm();
        let mut worst = 0.0f64;
        for b in &self.basis {
            let img = a.as_dmatrix() * DVector::from_column_slice(b);
            worst = worst.max(residual_after_projection(&self.basis, img.as_slice()));
        }
        Ok(worst / scale)
    }

    pub fn is_invariant(&self, a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<bool> {
        Ok(self.invariance_residual(a)? <= cfg.residual_tol)
    }

    /// Orthonormal basis of the orthogonal complement of `inner` inside
    /// `self`, chosen by pivoted deflation of the standard basis vectors
    /// (largest residual first, lowest index on ties).
    pub fn complement_basis(&self, inner: &Subspace) -> Result<Vec<DVector<C64>>> {
        self.check_ambient(inner.ambient_dim)?;
        let n = self.ambient_dim;
        let want = self.dim().saturating_sub(inner.dim());
        // projections of e_i onto self, then deflated against inner
        let mut cands: Vec<Vec<C64>> = (0..n)
            .map(|i| {
                let mut v: Vec<C64> = self.basis.iter().map(|b| b[i].conj()).collect::<Vec<_>>();
                // v holds coefficients <b, e_i>; rebuild P e_i
                let mut p = vec![C64::new(0.0, 0.0); n];
                for (c, b) in v.drain(..).zip(&self.basis) {
                    for (x, y) in p.iter_mut().zip(b) {
                        *x += c * y;
                    }
                }
                p
            })
            .collect();
        let mut acc: Vec<Vec<C64>> = inner.basis.clone();
        let mut out = Vec::with_capacity(want);
        for _ in 0..want {
            for c in cands.iter_mut() {
                for _ in 0..2 {
                    for b in &acc {
                        let coef = dotc(b, c);
                        for (x, y) in c.iter_mut().zip(b) {
                            *x -= coef * y;
                        }
                    }
                }
            }
            let (best, r) = cands
                .iter()
                .enumerate()
                .map(|(i, c)| (i, norm(c)))
                .fold((0usize, -1.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
            if r <= 0.0 {
                return Err(Error::NotContained(
                    "inner subspace is not contained in the outer one".into(),
                ));
            }
            let v: Vec<C64> = cands[best].iter().map(|z| z / r).collect();
            out.push(DVector::from_column_slice(&v));
            acc.push(v);
        }
        Ok(out)
    }
}

/// Orthonormal basis of the span of `vectors` in `C^ambient_dim`.
pub fn span(ambient_dim: usize, vectors: &[DVector<C64>], cfg: &ToleranceConfig) -> Result<Subspace> {
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    span_with_scale(ambient_dim, vectors, cfg.rank_tol * scale)
}

pub(crate) fn span_with_scale(ambient_dim: usize, vectors: &[DVector<C64>], threshold: f64) -> Result<Subspace> {
    if ambient_dim == 0 {
        return Err(Error::InvalidParameter("ambient dimension must be positive".into()));
    }
    let mut basis = Vec::new();
    for v in vectors {
        if v.len() != ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                found: v.len(),
            });
        }
        if basis.len() == ambient_dim {
            break;
        }
        gram_schmidt_push(&mut basis, v.as_slice().to_vec(), threshold);
    }
    Ok(Subspace { ambient_dim, basis })
}

/// Span by SVD of the stacked vectors: left singular vectors whose singular
/// value exceeds `threshold`. Stable for many nearly dependent inputs, where
/// sequential Gram-Schmidt would amplify roundoff in weak directions.
pub(crate) fn span_svd(ambient_dim: usize, vectors: &[DVector<C64>], threshold: f64) -> Result<Subspace> {
    if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
        return Err(Error::DimensionMismatch {
            expected: ambient_dim,
            found: v.len(),
        });
    }
    if vectors.is_empty() {
        return Ok(Subspace::zero(ambient_dim));
    }
    let m = DMatrix::from_columns(vectors);
    let mut basis = Vec::new();
    for (sigma, u) in crate::jacobi::left_singular_pairs(&m) {
        if !(sigma > threshold) || basis.len() == ambient_dim {
            break;
        }
        gram_schmidt_push(&mut basis, u.iter().cloned().collect(), 0.5);
    }
    Ok(Subspace { ambient_dim, basis })
}

pub fn subspace_sum(u: &Subspace, v: &Subspace, cfg: &ToleranceConfig) -> Result<Subspace> {
    u.check_ambient(v.ambient_dim)?;
    let mut vecs = u.basis_vectors();
    vecs.extend(v.basis_vectors());
    span_with_scale(u.ambient_dim, &vecs, cfg.rank_tol)
}

/// `V ⊆ U`: every basis vector of `V` lies within `rank_tol` of `U`.
pub fn subspace_contains(u: &Subspace, v: &Subspace, cfg: &ToleranceConfig) -> Result<bool> {
    u.check_ambient(v.ambient_dim)?;
    Ok(v
        .basis
        .iter()
        .all(|b| residual_after_projection(&u.basis, b) <= cfg.rank_tol))
}

/// `A V`, with rank decisions relative to `||A||`.
pub fn subspace_image(a: &ComplexMatrix, v: &Subspace, cfg: &ToleranceConfig) -> Result<Subspace> {
    v.check_ambient(a.dim())?;
    let imgs: Vec<DVector<C64>> = v
        .basis
        .iter()
        .map(|b| a.as_dmatrix() * DVector::from_column_slice(b))
        .collect();
    span_svd(v.ambient_dim, &imgs, cfg.rank_tol * a.op_norm())
}

/// Matrix of the induced map `x + V -> Ax + V` on `U / V`, written in an
/// orthonormal basis of the orthogonal complement of `V` inside `U`.
pub fn quotient_action(a: &ComplexMatrix, u: &Subspace, v: &Subspace, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    u.check_ambient(a.dim())?;
    v.check_ambient(a.dim())?;
    if !subspace_contains(u, v, cfg)? {
        return Err(Error::NotContained("V is not a subspace of U".into()));
    }
    for s in [u, v] {
        let r = s.invariance_residual(a)?;
        if r > cfg.residual_tol {
            return Err(Error::InvarianceViolation {
                residual: r,
                threshold: cfg.residual_tol,
            });
        }
    }
    if u.dim() <= v.dim() {
        return Err(Error::InvalidParameter("quotient U/V is zero-dimensional".into()));
    }
    let w = u.complement_basis(v)?;
    let k = w.len();
    let wm = DMatrix::from_fn(a.dim(), k, |i, j| w[j][i]);
    ComplexMatrix::from_dmatrix(wm.adjoint() * a.as_dmatrix() * &wm)
}

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    ambient_dim: usize,
    basis: Vec<Vec<[f64; 2]>>,
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceRepr {
            ambient_dim: self.ambient_dim,
            basis: self
                .basis
                .iter()
                .map(|b| b.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SubspaceRepr::deserialize(deserializer)?;
        let vecs: Vec<DVector<C64>> = repr
            .basis
            .iter()
            .map(|b| DVector::from_iterator(b.len(), b.iter().map(|&[re, im]| C64::new(re, im))))
            .collect();
        // re-orthonormalize; a well-formed file passes through unchanged up to roundoff
        let s = span_with_scale(repr.ambient_dim, &vecs, 1e-12).map_err(D::Error::custom)?;
        if s.dim() != vecs.len() {
            return Err(D::Error::custom("basis vectors are linearly dependent"));
        }
        Ok(s)
    }
}

/// A linear span of `n x n` matrices with a basis that is orthonormal for
/// the Frobenius inner product `<A, B> = tr(B* A)`.
///
/// Each basis element carries a first-order perturbation ("shadow"): the
/// change it would undergo if its inputs moved by their rounding errors,
/// with directions drawn from a fixed-seed generator. Products and
/// projections transport the shadows linearly, so their norms estimate
/// the actual forward errors rather than bounding them.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSpace {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    flat: Vec<Vec<C64>>,
    shadows: Vec<ComplexMatrix>,
    errors: Vec<f64>,
}

/// A matrix offered to a [`MatrixSpace`], with its first-order
/// perturbation and the size of the rounding committed while forming it.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub m: ComplexMatrix,
    pub shadow: ComplexMatrix,
    pub roundoff: f64,
}

impl Candidate {
    pub fn exact(m: ComplexMatrix) -> Self {
        let shadow = ComplexMatrix::zeros(m.dim());
        Candidate { m, shadow, roundoff: 0.0 }
    }
}

/// A remainder must exceed its estimated noise by this factor to count as
/// a new direction.
const NOISE_MARGIN: f64 = 100.0;
const SHADOW_SEED: u64 = 0x5ad0_u64;

/// Frobenius-unit pseudo-random direction, reproducible from `key`.
fn unit_noise(len: usize, key: u64) -> Vec<C64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SHADOW_SEED ^ key.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut v: Vec<C64> = (0..len)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let r = norm(&v);
    v.iter_mut().for_each(|x| *x /= r);
    v
}

/// Rounding perturbation of an input matrix, reproducible from `key`.
pub(crate) fn input_shadow(m: &ComplexMatrix, key: u64) -> ComplexMatrix {
    let n = m.dim();
    let scale = n as f64 * f64::EPSILON * m.frobenius_norm();
    let v: Vec<C64> = unit_noise(n * n, key).into_iter().map(|x| x * scale).collect();
    ComplexMatrix::wrap(DMatrix::from_column_slice(n, n, &v))
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (p, q) in y.iter_mut().zip(x) {
        *p -= a * q;
    }
}

impl MatrixSpace {
    pub fn zero(ambient_dim: usize) -> Self {
        MatrixSpace {
            ambient_dim,
            basis: Vec::new(),
            flat: Vec::new(),
            shadows: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Estimated forward errors (Frobenius) of the basis elements.
    pub fn error_estimates(&self) -> &[f64] {
        &self.errors
    }

    pub(crate) fn shadows(&self) -> &[ComplexMatrix] {
        &self.shadows
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    fn check(&self, m: &ComplexMatrix) -> Result<()> {
        if m.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: m.dim(),
            });
        }
        Ok(())
    }

    /// Add `m` if its residual against the current basis exceeds `threshold`.
    pub(crate) fn push(&mut self, m: &ComplexMatrix, threshold: f64) -> Result<bool> {
        Ok(!self.absorb_pivoted(&[Candidate::exact(m.clone())], threshold)?.is_empty())
    }

    /// Insert a batch of candidates by column-pivoted Gram-Schmidt: the
    /// candidate with the largest remainder goes first and the rest are
    /// deflated against it. A remainder must exceed `threshold` and also
    /// its shadow's component off the span by [`NOISE_MARGIN`].
    /// Returns the indices of the new basis elements.
    pub(crate) fn absorb_pivoted(&mut self, cands: &[Candidate], threshold: f64) -> Result<Vec<usize>> {
        for c in cands {
            self.check(&c.m)?;
        }
        let n = self.ambient_dim;
        let full = n * n;
        let start = self.basis.len() as u64;
        let mut rest: Vec<(Vec<C64>, Vec<C64>)> =
            cands.iter().enumerate().map(|(idx, c)| self.deflate(c, (start << 32) ^ idx as u64)).collect();
        let mut added = Vec::new();
        while self.basis.len() < full {
            let pick = rest
                .iter()
                .enumerate()
                .map(|(i, (v, dv))| (i, norm(v), norm(dv)))
                .filter(|&(_, r, noise)| r > threshold && r > NOISE_MARGIN * noise)
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            let Some((i, _, _)) = pick else { break };
            let (mut v, mut dv) = rest.swap_remove(i);
            project_out(&self.flat, &mut v);
            let r = norm(&v);
            if !(r > threshold) {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= r);
            // the shadow's component along the new element is a rescaling
            let along = dotc(&v, &dv);
            axpy(&mut dv, along, &v);
            dv.iter_mut().for_each(|x| *x /= r);
            for (w, dw) in rest.iter_mut() {
                let c = dotc(&v, w);
                axpy(w, c, &v);
                axpy(dw, c, &dv);
                let along = dotc(&v, dw);
                axpy(dw, along, &v);
            }
            self.errors.push(norm(&dv));
            self.basis.push(ComplexMatrix::wrap(DMatrix::from_column_slice(n, n, &v)));
            self.shadows.push(ComplexMatrix::wrap(DMatrix::from_column_slice(n, n, &dv)));
            self.flat.push(v);
            added.push(self.basis.len() - 1);
        }
        Ok(added)
    }

    /// Remainder of `c` off the span and the matching part of its shadow,
    /// with the rounding of forming and projecting it folded into the
    /// shadow along a direction reproducible from `key`.
    fn deflate(&self, c: &Candidate, key: u64) -> (Vec<C64>, Vec<C64>) {
        let n = self.ambient_dim;
        let mut v = c.m.as_dmatrix().as_slice().to_vec();
        let mut dv = c.shadow.as_dmatrix().as_slice().to_vec();
        let projection_roundoff = 4.0 * (self.basis.len() + n) as f64 * f64::EPSILON;
        let rounding = c.roundoff + projection_roundoff * c.m.frobenius_norm();
        if rounding > 0.0 {
            axpy(&mut dv, C64::new(-rounding, 0.0), &unit_noise(n * n, key));
        }
        for _ in 0..2 {
            for (b, db) in self.flat.iter().zip(&self.shadows) {
                let coef = dotc(b, &v);
                axpy(&mut v, coef, b);
                axpy(&mut dv, coef, db.as_dmatrix().as_slice());
            }
        }
        project_out(&self.flat, &mut dv);
        (v, dv)
    }

    /// How far `c` sits off the span beyond what its estimated noise
    /// explains: `max(0, residual - NOISE_MARGIN * noise)`.
    pub(crate) fn excess_residual(&self, c: &Candidate) -> Result<f64> {
        self.check(&c.m)?;
        let (v, dv) = self.deflate(c, u64::MAX);
        Ok((norm(&v) - NOISE_MARGIN * norm(&dv)).max(0.0))
    }

    /// First-order perturbation of `m` read as an element of the span:
    /// the basis shadows weighted by its coordinates.
    pub(crate) fn shadow_of(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let v = m.as_dmatrix().as_slice();
        let mut acc = DMatrix::<C64>::zeros(self.ambient_dim, self.ambient_dim);
        for (b, db) in self.flat.iter().zip(&self.shadows) {
            acc += db.as_dmatrix() * dotc(b, v);
        }
        ComplexMatrix::wrap(acc)
    }

    /// Frobenius distance from `m` to the span.
    pub fn residual(&self, m: &ComplexMatrix) -> Result<f64> {
        self.check(m)?;
        Ok(residual_after_projection(&self.flat, m.as_dmatrix().as_slice()))
    }

    /// Orthogonal projection of `m` onto the span.
    pub fn project(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(m)?;
        let mut acc = DMatrix::<C64>::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            acc += b.as_dmatrix() * m.inner(b);
        }
        Ok(ComplexMatrix::wrap(acc))
    }

    /// Coordinates of `m` in the orthonormal basis.
    pub fn coordinates(&self, m: &ComplexMatrix) -> Result<Vec<C64>> {
        self.check(m)?;
        Ok(self.basis.iter().map(|b| m.inner(b)).collect())
    }

    /// Linear combination of the basis with the given coefficients.
    pub fn combine(&self, coeffs: &[C64]) -> ComplexMatrix {
        let mut acc = DMatrix::<C64>::zeros(self.ambient_dim, self.ambient_dim);
        for (b, c) in self.basis.iter().zip(coeffs) {
            acc += b.as_dmatrix() * *c;
        }
        ComplexMatrix::wrap(acc)
    }
}

/// Frobenius-orthonormal basis of the span of `mats`, each treated as an
/// input known up to rounding.
pub fn matspan(ambient_dim: usize, mats: &[ComplexMatrix], cfg: &ToleranceConfig) -> Result<MatrixSpace> {
    if ambient_dim == 0 {
        return Err(Error::InvalidParameter("ambient dimension must be positive".into()));
    }
    let scale = mats.iter().map(|m| m.frobenius_norm()).fold(0.0, f64::max);
    let mut s = MatrixSpace::zero(ambient_dim);
    for (k, m) in mats.iter().enumerate() {
        s.check(m)?;
        let cand = Candidate {
            m: m.clone(),
            shadow: input_shadow(m, k as u64),
            roundoff: 0.0,
        };
        s.absorb_pivoted(&[cand], cfg.rank_tol * scale)?;
    }
    Ok(s)
}

/// Membership: projection residual below `residual_tol * (1 + ||M||_F)`.
pub fn matspace_member(m: &ComplexMatrix, s: &MatrixSpace, cfg: &ToleranceConfig) -> Result<bool> {
    Ok(s.residual(m)? <= cfg.residual_tol * (1.0 + m.frobenius_norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::anticommutator;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn ev(n: usize, i: usize) -> DVector<C64> {
        let mut v = DVector::zeros(n);
        v[i] = c(1.0);
        v
    }

    fn e(n: usize, i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(n, i - 1, j - 1)
    }

    #[test]
    fn span_examples() {
        let cfg = ToleranceConfig::default();
        let s = span(3, &[ev(3, 0), ev(3, 0), ev(3, 0) + ev(3, 1)], &cfg).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(span(3, &[], &cfg).unwrap().dim(), 0);
        assert!(span(0, &[], &cfg).is_err());
        let v = DVector::from_vec(vec![c(1.0), c(2.0), c(-1.0)]);
        let w = DVector::from_vec(vec![c(0.0), c(1.0), c(3.0)]);
        let nearly = &v + &w * c(1e-15);
        assert_eq!(span(3, &[v, nearly], &cfg).unwrap().dim(), 1);
    }

    #[test]
    fn span_rejects_mixed_lengths() {
        let cfg = ToleranceConfig::default();
        assert!(matches!(span(3, &[ev(2, 0)], &cfg), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn image_contains_and_sum() {
        let cfg = ToleranceConfig::default();
        let img = subspace_image(&e(2, 1, 2), &Subspace::standard(2, 2).clone(), &cfg).unwrap();
        assert_eq!(img.dim(), 1);
        let e2 = span(2, &[ev(2, 1)], &cfg).unwrap();
        let img2 = subspace_image(&e(2, 1, 2), &e2, &cfg).unwrap();
        assert!(subspace_contains(&img2, &Subspace::standard(2, 1), &cfg).unwrap());
        assert!(subspace_contains(&Subspace::full(4), &span(4, &[ev(4, 3) + ev(4, 1)], &cfg).unwrap(), &cfg).unwrap());
        let sum = subspace_sum(&Subspace::standard(3, 1), &e2_in(3), &cfg).unwrap();
        assert_eq!(sum.dim(), 2);
    }

    fn e2_in(n: usize) -> Subspace {
        span(n, &[ev(n, 1)], &ToleranceConfig::default()).unwrap()
    }

    #[test]
    fn strictly_upper_preserves_standard_flag() {
        let cfg = ToleranceConfig::default();
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 2.0, 3.0], &[0.0, 0.0, 4.0, 5.0], &[0.0, 0.0, 0.0, 6.0], &[0.0; 4]]).unwrap();
        for k in 0..=4 {
            let v = Subspace::standard(4, k);
            let img = subspace_image(&a, &v, &cfg).unwrap();
            assert!(subspace_contains(&v, &img, &cfg).unwrap());
            assert!(v.is_invariant(&a, &cfg).unwrap());
        }
    }

    #[test]
    fn matspan_and_membership() {
        let cfg = ToleranceConfig::default();
        let e12 = e(3, 1, 2);
        assert_eq!(matspan(3, &[e12.clone(), e12.scale(c(2.0))], &cfg).unwrap().dim(), 1);
        let s = matspan(3, &[e12.clone(), e(3, 2, 3)], &cfg).unwrap();
        assert!(!matspace_member(&e(3, 1, 3), &s, &cfg).unwrap());
        let s3 = matspan(3, &[e12.clone(), e(3, 2, 3), e(3, 1, 3)], &cfg).unwrap();
        let ac = anticommutator(&e12, &e(3, 2, 3)).unwrap();
        assert!(matspace_member(&ac, &s3, &cfg).unwrap());
        assert!(matspace_member(&e(2, 1, 1), &MatrixSpace::zero(3), &cfg).is_err());
    }

    #[test]
    fn quotient_examples() {
        let cfg = ToleranceConfig::default();
        let q = quotient_action(&e(2, 1, 2), &Subspace::full(2), &Subspace::standard(2, 1), &cfg).unwrap();
        assert_eq!(q.dim(), 1);
        assert!(q.max_abs() < 1e-15);

        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 2.0], &[0.0, 0.0, 3.0], &[0.0; 3]]).unwrap();
        let q = quotient_action(&a, &Subspace::full(3), &Subspace::standard(3, 1), &cfg).unwrap();
        let expect = ComplexMatrix::from_real_rows(&[&[0.0, 3.0], &[0.0, 0.0]]).unwrap();
        assert!(q.approx_eq(&expect, 1e-14));

        let u = Subspace::standard(3, 3);
        let v = Subspace::standard(3, 1);
        let id = quotient_action(&ComplexMatrix::identity(3), &u, &v, &cfg).unwrap();
        assert!(id.approx_eq(&ComplexMatrix::identity(2), 1e-14));
    }

    #[test]
    fn quotient_rejects_non_invariant() {
        let cfg = ToleranceConfig::default();
        let r = quotient_action(&e(2, 2, 1), &Subspace::full(2), &Subspace::standard(2, 1), &cfg);
        assert!(matches!(r, Err(Error::InvarianceViolation { .. })));
        let r = quotient_action(&e(2, 1, 2), &Subspace::standard(2, 1), &Subspace::full(2), &cfg);
        assert!(matches!(r, Err(Error::NotContained(_))));
    }

    #[test]
    fn complement_prefers_low_index() {
        let full = Subspace::full(3);
        let comp = full.complement_basis(&Subspace::standard(3, 1)).unwrap();
        assert_eq!(comp.len(), 2);
        assert!((&comp[0] - ev(3, 1)).norm() < 1e-15);
        assert!((&comp[1] - ev(3, 2)).norm() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let cfg = ToleranceConfig::default();
        let s = span(3, &[ev(3, 0) + ev(3, 2)], &cfg).unwrap();
        let txt = serde_json::to_string(&s).unwrap();
        assert!(txt.starts_with("{\"ambient_dim\":3,\"basis\":[["));
        let back: Subspace = serde_json::from_str(&txt).unwrap();
        assert_eq!(back.dim(), 1);
        assert!(subspace_contains(&back, &s, &cfg).unwrap());
    }
}
