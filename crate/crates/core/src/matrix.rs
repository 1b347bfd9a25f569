//! Dense square complex matrices and the scalar quantities built on them.
//!
//! [`ComplexMatrix`] wraps an `nalgebra::DMatrix<Complex<f64>>` and enforces
//! the two invariants everything downstream relies on: the matrix is square
//! with `dim >= 1`, and every entry is finite. Equality after arithmetic is
//! never exact; comparisons go through [`ComplexMatrix::approx_eq`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::schur;

pub type C64 = num_complex::Complex<f64>;

/// Numerical tolerances shared by every module.
///
/// * `rank_tol`: relative singular-value / residual cutoff for rank decisions.
/// * `cluster_tol`: eigenvalue grouping radius, multiplied by `1 + ||A||`.
/// * `residual_tol`: pass threshold for identity and invariance checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub rank_tol: f64,
    pub cluster_tol: f64,
    pub residual_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            rank_tol: 1e-10,
            cluster_tol: 1e-8,
            residual_tol: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("cluster_tol", self.cluster_tol),
            ("residual_tol", self.residual_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// A dense `dim x dim` complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    /// Wrap an `nalgebra` matrix, checking squareness and finiteness.
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(ComplexMatrix(m))
    }

    /// Internal constructor for results of arithmetic on valid matrices.
    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows() > 0);
        ComplexMatrix(m)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| {
            rows.get(i).map(|r| r[j]).unwrap_or_default()
        }))
    }

    /// Convenience constructor from real row data.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        ComplexMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    /// Matrix unit with a single 1 at zero-based position `(i, j)`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.0[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    pub fn diag(values: &[C64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidMatrix("empty diagonal".into()));
        }
        Self::from_dmatrix(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix(&self.0 * s)
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Induced 2-norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        singular_values(self).first().copied().unwrap_or(0.0)
    }

    /// Frobenius inner product `tr(other* self)`.
    pub fn inner(&self, other: &ComplexMatrix) -> C64 {
        other.0.dotc(&self.0)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            acc = &acc * &self.0;
        }
        ComplexMatrix(acc)
    }

    /// Entrywise comparison: `max |a_ij - b_ij| <= tol`.
    pub fn approx_eq(&self, other: &ComplexMatrix, tol: f64) -> bool {
        self.dim() == other.dim() && self.max_abs_diff(other) <= tol
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Column-stacking vectorization.
    pub fn vectorize(&self) -> DVector<C64> {
        DVector::from_column_slice(self.0.as_slice())
    }

    /// Inverse of [`ComplexMatrix::vectorize`].
    pub fn unvectorize(v: &DVector<C64>) -> Result<Self> {
        let n = (v.len() as f64).sqrt().round() as usize;
        if n * n != v.len() {
            return Err(Error::InvalidParameter(format!(
                "vector of length {} is not a vectorized square matrix",
                v.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_column_slice(n, n, v.as_slice()))
    }

    /// Largest `|a_ij|` with `i >= j` (the diagonal and everything below it).
    pub fn lower_mass(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in j..n {
                m = m.max(self.0[(i, j)].norm());
            }
        }
        m
    }
}

pub(crate) fn check_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a> $tr<&'a ComplexMatrix> for &'a ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// `{A, B} = AB + BA`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_dim(a, b)?;
    Ok(jordan_product(a, b))
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_dim(a, b)?;
    Ok(lie_product(a, b))
}

pub(crate) fn jordan_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(&a.0 * &b.0 + &b.0 * &a.0)
}

pub(crate) fn lie_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(&a.0 * &b.0 - &b.0 * &a.0)
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.0.trace()
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.0.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Schatten p-norm: the l_p norm of the singular values.
///
/// `p = f64::INFINITY` gives the operator norm, `p = 1` the trace norm.
pub fn schatten_norm(a: &ComplexMatrix, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidSchattenIndex(p));
    }
    let s = singular_values(a);
    Ok(schatten_from_singular_values(&s, p))
}

pub(crate) fn schatten_from_singular_values(s: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return s.iter().copied().fold(0.0, f64::max);
    }
    if p == 1.0 {
        return s.iter().sum();
    }
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    // scaled to avoid overflow for large p
    top * s.iter().map(|x| (x / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// All eigenvalues with algebraic multiplicity, read off a complex Schur form.
pub fn spectrum(a: &ComplexMatrix) -> Result<Vec<C64>> {
    schur::eigenvalues(a.as_dmatrix())
}

/// `||(A / (1 + ||A||))^dim||_2`, the power-decay statistic used by
/// [`is_nilpotent`]. Zero for an exactly nilpotent matrix in exact arithmetic.
pub fn nilpotency_residual(a: &ComplexMatrix) -> f64 {
    let b = a.scale(C64::new(1.0 / (1.0 + a.op_norm()), 0.0));
    b.pow(a.dim() as u32).op_norm()
}

/// Decide nilpotency by two independent tests that must agree.
///
/// The power test requires `||(A / (1 + ||A||))^n|| <= residual_tol`. The
/// spectral test requires the eigenvalue centroid (first-order accurate even
/// for defective spectra) to lie within `cluster_tol * (1 + ||A||)` of zero,
/// and every eigenvalue to lie within `residual_tol^(1/n) * (1 + ||A||)`,
/// the ring a nilpotent perturbed at the power test's level can spread to.
/// A disagreement is reported as [`Error::AmbiguousNilpotency`].
pub fn is_nilpotent(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<bool> {
    let n = a.dim();
    let power = nilpotency_residual(a) <= cfg.residual_tol;
    let eig = spectrum(a)?;
    let scale = 1.0 + a.op_norm();
    let centroid = (eig.iter().sum::<C64>() / n as f64).norm();
    let ring = cfg.residual_tol.powf(1.0 / n as f64) * scale;
    let spectral = centroid <= cfg.cluster_tol * scale && eig.iter().all(|z| z.norm() <= ring);
    if spectral != power {
        return Err(Error::AmbiguousNilpotency { spectral, power });
    }
    Ok(power)
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| [self.0[(i, j)].re, self.0[(i, j)].im]).collect())
            .collect();
        MatrixRepr { dim: n, entries }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MatrixRepr::deserialize(deserializer)?;
        if repr.entries.len() != repr.dim || repr.entries.iter().any(|r| r.len() != repr.dim) {
            return Err(D::Error::custom(format!(
                "entries do not form a {0}x{0} array",
                repr.dim
            )));
        }
        let rows: Vec<Vec<C64>> = repr
            .entries
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}
