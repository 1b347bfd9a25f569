//! One-sided (Hestenes) Jacobi SVD for complex matrices.
//!
//! Used wherever singular *vectors* drive a rank decision. Columns are
//! rotated pairwise until mutually orthogonal; the column norms are then the
//! singular values and the normalized columns the left singular vectors.
//! Jacobi is slower than bidiagonalization but computes small singular
//! values and their vectors to high relative accuracy.

use nalgebra::{DMatrix, DVector};

use crate::matrix::C64;

const MAX_SWEEPS: usize = 60;

pub(crate) struct JacobiSvd {
    /// Descending.
    pub sigma: Vec<f64>,
    /// Left singular vectors, one per entry of `sigma`; zero for `sigma = 0`.
    pub u: Vec<DVector<C64>>,
    /// Right singular vectors, one per entry of `sigma`. For wide inputs
    /// the left vectors of small singular values may be zero.
    pub v: Vec<DVector<C64>>,
}

pub(crate) fn svd(m: &DMatrix<C64>) -> JacobiSvd {
    if m.ncols() > m.nrows() {
        let t = svd_tall(&m.adjoint());
        return JacobiSvd {
            sigma: t.sigma,
            u: t.v,
            v: t.u,
        };
    }
    svd_tall(m)
}

fn svd_tall(m: &DMatrix<C64>) -> JacobiSvd {
    let (rows, cols) = m.shape();
    let negligible = (f64::EPSILON * m.norm()).powi(2);
    let mut a = m.clone();
    let mut v = DMatrix::<C64>::identity(cols, cols);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(usize, f64)> = (0..cols).map(|j| (j, a.column(j).norm())).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut out = JacobiSvd {
        sigma: Vec::with_capacity(cols),
        u: Vec::with_capacity(cols),
        v: Vec::with_capacity(cols),
    };
    for (j, s) in order {
        out.sigma.push(s);
        out.u.push(if s > 0.0 {
            a.column(j) / C64::new(s, 0.0)
        } else {
            DVector::zeros(rows)
        });
        out.v.push(v.column(j).into_owned());
    }
    out
}

/// Columns `p`, `q` of `x` become `c x_p - s e* x_q` and
/// `(s x_p + c e* x_q) e`, with `e` the phase of `x_p* x_q`.
fn rotate(x: &mut DMatrix<C64>, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let pc = phase.conj();
    for i in 0..x.nrows() {
        let xp = x[(i, p)];
        let xq = x[(i, q)] * pc;
        x[(i, p)] = xp * c - xq * s;
        x[(i, q)] = (xp * s + xq * c) * phase;
    }
}

/// `(sigma, u)` pairs in descending order of `sigma`.
pub(crate) fn left_singular_pairs(m: &DMatrix<C64>) -> Vec<(f64, DVector<C64>)> {
    let r = svd(m);
    r.sigma.into_iter().zip(r.u).collect()
}

/// Right singular vector of the smallest singular value of a square matrix.
pub(crate) fn smallest_right_singular(m: &DMatrix<C64>) -> (f64, DVector<C64>) {
    let r = svd(m);
    let k = r.sigma.len() - 1;
    (r.sigma[k], r.v[k].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random(r: usize, c: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        DMatrix::from_fn(r, c, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn reconstructs_and_matches_singular_values() {
        for (r, c) in [(5, 5), (7, 3), (3, 7), (7, 2)] {
            let m = random(r, c, (r * 10 + c) as u64);
            let s = svd(&m);
            let mut recon = DMatrix::<C64>::zeros(r, c);
            for k in 0..s.sigma.len() {
                recon += &s.u[k] * C64::new(s.sigma[k], 0.0) * s.v[k].adjoint();
            }
            assert!((recon - &m).norm() < 1e-13);
            let mut reference: Vec<f64> = m.clone().svd(false, false).singular_values.iter().cloned().collect();
            reference.sort_by(|a, b| b.total_cmp(a));
            for (x, y) in s.sigma.iter().zip(reference) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rank_one_pair_has_correct_leading_vector() {
        let col = random(7, 1, 3);
        let m = DMatrix::from_columns(&[col.column(0).into_owned(), col.column(0) * C64::new(-0.38, 0.02)]);
        let pairs = left_singular_pairs(&m);
        assert!(pairs[1].0 < 1e-14);
        assert!(((pairs[0].1.adjoint() * &m).norm() - pairs[0].0).abs() < 1e-14);
    }
}
