//! Complex Schur form with eigenvalue clustering and spectral projectors.
//!
//! Clustering runs in two passes. First, single linkage with radius
//! `r = cluster_tol * (1 + ||A||)`. Second, fine clusters whose spectral
//! projectors are so ill-conditioned that they cannot be told apart at
//! working precision are merged: two clusters `a`, `b` are joined when
//! their distance is below `MERGE_FACTOR * dim * eps * (1 + ||A||) *
//! (||P_a|| + ||P_b||)`. This is a first-order pseudospectral radius, and it
//! is what lets a perturbed Jordan block (whose computed eigenvalues spread
//! like `eps^(1/m)`) come back as a single cluster. Merges happen one pair
//! at a time, closest first, with projector norms recomputed in between:
//! fragments of a split block have huge projectors, their union does not.
//!
//! Projectors come from one block diagonalization `T X = X D` of the
//! reordered Schur form (`X` unit block upper triangular, blocks found by
//! Sylvester solves); no Jordan structure is ever formed.

use nalgebra::{DMatrix, DMatrixView};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::matrix::{ToleranceConfig, C64};

const SCHUR_MAX_ITER: usize = 100_000;
const MERGE_FACTOR: f64 = 10.0;

/// Complex Schur form `a = q t q*`.
///
/// The QR iteration can stall on exactly structured inputs (for example the
/// `ad` of a shift matrix), so on failure it is retried on a scalar shift of
/// `a` and then on a fixed unitary rotation of `a`; both leave the Schur
/// decomposition recoverable.
pub(crate) fn schur(a: &DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = a.nrows();
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenNoConvergence(n));
    }
    let (q, mut t) = schur_attempts(a).ok_or(Error::EigenNoConvergence(n))?;
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    if t.iter().chain(q.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenNoConvergence(n));
    }
    Ok((q, t))
}

fn try_schur(a: DMatrix<C64>) -> Option<(DMatrix<C64>, DMatrix<C64>)> {
    nalgebra::linalg::Schur::try_new(a, f64::EPSILON, SCHUR_MAX_ITER).map(|s| s.unpack())
}

fn schur_attempts(a: &DMatrix<C64>) -> Option<(DMatrix<C64>, DMatrix<C64>)> {
    if let Some(r) = try_schur(a.clone()) {
        return Some(r);
    }
    let n = a.nrows();
    let scale = 1.0 + a.norm();
    for shift in [C64::new(0.5, 0.25), C64::new(-0.375, 0.625)] {
        let s = shift * scale;
        let shifted = a + DMatrix::<C64>::identity(n, n) * s;
        if let Some((q, mut t)) = try_schur(shifted) {
            for i in 0..n {
                t[(i, i)] -= s;
            }
            return Some((q, t));
        }
    }
    // deterministic unitary from the QR factor of a fixed pseudo-random matrix
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
    let r = DMatrix::<C64>::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let u = r.qr().q();
    let (q, t) = try_schur(&u * a * u.adjoint())?;
    Some((u.adjoint() * q, t))
}

pub(crate) fn eigenvalues(a: &DMatrix<C64>) -> Result<Vec<C64>> {
    let (_, t) = schur(a)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Plane rotation `(c, s)` with `c*f + s*g = r` and `-conj(s)*f + c*g = 0`.
fn givens(f: C64, g: C64) -> (f64, C64) {
    let fa = f.norm();
    let ga = g.norm();
    if ga == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if fa == 0.0 {
        return (0.0, g.conj() / ga);
    }
    let d = fa.hypot(ga);
    (fa / d, (f / fa) * g.conj() / d)
}

/// Swap diagonal entries `k` and `k + 1` of the upper triangular `t`,
/// updating `q` so that `q t q*` is unchanged.
fn swap_adjacent(q: &mut DMatrix<C64>, t: &mut DMatrix<C64>, k: usize) {
    let n = t.nrows();
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let (c, s) = givens(t[(k, k + 1)], t22 - t11);
    for j in k + 2..n {
        let x = t[(k, j)];
        let y = t[(k + 1, j)];
        t[(k, j)] = x * c + s * y;
        t[(k + 1, j)] = y * c - s.conj() * x;
    }
    let sc = s.conj();
    for i in 0..k {
        let x = t[(i, k)];
        let y = t[(i, k + 1)];
        t[(i, k)] = x * c + sc * y;
        t[(i, k + 1)] = y * c - s * x;
    }
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
    for i in 0..n {
        let x = q[(i, k)];
        let y = q[(i, k + 1)];
        q[(i, k)] = x * c + sc * y;
        q[(i, k + 1)] = y * c - s * x;
    }
}

/// Stable-sort the diagonal of `t` by `keys` with adjacent swaps. Only
/// entries with different keys are ever exchanged.
fn reorder(q: &mut DMatrix<C64>, t: &mut DMatrix<C64>, keys: &mut [usize]) {
    let n = keys.len();
    for i in 1..n {
        let mut k = i;
        while k > 0 && keys[k - 1] > keys[k] {
            swap_adjacent(q, t, k - 1);
            keys.swap(k - 1, k);
            k -= 1;
        }
    }
}

/// Solve `A X - X B = C` for upper triangular `A` (p x p) and `B` (q x q)
/// with disjoint spectra.
fn solve_sylvester(a: DMatrixView<C64>, b: DMatrixView<C64>, c: &DMatrix<C64>) -> DMatrix<C64> {
    let p = a.nrows();
    let q = b.nrows();
    let mut x = DMatrix::<C64>::zeros(p, q);
    for l in 0..q {
        let mut rhs: Vec<C64> = (0..p).map(|r| c[(r, l)]).collect();
        for m in 0..l {
            let blm = b[(m, l)];
            if blm != C64::new(0.0, 0.0) {
                for (r, v) in rhs.iter_mut().enumerate() {
                    *v += x[(r, m)] * blm;
                }
            }
        }
        let shift = b[(l, l)];
        for r in (0..p).rev() {
            let mut acc = rhs[r];
            for s in r + 1..p {
                acc -= a[(r, s)] * x[(s, l)];
            }
            x[(r, l)] = acc / (a[(r, r)] - shift);
        }
    }
    x
}

#[derive(Debug, Clone)]
pub(crate) struct Cluster {
    /// Mean of the member eigenvalues (the trace of the diagonal block over its size).
    pub rep: C64,
    pub multiplicity: usize,
    /// Largest distance from a member eigenvalue to `rep`.
    pub spread: f64,
    start: usize,
}

/// Schur form reordered so that each eigenvalue cluster occupies a
/// contiguous diagonal block.
#[derive(Debug, Clone)]
pub(crate) struct ClusteredSchur {
    q: DMatrix<C64>,
    t: DMatrix<C64>,
    clusters: Vec<Cluster>,
    radius: f64,
    /// Unit block upper triangular `X` with `T X = X D`, `D` block diagonal.
    x: DMatrix<C64>,
    x_inv: DMatrix<C64>,
}

fn union_find_root(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn union(parent: &mut [usize], a: usize, b: usize) -> bool {
    let ra = union_find_root(parent, a);
    let rb = union_find_root(parent, b);
    if ra == rb {
        return false;
    }
    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
    parent[hi] = lo;
    true
}

/// Labels `0..k` from a union-find forest, ordered by the smallest member
/// eigenvalue in (re, im) lexicographic order of each component's mean.
fn labels_from_forest(parent: &mut [usize], eig: &[C64]) -> Vec<usize> {
    let n = eig.len();
    let roots: Vec<usize> = (0..n).map(|i| union_find_root(parent, i)).collect();
    let mut groups: Vec<(usize, C64, usize)> = Vec::new(); // (root, sum, count)
    for i in 0..n {
        match groups.iter_mut().find(|g| g.0 == roots[i]) {
            Some(g) => {
                g.1 += eig[i];
                g.2 += 1;
            }
            None => groups.push((roots[i], eig[i], 1)),
        }
    }
    let mut order: Vec<(usize, C64)> = groups
        .iter()
        .map(|&(root, sum, count)| (root, sum / count as f64))
        .collect();
    order.sort_by(|x, y| x.1.re.total_cmp(&y.1.re).then(x.1.im.total_cmp(&y.1.im)));
    roots
        .iter()
        .map(|r| order.iter().position(|o| o.0 == *r).unwrap())
        .collect()
}

impl ClusteredSchur {
    pub fn new(a: &DMatrix<C64>, cfg: &ToleranceConfig) -> Result<Self> {
        let n = a.nrows();
        let norm = a.clone().svd(false, false).singular_values.max();
        let scale = 1.0 + norm;
        let radius = cfg.cluster_tol * scale;
        let (mut q, mut t) = schur(a)?;

        // pass 1: single linkage at `radius`
        let eig: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
        let mut parent: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in i + 1..n {
                if (eig[i] - eig[j]).norm() <= radius {
                    union(&mut parent, i, j);
                }
            }
        }
        let mut labels = labels_from_forest(&mut parent, &eig);
        reorder(&mut q, &mut t, &mut labels);
        let mut cs = ClusteredSchur::from_sorted(q, t, &labels, radius);

        // pass 2: merge numerically inseparable clusters, closest pair first,
        // recomputing projector norms after every merge
        let unit = MERGE_FACTOR * n as f64 * f64::EPSILON * scale;
        while cs.clusters.len() > 1 {
            let k = cs.clusters.len();
            let norms: Vec<f64> = (0..k)
                .map(|c| {
                    let v = cs.projector_schur_basis(c).norm();
                    if v.is_finite() {
                        v
                    } else {
                        f64::INFINITY
                    }
                })
                .collect();
            let eig: Vec<C64> = (0..n).map(|i| cs.t[(i, i)]).collect();
            let mut best: Option<(usize, usize, f64)> = None;
            for a in 0..k {
                for b in a + 1..k {
                    let d = cs.cluster_distance(a, b, &eig);
                    if d <= unit * (norms[a] + norms[b]) && best.is_none_or(|x| d < x.2) {
                        best = Some((a, b, d));
                    }
                }
            }
            let Some((a, b, _)) = best else { break };
            let mut eparent: Vec<usize> = (0..n).collect();
            for c in 0..k {
                let cl = &cs.clusters[c];
                let first = if c == b { cs.clusters[a].start } else { cl.start };
                for i in cl.start..cl.start + cl.multiplicity {
                    union(&mut eparent, first, i);
                }
            }
            let mut labels = labels_from_forest(&mut eparent, &eig);
            let (mut q, mut t) = (cs.q, cs.t);
            reorder(&mut q, &mut t, &mut labels);
            cs = ClusteredSchur::from_sorted(q, t, &labels, radius);
        }

        // separation audit
        let eig: Vec<C64> = (0..n).map(|i| cs.t[(i, i)]).collect();
        for a in 0..cs.clusters.len() {
            for b in a + 1..cs.clusters.len() {
                if cs.cluster_distance(a, b, &eig) <= 2.0 * radius {
                    return Err(Error::ClusterAmbiguity {
                        a: fmt_c(cs.clusters[a].rep),
                        b: fmt_c(cs.clusters[b].rep),
                        radius,
                    });
                }
            }
        }
        Ok(cs)
    }

    fn from_sorted(q: DMatrix<C64>, t: DMatrix<C64>, labels: &[usize], radius: f64) -> Self {
        let n = labels.len();
        let mut clusters = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && labels[end] == labels[start] {
                end += 1;
            }
            let m = end - start;
            let rep = (start..end).map(|i| t[(i, i)]).sum::<C64>() / m as f64;
            let spread = (start..end).map(|i| (t[(i, i)] - rep).norm()).fold(0.0, f64::max);
            clusters.push(Cluster {
                rep,
                multiplicity: m,
                spread,
                start,
            });
            start = end;
        }
        let (x, x_inv) = block_diagonalizer(&t, &clusters);
        ClusteredSchur {
            q,
            t,
            clusters,
            radius,
            x,
            x_inv,
        }
    }

    fn cluster_distance(&self, a: usize, b: usize, eig: &[C64]) -> f64 {
        let ca = &self.clusters[a];
        let cb = &self.clusters[b];
        let mut d = f64::INFINITY;
        for i in ca.start..ca.start + ca.multiplicity {
            for j in cb.start..cb.start + cb.multiplicity {
                d = d.min((eig[i] - eig[j]).norm());
            }
        }
        d
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Spectral projector of cluster `c` expressed in the Schur basis,
    /// `X E_c X^-1` with `E_c` selecting the cluster's diagonal block.
    fn projector_schur_basis(&self, c: usize) -> DMatrix<C64> {
        let Cluster { start, multiplicity: m, .. } = self.clusters[c];
        let n = self.t.nrows();
        self.x.view((0, start), (n, m)) * self.x_inv.view((start, 0), (m, n))
    }

    /// Riesz projection onto the generalized eigenspace of cluster `c`.
    pub fn projector(&self, c: usize) -> DMatrix<C64> {
        let f = self.projector_schur_basis(c);
        &self.q * f * self.q.adjoint()
    }
}

/// Solve `T_ii X_ij - X_ij T_jj = -sum_{i<k<=j} T_ik X_kj` block by block,
/// upward within each block column, so that `T X = X D`.
fn block_diagonalizer(t: &DMatrix<C64>, clusters: &[Cluster]) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = t.nrows();
    let mut x = DMatrix::<C64>::identity(n, n);
    for (j, cj) in clusters.iter().enumerate() {
        let (sj, mj) = (cj.start, cj.multiplicity);
        for i in (0..j).rev() {
            let (si, mi) = (clusters[i].start, clusters[i].multiplicity);
            let rhs = -(t.view((si, si + mi), (mi, sj + mj - si - mi)) * x.view((si + mi, sj), (sj + mj - si - mi, mj)));
            let sol = solve_sylvester(t.view((si, si), (mi, mi)), t.view((sj, sj), (mj, mj)), &rhs);
            x.view_mut((si, sj), (mi, mj)).copy_from(&sol);
        }
    }
    let x_inv = x
        .solve_upper_triangular(&DMatrix::identity(n, n))
        .unwrap_or_else(|| DMatrix::from_element(n, n, C64::new(f64::NAN, 0.0)));
    (x, x_inv)
}

fn fmt_c(z: C64) -> String {
    format!("{:.6e}{:+.6e}i", z.re, z.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random(n: usize, rng: &mut ChaCha20Rng) -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn swaps_preserve_similarity() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let a = random(7, &mut rng);
        let (mut q, mut t) = schur(&a).unwrap();
        let mut keys: Vec<usize> = (0..7).rev().collect();
        let before: Vec<C64> = (0..7).map(|i| t[(i, i)]).collect();
        reorder(&mut q, &mut t, &mut keys);
        let back = &q * &t * q.adjoint();
        assert!((back - &a).norm() < 1e-13 * a.norm());
        for i in 0..7 {
            assert!((t[(i, i)] - before[6 - i]).norm() < 1e-13);
            for j in 0..i {
                assert_eq!(t[(i, j)], C64::new(0.0, 0.0));
            }
        }
        assert!((q.adjoint() * &q - DMatrix::identity(7, 7)).norm() < 1e-13);
    }

    #[test]
    fn sylvester_solution() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (_, a) = schur(&random(3, &mut rng)).unwrap();
        let (_, b) = schur(&(random(4, &mut rng) + DMatrix::identity(4, 4) * C64::new(5.0, 0.0))).unwrap();
        let c = DMatrix::from_fn(3, 4, |i, j| C64::new(i as f64, j as f64));
        let x = solve_sylvester(a.as_view(), b.as_view(), &c);
        assert!((&a * &x - &x * &b - c).norm() < 1e-12);
    }

    #[test]
    fn projectors_resolve_identity() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let a = random(6, &mut rng);
        let cs = ClusteredSchur::new(&a, &ToleranceConfig::default()).unwrap();
        assert_eq!(cs.clusters().len(), 6);
        let mut sum = DMatrix::<C64>::zeros(6, 6);
        for c in 0..6 {
            let p = cs.projector(c);
            assert!((&p * &p - &p).norm() < 1e-10);
            assert!((&a * &p - &p * &a).norm() < 1e-10);
            sum += p;
        }
        assert!((sum - DMatrix::identity(6, 6)).norm() < 1e-10);
    }

    #[test]
    fn defective_block_forms_one_cluster() {
        // Jordan block of size 4 at 2 hidden by a random similarity, plus a simple eigenvalue at -1
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let n = 5;
        let mut j = DMatrix::<C64>::zeros(n, n);
        for i in 0..4 {
            j[(i, i)] = C64::new(2.0, 0.0);
            if i < 3 {
                j[(i, i + 1)] = C64::new(1.0, 0.0);
            }
        }
        j[(4, 4)] = C64::new(-1.0, 0.0);
        let s = random(n, &mut rng) + DMatrix::identity(n, n) * C64::new(2.0, 0.0);
        let a = &s * j * s.clone().try_inverse().unwrap();
        let cs = ClusteredSchur::new(&a, &ToleranceConfig::default()).unwrap();
        assert_eq!(cs.clusters().len(), 2);
        let big = cs.clusters().iter().position(|c| c.multiplicity == 4).unwrap();
        assert!((cs.clusters()[big].rep - C64::new(2.0, 0.0)).norm() < 1e-10);
        let p = cs.projector(big);
        assert!((&p * &p - &p).norm() < 1e-8);
        assert!((p.trace() - C64::new(4.0, 0.0)).norm() < 1e-8);
    }
}
