//! Invariant subspace chains for sets of nilpotent matrices.
//!
//! The chain engine walks down `X ⊇ 𝔄X ⊇ 𝔄²X ⊇ ... ⊇ 0`, where `𝔄` is the
//! associative algebra generated by the input. Since `𝔄^{j+1}X` is the span
//! of `g · 𝔄^j X` over generators `g`, only generators are ever applied.
//! Every link is invariant by construction and every generator maps each
//! link into the next one, so the gaps can be filled with arbitrary flags.

use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::algebra::{associative_closure, GeneratorSet};
use crate::error::{Error, Result};
use crate::instance::ComplexNormal;
use crate::matrix::{is_nilpotent, ComplexMatrix, ToleranceConfig, C64};
use crate::par::Execution;
use crate::subspace::{span_svd, span_with_scale, Subspace};

/// Strictly increasing list of subspaces from `0` to `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceChain {
    ambient_dim: usize,
    links: Vec<Subspace>,
}

impl SubspaceChain {
    pub fn new(links: Vec<Subspace>) -> Result<Self> {
        let first = links.first().ok_or_else(|| Error::MalformedChain("no links".into()))?;
        let n = first.ambient_dim();
        if !first.is_zero() || !links.last().unwrap().is_full() || links.len() < 2 {
            return Err(Error::MalformedChain("chain must run from 0 to the full space".into()));
        }
        if links.iter().any(|l| l.ambient_dim() != n) || links.windows(2).any(|w| w[0].dim() >= w[1].dim()) {
            return Err(Error::MalformedChain("dimensions must strictly increase".into()));
        }
        Ok(SubspaceChain { ambient_dim: n, links })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn links(&self) -> &[Subspace] {
        &self.links
    }

    pub fn dims(&self) -> Vec<usize> {
        self.links.iter().map(|l| l.dim()).collect()
    }

    pub fn is_maximal(&self) -> bool {
        self.links.len() == self.ambient_dim + 1
    }

    /// Largest invariance residual over links and the given matrices.
    pub fn invariance_residual(&self, mats: &[ComplexMatrix]) -> Result<f64> {
        let mut worst = 0.0f64;
        for l in &self.links {
            for m in mats {
                worst = worst.max(l.invariance_residual(m)?);
            }
        }
        Ok(worst)
    }
}

/// A maximal invariant chain, a unitary realizing it, and the audit residual.
#[derive(Debug, Clone)]
pub struct TriangularizationCertificate {
    pub chain: SubspaceChain,
    pub conjugator: ComplexMatrix,
    /// `max_g max_{i >= j} |(S* g S)_ij| / (1 + ||g||)`.
    pub residual: f64,
}

impl Serialize for TriangularizationCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("TriangularizationCertificate", 3)?;
        st.serialize_field("chain_dims", &self.chain.dims())?;
        st.serialize_field("conjugator", &self.conjugator)?;
        st.serialize_field("residual", &self.residual)?;
        st.end()
    }
}

/// Outcome of a reducibility search.
#[derive(Debug, Clone, PartialEq)]
pub enum Reducibility {
    Reducible(Subspace),
    NotReducible,
}

impl Serialize for Reducibility {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Reducibility", 2)?;
        match self {
            Reducibility::Reducible(v) => {
                st.serialize_field("reducible", &true)?;
                st.serialize_field("subspace", v)?;
            }
            Reducibility::NotReducible => {
                st.serialize_field("reducible", &false)?;
                st.skip_field("subspace")?;
            }
        }
        st.end()
    }
}

fn check_nilpotent_generators(g: &GeneratorSet, cfg: &ToleranceConfig) -> Result<()> {
    for (index, m) in g.gens().iter().enumerate() {
        if !is_nilpotent(m, cfg)? {
            return Err(Error::NotNilpotent { index });
        }
    }
    Ok(())
}

/// `Σ_g g V`: the next link below `v`.
fn next_link(gens: &[DMatrix<C64>], v: &Subspace, threshold: f64) -> Result<Subspace> {
    let mut imgs = Vec::with_capacity(gens.len() * v.dim());
    for m in gens {
        for b in v.basis_vectors() {
            imgs.push(m * b);
        }
    }
    span_svd(v.ambient_dim(), &imgs, threshold)
}

/// The `𝔄^j X` recursion run directly on `gens`, returned descending.
fn power_links(gens: &[DMatrix<C64>], threshold: f64) -> Result<Vec<Subspace>> {
    let n = gens[0].nrows();
    let mut desc = vec![Subspace::full(n)];
    loop {
        let v = desc.last().unwrap();
        if v.is_zero() {
            return Ok(desc);
        }
        let w = next_link(gens, v, threshold)?;
        if w.dim() >= v.dim() {
            return Err(Error::ChainStall { dim: v.dim() });
        }
        desc.push(w);
    }
}

/// Unitary `U` with every `U* g U` strictly upper triangular, built by
/// deflating common null vectors of the generators compressed to the
/// orthogonal complement of the columns found so far. A right null vector
/// becomes the next leading column, a left null vector the next trailing
/// one; each step takes the side whose null vector is better separated from
/// the rest of the spectrum, which keeps ambiguous choices for last. Fails
/// with the remaining dimension when neither side has a null vector.
fn deflation_flag(gens: &[DMatrix<C64>], tol: f64) -> std::result::Result<DMatrix<C64>, usize> {
    let n = gens[0].nrows();
    let mut front: Vec<DVector<C64>> = Vec::with_capacity(n);
    let mut back: Vec<DVector<C64>> = Vec::new();
    let mut w = DMatrix::<C64>::identity(n, n);
    while front.len() + back.len() < n {
        let r = w.ncols();
        let mut right = DMatrix::<C64>::zeros(gens.len() * r, r);
        let mut left = DMatrix::<C64>::zeros(gens.len() * r, r);
        for (i, g) in gens.iter().enumerate() {
            let block = w.adjoint() * g * &w;
            right.view_mut((i * r, 0), (r, r)).copy_from(&block);
            left.view_mut((i * r, 0), (r, r)).copy_from(&block.adjoint());
        }
        let null_pair = |m: &DMatrix<C64>| {
            let svd = crate::jacobi::svd(m);
            let k = svd.sigma.len() - 1;
            let gap = if k == 0 { f64::INFINITY } else { svd.sigma[k - 1] / svd.sigma[k].max(f64::MIN_POSITIVE) };
            (svd.sigma[k], gap, svd.v[k].clone())
        };
        let (sr, gr, yr) = null_pair(&right);
        let (sl, gl, yl) = null_pair(&left);
        let use_right = match (sr <= tol, sl <= tol) {
            (false, false) => return Err(r),
            (true, false) => true,
            (false, true) => false,
            (true, true) => gr >= gl,
        };
        if use_right {
            front.push(&w * yr);
        } else {
            back.push(&w * yl);
        }
        if front.len() + back.len() == n {
            break;
        }
        // orthonormal basis of the complement of the columns found so far
        let found: Vec<DVector<C64>> = front.iter().chain(&back).cloned().collect();
        let flag = span_with_scale(n, &found, 0.5).map_err(|_| r)?;
        let rest = Subspace::full(n).complement_basis(&flag).map_err(|_| r)?;
        w = DMatrix::from_columns(&rest);
    }
    front.extend(back.into_iter().rev());
    Ok(DMatrix::from_columns(&front))
}

/// Loose acceptance for a common null vector during deflation; the flag is
/// polished afterwards, so this only has to separate "small" from "absent".
const DEFLATION_TOL: f64 = 1e-5;
const REFINE_STEPS: usize = 60;
const LINE_SEARCH_HALVINGS: usize = 12;
/// Polishing stops once the flag residual is this far below `residual_tol`.
const REFINE_MARGIN: f64 = 1e-4;

/// Lower-plus-diagonal mass of `u* g u`, relative to `1 + ||g||_F`.
fn flag_residual(gens: &[DMatrix<C64>], u: &DMatrix<C64>) -> f64 {
    gens.iter()
        .map(|g| {
            let t = u.adjoint() * g * u;
            let mut m = 0.0f64;
            for j in 0..t.ncols() {
                for i in j..t.nrows() {
                    m = m.max(t[(i, j)].norm());
                }
            }
            m / (1.0 + g.norm())
        })
        .fold(0.0, f64::max)
}

/// Gauss-Newton polish of a unitary flag. With `T = u* g u` and a small
/// skew-Hermitian `X` supported off the diagonal, the lower-plus-diagonal
/// part of `T + [T, X]` is driven to zero in least squares over all
/// generators; `u (I + X)` is then re-orthonormalized by QR, which keeps the
/// flag it spans. Stops at `target` or when the residual no longer improves.
fn refine_flag(gens: &[DMatrix<C64>], mut u: DMatrix<C64>, target: f64) -> DMatrix<C64> {
    let n = u.nrows();
    if n < 2 {
        return u;
    }
    let unknowns: Vec<(usize, usize)> = (0..n).flat_map(|j| (j + 1..n).map(move |i| (i, j))).collect();
    let targets: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |i| (i, j))).collect();
    let rows = 2 * gens.len() * targets.len();
    let cols = 2 * unknowns.len();
    let mut best = flag_residual(gens, &u);
    let mut best_u = u.clone();
    for _ in 0..REFINE_STEPS {
        if best <= target {
            break;
        }
        let ts: Vec<DMatrix<C64>> = gens.iter().map(|g| u.adjoint() * g * &u).collect();
        let mut jac = DMatrix::<f64>::zeros(rows, cols);
        let mut rhs = nalgebra::DVector::<f64>::zeros(rows);
        for (gi, t) in ts.iter().enumerate() {
            let base = 2 * gi * targets.len();
            for (r, &(a, b)) in targets.iter().enumerate() {
                rhs[base + 2 * r] = -t[(a, b)].re;
                rhs[base + 2 * r + 1] = -t[(a, b)].im;
            }
            for (c, &(i, j)) in unknowns.iter().enumerate() {
                for (part, x) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
                    // X = x E_ij - conj(x) E_ji; [T, X] = T X - X T
                    let xm = -x.conj();
                    for (r, &(a, b)) in targets.iter().enumerate() {
                        let mut v = C64::new(0.0, 0.0);
                        if b == j {
                            v += t[(a, i)] * x;
                        }
                        if b == i {
                            v += t[(a, j)] * xm;
                        }
                        if a == i {
                            v -= x * t[(j, b)];
                        }
                        if a == j {
                            v -= xm * t[(i, b)];
                        }
                        jac[(base + 2 * r, 2 * c + part)] = v.re;
                        jac[(base + 2 * r + 1, 2 * c + part)] = v.im;
                    }
                }
            }
        }
        let svd = jac.svd(true, true);
        let Ok(sol) = svd.solve(&rhs, f64::EPSILON * 64.0) else {
            break;
        };
        let current = rhs.norm();
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..LINE_SEARCH_HALVINGS {
            let mut x = DMatrix::<C64>::identity(n, n);
            for (c, &(i, j)) in unknowns.iter().enumerate() {
                let z = C64::new(sol[2 * c], sol[2 * c + 1]) * step;
                x[(i, j)] += z;
                x[(j, i)] -= z.conj();
            }
            let cand = (&u * x).qr().q();
            if lower_mass_l2(gens, &cand) < current {
                u = cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
        let r = flag_residual(gens, &u);
        if r < best {
            best = r;
            best_u = u.clone();
        }
    }
    best_u
}

/// Euclidean norm of the lower-plus-diagonal parts of `u* g u` over all
/// generators: the objective the Gauss-Newton step linearizes.
fn lower_mass_l2(gens: &[DMatrix<C64>], u: &DMatrix<C64>) -> f64 {
    gens.iter()
        .map(|g| {
            let t = u.adjoint() * g * u;
            let mut m = 0.0f64;
            for j in 0..t.ncols() {
                for i in j..t.nrows() {
                    m += t[(i, j)].norm_sqr();
                }
            }
            m
        })
        .sum::<f64>()
        .sqrt()
}

/// Descending powers of the generated algebra applied to `C^n`, returned
/// ascending. Requires every generator to be nilpotent; the dimensions
/// stalling above zero means the generated algebra is not nilpotent.
///
/// The recursion is run in the basis of a deflation flag, where every
/// generator is strictly upper triangular up to roundoff, and mapped back.
/// In that basis each image provably shrinks the link, so truncation errors
/// cannot masquerade as a stall.
pub fn radical_chain(g: &GeneratorSet, cfg: &ToleranceConfig) -> Result<SubspaceChain> {
    check_nilpotent_generators(g, cfg)?;
    let gens: Vec<DMatrix<C64>> = g.gens().iter().map(|m| m.as_dmatrix().clone()).collect();
    let scale = g.max_op_norm();
    let threshold = cfg.rank_tol * scale;
    let u = match deflation_flag(&gens, DEFLATION_TOL * (1.0 + scale)) {
        Ok(u) => refine_flag(&gens, u, cfg.residual_tol * REFINE_MARGIN),
        Err(dim) => {
            // report the stalled link of the direct recursion when it shows one
            return Err(match power_links(&gens, threshold) {
                Err(e @ Error::ChainStall { .. }) => e,
                Err(e) => e,
                Ok(_) => Error::ChainStall { dim },
            });
        }
    };
    let tri: Vec<DMatrix<C64>> = gens
        .iter()
        .map(|m| {
            let mut t = u.adjoint() * m * &u;
            for j in 0..t.ncols() {
                for i in j..t.nrows() {
                    t[(i, j)] = C64::new(0.0, 0.0);
                }
            }
            t
        })
        .collect();
    // genuinely small images can fall under rank_tol; in this basis the
    // structure is exact, so roundoff is a safe second threshold
    let roundoff = 64.0 * g.dim() as f64 * f64::EPSILON * scale;
    let mut desc = match power_links(&tri, threshold) {
        Err(Error::ChainStall { .. }) => power_links(&tri, roundoff)?,
        other => other?,
    };
    desc.reverse();
    let n = g.dim();
    let links = desc
        .iter()
        .map(|l| {
            let vecs: Vec<DVector<C64>> = l.basis_vectors().iter().map(|b| &u * b).collect();
            span_with_scale(n, &vecs, 0.5)
        })
        .collect::<Result<Vec<_>>>()?;
    SubspaceChain::new(links)
}

/// Fill every gap of dimension `d > 1` with `d - 1` intermediate links.
///
/// Each generator must map every link into the previous one (zero action on
/// gap quotients); completions are the pivoted orthonormal complements.
pub fn refine_to_maximal(chain: &SubspaceChain, g: &GeneratorSet, cfg: &ToleranceConfig) -> Result<SubspaceChain> {
    if chain.ambient_dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: chain.ambient_dim(),
            found: g.dim(),
        });
    }
    let links = chain.links();
    for w in links.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        for (generator, m) in g.gens().iter().enumerate() {
            let scale = 1.0 + m.op_norm();
            let residual = hi
                .basis_vectors()
                .iter()
                .map(|v| lo.distance(&(m.as_dmatrix() * v)))
                .fold(0.0, f64::max)
                / scale;
            if residual > cfg.residual_tol {
                return Err(Error::GapNotAnnihilated {
                    gap: hi.dim(),
                    generator,
                    residual,
                });
            }
        }
    }
    let n = chain.ambient_dim();
    let mut out = vec![links[0].clone()];
    for w in links.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let fill = hi.complement_basis(lo)?;
        let mut vecs = lo.basis_vectors();
        for v in fill.iter().take(fill.len().saturating_sub(1)) {
            vecs.push(v.clone());
            out.push(span_with_scale(n, &vecs, 0.5)?);
        }
        out.push(hi.clone());
    }
    let refined = SubspaceChain::new(out)?;
    let r = refined.invariance_residual(g.gens())?;
    if r > cfg.residual_tol {
        return Err(Error::Postcondition(format!(
            "refined chain invariance residual {r:e} exceeds {:e}",
            cfg.residual_tol
        )));
    }
    Ok(refined)
}

/// Unitary whose first `k` columns span link `k` of a maximal chain.
pub fn conjugator_from_chain(chain: &SubspaceChain) -> Result<ComplexMatrix> {
    if !chain.is_maximal() {
        return Err(Error::NonMaximalChain(chain.dims()));
    }
    let n = chain.ambient_dim();
    let mut cols: Vec<DVector<C64>> = Vec::with_capacity(n);
    for link in &chain.links()[1..] {
        let prev = span_with_scale(n, &cols, 0.5)?;
        let v = link
            .complement_basis(&prev)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::MalformedChain("link does not extend its predecessor".into()))?;
        cols.push(v);
    }
    ComplexMatrix::from_dmatrix(DMatrix::from_columns(&cols))
}

/// Strict lower-plus-diagonal mass of `S* g S`, relative to `1 + ||g||`.
pub fn triangularity_residual(s: &ComplexMatrix, gens: &[ComplexMatrix]) -> f64 {
    let sa = s.adjoint();
    gens.iter()
        .map(|g| (&(&sa * g) * s).lower_mass() / (1.0 + g.op_norm()))
        .fold(0.0, f64::max)
}

/// Radical chain, refinement, unitary conjugator, and a residual audit.
pub fn triangularize(g: &GeneratorSet, cfg: &ToleranceConfig) -> Result<TriangularizationCertificate> {
    cfg.validate()?;
    let chain = refine_to_maximal(&radical_chain(g, cfg)?, g, cfg)?;
    let conjugator = conjugator_from_chain(&chain)?;
    let residual = triangularity_residual(&conjugator, g.gens());
    if !(residual <= cfg.residual_tol) {
        return Err(Error::ResidualExceeded {
            residual,
            threshold: cfg.residual_tol,
        });
    }
    Ok(TriangularizationCertificate {
        chain,
        conjugator,
        residual,
    })
}

/// [`triangularize`] over many generator sets; output order matches input.
pub fn triangularize_batch(
    sets: &[GeneratorSet],
    cfg: &ToleranceConfig,
    exec: Execution,
) -> Vec<Result<TriangularizationCertificate>> {
    exec.map(sets, |g| triangularize(g, cfg))
}

const SEARCH_ATTEMPTS: usize = 8;
const SEARCH_SEED: u64 = 0x1d_5eed;

/// A common invariant subspace `0 < V < C^n`, or `NotReducible` when the
/// generated associative algebra is all of `M_n`.
///
/// Nilpotent inputs use the smallest nonzero radical-chain link. Otherwise
/// the search takes eigenvectors of random elements of the algebra (and of
/// its adjoint) and tests whether their orbits are proper.
pub fn find_invariant_subspace(g: &GeneratorSet, cfg: &ToleranceConfig) -> Result<Reducibility> {
    cfg.validate()?;
    let n = g.dim();
    if n == 1 {
        return Ok(Reducibility::NotReducible);
    }
    if let Ok(chain) = radical_chain(g, cfg) {
        let link = chain.links().iter().find(|l| !l.is_zero()).unwrap();
        let v = if link.is_full() { Subspace::standard(n, 1) } else { link.clone() };
        if verified(&v, g, cfg)? {
            return Ok(Reducibility::Reducible(v));
        }
    }

    let alg = associative_closure(g, cfg)?;
    if alg.dim() == n * n {
        return Ok(Reducibility::NotReducible);
    }
    let basis = alg.basis();
    let adjoints: Vec<ComplexMatrix> = basis.iter().map(|b| b.adjoint()).collect();
    let mut rng = ComplexNormal::new(SEARCH_SEED);
    for _ in 0..SEARCH_ATTEMPTS {
        let coeffs: Vec<C64> = (0..basis.len()).map(|_| rng.sample()).collect();
        let a = alg.space.combine(&coeffs);
        for v in eigenvectors(&a)? {
            let w = orbit(&v, basis, cfg)?;
            if w.dim() < n && verified(&w, g, cfg)? {
                return Ok(Reducibility::Reducible(w));
            }
        }
        for v in eigenvectors(&a.adjoint())? {
            let w = orbit(&v, &adjoints, cfg)?;
            if w.dim() < n {
                let perp = Subspace::full(n).complement_basis(&w)?;
                let v = span_with_scale(n, &perp, 0.5)?;
                if verified(&v, g, cfg)? {
                    return Ok(Reducibility::Reducible(v));
                }
            }
        }
    }
    Err(Error::SearchExhausted)
}

fn verified(v: &Subspace, g: &GeneratorSet, cfg: &ToleranceConfig) -> Result<bool> {
    if v.is_zero() || v.is_full() {
        return Ok(false);
    }
    for m in g.gens() {
        if !v.is_invariant(m, cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `span{v} + span{b v}`: the smallest subspace containing `v` and stable
/// under the algebra with basis `basis`.
fn orbit(v: &DVector<C64>, basis: &[ComplexMatrix], cfg: &ToleranceConfig) -> Result<Subspace> {
    let mut vecs = vec![v.clone()];
    vecs.extend(basis.iter().map(|b| b.as_dmatrix() * v));
    let scale = vecs.iter().map(|x| x.norm()).fold(0.0, f64::max);
    span_svd(v.len(), &vecs, cfg.rank_tol * scale)
}

/// Unit null vectors of `a - λ` for each computed eigenvalue `λ`.
fn eigenvectors(a: &ComplexMatrix) -> Result<Vec<DVector<C64>>> {
    let n = a.dim();
    let mut out = Vec::new();
    for lambda in crate::matrix::spectrum(a)? {
        let shifted = a.as_dmatrix() - DMatrix::<C64>::identity(n, n) * lambda;
        out.push(crate::jacobi::smallest_right_singular(&shifted).1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::gen_random;

    fn e(n: usize, i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(n, i - 1, j - 1)
    }

    fn gs(v: Vec<ComplexMatrix>) -> GeneratorSet {
        GeneratorSet::new(v, "t").unwrap()
    }

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn spans_standard(s: &Subspace, k: usize) -> bool {
        s.dim() == k && (0..k).all(|i| s.distance(&DVector::from_fn(s.ambient_dim(), |r, _| C64::new((r == i) as u8 as f64, 0.0))) < 1e-12)
    }

    #[test]
    fn chain_validation() {
        assert!(SubspaceChain::new(vec![]).is_err());
        assert!(SubspaceChain::new(vec![Subspace::zero(2), Subspace::standard(2, 1)]).is_err());
        assert!(SubspaceChain::new(vec![Subspace::zero(2), Subspace::full(2), Subspace::full(2)]).is_err());
        let c = SubspaceChain::new(vec![Subspace::zero(2), Subspace::full(2)]).unwrap();
        assert!(!c.is_maximal());
    }

    #[test]
    fn radical_chain_examples() {
        let c = radical_chain(&gs(vec![e(2, 1, 2)]), &cfg()).unwrap();
        assert_eq!(c.dims(), vec![0, 1, 2]);
        assert!(spans_standard(&c.links()[1], 1));

        let c = radical_chain(&gs(vec![e(3, 1, 2), e(3, 2, 3)]), &cfg()).unwrap();
        assert_eq!(c.dims(), vec![0, 1, 2, 3]);
        assert!(spans_standard(&c.links()[1], 1));
        assert!(spans_standard(&c.links()[2], 2));

        let c = radical_chain(&gs(vec![e(2, 2, 1)]), &cfg()).unwrap();
        let e2 = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(c.links()[1].distance(&e2) < 1e-14);

        let r = radical_chain(&gs(vec![e(2, 1, 2), e(2, 2, 1)]), &cfg());
        assert!(matches!(r, Err(Error::ChainStall { .. })));
    }

    #[test]
    fn refine_examples() {
        let c = radical_chain(&gs(vec![e(3, 1, 2), e(3, 2, 3)]), &cfg()).unwrap();
        let g = gs(vec![e(3, 1, 2), e(3, 2, 3)]);
        assert_eq!(refine_to_maximal(&c, &g, &cfg()).unwrap(), c);

        let g = gs(vec![ComplexMatrix::zeros(3)]);
        let c = SubspaceChain::new(vec![Subspace::zero(3), Subspace::full(3)]).unwrap();
        let r = refine_to_maximal(&c, &g, &cfg()).unwrap();
        assert_eq!(r.dims(), vec![0, 1, 2, 3]);
        assert!(spans_standard(&r.links()[1], 1));
        assert!(spans_standard(&r.links()[2], 2));

        let g = gs(vec![e(3, 1, 3)]);
        let c = SubspaceChain::new(vec![Subspace::zero(3), Subspace::standard(3, 1), Subspace::full(3)]).unwrap();
        let r = refine_to_maximal(&c, &g, &cfg()).unwrap();
        assert_eq!(r.dims(), vec![0, 1, 2, 3]);
        assert!(r.links()[2].is_invariant(&e(3, 1, 3), &cfg()).unwrap());

        // E21 does not map C^2 into 0
        let g = gs(vec![e(2, 2, 1)]);
        let c = SubspaceChain::new(vec![Subspace::zero(2), Subspace::full(2)]).unwrap();
        assert!(matches!(refine_to_maximal(&c, &g, &cfg()), Err(Error::GapNotAnnihilated { .. })));
    }

    #[test]
    fn conjugator_examples() {
        let flag = SubspaceChain::new((0..=3).map(|k| Subspace::standard(3, k)).collect()).unwrap();
        assert!(conjugator_from_chain(&flag).unwrap().approx_eq(&ComplexMatrix::identity(3), 1e-15));

        let e2 = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let c = SubspaceChain::new(vec![
            Subspace::zero(2),
            span_with_scale(2, &[e2], 0.5).unwrap(),
            Subspace::full(2),
        ])
        .unwrap();
        let s = conjugator_from_chain(&c).unwrap();
        let swap = &e(2, 1, 2) + &e(2, 2, 1);
        assert!(s.approx_eq(&swap, 1e-15));

        let coarse = SubspaceChain::new(vec![Subspace::zero(3), Subspace::full(3)]).unwrap();
        assert!(matches!(conjugator_from_chain(&coarse), Err(Error::NonMaximalChain(_))));
    }

    #[test]
    fn triangularize_examples() {
        let c = triangularize(&gs(vec![e(3, 1, 2), e(3, 2, 3), e(3, 1, 3)]), &cfg()).unwrap();
        assert!(c.conjugator.approx_eq(&ComplexMatrix::identity(3), 1e-15));
        assert_eq!(c.residual, 0.0);

        let f = gen_random(1, 6, 3, 100.0).unwrap();
        let c = triangularize(&f.generator_set().unwrap(), &cfg()).unwrap();
        assert!(c.residual < 1e-8);
        let s = &c.conjugator;
        assert!((s.adjoint() * s.clone()).approx_eq(&ComplexMatrix::identity(6), 1e-12));

        let flip = &e(2, 1, 2) + &e(2, 2, 1);
        assert!(matches!(triangularize(&gs(vec![flip]), &cfg()), Err(Error::NotNilpotent { index: 0 })));

        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["chain_dims"], serde_json::json!([0, 1, 2, 3, 4, 5, 6]));
    }

    #[test]
    fn reducibility_examples() {
        match find_invariant_subspace(&gs(vec![e(2, 1, 2)]), &cfg()).unwrap() {
            Reducibility::Reducible(v) => assert!(spans_standard(&v, 1)),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            find_invariant_subspace(&gs(vec![e(2, 1, 2), e(2, 2, 1)]), &cfg()).unwrap(),
            Reducibility::NotReducible
        );
        let d = ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0)]).unwrap();
        match find_invariant_subspace(&gs(vec![d]), &cfg()).unwrap() {
            Reducibility::Reducible(v) => assert_eq!(v.dim(), 1),
            other => panic!("{other:?}"),
        }
        let one = gs(vec![ComplexMatrix::identity(1)]);
        assert_eq!(find_invariant_subspace(&one, &cfg()).unwrap(), Reducibility::NotReducible);
    }
}
