//! Closure engines for matrix algebras generated by finite sets.
//!
//! Every closure grows a [`MatrixSpace`] in breadth-first rounds. A round
//! forms the relevant products between the current basis and the elements
//! added in the previous round (older pairs were already absorbed), computes
//! them data-parallel, then inserts them by pivoted Gram-Schmidt in a fixed
//! order so the resulting basis is reproducible. A product is new only if
//! its remainder off the span clears both `rank_tol` and its own estimated
//! forward noise (see [`MatrixSpace`]); without the second test, roundoff in
//! ill-conditioned inputs seeds spurious directions that then multiply.
//! Rounds are capped at `dim^2 + 1`.
//!
//! Jordan closure uses anticommutators only; powers come for free because
//! `{A, A} = 2A^2`.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ToleranceConfig, C64};
use crate::par::Execution;
use crate::subspace::{input_shadow, matspan, Candidate, MatrixSpace};

/// A finite, dimension-uniform list of generators.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    dim: usize,
    gens: Vec<ComplexMatrix>,
    pub label: String,
}

impl GeneratorSet {
    pub fn new(gens: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = gens
            .first()
            .ok_or_else(|| Error::InvalidParameter("generator set is empty".into()))?;
        let dim = first.dim();
        if let Some(bad) = gens.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(GeneratorSet {
            dim,
            gens,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gens(&self) -> &[ComplexMatrix] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn max_op_norm(&self) -> f64 {
        self.gens.iter().map(|g| g.op_norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraKind {
    Jordan,
    Lie,
    Associative,
    Ideal,
}

impl AlgebraKind {
    fn is_lie_like(self) -> bool {
        matches!(self, AlgebraKind::Lie | AlgebraKind::Ideal)
    }
}

/// A closed matrix space together with how it was grown.
#[derive(Debug, Clone)]
pub struct AlgebraBasis {
    pub space: MatrixSpace,
    pub kind: AlgebraKind,
    /// `(round, dimension after the round)`; round 0 is the span of the seeds.
    pub generation_log: Vec<(usize, usize)>,
}

impl AlgebraBasis {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        self.space.basis()
    }

    pub fn ambient_dim(&self) -> usize {
        self.space.ambient_dim()
    }

    /// Largest membership residual of `x * y` over basis pairs, where `*` is
    /// the product named by `kind` (the commutator for ideals), counted
    /// beyond the product's estimated forward noise.
    pub fn closure_residual(&self) -> f64 {
        let b = (self.space.basis(), self.space.shadows());
        let excess = |c: Candidate| self.space.excess_residual(&c).unwrap_or(f64::INFINITY);
        let mut worst = 0.0f64;
        for i in 0..b.0.len() {
            for j in i..b.0.len() {
                worst = worst.max(match self.kind {
                    AlgebraKind::Jordan => excess(jordan_candidate(b, i, b, j)),
                    AlgebraKind::Lie | AlgebraKind::Ideal => excess(lie_candidate(b, i, b, j)),
                    AlgebraKind::Associative => excess(assoc_candidate(b, i, b, j)).max(excess(assoc_candidate(b, j, b, i))),
                });
            }
        }
        worst
    }
}

#[derive(Serialize)]
struct AlgebraRepr<'a> {
    kind: AlgebraKind,
    basis: &'a [ComplexMatrix],
    log: Vec<[usize; 2]>,
}

impl Serialize for AlgebraBasis {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        AlgebraRepr {
            kind: self.kind,
            basis: self.space.basis(),
            log: self.generation_log.iter().map(|&(r, d)| [r, d]).collect(),
        }
        .serialize(serializer)
    }
}

fn round_cap(n: usize) -> usize {
    n * n + 1
}

/// `ab + sign * ba` with its first-order perturbation, given the factors'
/// shadows `da`, `db`.
fn product(a: &ComplexMatrix, b: &ComplexMatrix, da: &ComplexMatrix, db: &ComplexMatrix, sign: f64) -> Candidate {
    let (p, q) = (a * b, b * a);
    let s = C64::new(sign, 0.0);
    let dp = &(da * b) + &(a * db);
    let dq = &(db * a) + &(b * da);
    Candidate {
        roundoff: a.dim() as f64 * f64::EPSILON * (p.frobenius_norm() + q.frobenius_norm()),
        m: &p + &q.scale(s),
        shadow: &dp + &dq.scale(s),
    }
}

/// Basis elements with their shadows.
type Elements<'a> = (&'a [ComplexMatrix], &'a [ComplexMatrix]);

fn assoc_candidate(x: Elements, i: usize, y: Elements, j: usize) -> Candidate {
    let (a, b) = (&x.0[i], &y.0[j]);
    let m = a * b;
    Candidate {
        roundoff: a.dim() as f64 * f64::EPSILON * m.frobenius_norm(),
        shadow: &(&x.1[i] * b) + &(a * &y.1[j]),
        m,
    }
}

fn jordan_candidate(x: Elements, i: usize, y: Elements, j: usize) -> Candidate {
    product(&x.0[i], &y.0[j], &x.1[i], &y.1[j], 1.0)
}

fn lie_candidate(x: Elements, i: usize, y: Elements, j: usize) -> Candidate {
    product(&x.0[i], &y.0[j], &x.1[i], &y.1[j], -1.0)
}

/// Insert `cands` into `space`, returning the indices of new basis elements.
fn absorb(space: &mut MatrixSpace, cands: &[Candidate], threshold: f64) -> Result<Vec<usize>> {
    space.absorb_pivoted(cands, threshold)
}

fn grow<F>(
    mut space: MatrixSpace,
    cfg: &ToleranceConfig,
    exec: Execution,
    kind: AlgebraKind,
    mut round_products: F,
) -> Result<AlgebraBasis>
where
    F: FnMut(&MatrixSpace, &[usize], Execution) -> Vec<Candidate>,
{
    let n = space.ambient_dim();
    let mut log = vec![(0, space.dim())];
    let mut frontier: Vec<usize> = (0..space.dim()).collect();
    let mut round = 0;
    while !frontier.is_empty() {
        round += 1;
        if round > round_cap(n) {
            return Err(Error::ClosureNotStable { rounds: round_cap(n) });
        }
        let cands = round_products(&space, &frontier, exec);
        // basis elements are Frobenius-unit, so products are O(1)
        frontier = absorb(&mut space, &cands, cfg.rank_tol)?;
        log.push((round, space.dim()));
    }
    Ok(AlgebraBasis {
        space,
        kind,
        generation_log: log,
    })
}

/// Smallest matrix space containing the generators and closed under `{., .}`.
pub fn jordan_closure(g: &GeneratorSet, cfg: &ToleranceConfig) -> Result<AlgebraBasis> {
    jordan_closure_with(g, cfg, Execution::default())
}

pub fn jordan_closure_with(g: &GeneratorSet, cfg: &ToleranceConfig, exec: Execution) -> Result<AlgebraBasis> {
    let seed = matspan(g.dim(), g.gens(), cfg)?;
    grow(seed, cfg, exec, AlgebraKind::Jordan, |space, frontier, exec| {
        let b = (space.basis(), space.shadows());
        let pairs: Vec<(usize, usize)> = (0..b.0.len())
            .flat_map(|i| frontier.iter().filter(move |&&f| f >= i || !frontier.contains(&i)).map(move |&f| (i, f)))
            .collect();
        exec.map(&pairs, |&(i, j)| jordan_candidate(b, i, b, j))
    })
}

/// `span(J + [J, J])`, the Lie algebra generated by a Jordan algebra.
///
/// The result is checked to be closed under commutators; a failure means
/// the tolerances broke down, since closure holds identically.
pub fn lie_from_jordan(j: &AlgebraBasis, cfg: &ToleranceConfig) -> Result<AlgebraBasis> {
    if j.kind != AlgebraKind::Jordan {
        return Err(Error::InvalidParameter("lie_from_jordan expects a Jordan algebra".into()));
    }
    let mut space = j.space.clone();
    let b = (j.basis(), j.space.shadows());
    let pairs: Vec<(usize, usize)> = (0..b.0.len()).flat_map(|i| (i + 1..b.0.len()).map(move |k| (i, k))).collect();
    let cands = Execution::default().map(&pairs, |&(i, k)| lie_candidate(b, i, b, k));
    absorb(&mut space, &cands, cfg.rank_tol)?;
    let out = AlgebraBasis {
        generation_log: vec![(0, j.dim()), (1, space.dim())],
        space,
        kind: AlgebraKind::Lie,
    };
    let r = out.closure_residual();
    if r > cfg.residual_tol {
        return Err(Error::ClosureVerification {
            kind: "lie".into(),
            residual: r,
        });
    }
    Ok(out)
}

/// Lie closure of an arbitrary generator set (iterated commutators).
pub fn lie_closure(g: &GeneratorSet, cfg: &ToleranceConfig) -> Result<AlgebraBasis> {
    let seed = matspan(g.dim(), g.gens(), cfg)?;
    grow(seed, cfg, Execution::default(), AlgebraKind::Lie, |space, frontier, exec| {
        let b = (space.basis(), space.shadows());
        let pairs: Vec<(usize, usize)> = (0..b.0.len())
            .flat_map(|i| frontier.iter().filter(move |&&f| f != i).map(move |&f| (i, f)))
            .collect();
        exec.map(&pairs, |&(i, j)| lie_candidate(b, i, b, j))
    })
}

/// Smallest subspace of `L` containing `seeds` and stable under `[L, .]`.
///
/// New elements are bracketed only against `L`'s fixed basis.
pub fn lie_ideal_generated(l: &AlgebraBasis, seeds: &[ComplexMatrix], cfg: &ToleranceConfig) -> Result<AlgebraBasis> {
    if !l.kind.is_lie_like() {
        return Err(Error::InvalidParameter("ideal generation needs a Lie algebra".into()));
    }
    for (index, s) in seeds.iter().enumerate() {
        let residual = l.space.residual(s)?;
        if residual > cfg.residual_tol * (1.0 + s.frobenius_norm()) {
            return Err(Error::NotInAlgebra { index, residual });
        }
    }
    let scale = seeds.iter().map(|m| m.frobenius_norm()).fold(0.0, f64::max);
    let cands: Vec<Candidate> = seeds
        .iter()
        .map(|s| Candidate {
            m: s.clone(),
            shadow: l.space.shadow_of(s),
            roundoff: 0.0,
        })
        .collect();
    let mut seed = MatrixSpace::zero(l.ambient_dim());
    seed.absorb_pivoted(&cands, cfg.rank_tol * scale)?;
    let (lb, ls) = (l.basis().to_vec(), l.space.shadows().to_vec());
    grow(seed, cfg, Execution::default(), AlgebraKind::Ideal, move |space, frontier, exec| {
        let b = (space.basis(), space.shadows());
        let pairs: Vec<(usize, usize)> = frontier.iter().flat_map(|&f| (0..lb.len()).map(move |i| (i, f))).collect();
        exec.map(&pairs, |&(i, f)| lie_candidate((&lb, &ls), i, b, f))
    })
}

/// `[L, L]`, the span of all brackets of basis elements.
pub fn derived_algebra(l: &AlgebraBasis, cfg: &ToleranceConfig) -> Result<AlgebraBasis> {
    if !l.kind.is_lie_like() {
        return Err(Error::InvalidParameter("derived algebra needs a Lie algebra".into()));
    }
    let space = bracket_span(&l.space, &l.space, cfg)?;
    Ok(AlgebraBasis {
        generation_log: vec![(0, space.dim())],
        space,
        kind: AlgebraKind::Ideal,
    })
}

fn bracket_span(x: &MatrixSpace, y: &MatrixSpace, cfg: &ToleranceConfig) -> Result<MatrixSpace> {
    let (xb, yb) = ((x.basis(), x.shadows()), (y.basis(), y.shadows()));
    let pairs: Vec<(usize, usize)> = (0..xb.0.len()).flat_map(|i| (0..yb.0.len()).map(move |j| (i, j))).collect();
    let cands = Execution::default().map(&pairs, |&(i, j)| lie_candidate(xb, i, yb, j));
    let mut space = MatrixSpace::zero(x.ambient_dim());
    absorb(&mut space, &cands, cfg.rank_tol)?;
    Ok(space)
}

/// `L ⊇ [L, L] ⊇ [L, [L, L]] ⊇ ...`, stopping at zero or at the first
/// term whose dimension fails to drop (that term is included).
pub fn lower_central_series(l: &AlgebraBasis, cfg: &ToleranceConfig) -> Result<Vec<MatrixSpace>> {
    if !l.kind.is_lie_like() {
        return Err(Error::InvalidParameter("lower central series needs a Lie algebra".into()));
    }
    let mut series = vec![l.space.clone()];
    loop {
        let last = series.last().unwrap();
        if last.dim() == 0 {
            break;
        }
        let next = bracket_span(&l.space, last, cfg)?;
        let stalled = next.dim() >= last.dim();
        series.push(next);
        if stalled {
            break;
        }
    }
    Ok(series)
}

/// Engel property, decided through the lower central series reaching zero.
pub fn is_engel(l: &AlgebraBasis, cfg: &ToleranceConfig) -> Result<bool> {
    Ok(lower_central_series(l, cfg)?.last().map(|s| s.dim() == 0).unwrap_or(true))
}

/// Smallest space containing the generators and closed under ordinary
/// multiplication (no unit adjoined). It is the span of all words in the
/// generators, grown by left-multiplying new elements by generators.
pub fn associative_closure(g: &GeneratorSet, cfg: &ToleranceConfig) -> Result<AlgebraBasis> {
    associative_closure_with(g, cfg, Execution::default())
}

pub fn associative_closure_with(g: &GeneratorSet, cfg: &ToleranceConfig, exec: Execution) -> Result<AlgebraBasis> {
    let seed = matspan(g.dim(), g.gens(), cfg)?;
    let scale = 1.0f64.max(g.max_op_norm());
    let gens: Vec<ComplexMatrix> = g.gens().iter().map(|x| x.scale((1.0 / scale).into())).collect();
    let dgens: Vec<ComplexMatrix> = gens.iter().enumerate().map(|(k, x)| input_shadow(x, k as u64)).collect();
    grow(seed, cfg, exec, AlgebraKind::Associative, move |space, frontier, exec| {
        let (b, db) = (space.basis(), space.shadows());
        let pairs: Vec<(usize, usize)> = frontier.iter().flat_map(|&f| (0..gens.len()).map(move |i| (i, f))).collect();
        exec.map(&pairs, |&(i, f)| {
            let m = &gens[i] * &b[f];
            Candidate {
                roundoff: g.dim() as f64 * f64::EPSILON * m.frobenius_norm(),
                shadow: &(&dgens[i] * &b[f]) + &(&gens[i] * &db[f]),
                m,
            }
        })
    })
}
