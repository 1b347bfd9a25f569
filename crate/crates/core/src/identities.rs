//! Verifiers for matrix identities and inequalities.
//!
//! Every verifier returns an [`IdentityReport`]: a list of named checks, each
//! carrying a nonnegative residual, the threshold it is held to, and the
//! verdict `residual <= threshold`. Checks that audit a hypothesis rather
//! than a conclusion are flagged so callers can tell "the premise failed"
//! from "the claim failed".

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Serialize, Serializer};

use crate::algebra::{derived_algebra, lie_from_jordan, lie_ideal_generated, AlgebraBasis, AlgebraKind};
use crate::error::{Error, Result};
use crate::instance::ComplexNormal;
use crate::matrix::{
    check_same_dim, is_nilpotent, nilpotency_residual, schatten_norm, trace, ComplexMatrix, ToleranceConfig, C64,
};
use crate::par::Execution;
use crate::spectral::riesz_decomposition;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Set on checks that audit a premise rather than a conclusion.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub hypothesis: bool,
}

impl IdentityCheck {
    pub fn new(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        IdentityCheck {
            name: name.into(),
            residual,
            threshold,
            pass: residual <= threshold,
            hypothesis: false,
        }
    }

    fn premise(mut self) -> Self {
        self.hypothesis = true;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
    /// Free-form remarks for human-readable rendering.
    pub notes: Vec<String>,
}

impl IdentityReport {
    /// The entry with the largest residual (first on ties).
    pub fn worst(&self) -> Option<&IdentityCheck> {
        self.checks
            .iter()
            .fold(None, |acc: Option<&IdentityCheck>, c| match acc {
                Some(a) if a.residual >= c.residual => Some(a),
                _ => Some(c),
            })
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn hypothesis_failed(&self) -> bool {
        self.checks.iter().any(|c| c.hypothesis && !c.pass)
    }

    pub fn extend(&mut self, other: IdentityReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    /// Fixed-width table: name, residual, threshold, verdict.
    pub fn render_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut out = format!("{:<width$}  {:>12}  {:>12}  {}\n", "check", "residual", "threshold", "verdict");
        for c in &self.checks {
            let verdict = match (c.pass, c.hypothesis) {
                (true, _) => "pass",
                (false, true) => "HYPOTHESIS FAILS",
                (false, false) => "FAIL",
            };
            out += &format!("{:<width$}  {:>12.3e}  {:>12.3e}  {}\n", c.name, c.residual, c.threshold, verdict);
        }
        for n in &self.notes {
            out += &format!("note: {n}\n");
        }
        out
    }
}

impl Serialize for IdentityReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.checks.serialize(serializer)
    }
}

fn anti(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &(a * b) + &(b * a)
}

/// The four word identities behind the vanishing of word traces, each with residual
/// `||LHS - RHS||_F / (1 + m)^d`, `m` the largest input Frobenius norm and
/// `d` the identity's degree (3, 3, 6, 4).
pub fn check_jordan_identities(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<IdentityReport> {
    check_same_dim(a, b)?;
    check_same_dim(a, c)?;
    check_same_dim(a, d)?;
    let m = [a, b, c, d].iter().map(|x| x.frobenius_norm()).fold(0.0, f64::max);
    let rel = |lhs: ComplexMatrix, rhs: ComplexMatrix, degree: i32| (&lhs - &rhs).frobenius_norm() / (1.0 + m).powi(degree);
    let two = C64::new(2.0, 0.0);

    let aba = &(a * b) * a;
    let r1 = rel(aba.scale(two), &anti(&anti(a, b), a) - &anti(&(a * a), b), 3);

    let abc = &(a * b) * c;
    let cba = &(c * b) * a;
    let r2 = rel(
        (&abc + &cba).scale(two),
        &(&anti(c, &anti(b, a)) + &anti(a, &anti(b, c))) - &anti(b, &anti(c, a)),
        3,
    );

    let diff = &abc - &cba;
    let sum = &abc + &cba;
    let cross = &(&(&abc * c) * b) * a + &(&(&cba * a) * b) * c;
    let r3 = rel(&diff * &diff, &(&sum * &sum) - &cross.scale(two), 6);

    let lhs4 = &(&abc * d) + &(&(&(b * c) * d) * a);
    let rhs4 = &(&(&(&anti(a, b) * c) * d) + &(&(b * c) * &anti(a, d))) - &(&(b * &anti(a, c)) * d);
    let r4 = rel(lhs4, rhs4, 4);

    let t = cfg.residual_tol;
    Ok(IdentityReport {
        checks: vec![
            IdentityCheck::new("2ABA = {{A,B},A} - {A^2,B}", r1, t),
            IdentityCheck::new("2(ABC+CBA) = {C,{B,A}} + {A,{B,C}} - {B,{C,A}}", r2, t),
            IdentityCheck::new("(ABC-CBA)^2 = (ABC+CBA)^2 - 2(ABC^2BA + CBA^2BC)", r3, t),
            IdentityCheck::new("ABCD + BCDA = {A,B}CD + BC{A,D} - B{A,C}D", r4, t),
        ],
        notes: vec![],
    })
}

/// Options for [`check_trace_words_with`].
#[derive(Debug, Clone, Copy)]
pub struct TraceWordOptions {
    pub seed: u64,
    /// Bases up to this size are enumerated exhaustively.
    pub exhaustive_cap: usize,
    pub samples_per_length: usize,
    pub max_length: usize,
    /// Also materialize the Lie ideal generated by the algebra inside its
    /// Lie hull and audit the trace pairing on its basis.
    pub ideal_pairing: bool,
    pub execution: Execution,
}

impl Default for TraceWordOptions {
    fn default() -> Self {
        TraceWordOptions {
            seed: 0,
            exhaustive_cap: 6,
            samples_per_length: 10_000,
            max_length: 4,
            ideal_pairing: false,
            execution: Execution::default(),
        }
    }
}

/// `|tr(w)|` over words of length `1..=4` in the basis of a Jordan algebra
/// of nilpotent matrices. See [`check_trace_words_with`].
pub fn check_trace_words(j: &AlgebraBasis, cfg: &ToleranceConfig) -> Result<IdentityReport> {
    check_trace_words_with(j, cfg, &TraceWordOptions::default())
}

/// Refuses to run unless `j` is a Jordan algebra whose basis elements are
/// all nilpotent. Words are enumerated exhaustively for small bases and
/// sampled uniformly (seeded) otherwise. The basis is Frobenius-orthonormal,
/// so the threshold is `residual_tol * sqrt(n)`.
pub fn check_trace_words_with(j: &AlgebraBasis, cfg: &ToleranceConfig, opts: &TraceWordOptions) -> Result<IdentityReport> {
    if j.kind != AlgebraKind::Jordan {
        return Err(Error::InvalidParameter("trace-word audit needs a Jordan algebra".into()));
    }
    for (index, b) in j.basis().iter().enumerate() {
        if !is_nilpotent(b, cfg)? {
            return Err(Error::HypothesisViolation(format!(
                "basis element {index} is not nilpotent"
            )));
        }
    }
    let n = j.ambient_dim();
    let threshold = cfg.residual_tol * (n as f64).sqrt();
    let basis = j.basis();
    let size = basis.len();
    let mut report = IdentityReport::default();
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    for len in 1..=opts.max_length {
        let words: Vec<Vec<usize>> = if size == 0 {
            vec![]
        } else if size <= opts.exhaustive_cap {
            let total = size.pow(len as u32);
            (0..total)
                .map(|mut w| {
                    (0..len)
                        .map(|_| {
                            let d = w % size;
                            w /= size;
                            d
                        })
                        .collect()
                })
                .collect()
        } else {
            (0..opts.samples_per_length)
                .map(|_| (0..len).map(|_| rng.random_range(0..size)).collect())
                .collect()
        };
        let traces = opts.execution.map(&words, |w| {
            let mut p = basis[w[0]].clone();
            for &i in &w[1..] {
                p = &p * &basis[i];
            }
            trace(&p).norm()
        });
        let worst = traces.into_iter().fold(0.0, f64::max);
        let mode = if size <= opts.exhaustive_cap { "all" } else { "sampled" };
        report
            .checks
            .push(IdentityCheck::new(format!("|tr(word)|, length {len} ({mode})"), worst, threshold));
    }
    if opts.ideal_pairing {
        report.checks.push(check_ideal_trace_pairing(j, cfg)?);
    }
    Ok(report)
}

/// Materialize the Lie ideal generated by `j` inside `span(j + [j, j])` and
/// report `max |tr(B_i B_j)|` over its basis.
pub fn check_ideal_trace_pairing(j: &AlgebraBasis, cfg: &ToleranceConfig) -> Result<IdentityCheck> {
    let n = j.ambient_dim();
    let l = lie_from_jordan(j, cfg)?;
    let ideal = lie_ideal_generated(&l, j.basis(), cfg)?;
    let b = ideal.basis();
    let mut worst = 0.0f64;
    for x in 0..b.len() {
        for y in x..b.len() {
            worst = worst.max(trace(&(&b[x] * &b[y])).norm());
        }
    }
    Ok(IdentityCheck::new(
        format!("|tr(B_i B_j)| on generated ideal (dim {})", b.len()),
        worst,
        cfg.residual_tol * (n as f64).sqrt(),
    ))
}

/// `T = Σ conj(λ) P_λ(A)` over the eigenvalue clusters of `A`.
///
/// Asserts that `T` commutes with `A` and that `tr(TA) = Σ mult |λ|^2`,
/// both relative to the scale of the projections.
pub fn cartan_t(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    let dec = riesz_decomposition(a, cfg)?;
    let n = a.dim();
    let mut t = ComplexMatrix::zeros(n);
    let mut expected = 0.0;
    let mut pscale = 0.0;
    for c in &dec.clusters {
        t = &t + &c.projection.scale(c.lambda.conj());
        expected += c.multiplicity as f64 * c.lambda.norm_sqr();
        pscale += c.projection.frobenius_norm();
    }
    let anorm = a.frobenius_norm();
    let scale = (1.0 + pscale) * (1.0 + anorm) * (1.0 + anorm);
    let commute = (&(&t * a) - &(a * &t)).frobenius_norm();
    if commute > cfg.residual_tol * scale {
        return Err(Error::Postcondition(format!("T does not commute with A (residual {commute:e})")));
    }
    let tr = trace(&(&t * a));
    let dev = (tr - C64::new(expected, 0.0)).norm();
    if dev > cfg.residual_tol * scale {
        return Err(Error::Postcondition(format!(
            "tr(TA) = {tr} differs from the sum of squared moduli {expected}"
        )));
    }
    Ok(t)
}

/// Random combinations audited per derived algebra, beyond its basis.
const CARTAN_SAMPLES: usize = 10;
const CARTAN_SEED: u64 = 0xca27;

/// Two-phase audit for a Lie algebra `L` of matrices.
///
/// Phase one checks the trace-form hypothesis `tr(B_i B_j) = 0` on the basis.
/// Phase two, run only if it holds, checks that every basis element of
/// `[L, L]` and ten seeded random combinations are nilpotent; its residual
/// is the largest power-decay statistic of those elements.
pub fn cartan_criterion(l: &AlgebraBasis, cfg: &ToleranceConfig) -> Result<IdentityReport> {
    if !matches!(l.kind, AlgebraKind::Lie | AlgebraKind::Ideal) {
        return Err(Error::InvalidParameter("Cartan audit needs a Lie algebra".into()));
    }
    let n = l.ambient_dim();
    let b = l.basis();
    let mut hyp = 0.0f64;
    for x in 0..b.len() {
        for y in x..b.len() {
            hyp = hyp.max(trace(&(&b[x] * &b[y])).norm());
        }
    }
    let threshold = cfg.residual_tol * (n as f64).sqrt();
    let premise = IdentityCheck::new("hypothesis: max |tr(B_i B_j)| on L", hyp, threshold).premise();
    let mut report = IdentityReport::default();
    let holds = premise.pass;
    report.checks.push(premise);
    if !holds {
        report
            .notes
            .push("hypothesis violated; conclusion about [L, L] not asserted".into());
        return Ok(report);
    }
    let d = derived_algebra(l, cfg)?;
    let mut elems: Vec<ComplexMatrix> = d.basis().to_vec();
    if d.dim() > 0 {
        let mut rng = ComplexNormal::new(CARTAN_SEED);
        for _ in 0..CARTAN_SAMPLES {
            let coeffs: Vec<C64> = (0..d.dim()).map(|_| rng.sample()).collect();
            elems.push(d.space.combine(&coeffs));
        }
    }
    let mut worst = 0.0f64;
    let mut all_nilpotent = true;
    for m in &elems {
        worst = worst.max(nilpotency_residual(m));
        all_nilpotent &= is_nilpotent(m, cfg)?;
    }
    let mut conclusion = IdentityCheck::new(
        format!("conclusion: [L,L] nilpotent (dim {}, {} elements)", d.dim(), elems.len()),
        worst,
        cfg.residual_tol,
    );
    // the spectral and power tests agree (else is_nilpotent errors), so the
    // verdict matches the residual
    debug_assert_eq!(conclusion.pass, all_nilpotent);
    conclusion.pass = all_nilpotent && conclusion.pass;
    report.checks.push(conclusion);
    Ok(report)
}

/// Trace-norm and Hölder inequalities for a pair `A`, `B`:
/// `||A|| <= ||A||_1`, `||AB||_1, ||BA||_1, ||AB||, ||BA|| <= ||B|| ||A||_1`
/// and `||AB||_1 <= ||A||_2 ||B||_2`. Residual is the violation
/// `max(0, LHS - RHS)`, held to `10 eps n max(1, RHS)`.
pub fn check_norm_inequalities(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<IdentityReport> {
    check_same_dim(a, b)?;
    let n = a.dim() as f64;
    let op = |m: &ComplexMatrix| schatten_norm(m, f64::INFINITY);
    let tr = |m: &ComplexMatrix| schatten_norm(m, 1.0);
    let hs = |m: &ComplexMatrix| schatten_norm(m, 2.0);
    let ab = a * b;
    let ba = b * a;
    let bound = op(b)? * tr(a)?;
    let rows: Vec<(&str, f64, f64)> = vec![
        ("||A|| <= ||A||_1", op(a)?, tr(a)?),
        ("||AB||_1 <= ||B|| ||A||_1", tr(&ab)?, bound),
        ("||BA||_1 <= ||B|| ||A||_1", tr(&ba)?, bound),
        ("||AB|| <= ||B|| ||A||_1", op(&ab)?, bound),
        ("||BA|| <= ||B|| ||A||_1", op(&ba)?, bound),
        ("||AB||_1 <= ||A||_2 ||B||_2", tr(&ab)?, hs(a)? * hs(b)?),
    ];
    Ok(IdentityReport {
        checks: rows
            .into_iter()
            .map(|(name, lhs, rhs)| IdentityCheck::new(name, (lhs - rhs).max(0.0), 10.0 * f64::EPSILON * n * rhs.max(1.0)))
            .collect(),
        notes: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{jordan_closure, lie_closure, GeneratorSet};
    use crate::subspace::matspan;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn e(n: usize, i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(n, i - 1, j - 1)
    }

    fn lie(n: usize, mats: Vec<ComplexMatrix>) -> AlgebraBasis {
        AlgebraBasis {
            space: matspan(n, &mats, &cfg()).unwrap(),
            kind: AlgebraKind::Lie,
            generation_log: vec![],
        }
    }

    #[test]
    fn jordan_identities_trivial_inputs() {
        let z = ComplexMatrix::zeros(3);
        let r = check_jordan_identities(&z, &z, &z, &z, &cfg()).unwrap();
        assert!(r.checks.iter().all(|c| c.residual == 0.0 && c.pass));
        let i = ComplexMatrix::identity(3);
        let r = check_jordan_identities(&i, &i, &i, &i, &cfg()).unwrap();
        assert!(r.checks.iter().all(|c| c.residual == 0.0));
        assert!(check_jordan_identities(&i, &i, &i, &ComplexMatrix::identity(2), &cfg()).is_err());
    }

    #[test]
    fn jordan_identities_random_quadruple() {
        let mut rng = ComplexNormal::new(42);
        let m: Vec<ComplexMatrix> = (0..4).map(|_| ComplexMatrix::from_dmatrix(rng.matrix(5)).unwrap()).collect();
        let r = check_jordan_identities(&m[0], &m[1], &m[2], &m[3], &cfg()).unwrap();
        assert_eq!(r.checks.len(), 4);
        for c in &r.checks {
            assert!(c.residual < 1e-12, "{}: {}", c.name, c.residual);
        }
    }

    #[test]
    fn trace_words_examples() {
        let g = GeneratorSet::new(vec![e(3, 1, 2), e(3, 2, 3), e(3, 1, 3)], "n3").unwrap();
        let j = jordan_closure(&g, &cfg()).unwrap();
        let r = check_trace_words(&j, &cfg()).unwrap();
        assert_eq!(r.checks.len(), 4);
        assert!(r.all_pass());
        assert!(r.checks.iter().all(|c| c.residual == 0.0));

        let j = jordan_closure(&GeneratorSet::new(vec![e(2, 1, 2)], "e12").unwrap(), &cfg()).unwrap();
        assert!(check_trace_words(&j, &cfg()).unwrap().all_pass());

        let opts = TraceWordOptions {
            ideal_pairing: true,
            ..Default::default()
        };
        let r = check_trace_words_with(&j, &cfg(), &opts).unwrap();
        assert_eq!(r.checks.len(), 5);
        assert!(r.all_pass());
    }

    #[test]
    fn trace_words_refuses_non_nilpotent() {
        let g = GeneratorSet::new(vec![e(2, 1, 2), e(2, 2, 1)], "sl").unwrap();
        let j = jordan_closure(&g, &cfg()).unwrap();
        assert!(matches!(check_trace_words(&j, &cfg()), Err(Error::HypothesisViolation(_))));
        // negative control: the trace identity genuinely fails here
        assert_eq!(trace(&(&e(2, 1, 2) * &e(2, 2, 1))), C64::new(1.0, 0.0));
    }

    #[test]
    fn cartan_t_examples() {
        let n = &e(3, 1, 2) + &e(3, 2, 3);
        assert!(cartan_t(&n, &cfg()).unwrap().max_abs() < 1e-14);

        let a = ComplexMatrix::diag(&[C64::new(1.0, 1.0), C64::new(0.0, 0.0)]).unwrap();
        let t = cartan_t(&a, &cfg()).unwrap();
        let want = ComplexMatrix::diag(&[C64::new(1.0, -1.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(t.approx_eq(&want, 1e-14));
        assert!((trace(&(&t * &a)) - C64::new(2.0, 0.0)).norm() < 1e-14);

        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 2.0]]).unwrap();
        let t = cartan_t(&a, &cfg()).unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 2.0]]).unwrap();
        assert!(t.approx_eq(&want, 1e-13));
        assert!((trace(&(&t * &a)) - C64::new(5.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn cartan_criterion_examples() {
        let l = lie(3, vec![e(3, 1, 2), e(3, 2, 3), e(3, 1, 3)]);
        let r = cartan_criterion(&l, &cfg()).unwrap();
        assert_eq!(r.checks.len(), 2);
        assert!(r.all_pass());

        let h = ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]).unwrap();
        let l = lie(2, vec![h, e(2, 1, 2), e(2, 2, 1)]);
        let r = cartan_criterion(&l, &cfg()).unwrap();
        assert_eq!(r.checks.len(), 1);
        assert!(r.hypothesis_failed());
        assert!(!r.notes.is_empty());

        let l = lie_closure(&GeneratorSet::new(vec![e(2, 1, 2)], "ab").unwrap(), &cfg()).unwrap();
        let r = cartan_criterion(&l, &cfg()).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.checks[1].residual, 0.0);
    }

    #[test]
    fn norm_inequality_examples() {
        let a = ComplexMatrix::diag(&[C64::new(3.0, 0.0), C64::new(4.0, 0.0)]).unwrap();
        let r = check_norm_inequalities(&a, &ComplexMatrix::identity(2)).unwrap();
        assert!(r.all_pass());
        let i = ComplexMatrix::identity(2);
        let r = check_norm_inequalities(&i, &i).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.checks[5].residual, 0.0);

        let mut rng = ComplexNormal::new(7);
        let a = ComplexMatrix::from_dmatrix(rng.matrix(8)).unwrap();
        let b = ComplexMatrix::from_dmatrix(rng.matrix(8)).unwrap();
        assert!(check_norm_inequalities(&a, &b).unwrap().all_pass());
    }

    #[test]
    fn report_shape() {
        let i = ComplexMatrix::identity(2);
        let r = check_norm_inequalities(&i, &i).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 6);
        assert!(v[0].get("hypothesis").is_none());
        assert_eq!(r.worst().unwrap().residual, 0.0);
        assert!(r.render_table().contains("pass"));
    }
}
