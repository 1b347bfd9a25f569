//! Report-producing adapters over the library, one per front-end subcommand.
//!
//! Each command takes a validated [`InstanceFile`] and returns a
//! [`CommandReport`]: a JSON payload plus a [`Status`] that maps onto the
//! process exit code. Library errors are folded into the report by class so
//! a front end never has to inspect prose to decide the outcome.

use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{associative_closure_with, jordan_closure_with, lie_closure, lie_from_jordan, lie_ideal_generated, AlgebraBasis};
use crate::error::{Error, ErrorClass, Result};
use crate::identities::{
    cartan_criterion, check_jordan_identities, check_norm_inequalities, check_trace_words_with, IdentityCheck, IdentityReport,
    TraceWordOptions,
};
use crate::instance::InstanceFile;
use crate::matrix::{trace, ComplexMatrix, ToleranceConfig, C64};
use crate::par::Execution;
use crate::spectral::{ad_riesz, adproj_formula, riesz_decomposition};
use crate::triangularize::{find_invariant_subspace, triangularize};

/// Outcome of a command, ordered by severity for aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    HypothesisViolation,
    ResidualFailure,
    InvalidInput,
}

impl Status {
    /// 0 pass, 2 hypothesis violation, 3 residual failure, 4 bad input.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::HypothesisViolation => 2,
            Status::ResidualFailure => 3,
            Status::InvalidInput => 4,
        }
    }

    fn of_error(e: &Error) -> Status {
        match e.class() {
            ErrorClass::Hypothesis => Status::HypothesisViolation,
            ErrorClass::Numerical => Status::ResidualFailure,
            ErrorClass::Input => Status::InvalidInput,
        }
    }

    fn of_identities(r: &IdentityReport) -> Status {
        if r.hypothesis_failed() {
            Status::HypothesisViolation
        } else if r.all_pass() {
            Status::Pass
        } else {
            Status::ResidualFailure
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandReport {
    pub command: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CommandReport {
    fn ok(command: &str, status: Status, result: Value) -> Self {
        CommandReport {
            command: command.into(),
            status,
            result,
            error: None,
            notes: vec![],
        }
    }

    fn from_result(command: &str, r: Result<CommandReport>) -> Self {
        r.unwrap_or_else(|e| CommandReport {
            command: command.into(),
            status: Status::of_error(&e),
            result: Value::Null,
            error: Some(e.to_string()),
            notes: vec![],
        })
    }

    fn identities(command: &str, r: IdentityReport) -> Result<Self> {
        let mut rep = CommandReport::ok(command, Status::of_identities(&r), serde_json::to_value(&r)?);
        rep.notes = r.notes;
        Ok(rep)
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Which closure `close` computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureKind {
    Jordan,
    Lie,
    Assoc,
}

/// Shared knobs for every command.
#[derive(Debug, Clone, Copy, Default)]
pub struct CommandOptions {
    pub tol: ToleranceConfig,
    pub seed: u64,
    pub execution: Execution,
    /// Also audit the trace pairing on the materialized ideal.
    pub ideal_pairing: bool,
}

fn closure_report(command: &str, a: &AlgebraBasis, opts: &CommandOptions) -> CommandReport {
    let residual = a.closure_residual();
    let threshold = opts.tol.residual_tol;
    let status = if residual <= threshold { Status::Pass } else { Status::ResidualFailure };
    CommandReport::ok(
        command,
        status,
        json!({
            "dim": a.dim(),
            "closure_residual": residual,
            "threshold": threshold,
            "algebra": a,
        }),
    )
}

pub fn cmd_close(inst: &InstanceFile, kind: ClosureKind, opts: &CommandOptions) -> CommandReport {
    CommandReport::from_result("close", (|| {
        let g = inst.generator_set()?;
        let a = match kind {
            ClosureKind::Jordan => jordan_closure_with(&g, &opts.tol, opts.execution)?,
            ClosureKind::Lie => lie_closure(&g, &opts.tol)?,
            ClosureKind::Assoc => associative_closure_with(&g, &opts.tol, opts.execution)?,
        };
        Ok(closure_report("close", &a, opts))
    })())
}

/// The Lie algebra `J + [J, J]` over the Jordan closure.
pub fn cmd_lie(inst: &InstanceFile, opts: &CommandOptions) -> CommandReport {
    CommandReport::from_result("lie", (|| {
        let j = jordan_closure_with(&inst.generator_set()?, &opts.tol, opts.execution)?;
        Ok(closure_report("lie", &lie_from_jordan(&j, &opts.tol)?, opts))
    })())
}

/// The Lie ideal generated by the Jordan closure inside `J + [J, J]`.
pub fn cmd_ideal(inst: &InstanceFile, opts: &CommandOptions) -> CommandReport {
    CommandReport::from_result("ideal", (|| {
        let j = jordan_closure_with(&inst.generator_set()?, &opts.tol, opts.execution)?;
        let l = lie_from_jordan(&j, &opts.tol)?;
        Ok(closure_report("ideal", &lie_ideal_generated(&l, j.basis(), &opts.tol)?, opts))
    })())
}

pub fn cmd_check_traces(inst: &InstanceFile, opts: &CommandOptions) -> CommandReport {
    CommandReport::from_result("check-traces", (|| {
        let j = jordan_closure_with(&inst.generator_set()?, &opts.tol, opts.execution)?;
        let topts = TraceWordOptions {
            seed: opts.seed,
            ideal_pairing: opts.ideal_pairing,
            execution: opts.execution,
            ..Default::default()
        };
        CommandReport::identities("check-traces", check_trace_words_with(&j, &opts.tol, &topts)?)
    })())
}

/// Word identities on generators taken cyclically, plus the norm
/// inequalities on the first two.
pub fn cmd_check_identities(inst: &InstanceFile, opts: &CommandOptions) -> CommandReport {
    CommandReport::from_result("check-identities", (|| {
        let g = &inst.generators;
        let at = |i: usize| &g[i % g.len()];
        let mut r = check_jordan_identities(at(0), at(1), at(2), at(3), &opts.tol)?;
        r.extend(check_norm_inequalities(at(0), at(1))?);
        CommandReport::identities("check-identities", r)
    })())
}

fn generator(inst: &InstanceFile, index: usize) -> Result<&ComplexMatrix> {
    inst.generators.get(index).ok_or_else(|| {
        Error::InvalidParameter(format!("generator index {index} out of range (have {})", inst.generators.len()))
    })
}

pub fn cmd_riesz(inst: &InstanceFile, index: usize, opts: &CommandOptions) -> CommandReport {
    CommandReport::from_result("riesz", (|| {
        let a = generator(inst, index)?;
        let dec = riesz_decomposition(a, &opts.tol)?;
        let residual = dec.invariant_residual(a);
        let threshold = opts.tol.residual_tol;
        let status = if residual <= threshold { Status::Pass } else { Status::ResidualFailure };
        Ok(CommandReport::ok(
            "riesz",
            status,
            json!({"clusters": dec, "residual": residual, "threshold": threshold}),
        ))
    })())
}

/// Compares the Riesz projection of `ad(A)` at `λ` with the sum over
/// eigenvalue pairs of `A`; the threshold is `10 residual_tol n^2`.
pub fn cmd_adproj(inst: &InstanceFile, index: usize, lambda: C64, opts: &CommandOptions) -> CommandReport {
    CommandReport::from_result("adproj", (|| {
        let a = generator(inst, index)?;
        let lhs = ad_riesz(a, lambda, &opts.tol)?;
        let rhs = adproj_formula(a, lambda, &opts.tol)?;
        let n = a.dim() as f64;
        let check = IdentityCheck::new(
            format!("riesz(ad A, {lambda}) = sum of P_a (.) P_b over a - b = {lambda}"),
            (&lhs - &rhs).op_norm(),
            10.0 * opts.tol.residual_tol * n * n,
        );
        CommandReport::identities(
            "adproj",
            IdentityReport {
                checks: vec![check],
                notes: vec![],
            },
        )
    })())
}

/// Cartan audit on the Lie closure of the generators, plus the trace
/// identity for the `T` operator of each generator.
pub fn cmd_cartan(inst: &InstanceFile, opts: &CommandOptions) -> CommandReport {
    CommandReport::from_result("cartan", (|| {
        let l = lie_closure(&inst.generator_set()?, &opts.tol)?;
        let mut r = cartan_criterion(&l, &opts.tol)?;
        for (i, a) in inst.generators.iter().enumerate() {
            r.checks.push(cartan_trace_check(i, a, &opts.tol)?);
        }
        CommandReport::identities("cartan", r)
    })())
}

/// `|tr(T A) - Σ mult |λ|^2|` relative to `1 + ||A||_F^2`.
pub fn cartan_trace_check(index: usize, a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<IdentityCheck> {
    let t = crate::identities::cartan_t(a, tol)?;
    let dec = riesz_decomposition(a, tol)?;
    let expected: f64 = dec.clusters.iter().map(|c| c.multiplicity as f64 * c.lambda.norm_sqr()).sum();
    let dev = (trace(&(&t * a)) - C64::new(expected, 0.0)).norm();
    let f = a.frobenius_norm();
    Ok(IdentityCheck::new(
        format!("tr(T A) = sum mult |lambda|^2, generator {index}"),
        dev / (1.0 + f * f),
        tol.residual_tol,
    ))
}

pub fn cmd_triangularize(inst: &InstanceFile, opts: &CommandOptions) -> CommandReport {
    CommandReport::from_result("triangularize", (|| {
        let cert = triangularize(&inst.generator_set()?, &opts.tol)?;
        let mut rep = CommandReport::ok("triangularize", Status::Pass, serde_json::to_value(&cert)?);
        if let Some(oracle) = inst.hidden_oracle_residual() {
            rep.notes.push(format!("hidden conjugator residual {oracle:.3e}"));
        }
        Ok(rep)
    })())
}

pub fn cmd_reduce(inst: &InstanceFile, opts: &CommandOptions) -> CommandReport {
    CommandReport::from_result("reduce", (|| {
        let r = find_invariant_subspace(&inst.generator_set()?, &opts.tol)?;
        Ok(CommandReport::ok("reduce", Status::Pass, serde_json::to_value(&r)?))
    })())
}

/// Every instance-level check, as ordered sections. Sections run
/// concurrently under a parallel strategy; order in the output is fixed.
/// The aggregate status is the most severe section status.
pub fn cmd_verify_all(inst: &InstanceFile, opts: &CommandOptions) -> CommandReport {
    type Section = fn(&InstanceFile, &CommandOptions) -> CommandReport;
    let sections: [(&str, Section); 7] = [
        ("jordan", |i, o| cmd_close(i, ClosureKind::Jordan, o)),
        ("lie", cmd_lie),
        ("check-traces", cmd_check_traces),
        ("check-identities", cmd_check_identities),
        ("cartan", cmd_cartan),
        ("triangularize", cmd_triangularize),
        ("reduce", cmd_reduce),
    ];
    let mut inner = *opts;
    inner.ideal_pairing = true;
    let reports = opts.execution.map(&sections, |(_, f)| f(inst, &inner));
    let status = reports.iter().map(|r| r.status).max().unwrap_or(Status::Pass);
    let body: serde_json::Map<String, Value> = sections
        .iter()
        .zip(&reports)
        .map(|((name, _), r)| (name.to_string(), serde_json::to_value(r).expect("reports serialize")))
        .collect();
    CommandReport::ok("verify-all", status, Value::Object(body))
}
