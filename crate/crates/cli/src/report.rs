//! Running checks and assembling the machine report.

use crate::scenario::{Check, ExpectSpec, Scenario};
use anyhow::{bail, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use torsion_core::catalog::{self, BuiltIn};
use torsion_core::conditions::{splitting_report, SplittingReport};
use torsion_core::ideals::{nestedness_probe, wave, Flags, NestProbe};
use torsion_core::verifier::{run_verification, Consistency, VerificationReport, VerifyParams};
use torsion_core::{decide, evaluate_all, ConditionTable, Decision, Outcome, TorsionContext, Truth};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub mod exit {
    pub const OK: i32 = 0;
    pub const EXPECTATION_FAILED: i32 = 1;
    pub const UNDECIDED: i32 = 2;
    pub const CONTRADICTION: i32 = 3;
    pub const INPUT: i32 = 4;
}

#[derive(Clone, Debug, Serialize)]
pub struct ContextSummary {
    pub ratio: String,
    pub digits: String,
    pub ideal: String,
    pub ideal_flags: Flags,
    pub support: String,
    pub top_support: String,
    pub witnesses: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<(String, String)>,
}

impl ContextSummary {
    pub fn of(ctx: &TorsionContext) -> Self {
        ContextSummary {
            ratio: ctx.ratio.to_string(),
            digits: ctx.digits.describe(),
            ideal: ctx.ideal.label(),
            ideal_flags: ctx.ideal.flags.clone(),
            support: ctx.s.to_string(),
            top_support: ctx.s_b.to_string(),
            witnesses: ctx.witness_catalog.iter().map(|w| w.label.clone()).collect(),
            partition: ctx.partition.as_ref().map(|p| (p.bounded.to_string(), p.divergent.to_string())),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub check: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

impl Assertion {
    fn new(check: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Self {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        Assertion { check: check.into(), pass: expected == actual, expected, actual }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub generated_at: u64,
    pub scenario: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub context: ContextSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub splitting: Option<SplittingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nestedness: Option<NestProbe>,
    pub assertions: Vec<Assertion>,
    pub exit_code: i32,
    pub summary: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn now() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

struct Checks {
    conditions: bool,
    decide: bool,
    verify: bool,
}

fn execute(name: &str, ctx: &TorsionContext, which: Checks, params: &VerifyParams) -> Report {
    let conditions = which.conditions.then(|| evaluate_all(ctx));
    let splitting = match (&ctx.partition, which.conditions) {
        (Some(p), true) => splitting_report(ctx, &p.bounded, &p.divergent).ok(),
        _ => None,
    };
    let decision = which.decide.then(|| decide(ctx));
    let verification = which.verify.then(|| run_verification(ctx, params));
    Report {
        schema_version: REPORT_SCHEMA_VERSION,
        tool: format!("torsion {}", env!("CARGO_PKG_VERSION")),
        generated_at: now(),
        scenario: name.to_string(),
        title: None,
        context: ContextSummary::of(ctx),
        conditions,
        splitting,
        decision,
        verification,
        nestedness: None,
        assertions: Vec::new(),
        exit_code: exit::OK,
        summary: Vec::new(),
    }
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::In => "In",
        Outcome::NotIn => "NotIn",
        Outcome::Unknown => "Unknown",
    }
}

fn the_decision(r: &Report) -> Option<&Decision> {
    r.decision.as_ref().or(r.verification.as_ref().map(|v| &v.decision))
}

fn expectations(r: &mut Report, ctx: &TorsionContext, e: &ExpectSpec) {
    let decision = the_decision(r).cloned().unwrap_or_else(|| decide(ctx));
    if let Some(want) = &e.decision {
        r.assertions.push(Assertion::new("decision", want, outcome_name(decision.value)));
    }
    if let Some(want) = &e.rule {
        r.assertions.push(Assertion::new("rule", want, decision.rule.as_deref().unwrap_or("none")));
    }
    if !e.conditions.is_empty() {
        let table = r.conditions.clone().unwrap_or_else(|| evaluate_all(ctx));
        for (name, want) in &e.conditions {
            let actual = table.get(name).map_or("no such condition".to_string(), |v| v.value.to_string());
            r.assertions.push(Assertion::new(format!("condition {name}"), want, actual));
        }
    }
    if let (Some(want), Some(v)) = (&e.verification, &r.verification) {
        r.assertions.push(Assertion::new("verification", want, v.status));
    }
}

fn finish(mut r: Report, strict_conditions: bool) -> Report {
    let mut code = exit::OK;
    let mut undecided = false;
    if let Some(v) = &r.verification {
        if v.status == Consistency::Contradiction {
            code = exit::CONTRADICTION;
        }
        undecided |= v.status == Consistency::Inconclusive;
    }
    if let Some(d) = the_decision(&r) {
        undecided |= d.value == Outcome::Unknown;
    }
    if strict_conditions {
        if let Some(t) = &r.conditions {
            undecided |= any_unknown(t);
        }
    }
    if code == exit::OK && r.assertions.iter().any(|a| !a.pass) {
        code = exit::EXPECTATION_FAILED;
    }
    if code == exit::OK && undecided {
        code = exit::UNDECIDED;
    }
    r.exit_code = code;
    r.summary = summarize(&r);
    r
}

fn any_unknown(t: &ConditionTable) -> bool {
    ConditionTable::NAMES.iter().filter_map(|n| t.get(n)).any(|v| v.value == Truth::Unknown)
}

fn summarize(r: &Report) -> Vec<String> {
    let mut out = vec![format!("scenario {}: {} under {}", r.scenario, r.context.digits, r.context.ideal)];
    if let Some(t) = &r.title {
        out.push(t.clone());
    }
    if let Some(t) = &r.conditions {
        let row: Vec<String> = ConditionTable::NAMES
            .iter()
            .filter_map(|n| t.get(n).map(|v| format!("{n}={}", v.value)))
            .collect();
        out.push(format!("conditions: {}", row.join(" ")));
    }
    if let Some(s) = &r.splitting {
        out.push(format!("splitting: restricted {} / direct {}", s.restricted_value, s.direct_value));
    }
    if let Some(d) = the_decision(r) {
        out.push(format!("decision: {} ({})", outcome_name(d.value), d.rule.as_deref().unwrap_or("no rule applies")));
    }
    if let Some(v) = &r.verification {
        out.push(format!("verification: {} ({})", v.status, v.reason));
    }
    if let Some(n) = &r.nestedness {
        out.push(format!("nestedness: {}", n.verdict));
    }
    for a in &r.assertions {
        let mark = if a.pass { "ok" } else { "FAILED" };
        out.push(format!("assert {}: expected {}, got {} [{mark}]", a.check, a.expected, a.actual));
    }
    out.push(format!("exit code {}", r.exit_code));
    out
}

pub fn run_scenario(sc: &Scenario, budget: Option<u64>, resolution: Option<&str>) -> Result<Report> {
    let built = sc.build(budget, resolution)?;
    let which = Checks { conditions: sc.wants(Check::Conditions), decide: sc.wants(Check::Decide), verify: sc.wants(Check::Verify) };
    // conditions alone are the headline only when nothing summarizes them
    let strict = which.conditions && !which.decide && !which.verify;
    let mut r = execute(&sc.name, &built.context, which, &built.verify);
    if let Some(e) = &sc.expect {
        expectations(&mut r, &built.context, e);
    }
    Ok(finish(r, strict))
}

pub fn reproduce(id: &str, params: &VerifyParams) -> Result<Report> {
    let Some(BuiltIn { id, title, context, expect }) = catalog::build(id) else {
        bail!("unknown example `{id}`; known: {}", catalog::ALL.join(", "));
    };
    let mut r = execute(id, &context, Checks { conditions: true, decide: true, verify: true }, params);
    r.title = Some(title.to_string());
    let spec = ExpectSpec {
        decision: Some(outcome_name(expect.decision).to_string()),
        rule: expect.rule.map(str::to_string),
        conditions: expect.conditions.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
        verification: None,
    };
    expectations(&mut r, &context, &spec);
    if let Some(v) = &r.verification {
        r.assertions.push(Assertion::new(
            "verification is not a contradiction",
            true,
            v.status != Consistency::Contradiction,
        ));
    }
    if id == "counterexample-wave" {
        let probe = nestedness_probe(&context.ideal, &[wave::pair()], 64);
        r.assertions.push(Assertion::new("nestedness probe", Truth::Fails, probe.verdict.value));
        r.assertions.push(Assertion::new("nestedness witness", true, probe.witness.is_some()));
        r.nestedness = Some(probe);
    }
    Ok(finish(r, false))
}
