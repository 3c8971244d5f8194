//! Scenario files: tagged JSON records converted to core types.

use anyhow::{anyhow, bail, Context, Result};
use num_rational::BigRational;
use serde::Deserialize;
use std::collections::BTreeMap;
use torsion_core::conditions::{Config, Witness};
use torsion_core::expansion::{extract_digits, Clause, DigitStream, ValueRule};
use torsion_core::ideals::{rat, wave, Nested};
use torsion_core::verifier::VerifyParams;
use torsion_core::{IdealSpec, IndexRule, NestedPair, RatioSequence, Rule, Schedule, SymbolicSet, Truth, Weights};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    /// Named sets, usable anywhere as `{"form": "ref", "name": …}`.
    #[serde(default)]
    pub sets: BTreeMap<String, SetSpec>,
    pub ratio: RatioSpec,
    pub digits: DigitSpec,
    pub ideal: IdealRecord,
    #[serde(default)]
    pub witnesses: Vec<WitnessSpec>,
    #[serde(default)]
    pub partition: Option<PartitionSpec>,
    /// Indices excluded from the declared digit-ratio limit.
    #[serde(default)]
    pub declared_limit: Option<SetSpec>,
    #[serde(default = "all_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub expect: Option<ExpectSpec>,
    #[serde(default)]
    pub parameters: Parameters,
}

fn all_checks() -> Vec<Check> {
    vec![Check::All]
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Conditions,
    Decide,
    Verify,
    All,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Empty,
    Naturals,
    Positives,
    Odds,
    Evens,
    Squares,
    Finite { members: Vec<u64> },
    Cofinite { excluded: Vec<u64> },
    Range { from: u64, to: u64 },
    Residue { modulus: u64, residues: Vec<u64> },
    /// `{a·i² + b·i + c : i ≥ from}`.
    Points { rule: IndexRule, #[serde(default)] from: u64 },
    /// `⋃_{i ≥ from} [left(i), right(i)]` after the explicit head blocks.
    IntervalUnion {
        #[serde(default)]
        head: Vec<(u64, u64)>,
        left: IndexRule,
        right: IndexRule,
        #[serde(default)]
        from: u64,
    },
    /// Built-in families: `wave_w`, `wave_z`, `wave_blocks`, `alternate_square_blocks`.
    Builtin { name: String },
    Union { of: Vec<SetSpec> },
    Intersect { of: Vec<SetSpec> },
    Diff { left: Box<SetSpec>, right: Box<SetSpec> },
    Complement { of: Box<SetSpec> },
    Shift { of: Box<SetSpec>, by: i64 },
    Ref { name: String },
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    Const { b: u64 },
    Linear { a: u64, c: i64 },
    Pow2,
}

impl From<RuleSpec> for Rule {
    fn from(r: RuleSpec) -> Rule {
        match r {
            RuleSpec::Const { b } => Rule::Const(b),
            RuleSpec::Linear { a, c } => Rule::linear(a, c),
            RuleSpec::Pow2 => Rule::Pow2,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RatioSpec {
    Constant { b: u64 },
    /// `b_n = n + 1`.
    Affine,
    Piecewise { set: SetSpec, on: RuleSpec, off: RuleSpec },
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValueSpec {
    Constant { c: u64 },
    BMinus { k: u64 },
    FloorHalf,
}

impl From<ValueSpec> for ValueRule {
    fn from(v: ValueSpec) -> ValueRule {
        match v {
            ValueSpec::Constant { c } => ValueRule::Constant(c),
            ValueSpec::BMinus { k } => ValueRule::BMinus(k),
            ValueSpec::FloorHalf => ValueRule::FloorHalf,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClauseSpec {
    pub set: SetSpec,
    pub value: ValueSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DigitSpec {
    /// First matching clause wins; other indices carry 0.
    Pattern { clauses: Vec<ClauseSpec> },
    /// Greedy digits of a rational `x ∈ [0, 1)`.
    Rational { x: String, #[serde(default = "default_extract")] extract: u64 },
    /// Known digits `c_1 … c_k`; nothing is known past them.
    Prefix { digits: Vec<u64> },
    /// A base stream with one clause overriding it.
    Patched { base: Box<DigitSpec>, patch: ClauseSpec },
}

fn default_extract() -> u64 {
    64
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum IdealRecord {
    Fin {
        #[serde(default)]
        declared_flags: Option<FlagSpec>,
    },
    /// Zero sets of upper density of order `alpha`; `alpha = 1` is the density ideal.
    Density {
        alpha: String,
        #[serde(default)]
        declared_flags: Option<FlagSpec>,
    },
    Summable {
        weights: WeightSpec,
        #[serde(default)]
        declared_flags: Option<FlagSpec>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Harmonic,
    InverseFactorial,
    Wave { q: String },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagSpec {
    pub translation_invariant: Option<bool>,
    pub p_ideal: Option<bool>,
    pub nested: Option<bool>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    pub label: String,
    pub set: SetSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub bounded: SetSpec,
    pub divergent: SetSpec,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectSpec {
    /// `In`, `NotIn` or `Unknown`.
    pub decision: Option<String>,
    pub rule: Option<String>,
    #[serde(default)]
    pub conditions: BTreeMap<String, Truth>,
    /// `CONSISTENT`, `INCONCLUSIVE` or `CONTRADICTION`.
    pub verification: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub epsilons: Option<Vec<String>>,
    pub horizons: Option<Vec<u64>>,
    pub window: Option<u64>,
    pub budget: Option<u64>,
    pub resolution: Option<String>,
    /// Checkpoints for membership trails.
    pub checkpoints: Option<Vec<u64>>,
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    s.trim().parse::<BigRational>().map_err(|e| anyhow!("`{s}` is not a rational: {e}"))
}

impl Scenario {
    /// Parses JSON, reporting line and column on failure.
    pub fn from_json(text: &str) -> Result<Scenario> {
        let sc: Scenario = serde_json::from_str(text).map_err(|e| anyhow!("{e}"))?;
        if sc.schema_version != SCHEMA_VERSION {
            bail!("schema_version {} is not supported (expected {SCHEMA_VERSION})", sc.schema_version);
        }
        Ok(sc)
    }

    pub fn load(path: &std::path::Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Scenario::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn wants(&self, c: Check) -> bool {
        self.checks.contains(&c) || self.checks.contains(&Check::All)
    }
}

/// Resolves set references against the scenario's named sets.
pub struct Resolver<'a> {
    named: &'a BTreeMap<String, SetSpec>,
}

impl<'a> Resolver<'a> {
    pub fn new(named: &'a BTreeMap<String, SetSpec>) -> Self {
        Resolver { named }
    }

    pub fn set(&self, spec: &SetSpec) -> Result<SymbolicSet> {
        self.set_depth(spec, 0)
    }

    fn set_depth(&self, spec: &SetSpec, depth: usize) -> Result<SymbolicSet> {
        if depth > 64 {
            bail!("set references nest too deeply (cycle?)");
        }
        let go = |s: &SetSpec| self.set_depth(s, depth + 1);
        let fold = |of: &[SetSpec], f: fn(&SymbolicSet, &SymbolicSet) -> SymbolicSet| -> Result<SymbolicSet> {
            let mut it = of.iter();
            let first = go(it.next().ok_or_else(|| anyhow!("empty set list"))?)?;
            it.try_fold(first, |acc, s| Ok(f(&acc, &go(s)?)))
        };
        Ok(match spec {
            SetSpec::Empty => SymbolicSet::empty(),
            SetSpec::Naturals => SymbolicSet::naturals(),
            SetSpec::Positives => SymbolicSet::positives(),
            SetSpec::Odds => SymbolicSet::odds(),
            SetSpec::Evens => SymbolicSet::evens(),
            SetSpec::Squares => SymbolicSet::squares(),
            SetSpec::Finite { members } => SymbolicSet::finite(members.iter().copied()),
            SetSpec::Cofinite { excluded } => SymbolicSet::cofinite(excluded.iter().copied()),
            SetSpec::Range { from, to } => SymbolicSet::range(*from, *to),
            SetSpec::Residue { modulus, residues } => SymbolicSet::residue(*modulus, residues.iter().copied())?,
            SetSpec::Points { rule, from } => SymbolicSet::points(*rule, *from)?,
            SetSpec::IntervalUnion { head, left, right, from } => {
                SymbolicSet::interval_union(head.clone(), *left, *right, *from)?
            }
            SetSpec::Builtin { name } => builtin_set(name)?,
            SetSpec::Union { of } => fold(of, SymbolicSet::union)?,
            SetSpec::Intersect { of } => fold(of, SymbolicSet::intersect)?,
            SetSpec::Diff { left, right } => go(left)?.diff(&go(right)?),
            SetSpec::Complement { of } => go(of)?.complement(),
            SetSpec::Shift { of, by } => go(of)?.shift(*by),
            SetSpec::Ref { name } => {
                let target = self.named.get(name).ok_or_else(|| anyhow!("unresolved set reference `{name}`"))?;
                go(target)?
            }
        }
        .simplified())
    }

    pub fn ratio(&self, spec: &RatioSpec) -> Result<RatioSequence> {
        Ok(match spec {
            RatioSpec::Constant { b } => RatioSequence::constant(*b)?,
            RatioSpec::Affine => RatioSequence::affine(),
            RatioSpec::Piecewise { set, on, off } => RatioSequence::piecewise(self.set(set)?, (*on).into(), (*off).into())?,
        })
    }

    pub fn digits(&self, spec: &DigitSpec, ratio: &RatioSequence) -> Result<DigitStream> {
        Ok(match spec {
            DigitSpec::Pattern { clauses } => {
                let cs = clauses.iter().map(|c| self.clause(c)).collect::<Result<Vec<_>>>()?;
                DigitStream::pattern(ratio, cs)?
            }
            DigitSpec::Rational { x, extract } => extract_digits(&parse_rational(x)?, ratio, *extract)?,
            DigitSpec::Prefix { digits } => DigitStream::opaque(ratio, digits.clone())?,
            DigitSpec::Patched { base, patch } => self.digits(base, ratio)?.modified(self.clause(patch)?)?,
        })
    }

    fn clause(&self, c: &ClauseSpec) -> Result<Clause> {
        Ok(Clause::new(self.set(&c.set)?, c.value.into()))
    }
}

pub fn builtin_set(name: &str) -> Result<SymbolicSet> {
    Ok(match name {
        "wave_w" => wave::w_set(),
        "wave_z" => wave::z_set(),
        "wave_blocks" => torsion_core::catalog::wave_blocks(),
        "alternate_square_blocks" => torsion_core::catalog::nowc_support(),
        _ => bail!("unknown built-in set `{name}`"),
    })
}

pub fn ideal(rec: &IdealRecord) -> Result<IdealSpec> {
    let (mut spec, flags) = match rec {
        IdealRecord::Fin { declared_flags } => (IdealSpec::fin(), declared_flags),
        IdealRecord::Density { alpha, declared_flags } => (IdealSpec::density(parse_rational(alpha)?)?, declared_flags),
        IdealRecord::Summable { weights, declared_flags } => {
            let s = match weights {
                WeightSpec::Harmonic => IdealSpec::summable(Weights::Harmonic),
                WeightSpec::InverseFactorial => IdealSpec::summable(Weights::InverseFactorial),
                WeightSpec::Wave { q } => IdealSpec::wave_gamma(parse_rational(q)?)?,
            };
            (s, declared_flags)
        }
    };
    if let Some(f) = flags {
        if let Some(t) = f.translation_invariant {
            spec.flags.translation_invariant = t;
        }
        if let Some(p) = f.p_ideal {
            spec.flags.p_ideal = p;
        }
        match f.nested {
            Some(true) => spec.flags.nested = Nested::Yes,
            Some(false) if spec.flags.nested == Nested::Yes => spec.flags.nested = Nested::Undeclared,
            _ => {}
        }
    }
    Ok(spec)
}

/// `fin`, `d`, `density:α`, `harmonic`, `inverse-factorial` or `wave:q`.
pub fn ideal_shorthand(s: &str) -> Result<IdealSpec> {
    let (head, arg) = s.split_once(':').map_or((s, None), |(h, a)| (h, Some(a)));
    Ok(match (head, arg) {
        ("fin", None) => IdealSpec::fin(),
        ("d", None) => IdealSpec::density_zero(),
        ("density", Some(a)) => IdealSpec::density(parse_rational(a)?)?,
        ("harmonic", None) => IdealSpec::summable(Weights::Harmonic),
        ("inverse-factorial", None) => IdealSpec::summable(Weights::InverseFactorial),
        ("wave", Some(q)) => IdealSpec::wave_gamma(parse_rational(q)?)?,
        _ => bail!("unknown ideal `{s}`; try fin, d, density:1/2, harmonic, inverse-factorial or wave:3/5"),
    })
}

/// `wave`, or `a,b,c/a,b,c[@from]` for left and right index rules.
pub fn pair_shorthand(s: &str) -> Result<NestedPair> {
    if s == "wave" {
        return Ok(wave::pair());
    }
    let (rules, from) = s.split_once('@').map_or((s, "0"), |(r, f)| (r, f));
    let (l, r) = rules.split_once('/').ok_or_else(|| anyhow!("pair `{s}` needs the form a,b,c/a,b,c[@from]"))?;
    let rule = |t: &str| -> Result<IndexRule> {
        let v: Vec<i64> = t.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>()?;
        match v[..] {
            [a, b, c] => Ok(IndexRule::new(a, b, c)),
            _ => bail!("index rule `{t}` needs three coefficients"),
        }
    };
    Ok(NestedPair::new(rule(l)?, rule(r)?, from.trim().parse()?))
}

/// Integer `b` for a constant ratio, `affine`, or a JSON ratio record.
pub fn ratio_shorthand(s: &str) -> Result<RatioSequence> {
    if let Ok(b) = s.trim().parse::<u64>() {
        return Ok(RatioSequence::constant(b)?);
    }
    if s.trim() == "affine" {
        return Ok(RatioSequence::affine());
    }
    let spec: RatioSpec = serde_json::from_str(s).map_err(|e| anyhow!("ratio `{s}`: {e}"))?;
    Resolver::new(&BTreeMap::new()).ratio(&spec)
}

/// Everything a run needs, with references resolved.
pub struct Built {
    pub context: torsion_core::TorsionContext,
    pub verify: VerifyParams,
}

impl Scenario {
    pub fn build(&self, budget: Option<u64>, resolution: Option<&str>) -> Result<Built> {
        let res = Resolver::new(&self.sets);
        let ratio = res.ratio(&self.ratio)?;
        let digits = res.digits(&self.digits, &ratio)?;
        let ideal = ideal(&self.ideal)?;
        let p = &self.parameters;
        let mut config = Config::default();
        if let Some(w) = p.window {
            config.window = w;
        }
        if let Some(c) = &p.checkpoints {
            if c.is_empty() {
                bail!("parameters.checkpoints is empty");
            }
            config.schedule = Schedule::new(c.clone());
        }
        let mut ctx = torsion_core::TorsionContext::new(digits, ideal, config);
        let witnesses = self.witnesses.iter().map(|w| Ok(Witness::user(&w.label, res.set(&w.set)?))).collect::<Result<Vec<_>>>()?;
        ctx = ctx.with_witnesses(witnesses);
        if let Some(pt) = &self.partition {
            ctx = ctx.with_partition(res.set(&pt.bounded)?, res.set(&pt.divergent)?);
        }
        if let Some(l) = &self.declared_limit {
            ctx = ctx.with_declared_limit(res.set(l)?);
        }
        let mut verify = VerifyParams::default();
        if let Some(e) = &p.epsilons {
            verify.epsilons = e.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
        }
        if let Some(h) = &p.horizons {
            verify.horizons = h.clone();
        }
        if let Some(b) = budget.or(p.budget) {
            verify.precision.budget = b;
        }
        if let Some(r) = resolution.or(p.resolution.as_deref()) {
            verify.precision.resolution = parse_rational(r)?;
        }
        check_ranges(&verify)?;
        Ok(Built { context: ctx, verify })
    }
}

fn check_ranges(v: &VerifyParams) -> Result<()> {
    let half = rat(1, 2);
    for e in &v.epsilons {
        if *e <= rat(0, 1) || *e > half {
            bail!("epsilon {e} must lie in (0, 1/2]");
        }
    }
    if v.horizons.iter().any(|&n| n == 0 || n > 1_000_000) {
        bail!("horizons must lie in [1, 10^6]");
    }
    if v.precision.resolution <= rat(0, 1) {
        bail!("resolution must be positive");
    }
    if v.precision.budget == 0 {
        bail!("budget must be positive");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "name": "t",
        "ratio": { "kind": "constant", "b": 2 },
        "digits": { "source": "pattern", "clauses": [] },
        "ideal": { "family": "fin" }
    }"#;

    #[test]
    fn minimal_scenario_defaults_to_all_checks() {
        let sc = Scenario::from_json(MINIMAL).unwrap();
        assert!(sc.wants(Check::Conditions) && sc.wants(Check::Verify));
        let built = sc.build(None, None).unwrap();
        assert_eq!(built.verify.horizons, VerifyParams::default().horizons);
    }

    #[test]
    fn refs_resolve_and_cycles_are_caught() {
        let mut named = BTreeMap::new();
        named.insert("a".to_string(), SetSpec::Union { of: vec![SetSpec::Odds, SetSpec::Finite { members: vec![4] }] });
        named.insert("loop".to_string(), SetSpec::Ref { name: "loop".into() });
        let r = Resolver::new(&named);
        let s = r.set(&SetSpec::Ref { name: "a".into() }).unwrap();
        assert_eq!(s.members_upto(6).unwrap(), vec![1, 3, 4, 5]);
        assert!(r.set(&SetSpec::Ref { name: "loop".into() }).is_err());
        assert!(r.set(&SetSpec::Ref { name: "missing".into() }).is_err());
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        for params in [r#"{"epsilons": ["3/4"]}"#, r#"{"horizons": [0]}"#, r#"{"resolution": "0"}"#] {
            let text = MINIMAL.replace("\"ideal\"", &format!("\"parameters\": {params}, \"ideal\""));
            assert!(Scenario::from_json(&text).unwrap().build(None, None).is_err(), "{params}");
        }
    }

    #[test]
    fn shorthands() {
        assert!(ideal_shorthand("density:1/2").is_ok());
        assert!(ideal_shorthand("wave:3/5").is_ok());
        assert!(ideal_shorthand("bogus").is_err());
        assert!(pair_shorthand("wave").is_ok());
        assert!(pair_shorthand("1,0,1/1,1,1@1").is_ok());
        assert!(ratio_shorthand("3").is_ok());
        assert!(ratio_shorthand("1").is_err());
        assert_eq!(parse_rational(" 2/4 ").unwrap(), BigRational::new(1.into(), 2.into()));
    }
}
