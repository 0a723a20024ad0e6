//! Random expressions and transition systems, ≃Δ-preserving rewrites, and
//! the congruence campaigns.
//!
//! Everything is driven by explicit seeds: the same seed gives the same
//! expressions, the same rewrites and the same reports.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equivalence::Checker;
use crate::error::Result;
use crate::lts::{Label, Lts};
use crate::syntax::{canonical, print, substitute1, Action, Expr, VarName};

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub max_depth: usize,
    pub action_alphabet: Vec<Action>,
    /// Names used for `rec` binders.
    pub var_pool: Vec<VarName>,
    /// Variables that may occur free; empty means closed expressions.
    pub free_vars: Vec<VarName>,
    pub rec_probability: f64,
    pub choice_probability: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 4,
            action_alphabet: vec![Action::Tau, Action::visible("a"), Action::visible("b")],
            var_pool: vec![VarName::new("Y"), VarName::new("Z")],
            free_vars: vec![],
            rec_probability: 0.2,
            choice_probability: 0.35,
            seed: 0,
        }
    }
}

impl GenConfig {
    /// Expressions whose only free variable may be `x`.
    pub fn open_in(mut self, x: &VarName) -> Self {
        self.free_vars = vec![x.clone()];
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    fn validate(&self) {
        assert!(self.max_depth >= 1, "depth must be at least 1");
        assert!((0.0..=1.0).contains(&self.rec_probability));
        assert!((0.0..=1.0).contains(&self.choice_probability));
        assert!(!self.action_alphabet.is_empty());
    }
}

/// A deterministic generator seeded from `c.seed`.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_expr(c: &GenConfig) -> Expr {
    random_expr_with(&mut rng_for(c.seed), c)
}

pub fn random_expr_with<R: Rng>(rng: &mut R, c: &GenConfig) -> Expr {
    c.validate();
    let mut scope: Vec<VarName> = c.free_vars.clone();
    canonical(&gen(rng, c, c.max_depth, &mut scope))
}

fn gen<R: Rng>(rng: &mut R, c: &GenConfig, depth: usize, scope: &mut Vec<VarName>) -> Expr {
    let action = |rng: &mut R| c.action_alphabet.choose(rng).expect("nonempty alphabet").clone();
    if depth <= 1 {
        return match rng.gen_range(0..3) {
            0 => Expr::Nil,
            1 if !scope.is_empty() => Expr::Var(scope.choose(rng).expect("nonempty").clone()),
            _ => Expr::prefix(action(rng), Expr::Nil),
        };
    }
    let roll: f64 = rng.gen();
    if roll < c.rec_probability && !c.var_pool.is_empty() {
        let v = c.var_pool.choose(rng).expect("nonempty").clone();
        scope.push(v.clone());
        let body = gen(rng, c, depth - 1, scope);
        scope.pop();
        Expr::Rec(v, Box::new(body))
    } else if roll < c.rec_probability + c.choice_probability {
        let l = gen(rng, c, depth - 1, scope);
        let r = gen(rng, c, depth - 1, scope);
        Expr::choice(l, r)
    } else if roll < 0.95 {
        let a = action(rng);
        Expr::prefix(a, gen(rng, c, depth - 1, scope))
    } else {
        gen(rng, c, 1, scope)
    }
}

/// Shape of random transition systems.
#[derive(Clone, Debug)]
pub struct LtsConfig {
    pub max_states: usize,
    pub max_out_degree: usize,
    pub tau_probability: f64,
    pub visible: Vec<Action>,
}

impl Default for LtsConfig {
    fn default() -> Self {
        LtsConfig {
            max_states: 30,
            max_out_degree: 3,
            tau_probability: 0.4,
            visible: vec![Action::visible("a"), Action::visible("b")],
        }
    }
}

pub fn random_lts(seed: u64, c: &LtsConfig) -> Lts {
    let mut rng = rng_for(seed);
    let n = rng.gen_range(1..=c.max_states);
    let mut edges = Vec::new();
    for s in 0..n {
        for _ in 0..rng.gen_range(0..=c.max_out_degree) {
            let t = rng.gen_range(0..n);
            let label = if rng.gen_bool(c.tau_probability) {
                Label::tau()
            } else {
                Label::Act(c.visible.choose(&mut rng).expect("nonempty").clone())
            };
            edges.push((s, label, t));
        }
    }
    Lts::from_edges(n, &edges)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewriteRule {
    /// `rec X.E` to `E[rec X.E/X]`.
    RecUnfold,
    /// `E + F` to `F + E`.
    ChoiceComm,
    /// `(E + F) + G` to `E + (F + G)`.
    ChoiceAssoc,
    /// `E + 0` to `E`, or `E` to `E + 0`.
    ChoiceUnit,
    /// `E + E` to `E`, or `E` to `E + E`.
    ChoiceIdem,
    /// `a.tau.E` to `a.E`, or `a.E` to `a.tau.E`.
    TauLaw,
}

impl RewriteRule {
    pub const ALL: [RewriteRule; 6] = [
        RewriteRule::RecUnfold,
        RewriteRule::ChoiceComm,
        RewriteRule::ChoiceAssoc,
        RewriteRule::ChoiceUnit,
        RewriteRule::ChoiceIdem,
        RewriteRule::TauLaw,
    ];
}

/// One applied rewrite; `position` is the path from the root, 0 for the
/// left operand or body, 1 for the right operand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteStep {
    pub rule: RewriteRule,
    pub position: Vec<u8>,
}

fn positions(e: &Expr, here: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    out.push(here.clone());
    match e {
        Expr::Nil | Expr::Var(_) => {}
        Expr::Prefix(_, body) | Expr::Rec(_, body) => {
            here.push(0);
            positions(body, here, out);
            here.pop();
        }
        Expr::Choice(l, r) => {
            here.push(0);
            positions(l, here, out);
            here.pop();
            here.push(1);
            positions(r, here, out);
            here.pop();
        }
    }
}

fn at_mut<'a>(e: &'a mut Expr, position: &[u8]) -> &'a mut Expr {
    match (position.split_first(), e) {
        (None, e) => e,
        (Some((0, rest)), Expr::Prefix(_, body) | Expr::Rec(_, body)) => at_mut(body, rest),
        (Some((0, rest)), Expr::Choice(l, _)) => at_mut(l, rest),
        (Some((1, rest)), Expr::Choice(_, r)) => at_mut(r, rest),
        _ => panic!("invalid position"),
    }
}

/// Applies `rule` at the root of `e` if it matches; `grow` picks the
/// expanding direction of the two-way rules.
fn apply_rule(e: &Expr, rule: RewriteRule, grow: bool) -> Option<Expr> {
    match (rule, e) {
        (RewriteRule::RecUnfold, Expr::Rec(x, body)) => Some(substitute1(body, x, e)),
        (RewriteRule::ChoiceComm, Expr::Choice(l, r)) => Some(Expr::choice((**r).clone(), (**l).clone())),
        (RewriteRule::ChoiceAssoc, Expr::Choice(l, r)) => match &**l {
            Expr::Choice(a, b) => {
                Some(Expr::choice((**a).clone(), Expr::choice((**b).clone(), (**r).clone())))
            }
            _ => None,
        },
        (RewriteRule::ChoiceUnit, _) if grow => Some(Expr::choice(e.clone(), Expr::Nil)),
        (RewriteRule::ChoiceUnit, Expr::Choice(l, r)) if **r == Expr::Nil => Some((**l).clone()),
        (RewriteRule::ChoiceIdem, _) if grow => Some(Expr::choice(e.clone(), e.clone())),
        (RewriteRule::ChoiceIdem, Expr::Choice(l, r)) if l == r => Some((**l).clone()),
        (RewriteRule::TauLaw, Expr::Prefix(a, body)) if grow => {
            Some(Expr::prefix(a.clone(), Expr::tau((**body).clone())))
        }
        (RewriteRule::TauLaw, Expr::Prefix(a, body)) => match &**body {
            Expr::Prefix(Action::Tau, inner) => Some(Expr::prefix(a.clone(), (**inner).clone())),
            _ => None,
        },
        _ => None,
    }
}

/// Applies up to `steps` random ≃Δ-preserving rewrites.
pub fn equivalent_variant(e: &Expr, steps: usize, seed: u64) -> Expr {
    equivalent_variant_traced(e, steps, seed).0
}

pub fn equivalent_variant_traced(e: &Expr, steps: usize, seed: u64) -> (Expr, Vec<RewriteStep>) {
    let mut rng = rng_for(seed);
    let mut cur = e.clone();
    let mut trace = Vec::new();
    for _ in 0..steps {
        // unfolding can double the size; keep variants small
        let rules: Vec<RewriteRule> = RewriteRule::ALL
            .iter()
            .copied()
            .filter(|&r| r != RewriteRule::RecUnfold || cur.size() < 40)
            .collect();
        let mut all = Vec::new();
        positions(&cur, &mut Vec::new(), &mut all);
        for _attempt in 0..8 {
            let rule = *rules.choose(&mut rng).expect("rules");
            let pos = all.choose(&mut rng).expect("root position").clone();
            let grow = cur.size() < 30 && rng.gen_bool(0.5);
            let target = at_mut(&mut cur, &pos);
            if let Some(next) = apply_rule(target, rule, grow) {
                *target = next;
                trace.push(RewriteStep { rule, position: pos });
                break;
            }
        }
    }
    (canonical(&cur), trace)
}

/// One named assertion of a campaign case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub expected: bool,
    pub actual: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, expected: bool, actual: bool) -> Self {
        CheckResult { name: name.into(), expected, actual }
    }

    pub fn violated(&self) -> bool {
        self.expected != self.actual
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub index: usize,
    pub seed: u64,
    pub left: String,
    pub right: String,
    pub checks: Vec<CheckResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub micros: Option<u64>,
}

impl CaseReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().filter(|c| c.violated()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub campaign: String,
    pub seed: u64,
    pub controls: Vec<CaseReport>,
    pub cases: Vec<CaseReport>,
    pub violations: usize,
    pub errors: usize,
}

impl Report {
    fn assemble(campaign: &str, seed: u64, controls: Vec<CaseReport>, cases: Vec<CaseReport>) -> Self {
        let all = || controls.iter().chain(&cases);
        let violations = all().map(CaseReport::violations).sum();
        let errors = all().filter(|c| c.error.is_some()).count();
        Report { campaign: campaign.into(), seed, controls, cases, violations, errors }
    }

    pub fn ok(&self) -> bool {
        self.violations == 0 && self.errors == 0
    }

    /// The same report without timing fields.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for c in r.controls.iter_mut().chain(r.cases.iter_mut()) {
            c.micros = None;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Campaign settings shared by both campaigns.
#[derive(Clone, Debug)]
pub struct Campaign {
    pub cases: usize,
    pub config: GenConfig,
    pub checker: Checker,
    pub timings: bool,
    pub threads: usize,
}

impl Campaign {
    pub fn new(cases: usize, config: GenConfig) -> Self {
        let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
        Campaign { cases, config, checker: Checker::default(), timings: false, threads }
    }

    /// Seed of case `index`, derived from the campaign seed.
    pub fn case_seed(&self, index: usize) -> u64 {
        let mut z = self.config.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn run_cases<F>(&self, case: F) -> Vec<CaseReport>
    where
        F: Fn(usize, u64) -> CaseReport + Sync,
    {
        let timed = |i: usize| {
            let start = Instant::now();
            let mut r = case(i, self.case_seed(i));
            if self.timings {
                r.micros = Some(start.elapsed().as_micros() as u64);
            }
            r
        };
        let threads = self.threads.clamp(1, self.cases.max(1));
        let mut out: Vec<CaseReport> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let timed = &timed;
                    s.spawn(move || (t..self.cases).step_by(threads).map(timed).collect::<Vec<_>>())
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("campaign worker")).collect()
        });
        out.sort_by_key(|c| c.index);
        out
    }

    /// Compatibility of ≃Δ with prefix, both choice contexts and `rec`, on
    /// rooted-equivalent open pairs.
    pub fn congruence(&self) -> Report {
        let x = VarName::new("X");
        let controls = congruence_controls(&self.checker);
        let cases = self.run_cases(|index, seed| congruence_case(self, &x, index, seed));
        Report::assemble("congruence", self.config.seed, controls, cases)
    }

    /// `P ≃Δ Q` iff `P + a^(n+1) ≈Δ Q + a^(n+1)` with `n` the fresh depth.
    pub fn coarsest(&self) -> Report {
        let controls = coarsest_controls(&self.checker);
        let cases = self.run_cases(|index, seed| coarsest_case(self, index, seed));
        Report::assemble("coarsest", self.config.seed, controls, cases)
    }
}

pub fn congruence_campaign(n_cases: usize, c: &GenConfig) -> Report {
    Campaign::new(n_cases, c.clone()).congruence()
}

pub fn coarsest_campaign(n_cases: usize, c: &GenConfig) -> Report {
    Campaign::new(n_cases, c.clone()).coarsest()
}

fn parse_fixed(s: &str) -> Expr {
    crate::syntax::parse(s).expect("fixed expression")
}

fn case_with<F>(index: usize, seed: u64, left: &Expr, right: &Expr, body: F) -> CaseReport
where
    F: FnOnce(&mut Vec<CheckResult>) -> Result<()>,
{
    let mut checks = Vec::new();
    let error = body(&mut checks).err().map(|e| e.to_string());
    CaseReport { index, seed, left: print(left), right: print(right), checks, error, micros: None }
}

fn congruence_controls(checker: &Checker) -> Vec<CaseReport> {
    let x = VarName::new("X");
    let zero = Expr::Nil;
    let tau_zero = parse_fixed("tau.0");
    let first = case_with(0, 0, &zero, &tau_zero, |out| {
        out.push(CheckResult::new("dpbb", true, checker.check_dpbb(&zero, &tau_zero)?.result));
        out.push(CheckResult::new("rooted", false, checker.check_rooted(&zero, &tau_zero)?.result));
        let (l, r) = (parse_fixed("0 + a.0"), parse_fixed("tau.0 + a.0"));
        out.push(CheckResult::new("choice-context-dpbb", false, checker.check_dpbb(&l, &r)?.result));
        Ok(())
    });
    let (vx, tx) = (Expr::Var(x.clone()), parse_fixed("tau.X"));
    let second = case_with(1, 0, &vx, &tx, |out| {
        out.push(CheckResult::new("open-dpbb", true, checker.check_open_dpbb(&vx, &tx, &x)?.result));
        out.push(CheckResult::new("open-rooted", false, checker.check_open_rooted(&vx, &tx, &x)?.result));
        let (l, r) = (parse_fixed("a.X"), parse_fixed("a.tau.X"));
        out.push(CheckResult::new("prefix-open-rooted", true, checker.check_open_rooted(&l, &r, &x)?.result));
        let (l, r) = (parse_fixed("rec X. X"), parse_fixed("rec X. tau.X"));
        out.push(CheckResult::new("rec-rooted", false, checker.check_rooted(&l, &r)?.result));
        Ok(())
    });
    vec![first, second]
}

fn congruence_case(c: &Campaign, x: &VarName, index: usize, seed: u64) -> CaseReport {
    let mut rng = rng_for(seed);
    let config = c.config.clone().open_in(x);
    let e = random_expr_with(&mut rng, &config);
    let f = equivalent_variant(&e, rng.gen_range(1..=4), rng.gen());
    let h = random_expr_with(&mut rng, &config.clone().with_depth(config.max_depth.min(3)));
    let other = random_expr_with(&mut rng, &config);
    let alpha = config.action_alphabet.choose(&mut rng).expect("alphabet").clone();
    let checker = c.checker;
    case_with(index, seed, &e, &f, |out| {
        out.push(CheckResult::new("input-open-rooted", true, checker.check_open_rooted(&e, &f, x)?.result));
        let (pe, pf) = (Expr::prefix(alpha.clone(), e.clone()), Expr::prefix(alpha.clone(), f.clone()));
        out.push(CheckResult::new("prefix", true, checker.check_open_rooted(&pe, &pf, x)?.result));
        let (le, lf) = (Expr::choice(e.clone(), h.clone()), Expr::choice(f.clone(), h.clone()));
        out.push(CheckResult::new("choice-left", true, checker.check_open_rooted(&le, &lf, x)?.result));
        let (re, rf) = (Expr::choice(h.clone(), e.clone()), Expr::choice(h.clone(), f.clone()));
        out.push(CheckResult::new("choice-right", true, checker.check_open_rooted(&re, &rf, x)?.result));
        let (ce, cf) = (Expr::rec(x.as_str(), e.clone()), Expr::rec(x.as_str(), f.clone()));
        out.push(CheckResult::new("rec", true, checker.check_rooted(&ce, &cf)?.result));
        // inequivalence survives prefixing
        if !checker.check_open_dpbb(&e, &other, x)?.result {
            let po = Expr::prefix(alpha.clone(), other.clone());
            out.push(CheckResult::new("prefix-keeps-inequivalence", false, checker.check_open_dpbb(&pe, &po, x)?.result));
        }
        Ok(())
    })
}

fn coarsest_check(checker: &Checker, p: &Expr, q: &Expr, a: &Action, out: &mut Vec<CheckResult>) -> Result<()> {
    let rooted = checker.check_rooted(p, q)?.result;
    let n = checker.fresh_depth(&[p.clone(), q.clone()], a)?;
    let fresh = Expr::power(a, n + 1);
    let (pl, ql) = (Expr::choice(p.clone(), fresh.clone()), Expr::choice(q.clone(), fresh));
    out.push(CheckResult::new(format!("iff (n = {n})"), rooted, checker.check_dpbb(&pl, &ql)?.result));
    Ok(())
}

fn coarsest_controls(checker: &Checker) -> Vec<CaseReport> {
    let a = Action::visible("a");
    let (zero, tau_zero) = (Expr::Nil, parse_fixed("tau.0"));
    let first = case_with(0, 0, &zero, &tau_zero, |out| {
        out.push(CheckResult::new("fresh-depth-is-1", true, checker.fresh_depth(&[zero.clone(), tau_zero.clone()], &a)? == 1));
        out.push(CheckResult::new("rooted", false, checker.check_rooted(&zero, &tau_zero)?.result));
        coarsest_check(checker, &zero, &tau_zero, &a, out)
    });
    let p = parse_fixed("rec X. a.X + tau.b.0");
    let second = case_with(1, 0, &p, &p, |out| {
        out.push(CheckResult::new("rooted", true, checker.check_rooted(&p, &p)?.result));
        coarsest_check(checker, &p, &p, &a, out)
    });
    vec![first, second]
}

fn coarsest_case(c: &Campaign, index: usize, seed: u64) -> CaseReport {
    let mut rng = rng_for(seed);
    let mut config = c.config.clone();
    config.free_vars.clear();
    let p = random_expr_with(&mut rng, &config);
    let q = match rng.gen_range(0..4) {
        0 => random_expr_with(&mut rng, &config),
        1 => equivalent_variant(&p, rng.gen_range(1..=4), rng.gen()),
        // ≈Δ-related but usually not rooted
        2 => Expr::tau(equivalent_variant(&p, 2, rng.gen())),
        _ => Expr::choice(p.clone(), random_expr_with(&mut rng, &config.clone().with_depth(2))),
    };
    let a = config
        .action_alphabet
        .iter()
        .find(|a| !a.is_tau())
        .cloned()
        .unwrap_or_else(|| Action::visible("a"));
    case_with(index, seed, &p, &q, |out| coarsest_check(&c.checker, &p, &q, &a, out))
}
