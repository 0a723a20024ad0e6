//! Rooted divergence-preserving branching bisimulation up to ≈Δ, and the
//! recursion-congruence pipeline built on it.
//!
//! For a symmetric relation B the closure B̂ is ≈Δ;B;≈Δ. B is an up-to
//! relation when every related pair (P, Q) satisfies
//!
//! * (U1) each step `P --a--> P'` is matched by `Q --a--> Q'` with `P' B̂ Q'`;
//! * (U2) each `P ⇒ P'' --(a)--> P'` is matched by `Q ⇒ Q'' --(a)--> Q'`
//!   with `P'' B̂ Q''` and `P' B̂ Q'`;
//! * (U3) each infinite τ-path from P is matched by an infinite τ-path from Q
//!   whose states are all B̂-related to states of the first path.
//!
//! Related pairs of an up-to relation are rooted-equivalent.

use serde::Serialize;

use crate::equivalence::{
    cx, gfp_dpbb, lasso_path, step_path, tau_closures, Checker, Condition, LassoCache, Verdict,
};
use crate::error::{CcsError, Result};
use crate::lts::{Lts, StateId, TAU};
use crate::partition::{Partition, Relation};
use crate::semantics::build_lts;
use crate::syntax::{is_x_closed, print, substitute1, Expr, VarName};
use crate::Limits;

/// A base relation B on a host LTS together with its closure B̂.
#[derive(Clone, Debug)]
pub struct UptoRelation {
    pub base: Relation,
    pub closure: Relation,
    pub partition: Partition,
}

impl UptoRelation {
    pub fn new(base: Relation, host: &Lts) -> Self {
        let partition = gfp_dpbb(host);
        let closure = closure_from_partition(&base, &partition);
        UptoRelation { base, closure, partition }
    }
}

fn closure_from_partition(b: &Relation, partition: &Partition) -> Relation {
    let k = partition.num_blocks();
    let mut block_pairs = vec![false; k * k];
    for (x, y) in b.pairs() {
        block_pairs[partition.block_of(x) * k + partition.block_of(y)] = true;
    }
    let n = b.size();
    let mut out = Relation::empty(n);
    for u in 0..n {
        for v in 0..n {
            if block_pairs[partition.block_of(u) * k + partition.block_of(v)] {
                out.insert(u, v);
            }
        }
    }
    out
}

/// ≈Δ;B;≈Δ with ≈Δ computed on `l`.
pub fn compose_closure(b: &Relation, l: &Lts) -> Relation {
    closure_from_partition(b, &gfp_dpbb(l))
}

/// Checks (U1), (U2) and (U3) for the symmetric relation `b` on `l`.
///
/// Exceeding the lasso cap is an error, never a pass.
pub fn verify_upto(b: &Relation, l: &Lts, limits: &Limits) -> Result<Verdict> {
    if !b.is_symmetric() {
        return Err(CcsError::Precondition("up-to relations must be symmetric".into()));
    }
    if b.size() != l.num_states() {
        return Err(CcsError::Relation(format!(
            "relation over {} states, LTS has {}",
            b.size(),
            l.num_states()
        )));
    }
    let conditions = vec![Condition::U1, Condition::U2, Condition::U3];
    let hat = compose_closure(b, l);
    let rel = |x: StateId, y: StateId| hat.contains(x, y);
    let pairs = b.pairs();
    let fail = |c| Ok(Verdict::fails(conditions.clone(), c));

    for &(p, q) in &pairs {
        for &(label, p1) in l.succ(p) {
            if !l.succ(q).iter().any(|&(l2, q1)| l2 == label && rel(p1, q1)) {
                return fail(cx(l, p, q, Condition::U1, step_path(l, p, label, p1)));
            }
        }
    }

    let closures = tau_closures(l);
    for &(p, q) in &pairs {
        for &p2 in &closures[p] {
            let candidates: Vec<StateId> = closures[q].iter().copied().filter(|&q2| rel(p2, q2)).collect();
            // the optional step omitted: P' = P''
            if candidates.is_empty() {
                let path = vec![l.state_name(p), l.state_name(p2)];
                return fail(cx(l, p, q, Condition::U2, path));
            }
            for &(label, p1) in l.succ(p2) {
                let matched = candidates.iter().any(|&q2| {
                    (label == TAU && rel(p1, q2))
                        || l.succ(q2).iter().any(|&(l2, q1)| l2 == label && rel(p1, q1))
                });
                if !matched {
                    let mut path = vec![l.state_name(p)];
                    path.extend(step_path(l, p2, label, p1));
                    return fail(cx(l, p, q, Condition::U2, path));
                }
            }
        }
    }

    let mut lassos = LassoCache::new(l, limits.lasso_cap);
    let mut lefts: Vec<StateId> = pairs.iter().map(|&(p, _)| p).collect();
    lefts.dedup();
    for p in lefts {
        let partners: Vec<StateId> = pairs.iter().filter(|&&(x, _)| x == p).map(|&(_, q)| q).collect();
        for (mask, lasso) in lassos.get(p)? {
            let targets = crate::equivalence::image(&hat, mask);
            if let Some(&q) = partners.iter().find(|&&q| !l.diverges_within(q, &targets)) {
                return fail(cx(l, p, q, Condition::U3, lasso_path(l, lasso)));
            }
        }
    }
    Ok(Verdict::holds(conditions))
}

/// The finite fragment of U_{E,F}: pairs `(G[rec X.E/X], G[rec X.F/X])` for
/// every G in a universe of X-closed expressions, closed under symmetry.
#[derive(Clone, Debug)]
pub struct Uef {
    pub e: Expr,
    pub f: Expr,
    pub var: VarName,
    pub universe: Vec<Expr>,
    pub host: Lts,
    pub pairs: Relation,
    /// Host states of `rec X.E` and `rec X.F`.
    pub roots: (StateId, StateId),
}

impl Uef {
    pub fn rec_e(&self) -> Expr {
        Expr::rec(self.var.as_str(), self.e.clone())
    }

    pub fn rec_f(&self) -> Expr {
        Expr::rec(self.var.as_str(), self.f.clone())
    }
}

/// Every expression reachable from X, E and F in the extended system.
fn initial_universe(e: &Expr, f: &Expr, x: &VarName, limits: &Limits) -> Result<Vec<Expr>> {
    let (l, _) = build_lts(&[Expr::Var(x.clone()), e.clone(), f.clone()], true, limits)?;
    Ok((0..l.num_states()).map(|s| l.expr(s).cloned().expect("expression state")).collect())
}

/// Adds extended successors of every member; returns whether it grew.
fn expand_universe(universe: &mut Vec<Expr>, limits: &Limits) -> Result<bool> {
    let (l, _) = build_lts(universe, true, limits)?;
    let before = universe.len();
    for s in 0..l.num_states() {
        let g = l.expr(s).expect("expression state");
        if !universe.contains(g) {
            universe.push(g.clone());
        }
    }
    Ok(universe.len() > before)
}

fn materialize(e: &Expr, f: &Expr, x: &VarName, universe: Vec<Expr>, limits: &Limits) -> Result<Uef> {
    let rec_e = Expr::rec(x.as_str(), e.clone());
    let rec_f = Expr::rec(x.as_str(), f.clone());
    let mut components = Vec::with_capacity(2 * universe.len());
    for g in &universe {
        components.push(substitute1(g, x, &rec_e));
        components.push(substitute1(g, x, &rec_f));
    }
    let (host, ids) = build_lts(&components, false, limits)?;
    let pairs: Vec<(StateId, StateId)> = ids.chunks(2).map(|c| (c[0], c[1])).collect();
    let relation = Relation::from_pairs(host.num_states(), &pairs, true);
    let roots = (
        host.state_of(&rec_e).expect("rec X.E is a component"),
        host.state_of(&rec_f).expect("rec X.F is a component"),
    );
    Ok(Uef { e: e.clone(), f: f.clone(), var: x.clone(), universe, host, pairs: relation, roots })
}

/// Builds U_{E,F}; requires `E ≃Δ F` as open terms.
pub fn build_uef(e: &Expr, f: &Expr, x: &VarName, checker: &Checker) -> Result<Uef> {
    let open = checker.check_open_rooted(e, f, x)?;
    if !open.result {
        return Err(CcsError::Precondition(format!(
            "`{}` and `{}` are not rooted-equivalent as open terms",
            print(e),
            print(f)
        )));
    }
    let universe = initial_universe(e, f, x, &checker.limits)?;
    materialize(e, f, x, universe, &checker.limits)
}

/// Outcome of the recursion-congruence pipeline for one pair.
#[derive(Clone, Debug, Serialize)]
pub struct RecConclusion {
    pub open_rooted: Verdict,
    /// Present when the precondition held and U_{E,F} was built.
    pub upto: Option<Verdict>,
    /// Independent check of `rec X.E ≃Δ rec X.F`.
    pub direct: Verdict,
    pub universe: Vec<String>,
    pub pairs: Vec<(String, String)>,
    pub expansions: usize,
}

impl RecConclusion {
    /// The up-to verdict, when computed, matches the direct check.
    pub fn agrees(&self) -> bool {
        self.upto.as_ref().is_none_or(|u| u.result == self.direct.result)
    }
}

/// Retries with an expanded universe when verification fails.
pub const DEFAULT_EXPANSIONS: usize = 3;

/// Checks `E ≃Δ F` (open), builds U_{E,F}, verifies it up to ≈Δ and
/// compares with a direct check of `rec X.E ≃Δ rec X.F`.
pub fn conclude_rec_congruence(e: &Expr, f: &Expr, x: &VarName, checker: &Checker) -> Result<RecConclusion> {
    for g in [e, f] {
        if !is_x_closed(g, x) {
            return Err(CcsError::NotXClosed { expr: print(g), var: x.to_string() });
        }
    }
    let open_rooted = checker.check_open_rooted(e, f, x)?;
    let direct = checker.check_rooted(&Expr::rec(x.as_str(), e.clone()), &Expr::rec(x.as_str(), f.clone()))?;
    if !open_rooted.result {
        return Ok(RecConclusion { open_rooted, upto: None, direct, universe: vec![], pairs: vec![], expansions: 0 });
    }
    let mut universe = initial_universe(e, f, x, &checker.limits)?;
    let mut expansions = 0;
    loop {
        let uef = materialize(e, f, x, universe.clone(), &checker.limits)?;
        let verdict = verify_upto(&uef.pairs, &uef.host, &checker.limits)?;
        if verdict.result || expansions == DEFAULT_EXPANSIONS || !expand_universe(&mut universe, &checker.limits)? {
            return Ok(RecConclusion {
                open_rooted,
                upto: Some(verdict),
                direct,
                universe: uef.universe.iter().map(print).collect(),
                pairs: uef.pairs.to_expr_pairs(&uef.host),
                expansions,
            });
        }
        expansions += 1;
    }
}
