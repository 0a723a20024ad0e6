//! Divergence-preserving branching bisimilarity (≈Δ), its rooted variant
//! (≃Δ), and verifiers for the relational conditions that define them.
//!
//! Two independent deciders compute ≈Δ on a finite [`Lts`]:
//!
//! * [`gfp_dpbb`] removes pairs from the full relation until every remaining
//!   pair satisfies the transfer condition (T) and the one-step divergence
//!   condition (D″). It is the reference backend and can explain why a pair
//!   was removed.
//! * [`refine_dpbb`] is signature-based partition refinement. Each round first
//!   separates states that can diverge inside their block from those that
//!   cannot, then splits by branching signatures (the labelled block moves
//!   reachable through inert τ-steps).
//!
//! Both return normalized [`Partition`]s, so their results compare with `==`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CcsError, Result};
use crate::lts::{Lasso, LabelId, Lts, StateId, TAU};
use crate::partition::{Partition, PartitionJson, Relation};
use crate::semantics::build_lts;
use crate::syntax::{is_closed, is_x_closed, print, Action, Expr, VarName};
use crate::Limits;

/// The relational conditions the verifiers know about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    /// Transfer: steps are matched after related stuttering.
    T,
    /// Divergence preservation, for equivalences.
    D,
    /// Divergence matched by a path whose states are related to some state of
    /// the original path.
    Dprime,
    /// Divergence matched by a single τ-step into a related state.
    Dsecond,
    /// Root condition: initial steps matched by equally labelled single steps
    /// into ≈Δ-related states.
    R1R2,
    U1,
    U2,
    U3,
    /// Endpoint-related τ-paths stay inside the block.
    Stuttering,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Condition {
    type Err = CcsError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "T" => Condition::T,
            "D" => Condition::D,
            "Dprime" | "D'" => Condition::Dprime,
            "Dsecond" | "D''" => Condition::Dsecond,
            "R1R2" | "R" => Condition::R1R2,
            "U1" => Condition::U1,
            "U2" => Condition::U2,
            "U3" => Condition::U3,
            "Stuttering" => Condition::Stuttering,
            other => return Err(CcsError::Precondition(format!("unknown condition `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub pair: (String, String),
    pub condition: Condition,
    /// Offending step as `[source, label, target]`, or the states of an
    /// offending τ-path (a lasso repeats its junction at the end).
    pub path: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub result: bool,
    pub conditions: Vec<Condition>,
    pub counterexample: Option<Counterexample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<PartitionJson>,
}

impl Verdict {
    pub fn holds(conditions: Vec<Condition>) -> Self {
        Verdict { result: true, conditions, counterexample: None, witness: None }
    }

    pub fn fails(conditions: Vec<Condition>, counterexample: Counterexample) -> Self {
        Verdict { result: false, conditions, counterexample: Some(counterexample), witness: None }
    }

    pub fn with_witness(mut self, witness: PartitionJson) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdicts serialize")
    }
}

pub(crate) fn step_path(l: &Lts, s: StateId, label: LabelId, t: StateId) -> Vec<String> {
    vec![l.state_name(s), l.label(label).to_string(), l.state_name(t)]
}

pub(crate) fn lasso_path(l: &Lts, lasso: &Lasso) -> Vec<String> {
    let mut out: Vec<String> = lasso.states().map(|s| l.state_name(s)).collect();
    out.push(l.state_name(lasso.cycle[0]));
    out
}

pub(crate) fn cx(l: &Lts, p: StateId, q: StateId, condition: Condition, path: Vec<String>) -> Counterexample {
    Counterexample { pair: (l.state_name(p), l.state_name(q)), condition, path }
}

pub(crate) fn tau_closures(l: &Lts) -> Vec<Vec<StateId>> {
    (0..l.num_states()).map(|s| l.tau_closure(s)).collect()
}

/// A step of `p` that `q` cannot match in the sense of (T) with respect to
/// `related`: `q ⇒ q'' --(a)--> q'` with `p related q''` and
/// `p' related q'`.
pub(crate) fn unmatched_step(
    l: &Lts,
    closures: &[Vec<StateId>],
    related: impl Fn(StateId, StateId) -> bool,
    p: StateId,
    q: StateId,
) -> Option<(LabelId, StateId)> {
    l.succ(p)
        .iter()
        .find(|&&(label, p1)| {
            !closures[q].iter().any(|&q2| {
                related(p, q2)
                    && ((label == TAU && related(p1, q2))
                        || l.succ(q2).iter().any(|&(l2, q1)| l2 == label && related(p1, q1)))
            })
        })
        .copied()
}

/// States not related to any τ-successor of `q`.
fn unmatched_by_tau_successor(
    l: &Lts,
    related: impl Fn(StateId, StateId) -> bool,
    q: StateId,
) -> Vec<bool> {
    (0..l.num_states())
        .map(|s| !l.tau_succ(q).iter().any(|&q1| related(s, q1)))
        .collect()
}

struct GfpOutcome {
    partition: Partition,
    removed: HashMap<(StateId, StateId), Counterexample>,
}

fn gfp(l: &Lts, divergence: bool) -> GfpOutcome {
    let n = l.num_states();
    let closures = tau_closures(l);
    let may_diverge = l.diverges_in_blocks(&vec![0; n]);
    let mut rel = vec![true; n * n];
    let mut removed = HashMap::new();
    loop {
        let mut changed = false;
        for p in 0..n {
            for q in p + 1..n {
                if !rel[p * n + q] {
                    continue;
                }
                let related = |a: StateId, b: StateId| rel[a * n + b];
                let violation = |p: StateId, q: StateId| -> Option<Counterexample> {
                    if let Some((label, p1)) = unmatched_step(l, &closures, related, p, q) {
                        return Some(cx(l, p, q, Condition::T, step_path(l, p, label, p1)));
                    }
                    if divergence && may_diverge[p] {
                        let bad = unmatched_by_tau_successor(l, related, q);
                        if let Some(lasso) = l.find_lasso_within(p, &bad) {
                            return Some(cx(l, p, q, Condition::Dsecond, lasso_path(l, &lasso)));
                        }
                    }
                    None
                };
                if let Some(reason) = violation(p, q).or_else(|| violation(q, p)) {
                    rel[p * n + q] = false;
                    rel[q * n + p] = false;
                    removed.insert((p, q), reason);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut class = vec![usize::MAX; n];
    for a in 0..n {
        if class[a] == usize::MAX {
            for b in a..n {
                if rel[a * n + b] {
                    assert_eq!(class[b], usize::MAX, "greatest fixpoint is not transitive");
                    class[b] = a;
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            assert_eq!(rel[a * n + b], class[a] == class[b], "greatest fixpoint is not an equivalence");
        }
    }
    GfpOutcome { partition: Partition::from_keys(l, &class), removed }
}

/// ≈Δ as the greatest symmetric relation satisfying (T) and (D″).
pub fn gfp_dpbb(l: &Lts) -> Partition {
    gfp(l, true).partition
}

/// Divergence-blind branching bisimilarity: the greatest relation
/// satisfying (T).
pub fn branching_bisim(l: &Lts) -> Partition {
    gfp(l, false).partition
}

fn renumber<K: std::hash::Hash + Eq + Clone>(keys: &[K]) -> (Vec<usize>, usize) {
    let mut ids: HashMap<K, usize> = HashMap::new();
    let out = keys
        .iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.clone()).or_insert(next)
        })
        .collect();
    (out, ids.len())
}

/// Block moves of `s`: `(label, block)` for every `s ⇒ s' --label--> t`
/// where the τ-path stays in `s`'s block, excluding inert τ-steps.
fn signature(l: &Lts, block: &[usize], s: StateId) -> Vec<(LabelId, usize)> {
    let own = block[s];
    let inside: Vec<bool> = block.iter().map(|&b| b == own).collect();
    let reach = l.tau_reach(s, Some(&inside));
    let mut sig = Vec::new();
    for (u, _) in reach.iter().enumerate().filter(|(_, &r)| r) {
        for &(label, t) in l.succ(u) {
            if label == TAU && block[t] == own {
                continue;
            }
            sig.push((label, block[t]));
        }
    }
    sig.sort_unstable();
    sig.dedup();
    sig
}

/// ≈Δ by signature refinement with a divergence splitter.
pub fn refine_dpbb(l: &Lts) -> Partition {
    let n = l.num_states();
    let mut block = vec![0usize; n];
    let mut count = usize::from(n > 0);
    loop {
        let before = count;
        let div = l.diverges_in_blocks(&block);
        let keys: Vec<(usize, bool)> = block.iter().copied().zip(div).collect();
        (block, _) = renumber(&keys);
        let keys: Vec<(usize, Vec<(LabelId, usize)>)> =
            (0..n).map(|s| (block[s], signature(l, &block, s))).collect();
        (block, count) = renumber(&keys);
        if count == before {
            break;
        }
    }
    Partition::from_keys(l, &block)
}

/// Which ≈Δ decider a [`Checker`] uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Gfp,
    Refine,
}

/// Equivalence checks on expressions.
#[derive(Clone, Copy, Debug, Default)]
pub struct Checker {
    pub limits: Limits,
    pub backend: Backend,
}

impl Checker {
    pub fn new(limits: Limits) -> Self {
        Checker { limits, backend: Backend::default() }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn dpbb_partition(&self, l: &Lts) -> Partition {
        match self.backend {
            Backend::Gfp => gfp_dpbb(l),
            Backend::Refine => refine_dpbb(l),
        }
    }

    fn joint(&self, p: &Expr, q: &Expr, extended: bool) -> Result<(Lts, StateId, StateId)> {
        let (l, ids) = build_lts(&[p.clone(), q.clone()], extended, &self.limits)?;
        Ok((l, ids[0], ids[1]))
    }

    fn equivalence_verdict(&self, p: &Expr, q: &Expr, extended: bool, divergence: bool) -> Result<Verdict> {
        let (l, sp, sq) = self.joint(p, q, extended)?;
        let conditions =
            if divergence { vec![Condition::T, Condition::Dsecond] } else { vec![Condition::T] };
        let (partition, outcome) = match (divergence, self.backend) {
            (true, Backend::Refine) => (refine_dpbb(&l), None),
            _ => {
                let o = gfp(&l, divergence);
                (o.partition.clone(), Some(o))
            }
        };
        if partition.same_block(sp, sq) {
            return Ok(Verdict::holds(conditions).with_witness(partition.to_json(&l)));
        }
        let outcome = outcome.unwrap_or_else(|| gfp(&l, divergence));
        let reason = outcome
            .removed
            .get(&(sp.min(sq), sp.max(sq)))
            .cloned()
            .expect("every removed pair records its reason");
        Ok(Verdict::fails(conditions, reason))
    }

    fn rooted_verdict(&self, p: &Expr, q: &Expr, extended: bool) -> Result<Verdict> {
        let (l, sp, sq) = self.joint(p, q, extended)?;
        let partition = self.dpbb_partition(&l);
        Ok(match root_violation(&l, &partition, sp, sq) {
            None => Verdict::holds(vec![Condition::R1R2]).with_witness(partition.to_json(&l)),
            Some(c) => Verdict::fails(vec![Condition::R1R2], c),
        })
    }

    /// `p ≈Δ q` for closed `p`, `q`.
    pub fn check_dpbb(&self, p: &Expr, q: &Expr) -> Result<Verdict> {
        require_closed(p)?;
        require_closed(q)?;
        self.equivalence_verdict(p, q, false, true)
    }

    /// Divergence-blind branching bisimilarity of closed `p`, `q`.
    pub fn check_branching(&self, p: &Expr, q: &Expr) -> Result<Verdict> {
        require_closed(p)?;
        require_closed(q)?;
        self.equivalence_verdict(p, q, false, false)
    }

    /// `p ≃Δ q` for closed `p`, `q`.
    pub fn check_rooted(&self, p: &Expr, q: &Expr) -> Result<Verdict> {
        require_closed(p)?;
        require_closed(q)?;
        self.rooted_verdict(p, q, false)
    }

    /// `e ≈Δ f` for `v`-closed expressions, decided on the extended
    /// transition system.
    pub fn check_open_dpbb(&self, e: &Expr, f: &Expr, v: &VarName) -> Result<Verdict> {
        require_x_closed(e, v)?;
        require_x_closed(f, v)?;
        self.equivalence_verdict(e, f, true, true)
    }

    /// Divergence-blind branching bisimilarity of `v`-closed expressions on
    /// the extended transition system.
    pub fn check_open_branching(&self, e: &Expr, f: &Expr, v: &VarName) -> Result<Verdict> {
        require_x_closed(e, v)?;
        require_x_closed(f, v)?;
        self.equivalence_verdict(e, f, true, false)
    }

    /// `e ≃Δ f` for `v`-closed expressions, decided on the extended
    /// transition system.
    pub fn check_open_rooted(&self, e: &Expr, f: &Expr, v: &VarName) -> Result<Verdict> {
        require_x_closed(e, v)?;
        require_x_closed(f, v)?;
        self.rooted_verdict(e, f, true)
    }

    /// The least `n` such that no state reachable from `roots` is ≈Δ to
    /// `action^n`. Open roots are handled through the extended system.
    pub fn fresh_depth(&self, roots: &[Expr], action: &Action) -> Result<usize> {
        assert!(!action.is_tau(), "fresh depth needs a visible action");
        let (alone, _) = build_lts(roots, true, &self.limits)?;
        let bound = alone.num_states() + 1;
        let mut all: Vec<Expr> = roots.to_vec();
        all.extend((0..=bound).map(|k| Expr::power(action, k)));
        let (l, ids) = build_lts(&all, true, &self.limits)?;
        let partition = self.dpbb_partition(&l);
        let reach = l.reachable_from(&ids[..roots.len()]);
        let taken: Vec<bool> = {
            let mut t = vec![false; partition.num_blocks()];
            for (s, _) in reach.iter().enumerate().filter(|(_, &r)| r) {
                t[partition.block_of(s)] = true;
            }
            t
        };
        (0..=bound)
            .find(|&k| !taken[partition.block_of(ids[roots.len() + k])])
            .ok_or_else(|| unreachable!("powers of a visible action are pairwise inequivalent"))
    }
}

fn require_closed(e: &Expr) -> Result<()> {
    if is_closed(e) {
        Ok(())
    } else {
        Err(CcsError::NotClosed(print(e)))
    }
}

fn require_x_closed(e: &Expr, v: &VarName) -> Result<()> {
    if is_x_closed(e, v) {
        Ok(())
    } else {
        Err(CcsError::NotXClosed { expr: print(e), var: v.to_string() })
    }
}

/// First initial step of `p` (or of `q`) with no equally labelled initial
/// step of the other side into the same ≈Δ block.
pub(crate) fn root_violation(l: &Lts, partition: &Partition, p: StateId, q: StateId) -> Option<Counterexample> {
    let one_way = |p: StateId, q: StateId| {
        l.succ(p).iter().find_map(|&(label, p1)| {
            let matched = l
                .succ(q)
                .iter()
                .any(|&(l2, q1)| l2 == label && partition.same_block(p1, q1));
            (!matched).then(|| cx(l, p, q, Condition::R1R2, step_path(l, p, label, p1)))
        })
    };
    one_way(p, q).or_else(|| one_way(q, p))
}

pub fn check_dpbb(p: &Expr, q: &Expr) -> Result<Verdict> {
    Checker::default().check_dpbb(p, q)
}

pub fn check_rooted(p: &Expr, q: &Expr) -> Result<Verdict> {
    Checker::default().check_rooted(p, q)
}

pub fn check_open_dpbb(e: &Expr, f: &Expr, v: &VarName) -> Result<Verdict> {
    Checker::default().check_open_dpbb(e, f, v)
}

pub fn check_open_rooted(e: &Expr, f: &Expr, v: &VarName) -> Result<Verdict> {
    Checker::default().check_open_rooted(e, f, v)
}

pub fn fresh_depth(roots: &[Expr], action: &Action) -> Result<usize> {
    Checker::default().fresh_depth(roots, action)
}

/// Lassos from one state, deduplicated by state set.
pub(crate) struct LassoCache<'a> {
    lts: &'a Lts,
    cap: usize,
    by_state: HashMap<StateId, Vec<(Vec<bool>, Lasso)>>,
}

impl<'a> LassoCache<'a> {
    pub(crate) fn new(lts: &'a Lts, cap: usize) -> Self {
        LassoCache { lts, cap, by_state: HashMap::new() }
    }

    pub(crate) fn get(&mut self, s: StateId) -> Result<&[(Vec<bool>, Lasso)]> {
        if !self.by_state.contains_key(&s) {
            let n = self.lts.num_states();
            let mut seen: HashMap<Vec<bool>, ()> = HashMap::new();
            let mut sets = Vec::new();
            for lasso in self.lts.simple_lassos(s, self.cap)? {
                let mask = lasso.state_mask(n);
                if seen.insert(mask.clone(), ()).is_none() {
                    sets.push((mask, lasso));
                }
            }
            self.by_state.insert(s, sets);
        }
        Ok(&self.by_state[&s])
    }
}

/// Checks the selected `conditions` for the relation `r` over `l`.
///
/// (D) is only defined here for equivalences, where it says that within each
/// class either every state or no state can diverge inside the class. (R1R2)
/// checks that every pair of `r` is rooted: initial steps are matched by
/// equally labelled initial steps into states related by the ≈Δ of `l`.
pub fn verify_relation(r: &Relation, l: &Lts, conditions: &[Condition], limits: &Limits) -> Result<Verdict> {
    if r.size() != l.num_states() {
        return Err(CcsError::Relation(format!(
            "relation over {} states, LTS has {}",
            r.size(),
            l.num_states()
        )));
    }
    let related = |a: StateId, b: StateId| r.contains(a, b);
    let pairs = r.pairs();
    let verdict = |c: Counterexample| Ok(Verdict::fails(conditions.to_vec(), c));
    let mut lassos = LassoCache::new(l, limits.lasso_cap);
    for &condition in conditions {
        match condition {
            Condition::T => {
                let closures = tau_closures(l);
                for &(p, q) in &pairs {
                    if let Some((label, p1)) = unmatched_step(l, &closures, related, p, q) {
                        return verdict(cx(l, p, q, condition, step_path(l, p, label, p1)));
                    }
                }
            }
            Condition::D => {
                let classes = r.to_partition(l)?;
                let div = l.diverges_in_blocks(classes.block_ids());
                for &(p, q) in &pairs {
                    if div[p] && !div[q] {
                        let mask = classes.block_mask(classes.block_of(p));
                        let lasso = l.find_lasso_within(p, &mask).expect("divergent state");
                        return verdict(cx(l, p, q, condition, lasso_path(l, &lasso)));
                    }
                }
            }
            Condition::Dsecond => {
                let mut by_left: HashMap<StateId, Vec<StateId>> = HashMap::new();
                for &(p, q) in &pairs {
                    by_left.entry(p).or_default().push(q);
                }
                let mut lefts: Vec<_> = by_left.into_iter().collect();
                lefts.sort();
                for (p, qs) in lefts {
                    let sets = lassos.get(p)?;
                    for q in qs {
                        let hit: Vec<bool> = unmatched_by_tau_successor(l, related, q)
                            .into_iter()
                            .map(|unmatched| !unmatched)
                            .collect();
                        if let Some((_, lasso)) =
                            sets.iter().find(|(mask, _)| !mask.iter().zip(&hit).any(|(&m, &h)| m && h))
                        {
                            return verdict(cx(l, p, q, condition, lasso_path(l, lasso)));
                        }
                    }
                }
            }
            Condition::Dprime => {
                let mut by_left: HashMap<StateId, Vec<StateId>> = HashMap::new();
                for &(p, q) in &pairs {
                    by_left.entry(p).or_default().push(q);
                }
                let mut lefts: Vec<_> = by_left.into_iter().collect();
                lefts.sort();
                for (p, qs) in lefts {
                    for (mask, lasso) in lassos.get(p)? {
                        let targets = image(r, mask);
                        if let Some(&q) = qs.iter().find(|&&q| !l.diverges_within(q, &targets)) {
                            return verdict(cx(l, p, q, condition, lasso_path(l, lasso)));
                        }
                    }
                }
            }
            Condition::R1R2 => {
                let partition = gfp_dpbb(l);
                for &(p, q) in &pairs {
                    if let Some(c) = root_violation(l, &partition, p, q) {
                        return verdict(c);
                    }
                }
            }
            Condition::U1 | Condition::U2 | Condition::U3 | Condition::Stuttering => {
                return Err(CcsError::Precondition(format!(
                    "condition {condition} is not a relation condition; see the upto and stuttering checks"
                )));
            }
        }
    }
    Ok(Verdict::holds(conditions.to_vec()))
}

/// `{y : x r y for some x in set}`.
pub(crate) fn image(r: &Relation, set: &[bool]) -> Vec<bool> {
    let n = r.size();
    let mut out = vec![false; n];
    for x in (0..n).filter(|&x| set[x]) {
        for (y, slot) in out.iter_mut().enumerate() {
            if r.contains(x, y) {
                *slot = true;
            }
        }
    }
    out
}

/// Every τ-path that starts and ends in one block stays inside that block.
pub fn stuttering_check(l: &Lts, p: &Partition) -> Verdict {
    let n = l.num_states();
    for (b, block) in p.blocks().iter().enumerate() {
        let inside = p.block_mask(b);
        // BFS over τ-edges from the first states outside the block.
        let mut parent: Vec<Option<StateId>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        for &s in block {
            for &t in l.tau_succ(s) {
                if !inside[t] && !seen[t] {
                    seen[t] = true;
                    parent[t] = Some(s);
                    queue.push_back(t);
                }
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in l.tau_succ(u) {
                if inside[v] {
                    let mut path = vec![v, u];
                    let mut cur = u;
                    while let Some(prev) = parent[cur] {
                        path.push(prev);
                        if inside[prev] {
                            break;
                        }
                        cur = prev;
                    }
                    path.reverse();
                    let names: Vec<String> = path.iter().map(|&s| l.state_name(s)).collect();
                    let (first, last) = (path[0], *path.last().expect("nonempty"));
                    return Verdict::fails(
                        vec![Condition::Stuttering],
                        cx(l, first, last, Condition::Stuttering, names),
                    );
                }
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
    }
    Verdict::holds(vec![Condition::Stuttering])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::Label;
    use crate::syntax::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn joint(exprs: &[&str]) -> (Lts, Vec<StateId>) {
        let es: Vec<Expr> = exprs.iter().map(|s| p(s)).collect();
        build_lts(&es, false, &Limits::default()).unwrap()
    }

    #[test]
    fn zero_and_tau_zero_share_a_block() {
        let (l, ids) = joint(&["0", "tau.0"]);
        let part = gfp_dpbb(&l);
        assert_eq!(part.num_blocks(), 1);
        assert!(part.same_block(ids[0], ids[1]));
        assert_eq!(refine_dpbb(&l), part);
    }

    #[test]
    fn deadlock_and_tau_loop_differ() {
        let (l, ids) = joint(&["rec X. X", "rec X. tau.X"]);
        let part = gfp_dpbb(&l);
        assert_eq!(part.num_blocks(), 2);
        assert!(!part.same_block(ids[0], ids[1]));
        assert_eq!(refine_dpbb(&l), part);
        // divergence-blind branching bisimilarity identifies them
        assert_eq!(branching_bisim(&l).num_blocks(), 1);
    }

    #[test]
    fn powers_are_pairwise_distinct() {
        let a = Action::visible("a");
        let es: Vec<Expr> = (0..=5).map(|i| Expr::power(&a, i)).collect();
        let (l, _) = build_lts(&es, false, &Limits::default()).unwrap();
        assert_eq!(l.num_states(), 6);
        assert_eq!(gfp_dpbb(&l).num_blocks(), 6);
        assert_eq!(refine_dpbb(&l).num_blocks(), 6);
    }

    #[test]
    fn refine_edge_cases() {
        let single = Lts::from_edges(1, &[]);
        assert_eq!(refine_dpbb(&single).num_blocks(), 1);
        let empty = Lts::from_edges(0, &[]);
        assert_eq!(refine_dpbb(&empty).num_blocks(), 0);
        assert_eq!(gfp_dpbb(&empty).num_blocks(), 0);
        let two = Lts::from_edges(2, &[(0, Label::tau(), 0)]);
        assert_eq!(refine_dpbb(&two).num_blocks(), 2);
        assert_eq!(gfp_dpbb(&two).num_blocks(), 2);
    }

    #[test]
    fn branching_examples() {
        let (l, _) = joint(&["0", "tau.0"]);
        assert_eq!(branching_bisim(&l).num_blocks(), 1);
        let (l, _) = joint(&["0", "a.0"]);
        assert_eq!(branching_bisim(&l).num_blocks(), 2);
    }

    #[test]
    fn closed_checks() {
        assert!(check_dpbb(&p("0"), &p("tau.0")).unwrap().result);
        assert!(!check_rooted(&p("0"), &p("tau.0")).unwrap().result);
        let v = check_rooted(&p("0 + a.0"), &p("tau.0 + a.0")).unwrap();
        assert!(!v.result);
        assert_eq!(v.counterexample.unwrap().condition, Condition::R1R2);
        assert!(check_rooted(&p("a.0 + a.0"), &p("a.0")).unwrap().result);
        let v = check_dpbb(&p("0 + a.0"), &p("tau.0 + a.0")).unwrap();
        assert!(!v.result);
        assert_eq!(v.counterexample.unwrap().condition, Condition::T);
    }

    #[test]
    fn divergence_counterexample_names_the_lasso() {
        let v = check_dpbb(&p("rec X. X"), &p("rec X. tau.X")).unwrap();
        assert!(!v.result);
        let c = v.counterexample.unwrap();
        assert_eq!(c.condition, Condition::Dsecond);
        assert_eq!(c.pair.0, "rec X. tau.X");
        assert_eq!(c.path, vec!["rec X. tau.X", "rec X. tau.X"]);
    }

    #[test]
    fn closed_checks_reject_open_terms() {
        assert!(matches!(check_dpbb(&p("X"), &p("0")), Err(CcsError::NotClosed(_))));
        let x = VarName::new("X");
        assert!(matches!(
            check_open_dpbb(&p("X + Y"), &p("X"), &x),
            Err(CcsError::NotXClosed { .. })
        ));
    }

    #[test]
    fn open_checks() {
        let x = VarName::new("X");
        assert!(check_open_dpbb(&p("X"), &p("tau.X"), &x).unwrap().result);
        assert!(!check_open_rooted(&p("X"), &p("tau.X"), &x).unwrap().result);
        assert!(check_open_rooted(&p("a.X"), &p("a.X + a.X"), &x).unwrap().result);
        assert!(!check_open_dpbb(&p("X"), &p("0"), &x).unwrap().result);
    }

    #[test]
    fn fresh_depth_examples() {
        let a = Action::visible("a");
        assert_eq!(fresh_depth(&[p("0")], &a).unwrap(), 1);
        assert_eq!(fresh_depth(&[p("a.0")], &a).unwrap(), 2);
        assert_eq!(fresh_depth(&[p("rec X. tau.X")], &a).unwrap(), 0);
    }

    #[test]
    fn verify_relation_examples() {
        let limits = Limits::default();
        let (l, _) = joint(&["0", "tau.0", "a.tau.0 + b.0"]);
        let part = gfp_dpbb(&l);
        let r = Relation::from_partition(&part);
        let conds = [Condition::T, Condition::D, Condition::Dprime, Condition::Dsecond];
        assert!(verify_relation(&r, &l, &conds, &limits).unwrap().result);

        let id = Relation::identity(l.num_states());
        let all = [Condition::T, Condition::D, Condition::Dprime, Condition::Dsecond, Condition::R1R2];
        assert!(verify_relation(&id, &l, &all, &limits).unwrap().result);

        let (l, _) = joint(&["rec X. X", "rec X. tau.X"]);
        let r = Relation::from_partition(&branching_bisim(&l));
        let v = verify_relation(&r, &l, &[Condition::Dsecond], &limits).unwrap();
        assert!(!v.result);
        assert_eq!(v.counterexample.unwrap().condition, Condition::Dsecond);
        assert!(!verify_relation(&r, &l, &[Condition::Dprime], &limits).unwrap().result);
        assert!(!verify_relation(&r, &l, &[Condition::D], &limits).unwrap().result);
        assert!(verify_relation(&r, &l, &[Condition::T], &limits).unwrap().result);
    }

    #[test]
    fn d_rejects_non_equivalences() {
        let (l, _) = joint(&["0", "tau.0"]);
        let r = Relation::from_pairs(l.num_states(), &[(0, 1)], true);
        assert!(matches!(
            verify_relation(&r, &l, &[Condition::D], &Limits::default()),
            Err(CcsError::NotEquivalence(_))
        ));
    }

    #[test]
    fn stuttering_examples() {
        let (l, _) = joint(&["0", "tau.0"]);
        assert!(stuttering_check(&l, &gfp_dpbb(&l)).result);
        // s -tau-> t -tau-> s' with s, s' merged and t separate
        let l = Lts::from_edges(3, &[(0, Label::tau(), 1), (1, Label::tau(), 2)]);
        let bad = Partition::from_keys(&l, &[0, 1, 0]);
        let v = stuttering_check(&l, &bad);
        assert!(!v.result);
        assert_eq!(v.counterexample.unwrap().path, vec!["s0", "s1", "s2"]);
    }

    #[test]
    fn conditions_parse() {
        assert_eq!("Dsecond".parse::<Condition>().unwrap(), Condition::Dsecond);
        assert_eq!("D'".parse::<Condition>().unwrap(), Condition::Dprime);
        assert!("X".parse::<Condition>().is_err());
    }
}
