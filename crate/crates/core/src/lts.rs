//! Finite labelled transition systems and the τ-graph algorithms the
//! equivalence checkers are built on.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use crate::error::{CcsError, Result};
use crate::partition::Partition;
use crate::syntax::{print, Action, Expr, VarName};

pub type StateId = usize;
pub type LabelId = usize;

/// Label id of τ in every [`Lts`].
pub const TAU: LabelId = 0;

/// A transition label. `Var` labels only occur in the extended transition
/// system, where a free variable `X` steps `X --X--> 0`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Act(Action),
    Var(VarName),
}

impl Label {
    pub fn tau() -> Self {
        Label::Act(Action::Tau)
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Act(Action::Tau))
    }

    /// Parses the `.aut` rendering: `tau`, `var:X`, or a visible action.
    pub fn parse(text: &str) -> Result<Self> {
        if text == "tau" {
            Ok(Label::tau())
        } else if let Some(v) = text.strip_prefix("var:") {
            Ok(Label::Var(VarName::try_new(v)?))
        } else {
            Ok(Label::Act(Action::try_visible(text)?))
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Act(a) => write!(f, "{a}"),
            Label::Var(v) => write!(f, "var:{v}"),
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite-state path `stem` followed by a τ-cycle through `cycle`.
///
/// `stem` starts at the origin and ends at the junction, which is also
/// `cycle[0]`. The cycle closes back at the junction; no state repeats
/// anywhere else.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Vec<StateId>,
    pub cycle: Vec<StateId>,
}

impl Lasso {
    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.stem.iter().chain(self.cycle.iter().skip(1)).copied()
    }

    pub fn state_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for s in self.states() {
            mask[s] = true;
        }
        mask
    }
}

#[derive(Clone, Debug)]
pub struct Lts {
    states: Vec<Option<Expr>>,
    index: HashMap<Expr, StateId>,
    labels: Vec<Label>,
    label_ids: HashMap<Label, LabelId>,
    succ: Vec<Vec<(LabelId, StateId)>>,
    tau_succ: Vec<Vec<StateId>>,
}

/// Mutable construction phase of an [`Lts`].
#[derive(Debug)]
pub struct LtsBuilder {
    lts: Lts,
}

impl Default for LtsBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl LtsBuilder {
    pub fn new() -> Self {
        let tau = Label::tau();
        LtsBuilder {
            lts: Lts {
                states: Vec::new(),
                index: HashMap::new(),
                labels: vec![tau.clone()],
                label_ids: HashMap::from([(tau, TAU)]),
                succ: Vec::new(),
                tau_succ: Vec::new(),
            },
        }
    }

    /// Adds an anonymous state.
    pub fn add_state(&mut self) -> StateId {
        self.lts.states.push(None);
        self.lts.succ.push(Vec::new());
        self.lts.states.len() - 1
    }

    /// Interns a state by expression; returns `(id, newly_added)`.
    pub fn intern(&mut self, e: &Expr) -> (StateId, bool) {
        if let Some(&id) = self.lts.index.get(e) {
            return (id, false);
        }
        let id = self.add_state();
        self.lts.states[id] = Some(e.clone());
        self.lts.index.insert(e.clone(), id);
        (id, true)
    }

    pub fn num_states(&self) -> usize {
        self.lts.states.len()
    }

    pub fn label_id(&mut self, label: &Label) -> LabelId {
        if let Some(&id) = self.lts.label_ids.get(label) {
            return id;
        }
        self.lts.labels.push(label.clone());
        let id = self.lts.labels.len() - 1;
        self.lts.label_ids.insert(label.clone(), id);
        id
    }

    pub fn add_edge(&mut self, src: StateId, label: LabelId, dst: StateId) {
        assert!(src < self.lts.states.len() && dst < self.lts.states.len());
        assert!(label < self.lts.labels.len());
        self.lts.succ[src].push((label, dst));
    }

    pub fn build(mut self) -> Lts {
        let lts = &mut self.lts;
        lts.tau_succ = Vec::with_capacity(lts.succ.len());
        for edges in &mut lts.succ {
            edges.sort_unstable();
            edges.dedup();
            lts.tau_succ
                .push(edges.iter().filter(|(l, _)| *l == TAU).map(|&(_, t)| t).collect());
        }
        self.lts
    }
}

impl Lts {
    /// Builds an anonymous LTS from `(src, label, dst)` triples.
    pub fn from_edges(num_states: usize, edges: &[(StateId, Label, StateId)]) -> Lts {
        let mut b = LtsBuilder::new();
        for _ in 0..num_states {
            b.add_state();
        }
        for (s, l, t) in edges {
            let id = b.label_id(l);
            b.add_edge(*s, id, *t);
        }
        b.build()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn expr(&self, s: StateId) -> Option<&Expr> {
        self.states[s].as_ref()
    }

    pub fn state_of(&self, e: &Expr) -> Option<StateId> {
        self.index.get(e).copied()
    }

    /// Canonical print of the state's expression, or `s<id>` for anonymous
    /// states.
    pub fn state_name(&self, s: StateId) -> String {
        match &self.states[s] {
            Some(e) => print(e),
            None => format!("s{s}"),
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, id: LabelId) -> &Label {
        &self.labels[id]
    }

    pub fn label_id(&self, label: &Label) -> Option<LabelId> {
        self.label_ids.get(label).copied()
    }

    /// Outgoing edges, sorted by `(label id, target)`.
    pub fn succ(&self, s: StateId) -> &[(LabelId, StateId)] {
        &self.succ[s]
    }

    pub fn tau_succ(&self, s: StateId) -> &[StateId] {
        &self.tau_succ[s]
    }

    pub fn edges(&self) -> impl Iterator<Item = (StateId, LabelId, StateId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(s, es)| es.iter().map(move |&(l, t)| (s, l, t)))
    }

    /// States reachable from `roots` along edges of any label.
    pub fn reachable_from(&self, roots: &[StateId]) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue: VecDeque<StateId> = VecDeque::new();
        for &r in roots {
            if !seen[r] {
                seen[r] = true;
                queue.push_back(r);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &(_, t) in &self.succ[s] {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// States τ-reachable from `s` along τ-paths inside `allowed` (or
    /// anywhere, when `allowed` is `None`). `s` itself is always included.
    pub fn tau_reach(&self, s: StateId, allowed: Option<&[bool]>) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &self.tau_succ[u] {
                if !seen[v] && allowed.is_none_or(|a| a[v]) {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// `{s' : s ⇒ s'}` in increasing order.
    pub fn tau_closure(&self, s: StateId) -> Vec<StateId> {
        mask_to_vec(&self.tau_reach(s, None))
    }

    /// Whether the τ-edges among the `within` states contain a cycle.
    fn has_tau_cycle(&self, within: &[bool]) -> bool {
        let n = self.num_states();
        let mut indegree = vec![0usize; n];
        let mut remaining = 0;
        for u in 0..n {
            if !within[u] {
                continue;
            }
            remaining += 1;
            for &v in &self.tau_succ[u] {
                if within[v] {
                    indegree[v] += 1;
                }
            }
        }
        let mut queue: Vec<StateId> = (0..n).filter(|&u| within[u] && indegree[u] == 0).collect();
        while let Some(u) = queue.pop() {
            remaining -= 1;
            for &v in &self.tau_succ[u] {
                if within[v] {
                    indegree[v] -= 1;
                    if indegree[v] == 0 {
                        queue.push(v);
                    }
                }
            }
        }
        remaining > 0
    }

    /// Whether there is an infinite τ-path from `s` that stays inside
    /// `allowed`: some τ-cycle inside `allowed` is τ-reachable from `s`
    /// inside `allowed`.
    pub fn diverges_within(&self, s: StateId, allowed: &[bool]) -> bool {
        if !allowed[s] {
            return false;
        }
        let region = self.tau_reach(s, Some(allowed));
        self.has_tau_cycle(&region)
    }

    /// A lasso witnessing [`Lts::diverges_within`], if there is one.
    pub fn find_lasso_within(&self, s: StateId, allowed: &[bool]) -> Option<Lasso> {
        if !allowed[s] {
            return None;
        }
        // 0 = unvisited, 1 = on the DFS path, 2 = finished
        let mut color = vec![0u8; self.num_states()];
        let mut stack: Vec<(StateId, usize)> = vec![(s, 0)];
        let mut path = vec![s];
        color[s] = 1;
        while let Some(top) = stack.last_mut() {
            let (u, i) = *top;
            if let Some(&v) = self.tau_succ[u].get(i) {
                top.1 += 1;
                if !allowed[v] {
                    continue;
                }
                match color[v] {
                    0 => {
                        color[v] = 1;
                        stack.push((v, 0));
                        path.push(v);
                    }
                    1 => {
                        let pos = path.iter().position(|&x| x == v).expect("on path");
                        return Some(Lasso { stem: path[..=pos].to_vec(), cycle: path[pos..].to_vec() });
                    }
                    _ => {}
                }
            } else {
                color[u] = 2;
                stack.pop();
                path.pop();
            }
        }
        None
    }

    /// For every state, whether it has an infinite τ-path that stays within
    /// its own block of `block_of`.
    pub fn diverges_in_blocks(&self, block_of: &[usize]) -> Vec<bool> {
        let n = self.num_states();
        let mut out_degree = vec![0usize; n];
        let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for u in 0..n {
            for &v in &self.tau_succ[u] {
                if block_of[u] == block_of[v] {
                    out_degree[u] += 1;
                    preds[v].push(u);
                }
            }
        }
        // Peel states whose in-block τ-successors are all non-divergent.
        let mut divergent = vec![true; n];
        let mut queue: Vec<StateId> = (0..n).filter(|&u| out_degree[u] == 0).collect();
        while let Some(u) = queue.pop() {
            divergent[u] = false;
            for &w in &preds[u] {
                out_degree[w] -= 1;
                if out_degree[w] == 0 {
                    queue.push(w);
                }
            }
        }
        divergent
    }

    pub fn diverges(&self, s: StateId) -> bool {
        let all = vec![true; self.num_states()];
        self.diverges_within(s, &all)
    }

    /// Whether some state of `block` has an infinite τ-path inside `block`.
    pub fn block_diverges(&self, block: &[StateId]) -> bool {
        let mut within = vec![false; self.num_states()];
        for &s in block {
            within[s] = true;
        }
        self.has_tau_cycle(&within)
    }

    /// Enumerates every lasso with simple stem and simple τ-cycle starting at
    /// `s`. Fails once more than `cap` lassos exist.
    pub fn simple_lassos(&self, s: StateId, cap: usize) -> Result<Vec<Lasso>> {
        let mut walker = LassoWalker {
            lts: self,
            cap,
            out: Vec::new(),
            stem: vec![s],
            on_path: vec![false; self.num_states()],
        };
        walker.on_path[s] = true;
        walker.extend_stem(s)?;
        Ok(walker.out)
    }

    /// Block-level LTS of `p`. τ-steps inside a block disappear, except for
    /// one τ self-loop on every divergent block. Each block state carries the
    /// expression of its first member.
    pub fn quotient(&self, p: &Partition) -> Lts {
        let mut b = LtsBuilder::new();
        for block in p.blocks() {
            let id = b.add_state();
            if let Some(e) = self.expr(block[0]) {
                b.lts.states[id] = Some(e.clone());
                b.lts.index.insert(e.clone(), id);
            }
        }
        for (s, l, t) in self.edges() {
            let (bs, bt) = (p.block_of(s), p.block_of(t));
            if l == TAU && bs == bt {
                continue;
            }
            let id = b.label_id(self.label(l));
            b.add_edge(bs, id, bt);
        }
        for (i, &div) in p.divergent_flags().iter().enumerate() {
            if div {
                b.add_edge(i, TAU, i);
            }
        }
        b.build()
    }

    /// Disjoint union; the states of `other` are shifted by
    /// `self.num_states()` and lose their expressions.
    pub fn disjoint_union(&self, other: &Lts) -> (Lts, usize) {
        let mut b = LtsBuilder::new();
        for s in 0..self.num_states() {
            match self.expr(s) {
                Some(e) => b.intern(e).0,
                None => b.add_state(),
            };
        }
        let offset = self.num_states();
        for _ in 0..other.num_states() {
            b.add_state();
        }
        for (s, l, t) in self.edges() {
            let id = b.label_id(self.label(l));
            b.add_edge(s, id, t);
        }
        for (s, l, t) in other.edges() {
            let id = b.label_id(other.label(l));
            b.add_edge(s + offset, id, t + offset);
        }
        (b.build(), offset)
    }

    /// Aldebaran rendering.
    pub fn to_aut(&self, root: StateId) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "des ({}, {}, {})", root, self.num_edges(), self.num_states());
        for (s, l, t) in self.edges() {
            let _ = writeln!(out, "({}, \"{}\", {})", s, self.label(l), t);
        }
        out
    }

    /// Parses Aldebaran text; states are anonymous.
    pub fn from_aut(text: &str) -> Result<(Lts, StateId)> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(CcsError::Aut {
            line: 1,
            message: "missing `des` header".into(),
        })?;
        let err = |line: usize, message: &str| CcsError::Aut { line: line + 1, message: message.into() };
        let inner = header
            .trim()
            .strip_prefix("des")
            .map(str::trim)
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| err(hline, "expected `des (root, #edges, #states)`"))?;
        let nums: Vec<usize> = inner
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(hline, "header fields must be natural numbers"))?;
        let [root, num_edges, num_states] = nums[..] else {
            return Err(err(hline, "header needs exactly three fields"));
        };
        if root >= num_states {
            return Err(err(hline, "root is not a state"));
        }
        let mut edges = Vec::with_capacity(num_edges);
        for (lno, line) in lines {
            let body = line
                .trim()
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| err(lno, "expected `(src, \"label\", dst)`"))?;
            let first = body.find(',').ok_or_else(|| err(lno, "missing label"))?;
            let last = body.rfind(',').ok_or_else(|| err(lno, "missing target"))?;
            if first == last {
                return Err(err(lno, "expected three fields"));
            }
            let src: usize = body[..first].trim().parse().map_err(|_| err(lno, "bad source"))?;
            let dst: usize = body[last + 1..].trim().parse().map_err(|_| err(lno, "bad target"))?;
            let raw = body[first + 1..last].trim();
            let raw = raw
                .strip_prefix('"')
                .and_then(|r| r.strip_suffix('"'))
                .unwrap_or(raw);
            let label = Label::parse(raw).map_err(|e| err(lno, &e.to_string()))?;
            if src >= num_states || dst >= num_states {
                return Err(err(lno, "state index out of range"));
            }
            edges.push((src, label, dst));
        }
        if edges.len() != num_edges {
            return Err(CcsError::Aut {
                line: hline + 1,
                message: format!("header announces {num_edges} edges, found {}", edges.len()),
            });
        }
        Ok((Lts::from_edges(num_states, &edges), root))
    }
}

pub(crate) fn mask_to_vec(mask: &[bool]) -> Vec<StateId> {
    mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

struct LassoWalker<'a> {
    lts: &'a Lts,
    cap: usize,
    out: Vec<Lasso>,
    stem: Vec<StateId>,
    on_path: Vec<bool>,
}

impl LassoWalker<'_> {
    fn emit(&mut self, cycle: &[StateId]) -> Result<()> {
        if self.out.len() >= self.cap {
            return Err(CcsError::LassoCap { cap: self.cap });
        }
        self.out.push(Lasso { stem: self.stem.clone(), cycle: cycle.to_vec() });
        Ok(())
    }

    fn extend_stem(&mut self, v: StateId) -> Result<()> {
        let mut cycle = vec![v];
        self.close_cycle(v, v, &mut cycle)?;
        for &w in self.lts.tau_succ(v) {
            if !self.on_path[w] {
                self.on_path[w] = true;
                self.stem.push(w);
                self.extend_stem(w)?;
                self.stem.pop();
                self.on_path[w] = false;
            }
        }
        Ok(())
    }

    fn close_cycle(&mut self, junction: StateId, u: StateId, cycle: &mut Vec<StateId>) -> Result<()> {
        for &w in self.lts.tau_succ(u) {
            if w == junction {
                self.emit(cycle)?;
            } else if !self.on_path[w] {
                self.on_path[w] = true;
                cycle.push(w);
                self.close_cycle(junction, w, cycle)?;
                cycle.pop();
                self.on_path[w] = false;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau() -> Label {
        Label::tau()
    }

    fn a() -> Label {
        Label::Act(Action::visible("a"))
    }

    #[test]
    fn tau_closure_examples() {
        let single = Lts::from_edges(1, &[]);
        assert_eq!(single.tau_closure(0), vec![0]);
        // 0: `0`, 1: `tau.0`
        let l = Lts::from_edges(2, &[(1, tau(), 0)]);
        assert_eq!(l.tau_closure(1), vec![0, 1]);
        assert_eq!(l.tau_closure(0), vec![0]);
        let looping = Lts::from_edges(1, &[(0, tau(), 0)]);
        assert_eq!(looping.tau_closure(0), vec![0]);
    }

    #[test]
    fn divergence_examples() {
        let looping = Lts::from_edges(1, &[(0, tau(), 0)]);
        assert!(looping.diverges(0));
        let dead = Lts::from_edges(1, &[]);
        assert!(!dead.diverges(0));
        let l = Lts::from_edges(2, &[(1, tau(), 0)]);
        assert!(!l.diverges_within(1, &[false, true]));
        assert!(!l.diverges(1));
        // a visible loop is not a divergence
        let visible = Lts::from_edges(1, &[(0, a(), 0)]);
        assert!(!visible.diverges(0));
    }

    #[test]
    fn divergence_must_stay_inside_allowed() {
        // 0 -tau-> 1 -tau-> 2 -tau-> 2
        let l = Lts::from_edges(3, &[(0, tau(), 1), (1, tau(), 2), (2, tau(), 2)]);
        assert!(l.diverges_within(0, &[true, true, true]));
        assert!(!l.diverges_within(0, &[true, false, true]));
        assert!(!l.diverges_within(1, &[true, false, true]));
    }

    #[test]
    fn lasso_examples() {
        let l = Lts::from_edges(2, &[(0, a(), 1)]);
        assert!(l.simple_lassos(0, 10).unwrap().is_empty());
        let looping = Lts::from_edges(1, &[(0, tau(), 0)]);
        assert_eq!(
            looping.simple_lassos(0, 10).unwrap(),
            vec![Lasso { stem: vec![0], cycle: vec![0] }]
        );
        // s -> t -> s, t -> t
        let l = Lts::from_edges(2, &[(0, tau(), 1), (1, tau(), 0), (1, tau(), 1)]);
        let lassos = l.simple_lassos(0, 10).unwrap();
        assert_eq!(lassos.len(), 2);
        assert!(lassos.contains(&Lasso { stem: vec![0], cycle: vec![0, 1] }));
        assert!(lassos.contains(&Lasso { stem: vec![0, 1], cycle: vec![1] }));
    }

    #[test]
    fn lasso_cap_is_an_error() {
        let l = Lts::from_edges(2, &[(0, tau(), 1), (1, tau(), 0), (1, tau(), 1)]);
        assert!(matches!(l.simple_lassos(0, 1), Err(CcsError::LassoCap { cap: 1 })));
    }

    #[test]
    fn aut_round_trip() {
        let l = Lts::from_edges(
            3,
            &[(0, tau(), 1), (1, a(), 2), (2, Label::Var(VarName::new("X")), 0)],
        );
        let text = l.to_aut(0);
        assert!(text.starts_with("des (0, 3, 3)\n"));
        assert!(text.contains("(2, \"var:X\", 0)"));
        let (back, root) = Lts::from_aut(&text).unwrap();
        assert_eq!(root, 0);
        assert_eq!(back.to_aut(0), text);
    }

    #[test]
    fn aut_errors() {
        assert!(Lts::from_aut("").is_err());
        assert!(Lts::from_aut("des (0, 1, 1)\n").is_err());
        assert!(Lts::from_aut("des (0, 1, 1)\n(0, \"a\", 4)\n").is_err());
        assert!(Lts::from_aut("des (0, 1, 1)\n(0, \"Bad\", 0)\n").is_err());
        assert!(Lts::from_aut("des (3, 0, 1)\n").is_err());
        assert!(Lts::from_aut("des (0, 1, 1)\n(0, a, 0)\n").is_ok());
    }
}
