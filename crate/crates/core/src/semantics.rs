//! Structural operational semantics.
//!
//! Transitions are the least relation closed under the prefix, recursion and
//! two choice rules; the extended system adds `X --X--> 0` for every variable.
//! Derivations are searched goal by goal: the recursion rule makes a goal
//! `rec X.E` depend on `E[rec X.E/X]`, which may lead back to the same goal.
//! A goal met again while it is still being derived contributes nothing on
//! that path (a derivation revisiting its own source can always be
//! shortened). Results that depended on such an in-progress ancestor are not
//! cached, since they are only complete from the ancestor's point of view.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{CcsError, Result};
use crate::lts::{Label, Lts, LtsBuilder, StateId};
use crate::syntax::{canonical, substitute1, Expr};
use crate::Limits;

pub type TransitionSet = BTreeSet<(Label, Expr)>;

const INDEPENDENT: usize = usize::MAX;

/// One derivation session with its own memo table.
#[derive(Debug)]
pub struct Semantics {
    extended: bool,
    memo: HashMap<Expr, TransitionSet>,
    in_progress: HashMap<Expr, usize>,
}

impl Semantics {
    pub fn new(extended: bool) -> Self {
        Semantics { extended, memo: HashMap::new(), in_progress: HashMap::new() }
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    /// All derivable `(label, target)` pairs of `e`; targets are canonical.
    pub fn transitions(&mut self, e: &Expr) -> TransitionSet {
        let (set, _) = self.derive(e);
        set
    }

    fn derive(&mut self, e: &Expr) -> (TransitionSet, usize) {
        match e {
            Expr::Nil => (TransitionSet::new(), INDEPENDENT),
            Expr::Var(x) => {
                let mut set = TransitionSet::new();
                if self.extended {
                    set.insert((Label::Var(x.clone()), Expr::Nil));
                }
                (set, INDEPENDENT)
            }
            Expr::Prefix(a, body) => {
                (TransitionSet::from([(Label::Act(a.clone()), canonical(body))]), INDEPENDENT)
            }
            Expr::Choice(l, r) => {
                let (mut left, low_l) = self.derive(l);
                let (right, low_r) = self.derive(r);
                left.extend(right);
                (left, low_l.min(low_r))
            }
            Expr::Rec(x, body) => {
                let goal = canonical(e);
                if let Some(set) = self.memo.get(&goal) {
                    return (set.clone(), INDEPENDENT);
                }
                if let Some(&depth) = self.in_progress.get(&goal) {
                    return (TransitionSet::new(), depth);
                }
                let depth = self.in_progress.len();
                self.in_progress.insert(goal.clone(), depth);
                let unfolded = substitute1(body, x, &goal);
                let (set, low) = self.derive(&unfolded);
                self.in_progress.remove(&goal);
                if low >= depth {
                    self.memo.insert(goal, set.clone());
                    (set, INDEPENDENT)
                } else {
                    (set, low)
                }
            }
        }
    }
}

/// Transitions of `e` in a fresh session.
pub fn transitions(e: &Expr, extended: bool) -> TransitionSet {
    Semantics::new(extended).transitions(e)
}

/// The reachable fragment of one expression.
#[derive(Clone, Debug)]
pub struct ReachSet {
    pub seed: Expr,
    /// `members[0]` is the canonical seed.
    pub members: Vec<Expr>,
    pub edges: Vec<(usize, Label, usize)>,
}

pub fn reachable(e: &Expr, extended: bool, limits: &Limits) -> Result<ReachSet> {
    let (lts, roots) = build_lts(std::slice::from_ref(e), extended, limits)?;
    debug_assert_eq!(roots, vec![0]);
    let members = (0..lts.num_states())
        .map(|s| lts.expr(s).cloned().expect("expression state"))
        .collect();
    let edges = lts.edges().map(|(s, l, t)| (s, lts.label(l).clone(), t)).collect();
    Ok(ReachSet { seed: e.clone(), members, edges })
}

/// The union of the reachable fragments of `roots`, with states interned by
/// canonical form. Returns the LTS and the state of each root.
pub fn build_lts(roots: &[Expr], extended: bool, limits: &Limits) -> Result<(Lts, Vec<StateId>)> {
    let mut sem = Semantics::new(extended);
    let mut builder = LtsBuilder::new();
    let mut queue: VecDeque<(StateId, Expr)> = VecDeque::new();
    let mut root_ids = Vec::with_capacity(roots.len());
    let cap = limits.state_cap;
    let admit = |builder: &mut LtsBuilder, queue: &mut VecDeque<(StateId, Expr)>, e: Expr| {
        let (id, fresh) = builder.intern(&e);
        if fresh {
            if builder.num_states() > cap {
                return Err(CcsError::StateCap { cap });
            }
            queue.push_back((id, e));
        }
        Ok(id)
    };
    for root in roots {
        let id = admit(&mut builder, &mut queue, canonical(root))?;
        root_ids.push(id);
    }
    while let Some((id, e)) = queue.pop_front() {
        for (label, target) in sem.transitions(&e) {
            let t = admit(&mut builder, &mut queue, target)?;
            let l = builder.label_id(&label);
            builder.add_edge(id, l, t);
        }
    }
    Ok((builder.build(), root_ids))
}
