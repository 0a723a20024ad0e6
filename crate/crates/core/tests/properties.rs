use std::collections::BTreeSet;

use proptest::prelude::*;

use ccs_dpbb::equivalence::{branching_bisim, check_dpbb, check_rooted, gfp_dpbb, refine_dpbb, Checker};
use ccs_dpbb::harness::{equivalent_variant, random_expr, random_lts, GenConfig, LtsConfig};
use ccs_dpbb::semantics::transitions;
use ccs_dpbb::syntax::{alpha_eq, canonical, exposed, free_vars, parse, print, substitute1};
use ccs_dpbb::upto::{build_uef, verify_upto};
use ccs_dpbb::{Expr, Label, Limits, Lts, Partition, Relation, StateId, VarName};

fn x() -> VarName {
    VarName::new("X")
}

fn open_expr(seed: u64, depth: usize) -> Expr {
    random_expr(&GenConfig::default().open_in(&x()).with_depth(depth).with_seed(seed))
}

fn closed_expr(seed: u64, depth: usize) -> Expr {
    random_expr(&GenConfig::default().with_depth(depth).with_seed(seed))
}

fn small_lts(seed: u64) -> Lts {
    random_lts(seed, &LtsConfig { max_states: 8, ..LtsConfig::default() })
}

/// Renames every binder to a fresh, unusual name.
fn rename_binders(e: &Expr, k: &mut usize) -> Expr {
    match e {
        Expr::Nil | Expr::Var(_) => e.clone(),
        Expr::Prefix(a, b) => Expr::prefix(a.clone(), rename_binders(b, k)),
        Expr::Choice(l, r) => Expr::choice(rename_binders(l, k), rename_binders(r, k)),
        Expr::Rec(v, body) => {
            *k += 1;
            let fresh = VarName::new(&format!("Fresh{k}"));
            let body = substitute_raw_var(body, v, &fresh);
            Expr::Rec(fresh, Box::new(rename_binders(&body, k)))
        }
    }
}

/// Renames free occurrences of `v` to `w`, assuming `w` is unused.
fn substitute_raw_var(e: &Expr, v: &VarName, w: &VarName) -> Expr {
    match e {
        Expr::Nil => Expr::Nil,
        Expr::Var(u) if u == v => Expr::Var(w.clone()),
        Expr::Var(_) => e.clone(),
        Expr::Prefix(a, b) => Expr::prefix(a.clone(), substitute_raw_var(b, v, w)),
        Expr::Choice(l, r) => Expr::choice(substitute_raw_var(l, v, w), substitute_raw_var(r, v, w)),
        Expr::Rec(u, _) if u == v => e.clone(),
        Expr::Rec(u, b) => Expr::Rec(u.clone(), Box::new(substitute_raw_var(b, v, w))),
    }
}

/// τ-paths of every length exist from `s` iff `s` diverges (finite LTS).
fn diverges_brute(l: &Lts, s: StateId) -> bool {
    let n = l.num_states();
    let mut frontier: BTreeSet<StateId> = BTreeSet::from([s]);
    for _ in 0..=n {
        frontier = frontier.iter().flat_map(|&u| l.tau_succ(u).iter().copied()).collect();
    }
    !frontier.is_empty()
}

/// Rootedness of a pair with respect to a given ≈Δ partition.
fn rooted_in(l: &Lts, part: &Partition, p: StateId, q: StateId) -> bool {
    let one = |p: StateId, q: StateId| {
        l.succ(p)
            .iter()
            .all(|&(a, p1)| l.succ(q).iter().any(|&(b, q1)| a == b && part.same_block(p1, q1)))
    };
    one(p, q) && one(q, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let e = open_expr(seed, 5);
        prop_assert_eq!(parse(&print(&e)).unwrap(), e);
    }

    #[test]
    fn canonical_is_idempotent_and_alpha_sound(seed in any::<u64>()) {
        let e = open_expr(seed, 5);
        prop_assert_eq!(canonical(&canonical(&e)), canonical(&e));
        let renamed = rename_binders(&e, &mut 0);
        prop_assert!(alpha_eq(&renamed, &e));
        prop_assert_eq!(canonical(&renamed), e.clone());
        prop_assert_eq!(transitions(&renamed, true), transitions(&e, true));
    }

    #[test]
    fn exposed_iff_variable_step(seed in any::<u64>()) {
        let e = open_expr(seed, 5);
        let step = (Label::Var(x()), Expr::Nil);
        prop_assert_eq!(exposed(&x(), &e), transitions(&e, true).contains(&step));
    }

    #[test]
    fn free_vars_of_substitution(seed in any::<u64>(), pseed in any::<u64>()) {
        let e = random_expr(&GenConfig {
            free_vars: vec![x(), VarName::new("Z")],
            var_pool: vec![VarName::new("Y")],
            ..GenConfig::default().with_seed(seed)
        });
        let p = random_expr(&GenConfig::default().open_in(&VarName::new("Y")).with_depth(3).with_seed(pseed));
        let mut expected: BTreeSet<VarName> = free_vars(&e);
        let had_x = expected.remove(&x());
        if had_x {
            expected.extend(free_vars(&p));
        }
        prop_assert_eq!(free_vars(&substitute1(&e, &x(), &p)), expected);
    }

    #[test]
    fn substitution_commutes_with_steps(seed in any::<u64>(), pseed in any::<u64>()) {
        let e = open_expr(seed, 4);
        let p = closed_expr(pseed, 3);
        let lhs = transitions(&substitute1(&e, &x(), &p), false);
        let mut rhs: BTreeSet<(Label, Expr)> =
            transitions(&e, false).into_iter().map(|(a, e1)| (a, substitute1(&e1, &x(), &p))).collect();
        if exposed(&x(), &e) {
            rhs.extend(transitions(&p, false));
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn divergence_matches_brute_force(seed in any::<u64>()) {
        let l = small_lts(seed);
        for s in 0..l.num_states() {
            prop_assert_eq!(l.diverges(s), diverges_brute(&l, s));
        }
    }

    #[test]
    fn lassos_are_simple_and_complete(seed in any::<u64>()) {
        let l = small_lts(seed);
        for s in 0..l.num_states() {
            let lassos = l.simple_lassos(s, 100_000).unwrap();
            prop_assert_eq!(!lassos.is_empty(), l.diverges(s));
            for lasso in &lassos {
                prop_assert_eq!(lasso.stem[0], s);
                prop_assert_eq!(*lasso.stem.last().unwrap(), lasso.cycle[0]);
                let states: Vec<StateId> = lasso.states().collect();
                let distinct: BTreeSet<StateId> = states.iter().copied().collect();
                prop_assert_eq!(distinct.len(), states.len());
                let mut walk = lasso.stem.clone();
                walk.extend(lasso.cycle.iter().skip(1));
                walk.push(lasso.cycle[0]);
                for w in walk.windows(2) {
                    prop_assert!(l.tau_succ(w[0]).contains(&w[1]));
                }
            }
        }
    }

    #[test]
    fn backends_agree(seed in any::<u64>()) {
        let l = random_lts(seed, &LtsConfig::default());
        prop_assert_eq!(gfp_dpbb(&l), refine_dpbb(&l));
    }

    #[test]
    fn dpbb_refines_branching(seed in any::<u64>()) {
        let l = small_lts(seed);
        let (d, b) = (gfp_dpbb(&l), branching_bisim(&l));
        for s in 0..l.num_states() {
            for t in 0..l.num_states() {
                prop_assert!(!d.same_block(s, t) || b.same_block(s, t));
            }
        }
    }

    #[test]
    fn quotient_preserves_dpbb(seed in any::<u64>()) {
        let l = small_lts(seed);
        let part = gfp_dpbb(&l);
        let q = l.quotient(&part);
        let (joint, offset) = l.disjoint_union(&q);
        let jp = gfp_dpbb(&joint);
        for s in 0..l.num_states() {
            prop_assert!(jp.same_block(s, offset + part.block_of(s)));
        }
        prop_assert_eq!(gfp_dpbb(&q).num_blocks(), q.num_states());
    }

    /// Related states match τ-paths: if `p ≈Δ q` and `p ⇒ p'` then
    /// `q ⇒ q'` with `p' ≈Δ q'`.
    #[test]
    fn long_steps_are_simulated(seed in any::<u64>()) {
        let l = small_lts(seed);
        let part = gfp_dpbb(&l);
        for p in 0..l.num_states() {
            for q in 0..l.num_states() {
                if !part.same_block(p, q) {
                    continue;
                }
                for p1 in l.tau_closure(p) {
                    prop_assert!(l.tau_closure(q).iter().any(|&q1| part.same_block(p1, q1)));
                }
            }
        }
    }

    #[test]
    fn rooted_implies_dpbb(s1 in any::<u64>(), s2 in any::<u64>()) {
        let p = closed_expr(s1, 4);
        let q = if s2 % 2 == 0 { equivalent_variant(&p, 3, s2) } else { closed_expr(s2, 4) };
        if check_rooted(&p, &q).unwrap().result {
            prop_assert!(check_dpbb(&p, &q).unwrap().result);
        }
    }

    #[test]
    fn upto_relations_relate_rooted_pairs(seed in any::<u64>(), picks in proptest::collection::vec((0usize..8, 0usize..8), 0..6)) {
        let l = small_lts(seed);
        let n = l.num_states();
        let pairs: Vec<(StateId, StateId)> = picks.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let b = Relation::from_pairs(n, &pairs, true);
        if verify_upto(&b, &l, &Limits::default()).unwrap().result {
            let part = gfp_dpbb(&l);
            for (p, q) in b.pairs() {
                prop_assert!(part.same_block(p, q));
                prop_assert!(rooted_in(&l, &part, p, q));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every τ-step of `G[rec X.E/X]` comes from a τ-step of G, or from a
    /// τ-step of E when X is exposed in G.
    #[test]
    fn recursive_tau_steps_decompose(seed in any::<u64>()) {
        let e = open_expr(seed, 4);
        let f = equivalent_variant(&e, 2, seed);
        let uef = build_uef(&e, &f, &x(), &Checker::default()).unwrap();
        let r = uef.rec_e();
        let tau = Label::tau();
        let e_steps = transitions(&e, false);
        for g in &uef.universe {
            let closed = substitute1(g, &x(), &r);
            let g_steps = transitions(g, false);
            for (label, target) in transitions(&closed, false) {
                if label != tau {
                    continue;
                }
                let from_g = g_steps.iter().any(|(l, g1)| *l == tau && substitute1(g1, &x(), &r) == target);
                let from_e = exposed(&x(), g)
                    && e_steps.iter().any(|(l, e1)| *l == tau && substitute1(e1, &x(), &r) == target);
                prop_assert!(from_g || from_e, "{} --tau--> {}", g, target);
            }
        }
    }
}
