//! Checks the relational conditions on hand-written relations.

use ccs_dpbb::equivalence::{branching_bisim, gfp_dpbb, stuttering_check, verify_relation};
use ccs_dpbb::semantics::build_lts;
use ccs_dpbb::{parse, Condition, Limits, Relation};

fn main() -> ccs_dpbb::Result<()> {
    let limits = Limits::default();
    let roots = [parse("rec X. X")?, parse("rec X. tau.X")?, parse("tau.a.0 + a.0")?];
    let (lts, _) = build_lts(&roots, false, &limits)?;
    let all = [Condition::T, Condition::D, Condition::Dprime, Condition::Dsecond];

    let dpbb = Relation::from_partition(&gfp_dpbb(&lts));
    println!("≈Δ: {}", verify_relation(&dpbb, &lts, &all, &limits)?.result);

    // divergence-blind branching bisimilarity relates the deadlock and the τ-loop
    let blind = Relation::from_partition(&branching_bisim(&lts));
    for c in all {
        let v = verify_relation(&blind, &lts, &[c], &limits)?;
        println!("branching bisimilarity, {c}: {}", v.result);
    }

    let pairs = vec![("tau.a.0 + a.0".to_string(), "a.0".to_string())];
    let r = Relation::from_expr_pairs(&lts, &pairs, true)?;
    let v = verify_relation(&r, &lts, &[Condition::T], &limits)?;
    println!("{{(tau.a.0 + a.0, a.0)}} symmetric, T: {}", v.result);
    if let Some(c) = v.counterexample {
        println!("  {}", c.path.join(" "));
    }
    println!("stuttering: {}", stuttering_check(&lts, &gfp_dpbb(&lts)).result);
    Ok(())
}
