//! From E ≃Δ F (open in X) to rec X.E ≃Δ rec X.F through an up-to relation.

use ccs_dpbb::upto::{build_uef, conclude_rec_congruence, verify_upto};
use ccs_dpbb::{parse, Checker, VarName};

fn main() -> ccs_dpbb::Result<()> {
    let checker = Checker::default();
    let x = VarName::new("X");
    let (e, f) = (parse("tau.X + a.0")?, parse("tau.tau.X + a.0")?);

    let uef = build_uef(&e, &f, &x, &checker)?;
    println!("universe: {} expressions, host: {} states", uef.universe.len(), uef.host.num_states());
    for (l, r) in uef.pairs.to_expr_pairs(&uef.host).iter().filter(|(l, r)| l < r) {
        println!("  {l}  ~  {r}");
    }
    println!("up-to verdict: {}", verify_upto(&uef.pairs, &uef.host, &checker.limits)?.result);

    for (l, r) in [("a.X + b.0", "b.0 + a.X"), ("tau.X", "X")] {
        let c = conclude_rec_congruence(&parse(l)?, &parse(r)?, &x, &checker)?;
        println!(
            "rec X.({l}) vs rec X.({r}): open rooted {}, up-to {:?}, direct {}",
            c.open_rooted.result,
            c.upto.as_ref().map(|v| v.result),
            c.direct.result
        );
    }
    Ok(())
}
