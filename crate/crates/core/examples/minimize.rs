//! Quotient modulo ≈Δ, computed by both backends.

use ccs_dpbb::equivalence::{gfp_dpbb, refine_dpbb};
use ccs_dpbb::semantics::build_lts;
use ccs_dpbb::{parse, Limits};

fn main() -> ccs_dpbb::Result<()> {
    let e = parse("rec X. tau.(a.X + tau.a.X) + tau.tau.b.0 + tau.(rec Y. tau.Y)")?;
    let (lts, roots) = build_lts(&[e], false, &Limits::default())?;
    let part = refine_dpbb(&lts);
    assert_eq!(part, gfp_dpbb(&lts));
    println!("{} states, {} blocks", lts.num_states(), part.num_blocks());
    for (i, block) in part.blocks().iter().enumerate() {
        let names: Vec<String> = block.iter().map(|&s| lts.state_name(s)).collect();
        println!("block {i} (divergent: {}): {}", part.is_divergent(i), names.join(" | "));
    }
    let quotient = lts.quotient(&part);
    print!("{}", quotient.to_aut(part.block_of(roots[0])));
    Ok(())
}
