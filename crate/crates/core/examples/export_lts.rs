//! Builds a reachable state space and prints it in Aldebaran (.aut) format.

use ccs_dpbb::semantics::build_lts;
use ccs_dpbb::{parse, Limits};

fn main() -> ccs_dpbb::Result<()> {
    let e = parse("rec X. a.tau.X + b.(rec Y. tau.Y)")?;
    let (lts, roots) = build_lts(&[e], false, &Limits::default())?;
    for s in 0..lts.num_states() {
        let tag = if lts.diverges(s) { " (diverges)" } else { "" };
        println!("state {s}: {}{tag}", lts.state_name(s));
    }
    print!("{}", lts.to_aut(roots[0]));

    let open = parse("tau.X + a.X")?;
    let (ext, roots) = build_lts(&[open], true, &Limits::default())?;
    println!("extended system of an open term:");
    print!("{}", ext.to_aut(roots[0]));
    Ok(())
}
