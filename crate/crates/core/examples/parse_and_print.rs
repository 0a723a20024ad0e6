//! Parsing, canonical printing, substitution and the SOS transitions.

use ccs_dpbb::semantics::transitions;
use ccs_dpbb::syntax::{exposed, free_vars, substitute1};
use ccs_dpbb::{parse, print, VarName};

fn main() -> ccs_dpbb::Result<()> {
    let e = parse("rec Q. a.Q + tau.(X + b.0)")?;
    println!("canonical:  {}", print(&e));
    println!("free vars:  {:?}", free_vars(&e));

    let x = VarName::new("X");
    let body = parse("tau.X + a.0")?;
    println!("X exposed in `{body}`: {}", exposed(&x, &body));
    println!("X exposed in `{}`: {}", parse("a.X")?, exposed(&x, &parse("a.X")?));

    // substitution renames binders that would capture free variables
    let g = parse("rec Y. a.X + b.Y")?;
    println!("({g}) with X := Y  is  {}", substitute1(&g, &x, &parse("Y")?));

    // variable steps exist only in the extended system, and only when exposed
    let body = parse("X + a.0")?;
    for extended in [false, true] {
        println!("steps of `{body}` (extended = {extended}):");
        for (label, target) in transitions(&body, extended) {
            println!("  --{label}--> {target}");
        }
    }
    Ok(())
}
