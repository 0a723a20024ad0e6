//! Closed and open equivalence checks with counterexamples.

use ccs_dpbb::{parse, Checker, VarName};

fn main() -> ccs_dpbb::Result<()> {
    let checker = Checker::default();
    let closed = [("0", "tau.0"), ("0 + a.0", "tau.0 + a.0"), ("rec X. X", "rec X. tau.X"), ("a.tau.b.0", "a.b.0")];
    for (l, r) in closed {
        let (p, q) = (parse(l)?, parse(r)?);
        let d = checker.check_dpbb(&p, &q)?;
        let rt = checker.check_rooted(&p, &q)?;
        println!("{l}  vs  {r}: dpbb {}, rooted {}", d.result, rt.result);
        if let Some(c) = d.counterexample.or(rt.counterexample) {
            println!("  {} fails for {:?}: {}", c.condition, c.pair, c.path.join(" "));
        }
    }

    let x = VarName::new("X");
    let (e, f) = (parse("X")?, parse("tau.X")?);
    println!("open X vs tau.X: dpbb {}, rooted {}", checker.check_open_dpbb(&e, &f, &x)?.result, checker.check_open_rooted(&e, &f, &x)?.result);

    let a = ccs_dpbb::Action::visible("a");
    let n = checker.fresh_depth(&[parse("0")?, parse("tau.0")?], &a)?;
    println!("fresh depth of 0, tau.0 in a: {n}");
    Ok(())
}
