//! Seeded congruence and coarsest-congruence campaigns.

use ccs_dpbb::harness::{equivalent_variant_traced, random_expr, Campaign, GenConfig};

fn main() {
    let config = GenConfig::default().with_seed(1);
    let e = random_expr(&config);
    let (f, steps) = equivalent_variant_traced(&e, 3, 1);
    println!("{e}\n  rewrites to {f}");
    for s in steps {
        println!("  {:?} at {:?}", s.rule, s.position);
    }

    let campaign = Campaign::new(50, config);
    for report in [campaign.congruence(), campaign.coarsest()] {
        println!(
            "{}: {} cases, {} violations, {} errors",
            report.campaign,
            report.cases.len(),
            report.violations,
            report.errors
        );
    }
}
