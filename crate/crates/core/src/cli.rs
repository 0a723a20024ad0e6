//! The `ccs-dpbb` command line.
//!
//! Exit status: 0 for success or "equivalent", 1 for "inequivalent" or a
//! violated condition, 2 for usage and input errors, 3 when a state or lasso
//! cap is exceeded. Expressions are given inline or as `@FILE`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::equivalence::{verify_relation, Checker, Condition, Verdict};
use crate::error::{CcsError, Result};
use crate::harness::{Campaign, GenConfig};
use crate::partition::Relation;
use crate::semantics::build_lts;
use crate::syntax::{parse, print, Expr, VarName};
use crate::upto::conclude_rec_congruence;
use crate::Limits;

#[derive(Debug, Parser)]
#[command(name = "ccs-dpbb", version, about = "Basic CCS with recursion and divergence-preserving branching bisimilarity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print an expression in canonical form.
    Fmt { expr: String },
    /// Build the reachable transition system and export it as .aut.
    Lts {
        expr: String,
        /// Add `X --X--> 0` steps for free variables.
        #[arg(long)]
        extended: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also list each state's expression.
        #[arg(long)]
        states: bool,
    },
    /// Compare two expressions.
    Check(CheckArgs),
    /// Quotient of the reachable transition system modulo ≈Δ.
    Minimize {
        expr: String,
        #[arg(long)]
        extended: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the blocks as JSON instead of the .aut quotient.
        #[arg(long)]
        json: bool,
    },
    /// Check relational conditions for a relation over the joint state space
    /// of the given expressions.
    Verify {
        /// JSON list of `[expr, expr]` pairs.
        #[arg(long)]
        relation: PathBuf,
        /// Comma-separated: T, D, Dprime, Dsecond, R1R2.
        #[arg(long, value_delimiter = ',', required = true)]
        conditions: Vec<String>,
        /// Close the relation under inversion.
        #[arg(long)]
        symmetric: bool,
        #[arg(long)]
        extended: bool,
        #[arg(required = true)]
        exprs: Vec<String>,
    },
    /// Prove `rec X.E ≃Δ rec X.F` through U_{E,F} and compare with a direct check.
    Upto {
        left: String,
        right: String,
        #[arg(long, default_value = "X")]
        var: String,
    },
    /// Run a seeded test campaign and print its JSON report.
    Fuzz(FuzzArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("relation").required(true).args(["dpbb", "rooted", "branching"]))]
pub struct CheckArgs {
    /// Divergence-preserving branching bisimilarity.
    #[arg(long)]
    pub dpbb: bool,
    /// Its rooted variant.
    #[arg(long)]
    pub rooted: bool,
    /// Divergence-blind branching bisimilarity.
    #[arg(long)]
    pub branching: bool,
    /// Compare open terms whose only free variable is this one.
    #[arg(long, value_name = "X")]
    pub open: Option<String>,
    #[arg(long)]
    pub json: bool,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("campaign").required(true).args(["congruence", "coarsest"]))]
pub struct FuzzArgs {
    #[arg(long)]
    pub congruence: bool,
    #[arg(long)]
    pub coarsest: bool,
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Include per-case timings in the report.
    #[arg(long)]
    pub timings: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Reads `@FILE` arguments, otherwise returns the text itself.
fn read_expr(arg: &str) -> Result<Expr> {
    match arg.strip_prefix('@') {
        Some(path) => parse(&std::fs::read_to_string(path)?),
        None => parse(arg),
    }
}

fn verdict_word(v: &Verdict) -> &'static str {
    if v.result {
        "equivalent"
    } else {
        "inequivalent"
    }
}

fn status(ok: bool) -> i32 {
    if ok {
        0
    } else {
        1
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_resource_limit() {
                3
            } else {
                2
            }
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    let limits = Limits::from_env();
    let checker = Checker::new(limits);
    match command {
        Command::Fmt { expr } => {
            writeln!(out, "{}", print(&read_expr(&expr)?))?;
            Ok(0)
        }
        Command::Lts { expr, extended, out: file, states } => {
            let e = read_expr(&expr)?;
            let (l, roots) = build_lts(&[e], extended, &limits)?;
            let aut = l.to_aut(roots[0]);
            match file {
                Some(path) => {
                    std::fs::write(&path, &aut)?;
                    writeln!(out, "{} states, {} transitions", l.num_states(), l.num_edges())?;
                }
                None => out.write_all(aut.as_bytes())?,
            }
            if states {
                for s in 0..l.num_states() {
                    writeln!(out, "{s}\t{}", l.state_name(s))?;
                }
            }
            Ok(0)
        }
        Command::Check(args) => {
            let (p, q) = (read_expr(&args.left)?, read_expr(&args.right)?);
            let verdict = match &args.open {
                Some(v) => {
                    let v = VarName::try_new(v)?;
                    if args.dpbb {
                        checker.check_open_dpbb(&p, &q, &v)?
                    } else if args.rooted {
                        checker.check_open_rooted(&p, &q, &v)?
                    } else {
                        checker.check_open_branching(&p, &q, &v)?
                    }
                }
                None if args.dpbb => checker.check_dpbb(&p, &q)?,
                None if args.rooted => checker.check_rooted(&p, &q)?,
                None => checker.check_branching(&p, &q)?,
            };
            writeln!(out, "{}", verdict_word(&verdict))?;
            if args.json {
                writeln!(out, "{}", verdict.to_json())?;
            }
            Ok(status(verdict.result))
        }
        Command::Minimize { expr, extended, out: file, json } => {
            let e = read_expr(&expr)?;
            let (l, roots) = build_lts(&[e], extended, &limits)?;
            let partition = checker.dpbb_partition(&l);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&partition.to_json(&l))?)?;
                return Ok(0);
            }
            let q = l.quotient(&partition);
            let aut = q.to_aut(partition.block_of(roots[0]));
            match file {
                Some(path) => {
                    std::fs::write(&path, &aut)?;
                    writeln!(out, "{} states reduced to {}", l.num_states(), q.num_states())?;
                }
                None => out.write_all(aut.as_bytes())?,
            }
            Ok(0)
        }
        Command::Verify { relation, conditions, symmetric, extended, exprs } => {
            let roots = exprs.iter().map(|s| read_expr(s)).collect::<Result<Vec<_>>>()?;
            let (l, _) = build_lts(&roots, extended, &limits)?;
            let pairs: Vec<(String, String)> = serde_json::from_str(&std::fs::read_to_string(&relation)?)?;
            let r = Relation::from_expr_pairs(&l, &pairs, symmetric)?;
            let conditions = conditions.iter().map(|c| c.parse()).collect::<Result<Vec<Condition>>>()?;
            let verdict = verify_relation(&r, &l, &conditions, &limits)?;
            writeln!(out, "{}", if verdict.result { "holds" } else { "violated" })?;
            writeln!(out, "{}", verdict.to_json())?;
            Ok(status(verdict.result))
        }
        Command::Upto { left, right, var } => {
            let (e, f) = (read_expr(&left)?, read_expr(&right)?);
            let x = VarName::try_new(&var)?;
            let conclusion = conclude_rec_congruence(&e, &f, &x, &checker)?;
            let word = match (&conclusion.upto, conclusion.agrees()) {
                (_, false) => "disagreement",
                (Some(u), true) if u.result => "equivalent",
                _ => "inequivalent",
            };
            writeln!(out, "{word}")?;
            writeln!(out, "{}", serde_json::to_string_pretty(&conclusion)?)?;
            Ok(status(word == "equivalent"))
        }
        Command::Fuzz(args) => {
            if args.depth == 0 {
                return Err(CcsError::Precondition("--depth must be at least 1".into()));
            }
            let config = GenConfig::default().with_seed(args.seed).with_depth(args.depth);
            let mut campaign = Campaign::new(args.cases, config);
            campaign.checker = checker;
            campaign.timings = args.timings;
            let report = if args.congruence { campaign.congruence() } else { campaign.coarsest() };
            let json = report.to_json();
            match args.out {
                Some(path) => {
                    std::fs::write(&path, &json)?;
                    writeln!(
                        out,
                        "{} cases, {} violations, {} errors",
                        report.cases.len(),
                        report.violations,
                        report.errors
                    )?;
                }
                None => writeln!(out, "{json}")?,
            }
            Ok(status(report.ok()))
        }
    }
}
