//! Command-line front end.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_integer::Integer;
use serde_json::json;

use crate::combinatorics::{bounds_table, equality_cases, r_recurrence_failures, verify_catalan_identity, BoundReport};
use crate::error::{Error, Result};
use crate::explorer::{
    default_depth_guard, exceptional_degree_violations, explore, explore_stats, explore_stats_parallel,
    explore_stats_unmemoized, largest_branch, principalize, toric_reduce, ResolutionTree, TreeStats,
    DEFAULT_HARD_LIMIT,
};
use crate::invariant::select_center;
use crate::monomial::{ChartState, ExponentVector, VarSet};

/// Exit status: success.
pub const EXIT_OK: i32 = 0;
/// Exit status: usage or input error.
pub const EXIT_USAGE: i32 = 1;
/// Exit status: exploration stopped at the depth guard.
pub const EXIT_TRUNCATED: i32 = 2;
/// Exit status: a verification suite found a failure.
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "monores", version, about = "Resolution trees and bounds for monomial basic objects")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resolve a monomial basic object and report the tree.
    Resolve(ResolveArgs),
    /// Print the bounds on the number of blowups for a problem.
    Bounds(BoundsArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Print the propagation table and the global bound formulas.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Resolve,
    LargestBranch,
    Principalize,
    Toric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Catalan,
    Bounds,
    Invariants,
}

/// Which variables start as exceptional hypersurfaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExceptionalSpec {
    None,
    All,
    List(Vec<usize>),
}

impl std::str::FromStr for ExceptionalSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Self::None),
            "all" => Ok(Self::All),
            _ => parse_list(s).map(Self::List),
        }
    }
}

impl ExceptionalSpec {
    fn to_varset(&self, n: usize) -> Result<VarSet> {
        Ok(match self {
            Self::None => VarSet::EMPTY,
            Self::All => VarSet::full(n),
            Self::List(vars) => {
                let mut set = VarSet::EMPTY;
                for &v in vars {
                    if v == 0 || v > n {
                        return Err(Error::MalformedInput(format!("exceptional variable {v} outside 1..={n}")));
                    }
                    set = set.with(v);
                }
                set
            }
        })
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| format!("invalid list entry {t:?}")))
        .collect()
}

#[derive(Debug, clap::Args)]
pub struct ResolveArgs {
    /// Exponents a_1,...,a_n of J = X_1^a_1 ... X_n^a_n.
    #[arg(long, value_delimiter = ',', required = true)]
    pub exponents: Vec<u64>,
    /// Critical value c.
    #[arg(long)]
    pub critical: u64,
    /// Initial exceptional hypersurfaces: none, all, or a list like 1,3.
    #[arg(long, default_value = "none")]
    pub exceptional: ExceptionalSpec,
    #[arg(long, value_enum, default_value_t = Mode::Resolve)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Depth guard; defaults to the global bound.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Ceiling on the default depth guard.
    #[arg(long, default_value_t = DEFAULT_HARD_LIMIT)]
    pub hard_limit: usize,
    /// Write the output to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for statistics-only exploration.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, clap::Args)]
pub struct BoundsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub exponents: Vec<u64>,
    #[arg(long)]
    pub critical: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Largest n (number of variables, or Catalan index).
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Largest total degree d.
    #[arg(long, default_value_t = 8)]
    pub d_max: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A validated problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    pub exponents: Vec<u64>,
    pub critical: u64,
    pub exceptional: ExceptionalSpec,
    pub mode: Mode,
}

impl ProblemSpec {
    pub fn new(exponents: Vec<u64>, critical: u64, exceptional: ExceptionalSpec, mode: Mode) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::MalformedInput("--exponents needs at least one value".into()));
        }
        if exponents.contains(&0) {
            return Err(Error::MalformedInput("exponents must be at least 1".into()));
        }
        if critical == 0 {
            return Err(Error::MalformedInput("--critical must be at least 1".into()));
        }
        if exponents.len() > 16 {
            return Err(Error::MalformedInput("at most 16 variables are supported".into()));
        }
        Ok(Self {
            exponents,
            critical,
            exceptional,
            mode,
        })
    }

    pub fn root(&self) -> Result<ChartState> {
        let n = self.exponents.len();
        ChartState::root(
            ExponentVector::from_integers(&self.exponents),
            n,
            self.critical,
            self.exceptional.to_varset(n)?,
        )
    }
}

/// Text produced by a command and its exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub output: String,
    pub status: i32,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Self { output, status: EXIT_OK }
    }
}

/// Parses `argv` (program name first), runs the command and writes its
/// output. Returns the exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let out = match &cli.command {
        Command::Resolve(a) => a.out.clone(),
        Command::Bounds(a) => a.out.clone(),
        Command::Verify(a) => a.out.clone(),
        Command::Table(a) => a.out.clone(),
    };
    match run(&cli.command) {
        Ok(outcome) => {
            let written = match out {
                Some(path) => std::fs::write(&path, &outcome.output)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{}", outcome.output);
                    Ok(())
                }
            };
            match written {
                Ok(()) => outcome.status,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    EXIT_USAGE
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Runs a parsed command.
pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Resolve(a) => {
            let spec = ProblemSpec::new(a.exponents.clone(), a.critical, a.exceptional.clone(), a.mode)?;
            run_problem(&spec, a)
        }
        Command::Bounds(a) => run_bounds(&a.exponents, a.critical, a.format),
        Command::Verify(a) => run_verify(a.suite, a.n_max, a.d_max, a.format),
        Command::Table(a) => run_table(a.n_max, a.format),
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json renders");
    s.push('\n');
    s
}

fn describe(state: &ChartState) -> String {
    format!(
        "J = {}, c = {}, E = {}",
        state.exponents,
        state.critical,
        state.exceptional()
    )
}

fn guard_for(root: &ChartState, a: &ResolveArgs) -> usize {
    a.max_depth.unwrap_or_else(|| default_depth_guard(root, a.hard_limit))
}

fn run_problem(spec: &ProblemSpec, a: &ResolveArgs) -> Result<Outcome> {
    match spec.mode {
        Mode::Resolve => resolve(&spec.root()?, a),
        Mode::Toric => {
            if spec.exceptional != ExceptionalSpec::None {
                return Err(Error::MalformedInput("toric mode starts with no exceptional divisors".into()));
            }
            resolve(&toric_reduce(spec.critical, &spec.exponents)?, a)
        }
        Mode::LargestBranch => run_largest_branch(&spec.root()?, a.format),
        Mode::Principalize => run_principalize(&spec.root()?, a),
    }
}

fn stats_text(out: &mut String, stats: &TreeStats) {
    let hist = |m: &std::collections::BTreeMap<usize, u128>| {
        m.iter().map(|(d, k)| format!("{d}:{k}")).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(out, "branches: {}", stats.branch_count());
    let _ = writeln!(out, "nodes: {}", stats.node_count);
    let _ = writeln!(out, "max depth: {}", stats.max_depth);
    let _ = writeln!(out, "monomialization depth: {}", stats.monomialization_depth);
    let _ = writeln!(out, "branch lengths (depth:count): {}", hist(&stats.leaf_depths));
    let _ = writeln!(out, "monomialized at (depth:count): {}", hist(&stats.monomialization_depths));
    let _ = writeln!(out, "monotone: {}", if stats.monotone { "yes" } else { "no" });
    let _ = writeln!(out, "truncated: {}", if stats.truncated { "yes" } else { "no" });
}

fn resolve(root: &ChartState, a: &ResolveArgs) -> Result<Outcome> {
    let guard = guard_for(root, a);
    let (output, truncated) = match a.format {
        Format::Text => {
            let mut out = format!("problem: {}\n", describe(root));
            if root.sing_is_empty() {
                out.push_str("Sing(J, c) is empty: nothing to resolve\n");
                return Ok(Outcome::ok(out));
            }
            let choice = select_center(root)?;
            let _ = writeln!(out, "depth guard: {guard}");
            let _ = writeln!(out, "max t: {}", choice.value);
            let _ = writeln!(out, "first center: {}", choice.center);
            let stats = explore_stats_parallel(root, guard, a.jobs)?;
            stats_text(&mut out, &stats);
            (out, stats.truncated)
        }
        Format::Json | Format::Dot => {
            let tree = explore(root, guard)?;
            let out = match a.format {
                Format::Json => pretty(&tree.to_json()),
                _ => tree.to_dot(),
            };
            (out, tree.stats.truncated)
        }
    };
    Ok(Outcome {
        output,
        status: if truncated { EXIT_TRUNCATED } else { EXIT_OK },
    })
}

fn run_largest_branch(root: &ChartState, format: Format) -> Result<Outcome> {
    let branch = largest_branch(root)?;
    let mut values = vec![select_center(root)?.value];
    for (_, state) in &branch {
        if !state.sing_is_empty() {
            values.push(select_center(state)?.value);
        }
    }
    let output = match format {
        Format::Text => {
            let mut out = format!("problem: {}\n", describe(root));
            let _ = writeln!(out, "0: t = {}  J = {}", values[0], root.exponents);
            for (k, (edge, state)) in branch.iter().enumerate() {
                let t = values.get(k + 1).map_or("resolved".to_string(), |v| v.to_string());
                let _ = writeln!(
                    out,
                    "{}: chart X_{}  t = {}  J = {}  E = {}",
                    k + 1,
                    edge.chart_var,
                    t,
                    state.exponents,
                    state.exceptional()
                );
            }
            let last = branch.last().map_or(root, |(_, s)| s);
            let end = if last.is_exceptional_monomial() {
                "exceptional monomial"
            } else {
                "resolved"
            };
            let _ = writeln!(out, "{end} after {} blowups", branch.len());
            out
        }
        Format::Json => pretty(&json!({
            "root": root,
            "t": values.iter().map(|v| serde_json::to_value(v).expect("invariant serializes")).collect::<Vec<_>>(),
            "steps": branch.iter().map(|(edge, state)| json!({"edge": edge, "state": state})).collect::<Vec<_>>(),
        })),
        Format::Dot => {
            let mut out = String::from("digraph largest_branch {\n  node [shape=box];\n");
            let mut states = vec![root];
            states.extend(branch.iter().map(|(_, s)| s));
            for (k, s) in states.iter().enumerate() {
                let t = values.get(k).map_or("resolved".to_string(), |v| v.to_string());
                let _ = writeln!(out, "  n{k} [label=\"depth:{k} t:{t} J:{}\"];", s.exponents);
            }
            for (k, (edge, _)) in branch.iter().enumerate() {
                let _ = writeln!(out, "  n{} -> n{} [label=\"chart X_{}\"];", k, k + 1, edge.chart_var);
            }
            out.push_str("}\n");
            out
        }
    };
    Ok(Outcome::ok(output))
}

fn run_principalize(root: &ChartState, a: &ResolveArgs) -> Result<Outcome> {
    let guard = a.max_depth.unwrap_or(a.hard_limit);
    let trees = principalize(root, guard, 100_000)?;
    let output = match a.format {
        Format::Text => {
            let mut out = format!("problem: {}\n", describe(root));
            for (k, tree) in trees.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "stage {}: {}  max depth {}  nodes {}  leaves {}",
                    k + 1,
                    describe(tree.root()),
                    tree.stats.max_depth,
                    tree.nodes.len(),
                    tree.leaves().len()
                );
            }
            let _ = writeln!(out, "stages: {}", trees.len());
            out
        }
        Format::Json => pretty(&serde_json::Value::Array(trees.iter().map(ResolutionTree::to_json).collect())),
        Format::Dot => trees
            .iter()
            .enumerate()
            .map(|(k, t)| t.to_dot().replacen("digraph resolution", &format!("digraph stage_{}", k + 1), 1))
            .collect(),
    };
    Ok(Outcome::ok(output))
}

fn run_bounds(exponents: &[u64], critical: u64, format: Format) -> Result<Outcome> {
    ProblemSpec::new(exponents.to_vec(), critical, ExceptionalSpec::None, Mode::Resolve)?;
    let report = BoundReport::new(exponents, critical)?;
    let output = match format {
        Format::Json => pretty(&serde_json::to_value(&report).expect("report serializes")),
        _ => report.to_text(),
    };
    Ok(Outcome::ok(output))
}

fn run_table(n_max: usize, format: Format) -> Result<Outcome> {
    let table = bounds_table(n_max)?;
    let output = match format {
        Format::Json => pretty(&serde_json::to_value(&table).expect("table serializes")),
        _ => table.to_text(),
    };
    Ok(Outcome::ok(output))
}

/// Every vector of `n` exponents, each at least 1, with sum at most `d_max`.
pub fn exponent_vectors(n: usize, d_max: u64) -> Vec<Vec<u64>> {
    fn rec(prefix: &mut Vec<u64>, n: usize, left: u64, out: &mut Vec<Vec<u64>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let reserve = (n - prefix.len() - 1) as u64;
        for a in 1..=left.saturating_sub(reserve) {
            prefix.push(a);
            rec(prefix, n, left - a, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d_max >= n as u64 {
        rec(&mut Vec::new(), n, d_max, &mut out);
    }
    out
}

/// Whether the longest branch of an exceptional monomial `(a, c)` should
/// reach `(d - c + g)/g`: after dividing `a` and `c` by their gcd, `c`
/// must be one of the listed equality cases.
pub fn bound_attained_expected(a: &[u64], c: u64) -> bool {
    let g = a.iter().fold(c, |g, x| g.gcd(x));
    let reduced: Vec<u64> = a.iter().map(|x| x / g).collect();
    equality_cases(&reduced).contains(&(c / g))
}

/// Result of one verification suite.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn to_text(&self) -> String {
        let mut out = format!(
            "suite {}: {} checks, {} failures\n",
            self.suite,
            self.checked,
            self.failures.len()
        );
        for f in &self.failures {
            let _ = writeln!(out, "FAIL {f}");
        }
        out.push_str(if self.passed() { "PASS\n" } else { "FAIL\n" });
        out
    }
}

/// Longest branches of exceptional-monomial roots against `(d - c + g)/g`
/// and its equality cases, plus the consistency of every bound report.
pub fn verify_bounds(n_max: usize, d_max: u64) -> Result<VerifyReport> {
    let mut report = VerifyReport {
        suite: "bounds".into(),
        checked: 0,
        failures: Vec::new(),
    };
    for n in 1..=n_max {
        for a in exponent_vectors(n, d_max) {
            let d: u64 = a.iter().sum();
            for c in 1..=d {
                let bound = BoundReport::new(&a, c)?;
                report.checked += 1;
                if !bound.is_consistent() {
                    report.failures.push(format!("{a:?}, c={c}: inconsistent bound report"));
                }
                let root = ChartState::exceptional_monomial(&a, c)?;
                let guard = bound.bound_exceptional as usize + 1;
                let stats = explore_stats(&root, guard)?;
                let longest = stats.max_depth as u64;
                if stats.truncated || longest > bound.bound_exceptional {
                    report.failures.push(format!(
                        "{a:?}, c={c}: branch of length {longest} exceeds {}",
                        bound.bound_exceptional
                    ));
                } else if (longest == bound.bound_exceptional) != bound_attained_expected(&a, c) {
                    report.failures.push(format!(
                        "{a:?}, c={c}: longest branch {longest}, bound {}, equality expected {}",
                        bound.bound_exceptional,
                        bound_attained_expected(&a, c)
                    ));
                }
            }
        }
    }
    let max_sum = 2 * n_max.max(1) + 2;
    for (i, j) in r_recurrence_failures(max_sum)? {
        report.failures.push(format!("r({i},{j}) breaks its recurrence"));
    }
    Ok(report)
}

/// Monotonicity, memo equivalence and the exceptional degree bound over
/// roots with `E = ∅` and with every variable exceptional.
pub fn verify_invariants(n_max: usize, d_max: u64) -> Result<VerifyReport> {
    let mut report = VerifyReport {
        suite: "invariants".into(),
        checked: 0,
        failures: Vec::new(),
    };
    for n in 1..=n_max {
        for a in exponent_vectors(n, d_max) {
            let d: u64 = a.iter().sum();
            for c in 1..=d {
                for all_exceptional in [false, true] {
                    let root = if all_exceptional {
                        ChartState::exceptional_monomial(&a, c)?
                    } else {
                        ChartState::from_exponents(&a, c)?
                    };
                    let guard = default_depth_guard(&root, DEFAULT_HARD_LIMIT);
                    let memo = explore_stats(&root, guard)?;
                    let plain = explore_stats_unmemoized(&root, guard)?;
                    report.checked += 1;
                    let tag = format!("{a:?}, c={c}, E={}", if all_exceptional { "all" } else { "none" });
                    if memo.truncated {
                        report.failures.push(format!("{tag}: truncated at depth {guard}"));
                    }
                    if !memo.monotone {
                        report.failures.push(format!("{tag}: max t does not drop along some edge"));
                    }
                    if memo != plain {
                        report.failures.push(format!("{tag}: memoized and plain exploration differ"));
                    }
                    let over = exceptional_degree_violations(&memo, d, c);
                    if !over.is_empty() {
                        report.failures.push(format!("{tag}: exceptional degree too large at depths {over:?}"));
                    }
                }
            }
        }
    }
    Ok(report)
}

fn run_verify(suite: Suite, n_max: Option<usize>, d_max: u64, format: Format) -> Result<Outcome> {
    let (text, json, passed) = match suite {
        Suite::Catalan => {
            let report = verify_catalan_identity(n_max.unwrap_or(20))?;
            let mut text = String::from("    n  p(n,n+1)  n+sum p(j,n)  sum C_k  r(n,1)\n");
            for r in &report.rows {
                let _ = writeln!(
                    text,
                    "{:>5}  {:>8}  {:>12}  {:>7}  {:>6}  {}",
                    r.n,
                    r.propagation,
                    r.propagation_sum,
                    r.catalan_sum,
                    if r.r_matches { "ok" } else { "bad" },
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            text.push_str(if report.all_pass { "PASS\n" } else { "FAIL\n" });
            (text, serde_json::to_value(&report).expect("report serializes"), report.all_pass)
        }
        Suite::Bounds | Suite::Invariants => {
            let n = n_max.unwrap_or(3);
            let report = if suite == Suite::Bounds {
                verify_bounds(n, d_max)?
            } else {
                verify_invariants(n, d_max)?
            };
            (
                report.to_text(),
                serde_json::to_value(&report).expect("report serializes"),
                report.passed(),
            )
        }
    };
    let output = match format {
        Format::Json => pretty(&json),
        _ => text,
    };
    Ok(Outcome {
        output,
        status: if passed { EXIT_OK } else { EXIT_VERIFY_FAILED },
    })
}
