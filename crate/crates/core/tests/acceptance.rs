//! Exit criteria. Runs without the libtest harness so that every criterion
//! prints its PASS/FAIL line; the process fails if any criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use monores::combinatorics::{global_bound, verify_catalan_identity};
use monores::explorer::{
    default_depth_guard, explore, explore_stats, explore_stats_unmemoized, largest_branch, monomialization_depth,
    ResolutionTree, TreeStats, DEFAULT_HARD_LIMIT,
};
use monores::{gamma, ChartState, ExponentVector, Rational};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Exponent vectors of length `n`, entries at least 1, sum at most `d_max`.
fn vectors(n: usize, d_max: u64) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                let used: u64 = v.iter().sum();
                (1..=d_max.saturating_sub(used)).map(move |a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().sum::<u64>() <= d_max);
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Largest exceptional degree at each depth against
/// `2^N m_0 + (2^N - 1)(d - c)`; `m_0 = 0` for roots without exceptional
/// divisors.
fn degree_bound_holds(stats: &TreeStats, d: u64, c: u64) -> bool {
    let m0 = stats.max_m_degree[0];
    stats.max_m_degree.iter().enumerate().all(|(depth, deg)| {
        if depth > 62 {
            return true;
        }
        let pow = Rational::from_integer(1i64 << depth.min(62));
        let bound = pow * m0 + (pow - Rational::from_integer(1)) * Rational::from_integer((d - c) as i64);
        *deg <= bound
    })
}

/// Catalan numbers by the convolution recurrence.
fn catalan_oracle(n_max: usize) -> Vec<BigUint> {
    let mut c = vec![BigUint::from(1u32)];
    for n in 0..n_max {
        let next = (0..=n).map(|i| &c[i] * &c[n - i]).sum();
        c.push(next);
    }
    c
}

fn criterion_1() -> Verdict {
    let report = match verify_catalan_identity(20) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let cat = catalan_oracle(20);
    let mut partial = BigUint::from(0u32);
    let mut sums_ok = report.rows.len() == 20;
    for row in &report.rows {
        partial += &cat[row.n];
        sums_ok &= row.propagation == partial && row.catalan_sum == partial;
    }
    let first: Vec<String> = report.rows.iter().take(4).map(|r| r.propagation.to_string()).collect();
    let head_ok = first == ["1", "3", "8", "22"];
    verdict(
        report.all_pass && sums_ok && head_ok,
        format!("p(n,n+1) for n=1..4: {}; n<=20 all equal", first.join(",")),
    )
}

struct MinimalRoot {
    a: &'static [u64],
    c: u64,
    expected: usize,
}

const MINIMAL_ROOTS: [MinimalRoot; 3] = [
    MinimalRoot { a: &[3], c: 2, expected: 1 },
    MinimalRoot { a: &[2, 3], c: 2, expected: 3 },
    MinimalRoot { a: &[2, 2, 2], c: 2, expected: 8 },
];

fn minimal_stats() -> Vec<(&'static MinimalRoot, TreeStats)> {
    MINIMAL_ROOTS
        .iter()
        .map(|r| {
            let root = ChartState::from_exponents(r.a, r.c).unwrap();
            (r, explore_stats(&root, default_depth_guard(&root, DEFAULT_HARD_LIMIT)).unwrap())
        })
        .collect()
}

fn criterion_2(runtime_n3: &mut Duration) -> Verdict {
    let mut pass = true;
    let mut found = Vec::new();
    for r in &MINIMAL_ROOTS {
        let root = ChartState::from_exponents(r.a, r.c).unwrap();
        let guard = default_depth_guard(&root, DEFAULT_HARD_LIMIT);
        let start = Instant::now();
        let tree = explore(&root, guard).unwrap();
        if r.a.len() == 3 {
            *runtime_n3 = start.elapsed();
        }
        let depth = monomialization_depth(&tree);
        let d: u64 = r.a.iter().sum();
        let bound = global_bound(r.a.len(), d, r.c).unwrap();
        pass &= depth.as_ref().ok() == Some(&r.expected) && num_bigint::BigInt::from(tree.stats.max_depth) <= bound;
        found.push(format!("{:?}", depth.ok()));
    }
    let greedy = largest_branch(&ChartState::from_exponents(&[2, 2, 2, 2], 2).unwrap()).map(|b| b.len());
    pass &= greedy.as_ref().ok() == Some(&22);
    pass &= *runtime_n3 < Duration::from_secs(60);
    verdict(
        pass,
        format!(
            "depths n=1..3: {}; n=4 largest branch {:?}; n=3 in {:.2?}",
            found.join(","),
            greedy.ok(),
            runtime_n3
        ),
    )
}

fn exceptional_roots() -> Vec<(Vec<u64>, u64)> {
    let mut roots = Vec::new();
    for n in 1..=4 {
        for a in vectors(n, 12) {
            let d: u64 = a.iter().sum();
            for c in 1..=d {
                roots.push((a.clone(), c));
            }
        }
    }
    roots
}

/// `c` values where the longest branch reaches `(d - c + 1)` for
/// coprime data: 1, d and the tail sums of the ascending exponents plus 1.
fn attains_bound(a: &[u64], c: u64) -> bool {
    let g = a.iter().fold(c, |g, &x| gcd(g, x));
    let mut sorted: Vec<u64> = a.iter().map(|x| x / g).collect();
    sorted.sort_unstable();
    let c = c / g;
    let d: u64 = sorted.iter().sum();
    let mut tail = 0;
    let mut cases = vec![1, d];
    for x in sorted.iter().skip(1).rev() {
        tail += x;
        cases.push(tail + 1);
    }
    cases.contains(&c)
}

fn criterion_3(stats: &mut Vec<(u64, u64, TreeStats)>) -> Verdict {
    let start = Instant::now();
    let mut over = Vec::new();
    let mut equality = Vec::new();
    let roots = exceptional_roots();
    for (a, c) in &roots {
        let d: u64 = a.iter().sum();
        let g = a.iter().fold(*c, |g, &x| gcd(g, x));
        let bound = ((d - c + g) / g) as usize;
        let root = ChartState::exceptional_monomial(a, *c).unwrap();
        let s = explore_stats(&root, bound + 1).unwrap();
        if s.truncated || s.max_depth > bound {
            over.push(format!("{a:?},c={c}"));
        } else if (s.max_depth == bound) != attains_bound(a, *c) {
            equality.push(format!("{a:?},c={c}"));
        }
        stats.push((d, *c, s));
    }
    let elapsed = start.elapsed();
    verdict(
        over.is_empty() && equality.is_empty() && elapsed < Duration::from_secs(120),
        format!(
            "{} roots, {} over the bound, {} equality mismatches {:?}, {:.2?}",
            roots.len(),
            over.len(),
            equality.len(),
            equality.iter().take(3).collect::<Vec<_>>(),
            elapsed
        ),
    )
}

fn criterion_4(minimal: &[(&MinimalRoot, TreeStats)], exceptional: &[(u64, u64, TreeStats)], example: &TreeStats) -> Verdict {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (r, s) in minimal {
        checked += 1;
        if !degree_bound_holds(s, r.a.iter().sum(), r.c) {
            failures.push(format!("{:?}", r.a));
        }
    }
    checked += 1;
    if !degree_bound_holds(example, 10, 4) {
        failures.push("(5,4,1)".into());
    }
    for (d, c, s) in exceptional {
        checked += 1;
        if !degree_bound_holds(s, *d, *c) {
            failures.push(format!("d={d},c={c}"));
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{checked} trees ({} with E empty at the root, rest with the root degree carried), {} violations {:?}",
            minimal.len() + 1,
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn criterion_5(example: &mut Option<TreeStats>) -> Verdict {
    let root = ChartState::from_exponents(&[5, 4, 1], 4).unwrap();
    let start = Instant::now();
    let s = explore_stats(&root, 40).unwrap();
    let elapsed = start.elapsed();
    let at_15 = s.monomialization_depths.get(&15).copied().unwrap_or(0);
    let minimal = explore_stats(&ChartState::from_exponents(&[2, 2, 2], 2).unwrap(), 100).unwrap();
    let pass = at_15 > 0 && minimal.monomialization_depth == 8 && elapsed < Duration::from_secs(60);
    let detail = format!(
        "{at_15} branches reach J=M or Sing empty at depth 15 (deepest such depth {}); minimal n=3 needs {}; {:.2?}",
        s.monomialization_depths.keys().max().copied().unwrap_or(0),
        minimal.monomialization_depth,
        elapsed
    );
    *example = Some(s);
    verdict(pass, detail)
}

fn criterion_6(minimal: &[(&MinimalRoot, TreeStats)], exceptional: &[(u64, u64, TreeStats)], example: &TreeStats) -> Verdict {
    let all: Vec<&TreeStats> = minimal
        .iter()
        .map(|(_, s)| s)
        .chain(exceptional.iter().map(|(_, _, s)| s))
        .chain(std::iter::once(example))
        .collect();
    let bad = all.iter().filter(|s| !s.monotone).count();
    verdict(bad == 0, format!("{} trees, {bad} with a non-decreasing step", all.len()))
}

/// Shape and center sequence of a tree in breadth-first order.
fn skeleton(tree: &ResolutionTree) -> Vec<(usize, Option<monores::Stratum>, Vec<usize>)> {
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in &tree.edges {
        children.entry(e.from).or_default().push(e.edge.chart_var);
    }
    tree.nodes
        .iter()
        .map(|n| (n.depth, n.center, children.remove(&n.id).unwrap_or_default()))
        .collect()
}

fn criterion_7() -> Verdict {
    let mut checked = 0;
    let mut failures = Vec::new();
    for n in 1..=3 {
        for a in vectors(n, 8) {
            let d: u64 = a.iter().sum();
            for c in 1..=d {
                let base = ExponentVector::from_integers(&a);
                let reference = gamma(&base, &Rational::from_integer(c as i64), n).unwrap();
                let tree = explore(&ChartState::exceptional_monomial(&a, c).unwrap(), 100).unwrap();
                let shape = skeleton(&tree);
                for k in [2u64, 3, 5] {
                    checked += 1;
                    let ka: Vec<u64> = a.iter().map(|x| x * k).collect();
                    let scaled = gamma(
                        &ExponentVector::from_integers(&ka),
                        &Rational::from_integer((k * c) as i64),
                        n,
                    )
                    .unwrap();
                    let scaled_tree = explore(&ChartState::exceptional_monomial(&ka, k * c).unwrap(), 100).unwrap();
                    if scaled != reference || skeleton(&scaled_tree) != shape || tree.stats.truncated {
                        failures.push(format!("{a:?},c={c},k={k}"));
                    }
                }
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!("{checked} scaled pairs, {} differ {:?}", failures.len(), failures.iter().take(3).collect::<Vec<_>>()),
    )
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let mut worst: Option<(usize, Vec<u64>, u64)> = None;
    let mut truncated = 0;
    let mut roots = 0;
    let mut above = 0;
    for a in vectors(2, 12) {
        let d: u64 = a.iter().sum();
        let low = *a.iter().min().unwrap();
        for c in (low + 1)..=d {
            roots += 1;
            let root = ChartState::from_exponents(&a, c).unwrap();
            let s = explore_stats(&root, default_depth_guard(&root, DEFAULT_HARD_LIMIT)).unwrap();
            truncated += usize::from(s.truncated);
            let depth = s.monomialization_depth;
            if depth > 3 {
                above += 1;
            }
            if worst.as_ref().is_none_or(|w| depth > w.0) {
                worst = Some((depth, a.clone(), c));
            }
        }
    }
    let elapsed = start.elapsed();
    let (max, a, c) = worst.unwrap();
    verdict(
        max <= 3 && truncated == 0 && elapsed < Duration::from_secs(60),
        format!(
            "{roots} roots, {truncated} truncated, max monomialization depth {max} at {a:?},c={c}, {above} above 3, {elapsed:.2?}"
        ),
    )
}

fn criterion_9() -> Verdict {
    let start = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for n in 1..=3 {
        for a in vectors(n, 9) {
            let d: u64 = a.iter().sum();
            for c in 1..=d {
                for root in [
                    ChartState::from_exponents(&a, c).unwrap(),
                    ChartState::exceptional_monomial(&a, c).unwrap(),
                ] {
                    checked += 1;
                    let guard = default_depth_guard(&root, DEFAULT_HARD_LIMIT);
                    let memo = explore_stats(&root, guard).unwrap();
                    let plain = explore_stats_unmemoized(&root, guard).unwrap();
                    if memo != plain || memo.truncated {
                        failures.push(format!("{a:?},c={c},E={}", root.exceptional()));
                    }
                }
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{checked} roots, {} differ {:?}, {:.2?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>(),
            start.elapsed()
        ),
    )
}

fn main() {
    let mut results = Vec::new();
    let mut report = |id: usize, name: &str, v: Verdict| {
        println!("criterion {id} {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, v.pass));
    };

    report(1, "Catalan identity", criterion_1());
    let mut runtime_n3 = Duration::ZERO;
    report(2, "monomialization depth of minimal roots", criterion_2(&mut runtime_n3));
    let mut exceptional = Vec::new();
    report(3, "exceptional monomial bound and equality cases", criterion_3(&mut exceptional));
    let mut example = None;
    let c5 = criterion_5(&mut example);
    let example = example.expect("criterion 5 explores the example");
    let minimal = minimal_stats();
    report(4, "exceptional degree growth", criterion_4(&minimal, &exceptional, &example));
    report(5, "higher codimension example", c5);
    report(6, "monotonicity", criterion_6(&minimal, &exceptional, &example));
    report(7, "scaling invariance", criterion_7());
    report(8, "n=2 higher codimension constant", criterion_8());
    report(9, "memoized equals plain exploration", criterion_9());

    let failed: Vec<usize> = results.iter().filter(|(_, p)| !p).map(|(id, _)| *id).collect();
    if failed.is_empty() {
        println!("all criteria passed");
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
