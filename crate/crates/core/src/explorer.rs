//! Resolution trees: exhaustive exploration, the greedy largest branch,
//! principalization and the toric reduction.
//!
//! Every chart of every blowup is a branch point; a branch ends when the
//! singular locus of the chart is empty. Counting is per branch (chart
//! chain), never on a glued global variety.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::combinatorics::global_bound;
use crate::error::{Error, Result};
use crate::invariant::{select_center, InvariantValue};
use crate::monomial::{ChartState, ExponentVector, Rational, StateSignature, Stratum};
use crate::transform::{blowup_at_max, BlowupEdge};

/// Default ceiling on the depth guard.
pub const DEFAULT_HARD_LIMIT: usize = 10_000;

/// Default ceiling on the number of nodes a materialized tree may hold.
pub const DEFAULT_NODE_LIMIT: usize = 1_000_000;

/// Aggregate statistics of a (sub)tree, with depths relative to its root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeStats {
    /// Longest branch, in blowups.
    pub max_depth: usize,
    /// Largest depth, over branches, at which `J` first becomes an
    /// exceptional monomial or the singular locus first becomes empty.
    pub monomialization_depth: usize,
    pub node_count: u128,
    /// Number of branches ending at each depth.
    pub leaf_depths: BTreeMap<usize, u128>,
    /// Number of branches by the depth at which they first become an
    /// exceptional monomial or resolved. Branches truncated before that are
    /// not counted.
    pub monomialization_depths: BTreeMap<usize, u128>,
    pub truncated: bool,
    /// Largest total degree of the exceptional part at each depth.
    pub max_m_degree: Vec<Rational>,
    /// Whether the chart maximum of `t` strictly drops along every edge.
    pub monotone: bool,
}

impl TreeStats {
    fn leaf(state: &ChartState, truncated: bool) -> Self {
        Self {
            max_depth: 0,
            monomialization_depth: 0,
            node_count: 1,
            leaf_depths: BTreeMap::from([(0, 1)]),
            monomialization_depths: if truncated {
                BTreeMap::new()
            } else {
                BTreeMap::from([(0, 1)])
            },
            truncated,
            max_m_degree: vec![m_degree(state)],
            monotone: true,
        }
    }

    /// Number of branches (leaves).
    pub fn branch_count(&self) -> u128 {
        self.leaf_depths.values().sum()
    }
}

/// Total degree of the exceptional part of `J`.
pub fn m_degree(state: &ChartState) -> Rational {
    state.exponents.restrict(state.exceptional()).total()
}

/// Depths `N` at which the largest exceptional degree exceeds
/// `2^N m_0 + (2^N - 1)(d - c)`, where `m_0` is the exceptional degree at
/// the root. With `E = ∅` at the root, `m_0 = 0`.
pub fn exceptional_degree_violations(stats: &TreeStats, d: u64, c: u64) -> Vec<usize> {
    let excess = i128::from(d.saturating_sub(c));
    let m0 = stats.max_m_degree.first().copied().unwrap_or_default();
    let (m0_num, m0_den) = (i128::from(*m0.numer()), i128::from(*m0.denom()));
    stats
        .max_m_degree
        .iter()
        .enumerate()
        .filter(|(depth, deg)| {
            let (num, den) = (i128::from(*deg.numer()), i128::from(*deg.denom()));
            if excess == 0 && m0_num == 0 {
                return num > 0;
            }
            // Past depth 62 the bound exceeds every i64 degree.
            if *depth > 62 {
                return false;
            }
            let pow = 1i128 << depth;
            // deg > pow*m0 + (pow-1)*excess, cleared of denominators
            num * m0_den > pow * m0_num * den + (pow - 1) * excess * den * m0_den
        })
        .map(|(depth, _)| depth)
        .collect()
}

/// `J` is an exceptional monomial (`I = 1`) or the chart is resolved.
pub fn is_monomialized(state: &ChartState) -> bool {
    state.is_exceptional_monomial() || state.sing_is_empty()
}

#[derive(Clone)]
struct Summary {
    stats: TreeStats,
    max_t: Option<InvariantValue>,
}

fn combine(state: &ChartState, max_t: InvariantValue, subtrees: Vec<Summary>) -> Summary {
    let monomial_here = state.is_exceptional_monomial();
    let mut stats = TreeStats {
        max_depth: 0,
        monomialization_depth: 0,
        node_count: 1,
        leaf_depths: BTreeMap::new(),
        monomialization_depths: BTreeMap::new(),
        truncated: false,
        max_m_degree: vec![m_degree(state)],
        monotone: true,
    };
    for sub in &subtrees {
        let s = &sub.stats;
        stats.max_depth = stats.max_depth.max(s.max_depth + 1);
        if !monomial_here {
            stats.monomialization_depth = stats.monomialization_depth.max(s.monomialization_depth + 1);
            for (d, k) in &s.monomialization_depths {
                *stats.monomialization_depths.entry(d + 1).or_insert(0) += k;
            }
        }
        stats.node_count += s.node_count;
        for (d, k) in &s.leaf_depths {
            *stats.leaf_depths.entry(d + 1).or_insert(0) += k;
        }
        stats.truncated |= s.truncated;
        for (k, deg) in s.max_m_degree.iter().enumerate() {
            match stats.max_m_degree.get_mut(k + 1) {
                Some(slot) => *slot = (*slot).max(*deg),
                None => stats.max_m_degree.push(*deg),
            }
        }
        let drops = sub.max_t.as_ref().is_none_or(|t| *t < max_t);
        stats.monotone &= s.monotone && drops;
    }
    if monomial_here {
        stats.monomialization_depths = BTreeMap::from([(0, stats.branch_count())]);
    }
    Summary {
        stats,
        max_t: Some(max_t),
    }
}

/// Stats-only exploration with an optional memo table keyed by the exact
/// chart signature.
struct StatsExplorer {
    memo: Option<HashMap<StateSignature, Summary>>,
}

impl StatsExplorer {
    fn new(memoize: bool) -> Self {
        Self {
            memo: memoize.then(HashMap::new),
        }
    }

    fn summary(&mut self, state: &ChartState, remaining: usize) -> Result<Summary> {
        if state.sing_is_empty() {
            return Ok(Summary {
                stats: TreeStats::leaf(state, false),
                max_t: None,
            });
        }
        if remaining == 0 {
            return Ok(Summary {
                stats: TreeStats::leaf(state, true),
                max_t: None,
            });
        }
        let key = self.memo.as_ref().map(|_| state.signature());
        if let (Some(memo), Some(key)) = (&self.memo, &key) {
            if let Some(hit) = memo.get(key) {
                if hit.stats.max_depth <= remaining {
                    return Ok(hit.clone());
                }
            }
        }
        let (choice, children) = blowup_at_max(state)?;
        let mut subtrees = Vec::with_capacity(children.len());
        for (_, child) in &children {
            subtrees.push(self.summary(child, remaining - 1)?);
        }
        let summary = combine(state, choice.value, subtrees);
        if let (Some(memo), Some(key)) = (&mut self.memo, key) {
            if !summary.stats.truncated {
                memo.insert(key, summary.clone());
            }
        }
        Ok(summary)
    }
}

fn check_guard(depth_guard: usize) -> Result<()> {
    if depth_guard == 0 {
        return Err(Error::Precondition("depth guard must be at least 1".into()));
    }
    Ok(())
}

/// Statistics of the full resolution tree below `root`, sharing the
/// statistics of charts with identical signatures.
pub fn explore_stats(root: &ChartState, depth_guard: usize) -> Result<TreeStats> {
    check_guard(depth_guard)?;
    Ok(StatsExplorer::new(true).summary(root, depth_guard)?.stats)
}

/// Same as [`explore_stats`] without sharing.
pub fn explore_stats_unmemoized(root: &ChartState, depth_guard: usize) -> Result<TreeStats> {
    check_guard(depth_guard)?;
    Ok(StatsExplorer::new(false).summary(root, depth_guard)?.stats)
}

/// [`explore_stats`] with the subtrees of the root's charts distributed
/// over `jobs` threads, each with its own memo table.
pub fn explore_stats_parallel(root: &ChartState, depth_guard: usize, jobs: usize) -> Result<TreeStats> {
    check_guard(depth_guard)?;
    if jobs <= 1 || root.sing_is_empty() {
        return explore_stats(root, depth_guard);
    }
    let (choice, children) = blowup_at_max(root)?;
    let mut results: Vec<Option<Result<Summary>>> = vec![None; children.len()];
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> = (0..jobs)
            .map(|w| (w..children.len()).step_by(jobs).collect())
            .filter(|c: &Vec<usize>| !c.is_empty())
            .collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                let children = &children;
                scope.spawn(move || {
                    let mut explorer = StatsExplorer::new(true);
                    chunk
                        .into_iter()
                        .map(|k| (k, explorer.summary(&children[k].1, depth_guard - 1)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (k, r) in h.join().expect("exploration worker panicked") {
                results[k] = Some(r);
            }
        }
    });
    let subtrees = results
        .into_iter()
        .map(|r| r.expect("every chart explored"))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(root, choice.value, subtrees).stats)
}

/// `E = ∅` and every exponent is at least `c`.
pub fn is_minimal_codimensional(state: &ChartState) -> bool {
    state.exceptional().is_empty()
        && (1..=state.num_vars).all(|v| state.exponents.get(v) >= state.critical_rational())
}

/// Default depth guard: the global bound for minimal codimensional roots,
/// where it is proven; `hard_limit` for every other root. Never above
/// `hard_limit`.
pub fn default_depth_guard(root: &ChartState, hard_limit: usize) -> usize {
    let hard_limit = hard_limit.max(1);
    let d = root.total_degree().to_integer().max(0) as u64;
    let c = root.critical;
    if d < c {
        return 1;
    }
    if !is_minimal_codimensional(root) {
        return hard_limit;
    }
    global_bound(root.num_vars, d, c)
        .ok()
        .and_then(|b| b.to_usize())
        .unwrap_or(usize::MAX)
        .clamp(1, hard_limit)
}

/// A materialized node of a resolution tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub depth: usize,
    pub state: ChartState,
    /// Maximum of `t` on the chart; absent when the chart is resolved or
    /// truncated.
    pub t: Option<InvariantValue>,
    pub center: Option<Stratum>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub from: usize,
    pub to: usize,
    #[serde(flatten)]
    pub edge: BlowupEdge,
}

/// Summary fields written with an exported tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportStats {
    pub max_depth: usize,
    pub monomialization_depth: usize,
    pub nodes: u64,
    pub truncated: bool,
}

/// Resolution tree with nodes numbered breadth-first from the root (id 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionTree {
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<TreeEdge>,
    pub stats: TreeStats,
}

impl ResolutionTree {
    pub fn root(&self) -> &ChartState {
        &self.nodes[0].state
    }

    /// Resolved leaves (empty singular locus).
    pub fn leaves(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|n| n.t.is_none() && !n.truncated)
            .map(|n| n.id)
            .collect()
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = &TreeEdge> {
        self.edges.iter().filter(move |e| e.from == id)
    }

    pub fn export_stats(&self) -> ExportStats {
        ExportStats {
            max_depth: self.stats.max_depth,
            monomialization_depth: self.stats.monomialization_depth,
            nodes: self.nodes.len() as u64,
            truncated: self.stats.truncated,
        }
    }

    /// Graphviz rendering; node and edge order follow the numbering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph resolution {\n  node [shape=box];\n");
        for n in &self.nodes {
            let t = match (&n.t, n.truncated) {
                (Some(t), _) => t.to_string(),
                (None, true) => "truncated".to_string(),
                (None, false) => "resolved".to_string(),
            };
            let _ = writeln!(
                out,
                "  n{} [label=\"depth:{} t:{} J:{}\"];",
                n.id,
                n.depth,
                t,
                n.state.exponents.to_monomial_string()
            );
        }
        for e in &self.edges {
            let _ = writeln!(out, "  n{} -> n{} [label=\"chart X_{}\"];", e.from, e.to, e.edge.chart_var);
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TreeJson {
            root: self.root().clone(),
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
            stats: self.export_stats(),
        })
        .expect("tree serializes")
    }

    /// Reads back the JSON export. Statistics not in the export are
    /// recomputed from the nodes.
    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let raw: TreeJson = serde_json::from_value(value).map_err(|e| Error::MalformedInput(e.to_string()))?;
        if raw.nodes.first().map(|n| &n.state) != Some(&raw.root) {
            return Err(Error::MalformedInput("first node is not the root".into()));
        }
        let stats = stats_from_nodes(&raw.nodes, &raw.edges);
        if stats.max_depth != raw.stats.max_depth || stats.truncated != raw.stats.truncated {
            return Err(Error::MalformedInput("stats do not match the nodes".into()));
        }
        Ok(Self {
            nodes: raw.nodes,
            edges: raw.edges,
            stats,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    root: ChartState,
    nodes: Vec<TreeNode>,
    edges: Vec<TreeEdge>,
    stats: ExportStats,
}

fn stats_from_nodes(nodes: &[TreeNode], edges: &[TreeEdge]) -> TreeStats {
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for e in edges {
        children[e.from].push(e.to);
    }
    fn walk(id: usize, nodes: &[TreeNode], children: &[Vec<usize>]) -> Summary {
        let node = &nodes[id];
        match &node.t {
            None => Summary {
                stats: TreeStats::leaf(&node.state, node.truncated),
                max_t: None,
            },
            Some(t) => {
                let subs = children[id].iter().map(|&k| walk(k, nodes, children)).collect();
                combine(&node.state, t.clone(), subs)
            }
        }
    }
    walk(0, nodes, &children).stats
}

/// Materializes the full resolution tree below `root`.
pub fn explore(root: &ChartState, depth_guard: usize) -> Result<ResolutionTree> {
    explore_with_limit(root, depth_guard, DEFAULT_NODE_LIMIT)
}

/// [`explore`] with an explicit cap on the number of nodes.
pub fn explore_with_limit(root: &ChartState, depth_guard: usize, node_limit: usize) -> Result<ResolutionTree> {
    check_guard(depth_guard)?;
    let mut base = root.clone();
    base.depth = 0;
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([base]);
    while let Some(state) = queue.pop_front() {
        let id = nodes.len();
        if id >= node_limit {
            return Err(Error::Indeterminate(format!(
                "tree exceeds {node_limit} nodes; use statistics-only exploration"
            )));
        }
        let depth = state.depth;
        if state.sing_is_empty() || depth >= depth_guard {
            let truncated = !state.sing_is_empty();
            nodes.push(TreeNode {
                id,
                depth,
                state,
                t: None,
                center: None,
                truncated,
            });
            continue;
        }
        let (choice, children) = blowup_at_max(&state)?;
        let first_child = nodes.len() + queue.len() + 1;
        for (k, (edge, child)) in children.into_iter().enumerate() {
            edges.push(TreeEdge {
                from: id,
                to: first_child + k,
                edge,
            });
            queue.push_back(child);
        }
        nodes.push(TreeNode {
            id,
            depth,
            state,
            t: Some(choice.value),
            center: Some(choice.center),
            truncated: false,
        });
    }
    let stats = stats_from_nodes(&nodes, &edges);
    Ok(ResolutionTree { nodes, edges, stats })
}

/// Largest depth over branches at which the chart first becomes an
/// exceptional monomial or resolved.
pub fn monomialization_depth(tree: &ResolutionTree) -> Result<usize> {
    if tree.stats.truncated {
        return Err(Error::Indeterminate("tree was truncated by the depth guard".into()));
    }
    Ok(tree.stats.monomialization_depth)
}

/// Greedy branch from a minimal codimensional root (`E = ∅`, every
/// `a_i >= c`): at each blowup follow the chart whose maximum of `t` is
/// largest (resolved charts rank lowest, ties to the highest chart
/// variable), until the chart is an exceptional monomial or resolved.
pub fn largest_branch(root: &ChartState) -> Result<Vec<(BlowupEdge, ChartState)>> {
    if !is_minimal_codimensional(root) {
        return Err(Error::UnsupportedStrategy(
            "largest branch needs E = ∅ and every exponent at least c".into(),
        ));
    }
    let mut branch = Vec::new();
    let mut state = root.clone();
    state.depth = 0;
    while !is_monomialized(&state) {
        let (_, children) = blowup_at_max(&state)?;
        let mut best: Option<(Option<InvariantValue>, usize, BlowupEdge, ChartState)> = None;
        for (edge, child) in children {
            let value = if child.sing_is_empty() {
                None
            } else {
                Some(select_center(&child)?.value)
            };
            let better = match &best {
                None => true,
                Some((bv, bj, _, _)) => (&value, edge.chart_var) > (bv, *bj),
            };
            if better {
                best = Some((value, edge.chart_var, edge, child));
            }
        }
        let (_, _, edge, child) = best.ok_or_else(|| Error::Internal("blowup without charts".into()))?;
        branch.push((edge, child.clone()));
        state = child;
    }
    Ok(branch)
}

/// Maximum order of `J`: its total degree, attained at the origin.
fn max_order(state: &ChartState) -> u64 {
    state.total_degree().to_integer().max(0) as u64
}

/// Chains resolutions down to a principal ideal: resolve with `c` the
/// maximum order of `J`, then restart every distinct leaf with its own
/// maximum order and all accumulated hypersurfaces as `E`, until the
/// leaves reach `J = 1`. Trees are returned in the order they were
/// resolved.
pub fn principalize(root: &ChartState, depth_guard: usize, tree_limit: usize) -> Result<Vec<ResolutionTree>> {
    if !root.exceptional().is_empty() {
        return Err(Error::Precondition("principalization starts with E = ∅".into()));
    }
    if !root.exponents.is_integral() {
        return Err(Error::Precondition("principalization needs integral exponents".into()));
    }
    let mut trees = Vec::new();
    let mut seen = HashSet::new();
    let mut pending = VecDeque::new();
    let d = max_order(root);
    if d >= 1 {
        pending.push_back(ChartState::root(root.exponents.clone(), root.num_vars, d, root.exceptional())?);
    }
    while let Some(start) = pending.pop_front() {
        if !seen.insert(start.signature()) {
            continue;
        }
        if trees.len() >= tree_limit {
            return Err(Error::Indeterminate(format!("more than {tree_limit} trees needed")));
        }
        let tree = explore(&start, depth_guard)?;
        if tree.stats.truncated {
            trees.push(tree);
            return Err(Error::Indeterminate("a principalization stage was truncated".into()));
        }
        for leaf in tree.leaves() {
            let state = &tree.nodes[leaf].state;
            let order = max_order(state);
            if order >= 1 {
                pending.push_back(ChartState::root(
                    state.exponents.clone(),
                    state.num_vars,
                    order,
                    state.exceptional(),
                )?);
            }
        }
        trees.push(tree);
    }
    Ok(trees)
}

/// The monomial basic object `(x^a, c)` with `E = ∅` that stands for the
/// hypersurface `Z^c - x^a`.
pub fn toric_reduce(c: u64, a: &[u64]) -> Result<ChartState> {
    if c < 2 {
        return Err(Error::SmoothInput(c));
    }
    if a.is_empty() {
        return Err(Error::MalformedInput("no exponents".into()));
    }
    ChartState::from_exponents(a, c)
}

/// Exponent vector of the monomial part at every node, for reporting.
pub fn exceptional_part(state: &ChartState) -> ExponentVector {
    state.exponents.restrict(state.exceptional())
}
