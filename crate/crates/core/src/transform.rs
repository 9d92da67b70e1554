//! One monoidal transformation of a monomial chart.
//!
//! Blowing up the coordinate stratum `Z` gives one chart per variable
//! `j ∈ Z`. In chart `j` the new exceptional divisor `Y'` reuses the index
//! `j`, its exponent becomes `Σ_{i∈Z} a_i - c` and every other exponent is
//! unchanged.
//!
//! The divisor ledger of the child depends on the child invariant, which
//! in turn depends on the ledger. The child is therefore evaluated at its
//! origin level by level: each level's `D_i'` and `E_i'` are fixed from the
//! part of the child invariant already known, before descending further.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariant::{descend, select_center, CenterChoice, Descent, InvariantEntry, InvariantValue, LevelSource};
use crate::monomial::{ChartState, DivisorLedger, ExponentVector, Rational, RationalRepr, Stratum, VarSet};

/// Edge of a resolution tree: the center blown up and the chart taken.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlowupEdge {
    pub center: Stratum,
    #[serde(rename = "chart")]
    pub chart_var: usize,
    #[serde(with = "rational_pair")]
    pub theta: Rational,
}

mod rational_pair {
    use super::*;

    pub fn serialize<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalRepr::from(r).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        Rational::try_from(RationalRepr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// All charts of the blowup of `state` along `center`.
pub fn blowup(state: &ChartState, center: Stratum) -> Result<Vec<(BlowupEdge, ChartState)>> {
    if center.is_empty() || !center.is_subset(state.variables()) || !state.is_singular_at(center) {
        return Err(Error::IllegalCenter(center.to_string()));
    }
    let descent = crate::invariant::evaluate(state, center)?;
    Ok(charts(state, center, &descent))
}

/// Blows up the center chosen by the maximum of `t`.
pub fn blowup_at_max(state: &ChartState) -> Result<(CenterChoice, Vec<(BlowupEdge, ChartState)>)> {
    let choice = select_center(state)?;
    let children = charts(state, choice.center, &choice.descent);
    Ok((choice, children))
}

pub(crate) fn charts(state: &ChartState, center: Stratum, parent: &Descent) -> Vec<(BlowupEdge, ChartState)> {
    let theta = state.exponents.order_at(center);
    center
        .iter()
        .map(|j| {
            let edge = BlowupEdge {
                center,
                chart_var: j,
                theta,
            };
            let child = chart(state, &edge, parent);
            (edge, child)
        })
        .collect()
}

fn chart(state: &ChartState, edge: &BlowupEdge, parent: &Descent) -> ChartState {
    let c = state.critical_rational();
    let exponents = state
        .exponents
        .set(edge.chart_var, edge.theta - c)
        .expect("controlled transform exponent is nonnegative on a singular center");
    let mut child = ChartState {
        num_vars: state.num_vars,
        critical: state.critical,
        exponents,
        ledger: DivisorLedger::empty(state.num_vars),
        prev_invariant: Some(parent.value.clone()),
        depth: state.depth + 1,
    };
    child.ledger = transformed_ledger(state, &child, edge, parent);
    child
}

/// Pull-back of a divisor: the coefficient of `Y'` is the order of the
/// divisor along the center.
fn pullback(d: &ExponentVector, edge: &BlowupEdge) -> ExponentVector {
    d.set(edge.chart_var, d.order_at(edge.center)).expect("orders are nonnegative")
}

fn add_clamped(d: &ExponentVector, var: usize, delta: Rational) -> ExponentVector {
    let value = d.get(var) + delta;
    d.set(var, if value < Rational::zero() { Rational::zero() } else { value })
        .expect("clamped exponent is nonnegative")
}

struct ChildLedger<'a> {
    n: usize,
    parent: &'a ChartState,
    parent_descent: &'a Descent,
    edge: &'a BlowupEdge,
    all_new: VarSet,
    exceptional: Vec<Option<VarSet>>,
    divisors: Vec<Option<ExponentVector>>,
}

impl<'a> ChildLedger<'a> {
    fn new(parent: &'a ChartState, parent_descent: &'a Descent, edge: &'a BlowupEdge) -> Self {
        let n = parent.num_vars;
        Self {
            n,
            parent,
            parent_descent,
            edge,
            all_new: parent.exceptional().with(edge.chart_var),
            exceptional: vec![None; n + 1],
            divisors: vec![None; n + 1],
        }
    }

    fn prefix_matches(&self, prefix: &[InvariantEntry]) -> bool {
        self.parent_descent.value.entries.get(..prefix.len()) == Some(prefix)
    }

    fn assigned(&self) -> VarSet {
        self.exceptional
            .iter()
            .flatten()
            .fold(VarSet::EMPTY, |acc, e| acc.union(*e))
    }

    fn top_divisor(&self) -> ExponentVector {
        let n = self.n;
        let pulled = pullback(&self.parent.ledger.level(n).divisor, self.edge);
        let theta = self.parent_descent.level(n).map(|r| r.theta).unwrap_or_default();
        add_clamped(&pulled, self.edge.chart_var, theta - self.parent.critical_rational())
    }

    fn finish(mut self, value: &InvariantValue) -> DivisorLedger {
        let n = self.n;
        for dim in (1..n).rev() {
            if self.divisors[dim].is_none() {
                let prefix = &value.entries[..n - dim];
                self.divisor(dim, prefix);
            }
        }
        let mut residual = self.all_new.difference(self.assigned());
        for dim in (1..=n).rev() {
            if self.exceptional[dim].is_none() {
                self.exceptional[dim] = Some(residual);
                residual = VarSet::EMPTY;
            }
        }
        if !residual.is_empty() {
            let lowest = self.exceptional[1].get_or_insert(VarSet::EMPTY);
            *lowest = lowest.union(residual);
        }
        let mut ledger = DivisorLedger::empty(n);
        for dim in 1..=n {
            let level = ledger.level_mut(dim);
            level.exceptional = self.exceptional[dim].unwrap_or_default();
            level.divisor = if dim == n {
                self.top_divisor()
            } else {
                self.divisors[dim].take().unwrap_or_else(ExponentVector::one)
            };
        }
        ledger
    }
}

impl LevelSource for ChildLedger<'_> {
    fn divisor(&mut self, dim: usize, prefix: &[InvariantEntry]) -> ExponentVector {
        if let Some(d) = &self.divisors[dim] {
            return d.clone();
        }
        let d = if self.prefix_matches(prefix) {
            let pulled = pullback(&self.parent.ledger.level(dim).divisor, self.edge);
            match self.parent_descent.level(dim) {
                Some(rec) => add_clamped(&pulled, self.edge.chart_var, rec.theta - rec.critical),
                None => pulled,
            }
        } else {
            ExponentVector::one()
        };
        self.divisors[dim] = Some(d.clone());
        d
    }

    fn exceptional(&mut self, dim: usize, prefix: &[InvariantEntry], ratio: &Rational) -> VarSet {
        if let Some(e) = self.exceptional[dim] {
            return e;
        }
        let residual = self.all_new.difference(self.assigned());
        let keep = self.prefix_matches(prefix) && self.parent_descent.level(dim).map(|r| r.ratio()) == Some(*ratio);
        let e = if keep {
            self.parent
                .ledger
                .level(dim)
                .exceptional
                .without(self.edge.chart_var)
                .intersection(residual)
        } else {
            residual
        };
        self.exceptional[dim] = Some(e);
        e
    }
}

fn transformed_ledger(parent: &ChartState, child: &ChartState, edge: &BlowupEdge, descent: &Descent) -> DivisorLedger {
    let n = parent.num_vars;
    let mut source = ChildLedger::new(parent, descent, edge);
    let origin = child.variables();
    if child.is_singular_at(origin) {
        if let Ok(d) = descend(
            n,
            &child.exponents,
            source.all_new,
            child.critical_rational(),
            origin,
            &mut source,
        ) {
            return source.finish(&d.value);
        }
        source = ChildLedger::new(parent, descent, edge);
    }
    // Origin outside Sing: only the top level is meaningful.
    let free = child.exponents.restrict(origin.difference(source.all_new));
    let ratio = free.total() / child.critical_rational();
    source.exceptional(n, &[], &ratio);
    for dim in 1..n {
        source.divisors[dim] = Some(ExponentVector::one());
    }
    let filler = vec![InvariantEntry::Infinity; n];
    source.finish(&InvariantValue::new(filler))
}
