//! The resolution function `t` of a monomial chart.
//!
//! `t` is evaluated at the generic point of a coordinate stratum by
//! descending through the dimensions `n, n-1, ..., 1`. At dimension `i` the
//! junior ideal `J_i` splits as `M_i · I_i`; the entry is
//! `[θ_i / c_{i+1}, m_i]` with `θ_i = ord(I_i)`. When `I_i` is a unit at
//! the point the monomial case takes over and the entry is `Γ(M_i)`; when
//! the composition ideal becomes bold regular the remaining entries are `∞`.
//!
//! Entries of different kinds at the same position compare as
//! `Γ < [θ/c, m] < ∞`.

use std::cmp::{Ordering, Reverse};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ideal::MonomialIdeal;
use crate::monomial::{rat, ChartState, ExponentVector, Rational, RationalRepr, Stratum, VarSet};

/// `Γ = (-Γ_1, Γ_2, Γ_3)` of the monomial case.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GammaValue {
    /// Smallest number of hypersurfaces whose exponents reach `c`.
    pub gamma1: usize,
    /// Largest such exponent sum divided by `c`.
    pub gamma2: Rational,
    /// Lexicographically largest decreasing index tuple realizing `Γ_2`,
    /// zero-padded.
    pub gamma3: Vec<usize>,
}

impl GammaValue {
    fn key(&self) -> (Reverse<usize>, &Rational, &[usize]) {
        (Reverse(self.gamma1), &self.gamma2, &self.gamma3)
    }
}

impl Ord for GammaValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for GammaValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One coordinate of `t`. Variant order is the comparison order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvariantEntry {
    Gamma(GammaValue),
    Finite { ratio: Rational, m: usize },
    Infinity,
}

impl InvariantEntry {
    pub fn finite(ratio: Rational, m: usize) -> Self {
        InvariantEntry::Finite { ratio, m }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, InvariantEntry::Finite { .. })
    }
}

impl fmt::Display for InvariantEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvariantEntry::Finite { ratio, m } => write!(f, "[{ratio},{m}]"),
            InvariantEntry::Infinity => write!(f, "inf"),
            InvariantEntry::Gamma(g) => {
                let tuple: Vec<String> = g.gamma3.iter().map(|i| i.to_string()).collect();
                write!(f, "Gamma(-{},{},({}))", g.gamma1, g.gamma2, tuple.join(","))
            }
        }
    }
}

/// `t = (t_n, ..., t_1)`, compared lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InvariantValue {
    pub entries: Vec<InvariantEntry>,
}

impl InvariantValue {
    pub fn new(entries: Vec<InvariantEntry>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks the shape: everything after the first `Γ` or `∞` is `∞`.
    pub fn is_well_shaped(&self) -> bool {
        match self.entries.iter().position(|e| !e.is_finite()) {
            None => true,
            Some(k) => self.entries[k + 1..].iter().all(|e| *e == InvariantEntry::Infinity),
        }
    }
}

impl fmt::Display for InvariantValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Lexicographic comparison of two invariants of the same length.
pub fn compare(lhs: &InvariantValue, rhs: &InvariantValue) -> Result<Ordering> {
    if lhs.len() != rhs.len() {
        return Err(Error::MalformedInput(format!(
            "cannot compare invariants of lengths {} and {}",
            lhs.len(),
            rhs.len()
        )));
    }
    Ok(lhs.cmp(rhs))
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryJson {
    Finite { t: (String, String, usize) },
    Gamma { gamma: (usize, String, String, Vec<usize>) },
    Infinity(String),
}

impl Serialize for InvariantEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            InvariantEntry::Finite { ratio, m } => EntryJson::Finite {
                t: (ratio.numer().to_string(), ratio.denom().to_string(), *m),
            },
            InvariantEntry::Gamma(g) => EntryJson::Gamma {
                gamma: (
                    g.gamma1,
                    g.gamma2.numer().to_string(),
                    g.gamma2.denom().to_string(),
                    g.gamma3.clone(),
                ),
            },
            InvariantEntry::Infinity => EntryJson::Infinity("inf".into()),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for InvariantEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let to_rat = |n: String, den: String| Rational::try_from(RationalRepr(n, den)).map_err(D::Error::custom);
        match EntryJson::deserialize(d)? {
            EntryJson::Finite { t: (n, den, m) } => Ok(InvariantEntry::Finite { ratio: to_rat(n, den)?, m }),
            EntryJson::Gamma {
                gamma: (g1, n, den, g3),
            } => Ok(InvariantEntry::Gamma(GammaValue {
                gamma1: g1,
                gamma2: to_rat(n, den)?,
                gamma3: g3,
            })),
            EntryJson::Infinity(s) if s == "inf" => Ok(InvariantEntry::Infinity),
            EntryJson::Infinity(s) => Err(D::Error::custom(format!("unknown invariant entry {s:?}"))),
        }
    }
}

impl Serialize for InvariantValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for InvariantValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(InvariantValue::new(Vec::deserialize(d)?))
    }
}

/// Γ of the monomial `M` with critical value `c`, and the stratum where it
/// is maximal (the next center). `n` is the padding length of `Γ_3`.
pub fn gamma(m: &ExponentVector, c: &Rational, n: usize) -> Result<(GammaValue, Stratum)> {
    if m.total() < *c || c <= &Rational::zero() {
        return Err(Error::NoCenter);
    }
    let support = m.support();
    // Γ_2 = sum / c with c fixed, so sums are compared directly; equal
    // sizes make the padded Γ_3 comparison a plain descending comparison.
    let mut best: Option<(usize, Rational, Stratum)> = None;
    for subset in support.subsets() {
        if subset.is_empty() {
            continue;
        }
        let sum = m.order_at(subset);
        if sum < *c {
            continue;
        }
        let size = subset.len();
        let better = match &best {
            None => true,
            Some((bs, bsum, bset)) => (Reverse(size), sum)
                .cmp(&(Reverse(*bs), *bsum))
                .then_with(|| subset.iter_descending().cmp(bset.iter_descending()))
                .is_gt(),
        };
        if better {
            best = Some((size, sum, subset));
        }
    }
    let (gamma1, sum, center) = best.ok_or(Error::NoCenter)?;
    let mut gamma3 = center.descending();
    gamma3.resize(n.max(gamma1), 0);
    Ok((
        GammaValue {
            gamma1,
            gamma2: sum / c,
            gamma3,
        },
        center,
    ))
}

/// Companion ideal `P = I` if `θ >= c`, else `I + M^{θ/(c-θ)}`.
pub fn companion(i: &MonomialIdeal, m: &ExponentVector, c_next: &Rational) -> Result<MonomialIdeal> {
    let theta = i.order();
    if theta.is_zero() {
        return Err(Error::Domain("resolved level: θ = 0".into()));
    }
    if theta >= *c_next {
        Ok(i.clone())
    } else {
        let power = theta / (c_next - theta);
        Ok(i.sum(&MonomialIdeal::principal_power(m, &power)))
    }
}

/// Composition ideal `K = P · I(E)`; trivial when `I` is.
pub fn compose(p: &MonomialIdeal, i: &MonomialIdeal, exceptional: VarSet) -> MonomialIdeal {
    if i.is_unit() {
        return MonomialIdeal::unit();
    }
    let e = ExponentVector::new(exceptional.iter().map(|v| (v, Rational::one()))).expect("unit exponents");
    p.mul_monomial(&e)
}

/// Junior ideal of `K` with its critical value `ord(K)`, or `None` when `K`
/// is trivial or bold regular. Returns the removed (maximal contact)
/// variable as well; exceptional variables are avoided when possible.
pub fn junior(k: &MonomialIdeal, exceptional: VarSet) -> Option<(MonomialIdeal, Rational, usize)> {
    if k.is_unit() || k.is_bold_regular() {
        return None;
    }
    let c = k.order();
    let var = k.maximal_contact_variable(exceptional)?;
    let coeff = k.coefficient_ideal(var, &c)?;
    Some((coeff, c, var))
}

/// Values at the point needed to transform the ledger: `θ_i` and the
/// critical value `c_{i+1}` of each dimension reached by the descent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelRecord {
    pub dim: usize,
    pub theta: Rational,
    pub critical: Rational,
}

impl LevelRecord {
    pub fn ratio(&self) -> Rational {
        self.theta / self.critical
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descent {
    pub value: InvariantValue,
    /// Records for dimensions `n, n-1, ...` down to where the descent stopped.
    pub levels: Vec<LevelRecord>,
}

impl Descent {
    pub fn level(&self, dim: usize) -> Option<&LevelRecord> {
        self.levels.iter().find(|l| l.dim == dim)
    }
}

/// Supplies `D_i` and `E_i` while descending. The ledger transform after a
/// blowup decides them level by level from the partial invariant.
pub(crate) trait LevelSource {
    fn divisor(&mut self, dim: usize, prefix: &[InvariantEntry]) -> ExponentVector;
    fn exceptional(&mut self, dim: usize, prefix: &[InvariantEntry], ratio: &Rational) -> VarSet;
}

struct FixedLedger<'a>(&'a ChartState);

impl LevelSource for FixedLedger<'_> {
    fn divisor(&mut self, dim: usize, _prefix: &[InvariantEntry]) -> ExponentVector {
        self.0.ledger.level(dim).divisor.clone()
    }

    fn exceptional(&mut self, dim: usize, _prefix: &[InvariantEntry], _ratio: &Rational) -> VarSet {
        self.0.ledger.level(dim).exceptional
    }
}

pub(crate) fn descend<L: LevelSource>(
    n: usize,
    exponents: &ExponentVector,
    exceptional_all: VarSet,
    critical: Rational,
    point: Stratum,
    source: &mut L,
) -> Result<Descent> {
    let mut active = point;
    let mut junior_ideal = MonomialIdeal::principal(exponents.restrict(point));
    let mut crit = critical;
    let mut entries: Vec<InvariantEntry> = Vec::with_capacity(n);
    let mut levels = Vec::with_capacity(n);

    for dim in (1..=n).rev() {
        if junior_ideal.order().is_zero() {
            break;
        }
        let (m, free) = if dim == n {
            (
                exponents.restrict(point.intersection(exceptional_all)),
                MonomialIdeal::principal(exponents.restrict(point.difference(exceptional_all))),
            )
        } else {
            let d = source.divisor(dim, &entries).restrict(active);
            let m = d.meet(&junior_ideal.common_factor());
            let free = junior_ideal
                .divide(&m)
                .ok_or_else(|| Error::Internal("common factor does not divide".into()))?;
            (m, free)
        };
        let theta = free.order();
        if theta.is_zero() {
            source.exceptional(dim, &entries, &Rational::zero());
            let (g, _) = gamma(&m, &crit, n)
                .map_err(|_| Error::Internal(format!("monomial case below critical value at dimension {dim}")))?;
            entries.push(InvariantEntry::Gamma(g));
            levels.push(LevelRecord {
                dim,
                theta,
                critical: crit,
            });
            break;
        }
        let ratio = theta / crit;
        let e_here = source.exceptional(dim, &entries, &ratio).intersection(active);
        entries.push(InvariantEntry::finite(ratio, e_here.len()));
        levels.push(LevelRecord {
            dim,
            theta,
            critical: crit,
        });
        if dim == 1 {
            break;
        }
        let p = companion(&free, &m, &crit)?;
        let k = compose(&p, &free, e_here);
        match junior(&k, exceptional_all) {
            None => break,
            Some((next, c_next, var)) => {
                junior_ideal = next;
                crit = c_next;
                active = active.without(var);
            }
        }
    }
    entries.resize(n, InvariantEntry::Infinity);
    Ok(Descent {
        value: InvariantValue::new(entries),
        levels,
    })
}

/// Full descent at a singular stratum using the chart's own ledger.
pub fn evaluate(state: &ChartState, point: Stratum) -> Result<Descent> {
    if !point.is_subset(state.variables()) {
        return Err(Error::MalformedInput(format!("stratum {point} outside the chart")));
    }
    if !state.is_singular_at(point) {
        return Err(Error::Precondition(format!("stratum {point} is not in Sing(J, c)")));
    }
    descend(
        state.num_vars,
        &state.exponents,
        state.exceptional(),
        rat(state.critical as i64),
        point,
        &mut FixedLedger(state),
    )
}

/// `t` at the generic point of `point`.
pub fn invariant_at(state: &ChartState, point: Stratum) -> Result<InvariantValue> {
    evaluate(state, point).map(|d| d.value)
}

/// The maximal value of `t` on the chart and the center it selects.
#[derive(Debug, Clone)]
pub struct CenterChoice {
    pub value: InvariantValue,
    pub center: Stratum,
    /// Descent at the generic point of the center.
    pub descent: Descent,
}

/// Evaluates `t` on every singular stratum and returns the maximum with
/// its locus. The locus is the closure of the smallest-codimension stratum
/// attaining the maximum; if several incomparable ones exist the
/// lexicographically largest decreasing index tuple wins.
pub fn select_center(state: &ChartState) -> Result<CenterChoice> {
    let strata = state.singular_strata();
    if strata.is_empty() {
        return Err(Error::NoCenter);
    }
    let mut evaluated = Vec::with_capacity(strata.len());
    for s in strata {
        evaluated.push((s, evaluate(state, s)?));
    }
    let max = evaluated
        .iter()
        .map(|(_, d)| &d.value)
        .max()
        .expect("nonempty")
        .clone();
    let argmax: Vec<&(Stratum, Descent)> = evaluated.iter().filter(|(_, d)| d.value == max).collect();
    let minimal = argmax
        .iter()
        .filter(|(s, _)| !argmax.iter().any(|(t, _)| t != s && t.is_subset(*s)));
    let n = state.num_vars;
    let (center, descent) = minimal
        .max_by_key(|(s, _)| {
            let mut tuple = s.descending();
            tuple.resize(n, 0);
            tuple
        })
        .map(|(s, d)| (*s, d.clone()))
        .expect("argmax is nonempty");
    Ok(CenterChoice {
        value: max,
        center,
        descent,
    })
}

/// `(max t, center)`.
pub fn max_locus(state: &ChartState) -> Result<(InvariantValue, Stratum)> {
    select_center(state).map(|c| (c.value, c.center))
}
