//! Monomial basic objects on an affine chart.
//!
//! A chart carries a single monomial `J = X_1^{a_1} ... X_n^{a_n}` with
//! exact rational exponents, a critical value `c`, and the per-dimension
//! exceptional ledger (`E_i`, `D_i`) consumed by the resolution invariant.
//! Centers of a monomial resolution are always coordinate strata, so a
//! stratum is just the set of variables that vanish on it.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariant::InvariantValue;

/// Exact exponent arithmetic. Overflow panics (overflow checks are enabled
/// in every profile of this workspace) instead of wrapping.
pub type Rational = Ratio<i64>;

/// Largest supported number of variables per chart.
pub const MAX_VARS: usize = 32;

pub(crate) fn rat(n: i64) -> Rational {
    Rational::from_integer(n)
}

/// `["num","den"]` string pair used for bit-exact JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRepr(pub String, pub String);

impl From<&Rational> for RationalRepr {
    fn from(r: &Rational) -> Self {
        RationalRepr(r.numer().to_string(), r.denom().to_string())
    }
}

impl TryFrom<RationalRepr> for Rational {
    type Error = Error;

    fn try_from(repr: RationalRepr) -> Result<Self> {
        let parse = |s: &str| {
            s.parse::<i64>()
                .map_err(|e| Error::MalformedInput(format!("bad rational component {s:?}: {e}")))
        };
        let num = parse(&repr.0)?;
        let den = parse(&repr.1)?;
        if den == 0 {
            return Err(Error::MalformedInput("zero denominator".into()));
        }
        Ok(Rational::new(num, den))
    }
}

/// A set of variable indices `1..=MAX_VARS`, stored as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VarSet(u32);

/// A coordinate stratum, identified by its vanishing variables.
pub type Stratum = VarSet;

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    /// All variables `1..=n`.
    pub fn full(n: usize) -> VarSet {
        assert!(n <= MAX_VARS, "at most {MAX_VARS} variables are supported");
        if n == MAX_VARS {
            VarSet(u32::MAX)
        } else {
            VarSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(var: usize) -> VarSet {
        VarSet::EMPTY.with(var)
    }

    pub fn from_bits(bits: u32) -> VarSet {
        VarSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn with(self, var: usize) -> VarSet {
        assert!((1..=MAX_VARS).contains(&var), "variable index {var} out of range");
        VarSet(self.0 | (1 << (var - 1)))
    }

    pub fn without(self, var: usize) -> VarSet {
        if !(1..=MAX_VARS).contains(&var) {
            return self;
        }
        VarSet(self.0 & !(1 << (var - 1)))
    }

    pub fn contains(self, var: usize) -> bool {
        (1..=MAX_VARS).contains(&var) && self.0 & (1 << (var - 1)) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Variables in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            (bits != 0).then(|| {
                let v = bits.trailing_zeros() as usize + 1;
                bits &= bits - 1;
                v
            })
        })
    }

    /// Variables in descending order, the shape used by `Γ_3` tuples.
    pub fn iter_descending(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            (bits != 0).then(|| {
                let v = 32 - bits.leading_zeros() as usize;
                bits &= !(1 << (v - 1));
                v
            })
        })
    }

    pub fn descending(self) -> Vec<usize> {
        self.iter_descending().collect()
    }

    /// Every subset of `self`, including the empty set.
    pub fn subsets(self) -> impl Iterator<Item = VarSet> {
        // Standard submask enumeration, emitted in increasing mask order.
        let mask = self.0;
        let mut subs = Vec::with_capacity(1 << self.len());
        let mut sub = mask;
        loop {
            subs.push(VarSet(sub));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
        subs.reverse();
        subs.into_iter()
    }
}

impl FromIterator<usize> for VarSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(VarSet::EMPTY, VarSet::with)
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for VarSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for VarSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let vars = Vec::<usize>::deserialize(d)?;
        if let Some(bad) = vars.iter().find(|v| !(1..=MAX_VARS).contains(v)) {
            return Err(serde::de::Error::custom(format!("variable index {bad} out of range")));
        }
        Ok(vars.into_iter().collect())
    }
}

/// Sparse exponent vector in canonical form: strictly increasing variable
/// indices, strictly positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ExponentVector {
    entries: Vec<(usize, Rational)>,
}

impl ExponentVector {
    /// The trivial monomial `1`.
    pub fn one() -> Self {
        Self::default()
    }

    /// Builds a canonical vector. Zero exponents are dropped; duplicate
    /// indices are summed.
    pub fn new<I: IntoIterator<Item = (usize, Rational)>>(entries: I) -> Result<Self> {
        let mut out: Vec<(usize, Rational)> = Vec::new();
        for (var, e) in entries {
            if !(1..=MAX_VARS).contains(&var) {
                return Err(Error::MalformedInput(format!("variable index {var} out of range")));
            }
            if e.is_negative() {
                return Err(Error::MalformedInput(format!("negative exponent {e} on X{var}")));
            }
            out.push((var, e));
        }
        out.sort_by_key(|(v, _)| *v);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(out.len());
        for (var, e) in out {
            match merged.last_mut() {
                Some((last, acc)) if *last == var => *acc += e,
                _ => merged.push((var, e)),
            }
        }
        merged.retain(|(_, e)| !e.is_zero());
        Ok(Self { entries: merged })
    }

    /// `a_1, ..., a_n` on variables `1..=n`.
    pub fn from_integers(exponents: &[u64]) -> Self {
        Self::new(
            exponents
                .iter()
                .enumerate()
                .map(|(i, &a)| (i + 1, rat(a as i64))),
        )
        .expect("indices and exponents are valid by construction")
    }

    pub fn monomial(var: usize, exponent: Rational) -> Self {
        Self::new([(var, exponent)]).expect("valid single entry")
    }

    pub fn entries(&self) -> &[(usize, Rational)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.entries.iter().map(|(v, e)| (*v, e))
    }

    pub fn get(&self, var: usize) -> Rational {
        match self.entries.binary_search_by_key(&var, |(v, _)| *v) {
            Ok(k) => self.entries[k].1,
            Err(_) => Rational::zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.entries.is_empty()
    }

    /// Variables with positive exponent.
    pub fn support(&self) -> VarSet {
        self.entries.iter().map(|(v, _)| *v).collect()
    }

    /// Total degree `d = Σ a_i`.
    pub fn total(&self) -> Rational {
        self.entries.iter().fold(Rational::zero(), |acc, (_, e)| acc + e)
    }

    /// Order of the monomial at the generic point of `point`.
    pub fn order_at(&self, point: VarSet) -> Rational {
        self.entries
            .iter()
            .filter(|(v, _)| point.contains(*v))
            .fold(Rational::zero(), |acc, (_, e)| acc + e)
    }

    /// Keeps only the variables of `vars`.
    pub fn restrict(&self, vars: VarSet) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(v, _)| vars.contains(*v))
                .cloned()
                .collect(),
        }
    }

    pub fn set(&self, var: usize, exponent: Rational) -> Result<Self> {
        Self::new(
            self.entries
                .iter()
                .filter(|(v, _)| *v != var)
                .cloned()
                .chain(std::iter::once((var, exponent))),
        )
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        assert!(!factor.is_negative(), "negative scaling factor");
        Self {
            entries: self
                .entries
                .iter()
                .map(|(v, e)| (*v, e * factor))
                .filter(|(_, e)| !e.is_zero())
                .collect(),
        }
    }

    /// Exponentwise sum (monomial product).
    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.entries.iter().chain(other.entries.iter()).cloned())
            .expect("sum of canonical vectors is valid")
    }

    /// Exponentwise difference; `None` when `other` does not divide `self`.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut out = Vec::with_capacity(self.entries.len());
        for (v, e) in &self.entries {
            out.push((*v, *e - other.get(*v)));
        }
        if other.entries.iter().any(|(v, _)| !self.support().contains(*v)) {
            return None;
        }
        if out.iter().any(|(_, e)| e.is_negative()) {
            return None;
        }
        Some(Self::new(out).expect("non-negative by check"))
    }

    /// Exponentwise minimum (the monomial gcd).
    pub fn meet(&self, other: &Self) -> Self {
        Self::new(
            self.entries
                .iter()
                .map(|(v, e)| (*v, (*e).min(other.get(*v)))),
        )
        .expect("minimum of non-negative values")
    }

    /// True when `self` is divisible by `other` (componentwise `>=`).
    pub fn dominates(&self, other: &Self) -> bool {
        other.entries.iter().all(|(v, e)| self.get(*v) >= *e)
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|(_, e)| e.is_integer())
    }

    /// Renders as `X1^2*X2^3`, or `1` for the trivial monomial.
    pub fn to_monomial_string(&self) -> String {
        if self.entries.is_empty() {
            return "1".into();
        }
        self.entries
            .iter()
            .map(|(v, e)| {
                if e.is_one() {
                    format!("X{v}")
                } else {
                    format!("X{v}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl fmt::Debug for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_monomial_string())
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_monomial_string())
    }
}

impl Serialize for ExponentVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.entries.iter().map(|(v, e)| (*v, RationalRepr::from(e))))
    }
}

impl<'de> Deserialize<'de> for ExponentVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<(usize, RationalRepr)>::deserialize(d)?;
        let mut entries = Vec::with_capacity(raw.len());
        let mut seen = VarSet::EMPTY;
        for (v, r) in raw {
            if seen.contains(v) {
                return Err(serde::de::Error::custom(format!("duplicate variable {v}")));
            }
            if (1..=MAX_VARS).contains(&v) {
                seen = seen.with(v);
            }
            entries.push((v, Rational::try_from(r).map_err(serde::de::Error::custom)?));
        }
        ExponentVector::new(entries).map_err(serde::de::Error::custom)
    }
}

/// Exceptional bookkeeping of one dimension `i` of the descent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LevelDivisors {
    /// `E_i`: exceptional hypersurfaces assigned to this dimension.
    pub exceptional: VarSet,
    /// `D_i`: the normal-crossing divisor supporting `M_i`.
    pub divisor: ExponentVector,
}

/// Per-dimension exceptional ledger; `levels[i - 1]` holds dimension `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DivisorLedger {
    levels: Vec<LevelDivisors>,
}

impl DivisorLedger {
    pub fn empty(n: usize) -> Self {
        Self {
            levels: vec![LevelDivisors::default(); n],
        }
    }

    pub fn from_levels(levels: Vec<LevelDivisors>) -> Result<Self> {
        let ledger = Self { levels };
        ledger.validate()?;
        Ok(ledger)
    }

    pub fn dims(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, dim: usize) -> &LevelDivisors {
        &self.levels[dim - 1]
    }

    pub fn level_mut(&mut self, dim: usize) -> &mut LevelDivisors {
        &mut self.levels[dim - 1]
    }

    /// `|E| = E_1 ∪ ... ∪ E_n`.
    pub fn all_exceptional(&self) -> VarSet {
        self.levels
            .iter()
            .fold(VarSet::EMPTY, |acc, l| acc.union(l.exceptional))
    }

    /// Checks level disjointness and that divisors sit on exceptional variables.
    pub fn validate(&self) -> Result<()> {
        let mut seen = VarSet::EMPTY;
        for (k, l) in self.levels.iter().enumerate() {
            if !seen.intersection(l.exceptional).is_empty() {
                return Err(Error::MalformedInput(format!(
                    "exceptional hypersurface in two levels (dimension {})",
                    k + 1
                )));
            }
            seen = seen.union(l.exceptional);
        }
        for (k, l) in self.levels.iter().enumerate() {
            if !l.divisor.support().is_subset(seen) {
                return Err(Error::MalformedInput(format!(
                    "D_{} is supported off the exceptional locus",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

/// One affine chart of a monomial basic object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartState {
    pub num_vars: usize,
    pub critical: u64,
    pub exponents: ExponentVector,
    pub ledger: DivisorLedger,
    /// Invariant of the parent at the blown-up center; absent at a root.
    pub prev_invariant: Option<InvariantValue>,
    pub depth: usize,
}

impl ChartState {
    /// Root chart with the given exceptional hypersurfaces, all assigned to
    /// the top dimension.
    pub fn root(exponents: ExponentVector, num_vars: usize, critical: u64, exceptional: VarSet) -> Result<Self> {
        if num_vars == 0 || num_vars > MAX_VARS {
            return Err(Error::MalformedInput(format!("unsupported number of variables {num_vars}")));
        }
        if critical == 0 {
            return Err(Error::MalformedInput("critical value must be positive".into()));
        }
        let vars = VarSet::full(num_vars);
        if !exponents.support().is_subset(vars) || !exceptional.is_subset(vars) {
            return Err(Error::MalformedInput("variable index exceeds chart dimension".into()));
        }
        let mut ledger = DivisorLedger::empty(num_vars);
        let top = ledger.level_mut(num_vars);
        top.exceptional = exceptional;
        top.divisor = exponents.restrict(exceptional);
        Ok(Self {
            num_vars,
            critical,
            exponents,
            ledger,
            prev_invariant: None,
            depth: 0,
        })
    }

    /// `(X_1^{a_1} ... X_n^{a_n}, c)` with no exceptional divisors.
    pub fn from_exponents(a: &[u64], critical: u64) -> Result<Self> {
        Self::root(ExponentVector::from_integers(a), a.len(), critical, VarSet::EMPTY)
    }

    /// Exceptional monomial: every variable is an exceptional hypersurface.
    pub fn exceptional_monomial(a: &[u64], critical: u64) -> Result<Self> {
        Self::root(ExponentVector::from_integers(a), a.len(), critical, VarSet::full(a.len()))
    }

    pub fn variables(&self) -> VarSet {
        VarSet::full(self.num_vars)
    }

    pub fn critical_rational(&self) -> Rational {
        rat(self.critical as i64)
    }

    pub fn exceptional(&self) -> VarSet {
        self.ledger.all_exceptional()
    }

    pub fn total_degree(&self) -> Rational {
        self.exponents.total()
    }

    /// Order of `J` at the generic point of `point`.
    pub fn order_at(&self, point: Stratum) -> Result<Rational> {
        if !point.is_subset(self.variables()) {
            return Err(Error::MalformedInput(format!(
                "stratum {point} uses variables outside 1..={}",
                self.num_vars
            )));
        }
        Ok(self.exponents.order_at(point))
    }

    pub fn is_singular_at(&self, point: Stratum) -> bool {
        point.is_subset(self.variables()) && self.exponents.order_at(point) >= self.critical_rational()
    }

    /// Every stratum (not only the minimal ones) inside `Sing(J, c)`.
    pub fn singular_strata(&self) -> Vec<Stratum> {
        self.variables()
            .subsets()
            .filter(|s| self.is_singular_at(*s))
            .collect()
    }

    /// Minimal strata (under inclusion) of `Sing(J, c)`.
    pub fn singular_locus(&self) -> Vec<Stratum> {
        let all = self.singular_strata();
        all.iter()
            .copied()
            .filter(|s| !all.iter().any(|t| t != s && t.is_subset(*s)))
            .collect()
    }

    pub fn sing_is_empty(&self) -> bool {
        !self.is_singular_at(self.variables())
    }

    /// Splits `J = M · I` into the exceptional part and the free part.
    pub fn split_mi(&self) -> (ExponentVector, ExponentVector) {
        let e = self.exceptional();
        (self.exponents.restrict(e), self.exponents.restrict(self.variables().difference(e)))
    }

    /// `J = M`: the free part is trivial.
    pub fn is_exceptional_monomial(&self) -> bool {
        self.split_mi().1.is_one()
    }

    /// Divides exponents and critical value by `k = gcd(a_1, ..., a_n, c)`.
    pub fn gcd_reduce(&self) -> Result<(ChartState, u64)> {
        if !self.exponents.is_integral() {
            return Err(Error::UnsupportedReduction("non-integral exponent".into()));
        }
        for l in &self.ledger.levels {
            if !l.divisor.is_integral() {
                return Err(Error::UnsupportedReduction("non-integral divisor".into()));
            }
        }
        let k = self
            .exponents
            .iter()
            .fold(self.critical as i64, |g, (_, e)| g.gcd(&e.to_integer()));
        let k = k.unsigned_abs().max(1);
        let factor = Rational::new(1, k as i64);
        let mut out = self.clone();
        out.exponents = self.exponents.scale(&factor);
        out.critical = self.critical / k;
        for l in &mut out.ledger.levels {
            l.divisor = l.divisor.scale(&factor);
        }
        Ok((out, k))
    }

    /// Identity of the chart for memoization: everything that determines
    /// the subtree below it.
    pub fn signature(&self) -> StateSignature {
        StateSignature {
            critical: self.critical,
            num_vars: self.num_vars,
            exponents: self.exponents.clone(),
            levels: self
                .ledger
                .levels
                .iter()
                .map(|l| (l.exceptional, l.divisor.clone()))
                .collect(),
        }
    }
}

/// Hashable identity of a chart, excluding its history.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSignature {
    pub critical: u64,
    pub num_vars: usize,
    pub exponents: ExponentVector,
    pub levels: Vec<(VarSet, ExponentVector)>,
}

#[derive(Serialize, Deserialize)]
struct LevelJson {
    dim: usize,
    #[serde(rename = "E")]
    exceptional: VarSet,
    #[serde(rename = "D")]
    divisor: ExponentVector,
}

#[derive(Serialize, Deserialize)]
struct ChartStateJson {
    n: usize,
    c: u64,
    exponents: ExponentVector,
    levels: Vec<LevelJson>,
    depth: usize,
}

impl Serialize for ChartState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChartStateJson {
            n: self.num_vars,
            c: self.critical,
            exponents: self.exponents.clone(),
            levels: self
                .ledger
                .levels
                .iter()
                .enumerate()
                .map(|(k, l)| LevelJson {
                    dim: k + 1,
                    exceptional: l.exceptional,
                    divisor: l.divisor.clone(),
                })
                .collect(),
            depth: self.depth,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChartState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ChartStateJson::deserialize(d)?;
        if raw.n == 0 || raw.n > MAX_VARS {
            return Err(D::Error::custom(format!("unsupported n = {}", raw.n)));
        }
        if raw.c == 0 {
            return Err(D::Error::custom("critical value must be positive"));
        }
        let mut levels = vec![LevelDivisors::default(); raw.n];
        let mut seen = vec![false; raw.n];
        for l in raw.levels {
            if l.dim == 0 || l.dim > raw.n || seen[l.dim - 1] {
                return Err(D::Error::custom(format!("bad level dimension {}", l.dim)));
            }
            seen[l.dim - 1] = true;
            levels[l.dim - 1] = LevelDivisors {
                exceptional: l.exceptional,
                divisor: l.divisor,
            };
        }
        let ledger = DivisorLedger::from_levels(levels).map_err(D::Error::custom)?;
        let vars = VarSet::full(raw.n);
        if !raw.exponents.support().is_subset(vars) || !ledger.all_exceptional().is_subset(vars) {
            return Err(D::Error::custom("variable index exceeds n"));
        }
        Ok(ChartState {
            num_vars: raw.n,
            critical: raw.c,
            exponents: raw.exponents,
            ledger,
            prev_invariant: None,
            depth: raw.depth,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(vars: &[usize]) -> Stratum {
        vars.iter().copied().collect()
    }

    #[test]
    fn order_at_examples() {
        let s = ChartState::from_exponents(&[2, 3], 2).unwrap();
        assert_eq!(s.order_at(st(&[1, 2])).unwrap(), rat(5));
        assert_eq!(s.order_at(st(&[])).unwrap(), rat(0));
        let s = ChartState::from_exponents(&[5, 4, 1], 4).unwrap();
        assert_eq!(s.order_at(st(&[1, 3])).unwrap(), rat(6));
        assert!(matches!(s.order_at(st(&[4])), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn singular_locus_examples() {
        let s = ChartState::from_exponents(&[1, 1, 1], 2).unwrap();
        assert_eq!(s.singular_locus(), vec![st(&[1, 2]), st(&[1, 3]), st(&[2, 3])]);
        let s = ChartState::from_exponents(&[3], 3).unwrap();
        assert_eq!(s.singular_locus(), vec![st(&[1])]);
        let s = ChartState::from_exponents(&[2, 3], 7).unwrap();
        assert!(s.singular_locus().is_empty());
        assert!(s.sing_is_empty());
    }

    #[test]
    fn gcd_reduce_examples() {
        let (r, k) = ChartState::from_exponents(&[2, 2], 2).unwrap().gcd_reduce().unwrap();
        assert_eq!((r.exponents.clone(), r.critical, k), (ExponentVector::from_integers(&[1, 1]), 1, 2));
        let s = ChartState::from_exponents(&[1, 2, 3], 3).unwrap();
        let (r, k) = s.gcd_reduce().unwrap();
        assert_eq!((r, k), (s, 1));
        let (r, k) = ChartState::from_exponents(&[4, 8], 6).unwrap().gcd_reduce().unwrap();
        assert_eq!((r.exponents, r.critical, k), (ExponentVector::from_integers(&[2, 4]), 3, 2));

        let mut frac = ChartState::from_exponents(&[1, 1], 1).unwrap();
        frac.exponents = ExponentVector::new([(1, Rational::new(1, 2))]).unwrap();
        assert!(matches!(frac.gcd_reduce(), Err(Error::UnsupportedReduction(_))));
    }

    #[test]
    fn split_examples() {
        let s = ChartState::from_exponents(&[2, 3], 2).unwrap();
        assert_eq!(s.split_mi(), (ExponentVector::one(), ExponentVector::from_integers(&[2, 3])));

        let mut s = ChartState::from_exponents(&[3, 3], 2).unwrap();
        s.ledger.level_mut(2).exceptional = VarSet::singleton(1);
        let (m, i) = s.split_mi();
        assert_eq!(m, ExponentVector::monomial(1, rat(3)));
        assert_eq!(i, ExponentVector::monomial(2, rat(3)));

        let s = ChartState::exceptional_monomial(&[1, 4], 2).unwrap();
        let (m, i) = s.split_mi();
        assert!(i.is_one());
        assert_eq!(m, s.exponents);
    }

    #[test]
    fn canonical_form_drops_zeros_and_merges() {
        let v = ExponentVector::new([(2, rat(0)), (1, rat(2)), (1, rat(1))]).unwrap();
        assert_eq!(v.entries(), &[(1, rat(3))]);
        assert!(ExponentVector::new([(1, rat(-1))]).is_err());
        assert!(ExponentVector::new([(0, rat(1))]).is_err());
    }

    #[test]
    fn ledger_rejects_overlapping_levels() {
        let lvl = LevelDivisors {
            exceptional: VarSet::singleton(1),
            divisor: ExponentVector::one(),
        };
        assert!(DivisorLedger::from_levels(vec![lvl.clone(), lvl]).is_err());
        let stray = LevelDivisors {
            exceptional: VarSet::EMPTY,
            divisor: ExponentVector::monomial(2, rat(1)),
        };
        assert!(DivisorLedger::from_levels(vec![stray]).is_err());
    }

    #[test]
    fn chart_state_json_shape() {
        let s = ChartState::exceptional_monomial(&[2, 3], 2).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "n": 2, "c": 2,
                "exponents": [[1, ["2", "1"]], [2, ["3", "1"]]],
                "levels": [
                    {"dim": 1, "E": [], "D": []},
                    {"dim": 2, "E": [1, 2], "D": [[1, ["2", "1"]], [2, ["3", "1"]]]}
                ],
                "depth": 0
            })
        );
        let back: ChartState = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn subsets_enumerates_all() {
        let s = st(&[1, 3]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs, vec![st(&[]), st(&[1]), st(&[3]), st(&[1, 3])]);
    }
}
