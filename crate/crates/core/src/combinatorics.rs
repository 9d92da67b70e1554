//! Closed-form side of the resolution count: the propagation recurrence,
//! Catalan numbers and their partial sums, and the three bounds.
//!
//! All bound arithmetic is exact; `2^{S_n}` leaves 64 bits already at
//! `n = 5`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// `p(i, j)` for `0 <= i <= j <= j_max`:
/// `p(j, j) = 0`, `p(i, j) = i + Σ_{k=1}^{i} p(k, j-1)` for `i < j`.
#[derive(Debug, Clone)]
pub struct PropagationTable {
    j_max: usize,
    /// `rows[j][i] = p(i, j)`.
    rows: Vec<Vec<BigUint>>,
}

impl PropagationTable {
    pub fn new(j_max: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(j_max + 1);
        for j in 0..=j_max {
            let mut row = Vec::with_capacity(j + 1);
            for i in 0..=j {
                let value = if i == j {
                    BigUint::zero()
                } else {
                    // i < j implies j >= 1 and every k <= i <= j-1 is in row j-1.
                    let prev = &rows[j - 1];
                    (1..=i).fold(BigUint::from(i), |acc, k| acc + &prev[k])
                };
                row.push(value);
            }
            rows.push(row);
        }
        Self { j_max, rows }
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn get(&self, i: usize, j: usize) -> Result<&BigUint> {
        if i > j {
            return Err(Error::Domain(format!("p({i},{j}) needs i <= j")));
        }
        if j > self.j_max {
            return Err(Error::Domain(format!("p({i},{j}) beyond table size {}", self.j_max)));
        }
        Ok(&self.rows[j][i])
    }

    /// `r(i, j) = p(i, i + j) + 1`.
    pub fn r(&self, i: usize, j: usize) -> Result<BigUint> {
        Ok(self.get(i, i + j)? + 1u32)
    }
}

/// Propagation `p(i, j)`.
pub fn propagation(i: usize, j: usize) -> Result<BigUint> {
    if i > j {
        return Err(Error::Domain(format!("p({i},{j}) needs i <= j")));
    }
    PropagationTable::new(j).get(i, j).cloned()
}

/// `C_j = binom(2j, j) / (j + 1)`.
pub fn catalan(j: usize) -> BigUint {
    let mut binom = BigUint::one();
    for k in 0..j {
        binom = binom * BigUint::from(2 * j - k) / BigUint::from(k + 1);
    }
    binom / BigUint::from(j + 1)
}

/// `S_n = Σ_{j=1}^{n} C_j`.
pub fn catalan_partial_sum(n: usize) -> BigUint {
    (1..=n).map(catalan).sum()
}

fn degree_and_gcd(a: &[u64], c: u64) -> (u64, u64) {
    let d = a.iter().sum();
    let g = a.iter().fold(c, |g, x| g.gcd(x));
    (d, g)
}

/// Bound `(d - c + g) / g` for an exceptional monomial, `g = gcd(a, c)`.
/// Zero when `d < c` (nothing to resolve).
pub fn bound_exceptional(a: &[u64], c: u64) -> Result<u64> {
    if c == 0 {
        return Err(Error::MalformedInput("critical value must be positive".into()));
    }
    let (d, g) = degree_and_gcd(a, c);
    if d < c {
        return Ok(0);
    }
    Ok((d - c + g) / g)
}

/// Values of `c` for which the exceptional-monomial bound is attained:
/// `{1, d} ∪ {a_n + ... + a_j + 1 : n >= j >= 2}` with `a` sorted ascending.
pub fn equality_cases(a: &[u64]) -> BTreeSet<u64> {
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    let d: u64 = sorted.iter().sum();
    let mut cases = BTreeSet::from([1, d]);
    let mut tail = 0;
    for j in (2..=sorted.len()).rev() {
        tail += sorted[j - 1];
        cases.insert(tail + 1);
    }
    cases
}

/// `(2^N - 1)(d - c)`, the bound on the exceptional part after `N` blowups.
pub fn exceptional_order_bound(n_blowups: usize, d: u64, c: u64) -> Result<BigUint> {
    if d < c {
        return Err(Error::Domain(format!("d = {d} < c = {c}")));
    }
    Ok(((BigUint::one() << n_blowups) - 1u32) * BigUint::from(d - c))
}

/// `S_n + (2^{S_n} - 1)(d - c) - c + 1`.
pub fn global_bound(n: usize, d: u64, c: u64) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if d < c {
        return Err(Error::Domain(format!("d = {d} < c = {c}")));
    }
    let s = catalan_partial_sum(n);
    let exponent = usize::try_from(&s).map_err(|_| Error::Domain(format!("2^{s} is out of reach")))?;
    let order = exceptional_order_bound(exponent, d, c)?;
    Ok(BigInt::from(s) + BigInt::from(order) - BigInt::from(c) + 1)
}

/// All bounds for one problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub d: u64,
    pub c: u64,
    pub g: u64,
    pub bound_exceptional: u64,
    #[serde(serialize_with = "as_decimal")]
    pub monomialization_bound: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub exceptional_order_bound: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub global_bound: BigInt,
    pub equality_cases: BTreeSet<u64>,
}

fn as_decimal<T: ToString, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl BoundReport {
    pub fn new(a: &[u64], c: u64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::MalformedInput("no exponents".into()));
        }
        let n = a.len();
        let (d, g) = degree_and_gcd(a, c);
        if d < c {
            return Err(Error::Domain(format!("d = {d} < c = {c}: the singular locus is empty")));
        }
        let s = catalan_partial_sum(n);
        let exponent = usize::try_from(&s).map_err(|_| Error::Domain(format!("2^{s} is out of reach")))?;
        Ok(Self {
            n,
            d,
            c,
            g,
            bound_exceptional: bound_exceptional(a, c)?,
            exceptional_order_bound: exceptional_order_bound(exponent, d, c)?,
            monomialization_bound: s,
            global_bound: global_bound(n, d, c)?,
            equality_cases: equality_cases(a),
        })
    }

    /// The defining relation between the fields.
    pub fn is_consistent(&self) -> bool {
        BigInt::from(self.monomialization_bound.clone()) + BigInt::from(self.exceptional_order_bound.clone())
            - BigInt::from(self.c)
            + 1
            == self.global_bound
    }

    pub fn to_text(&self) -> String {
        let cases: Vec<String> = self.equality_cases.iter().map(|c| c.to_string()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "n = {}, d = {}, c = {}, gcd = {}", self.n, self.d, self.c, self.g);
        let _ = writeln!(out, "exceptional monomial bound   (d-c+g)/g         = {}", self.bound_exceptional);
        let _ = writeln!(out, "monomialization bound        sum C_j           = {}", self.monomialization_bound);
        let _ = writeln!(out, "exceptional order bound      (2^S-1)(d-c)      = {}", self.exceptional_order_bound);
        let _ = writeln!(out, "global bound                 S+(2^S-1)(d-c)-c+1 = {}", self.global_bound);
        let _ = writeln!(out, "bound attained for c in      {{{}}}", cases.join(", "));
        out
    }
}

/// One row of the Catalan identity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalanRow {
    pub n: usize,
    /// `p(n, n+1)`.
    #[serde(serialize_with = "as_decimal")]
    pub propagation: BigUint,
    /// `n + Σ_{j=1}^{n-1} p(j, n)`.
    #[serde(serialize_with = "as_decimal")]
    pub propagation_sum: BigUint,
    /// `Σ_{k=1}^{n} C_k`.
    #[serde(serialize_with = "as_decimal")]
    pub catalan_sum: BigUint,
    /// `r(n, 1)` against `Σ_{k=0}^{n} C_k`.
    pub r_matches: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalanReport {
    pub rows: Vec<CatalanRow>,
    pub all_pass: bool,
}

/// Checks `p(n,n+1) = n + Σ_{j<n} p(j,n) = Σ_{k=1}^{n} C_k` and
/// `r(n,1) = Σ_{k=0}^{n} C_k` for every `1 <= n <= n_max`.
pub fn verify_catalan_identity(n_max: usize) -> Result<CatalanReport> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let table = PropagationTable::new(n_max + 1);
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let propagation = table.get(n, n + 1)?.clone();
        let mut propagation_sum = BigUint::from(n);
        for j in 1..n {
            propagation_sum += table.get(j, n)?;
        }
        let catalan_sum = catalan_partial_sum(n);
        let r_matches = table.r(n, 1)? == &catalan_sum + catalan(0);
        let pass = propagation == propagation_sum && propagation == catalan_sum && r_matches;
        rows.push(CatalanRow {
            n,
            propagation,
            propagation_sum,
            catalan_sum,
            r_matches,
            pass,
        });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(CatalanReport { rows, all_pass })
}

/// Points `(i, j)` with `i, j >= 1`, `i + j <= max_sum` where
/// `r(i,j) = r(i-1,j+1) + r(i,j-1)` fails, plus the boundary values
/// `r(0,j) = r(i,0) = 1`.
pub fn r_recurrence_failures(max_sum: usize) -> Result<Vec<(usize, usize)>> {
    let table = PropagationTable::new(max_sum + 1);
    let one = BigUint::one();
    let mut failures = Vec::new();
    for total in 0..=max_sum {
        for i in 0..=total {
            let j = total - i;
            let value = table.r(i, j)?;
            let ok = if i == 0 || j == 0 {
                value == one
            } else {
                value == table.r(i - 1, j + 1)? + table.r(i, j - 1)?
            };
            if !ok {
                failures.push((i, j));
            }
        }
    }
    Ok(failures)
}

/// Global bound formula in the compact notation `S+K(d-c)-c+1`.
pub fn global_bound_formula(n: usize) -> Result<String> {
    let s = catalan_partial_sum(n);
    let exponent = usize::try_from(&s).map_err(|_| Error::Domain(format!("2^{s} is out of reach")))?;
    let k = (BigUint::one() << exponent) - 1u32;
    Ok(if k.is_one() {
        format!("{s}+(d-c)-c+1")
    } else {
        format!("{s}+{k}(d-c)-c+1")
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsTable {
    /// `propagation[j][i] = p(i, j)` as decimal strings.
    pub propagation: Vec<Vec<String>>,
    pub rows: Vec<BoundsTableRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsTableRow {
    pub n: usize,
    pub catalan: String,
    pub catalan_sum: String,
    pub global_bound: String,
}

/// Propagation values and global-bound formulas for `1 <= n <= n_max`.
pub fn bounds_table(n_max: usize) -> Result<BoundsTable> {
    if n_max == 0 || n_max > 6 {
        return Err(Error::Domain(format!("table size {n_max} outside 1..=6")));
    }
    let p = PropagationTable::new(n_max);
    let propagation = (0..=n_max)
        .map(|j| (0..=j).map(|i| p.get(i, j).map(|v| v.to_string())).collect())
        .collect::<Result<_>>()?;
    let rows = (1..=n_max)
        .map(|n| {
            Ok(BoundsTableRow {
                n,
                catalan: catalan(n).to_string(),
                catalan_sum: catalan_partial_sum(n).to_string(),
                global_bound: global_bound_formula(n)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BoundsTable { propagation, rows })
}

impl BoundsTable {
    pub fn to_text(&self) -> String {
        let mut out = String::from("propagation p(i,j)\n");
        let width = self
            .propagation
            .iter()
            .flatten()
            .map(String::len)
            .max()
            .unwrap_or(1)
            .max(3);
        let _ = write!(out, "{:>5}", "j\\i");
        for i in 0..self.propagation.len() {
            let _ = write!(out, " {i:>width$}");
        }
        out.push('\n');
        for (j, row) in self.propagation.iter().enumerate() {
            let _ = write!(out, "{j:>5}");
            for v in row {
                let _ = write!(out, " {v:>width$}");
            }
            out.push('\n');
        }
        out.push('\n');
        let bw = self.rows.iter().map(|r| r.global_bound.len()).max().unwrap_or(12).max(12);
        let _ = writeln!(out, "{:>3} {:>6} {:>10} {:<bw$}", "n", "C_n", "sum C_j", "global bound");
        for r in &self.rows {
            let _ = writeln!(out, "{:>3} {:>6} {:>10} {:<bw$}", r.n, r.catalan, r.catalan_sum, r.global_bound);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Segner: `C_0 = 1`, `C_{n+1} = Σ_{i=0}^{n} C_i C_{n-i}`.
    fn segner(n_max: usize) -> Vec<BigUint> {
        let mut c = vec![BigUint::one()];
        for n in 0..n_max {
            let next = (0..=n).map(|i| &c[i] * &c[n - i]).sum();
            c.push(next);
        }
        c
    }

    #[test]
    fn propagation_examples() {
        assert_eq!(propagation(1, 1).unwrap(), BigUint::zero());
        assert_eq!(propagation(1, 2).unwrap(), BigUint::one());
        assert_eq!(propagation(1, 3).unwrap(), BigUint::from(2u32));
        assert_eq!(propagation(2, 3).unwrap(), BigUint::from(3u32));
        assert_eq!(propagation(3, 4).unwrap(), BigUint::from(8u32));
        assert!(matches!(propagation(3, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn catalan_examples() {
        let c: Vec<u32> = (0..=4).map(|j| u32::try_from(&catalan(j)).unwrap()).collect();
        assert_eq!(c, vec![1, 1, 2, 5, 14]);
        let s: Vec<u32> = (1..=4).map(|n| u32::try_from(&catalan_partial_sum(n)).unwrap()).collect();
        assert_eq!(s, vec![1, 3, 8, 22]);
    }

    #[test]
    fn catalan_matches_segner() {
        let oracle = segner(60);
        for (j, c) in oracle.iter().enumerate() {
            assert_eq!(&catalan(j), c, "C_{j}");
        }
        let s10: BigUint = oracle[1..=10].iter().sum();
        assert_eq!(catalan_partial_sum(10), s10);
    }

    #[test]
    fn bound_examples() {
        assert_eq!(bound_exceptional(&[1, 2, 3], 3).unwrap(), 4);
        assert_eq!(bound_exceptional(&[2, 2], 2).unwrap(), 2);
        assert_eq!(bound_exceptional(&[1, 1], 2).unwrap(), 1);
        assert_eq!(bound_exceptional(&[1, 1], 3).unwrap(), 0);
        assert_eq!(equality_cases(&[1, 2, 3]), BTreeSet::from([1, 4, 6]));
        assert_eq!(equality_cases(&[3, 2, 1]), BTreeSet::from([1, 4, 6]));
        assert_eq!(equality_cases(&[3]), BTreeSet::from([1, 3]));
        assert_eq!(equality_cases(&[1, 1]), BTreeSet::from([1, 2]));
        assert_eq!(exceptional_order_bound(1, 7, 3).unwrap(), BigUint::from(4u32));
        assert_eq!(exceptional_order_bound(0, 7, 3).unwrap(), BigUint::zero());
        assert_eq!(exceptional_order_bound(3, 5, 2).unwrap(), BigUint::from(21u32));
    }

    #[test]
    fn global_bound_table_rows() {
        for (n, s, k) in [(1u64, 1u64, 1u64), (2, 3, 7), (3, 8, 255), (4, 22, 4_194_303)] {
            for d in 2..12u64 {
                for c in 1..=d {
                    let expected = BigInt::from(s + k * (d - c)) - BigInt::from(c) + 1;
                    assert_eq!(global_bound(n as usize, d, c).unwrap(), expected);
                }
            }
        }
        assert_eq!(global_bound_formula(1).unwrap(), "1+(d-c)-c+1");
        assert_eq!(global_bound_formula(4).unwrap(), "22+4194303(d-c)-c+1");
        // S_5 = 64, so the coefficient 2^64 - 1 no longer fits in u64 arithmetic with the other terms.
        assert_eq!(global_bound(5, 3, 2).unwrap(), (BigInt::one() << 64) + 62);
    }

    #[test]
    fn report_is_consistent() {
        let r = BoundReport::new(&[2, 2, 2], 2).unwrap();
        assert_eq!(r.global_bound, BigInt::from(8 + 255 * 4 - 2 + 1));
        assert!(r.is_consistent());
        assert!(BoundReport::new(&[1, 1], 3).is_err());
    }

    #[test]
    fn catalan_identity_to_twenty() {
        let report = verify_catalan_identity(20).unwrap();
        assert!(report.all_pass);
        let first: Vec<u32> = report.rows[..4]
            .iter()
            .map(|r| u32::try_from(&r.propagation).unwrap())
            .collect();
        assert_eq!(first, vec![1, 3, 8, 22]);
    }

    #[test]
    fn r_recurrence_holds() {
        assert!(r_recurrence_failures(40).unwrap().is_empty());
    }

    #[test]
    fn table_text_has_rows() {
        let text = bounds_table(4).unwrap().to_text();
        assert!(text.contains("3+7(d-c)-c+1"));
        assert!(text.contains("8+255(d-c)-c+1"));
    }
}
