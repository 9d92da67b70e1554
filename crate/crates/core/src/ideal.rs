//! Ideals generated by finitely many monomials with rational exponents.
//!
//! Companion ideals `I + M^{θ/(c-θ)}` leave the principal world, so the
//! descent works with minimal generator sets. Orders at coordinate strata
//! are the minimum over generators, which is all the invariant consumes.

use std::fmt;

use num_traits::{One, Zero};

use crate::monomial::{ExponentVector, Rational, VarSet};

/// A nonzero monomial ideal given by its minimal generators.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MonomialIdeal {
    gens: Vec<ExponentVector>,
}

impl MonomialIdeal {
    pub fn unit() -> Self {
        Self::principal(ExponentVector::one())
    }

    pub fn principal(m: ExponentVector) -> Self {
        Self { gens: vec![m] }
    }

    pub fn from_generators<I: IntoIterator<Item = ExponentVector>>(gens: I) -> Self {
        let mut ideal = Self {
            gens: gens.into_iter().collect(),
        };
        assert!(!ideal.gens.is_empty(), "the zero ideal is not representable");
        ideal.minimize();
        ideal
    }

    fn minimize(&mut self) {
        self.gens.sort();
        self.gens.dedup();
        let gens = std::mem::take(&mut self.gens);
        self.gens = gens
            .iter()
            .enumerate()
            .filter(|(k, g)| {
                !gens
                    .iter()
                    .enumerate()
                    .any(|(j, h)| j != *k && g.dominates(h) && (*g != h || j < *k))
            })
            .map(|(_, g)| g.clone())
            .collect();
    }

    pub fn generators(&self) -> &[ExponentVector] {
        &self.gens
    }

    pub fn is_unit(&self) -> bool {
        self.gens.iter().any(ExponentVector::is_one)
    }

    /// Order at the generic point of `point`.
    pub fn order_at(&self, point: VarSet) -> Rational {
        self.gens
            .iter()
            .map(|g| g.order_at(point))
            .min()
            .expect("at least one generator")
    }

    /// Order at the most special point of the support (all variables vanish).
    pub fn order(&self) -> Rational {
        self.gens.iter().map(ExponentVector::total).min().expect("at least one generator")
    }

    /// Localizes at a stratum: variables outside `vars` become units.
    pub fn restrict(&self, vars: VarSet) -> Self {
        Self::from_generators(self.gens.iter().map(|g| g.restrict(vars)))
    }

    pub fn mul_monomial(&self, m: &ExponentVector) -> Self {
        Self::from_generators(self.gens.iter().map(|g| g.add(m)))
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self::from_generators(self.gens.iter().chain(other.gens.iter()).cloned())
    }

    /// Largest monomial dividing every generator.
    pub fn common_factor(&self) -> ExponentVector {
        let mut it = self.gens.iter();
        let first = it.next().expect("at least one generator").clone();
        it.fold(first, |acc, g| acc.meet(g))
    }

    /// Divides every generator by `m`; `None` unless `m` divides them all.
    pub fn divide(&self, m: &ExponentVector) -> Option<Self> {
        let gens: Option<Vec<_>> = self.gens.iter().map(|g| g.checked_sub(m)).collect();
        gens.map(Self::from_generators)
    }

    /// `<X^a>` for a single variable `X` (a power of one hypersurface).
    pub fn is_bold_regular(&self) -> bool {
        self.gens.len() == 1 && self.gens[0].entries().len() == 1
    }

    pub fn support(&self) -> VarSet {
        self.gens.iter().fold(VarSet::EMPTY, |acc, g| acc.union(g.support()))
    }

    /// Candidate for a hypersurface of maximal contact: a variable occurring
    /// in a generator of minimal degree. Preference order: outside
    /// `exceptional` (the hypersurface must be transversal to the exceptional
    /// divisors), then variables whose pure power is a generator of minimal
    /// degree, then the smallest exponent, then the lowest index.
    pub fn maximal_contact_variable(&self, exceptional: VarSet) -> Option<usize> {
        let ord = self.order();
        let minimal: Vec<&ExponentVector> = self.gens.iter().filter(|g| g.total() == ord).collect();
        let pure: VarSet = minimal
            .iter()
            .filter(|g| g.entries().len() == 1)
            .map(|g| g.entries()[0].0)
            .collect();
        minimal
            .iter()
            .flat_map(|g| g.iter().map(|(v, e)| (exceptional.contains(v), !pure.contains(v), *e, v)))
            .min()
            .map(|(_, _, _, v)| v)
    }

    /// Coefficient ideal on the hypersurface `X_var = 0`, weighted so that
    /// its order equals `critical` whenever a minimal-degree generator is
    /// not a pure power of `X_var`:
    /// `Σ_{g : g_var < c} (g / X_var^{g_var})^{c / (c - g_var)}`.
    pub fn coefficient_ideal(&self, var: usize, critical: &Rational) -> Option<Self> {
        let parts: Vec<ExponentVector> = self
            .gens
            .iter()
            .filter_map(|g| {
                let gv = g.get(var);
                if gv >= *critical {
                    return None;
                }
                let rest = g.restrict(g.support().without(var));
                Some(rest.scale(&(critical / (critical - gv))))
            })
            .collect();
        if parts.is_empty() {
            None
        } else {
            Some(Self::from_generators(parts))
        }
    }

    /// Rational power of a principal ideal.
    pub fn principal_power(m: &ExponentVector, power: &Rational) -> Self {
        if power.is_zero() {
            Self::unit()
        } else if power.is_one() {
            Self::principal(m.clone())
        } else {
            Self::principal(m.scale(power))
        }
    }
}

impl fmt::Debug for MonomialIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for MonomialIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (k, g) in self.gens.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, ">")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial::rat;

    fn ev(pairs: &[(usize, i64)]) -> ExponentVector {
        ExponentVector::new(pairs.iter().map(|&(v, e)| (v, rat(e)))).unwrap()
    }

    #[test]
    fn minimize_drops_multiples() {
        let i = MonomialIdeal::from_generators([ev(&[(1, 2)]), ev(&[(1, 3), (2, 1)]), ev(&[(2, 4)])]);
        assert_eq!(i.generators(), &[ev(&[(1, 2)]), ev(&[(2, 4)])]);
        assert_eq!(i.order(), rat(2));
        assert_eq!(i.order_at(VarSet::singleton(2)), rat(0));
    }

    #[test]
    fn coefficient_ideal_preserves_order_of_monomial() {
        let k = MonomialIdeal::principal(ev(&[(1, 2), (2, 3)]));
        let c = k.order();
        let coeff = k.coefficient_ideal(1, &c).unwrap();
        assert_eq!(coeff.generators(), &[ev(&[(2, 5)])]);
        assert_eq!(coeff.order(), c);
    }

    #[test]
    fn coefficient_ideal_of_pure_power_is_large() {
        // <X1^2, X2^5>: maximal contact X1, coefficient X2^5 with c = 2.
        let k = MonomialIdeal::from_generators([ev(&[(1, 2)]), ev(&[(2, 5)])]);
        assert_eq!(k.maximal_contact_variable(VarSet::EMPTY), Some(1));
        let coeff = k.coefficient_ideal(1, &k.order()).unwrap();
        assert_eq!(coeff.generators(), &[ev(&[(2, 5)])]);
    }

    #[test]
    fn maximal_contact_prefers_small_exponent_then_low_index() {
        let k = MonomialIdeal::principal(ev(&[(1, 3), (2, 1), (3, 1)]));
        assert_eq!(k.maximal_contact_variable(VarSet::EMPTY), Some(2));
        assert_eq!(k.maximal_contact_variable(VarSet::singleton(2)), Some(3));
    }

    #[test]
    fn bold_regular() {
        assert!(MonomialIdeal::principal(ev(&[(2, 4)])).is_bold_regular());
        assert!(!MonomialIdeal::principal(ev(&[(1, 1), (2, 4)])).is_bold_regular());
        assert!(!MonomialIdeal::unit().is_bold_regular());
    }

    #[test]
    fn common_factor_and_divide() {
        let i = MonomialIdeal::from_generators([ev(&[(1, 2), (2, 1)]), ev(&[(1, 1), (3, 2)])]);
        let f = i.common_factor();
        assert_eq!(f, ev(&[(1, 1)]));
        let q = i.divide(&f).unwrap();
        assert_eq!(q.generators(), &[ev(&[(1, 1), (2, 1)]), ev(&[(3, 2)])]);
        assert!(i.divide(&ev(&[(2, 1)])).is_none());
    }
}
