//! Sparse multivariate polynomials.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use super::coeff::Coefficient;
use super::AlgebraError;

/// Exponent vector with its total degree cached.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    deg: u32,
    exps: SmallVec<[u16; 20]>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            deg: 0,
            exps: SmallVec::from_elem(0, nvars),
        }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Monomial::one(nvars);
        m.exps[i] = 1;
        m.deg = 1;
        m
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        Monomial {
            deg: exps.iter().map(|&e| e as u32).sum(),
            exps: SmallVec::from_slice(exps),
        }
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn is_one(&self) -> bool {
        self.deg == 0
    }

    /// Index of the variable if this is a pure power `x_i^e` with `e > 0`.
    pub fn pure_power_of(&self) -> Option<usize> {
        let mut found = None;
        for (i, &e) in self.exps.iter().enumerate() {
            if e > 0 {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.deg <= other.deg && self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial {
            deg: other.deg - self.deg,
            exps: other.exps.iter().zip(&self.exps).map(|(b, a)| b - a).collect(),
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            deg: self.deg + other.deg,
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let exps: SmallVec<[u16; 20]> = self
            .exps
            .iter()
            .zip(&other.exps)
            .map(|(a, b)| *a.max(b))
            .collect();
        Monomial {
            deg: exps.iter().map(|&e| e as u32).sum(),
            exps,
        }
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| *a == 0 || *b == 0)
    }
}

/// A monomial order over a fixed variable order `x_0 > x_1 > ... > x_{k-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MonomialOrder {
    #[default]
    Grevlex,
    Lex,
}

impl MonomialOrder {
    pub fn cmp(self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonomialOrder::Grevlex => grevlex(a, b),
            MonomialOrder::Lex => a.exps.cmp(&b.exps),
        }
    }
}

#[inline]
fn grevlex(a: &Monomial, b: &Monomial) -> Ordering {
    match a.deg.cmp(&b.deg) {
        Ordering::Equal => {}
        o => return o,
    }
    for (x, y) in a.exps.iter().zip(&b.exps).rev() {
        match x.cmp(y) {
            Ordering::Equal => {}
            o => return o.reverse(),
        }
    }
    Ordering::Equal
}

/// Sparse polynomial in `nvars` variables.
///
/// Terms are stored in ascending grevlex order with no zero coefficients, so
/// equality is structural and the grevlex leading term is the last entry.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly<C> {
    nvars: usize,
    terms: Vec<(Monomial, C)>,
}

impl<C: Coefficient> MultiPoly<C> {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(Monomial::one(nvars), c)
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let nvars = m.nvars();
        let terms = if c.is_zero() { vec![] } else { vec![(m, c)] };
        MultiPoly { nvars, terms }
    }

    /// The variable `x_i`; `one` fixes the coefficient domain.
    pub fn var(nvars: usize, i: usize, one: C) -> Self {
        Self::monomial(Monomial::var(nvars, i), one)
    }

    /// Builds a polynomial from arbitrary terms, merging duplicates.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut v: Vec<(Monomial, C)> = terms.into_iter().collect();
        for (m, _) in &v {
            assert_eq!(m.nvars(), nvars, "arity mismatch");
        }
        v.sort_by(|a, b| grevlex(&a.0, &b.0));
        let mut out: Vec<(Monomial, C)> = Vec::with_capacity(v.len());
        for (m, c) in v {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = lc.add(&c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        MultiPoly { nvars, terms: out }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Terms in ascending grevlex order.
    pub fn terms(&self) -> &[(Monomial, C)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, C)> {
        self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.last().map(|(m, _)| m.degree())
    }

    /// Leading term under `ord`.
    pub fn leading_term(&self, ord: MonomialOrder) -> Option<(&Monomial, &C)> {
        match ord {
            MonomialOrder::Grevlex => self.terms.last().map(|(m, c)| (m, c)),
            _ => self
                .terms
                .iter()
                .max_by(|a, b| ord.cmp(&a.0, &b.0))
                .map(|(m, c)| (m, c)),
        }
    }

    /// Removes and returns the leading term under `ord`.
    pub(crate) fn pop_leading(&mut self, ord: MonomialOrder) -> Option<(Monomial, C)> {
        match ord {
            MonomialOrder::Grevlex => self.terms.pop(),
            _ => {
                let idx = (0..self.terms.len())
                    .max_by(|&a, &b| ord.cmp(&self.terms[a].0, &self.terms[b].0))?;
                Some(self.terms.remove(idx))
            }
        }
    }

    pub fn coefficient_of(&self, m: &Monomial) -> Option<&C> {
        self.terms
            .binary_search_by(|(t, _)| grevlex(t, m))
            .ok()
            .map(|i| &self.terms[i].1)
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, k: &C) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.mul(k))).collect(),
        }
    }

    /// `self + k * m * other` in one merge pass.
    pub fn add_scaled(&self, other: &Self, m: &Monomial, k: &C) -> Self {
        assert_eq!(self.nvars, other.nvars, "arity mismatch");
        if k.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter().peekable();
        let mut b = other.terms.iter().map(|(t, c)| (t.mul(m), c.mul(k))).peekable();
        loop {
            let ord = match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (Some(x), Some(y)) => grevlex(&x.0, &y.0),
            };
            match ord {
                Ordering::Less => out.push(a.next().unwrap().clone()),
                Ordering::Greater => out.push(b.next().unwrap()),
                Ordering::Equal => {
                    let (m, c) = a.next().unwrap();
                    let (_, d) = b.next().unwrap();
                    let s = c.add(&d);
                    if !s.is_zero() {
                        out.push((m.clone(), s));
                    }
                }
            }
        }
        MultiPoly {
            nvars: self.nvars,
            terms: out,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match other.terms.first() {
            None => self.clone(),
            Some((_, c)) => self.add_scaled(other, &Monomial::one(self.nvars), &c.one_like()),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        match other.terms.first() {
            None => self.clone(),
            Some((_, c)) => {
                self.add_scaled(other, &Monomial::one(self.nvars), &c.one_like().neg())
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "arity mismatch");
        let products = self
            .terms
            .iter()
            .flat_map(|(m, c)| other.terms.iter().map(move |(n, d)| (m.mul(n), c.mul(d))));
        Self::from_terms(self.nvars, products)
    }

    pub fn pow(&self, e: u32, one: &C) -> Self {
        let mut acc = Self::constant(self.nvars, one.clone());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    fn check_compatible(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.nvars != other.nvars {
            return Err(AlgebraError::ArityMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        if let (Some((_, a)), Some((_, b))) = (self.terms.first(), other.terms.first()) {
            if !a.compatible(b) {
                return Err(AlgebraError::ModulusMismatch);
            }
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_compatible(other)?;
        Ok(self.add(other))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_compatible(other)?;
        Ok(self.mul(other))
    }

    /// Formal partial derivative with respect to `x_var`.
    pub fn partial_derivative(&self, var: usize) -> Self {
        let terms = self.terms.iter().filter_map(|(m, c)| {
            let e = m.exps[var];
            if e == 0 {
                return None;
            }
            let mut exps = m.exps.clone();
            exps[var] -= 1;
            let dm = Monomial {
                deg: m.deg - 1,
                exps,
            };
            Some((dm, c.mul(&c.from_i64_like(e as i64))))
        });
        Self::from_terms(self.nvars, terms)
    }

    /// Value at a full point.
    pub fn evaluate(&self, point: &[C]) -> Result<C, AlgebraError> {
        if point.len() != self.nvars {
            return Err(AlgebraError::ArityMismatch {
                left: self.nvars,
                right: point.len(),
            });
        }
        let Some(zero) = point.first().map(|c| c.zero_like()) else {
            // zero variables: the polynomial is a constant
            return Ok(match self.terms.first() {
                Some((_, c)) => c.clone(),
                None => return Err(AlgebraError::EmptyPoint),
            });
        };
        let mut acc = zero;
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.exps) {
                for _ in 0..e {
                    t = t.mul(x);
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Substitutes the given variables; the arity is unchanged and the
    /// substituted variables simply no longer occur.
    pub fn evaluate_partial(&self, assignment: &[(usize, C)]) -> Self {
        let terms = self.terms.iter().map(|(m, c)| {
            let mut exps = m.exps.clone();
            let mut t = c.clone();
            for (var, val) in assignment {
                for _ in 0..exps[*var] {
                    t = t.mul(val);
                }
                exps[*var] = 0;
            }
            (Monomial::from_exponents(&exps), t)
        });
        Self::from_terms(self.nvars, terms)
    }

    pub fn map_coefficients<D: Coefficient>(
        &self,
        mut f: impl FnMut(&C) -> Result<D, AlgebraError>,
    ) -> Result<MultiPoly<D>, AlgebraError> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| Ok((m.clone(), f(c)?)))
            .collect::<Result<Vec<_>, AlgebraError>>()?;
        Ok(MultiPoly::from_terms(self.nvars, terms))
    }

    /// Divides by the leading coefficient under `ord`.
    pub fn make_monic(&self, ord: MonomialOrder) -> Self {
        match self.leading_term(ord) {
            None => self.clone(),
            Some((_, lc)) if lc.is_one() => self.clone(),
            Some((_, lc)) => self.scale(&lc.inv().expect("nonzero leading coefficient")),
        }
    }

    /// Human-readable form with the given variable names, highest term first.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a, C> {
        PolyDisplay { poly: self, names }
    }
}

pub struct PolyDisplay<'a, C> {
    poly: &'a MultiPoly<C>,
    names: &'a [String],
}

impl<C: Coefficient> fmt::Display for PolyDisplay<'_, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.poly.terms.iter().rev().enumerate() {
            let s = c.to_string();
            let (neg, mag) = match s.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, s),
            };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let unit = c.is_one() || c.neg().is_one();
            let mut wrote = false;
            if !unit || m.is_one() {
                write!(f, "{mag}")?;
                wrote = true;
            }
            for (i, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if wrote {
                    write!(f, "*")?;
                }
                let name = self.names.get(i).map(String::as_str).unwrap_or("?");
                write!(f, "{name}")?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
                wrote = true;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::coeff::{rat, PrimeField, Rational};

    fn q(n: i64) -> Rational {
        rat(n)
    }

    fn ab() -> (MultiPoly<Rational>, MultiPoly<Rational>) {
        (MultiPoly::var(2, 0, q(1)), MultiPoly::var(2, 1, q(1)))
    }

    #[test]
    fn difference_of_squares() {
        let (a, b) = ab();
        let lhs = a.add(&b).mul(&a.sub(&b));
        let rhs = a.mul(&a).sub(&b.mul(&b));
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.num_terms(), 2);
    }

    #[test]
    fn derivative_and_evaluation() {
        let (a, b) = ab();
        let f = a.mul(&b).add(&a.mul(&a));
        let expected = b.add(&a.scale(&q(2)));
        assert_eq!(f.partial_derivative(0), expected);
        assert_eq!(a.mul(&b).evaluate(&[q(2), q(3)]).unwrap(), q(6));
        assert!(a.evaluate(&[q(1)]).is_err());
    }

    #[test]
    fn grevlex_ordering() {
        let x2 = Monomial::from_exponents(&[2, 0, 0]);
        let xy = Monomial::from_exponents(&[1, 1, 0]);
        let y2 = Monomial::from_exponents(&[0, 2, 0]);
        let xz = Monomial::from_exponents(&[1, 0, 1]);
        let x = Monomial::from_exponents(&[1, 0, 0]);
        let ord = MonomialOrder::Grevlex;
        assert_eq!(ord.cmp(&x2, &xy), Ordering::Greater);
        assert_eq!(ord.cmp(&xy, &y2), Ordering::Greater);
        assert_eq!(ord.cmp(&y2, &xz), Ordering::Greater);
        assert_eq!(ord.cmp(&xz, &x), Ordering::Greater);
        assert_eq!(MonomialOrder::Lex.cmp(&xz, &y2), Ordering::Greater);
    }

    #[test]
    fn checked_ops_report_mismatch() {
        let a = MultiPoly::var(2, 0, q(1));
        let c = MultiPoly::var(3, 0, q(1));
        assert!(matches!(
            a.checked_add(&c),
            Err(AlgebraError::ArityMismatch { .. })
        ));
        let f7 = PrimeField::new(7).unwrap();
        let f11 = PrimeField::new(11).unwrap();
        let x = MultiPoly::var(1, 0, f7.one());
        let y = MultiPoly::var(1, 0, f11.one());
        assert_eq!(x.checked_mul(&y), Err(AlgebraError::ModulusMismatch));
    }

    #[test]
    fn display() {
        let (a, b) = ab();
        let f = a.mul(&a).sub(&b.scale(&q(5))).add(&MultiPoly::constant(2, q(-3)));
        let names = vec!["a".to_string(), "b".to_string()];
        assert_eq!(f.display_with(&names).to_string(), "a^2 - 5*b - 3");
    }
}
