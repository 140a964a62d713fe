//! Dense univariate polynomials over a field.

use std::fmt;

use super::coeff::Coefficient;
use super::AlgebraError;

/// Coefficients in ascending degree order, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniPoly<C> {
    coeffs: Vec<C>,
}

impl<C: Coefficient> UniPoly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn coefficients(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some(lc) => {
                let inv = lc.inv().expect("field coefficient");
                UniPoly {
                    coeffs: self.coeffs.iter().map(|c| c.mul(&inv)).collect(),
                }
            }
        }
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.mul(&c.from_i64_like(i as i64)))
            .collect();
        UniPoly::new(coeffs)
    }

    pub fn eval(&self, x: &C) -> C {
        let mut acc = x.zero_like();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let inv = divisor.leading().unwrap().inv().expect("field coefficient");
        let mut rem = self.coeffs.clone();
        let Some(zero) = rem.first().map(|c| c.zero_like()) else {
            return (self.clone(), self.clone());
        };
        if rem.len() <= dd {
            return (UniPoly::new(vec![]), self.clone());
        }
        let mut quot = vec![zero.clone(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd].mul(&inv);
            if c.is_zero() {
                continue;
            }
            for (i, d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] = rem[k + i].sub(&c.mul(d));
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    /// Monic greatest common divisor (zero iff both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `q / gcd(q, q')`, made monic.
    ///
    /// Over `F_p` this is exact as long as `p` exceeds the degree.
    pub fn squarefree_part(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::ZeroPolynomial);
        }
        let g = self.gcd(&self.derivative());
        let (q, r) = self.div_rem(&g);
        debug_assert!(r.is_zero());
        Ok(q.monic())
    }
}

impl<C: Coefficient> fmt::Display for UniPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 if c.is_one() => write!(f, "t")?,
                1 => write!(f, "{c}*t")?,
                _ if c.is_one() => write!(f, "t^{i}")?,
                _ => write!(f, "{c}*t^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::coeff::{Fp, PrimeField};

    fn poly(f: &PrimeField, c: &[i64]) -> UniPoly<Fp> {
        UniPoly::new(c.iter().map(|&v| f.from_i64(v)).collect())
    }

    #[test]
    fn squarefree_examples() {
        let f = PrimeField::new(2_147_483_647).unwrap();
        // (t-2)^2
        let sq = poly(&f, &[4, -4, 1]);
        assert_eq!(sq.squarefree_part().unwrap(), poly(&f, &[-2, 1]));
        let sf = poly(&f, &[6, -5, 1]);
        assert_eq!(sf.squarefree_part().unwrap(), sf);
        // t^3 - t^2 -> t^2 - t
        let cubic = poly(&f, &[0, 0, -1, 1]);
        assert_eq!(cubic.squarefree_part().unwrap(), poly(&f, &[0, -1, 1]));
        assert_eq!(
            poly(&f, &[]).squarefree_part(),
            Err(AlgebraError::ZeroPolynomial)
        );
    }

    #[test]
    fn division_identity() {
        let f = PrimeField::new(101).unwrap();
        let a = poly(&f, &[3, 0, 7, 1, 5]);
        let b = poly(&f, &[1, 2, 1]);
        let (q, r) = a.div_rem(&b);
        let back: Vec<Fp> = {
            let mut v = vec![f.zero(); 5];
            for (i, qc) in q.coefficients().iter().enumerate() {
                for (j, bc) in b.coefficients().iter().enumerate() {
                    v[i + j] = v[i + j].add(&qc.mul(bc));
                }
            }
            for (i, rc) in r.coefficients().iter().enumerate() {
                v[i] = v[i].add(rc);
            }
            v
        };
        assert_eq!(UniPoly::new(back), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn eval_roots() {
        let f = PrimeField::new(101).unwrap();
        let p = poly(&f, &[6, -5, 1]);
        assert!(p.eval(&f.elem(2)).is_zero());
        assert!(p.eval(&f.elem(3)).is_zero());
        assert!(!p.eval(&f.elem(4)).is_zero());
        assert_eq!(p.to_string(), "t^2 + 96*t + 6");
    }
}
