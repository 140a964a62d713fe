//! Coefficient domains: arbitrary-precision rationals and prime fields.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::AlgebraError;

/// Exact rational number with arbitrary-precision numerator and denominator.
///
/// Always kept in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Operations a polynomial coefficient must support.
///
/// Elements carry enough context (e.g. their modulus) to build zeros and
/// ones "like" themselves, so polynomials never need a separate ring handle.
pub trait Coefficient: Clone + PartialEq + Eq + fmt::Debug + fmt::Display + Send + Sync {
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    #[allow(clippy::wrong_self_convention)]
    fn from_i64_like(&self, v: i64) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;
    /// Whether `self` and `other` live in the same domain (same modulus).
    fn compatible(&self, other: &Self) -> bool;
}

impl Coefficient for Rational {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn from_i64_like(&self, v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn compatible(&self, _other: &Self) -> bool {
        true
    }
}

/// Largest modulus supported by [`Fp`]; products of two residues fit in `u64`.
pub const MAX_MODULUS: u64 = u32::MAX as u64;

/// Deterministic Miller-Rabin, exact for every `u64` below 2^64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A prime field `Z/pZ` with `p < 2^32`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, AlgebraError> {
        if p > MAX_MODULUS || !is_prime(p) {
            return Err(AlgebraError::BadModulus(p));
        }
        Ok(PrimeField { p: p as u32 })
    }

    pub fn modulus(&self) -> u64 {
        self.p as u64
    }

    pub fn elem(&self, v: u64) -> Fp {
        Fp {
            value: (v % self.p as u64) as u32,
            modulus: self.p,
        }
    }

    pub fn from_i64(&self, v: i64) -> Fp {
        let p = self.p as i64;
        self.elem(v.rem_euclid(p) as u64)
    }

    pub fn zero(&self) -> Fp {
        self.elem(0)
    }

    pub fn one(&self) -> Fp {
        self.elem(1)
    }

    /// Image of a rational number; fails if `p` divides the denominator.
    pub fn from_rational(&self, q: &Rational) -> Result<Fp, AlgebraError> {
        let p = BigInt::from(self.p);
        let num = q.numer().mod_floor(&p).to_u64().unwrap_or(0);
        let den = q.denom().mod_floor(&p).to_u64().unwrap_or(0);
        let den = self.elem(den).inv().ok_or(AlgebraError::DenominatorVanishes)?;
        Ok(self.elem(num).mul(&den))
    }
}

/// Element of a prime field; the residue is always in `[0, modulus)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    value: u32,
    modulus: u32,
}

impl Fp {
    pub fn value(&self) -> u64 {
        self.value as u64
    }

    pub fn modulus(&self) -> u64 {
        self.modulus as u64
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.modulus }
    }

    pub fn pow(&self, mut e: u64) -> Fp {
        let mut base = *self;
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    #[inline]
    fn check(&self, rhs: &Fp) {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch in Fp arithmetic");
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Coefficient for Fp {
    #[inline]
    fn is_zero(&self) -> bool {
        self.value == 0
    }
    #[inline]
    fn is_one(&self) -> bool {
        self.value == 1
    }
    fn zero_like(&self) -> Self {
        Fp {
            value: 0,
            modulus: self.modulus,
        }
    }
    fn one_like(&self) -> Self {
        Fp {
            value: 1,
            modulus: self.modulus,
        }
    }
    fn from_i64_like(&self, v: i64) -> Self {
        self.field().from_i64(v)
    }
    #[inline]
    fn add(&self, rhs: &Self) -> Self {
        self.check(rhs);
        let s = self.value as u64 + rhs.value as u64;
        let m = self.modulus as u64;
        Fp {
            value: if s >= m { s - m } else { s } as u32,
            modulus: self.modulus,
        }
    }
    #[inline]
    fn sub(&self, rhs: &Self) -> Self {
        self.check(rhs);
        let v = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            (self.value as u64 + self.modulus as u64 - rhs.value as u64) as u32
        };
        Fp {
            value: v,
            modulus: self.modulus,
        }
    }
    #[inline]
    fn mul(&self, rhs: &Self) -> Self {
        self.check(rhs);
        Fp {
            value: ((self.value as u64 * rhs.value as u64) % self.modulus as u64) as u32,
            modulus: self.modulus,
        }
    }
    #[inline]
    fn neg(&self) -> Self {
        Fp {
            value: if self.value == 0 {
                0
            } else {
                self.modulus - self.value
            },
            modulus: self.modulus,
        }
    }
    fn inv(&self) -> Option<Self> {
        if self.value == 0 {
            return None;
        }
        // extended Euclid on signed 64-bit values
        let (mut r0, mut r1) = (self.modulus as i64, self.value as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(self.field().from_i64(t0))
    }
    fn compatible(&self, other: &Self) -> bool {
        self.modulus == other.modulus
    }
}

/// Integer-valued rational, handy in tests and builders.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}
