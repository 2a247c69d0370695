//! Exact scalar fields.
//!
//! Every rank computation in this crate runs over an explicit field chosen at
//! call time: the rationals (arbitrary precision, the default) or a prime
//! field.  The [`Scalar`] trait is the small interface the linear algebra
//! needs; it is object-unsafe on purpose, callers monomorphize.

use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A field together with its element representation.
///
/// Implementations carry whatever runtime data the field needs (the modulus
/// for a prime field, nothing for the rationals), so `Scalar` values are
/// passed by reference into the linear algebra.
pub trait Scalar: Clone + fmt::Debug {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn embed_i64(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; panics on zero (callers guard).
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.mul(a, &self.inv(b))
    }
}

/// The rational numbers with arbitrary-precision arithmetic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

impl Scalar for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn embed_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        assert!(!a.is_zero(), "inverse of zero");
        a.recip()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
}

/// The prime field `F_p`, elements stored as canonical residues in `0..p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

/// Default modulus for fast finite-field runs: a prime comfortably above any
/// coefficient sum the bundled sheaves can produce.
pub const DEFAULT_PRIME: u64 = 1_000_003;

impl PrimeField {
    /// Builds `F_p`, rejecting composite or undersized moduli.
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || !is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl Scalar for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn embed_i64(&self, n: i64) -> u64 {
        let p = self.p as i128;
        let r = (n as i128).rem_euclid(p);
        r as u64
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = (*a as u128 + *b as u128) % self.p as u128;
        s as u64
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        let p = self.p as u128;
        let s = (*a as u128 + p - *b as u128 % p) % p;
        s as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - *a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        let s = (*a as u128 * *b as u128) % self.p as u128;
        s as u64
    }
    fn inv(&self, a: &u64) -> u64 {
        assert!(*a != 0, "inverse of zero");
        // Extended Euclid on (a, p); p prime so gcd is 1.
        let (mut r0, mut r1) = (self.p as i128, *a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        t0.rem_euclid(self.p as i128) as u64
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
}

/// A runtime name for a field, as it appears in CLI flags and reports.
///
/// Parses from `"q"` (rationals) or `"fp:<prime>"`; `"fp"` alone selects the
/// default prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "modulus", rename_all = "snake_case")]
pub enum FieldSpec {
    Q,
    Fp(u64),
}

impl FieldSpec {
    pub fn parse(s: &str) -> Result<FieldSpec> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("q") {
            return Ok(FieldSpec::Q);
        }
        if s.eq_ignore_ascii_case("fp") {
            return Ok(FieldSpec::Fp(DEFAULT_PRIME));
        }
        if let Some(rest) = s.strip_prefix("fp:").or_else(|| s.strip_prefix("FP:")) {
            let p: u64 = rest
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad field spec {s:?}")))?;
            PrimeField::new(p)?;
            return Ok(FieldSpec::Fp(p));
        }
        Err(Error::InvalidArgument(format!(
            "bad field spec {s:?}; expected \"q\" or \"fp:<prime>\""
        )))
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Q => write!(f, "q"),
            FieldSpec::Fp(p) => write!(f, "fp:{p}"),
        }
    }
}
