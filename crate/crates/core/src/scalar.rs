//! Numeric layer: the [`Scalar`] abstraction over exact rationals and
//! floats, plus two small exact number types used where rationals are not
//! closed enough ([`Radical`] for quasi-norms, [`Surd`] for square-root
//! weights).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{DslabError, Result};

/// Relative tolerance for float-mode comparisons.
pub const FLOAT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericMode {
    Exact,
    Float,
}

impl fmt::Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericMode::Exact => f.write_str("exact"),
            NumericMode::Float => f.write_str("float"),
        }
    }
}

/// Field element used for sampled values and coefficients.
///
/// Implemented for [`BigRational`] (exact mode) and `f64` (float mode).
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    const MODE: NumericMode;

    fn from_i64(v: i64) -> Self;

    fn from_rational(r: &BigRational) -> Self;

    /// Exact conversion when possible; `None` for floats that cannot be
    /// trusted as exact values.
    fn to_rational(&self) -> Option<BigRational>;

    /// `None` in exact mode: a float is never promoted to an exact value.
    fn from_float(v: f64) -> Option<Self>;

    fn magnitude(&self) -> Self;

    fn as_f64(&self) -> f64;

    /// CSV cell text: `num/den` or an integer in exact mode, shortest
    /// round-trip decimal in float mode.
    fn to_csv(&self) -> String;

    /// Equality in the mode's own sense: exact for rationals,
    /// relative tolerance [`FLOAT_REL_TOL`] for floats.
    fn mode_eq(&self, other: &Self) -> bool;

    fn from_u64(v: u64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    /// `2^e` for a (possibly negative) integer exponent.
    fn pow2(e: i64) -> Self {
        Self::from_rational(&pow2_rational(e))
    }
}

impl Scalar for BigRational {
    const MODE: NumericMode = NumericMode::Exact;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn from_float(_: f64) -> Option<Self> {
        None
    }

    fn magnitude(&self) -> Self {
        self.abs()
    }

    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn to_csv(&self) -> String {
        format_rational(self)
    }

    fn mode_eq(&self, other: &Self) -> bool {
        self == other
    }
}

impl Scalar for f64 {
    const MODE: NumericMode = NumericMode::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }

    fn to_rational(&self) -> Option<BigRational> {
        None
    }

    fn from_float(v: f64) -> Option<Self> {
        Some(v)
    }

    fn magnitude(&self) -> Self {
        self.abs()
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn to_csv(&self) -> String {
        format!("{self}")
    }

    fn mode_eq(&self, other: &Self) -> bool {
        approx_eq(*self, *other, FLOAT_REL_TOL)
    }
}

/// Relative comparison with an absolute floor of `tol` near zero.
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() <= tol * scale
}

pub fn pow2_rational(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs() as usize;
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Converts a rational to `f64` without overflowing on huge numerators or
/// denominators.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() && (v != 0.0 || r.is_zero()) {
            return v;
        }
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * ln_abs_rational(r).exp()
}

/// Natural logarithm of `|r|` for `r != 0`, robust to very large operands.
pub fn ln_abs_rational(r: &BigRational) -> f64 {
    ln_bigint(&r.numer().abs()) - ln_bigint(&r.denom().abs())
}

fn ln_bigint(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift as usize).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `num/den`, an integer, or a plain decimal (`0.4`) exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(DslabError::parse("empty rational"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n
            .trim()
            .parse()
            .map_err(|_| DslabError::parse(format!("bad numerator in {text:?}")))?;
        let den: BigInt = d
            .trim()
            .parse()
            .map_err(|_| DslabError::parse(format!("bad denominator in {text:?}")))?;
        if den.is_zero() {
            return Err(DslabError::parse(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
        {
            return Err(DslabError::parse(format!("bad decimal {text:?}")));
        }
        let digits = format!("{int_digits}{frac}");
        let mut num: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits
                .parse()
                .map_err(|_| DslabError::parse(format!("bad decimal {text:?}")))?
        };
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(num, den));
    }
    let num: BigInt = s
        .parse()
        .map_err(|_| DslabError::parse(format!("bad rational {text:?}")))?;
    Ok(BigRational::from_integer(num))
}

/// Returns `Some(r)` with `r^k = x` when the nonnegative rational `x` is a
/// perfect `k`-th power of a rational.
pub fn exact_root(x: &BigRational, k: u32) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    if k == 1 {
        return Some(x.clone());
    }
    let root_int = |v: &BigInt| -> Option<BigInt> {
        let r = v.nth_root(k);
        (num_traits::pow(r.clone(), k as usize) == *v).then_some(r)
    };
    Some(BigRational::new(root_int(x.numer())?, root_int(x.denom())?))
}

/// A nonnegative real of the form `radicand^(1/index)` with rational
/// radicand.
///
/// Quasi-norms of finitely-valued functions at rational exponents
/// (e.g. `‖D_8‖_{2/5} = 2^{-9/2}`) land in this set and are compared
/// exactly by cross-powering.
#[derive(Debug, Clone)]
pub struct Radical {
    radicand: BigRational,
    index: u32,
}

impl Radical {
    pub fn new(radicand: BigRational, index: u32) -> Result<Self> {
        if radicand.is_negative() {
            return Err(DslabError::domain("negative radicand"));
        }
        if index == 0 {
            return Err(DslabError::domain("zero root index"));
        }
        Ok(Radical { radicand, index }.reduced())
    }

    pub fn from_rational(r: BigRational) -> Result<Self> {
        Radical::new(r, 1)
    }

    pub fn radicand(&self) -> &BigRational {
        &self.radicand
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// `2^(num/den)` for a rational exponent.
    pub fn pow2(exponent: &BigRational) -> Self {
        let den = exponent.denom().to_u32().expect("root index fits u32");
        let num = exponent.numer().to_i64().expect("exponent numerator fits i64");
        Radical {
            radicand: pow2_rational(num),
            index: den,
        }
        .reduced()
    }

    fn reduced(self) -> Self {
        let Radical { radicand, index } = self;
        if radicand.is_zero() || radicand.is_one() {
            return Radical { radicand, index: 1 };
        }
        let mut index = index;
        let mut radicand = radicand;
        let mut d = 2;
        while d <= index {
            if index % d == 0 {
                if let Some(r) = exact_root(&radicand, d) {
                    radicand = r;
                    index /= d;
                    continue;
                }
            }
            d += 1;
        }
        Radical { radicand, index }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        (self.index == 1).then(|| self.radicand.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.radicand.is_zero()
    }

    pub fn mul(&self, other: &Radical) -> Radical {
        let l = self.index.lcm(&other.index);
        let a = num_traits::pow(self.radicand.clone(), (l / self.index) as usize);
        let b = num_traits::pow(other.radicand.clone(), (l / other.index) as usize);
        Radical {
            radicand: a * b,
            index: l,
        }
        .reduced()
    }

    pub fn div(&self, other: &Radical) -> Result<Radical> {
        if other.is_zero() {
            return Err(DslabError::domain("division by zero radical"));
        }
        let inv = Radical {
            radicand: other.radicand.recip(),
            index: other.index,
        };
        Ok(self.mul(&inv))
    }

    /// Raises to the rational power `e`.
    pub fn pow(&self, e: &BigRational) -> Result<Radical> {
        if self.is_zero() {
            if e.is_positive() {
                return Ok(self.clone());
            }
            return Err(DslabError::domain("zero to a non-positive power"));
        }
        let num = e
            .numer()
            .to_i64()
            .ok_or_else(|| DslabError::domain("exponent too large"))?;
        let den = e
            .denom()
            .to_u32()
            .ok_or_else(|| DslabError::domain("exponent too large"))?;
        let base = if num < 0 {
            self.radicand.recip()
        } else {
            self.radicand.clone()
        };
        Radical::new(
            num_traits::pow(base, num.unsigned_abs() as usize),
            self.index * den,
        )
    }

    pub fn to_f64(&self) -> f64 {
        if self.radicand.is_zero() {
            return 0.0;
        }
        if self.index == 1 {
            return rational_to_f64(&self.radicand);
        }
        (ln_abs_rational(&self.radicand) / self.index as f64).exp()
    }

    /// `a^(1/d)` vs `b^(1/e)` through `a^e` vs `b^d`.
    fn cross(&self, other: &Radical) -> (BigRational, BigRational) {
        (
            num_traits::pow(self.radicand.clone(), other.index as usize),
            num_traits::pow(other.radicand.clone(), self.index as usize),
        )
    }
}

impl PartialEq for Radical {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.cross(other);
        a == b
    }
}

impl Eq for Radical {}

impl PartialOrd for Radical {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Radical {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let (a, b) = self.cross(other);
        a.cmp(&b)
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == 1 {
            f.write_str(&format_rational(&self.radicand))
        } else if self.radicand.is_integer() {
            write!(f, "{}^(1/{})", self.radicand.numer(), self.index)
        } else {
            write!(f, "({})^(1/{})", format_rational(&self.radicand), self.index)
        }
    }
}

/// A rational linear combination of square roots of distinct squarefree
/// integers: `Σ c_f √f`.
///
/// Such combinations are zero iff every coefficient is zero (square roots
/// of distinct squarefree integers are linearly independent over Q), which
/// makes exact identity checks with weights like `k^{-1/2}` possible.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Surd {
    terms: BTreeMap<u64, BigRational>,
}

impl Surd {
    pub fn zero() -> Self {
        Surd::default()
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut s = Surd::zero();
        s.add_term(1, r);
        s
    }

    /// `c · √k` for any positive integer `k`.
    pub fn sqrt_times(k: u64, c: BigRational) -> Self {
        let (square, free) = squarefree_split(k);
        let mut s = Surd::zero();
        s.add_term(free, c * BigRational::from_integer(BigInt::from(square)));
        s
    }

    /// `k^{-1/2}`.
    pub fn inv_sqrt(k: u64) -> Self {
        assert!(k > 0, "inv_sqrt(0)");
        // k^{-1/2} = √k / k
        Surd::sqrt_times(k, BigRational::new(BigInt::one(), BigInt::from(k)))
    }

    fn add_term(&mut self, radicand: u64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(radicand).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&radicand);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn scale(&self, r: &BigRational) -> Surd {
        if r.is_zero() {
            return Surd::zero();
        }
        Surd {
            terms: self.terms.iter().map(|(k, v)| (*k, v * r)).collect(),
        }
    }

    pub fn add(&self, other: &Surd) -> Surd {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(*k, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Surd) -> Surd {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(*k, -v.clone());
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, v)| rational_to_f64(v) * (*k as f64).sqrt())
            .sum()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, v)| {
                if *k == 1 {
                    format_rational(v)
                } else {
                    format!("{}*sqrt({k})", format_rational(v))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Splits `k = s² · f` with `f` squarefree; returns `(s, f)`.
pub fn squarefree_split(mut k: u64) -> (u64, u64) {
    let mut square = 1u64;
    let mut free = 1u64;
    let mut p = 2u64;
    while p * p <= k {
        let mut e = 0;
        while k.is_multiple_of(p) {
            k /= p;
            e += 1;
        }
        square *= p.pow(e / 2);
        if e % 2 == 1 {
            free *= p;
        }
        p += 1;
    }
    free *= k;
    (square, free)
}
