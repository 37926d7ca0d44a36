//! Finite probability mass functions on consecutive integers.
//!
//! Masses are generic over [`Scalar`] so the same code runs in `f64` for
//! speed and in exact [`Rational`] arithmetic for identity checks.

use std::fmt::{Debug, Display, Write as _};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Number type used for probabilities.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + for<'a> std::ops::AddAssign<&'a Self>
    + 'static
{
    fn ratio(num: u64, den: u64) -> Self;

    fn int(n: u64) -> Self {
        Self::ratio(n, 1)
    }

    fn to_f64(&self) -> f64;

    fn abs_diff(&self, other: &Self) -> Self {
        if self >= other {
            self.clone() - other.clone()
        } else {
            other.clone() - self.clone()
        }
    }

    fn to_json(&self) -> serde_json::Value;

    /// Whether results in this type are exact.
    const EXACT: bool;
}

impl Scalar for f64 {
    #[inline]
    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(*self)
    }

    const EXACT: bool = false;
}

impl Scalar for Rational {
    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }

    const EXACT: bool = true;
}

/// A law on `offset, offset + 1, ..., offset + len - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPmf<T = f64> {
    offset: i64,
    mass: Vec<T>,
}

impl<T: Scalar> ExactPmf<T> {
    /// Builds a pmf, checking nonnegativity and that the total is one
    /// (exactly for rational masses, within `1e-12` otherwise).
    pub fn new(offset: i64, mass: Vec<T>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::Domain("pmf needs at least one support point".into()));
        }
        if mass.iter().any(|m| *m < T::zero()) {
            return Err(Error::Domain("negative mass".into()));
        }
        let p = Self { offset, mass };
        let total = p.total();
        let ok = if T::EXACT {
            total == T::one()
        } else {
            (total.to_f64() - 1.0).abs() <= 1e-12
        };
        if !ok {
            return Err(Error::Domain(format!("masses sum to {total}, not 1")));
        }
        Ok(p)
    }

    pub(crate) fn from_raw(offset: i64, mass: Vec<T>) -> Self {
        Self { offset, mass }
    }

    pub fn point(x: i64) -> Self {
        Self {
            offset: x,
            mass: vec![T::one()],
        }
    }

    /// Normalizes nonnegative weights into a pmf.
    pub fn from_weights(offset: i64, weights: Vec<T>) -> Result<Self> {
        let total = weights.iter().fold(T::zero(), |a, w| a + w.clone());
        if total <= T::zero() {
            return Err(Error::Domain("weights have no positive mass".into()));
        }
        let mass = weights.into_iter().map(|w| w / total.clone()).collect();
        Ok(Self::from_raw(offset, mass).trimmed())
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn masses(&self) -> &[T] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn min_support(&self) -> i64 {
        self.offset
    }

    pub fn max_support(&self) -> i64 {
        self.offset + self.mass.len() as i64 - 1
    }

    /// `P[X = x]`, zero outside the stored range.
    pub fn get(&self, x: i64) -> T {
        if x < self.offset {
            return T::zero();
        }
        self.mass
            .get((x - self.offset) as usize)
            .cloned()
            .unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &T)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .map(move |(i, m)| (self.offset + i as i64, m))
    }

    pub fn total(&self) -> T {
        self.mass.iter().fold(T::zero(), |a, m| a + m.clone())
    }

    /// `P[X <= x]`.
    pub fn cdf(&self, x: i64) -> T {
        self.iter()
            .take_while(|(s, _)| *s <= x)
            .fold(T::zero(), |a, (_, m)| a + m.clone())
    }

    /// `E g(X)`.
    pub fn expect<F: Fn(i64) -> T>(&self, g: F) -> T {
        self.iter()
            .fold(T::zero(), |a, (x, m)| a + m.clone() * g(x))
    }

    /// `E X^m`.
    pub fn moment(&self, m: u32) -> T {
        self.expect(|x| pow_int::<T>(x, m))
    }

    /// `E X (X+1) ... (X+m-1)`.
    pub fn rising_moment(&self, m: u32) -> T {
        self.expect(|x| rising::<T>(x, m))
    }

    /// Law of `X + d`.
    pub fn shifted(&self, d: i64) -> Self {
        Self {
            offset: self.offset + d,
            mass: self.mass.clone(),
        }
    }

    /// Drops zero masses at both ends.
    pub fn trimmed(mut self) -> Self {
        let lead = self.mass.iter().take_while(|m| m.is_zero()).count();
        if lead == self.mass.len() {
            return self;
        }
        let tail = self.mass.iter().rev().take_while(|m| m.is_zero()).count();
        self.mass.truncate(self.mass.len() - tail);
        self.mass.drain(..lead);
        self.offset += lead as i64;
        self
    }

    /// `sup_x |p(x) - q(x)|` over the union of supports.
    pub fn sup_diff(&self, other: &Self) -> T {
        let lo = self.min_support().min(other.min_support());
        let hi = self.max_support().max(other.max_support());
        let mut best = T::zero();
        for x in lo..=hi {
            let d = self.get(x).abs_diff(&other.get(x));
            if d > best {
                best = d;
            }
        }
        best
    }

    /// Total variation distance `(1/2) Σ |p(x) - q(x)|`.
    pub fn tv(&self, other: &Self) -> T {
        let lo = self.min_support().min(other.min_support());
        let hi = self.max_support().max(other.max_support());
        let mut s = T::zero();
        for x in lo..=hi {
            s += &self.get(x).abs_diff(&other.get(x));
        }
        s / T::int(2)
    }

    /// `Σ w_i p_i` for weights summing to one.
    pub fn mixture<I>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, Self)>,
    {
        let parts: Vec<(T, Self)> = parts.into_iter().filter(|(w, _)| !w.is_zero()).collect();
        if parts.is_empty() {
            return Err(Error::Domain("empty mixture".into()));
        }
        let lo = parts.iter().map(|(_, p)| p.min_support()).min().unwrap();
        let hi = parts.iter().map(|(_, p)| p.max_support()).max().unwrap();
        let mut mass = vec![T::zero(); (hi - lo + 1) as usize];
        for (w, p) in &parts {
            for (x, m) in p.iter() {
                mass[(x - lo) as usize] += &(w.clone() * m.clone());
            }
        }
        Ok(Self::from_raw(lo, mass).trimmed())
    }

    /// Law of `X` given `X >= 1`.
    pub fn condition_positive(&self) -> Result<Self> {
        let kept: Vec<T> = (1.max(self.min_support())..=self.max_support())
            .map(|x| self.get(x))
            .collect();
        if kept.is_empty() {
            return Err(Error::Domain("no positive support".into()));
        }
        Self::from_weights(1.max(self.min_support()), kept)
    }

    pub fn to_f64(&self) -> ExactPmf<f64> {
        ExactPmf {
            offset: self.offset,
            mass: self.mass.iter().map(|m| m.to_f64()).collect(),
        }
    }

    /// `{"offset": int, "mass": [...]}`; rational masses are `"p/q"` strings.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "offset": self.offset,
            "mass": self.mass.iter().map(|m| m.to_json()).collect::<Vec<_>>(),
        })
    }

    /// Two columns `support,mass` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("support,mass\n");
        for (x, m) in self.iter() {
            let _ = writeln!(out, "{x},{m}");
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct PmfRecord {
    offset: i64,
    mass: Vec<f64>,
}

impl ExactPmf<f64> {
    pub fn from_json(text: &str) -> Result<Self> {
        let rec: PmfRecord = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(rec.offset, rec.mass)
    }

    /// CDF and its left limit at `x`: `(P[X < x], P[X <= x])`, as floats.
    pub fn cdf_pair(&self, x: i64) -> (f64, f64) {
        let below = self.cdf(x - 1);
        (below, below + self.get(x))
    }
}

/// Inverse-CDF sampler for a finite pmf (or nonnegative weights).
#[derive(Clone, Debug)]
pub struct DiscreteSampler {
    offset: i64,
    cum: Vec<f64>,
}

impl DiscreteSampler {
    pub fn new(offset: i64, weights: &[f64]) -> Result<Self> {
        let mut cum = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in weights {
            if !(w >= 0.0) {
                return Err(Error::Domain("negative or NaN weight".into()));
            }
            acc += w;
            cum.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::Domain("weights have no positive mass".into()));
        }
        Ok(Self { offset, cum })
    }

    pub fn from_pmf<T: Scalar>(p: &ExactPmf<T>) -> Result<Self> {
        let w: Vec<f64> = p.masses().iter().map(|m| m.to_f64()).collect();
        Self::new(p.offset(), &w)
    }

    /// Maps a uniform `u` in `[0, 1)` to a support point.
    pub fn quantile(&self, u: f64) -> i64 {
        let target = u * self.cum[self.cum.len() - 1];
        let i = self.cum.partition_point(|&c| c <= target);
        let i = i.min(self.cum.len() - 1);
        self.offset + i as i64
    }

    pub fn sample(&self, rng: &mut crate::rng::StreamRng) -> i64 {
        self.quantile(rng.uniform())
    }
}

pub(crate) fn pow_int<T: Scalar>(x: i64, m: u32) -> T {
    let v = signed::<T>(x);
    (0..m).fold(T::one(), |a, _| a * v.clone())
}

pub(crate) fn rising<T: Scalar>(x: i64, m: u32) -> T {
    (0..m as i64).fold(T::one(), |a, j| a * signed::<T>(x + j))
}

pub(crate) fn signed<T: Scalar>(x: i64) -> T {
    if x >= 0 {
        T::int(x as u64)
    } else {
        T::zero() - T::int(x.unsigned_abs())
    }
}
