//! Pointwise transforms `K(·)` and their compact string form.
//!
//! Grammar: `pow:2`, `poly:0,-3,0,1` (ascending coefficients), `sin`, `exp`,
//! `ind:0.1` (`x ≤ c`), `call:45.5`, `put:45.5`, and the mean-relative
//! payoffs `callm:1.8`, `putm:-2.2` whose strike is the series mean plus the
//! offset.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};
use crate::series::Series;

#[derive(Debug, Clone, PartialEq)]
pub enum Transform<T> {
    /// `Σ c_k x^k`, coefficients in ascending order.
    Polynomial(Vec<T>),
    Sin,
    Exp,
    /// `1{x ≤ c}`.
    Indicator(T),
    /// `(x − C)⁺`.
    Call(T),
    /// `(C − x)⁺`.
    Put(T),
    /// `(x − (x̄ + δ))⁺` with `x̄` the mean of the series being transformed.
    CallFromMean(T),
    /// `((x̄ + δ) − x)⁺`.
    PutFromMean(T),
}

impl<T: Real> Transform<T> {
    pub fn identity() -> Self {
        Transform::Polynomial(vec![T::zero(), T::one()])
    }

    pub fn power(k: usize) -> Self {
        let mut c = vec![T::zero(); k + 1];
        c[k] = T::one();
        Transform::Polynomial(c)
    }

    pub fn polynomial(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("polynomial needs at least one coefficient".into()));
        }
        Ok(Transform::Polynomial(coeffs))
    }

    /// `x³ − 3x`.
    pub fn cubic_hermite() -> Self {
        Transform::Polynomial(vec![T::zero(), T::lit(-3.0), T::zero(), T::one()])
    }

    /// `x⁴ − 6x²`.
    pub fn quartic_centered() -> Self {
        Transform::Polynomial(vec![T::zero(), T::zero(), T::lit(-6.0), T::zero(), T::one()])
    }

    /// The nine transforms of the main simulation grid.
    pub fn catalog() -> Vec<Self> {
        vec![
            Self::identity(),
            Self::power(2),
            Self::power(3),
            Self::power(4),
            Self::cubic_hermite(),
            Self::quartic_centered(),
            Transform::Sin,
            Transform::Exp,
            Transform::Indicator(T::lit(0.1)),
        ]
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Transform::Polynomial(c)
            if c.len() >= 2 && c[0] == T::zero() && c[1] == T::one()
                && c[2..].iter().all(|v| *v == T::zero()))
    }

    /// Degree of a polynomial transform after dropping trailing zeros.
    pub fn degree(&self) -> Option<usize> {
        match self {
            Transform::Polynomial(c) => Some(c.iter().rposition(|v| *v != T::zero()).unwrap_or(0)),
            _ => None,
        }
    }

    pub fn is_payoff(&self) -> bool {
        matches!(
            self,
            Transform::Call(_) | Transform::Put(_) | Transform::CallFromMean(_) | Transform::PutFromMean(_)
        )
    }

    /// Replace a mean-relative strike with an absolute one.
    pub fn resolve(&self, mean: T) -> Self {
        match *self {
            Transform::CallFromMean(off) => Transform::Call(mean + off),
            Transform::PutFromMean(off) => Transform::Put(mean + off),
            _ => self.clone(),
        }
    }

    /// `K(x)`. Mean-relative payoffs are evaluated with a zero mean here; use
    /// [`Transform::resolve`] or [`apply`] to supply one.
    #[inline]
    pub fn eval(&self, x: T) -> T {
        match self {
            Transform::Polynomial(c) => c.iter().rev().fold(T::zero(), |acc, &ck| acc * x + ck),
            Transform::Sin => x.sin(),
            Transform::Exp => x.exp(),
            Transform::Indicator(c) => {
                if x <= *c {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Transform::Call(k) | Transform::CallFromMean(k) => (x - *k).max(T::zero()),
            Transform::Put(k) | Transform::PutFromMean(k) => (*k - x).max(T::zero()),
        }
    }

    pub fn map(&self, xs: &[T]) -> Vec<T> {
        let resolved = self.resolve(sample_mean(xs));
        xs.iter().map(|&x| resolved.eval(x)).collect()
    }
}

fn sample_mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let s: CompensatedSum<T> = xs.iter().copied().collect();
    s.value() / T::from_count(xs.len())
}

/// Pointwise `K(x_t)`; the transform's string form is appended to the metadata.
pub fn apply<T: Real>(t: &Transform<T>, s: &Series<T>) -> Series<T> {
    let mut meta = s.meta.clone();
    meta.transforms.push(t.to_string());
    Series {
        values: t.map(&s.values),
        meta,
    }
}

impl<T: Real> fmt::Display for Transform<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Polynomial(c) => {
                let d = self.degree().unwrap_or(0);
                let monomial = d > 0 && c[..d].iter().all(|v| *v == T::zero()) && c[d] == T::one();
                if monomial {
                    write!(f, "pow:{d}")
                } else {
                    let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                    write!(f, "poly:{}", parts.join(","))
                }
            }
            Transform::Sin => f.write_str("sin"),
            Transform::Exp => f.write_str("exp"),
            Transform::Indicator(c) => write!(f, "ind:{c}"),
            Transform::Call(k) => write!(f, "call:{k}"),
            Transform::Put(k) => write!(f, "put:{k}"),
            Transform::CallFromMean(k) => write!(f, "callm:{k}"),
            Transform::PutFromMean(k) => write!(f, "putm:{k}"),
        }
    }
}

fn parse_number<T: Real>(raw: &str, whole: &str) -> Result<T> {
    let cleaned = raw.trim().replace('\u{2212}', "-");
    let v: f64 = cleaned
        .parse()
        .map_err(|_| Error::Parse(format!("bad number {raw:?} in transform {whole:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite number in transform {whole:?}")));
    }
    Ok(T::lit(v))
}

impl<T: Real> FromStr for Transform<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a)),
            None => (s, None),
        };
        let need = |what: &str| Error::Parse(format!("transform {s:?} needs {what}"));
        match (head.to_ascii_lowercase().as_str(), arg) {
            ("sin", None) => Ok(Transform::Sin),
            ("exp", None) => Ok(Transform::Exp),
            ("id" | "identity", None) => Ok(Self::identity()),
            ("pow", Some(a)) => {
                let k: usize = a
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad power in transform {s:?}")))?;
                if k == 0 {
                    return Err(Error::Parse(format!("power must be positive in {s:?}")));
                }
                Ok(Self::power(k))
            }
            ("poly", Some(a)) => {
                let coeffs = a
                    .split(',')
                    .map(|c| parse_number(c, s))
                    .collect::<Result<Vec<T>>>()?;
                Self::polynomial(coeffs)
            }
            ("ind", Some(a)) => Ok(Transform::Indicator(parse_number(a, s)?)),
            ("call", Some(a)) => Ok(Transform::Call(parse_number(a, s)?)),
            ("put", Some(a)) => Ok(Transform::Put(parse_number(a, s)?)),
            ("callm", Some(a)) => Ok(Transform::CallFromMean(parse_number(a, s)?)),
            ("putm", Some(a)) => Ok(Transform::PutFromMean(parse_number(a, s)?)),
            ("pow" | "poly", None) => Err(need("coefficients")),
            ("ind" | "call" | "put" | "callm" | "putm", None) => Err(need("a threshold")),
            _ => Err(Error::Parse(format!("unknown transform {s:?}"))),
        }
    }
}
