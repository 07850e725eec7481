//! Scalar abstractions.
//!
//! Floating-point numerics (special functions, simulation, spectral estimation)
//! are written against [`Real`], which covers `f32` and `f64`. Pure algebra that
//! must also run exactly (memory classification, elementary symmetric
//! polynomials) is written against [`Field`], which additionally admits
//! `num_rational` ratios.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, NumOps, One, ToPrimitive, Zero};
use rustfft::FftNum;

/// Floating-point scalar used by every numerical routine in the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(k: usize) -> Self {
        Self::from_usize(k).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field: enough structure for exact rational evaluation.
pub trait Field: Clone + PartialOrd + Debug + Display + Zero + One + NumOps + Neg<Output = Self> {}

impl<T> Field for T where T: Clone + PartialOrd + Debug + Display + Zero + One + NumOps + Neg<Output = T> {}

/// The integer `k` embedded in a field, built by binary doubling.
pub fn field_count<T: Field>(mut k: u64) -> T {
    let mut acc = T::zero();
    let mut unit = T::one();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc + unit.clone();
        }
        unit = unit.clone() + unit;
        k >>= 1;
    }
    acc
}

pub fn field_half<T: Field>() -> T {
    T::one() / (T::one() + T::one())
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Pairwise (cascade) summation; order-fixed, so results are reproducible.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().fold(T::zero(), |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and sample standard deviation (denominator `len − 1`).
pub fn mean_and_sd<T: Real>(xs: &[T]) -> (T, T) {
    if xs.is_empty() {
        return (T::nan(), T::nan());
    }
    let n = T::from_count(xs.len());
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, T::nan());
    }
    let dev: Vec<T> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - T::one());
    (mean, var.sqrt())
}

/// Exact rational from a decimal literal (`-0.45`, `3`, `.5`) or a fraction (`9/20`).
pub fn parse_decimal_ratio(text: &str) -> Option<Ratio<i64>> {
    let t = text.trim().replace('\u{2212}', "-");
    if let Some((n, d)) = t.split_once('/') {
        let (n, d): (i64, i64) = (n.trim().parse().ok()?, d.trim().parse().ok()?);
        return (d != 0).then(|| Ratio::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(&t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        || frac.len() > 17
    {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let den = 10i64.checked_pow(frac.len() as u32)?;
    let r = Ratio::new(num, den);
    Some(if neg { -r } else { r })
}

/// Decimal rendering of a rational: exact when the reduced denominator has
/// only the factors 2 and 5, otherwise rounded to 12 significant digits.
pub fn format_ratio_decimal(r: &Ratio<i64>) -> String {
    let mut den = *r.denom();
    for p in [2, 5] {
        while den % p == 0 {
            den /= p;
        }
    }
    if den != 1 {
        let v = *r.numer() as f64 / *r.denom() as f64;
        return format!("{}", format!("{v:.11e}").parse::<f64>().unwrap_or(v));
    }
    let (mut num, den) = (r.numer().unsigned_abs() as u128, *r.denom() as u128);
    let mut out = String::new();
    if *r.numer() < 0 {
        out.push('-');
    }
    out.push_str(&(num / den).to_string());
    num %= den;
    if num != 0 {
        out.push('.');
        while num != 0 {
            num *= 10;
            out.push(char::from(b'0' + (num / den) as u8));
            num %= den;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_count_matches_integers() {
        assert_eq!(field_count::<Ratio<i64>>(0), Ratio::from_integer(0));
        assert_eq!(field_count::<Ratio<i64>>(13), Ratio::from_integer(13));
        assert_eq!(field_count::<f64>(1000), 1000.0);
        assert_eq!(field_half::<Ratio<i64>>(), Ratio::new(1, 2));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::<f64>::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-12).abs() < 1e-20);
    }

    #[test]
    fn mean_sd_small_sample() {
        let (m, s) = mean_and_sd(&[1.0f64, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn decimal_ratios() {
        assert_eq!(parse_decimal_ratio("0.4"), Some(Ratio::new(2, 5)));
        assert_eq!(parse_decimal_ratio("-0.45"), Some(Ratio::new(-9, 20)));
        assert_eq!(parse_decimal_ratio("\u{2212}0.8"), Some(Ratio::new(-4, 5)));
        assert_eq!(parse_decimal_ratio("3/7"), Some(Ratio::new(3, 7)));
        assert_eq!(parse_decimal_ratio(".5"), Some(Ratio::new(1, 2)));
        for bad in ["", ".", "1e3", "abc", "1/0", "0.1.2"] {
            assert_eq!(parse_decimal_ratio(bad), None, "{bad}");
        }
        assert_eq!(format_ratio_decimal(&Ratio::new(3, 10)), "0.3");
        assert_eq!(format_ratio_decimal(&Ratio::new(-1, 8)), "-0.125");
        assert_eq!(format_ratio_decimal(&Ratio::new(7, 1)), "7");
        assert_eq!(format_ratio_decimal(&Ratio::new(0, 1)), "0");
        assert_eq!(format_ratio_decimal(&Ratio::new(1, 3)), "0.333333333333");
    }
}
