//! Gamma-family and hypergeometric evaluations.
//!
//! Only positive arguments ever reach [`log_gamma`]. Quantities such as
//! `Γ(d)` with `−1 < d < 0` are obtained by shifting the argument upward with
//! `Γ(x + 1) = x Γ(x)` and carrying the sign separately in a
//! [`SignedLogValue`].

use std::ops::{Div, Mul};

use crate::error::{domain, invalid, Result};
use crate::scalar::{CompensatedSum, Real};

/// A real number stored as `sign · exp(log_magnitude)`.
///
/// `sign == 0` encodes an exact zero; `log_magnitude` is then ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogValue<T> {
    pub log_magnitude: T,
    pub sign: i8,
}

impl<T: Real> SignedLogValue<T> {
    pub fn zero() -> Self {
        Self {
            log_magnitude: T::neg_infinity(),
            sign: 0,
        }
    }

    pub fn one() -> Self {
        Self {
            log_magnitude: T::zero(),
            sign: 1,
        }
    }

    pub fn from_value(x: T) -> Self {
        if x == T::zero() {
            Self::zero()
        } else {
            Self {
                log_magnitude: x.abs().ln(),
                sign: if x > T::zero() { 1 } else { -1 },
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn value(&self) -> T {
        match self.sign {
            0 => T::zero(),
            1 => self.log_magnitude.exp(),
            _ => -self.log_magnitude.exp(),
        }
    }

    pub fn recip(self) -> Result<Self> {
        if self.is_zero() {
            return Err(domain("reciprocal of zero"));
        }
        Ok(Self {
            log_magnitude: -self.log_magnitude,
            sign: self.sign,
        })
    }
}

impl<T: Real> Mul for SignedLogValue<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        Self {
            log_magnitude: self.log_magnitude + rhs.log_magnitude,
            sign: self.sign * rhs.sign,
        }
    }
}

/// Division by an exact zero yields an infinite magnitude; callers that can
/// meet a zero divisor use [`SignedLogValue::recip`] instead.
impl<T: Real> Div for SignedLogValue<T> {
    type Output = Self;

    fn div(self, rhs: Self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            log_magnitude: self.log_magnitude - rhs.log_magnitude,
            sign: self.sign * if rhs.sign == 0 { 1 } else { rhs.sign },
        }
    }
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of `Γ(x)` for `x > 0`.
pub fn log_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(format!("log_gamma requires x > 0, got {x}")));
    }
    if x == T::one() || x == T::lit(2.0) {
        return Ok(T::zero());
    }
    if x < T::lit(0.5) {
        // ln Γ(x) = ln Γ(x + 1) − ln x keeps the argument positive.
        return Ok(lanczos_ln_gamma(x + T::one()) - x.ln());
    }
    Ok(lanczos_ln_gamma(x))
}

fn lanczos_ln_gamma<T: Real>(x: T) -> T {
    let xm1 = x - T::one();
    let mut series = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series = series + T::lit(c) / (xm1 + T::from_count(i));
    }
    let half = T::lit(0.5);
    let t = xm1 + T::lit(LANCZOS_G) + half;
    let half_ln_two_pi = T::lit(0.918_938_533_204_672_7);
    half_ln_two_pi + (xm1 + half) * t.ln() - t + series.ln()
}

/// `Γ(x)` for `x > 0`.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    log_gamma(x).map(T::exp)
}

/// `Γ(x)` for any real `x` that is not a pole, as a signed logarithm.
///
/// Non-positive arguments are shifted up with `Γ(x) = Γ(x + n) / (x (x+1) ⋯ (x+n−1))`.
pub fn gamma_signed<T: Real>(x: T) -> Result<SignedLogValue<T>> {
    if !x.is_finite() {
        return Err(domain(format!("gamma of non-finite {x}")));
    }
    if x <= T::zero() && x == x.floor() {
        return Err(domain(format!("gamma pole at {x}")));
    }
    let mut shifted = x;
    let mut denom = SignedLogValue::one();
    while shifted <= T::zero() {
        denom = denom * SignedLogValue::from_value(shifted);
        shifted = shifted + T::one();
    }
    let num = SignedLogValue {
        log_magnitude: log_gamma(shifted)?,
        sign: 1,
    };
    Ok(num / denom)
}

/// `1 / Γ(x)`, which is zero at the poles.
pub fn reciprocal_gamma_signed<T: Real>(x: T) -> Result<SignedLogValue<T>> {
    if x <= T::zero() && x == x.floor() {
        return Ok(SignedLogValue::zero());
    }
    gamma_signed(x)?.recip()
}

/// Gauss's summation `₂F₁(a, b; c; 1) = Γ(c) Γ(c−a−b) / (Γ(c−a) Γ(c−b))`.
pub fn gauss_2f1_at_one<T: Real>(a: T, b: T, c: T) -> Result<T> {
    let excess = c - a - b;
    if !(excess > T::zero()) {
        return Err(domain(format!(
            "2F1 at z = 1 diverges unless c − a − b > 0 (got {excess})"
        )));
    }
    if c <= T::zero() && c == c.floor() {
        return Err(domain(format!("c = {c} is a non-positive integer")));
    }
    let value = gamma_signed(c)?
        * gamma_signed(excess)?
        * reciprocal_gamma_signed(c - a)?
        * reciprocal_gamma_signed(c - b)?;
    Ok(value.value())
}

/// Partial sum `Σ_{n<terms} (a)_n (b)_n / ((c)_n n!) zⁿ` of the hypergeometric series.
pub fn hypergeometric_partial_sum<T: Real>(a: T, b: T, c: T, z: T, terms: usize) -> Result<T> {
    if c <= T::zero() && c == c.floor() {
        return Err(domain(format!("c = {c} is a non-positive integer")));
    }
    if terms == 0 {
        return Err(invalid("hypergeometric partial sum needs at least one term"));
    }
    if !(z >= T::zero() && z <= T::one()) {
        return Err(domain(format!("z = {z} outside [0, 1]")));
    }
    let mut acc = CompensatedSum::new();
    let mut term = T::one();
    acc.add(term);
    for n in 1..terms {
        let k = T::from_count(n - 1);
        term = term * (a + k) * (b + k) / ((c + k) * T::from_count(n)) * z;
        if term == T::zero() {
            break;
        }
        acc.add(term);
    }
    Ok(acc.value())
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1.0)
    }

    #[test]
    fn log_gamma_reference_points() {
        // 30-digit reference values.
        let table: [(f64, f64); 10] = [
            (0.001, 6.907_178_885_383_853_7),
            (0.1, 2.252_712_651_734_206),
            (0.5, 0.572_364_942_924_700_1),
            (0.999, 5.780_385_328_913_797e-4),
            (1.5, -0.120_782_237_635_245_22),
            (2.5, 0.284_682_870_472_919_16),
            (3.7, 1.428_072_326_665_388),
            (10.0, 12.801_827_480_081_47),
            (100.5, 361.435_540_467_777_6),
            (1000.0, 5_905.220_423_209_181),
        ];
        for (x, want) in table {
            let got = log_gamma(x).unwrap();
            let rel = ((got - want) / want).abs();
            assert!(rel < 1e-12, "lnΓ({x}) = {got}, want {want}, rel {rel:e}");
        }
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!((log_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_gamma_half_matches_gamma_integral() {
        // Γ(1/2) = ∫₀^∞ t^{−1/2} e^{−t} dt = 2 ∫₀^∞ e^{−u²} du, Simpson on [0, 10].
        let n = 20_000;
        let h = 10.0 / n as f64;
        let f = |u: f64| (-u * u).exp();
        let mut s = f(0.0) + f(10.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        let gamma_half = 2.0 * s * h / 3.0;
        assert!((log_gamma(0.5).unwrap() - gamma_half.ln()).abs() < 1e-12);
    }

    #[test]
    fn log_gamma_rejects_non_positive() {
        assert!(log_gamma(0.0f64).is_err());
        assert!(log_gamma(-1.5f64).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn log_gamma_works_in_single_precision() {
        let got = log_gamma(0.5f32).unwrap();
        assert!((got - 0.572_364_9).abs() < 1e-5);
    }

    #[test]
    fn signed_gamma_negative_arguments() {
        // Γ(−0.5) = −2√π, Γ(−1.5) = 4√π/3.
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let g = gamma_signed(-0.5).unwrap();
        assert_eq!(g.sign, -1);
        assert!((g.value() + 2.0 * sqrt_pi).abs() < 1e-13);
        let g = gamma_signed(-1.5).unwrap();
        assert_eq!(g.sign, 1);
        assert!((g.value() - 4.0 * sqrt_pi / 3.0).abs() < 1e-13);
        assert!(gamma_signed(-2.0).is_err());
        assert!(gamma_signed(0.0).is_err());
    }

    #[test]
    fn signed_log_value_algebra() {
        let a = SignedLogValue::from_value(-3.0f64);
        let b = SignedLogValue::from_value(0.5f64);
        assert!(((a * b).value() + 1.5).abs() < 1e-15);
        assert!(((a / b).value() + 6.0).abs() < 1e-14);
        assert!((a * SignedLogValue::zero()).is_zero());
        assert!(SignedLogValue::<f64>::zero().recip().is_err());
    }

    #[test]
    fn gauss_sum_examples() {
        assert_eq!(gauss_2f1_at_one(0.0, 0.0, 1.0).unwrap(), 1.0);
        let v = gauss_2f1_at_one(-0.3f64, 0.7, 2.0).unwrap();
        assert!((v - 0.853_332_154_904_803_2).abs() < 1e-13, "{v}");
        let v = gauss_2f1_at_one(0.5, 0.5, 2.0).unwrap();
        assert!((v - 4.0 / std::f64::consts::PI).abs() < 1e-13);
        // a non-positive integer c − a kills the sum: F(−1, b; c; 1) = 1 − b/c.
        let v = gauss_2f1_at_one(-1.0f64, 0.5, 2.0).unwrap();
        assert!((v - 0.75).abs() < 1e-13);
    }

    #[test]
    fn gauss_sum_domain_errors() {
        assert!(gauss_2f1_at_one(0.5, 0.5, 1.0).is_err());
        assert!(gauss_2f1_at_one(-2.0, -1.0, -1.0).is_err());
    }

    #[test]
    fn partial_sum_examples() {
        let geom = hypergeometric_partial_sum(1.0f64, 1.0, 1.0, 0.5, 50).unwrap();
        assert!((geom - 2.0).abs() < 1e-14);
        assert_eq!(hypergeometric_partial_sum(0.0, 0.3, 1.7, 1.0, 100).unwrap(), 1.0);
        let s = hypergeometric_partial_sum(-0.3f64, 0.7, 2.0, 1.0, 1_000_000).unwrap();
        assert!((s - gauss_2f1_at_one(-0.3, 0.7, 2.0).unwrap()).abs() < 1e-6);
        assert!(hypergeometric_partial_sum(1.0, 1.0, 0.0, 0.5, 5).is_err());
        assert!(hypergeometric_partial_sum(1.0, 1.0, 1.0, 0.5, 0).is_err());
    }

    #[test]
    fn partial_sums_converge_to_gauss_on_random_triples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..20 {
            let a: f64 = rng.random_range(-0.9..0.9);
            let b: f64 = rng.random_range(-0.9..0.9);
            let c: f64 = a + b + rng.random_range(0.8..2.5);
            if c <= 0.0 {
                continue;
            }
            let exact = gauss_2f1_at_one(a, b, c).unwrap();
            let e1 = (hypergeometric_partial_sum(a, b, c, 1.0, 100_000).unwrap() - exact).abs();
            let e2 = (hypergeometric_partial_sum(a, b, c, 1.0, 1_000_000).unwrap() - exact).abs();
            assert!(e2 < 1e-6, "({a}, {b}, {c}): error {e2:e}");
            assert!(e2 <= e1 + 1e-15, "error grew from {e1:e} to {e2:e}");
        }
    }

    proptest! {
        #[test]
        fn log_gamma_recursion(x in 1e-3f64..100.0) {
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + x.ln();
            prop_assert!(close(lhs, rhs, 1e-12), "x = {x}: {lhs} vs {rhs}");
        }
    }
}
