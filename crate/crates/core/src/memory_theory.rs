//! Theoretical memory class of `K(X_n)` from the memory of `X` and the power
//! rank `k` of `K`.
//!
//! Everything here is written over [`Field`] so that it can be run in exact
//! rational arithmetic: the class boundaries are equalities such as
//! `k(1 − 2d) = 1` that floating point cannot decide.

use std::fmt;

use crate::error::{invalid, Result};
use crate::scalar::{field_count, field_half, Field};

#[derive(Debug, Clone, PartialEq)]
pub enum MemoryLabel<T> {
    LongMemoryCov,
    ShortMemoryCov,
    /// Long memory with parameter `d̃`.
    Lm(T),
    /// Short memory in the spectral sense.
    Lm0,
    /// `k(2β − 1) = 1` without a constant slowly varying part: undecided.
    BoundaryLong,
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryClass<T> {
    pub label: MemoryLabel<T>,
    /// The condition that produced the label.
    pub rule: &'static str,
}

impl<T> MemoryClass<T> {
    fn new(label: MemoryLabel<T>, rule: &'static str) -> Self {
        Self { label, rule }
    }

    pub fn memory_parameter(&self) -> Option<&T> {
        match &self.label {
            MemoryLabel::Lm(d) => Some(d),
            _ => None,
        }
    }

    /// Memory parameter implied by the label: `d̃` for `LM(d̃)`, 0 for `LM(0)`.
    pub fn theory_value(&self) -> Option<T>
    where
        T: Field,
    {
        match &self.label {
            MemoryLabel::Lm(d) => Some(d.clone()),
            MemoryLabel::Lm0 => Some(T::zero()),
            _ => None,
        }
    }

    /// Render with a caller-supplied number format.
    pub fn render(&self, num: impl Fn(&T) -> String) -> String {
        match &self.label {
            MemoryLabel::LongMemoryCov => "long-memory(cov)".into(),
            MemoryLabel::ShortMemoryCov => "short-memory(cov)".into(),
            MemoryLabel::Lm(d) => format!("LM({})", num(d)),
            MemoryLabel::Lm0 => "LM(0)".into(),
            MemoryLabel::BoundaryLong => "boundary".into(),
            MemoryLabel::OutOfScope => "out-of-scope".into(),
        }
    }
}

impl<T: fmt::Display> fmt::Display for MemoryClass<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(|d| d.to_string()))
    }
}

fn check_rank(k: u32) -> Result<()> {
    if k == 0 {
        return Err(invalid("power rank must be at least 1"));
    }
    Ok(())
}

/// Covariance-sense class for `γ_X(h) ~ h^{1−2β} L(h)`, `1/2 < β < 1`.
pub fn classify_covariance<T: Field>(beta: T, k: u32, l_const: bool) -> Result<MemoryClass<T>> {
    check_rank(k)?;
    let one = T::one();
    if !(beta > field_half::<T>() && beta < one) {
        return Err(invalid(format!("β must lie in (1/2, 1), got {beta}")));
    }
    let x = field_count::<T>(k as u64) * (beta.clone() + beta - one.clone());
    Ok(if x < one {
        MemoryClass::new(MemoryLabel::LongMemoryCov, "k(2β − 1) < 1")
    } else if x > one {
        MemoryClass::new(MemoryLabel::ShortMemoryCov, "k(2β − 1) > 1")
    } else if l_const {
        MemoryClass::new(MemoryLabel::LongMemoryCov, "k(2β − 1) = 1 with constant L")
    } else {
        MemoryClass::new(MemoryLabel::BoundaryLong, "k(2β − 1) = 1 with non-constant L")
    })
}

/// Spectral class of `K(X)` for `X` long-memory with `0 < d < 1/2`.
pub fn classify_spectral<T: Field>(d: T, k: u32) -> Result<MemoryClass<T>> {
    check_rank(k)?;
    let half = field_half::<T>();
    if !(d > T::zero() && d < half) {
        return Err(invalid(format!("d must lie in (0, 1/2), got {d}")));
    }
    let one = T::one();
    let gap = one.clone() - d.clone() - d.clone();
    let kk = field_count::<T>(k as u64);
    let x = kk.clone() * gap.clone();
    Ok(if x < one {
        MemoryClass::new(
            MemoryLabel::Lm((d - half.clone()) * kk + half),
            "k(1 − 2d) < 1: d̃ = (d − 1/2)k + 1/2",
        )
    } else if x > one && field_count::<T>(k as u64 - 1) * gap < one {
        MemoryClass::new(MemoryLabel::Lm0, "k(1 − 2d) > 1 > (k − 1)(1 − 2d)")
    } else {
        MemoryClass::new(MemoryLabel::OutOfScope, "k(1 − 2d) = 1 or (k − 1)(1 − 2d) ≥ 1")
    })
}

/// `X²` for an antipersistent FARIMA(0, d, 0), `−1 < d < 0`.
pub fn classify_square_antipersistent<T: Field>(d: T) -> Result<MemoryClass<T>> {
    let one = T::one();
    if !(d > -one && d < T::zero()) {
        return Err(invalid(format!("d must lie in (−1, 0), got {d}")));
    }
    Ok(MemoryClass::new(MemoryLabel::Lm0, "square of an antipersistent fractional process"))
}

/// `X²` for a Type-I process, `1/2 < d < 1`: asymptotically `LM(d)` whatever the rank.
pub fn classify_type1_square<T: Field>(d: T) -> Result<MemoryClass<T>> {
    if !(d > field_half::<T>() && d < T::one()) {
        return Err(invalid(format!("d must lie in (1/2, 1), got {d}")));
    }
    Ok(MemoryClass::new(MemoryLabel::Lm(d), "square of a Type-I partial-sum process"))
}
