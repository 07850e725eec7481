//! Periodogram and the log-periodogram (GPH) memory estimator.

use std::f64::consts::PI;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::scalar::{CompensatedSum, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram<T> {
    pub n: usize,
    /// `λ_j = 2πj/n`, `j = 1..=⌊n/2⌋`.
    pub frequencies: Vec<T>,
    /// `I_j = |Σ_t x_t e^{−itλ_j}|² / (2πn)` on the mean-centred series.
    pub ordinates: Vec<T>,
}

fn check_series<T: Real>(values: &[T]) -> Result<()> {
    if values.len() < 8 {
        return Err(invalid(format!("periodogram needs n ≥ 8, got {}", values.len())));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("series contains {v}")));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Err(Error::Degenerate("constant series has an identically zero periodogram".into()));
    }
    Ok(())
}

fn centred_spectrum<T: Real>(values: &[T]) -> Vec<Complex<T>> {
    let n = values.len();
    let mean = values.iter().copied().collect::<CompensatedSum<T>>().value() / T::from_count(n);
    let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v - mean, T::zero())).collect();
    FftPlanner::<T>::new().plan_fft_forward(n).process(&mut buf);
    buf
}

pub fn periodogram<T: Real>(values: &[T]) -> Result<Periodogram<T>> {
    check_series(values)?;
    let n = values.len();
    let spec = centred_spectrum(values);
    let norm = T::lit(2.0 * PI) * T::from_count(n);
    let step = T::lit(2.0 * PI) / T::from_count(n);
    let half = n / 2;
    let frequencies = (1..=half).map(|j| step * T::from_count(j)).collect();
    let ordinates = spec[1..=half].iter().map(|z| z.norm_sqr() / norm).collect();
    Ok(Periodogram {
        n,
        frequencies,
        ordinates,
    })
}

/// `(2π/n) Σ_{j=0}^{n−1} I_j`, which equals the biased sample variance.
pub fn total_power<T: Real>(values: &[T]) -> Result<T> {
    check_series(values)?;
    let n = T::from_count(values.len());
    let spec = centred_spectrum(values);
    let s: CompensatedSum<T> = spec.iter().map(|z| z.norm_sqr()).collect();
    Ok(s.value() / (n * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regressor {
    /// `log(4 sin²(λ/2))`.
    #[default]
    LogSinSquared,
    /// `2 log λ`.
    LogLambdaSquared,
}

impl Regressor {
    fn eval<T: Real>(self, lambda: T) -> T {
        match self {
            Regressor::LogSinSquared => {
                let s = (lambda * T::lit(0.5)).sin();
                (T::lit(4.0) * s * s).ln()
            }
            Regressor::LogLambdaSquared => (lambda * lambda).ln(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regressor::LogSinSquared => "log-sin",
            Regressor::LogLambdaSquared => "log-lambda",
        }
    }
}

impl std::str::FromStr for Regressor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "log-sin" | "gph" => Ok(Regressor::LogSinSquared),
            "log-lambda" => Ok(Regressor::LogLambdaSquared),
            other => Err(Error::Parse(format!("unknown regressor {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bandwidth {
    /// `⌊n^{4/5}⌋`.
    Default,
    Fixed(usize),
}

/// `⌊n^{4/5}⌋`, exact: the largest `m` with `m⁵ ≤ n⁴`.
pub fn default_bandwidth(n: usize) -> usize {
    let n4 = (n as u128).pow(4);
    let mut m = (n as f64).powf(0.8).floor() as u128;
    while m.pow(5) > n4 {
        m -= 1;
    }
    while (m + 1).pow(5) <= n4 {
        m += 1;
    }
    m as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryEstimate<T> {
    pub d_hat: T,
    /// OLS standard error of the slope.
    pub std_error: T,
    pub bandwidth: usize,
    pub n: usize,
    /// Frequencies `j = 1..=bandwidth` are used.
    pub first_frequency: usize,
}

pub fn gph_estimate<T: Real>(values: &[T], bandwidth: Bandwidth, regressor: Regressor) -> Result<MemoryEstimate<T>> {
    let p = periodogram(values)?;
    gph_from_periodogram(&p, bandwidth, regressor)
}

pub fn gph_from_periodogram<T: Real>(
    p: &Periodogram<T>,
    bandwidth: Bandwidth,
    regressor: Regressor,
) -> Result<MemoryEstimate<T>> {
    let m = match bandwidth {
        Bandwidth::Default => default_bandwidth(p.n),
        Bandwidth::Fixed(m) => m,
    };
    if m < 3 {
        return Err(invalid(format!("bandwidth must be at least 3, got {m}")));
    }
    if m > p.ordinates.len() {
        return Err(invalid(format!(
            "bandwidth {m} exceeds ⌊n/2⌋ = {}",
            p.ordinates.len()
        )));
    }
    if let Some(j) = p.ordinates[..m].iter().position(|v| !(*v > T::zero())) {
        return Err(Error::Degenerate(format!("periodogram ordinate {} is zero", j + 1)));
    }
    let xs: Vec<T> = p.frequencies[..m].iter().map(|&l| regressor.eval(l)).collect();
    let ys: Vec<T> = p.ordinates[..m].iter().map(|v| v.ln()).collect();
    let mf = T::from_count(m);
    let xbar = xs.iter().copied().collect::<CompensatedSum<T>>().value() / mf;
    let ybar = ys.iter().copied().collect::<CompensatedSum<T>>().value() / mf;
    let sxx: CompensatedSum<T> = xs.iter().map(|&x| (x - xbar) * (x - xbar)).collect();
    let sxy: CompensatedSum<T> = xs.iter().zip(&ys).map(|(&x, &y)| (x - xbar) * (y - ybar)).collect();
    let (sxx, sxy) = (sxx.value(), sxy.value());
    let slope = sxy / sxx;
    let rss: CompensatedSum<T> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let e = (y - ybar) - slope * (x - xbar);
            e * e
        })
        .collect();
    let s2 = rss.value() / T::from_count(m - 2);
    Ok(MemoryEstimate {
        d_hat: -slope,
        std_error: (s2 / sxx).sqrt(),
        bandwidth: m,
        n: p.n,
        first_frequency: 1,
    })
}
