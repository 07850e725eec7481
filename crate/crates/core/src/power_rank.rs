//! Power rank of a transform: the first order `k` with `K∞^{(k)}(0) ≠ 0`,
//! where `K∞(w) = E K(w + X)`.
//!
//! Derivatives are central finite differences evaluated per draw on one
//! frozen sample (common random numbers), with a Richardson step `{h, h/2}`.
//! Combining per draw keeps the standard error honest.

use std::fmt;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::farima::{linear_filter_coefficients, ProcessKind, ProcessSpec};
use crate::innovations::{InnovationSpec, InnovationStream};
use crate::scalar::Real;
use crate::transforms::Transform;

const CHUNK: usize = 8192;
/// Leading filter taps drawn exactly; the remainder is a Gaussian with the
/// matching mean and variance.
const EXACT_TAPS: usize = 64;
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum MarginalSource<T> {
    /// Stationary law of a truncated FARIMA filter with `M` taps.
    SimulatedFarima { spec: ProcessSpec<T>, truncation: usize },
    Gaussian { sigma: T },
    Empirical(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSampler<T> {
    pub source: MarginalSource<T>,
    pub sample_count: usize,
    pub seed: u64,
}

impl<T: Real> MarginalSampler<T> {
    pub fn gaussian(sigma: T, sample_count: usize, seed: u64) -> Self {
        Self {
            source: MarginalSource::Gaussian { sigma },
            sample_count,
            seed,
        }
    }

    pub fn farima(spec: ProcessSpec<T>, truncation: usize, sample_count: usize, seed: u64) -> Self {
        Self {
            source: MarginalSource::SimulatedFarima { spec, truncation },
            sample_count,
            seed,
        }
    }

    pub fn empirical(values: Vec<T>) -> Self {
        let sample_count = values.len();
        Self {
            source: MarginalSource::Empirical(values),
            sample_count,
            seed: 0,
        }
    }

    /// Draw the frozen sample. Equal samplers give bit-identical samples.
    pub fn sample(&self) -> Result<MarginalSample<T>> {
        let draws = match &self.source {
            MarginalSource::Empirical(v) => v.clone(),
            MarginalSource::Gaussian { sigma } => {
                if !(*sigma > T::zero()) {
                    return Err(invalid(format!("Gaussian marginal needs σ > 0, got {sigma}")));
                }
                let sigma = *sigma;
                self.chunked(|count, id| {
                    let mut z = InnovationStream::substream(&InnovationSpec::gaussian(self.seed), id)?;
                    Ok((0..count).map(|_| sigma * T::lit(z.next_value())).collect())
                })?
            }
            MarginalSource::SimulatedFarima { spec, truncation } => {
                self.farima_draws(spec, *truncation)?
            }
        };
        MarginalSample::new(draws)
    }

    fn chunked<F>(&self, f: F) -> Result<Vec<T>>
    where
        F: Fn(usize, u64) -> Result<Vec<T>> + Sync,
    {
        if self.sample_count == 0 {
            return Err(invalid("sample count must be positive"));
        }
        let chunks = self.sample_count.div_ceil(CHUNK);
        let parts: Vec<Vec<T>> = (0..chunks)
            .into_par_iter()
            .map(|c| f(CHUNK.min(self.sample_count - c * CHUNK), c as u64))
            .collect::<Result<_>>()?;
        Ok(parts.concat())
    }

    fn farima_draws(&self, spec: &ProcessSpec<T>, truncation: usize) -> Result<Vec<T>> {
        spec.validate()?;
        if spec.kind == ProcessKind::TypeI {
            return Err(invalid("a Type-I process has no stationary marginal"));
        }
        let c = linear_filter_coefficients(spec.d, &spec.ar, &spec.ma, truncation.max(1))?;
        let head = EXACT_TAPS.min(c.len());
        let tail_sum: f64 = c[head..].iter().map(|v| v.to_f64_lossy()).sum();
        let tail_sq: f64 = c[head..].iter().map(|v| v.to_f64_lossy().powi(2)).sum();
        let innov = spec.innovation.with_seed(self.seed);
        let mu = innov.mean();
        let tail_mean = T::lit(mu * tail_sum);
        let tail_sd = T::lit(((innov.second_moment() - mu * mu) * tail_sq).sqrt());
        let taps = &c[..head];
        self.chunked(|count, id| {
            let mut eps = InnovationStream::substream(&innov, id)?;
            let mut z = InnovationStream::substream(&InnovationSpec::gaussian(self.seed), id + (1 << 40))?;
            Ok((0..count)
                .map(|_| {
                    let exact = taps.iter().fold(T::zero(), |acc, &ci| acc + ci * T::lit(eps.next_value()));
                    exact + tail_mean + tail_sd * T::lit(z.next_value())
                })
                .collect())
        })
    }
}

/// Frozen draws shared by every evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSample<T> {
    draws: Vec<T>,
    mean: T,
    sd: T,
}

impl<T: Real> MarginalSample<T> {
    pub fn new(draws: Vec<T>) -> Result<Self> {
        if draws.len() < 2 {
            return Err(invalid("a marginal sample needs at least two draws"));
        }
        if draws.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("marginal sample contains non-finite draws".into()));
        }
        let m = moments(&draws, |x| x);
        Ok(Self {
            mean: m.mean,
            sd: m.variance().sqrt(),
            draws,
        })
    }

    pub fn draws(&self) -> &[T] {
        &self.draws
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn sd(&self) -> T {
        self.sd
    }
}

/// Running mean and sum of squared deviations, mergeable across chunks.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Moments<T> {
    pub(crate) n: usize,
    pub(crate) mean: T,
    m2: T,
}

impl<T: Real> Moments<T> {
    pub(crate) fn empty() -> Self {
        Self {
            n: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    pub(crate) fn push(&mut self, x: T) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean = self.mean + delta / T::from_count(self.n);
        self.m2 = self.m2 + delta * (x - self.mean);
    }

    pub(crate) fn merge(self, o: Self) -> Self {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let (na, nb, nn) = (T::from_count(self.n), T::from_count(o.n), T::from_count(n));
        let delta = o.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * nb / nn,
            m2: self.m2 + o.m2 + delta * delta * na * nb / nn,
        }
    }

    pub(crate) fn variance(&self) -> T {
        if self.n < 2 {
            return T::zero();
        }
        self.m2 / T::from_count(self.n - 1)
    }

    pub(crate) fn std_error(&self) -> T {
        (self.variance() / T::from_count(self.n)).sqrt()
    }
}

/// Chunked parallel reduction in a fixed order, so results do not depend on
/// the thread count.
fn moments<T: Real, F: Fn(T) -> T + Sync>(xs: &[T], f: F) -> Moments<T> {
    xs.par_chunks(CHUNK)
        .map(|chunk| {
            let mut m = Moments::empty();
            for &x in chunk {
                m.push(f(x));
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::empty(), Moments::merge)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub std_error: T,
}

/// `K∞(w) = E K(w + X)` with its Monte-Carlo standard error.
pub fn k_infinity<T: Real>(t: &Transform<T>, sample: &MarginalSample<T>, w: T) -> Result<Estimate<T>> {
    let k = t.resolve(sample.mean);
    let m = moments(&sample.draws, |x| k.eval(w + x));
    if !m.mean.is_finite() || !m.m2.is_finite() {
        return Err(Error::NonFinite(format!("E K(w + X) for {t} is not finite on this sample")));
    }
    Ok(Estimate {
        value: m.mean,
        std_error: m.std_error(),
    })
}

/// Weights of the `order`-th derivative on the nodes `−p..=p` (Fornberg's
/// recursion at zero).
pub fn central_difference_weights(order: usize, p: usize) -> Vec<f64> {
    let nodes: Vec<f64> = (-(p as i64)..=p as i64).map(|j| j as f64).collect();
    let n = nodes.len();
    // c[k][j]: weight of node j for derivative k
    let mut c = vec![vec![0.0f64; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c.swap_remove(order)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeEstimate<T> {
    pub order: usize,
    pub value: T,
    pub std_error: T,
    /// Coarse step; the refinement uses half of it.
    pub step: T,
}

/// `0.5 · sd · r^{−1/2}`.
pub fn default_step<T: Real>(sample: &MarginalSample<T>, order: usize) -> T {
    T::lit(0.5) * sample.sd / T::from_count(order).sqrt()
}

/// `K∞^{(r)}(0)` by a Richardson-refined central difference, evaluated per draw.
pub fn k_infinity_derivative<T: Real>(
    t: &Transform<T>,
    sample: &MarginalSample<T>,
    order: usize,
    step: Option<T>,
) -> Result<DerivativeEstimate<T>> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(invalid(format!("derivative order must be in 1..={MAX_ORDER}, got {order}")));
    }
    let h = step.unwrap_or_else(|| default_step(sample, order));
    if !(h > T::zero()) || !h.is_finite() {
        return Err(invalid(format!("finite-difference step must be positive, got {h}")));
    }
    let p = order.div_ceil(2);
    let weights: Vec<(T, T)> = central_difference_weights(order, p)
        .into_iter()
        .enumerate()
        .filter(|(_, w)| *w != 0.0)
        .map(|(j, w)| (T::from_count(j) - T::from_count(p), T::lit(w)))
        .collect();
    let k = t.resolve(sample.mean);
    let half = h * T::lit(0.5);
    let (hr, half_r) = (h.powi(order as i32), half.powi(order as i32));
    let four = T::lit(4.0);
    let three = T::lit(3.0);
    let m = moments(&sample.draws, |x| {
        let mut coarse = T::zero();
        let mut fine = T::zero();
        for &(node, w) in &weights {
            coarse = coarse + w * k.eval(x + node * h);
            fine = fine + w * k.eval(x + node * half);
        }
        (four * fine / half_r - coarse / hr) / three
    });
    if !m.mean.is_finite() || !m.m2.is_finite() {
        return Err(Error::NonFinite(format!(
            "order-{order} difference of E K(w + X) for {t} is not finite"
        )));
    }
    Ok(DerivativeEstimate {
        order,
        value: m.mean,
        std_error: m.std_error(),
        step: h,
    })
}

/// `threshold_r = se_multiplier · se_r + floor · scale`, or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankTolerance<T> {
    Adaptive { se_multiplier: T, floor: T, scale: T },
    Fixed(T),
}

impl<T: Real> Default for RankTolerance<T> {
    fn default() -> Self {
        RankTolerance::Adaptive {
            se_multiplier: T::lit(5.0),
            floor: T::lit(1e-3),
            scale: T::one(),
        }
    }
}

impl<T: Real> RankTolerance<T> {
    pub fn threshold(&self, std_error: T) -> T {
        match *self {
            RankTolerance::Adaptive {
                se_multiplier,
                floor,
                scale,
            } => se_multiplier * std_error + floor * scale,
            RankTolerance::Fixed(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRankResult<T> {
    /// `None` when every order up to the maximum is below tolerance.
    pub rank: Option<usize>,
    pub max_rank: usize,
    pub estimates: Vec<DerivativeEstimate<T>>,
    pub thresholds: Vec<T>,
    pub tolerance: RankTolerance<T>,
}

impl<T: Real> PowerRankResult<T> {
    pub fn rank_label(&self) -> String {
        match self.rank {
            Some(r) => r.to_string(),
            None => format!("none<={}", self.max_rank),
        }
    }
}

pub fn power_rank<T: Real>(
    t: &Transform<T>,
    sample: &MarginalSample<T>,
    max_rank: usize,
    tolerance: RankTolerance<T>,
) -> Result<PowerRankResult<T>> {
    if !(1..=MAX_ORDER).contains(&max_rank) {
        return Err(invalid(format!("max rank must be in 1..={MAX_ORDER}, got {max_rank}")));
    }
    let estimates = (1..=max_rank)
        .map(|r| k_infinity_derivative(t, sample, r, None))
        .collect::<Result<Vec<_>>>()?;
    let thresholds: Vec<T> = estimates.iter().map(|e| tolerance.threshold(e.std_error)).collect();
    let rank = estimates
        .iter()
        .zip(&thresholds)
        .find(|(e, th)| e.value.abs() > **th)
        .map(|(e, _)| e.order);
    Ok(PowerRankResult {
        rank,
        max_rank,
        estimates,
        thresholds,
        tolerance,
    })
}

/// `(H′∞, H″∞)` at zero for the call `(x − C)⁺`: `(1 − G(C − μ), g(C − μ))`.
pub fn analytic_option_derivatives<T, G, P>(c_minus_mu: T, cdf: G, pdf: P) -> (T, T)
where
    T: Real,
    G: Fn(T) -> T,
    P: Fn(T) -> T,
{
    (T::one() - cdf(c_minus_mu), pdf(c_minus_mu))
}

/// The put `(C − x)⁺` has `(−G(C − μ), g(C − μ))`.
pub fn analytic_put_derivatives<T, G, P>(c_minus_mu: T, cdf: G, pdf: P) -> (T, T)
where
    T: Real,
    G: Fn(T) -> T,
    P: Fn(T) -> T,
{
    (-cdf(c_minus_mu), pdf(c_minus_mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionRank {
    One,
    Two,
    /// Both derivatives vanish numerically.
    Infinite,
}

impl fmt::Display for OptionRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionRank::One => "1",
            OptionRank::Two => "2",
            OptionRank::Infinite => "inf",
        })
    }
}

pub fn option_rank<T: Real>(first: T, second: T, tol: T) -> OptionRank {
    if first.abs() > tol {
        OptionRank::One
    } else if second.abs() > tol {
        OptionRank::Two
    } else {
        OptionRank::Infinite
    }
}

/// Empirical distribution function with a Gaussian kernel density.
#[derive(Debug, Clone)]
pub struct EmpiricalMarginal<T> {
    sorted: Vec<T>,
    bandwidth: T,
}

impl<T: Real> EmpiricalMarginal<T> {
    /// Silverman's rule `0.9 · min(sd, IQR/1.34) · n^{−1/5}` for the bandwidth.
    pub fn new(values: &[T]) -> Result<Self> {
        let sample = MarginalSample::new(values.to_vec())?;
        let mut sorted = sample.draws;
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let n = sorted.len();
        let q = |p: f64| sorted[((n - 1) as f64 * p).round() as usize];
        let iqr = (q(0.75) - q(0.25)) / T::lit(1.34);
        let spread = if iqr > T::zero() { sample.sd.min(iqr) } else { sample.sd };
        if !(spread > T::zero()) {
            return Err(Error::Degenerate("empirical marginal has zero spread".into()));
        }
        let bandwidth = T::lit(0.9) * spread * T::from_count(n).powf(T::lit(-0.2));
        Ok(Self { sorted, bandwidth })
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of values `≤ x`.
    pub fn cdf(&self, x: T) -> T {
        let k = self.sorted.partition_point(|v| *v <= x);
        T::from_count(k) / T::from_count(self.sorted.len())
    }

    pub fn pdf(&self, x: T) -> T {
        let reach = T::lit(8.0) * self.bandwidth;
        let lo = self.sorted.partition_point(|v| *v < x - reach);
        let hi = self.sorted.partition_point(|v| *v <= x + reach);
        let norm = T::one() / (T::from_count(self.sorted.len()) * self.bandwidth * T::TAU().sqrt());
        let s: T = self.sorted[lo..hi]
            .iter()
            .map(|&v| {
                let u = (x - v) / self.bandwidth;
                (-T::lit(0.5) * u * u).exp()
            })
            .sum();
        s * norm
    }
}
