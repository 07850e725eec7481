//! MA(∞) coefficients, closed-form autocovariances, and truncated-filter
//! simulation of FARIMA(p, d, q) and Type-I processes.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::innovations::{InnovationSpec, InnovationStream};
use crate::scalar::{CompensatedSum, Real};
use crate::series::{Series, SeriesMeta};
use crate::special::{gamma_signed, log_gamma, reciprocal_gamma_signed};

/// Taps at or below this count are convolved directly instead of by FFT.
const DIRECT_TAP_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessKind {
    /// `φ(B) X = θ(B) (1 − B)^{−d} ε`, `−1 < d < 1/2`.
    StationaryFarima,
    /// `X_n = Σ_{j≤n} Y_j` with `Y` a FARIMA(p, d − 1, q), `1/2 < d < 1`, `X₀ = 0`.
    TypeI,
}

impl ProcessKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProcessKind::StationaryFarima => "farima",
            ProcessKind::TypeI => "type1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec<T> {
    pub d: T,
    /// `φ₁ … φ_p` of `φ(z) = 1 − φ₁ z − … − φ_p z^p`.
    pub ar: Vec<T>,
    /// `θ₁ … θ_q` of `θ(z) = 1 + θ₁ z + … + θ_q z^q`.
    pub ma: Vec<T>,
    pub kind: ProcessKind,
    pub innovation: InnovationSpec,
}

impl<T: Real> ProcessSpec<T> {
    pub fn farima(d: T, ar: Vec<T>, ma: Vec<T>, innovation: InnovationSpec) -> Self {
        Self {
            d,
            ar,
            ma,
            kind: ProcessKind::StationaryFarima,
            innovation,
        }
    }

    pub fn fractional_noise(d: T, innovation: InnovationSpec) -> Self {
        Self::farima(d, Vec::new(), Vec::new(), innovation)
    }

    pub fn type_one(d: T, innovation: InnovationSpec) -> Self {
        Self {
            d,
            ar: Vec::new(),
            ma: Vec::new(),
            kind: ProcessKind::TypeI,
            innovation,
        }
    }

    /// Memory parameter of the stationary filter actually applied to the innovations.
    pub fn filter_d(&self) -> T {
        match self.kind {
            ProcessKind::StationaryFarima => self.d,
            ProcessKind::TypeI => self.d - T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        let half = T::lit(0.5);
        match self.kind {
            ProcessKind::StationaryFarima if !(d > -T::one() && d < half) => {
                return Err(invalid(format!("stationary FARIMA needs −1 < d < 1/2, got {d}")))
            }
            ProcessKind::TypeI if !(d > half && d < T::one()) => {
                return Err(invalid(format!("Type-I process needs 1/2 < d < 1, got {d}")))
            }
            _ => {}
        }
        check_ar_stationary(&self.ar)?;
        self.innovation.validate()
    }
}

/// Fails unless every root of `φ(z)` lies outside the closed unit disk (by `1e−8`).
pub fn check_ar_stationary<T: Real>(ar: &[T]) -> Result<()> {
    let p = ar.len();
    if p == 0 {
        return Ok(());
    }
    // Companion matrix of z^p − φ₁ z^{p−1} − … − φ_p; its eigenvalues are the
    // reciprocals of the roots of φ.
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for (j, phi) in ar.iter().enumerate() {
        companion[(0, j)] = phi.to_f64_lossy();
    }
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    let largest = companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if largest == 0.0 {
        return Ok(());
    }
    let min_root_modulus = 1.0 / largest;
    if min_root_modulus > 1.0 + 1e-8 {
        Ok(())
    } else {
        Err(Error::NonStationaryAr { min_root_modulus })
    }
}

/// `a_i = Γ(i + d) / (Γ(d) Γ(i + 1))` for `i < m`, by `a_i = a_{i−1} (i − 1 + d) / i`.
pub fn fractional_coefficients<T: Real>(d: T, m: usize) -> Result<Vec<T>> {
    if m == 0 {
        return Err(invalid("coefficient count must be at least 1"));
    }
    if !(d > -T::one() && d < T::lit(0.5)) {
        return Err(invalid(format!("fractional coefficients need −1 < d < 1/2, got {d}")));
    }
    let mut a = Vec::with_capacity(m);
    a.push(T::one());
    for i in 1..m {
        let prev = a[i - 1];
        a.push(prev * (T::from_count(i - 1) + d) / T::from_count(i));
    }
    Ok(a)
}

/// ψ weights of `θ(B)/φ(B)`: `ψ_j = θ_j + Σ_{i=1}^{min(j,p)} φ_i ψ_{j−i}`.
pub fn arma_psi_weights<T: Real>(ar: &[T], ma: &[T], m: usize) -> Result<Vec<T>> {
    if m == 0 {
        return Err(invalid("coefficient count must be at least 1"));
    }
    check_ar_stationary(ar)?;
    let mut psi = Vec::with_capacity(m);
    for j in 0..m {
        let mut v = match j {
            0 => T::one(),
            _ => ma.get(j - 1).copied().unwrap_or_else(T::zero),
        };
        for (i, &phi) in ar.iter().enumerate().take(j) {
            v = v + phi * psi[j - 1 - i];
        }
        psi.push(v);
    }
    Ok(psi)
}

/// First `m` MA(∞) coefficients of the full filter `θ(B) φ(B)^{−1} (1 − B)^{−d}`.
pub fn linear_filter_coefficients<T: Real>(d: T, ar: &[T], ma: &[T], m: usize) -> Result<Vec<T>> {
    let frac = fractional_coefficients(d, m)?;
    if ar.is_empty() && ma.is_empty() {
        return Ok(frac);
    }
    let psi = arma_psi_weights(ar, ma, m)?;
    Ok(convolve_truncated(&frac, &psi, m))
}

/// `(a ⋆ b)[k]` for `k < m`.
fn convolve_truncated<T: Real>(a: &[T], b: &[T], m: usize) -> Vec<T> {
    let nz_a = a.iter().filter(|v| **v != T::zero()).count();
    let nz_b = b.iter().filter(|v| **v != T::zero()).count();
    if nz_a.min(nz_b) <= DIRECT_TAP_LIMIT {
        let (sparse, dense) = if nz_a <= nz_b { (a, b) } else { (b, a) };
        let mut out = vec![T::zero(); m];
        for (i, &s) in sparse.iter().enumerate().take(m) {
            if s == T::zero() {
                continue;
            }
            for (k, &v) in dense.iter().enumerate().take(m - i) {
                out[i + k] = out[i + k] + s * v;
            }
        }
        return out;
    }
    let n = (a.len() + b.len()).next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut fa = pad_complex(a, n);
    let mut fb = pad_complex(b, n);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * *y;
    }
    inv.process(&mut fa);
    let scale = T::from_count(n);
    fa.iter().take(m).map(|z| z.re / scale).collect()
}

fn pad_complex<T: Real>(x: &[T], n: usize) -> Vec<Complex<T>> {
    let mut v = vec![Complex::new(T::zero(), T::zero()); n];
    for (slot, &x) in v.iter_mut().zip(x) {
        slot.re = x;
    }
    v
}

/// `Σ_{i≥0} a_i² = Γ(1 − 2d) / Γ²(1 − d)` for the fractional filter, `d < 1/2`.
pub fn fractional_square_sum<T: Real>(d: T) -> Result<T> {
    let one = T::one();
    Ok((log_gamma(one - d - d)? - log_gamma(one - d)? - log_gamma(one - d)?).exp())
}

fn check_acov_domain<T: Real>(d: T) -> Result<()> {
    let half = T::lit(0.5);
    if !(d > -half && d < half) {
        return Err(invalid(format!("FARIMA(0,d,0) autocovariance needs −1/2 < d < 1/2, got {d}")));
    }
    Ok(())
}

/// `γ(h)` of a unit-variance FARIMA(0, d, 0), by the ratio recursion
/// `γ(h) = γ(h − 1) (h − 1 + d) / (h − d)` from `γ(0) = Γ(1 − 2d)/Γ²(1 − d)`.
pub fn autocovariance_f0d0<T: Real>(d: T, h: usize) -> Result<T> {
    Ok(*autocovariances_f0d0(d, h)?.last().expect("non-empty"))
}

/// `γ(0), …, γ(h_max)` of a unit-variance FARIMA(0, d, 0).
pub fn autocovariances_f0d0<T: Real>(d: T, h_max: usize) -> Result<Vec<T>> {
    check_acov_domain(d)?;
    let mut g = Vec::with_capacity(h_max + 1);
    g.push(fractional_square_sum(d)?);
    for h in 1..=h_max {
        let hf = T::from_count(h);
        g.push(g[h - 1] * (hf - T::one() + d) / (hf - d));
    }
    Ok(g)
}

/// `γ(h) = Γ(1−2d)/(Γ(1−d) Γ(d)) · Γ(h+d)/Γ(h+1−d)` evaluated directly in
/// signed-log form. Independent of the recursion in [`autocovariances_f0d0`].
pub fn autocovariance_f0d0_closed_form<T: Real>(d: T, h: usize) -> Result<T> {
    check_acov_domain(d)?;
    let one = T::one();
    let hf = T::from_count(h);
    if h == 0 {
        return fractional_square_sum(d);
    }
    let v = gamma_signed(one - d - d)?
        * gamma_signed(one - d)?.recip()?
        * reciprocal_gamma_signed(d)?
        * gamma_signed(hf + d)?
        * gamma_signed(hf + one - d)?.recip()?;
    Ok(if v.is_zero() { T::zero() } else { v.value() })
}

/// `Σ_i c_i c_{i+h}` for `h = 0..=h_max`, by FFT.
pub fn filter_autocovariances<T: Real>(c: &[T], h_max: usize) -> Vec<T> {
    let size = (c.len() + h_max + 1).next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let mut buf = pad_complex(c, size);
    planner.plan_fft_forward(size).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), T::zero());
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let scale = T::from_count(size);
    (0..=h_max)
        .map(|h| if h < c.len() { buf[h].re / scale } else { T::zero() })
        .collect()
}

/// Truncated-filter simulator with the coefficient spectrum cached, so that
/// many replications of the same model share the setup cost.
pub struct FarimaSimulator<T: Real> {
    spec: ProcessSpec<T>,
    n: usize,
    truncation: usize,
    coefficients: Vec<T>,
    plan: SimulationPlan<T>,
    truncation_variance_loss: f64,
}

enum SimulationPlan<T: Real> {
    Direct {
        taps: Vec<(usize, T)>,
    },
    Fft {
        size: usize,
        spectrum: Vec<Complex<T>>,
        forward: Arc<dyn Fft<T>>,
        inverse: Arc<dyn Fft<T>>,
    },
}

impl<T: Real> FarimaSimulator<T> {
    /// `truncation = None` selects `M = 2n`.
    pub fn new(spec: &ProcessSpec<T>, n: usize, truncation: Option<usize>) -> Result<Self> {
        spec.validate()?;
        if n == 0 {
            return Err(invalid("series length must be at least 1"));
        }
        let m = truncation.unwrap_or(2 * n);
        if m < n {
            return Err(invalid(format!("truncation M = {m} must be at least n = {n}")));
        }
        let fd = spec.filter_d();
        let coefficients = linear_filter_coefficients(fd, &spec.ar, &spec.ma, m)?;

        let frac_loss = {
            let frac = fractional_coefficients(fd, m)?;
            let kept: CompensatedSum<f64> = frac.iter().map(|a| a.to_f64_lossy().powi(2)).collect();
            fractional_square_sum(fd.to_f64_lossy())? - kept.value()
        };

        let taps: Vec<(usize, T)> = coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != T::zero())
            .map(|(i, &c)| (i, c))
            .collect();
        let plan = if taps.len() <= DIRECT_TAP_LIMIT {
            SimulationPlan::Direct { taps }
        } else {
            let size = (n + m - 1).next_power_of_two();
            let mut planner = FftPlanner::<T>::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let mut spectrum = pad_complex(&coefficients, size);
            forward.process(&mut spectrum);
            SimulationPlan::Fft {
                size,
                spectrum,
                forward,
                inverse,
            }
        };
        Ok(Self {
            spec: spec.clone(),
            n,
            truncation: m,
            coefficients,
            plan,
            truncation_variance_loss: frac_loss,
        })
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// One realisation. The first `n` innovation draws drive times `0..n`;
    /// the following `M − 1` draws are the pre-sample values, newest first.
    pub fn generate(&self, seed: u64) -> Result<Series<T>> {
        let n = self.n;
        let m = self.truncation;
        let innov_spec = self.spec.innovation.with_seed(seed);
        let mut stream = InnovationStream::new(&innov_spec)?;
        // buf[j] holds ε_{j − (M − 1)}.
        let len = n + m - 1;
        let mut buf = vec![T::zero(); len];
        stream.fill(&mut buf[m - 1..]);
        for k in 1..m {
            buf[m - 1 - k] = T::lit(stream.next_value());
        }

        let mut values = match &self.plan {
            SimulationPlan::Direct { taps } => (0..n)
                .map(|t| {
                    taps.iter()
                        .fold(T::zero(), |acc, &(i, c)| acc + c * buf[t + m - 1 - i])
                })
                .collect::<Vec<T>>(),
            SimulationPlan::Fft {
                size,
                spectrum,
                forward,
                inverse,
            } => {
                let mut work = pad_complex(&buf, *size);
                forward.process(&mut work);
                for (w, s) in work.iter_mut().zip(spectrum) {
                    *w = *w * *s;
                }
                inverse.process(&mut work);
                let scale = T::from_count(*size);
                work[m - 1..m - 1 + n].iter().map(|z| z.re / scale).collect()
            }
        };

        if self.spec.kind == ProcessKind::TypeI {
            let mut acc = CompensatedSum::new();
            for v in values.iter_mut() {
                acc.add(*v);
                *v = acc.value();
            }
        }

        Ok(Series {
            values,
            meta: SeriesMeta {
                spec: Some(self.spec.clone()),
                seed,
                truncation: m,
                burn_in: 0,
                truncation_variance_loss: Some(self.truncation_variance_loss),
                transforms: Vec::new(),
            },
        })
    }
}

/// Simulate `n` observations of `spec` with truncation `M` (default `2n`).
pub fn simulate<T: Real>(
    spec: &ProcessSpec<T>,
    n: usize,
    truncation: Option<usize>,
    seed: u64,
) -> Result<Series<T>> {
    FarimaSimulator::new(spec, n, truncation)?.generate(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innovations::{draw_stream, InnovationSpec};
    use crate::scalar::mean_and_sd;
    use crate::special::gamma;

    #[test]
    fn fractional_coefficient_examples() {
        let a = fractional_coefficients(0.3f64, 2).unwrap();
        assert_eq!(a, vec![1.0, 0.3]);
        let a = fractional_coefficients(0.4f64, 3).unwrap();
        assert!((a[2] - 0.28).abs() < 1e-15);
        let a = fractional_coefficients(-0.3f64, 4).unwrap();
        assert!(a[1..].iter().all(|&x| x < 0.0));
        assert!(fractional_coefficients(0.5f64, 4).is_err());
        assert!(fractional_coefficients(0.2f64, 0).is_err());
    }

    #[test]
    fn fractional_coefficients_match_gamma_ratio() {
        let d = -0.35f64;
        let a = fractional_coefficients(d, 40).unwrap();
        for (i, &ai) in a.iter().enumerate().skip(1) {
            let g = gamma_signed(i as f64 + d).unwrap()
                / gamma_signed(d).unwrap()
                / gamma_signed(i as f64 + 1.0).unwrap();
            assert!((g.value() - ai).abs() < 1e-13 * ai.abs().max(1e-3), "i = {i}");
        }
    }

    #[test]
    fn psi_weight_examples() {
        assert_eq!(arma_psi_weights::<f64>(&[], &[], 3).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(
            arma_psi_weights(&[0.5f64], &[], 4).unwrap(),
            vec![1.0, 0.5, 0.25, 0.125]
        );
        let psi = arma_psi_weights(&[-0.4f64], &[0.7], 3).unwrap();
        assert!((psi[1] - 0.3).abs() < 1e-15);
        assert!((psi[2] + 0.12).abs() < 1e-15);
    }

    #[test]
    fn non_invertible_ar_rejected() {
        assert!(matches!(
            arma_psi_weights(&[1.0f64], &[], 3),
            Err(Error::NonStationaryAr { .. })
        ));
        assert!(check_ar_stationary(&[1.5f64, -0.5]).is_err()); // root at z = 1
        assert!(check_ar_stationary(&[0.5f64, 0.3]).is_ok());
    }

    #[test]
    fn fft_and_direct_convolution_agree() {
        let a = fractional_coefficients(0.3f64, 300).unwrap();
        let b = arma_psi_weights(&[0.6f64], &[], 300).unwrap();
        let fft = convolve_truncated(&a, &b, 300);
        let mut direct = vec![0.0; 300];
        for i in 0..300 {
            for j in 0..300 - i {
                direct[i + j] += a[i] * b[j];
            }
        }
        for (x, y) in fft.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn filter_autocovariances_match_direct_sums() {
        let c = fractional_coefficients(0.3f64, 500).unwrap();
        let g = filter_autocovariances(&c, 600);
        for h in [0usize, 1, 17, 499] {
            let want: f64 = (0..500 - h).map(|i| c[i] * c[i + h]).sum();
            assert!((g[h] - want).abs() < 1e-12, "h = {h}");
        }
        assert_eq!(g[550], 0.0);
    }

    #[test]
    fn white_noise_is_the_innovation_stream() {
        let innov = InnovationSpec::student_t(10.0, 0);
        let spec = ProcessSpec::fractional_noise(0.0f64, innov);
        let s = simulate(&spec, 1000, None, 17).unwrap();
        let e: Vec<f64> = draw_stream(&innov.with_seed(17), 1000).unwrap();
        assert_eq!(s.values, e);
        assert_eq!(s.meta.truncation, 2000);
    }

    #[test]
    fn simulation_is_deterministic() {
        let spec = ProcessSpec::farima(0.3f64, vec![-0.4], vec![0.7], InnovationSpec::student_t(10.0, 0));
        let a = simulate(&spec, 500, None, 9).unwrap();
        let b = simulate(&spec, 500, None, 9).unwrap();
        assert_eq!(a.values, b.values);
        let c = simulate(&spec, 500, None, 10).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn fft_path_matches_direct_filter() {
        let spec = ProcessSpec::fractional_noise(0.3f64, InnovationSpec::gaussian(0));
        let sim = FarimaSimulator::new(&spec, 200, Some(300)).unwrap();
        let s = sim.generate(4).unwrap();
        // rebuild the innovation buffer in the documented layout
        let mut stream = InnovationStream::new(&spec.innovation.with_seed(4)).unwrap();
        let draws: Vec<f64> = (0..499).map(|_| stream.next_value()).collect();
        let eps = |t: i64| -> f64 {
            if t >= 0 {
                draws[t as usize]
            } else {
                draws[200 + (-t - 1) as usize]
            }
        };
        let c = sim.coefficients();
        for t in [0usize, 1, 57, 199] {
            let want: f64 = (0..300).map(|i| c[i] * eps(t as i64 - i as i64)).sum();
            assert!((s.values[t] - want).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn spec_validation() {
        let g = InnovationSpec::gaussian(0);
        assert!(simulate(&ProcessSpec::fractional_noise(0.5f64, g), 10, None, 0).is_err());
        assert!(simulate(&ProcessSpec::fractional_noise(-1.0f64, g), 10, None, 0).is_err());
        assert!(simulate(&ProcessSpec::type_one(0.4f64, g), 10, None, 0).is_err());
        assert!(simulate(&ProcessSpec::fractional_noise(0.2f64, g), 10, Some(5), 0).is_err());
        let bad_ar = ProcessSpec::farima(0.2f64, vec![1.2], vec![], g);
        assert!(simulate(&bad_ar, 10, None, 0).is_err());
    }

    #[test]
    fn autocovariance_examples() {
        assert!((autocovariance_f0d0(1e-9f64, 0).unwrap() - 1.0).abs() < 1e-8);
        let r = autocovariance_f0d0(0.2f64, 1).unwrap() / autocovariance_f0d0(0.2f64, 0).unwrap();
        assert!((r - 0.25).abs() < 1e-14);
        assert!(autocovariance_f0d0(-0.25f64, 3).unwrap() < 0.0);
        assert!(autocovariance_f0d0(0.5f64, 1).is_err());
    }

    #[test]
    fn autocovariance_lag_one_against_coefficient_sum() {
        // ρ(1) = d/(1−d); the truncated sum Σ a_i a_{i+1} with M = 10⁶ matches
        // once its power-law tail is added back.
        let d = 0.2f64;
        let m = 1_000_000;
        let a = fractional_coefficients(d, m + 2).unwrap();
        let mut s0 = CompensatedSum::new();
        let mut s1 = CompensatedSum::new();
        for i in 0..m {
            s0.add(a[i] * a[i]);
            s1.add(a[i] * a[i + 1]);
        }
        let tail = |h: usize| a[m] * a[m + h] * (m as f64 - 0.5) / (1.0 - 2.0 * d);
        let rho = (s1.value() + tail(1)) / (s0.value() + tail(0));
        assert!((rho - 0.25).abs() < 1e-7, "{rho}");
    }

    #[test]
    fn recursion_and_closed_form_agree() {
        for d in [-0.45f64, -0.25, -0.1, 0.1, 0.3, 0.45] {
            let g = autocovariances_f0d0(d, 50).unwrap();
            for h in [0usize, 1, 2, 7, 50] {
                let c = autocovariance_f0d0_closed_form(d, h).unwrap();
                assert!((g[h] - c).abs() < 1e-12 * c.abs().max(1e-6), "d = {d}, h = {h}");
            }
        }
        assert_eq!(autocovariance_f0d0_closed_form(0.0f64, 3).unwrap(), 0.0);
    }

    #[test]
    fn antipersistent_spectrum_vanishes_at_zero() {
        // γ(0) + 2 Σ_{h≤H} γ(h) → 0, bounded by the power-law tail 10·|γ(H)|·H.
        for d in [-0.25f64, -0.4] {
            let big_h = 1_000_000;
            let g = autocovariances_f0d0(d, big_h).unwrap();
            let mut acc = CompensatedSum::new();
            acc.add(g[0]);
            for v in &g[1..] {
                acc.add(2.0 * v);
            }
            let partial = acc.value().abs();
            assert!(partial < 10.0 * g[big_h].abs() * big_h as f64, "d = {d}: {partial}");
            assert!(g[1..].iter().all(|&v| v < 0.0));
        }
    }

    #[test]
    fn coefficient_square_tail_follows_power_law() {
        // a_i ~ i^{d−1}/Γ(d), so Σ_{M≤i<2M} a_i² ≈ (M^{2d−1} − (2M)^{2d−1}) / ((1 − 2d) Γ(d)²).
        let m = 1_000_000usize;
        for d in [0.3f64, 0.45] {
            let a = fractional_coefficients(d, 2 * m).unwrap();
            let tail: f64 = a[m..].iter().map(|x| x * x).sum();
            let g = gamma(d).unwrap();
            let e = 2.0 * d - 1.0;
            let want = ((m as f64).powf(e) - (2.0 * m as f64).powf(e)) / ((1.0 - 2.0 * d) * g * g);
            assert!((tail / want - 1.0).abs() < 1e-4, "d = {d}: {tail} vs {want}");
        }
    }

    #[test]
    fn lag_one_moments_of_simulated_d04() {
        // With the known zero mean, E Σ x_t x_{t+1} and E Σ x_t² are exact
        // multiples of the truncated-filter autocovariances.
        let n = 2000;
        let spec = ProcessSpec::fractional_noise(0.4f64, InnovationSpec::gaussian(0));
        let sim = FarimaSimulator::new(&spec, n, None).unwrap();
        let c = sim.coefficients();
        let g0: f64 = c.iter().map(|v| v * v).sum();
        let g1: f64 = c.windows(2).map(|w| w[0] * w[1]).sum();
        let (mut num, mut den) = (0.0, 0.0);
        for r in 0..200u64 {
            let x = sim.generate(1000 + r).unwrap().values;
            num += x.windows(2).map(|w| w[0] * w[1]).sum::<f64>();
            den += x.iter().map(|v| v * v).sum::<f64>();
        }
        let rho = (num / (n - 1) as f64) / (den / n as f64);
        assert!((rho - g1 / g0).abs() < 0.02, "ρ(1) {rho} vs {}", g1 / g0);
    }

    #[test]
    fn type_one_increments_have_closed_form_variance() {
        let spec = ProcessSpec::type_one(0.75f64, InnovationSpec::gaussian(0));
        let sim = FarimaSimulator::new(&spec, 2000, None).unwrap();
        let target = autocovariance_f0d0(-0.25f64, 0).unwrap();
        let mut vars = Vec::new();
        for r in 0..200u64 {
            let x = sim.generate(r).unwrap().values;
            let mut y = vec![x[0]];
            y.extend(x.windows(2).map(|w| w[1] - w[0]));
            let (_, s) = mean_and_sd(&y);
            vars.push(s * s);
        }
        let (avg, _) = mean_and_sd(&vars);
        assert!((avg / target - 1.0).abs() < 0.05, "{avg} vs {target}");
    }

    #[test]
    fn truncation_loss_is_reported() {
        let spec = ProcessSpec::fractional_noise(0.4f64, InnovationSpec::gaussian(0));
        let s = simulate(&spec, 1000, None, 0).unwrap();
        let loss = s.meta.truncation_variance_loss.unwrap();
        assert!(loss > 0.0 && loss < 0.5, "{loss}");
    }

    #[test]
    fn truncation_loss_follows_power_law() {
        let d = 0.3f64;
        let n = 2000;
        let spec = ProcessSpec::fractional_noise(d, InnovationSpec::gaussian(0));
        let loss = FarimaSimulator::new(&spec, n, None).unwrap().truncation_variance_loss;
        let m = 2 * n;
        let mut a = 1.0f64;
        let mut head = 0.0;
        for i in 0..m {
            head += a * a;
            a *= (i as f64 + d) / (i as f64 + 1.0);
        }
        let total = libm::tgamma(1.0 - 2.0 * d) / libm::tgamma(1.0 - d).powi(2);
        assert!((loss - (total - head)).abs() < 1e-10, "{loss} vs {}", total - head);
        // a_i ~ i^(d-1)/Γ(d), so the tail is about M^(2d-1) / ((1-2d) Γ(d)²)
        let asymptote = (m as f64).powf(2.0 * d - 1.0) / ((1.0 - 2.0 * d) * libm::tgamma(d).powi(2));
        assert!((loss / asymptote - 1.0).abs() < 0.01, "{loss} vs {asymptote}");
        assert!(loss > 1e-6);
    }

    #[test]
    fn single_precision_simulation_runs() {
        let spec = ProcessSpec::fractional_noise(0.3f32, InnovationSpec::gaussian(0));
        let s = simulate(&spec, 256, None, 1).unwrap();
        assert_eq!(s.values.len(), 256);
        assert!(s.values.iter().all(|v| v.is_finite()));
    }
}
