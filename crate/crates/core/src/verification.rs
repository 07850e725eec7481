//! Numerical checks of the covariance machinery behind the memory results:
//! elementary symmetric sums, exact moments of squared linear processes,
//! Gauss's summation, closed-form autocovariances and the growth of partial
//! sums of antipersistent noise.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::farima::{
    autocovariance_f0d0, autocovariances_f0d0, filter_autocovariances, fractional_coefficients,
    FarimaSimulator, ProcessSpec,
};
use crate::innovations::{replication_seed, InnovationSpec, InnovationStream};
use crate::power_rank::{Estimate, Moments};
use crate::scalar::{field_count, CompensatedSum, Field, Real};
use crate::special::{gamma, gauss_2f1_at_one, hypergeometric_partial_sum, log_gamma};
use crate::transforms::Transform;

/// `p_m = Σ c_i^m` for `m = 0..=k` (`p_0` is the length).
pub fn power_sums<T: Field>(c: &[T], k: usize) -> Vec<T> {
    let mut p = vec![T::zero(); k + 1];
    p[0] = field_count(c.len() as u64);
    for x in c {
        let mut pow = x.clone();
        for pm in p.iter_mut().skip(1) {
            *pm = pm.clone() + pow.clone();
            pow = pow * x.clone();
        }
    }
    p
}

/// `e_0..=e_k` from power sums by Newton's identities
/// `j e_j = Σ_{i=1}^{j} (−1)^{i−1} e_{j−i} p_i`.
pub fn elementary_from_power_sums<T: Field>(p: &[T], k: usize) -> Vec<T> {
    let mut e = Vec::with_capacity(k + 1);
    e.push(T::one());
    for j in 1..=k {
        let mut s = T::zero();
        for i in 1..=j {
            let term = e[j - i].clone() * p[i].clone();
            s = if i % 2 == 1 { s + term } else { s - term };
        }
        e.push(s / field_count(j as u64));
    }
    e
}

/// `e_0(c), …, e_k(c)`.
pub fn elementary_symmetric<T: Field>(c: &[T], k: usize) -> Vec<T> {
    elementary_from_power_sums(&power_sums(c, k), k)
}

/// `e_k(c)` by enumerating every `k`-subset.
pub fn elementary_symmetric_brute<T: Field>(c: &[T], k: usize) -> T {
    fn go<T: Field>(c: &[T], k: usize, start: usize, acc: T, out: &mut T) {
        if k == 0 {
            *out = out.clone() + acc;
            return;
        }
        for i in start..c.len() {
            if c.len() - i < k {
                break;
            }
            go(c, k - 1, i + 1, acc.clone() * c[i].clone(), out);
        }
    }
    let mut out = T::zero();
    go(c, k, 0, T::one(), &mut out);
    out
}

/// Floating-point `e_j(c)`, `j ≤ k`, computed on `c / max|c|` and rescaled.
pub fn elementary_symmetric_scaled<T: Real>(c: &[T], k: usize) -> Vec<T> {
    let s = c.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if s == T::zero() {
        let mut e = vec![T::zero(); k + 1];
        e[0] = T::one();
        return e;
    }
    let mut p = vec![T::zero(); k + 1];
    p[0] = T::from_count(c.len());
    for m in 1..=k {
        let acc: CompensatedSum<T> = c.iter().map(|&x| (x / s).powi(m as i32)).collect();
        p[m] = acc.value();
    }
    elementary_from_power_sums(&p, k)
        .into_iter()
        .enumerate()
        .map(|(j, e)| e * s.powi(j as i32))
        .collect()
}

fn check_order(k: usize) -> Result<()> {
    if !(1..=6).contains(&k) {
        return Err(invalid(format!("order k must be in 1..=6, got {k}")));
    }
    Ok(())
}

/// `[K∞^{(k)}(0)]² · e_k(c)` with `c_i = a_i a_{i+h}`, `a` zero-padded.
pub fn uu_leading_covariance<T: Real>(a: &[T], k: usize, h: usize, k_k0: T) -> Result<T> {
    check_order(k)?;
    let c: Vec<T> = (0..a.len().saturating_sub(h)).map(|i| a[i] * a[i + h]).collect();
    Ok(k_k0 * k_k0 * elementary_symmetric_scaled(&c, k)[k])
}

/// Leading covariance for the untruncated FARIMA(0, d, 0) filter. The slowly
/// converging `p_1 = Σ a_i a_{i+h}` is replaced by its closed form `γ(h)`;
/// higher power sums use `m` coefficients.
pub fn uu_leading_covariance_f0d0(d: f64, k: usize, h: usize, k_k0: f64, m: usize) -> Result<f64> {
    check_order(k)?;
    let a = fractional_coefficients(d, m + h)?;
    let mut p = vec![0.0; k + 1];
    p[0] = m as f64;
    p[1] = autocovariance_f0d0(d, h)?;
    for (j, pj) in p.iter_mut().enumerate().skip(2) {
        let acc: CompensatedSum<f64> = (0..m).map(|i| (a[i] * a[i + h]).powi(j as i32)).collect();
        *pj = acc.value();
    }
    Ok(k_k0 * k_k0 * elementary_from_power_sums(&p, k)[k])
}

/// `Cov(X_n², X_{n+h}²) = 2(Σ a_i a_{i+h})² + κ₄ Σ a_i² a_{i+h}²` for unit-variance innovations.
pub fn square_transform_cov_oracle<T: Real>(a: &[T], h: usize, kappa4: T) -> T {
    let pairs = a.len().saturating_sub(h);
    let s1: CompensatedSum<T> = (0..pairs).map(|i| a[i] * a[i + h]).collect();
    let s2: CompensatedSum<T> = (0..pairs).map(|i| (a[i] * a[i + h]).powi(2)).collect();
    let two = T::lit(2.0);
    two * s1.value() * s1.value() + kappa4 * s2.value()
}

const MC_BLOCK: usize = 1 << 16;

/// Monte-Carlo `Cov(K(X_n), K(X_{n+h}))` for the finite filter `a`. Each
/// replication draws fresh innovations, so pairs are independent; block `b`
/// of replications uses seed `seed + b`.
pub fn mc_covariance<T: Real>(
    t: &Transform<T>,
    a: &[T],
    innovation: &InnovationSpec,
    h: usize,
    reps: usize,
    seed: u64,
) -> Result<Estimate<f64>> {
    if a.is_empty() || reps < 2 {
        return Err(invalid("need a non-empty filter and at least two replications"));
    }
    if let (Some(deg), Some(nu)) = (t.degree(), innovation.law.degrees_of_freedom()) {
        if deg >= 2 && 2.0 * deg as f64 >= nu {
            return Err(Error::Domain(format!(
                "{t} has no finite second moment under t({nu}) innovations"
            )));
        }
    }
    let m = a.len();
    let blocks = reps.div_ceil(MC_BLOCK);
    let run = |b: usize, f: &(dyn Fn(T, T) -> f64 + Sync)| -> Result<Moments<f64>> {
        let mut stream = InnovationStream::new(&innovation.with_seed(replication_seed(seed, b as u64)))?;
        let mut buf = vec![T::zero(); m + h];
        let mut mom = Moments::empty();
        for _ in 0..MC_BLOCK.min(reps - b * MC_BLOCK) {
            stream.fill(&mut buf);
            let x0 = a.iter().enumerate().fold(T::zero(), |s, (i, &ai)| s + ai * buf[m - 1 - i]);
            let xh = a.iter().enumerate().fold(T::zero(), |s, (i, &ai)| s + ai * buf[m - 1 + h - i]);
            mom.push(f(t.eval(x0), t.eval(xh)));
        }
        Ok(mom)
    };
    let collect = |f: &(dyn Fn(T, T) -> f64 + Sync)| -> Result<Moments<f64>> {
        Ok((0..blocks)
            .into_par_iter()
            .map(|b| run(b, f))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(Moments::empty(), Moments::merge))
    };
    let m0 = collect(&|k0, _| k0.to_f64_lossy())?.mean;
    let mh = collect(&|_, kh| kh.to_f64_lossy())?.mean;
    let u = collect(&|k0, kh| (k0.to_f64_lossy() - m0) * (kh.to_f64_lossy() - mh))?;
    if !u.mean.is_finite() || !u.variance().is_finite() {
        return Err(Error::NonFinite(format!("covariance of {t} is not finite on this sample")));
    }
    Ok(Estimate {
        value: u.mean,
        std_error: u.std_error(),
    })
}

/// How a check compares its computed value with the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Comparison {
    Absolute(f64),
    Relative(f64),
    /// Computed must exceed the reference.
    Above,
    /// Computed must fall below the reference.
    Below,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub parameters: String,
    pub computed: f64,
    pub reference: f64,
    pub comparison: Comparison,
    pub passed: bool,
    pub note: String,
}

impl CheckReport {
    pub fn new(
        name: impl Into<String>,
        parameters: impl Into<String>,
        computed: f64,
        reference: f64,
        comparison: Comparison,
    ) -> Self {
        let passed = match comparison {
            Comparison::Absolute(tol) => (computed - reference).abs() <= tol,
            Comparison::Relative(tol) => (computed - reference).abs() <= tol * reference.abs(),
            Comparison::Above => computed > reference,
            Comparison::Below => computed < reference,
        };
        Self {
            name: name.into(),
            parameters: parameters.into(),
            computed,
            reference,
            comparison,
            passed,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    fn failed(name: &str, parameters: &str, err: &Error) -> Self {
        Self {
            name: name.into(),
            parameters: parameters.into(),
            computed: f64::NAN,
            reference: f64::NAN,
            comparison: Comparison::Absolute(0.0),
            passed: false,
            note: format!("error: {err}"),
        }
    }

    fn tolerance_text(&self) -> String {
        match self.comparison {
            Comparison::Absolute(t) => format!("abs {t:.3e}"),
            Comparison::Relative(t) => format!("rel {t:.3e}"),
            Comparison::Above => "> ref".into(),
            Comparison::Below => "< ref".into(),
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} [{}] computed={:.12e} reference={:.12e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.parameters,
            self.computed,
            self.reference,
            self.tolerance_text()
        )?;
        if !self.note.is_empty() {
            write!(f, " {}", self.note)?;
        }
        Ok(())
    }
}

pub fn render_table(reports: &[CheckReport]) -> String {
    let name_w = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(5);
    let par_w = reports.iter().map(|r| r.parameters.chars().count()).max().unwrap_or(4).max(10);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<6} {:<name_w$} {:<par_w$} {:>22} {:>22} {:<12} note",
        "status", "check", "parameters", "computed", "reference", "tolerance"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<6} {:<name_w$} {:<par_w$} {:>22.12e} {:>22.12e} {:<12} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.parameters,
            r.computed,
            r.reference,
            r.tolerance_text(),
            r.note
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(reports: &[CheckReport]) -> String {
    let mut out = String::from("check,parameters,computed,reference,tolerance,passed,note\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{},{},{}",
            csv_field(&r.name),
            csv_field(&r.parameters),
            r.computed,
            r.reference,
            csv_field(&r.tolerance_text()),
            r.passed,
            csv_field(&r.note)
        );
    }
    out
}

/// `f(x) = 3Γ(3x)Γ(x) + xΓ²(x)Γ(2x) − 6Γ²(2x)`.
pub fn f_positivity_function(x: f64) -> Result<f64> {
    let g = |v: f64| gamma(v);
    let (g1, g2, g3) = (g(x)?, g(2.0 * x)?, g(3.0 * x)?);
    Ok(3.0 * g3 * g1 + x * g1 * g1 * g2 - 6.0 * g2 * g2)
}

/// Minimum of `f` over `grid_points` equispaced points of `[1e−4, 1 − 1e−4]`,
/// plus the closed-form values `f(1/2) = 2π − 6` and `f(1) = 1`.
pub fn check_f_positivity(grid_points: usize) -> Result<Vec<CheckReport>> {
    if grid_points < 2 {
        return Err(invalid("grid needs at least two points"));
    }
    let eps = 1e-4;
    let step = (1.0 - 2.0 * eps) / (grid_points - 1) as f64;
    let values = (0..grid_points)
        .into_par_iter()
        .map(|i| {
            let x = eps + step * i as f64;
            f_positivity_function(x).map(|v| (x, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let (xmin, fmin) = values
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let params = format!("grid={grid_points} on [1e-4, 1-1e-4]");
    Ok(vec![
        CheckReport::new("f_min_above_quarter", params, fmin, 0.25, Comparison::Above)
            .with_note(format!("argmin x={xmin:.6}")),
        CheckReport::new(
            "f_half",
            "x=0.5",
            f_positivity_function(0.5)?,
            2.0 * std::f64::consts::PI - 6.0,
            Comparison::Absolute(1e-12),
        ),
        CheckReport::new("f_one", "x=1", f_positivity_function(1.0)?, 1.0, Comparison::Absolute(1e-12)),
    ])
}

/// `Γ(h+1)Γ(1−2d) / (Γ(h+1−d)Γ(1−d))`, the Gauss sum of `₂F₁(d, h+d; h+1; 1)`.
pub fn gauss_reduction_closed_form(d: f64, h: usize) -> Result<f64> {
    let hf = h as f64;
    Ok((log_gamma(hf + 1.0)? + log_gamma(1.0 - 2.0 * d)? - log_gamma(hf + 1.0 - d)? - log_gamma(1.0 - d)?).exp())
}

/// For `h = 1..=h_max`: Gauss's formula against the closed form (1e−12) and
/// the `terms`-term partial sum of the series against the closed form (1e−6).
pub fn check_gauss_reduction(d: f64, h_max: usize, terms: usize) -> Result<Vec<CheckReport>> {
    if !(d > -1.0 && d < 0.0) {
        return Err(invalid(format!("d must lie in (−1, 0), got {d}")));
    }
    let rows = (1..=h_max)
        .into_par_iter()
        .map(|h| -> Result<(f64, f64)> {
            let hf = h as f64;
            let closed = gauss_reduction_closed_form(d, h)?;
            let gauss = gauss_2f1_at_one(d, hf + d, hf + 1.0)?;
            let series = hypergeometric_partial_sum(d, hf + d, hf + 1.0, 1.0, terms)?;
            Ok(((gauss - closed).abs(), (series - closed).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_gauss = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_series = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let params = format!("d={d} h=1..{h_max}");
    Ok(vec![
        CheckReport::new("gauss_sum_identity", params.clone(), max_gauss, 0.0, Comparison::Absolute(1e-12)),
        CheckReport::new(
            "gauss_sum_vs_series",
            format!("{params} terms={terms}"),
            max_series,
            0.0,
            Comparison::Absolute(1e-6),
        ),
    ])
}

/// Closed-form `γ(h)` against `Σ_{i<M} a_i a_{i+h}` plus the power-law tail
/// `a_M a_{M+h} M^{1−d}(M+h)^{1−d} (M − 1/2 + h/2)^{2d−1} / (1 − 2d)`.
/// The largest relative gap of the raw truncated sum is reported in the note.
pub fn check_autocovariance_sum(d: f64, h_max: usize, m: usize) -> Result<CheckReport> {
    let a = fractional_coefficients(d, m + h_max + 1)?;
    let gamma_h = autocovariances_f0d0(d, h_max)?;
    let mut worst = 0.0f64;
    let mut worst_raw = 0.0f64;
    for (h, &g) in gamma_h.iter().enumerate() {
        let raw: CompensatedSum<f64> = (0..m).map(|i| a[i] * a[i + h]).collect();
        let raw = raw.value();
        let (mf, mh) = (m as f64, (m + h) as f64);
        let tail = a[m] * a[m + h] * mf.powf(1.0 - d) * mh.powf(1.0 - d)
            * (mf - 0.5 + h as f64 / 2.0).powf(2.0 * d - 1.0)
            / (1.0 - 2.0 * d);
        worst = worst.max(((raw + tail) - g).abs() / g.abs());
        worst_raw = worst_raw.max((raw - g).abs() / g.abs());
    }
    Ok(CheckReport::new(
        "acov_closed_vs_coefficient_sum",
        format!("d={d} h=0..{h_max} M={m}"),
        worst,
        0.0,
        Comparison::Absolute(1e-4),
    )
    .with_note(format!("max relative gap without tail term {worst_raw:.3e}")))
}

/// Newton's identities against subset enumeration in exact rational
/// arithmetic, for every length up to `max_len` and order up to `max_k`.
pub fn check_newton_identities(max_len: usize, max_k: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0usize;
    let mut cases = 0usize;
    for len in 1..=max_len {
        let c: Vec<BigRational> = (0..len)
            .map(|_| {
                let num: i64 = rng.random_range(-9..=9);
                let den: i64 = rng.random_range(1..=9);
                BigRational::new(BigInt::from(num), BigInt::from(den))
            })
            .collect();
        let e = elementary_symmetric(&c, max_k);
        for (k, ek) in e.iter().enumerate().skip(1) {
            cases += 1;
            if *ek != elementary_symmetric_brute(&c, k) {
                mismatches += 1;
            }
        }
    }
    CheckReport::new(
        "newton_vs_enumeration_exact",
        format!("len<={max_len} k<={max_k} rational"),
        mismatches as f64,
        0.0,
        Comparison::Absolute(0.0),
    )
    .with_note(format!("{cases} cases"))
}

fn within_sigmas(name: &str, params: String, est: Estimate<f64>, reference: f64, sigmas: f64) -> CheckReport {
    let tol = sigmas * est.std_error;
    CheckReport::new(name, params, est.value, reference, Comparison::Absolute(tol))
        .with_note(format!("se={:.3e} ({sigmas} sigma)", est.std_error))
}

/// Monte-Carlo covariances of squared and linear filters against the exact
/// moment formula and the leading/remainder split.
pub fn check_square_transform_mc(draws: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let gauss = InnovationSpec::gaussian(0);
    let t10 = InnovationSpec::student_t(10.0, 0);
    let short = [1.0, 0.5];
    let long = fractional_coefficients(0.3, 30)?;
    let sq = Transform::power(2);

    let mut out = Vec::new();
    let est = mc_covariance(&sq, &short, &gauss, 0, draws, seed)?;
    out.push(within_sigmas(
        "square_cov_gaussian",
        format!("a=(1,0.5) h=0 draws={draws}"),
        est,
        square_transform_cov_oracle(&short, 0, 0.0),
        3.0,
    ));
    let k4 = t10.excess_kurtosis().expect("finite kurtosis");
    let est = mc_covariance(&sq, &short, &t10, 1, draws, seed + 1)?;
    out.push(within_sigmas(
        "square_cov_t10",
        format!("a=(1,0.5) h=1 kappa4={k4} draws={draws}"),
        est,
        square_transform_cov_oracle(&short, 1, k4),
        3.0,
    ));
    let est = mc_covariance(&Transform::identity(), &short, &t10, 1, draws, seed + 2)?;
    out.push(within_sigmas(
        "linear_cov",
        format!("a=(1,0.5) h=1 draws={draws}"),
        est,
        0.5,
        3.0,
    ));
    for (label, a, h, s) in [("a=(1,0.5)", &short[..], 0usize, 3u64), ("a=(1,0.5)", &short[..], 1, 4), ("a=frac(0.3,30)", &long[..], 2, 5)] {
        let est = mc_covariance(&sq, a, &gauss, h, draws, seed + s)?;
        let uu = uu_leading_covariance(a, 2, h, 2.0)?;
        let remainder: f64 = (0..a.len() - h).map(|i| (a[i] * a[i + h]).powi(2)).sum::<f64>() * 2.0;
        out.push(within_sigmas(
            "square_cov_minus_leading",
            format!("{label} h={h} gaussian draws={draws}"),
            Estimate {
                value: est.value - uu,
                std_error: est.std_error,
            },
            remainder,
            3.0,
        ));
    }
    Ok(out)
}

/// `D(p) = Var(Y_1 + … + Y_p)` for `p = 0..=p_max` from `γ(0..p_max)`.
pub fn partial_sum_variances(gamma: &[f64], p_max: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(p_max + 1);
    d.push(0.0);
    let mut g1 = CompensatedSum::new();
    let mut acc = CompensatedSum::new();
    for p in 1..=p_max {
        // D(p) − D(p−1) = γ(0) + 2 Σ_{h=1}^{p−1} γ(h)
        if p >= 2 {
            g1.add(gamma[p - 1]);
        }
        acc.add(gamma[0] + 2.0 * g1.value());
        d.push(acc.value());
    }
    d
}

/// `Cov(Z_n, Z_m)` with `Z_n = X_n + X_{n−1} = S_{n−1} + S_n`, `S_p = Y_1 + … + Y_p`.
pub fn zn_covariance(d_var: &[f64], n: usize, m: usize) -> f64 {
    let cov_s = |p: usize, q: usize| (d_var[p] + d_var[q] - d_var[p.abs_diff(q)]) / 2.0;
    let mut s = 0.0;
    for p in [n - 1, n] {
        for q in [m - 1, m] {
            s += cov_s(p, q);
        }
    }
    s
}

/// `D(p) = −2p Σ_{h≥p} γ(h) − 2 Σ_{h<p} h γ(h)`, valid because the spectral
/// density of `Y` vanishes at zero. The infinite sum stops at `horizon` and
/// adds the power-law tail; returns `(D(p), tail term)`.
pub fn partial_sum_variance_tail_form(gamma: &[f64], p: usize) -> (f64, f64) {
    let horizon = gamma.len() - 1;
    let head: CompensatedSum<f64> = gamma[p..].iter().copied().collect();
    let hf = horizon as f64;
    // γ(h) ≈ C h^{2d−1} with the exponent read off the last two values
    let slope = (gamma[horizon] / gamma[horizon - 1]).ln() / (hf / (hf - 1.0)).ln();
    let c = gamma[horizon] / hf.powf(slope);
    let expo = slope + 1.0;
    let tail = -c * (hf + 0.5).powf(expo) / expo;
    let weighted: CompensatedSum<f64> = (1..p).map(|h| h as f64 * gamma[h]).collect();
    let pf = p as f64;
    (-2.0 * pf * (head.value() + tail) - 2.0 * weighted.value(), 2.0 * pf * tail.abs())
}

/// Growth of `Var(Z_n)` and `Corr(Z_n, Z_{n+h}) → 1` for the Type-I process
/// with parameter `d`, whose increments are FARIMA(0, d − 1, 0).
pub fn check_var_zn_growth(
    d: f64,
    n_list: &[usize],
    h: usize,
    horizon: usize,
    mc_reps: usize,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    if !(d > 0.5 && d < 1.0) {
        return Err(invalid(format!("d must lie in (1/2, 1), got {d}")));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(invalid("n list must be non-empty and positive"));
    }
    let dy = d - 1.0;
    let n_max = *n_list.iter().max().expect("non-empty");
    let gamma = autocovariances_f0d0(dy, horizon.max(n_max + h + 1))?;
    let dv = partial_sum_variances(&gamma, n_max + h);
    let mut out = vec![CheckReport::new(
        "var_z1_is_gamma0",
        format!("d={d}"),
        zn_covariance(&dv, 1, 1),
        gamma[0],
        Comparison::Absolute(1e-15),
    )];

    let mut vars = Vec::new();
    let mut corrs = Vec::new();
    let mut worst_route = 0.0f64;
    let mut worst_tail = 0.0f64;
    for &n in n_list {
        let v = zn_covariance(&dv, n, n);
        let vh = zn_covariance(&dv, n + h, n + h);
        let c = zn_covariance(&dv, n, n + h);
        vars.push(v);
        corrs.push(c / (v * vh).sqrt());
        for p in [n - 1, n] {
            if p == 0 {
                continue;
            }
            let (alt, tail) = partial_sum_variance_tail_form(&gamma, p);
            worst_route = worst_route.max((alt - dv[p]).abs() / dv[p]);
            worst_tail = worst_tail.max(tail / dv[p]);
        }
    }
    let ns = n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";");
    out.push(
        CheckReport::new(
            "var_partial_sum_two_routes",
            format!("d={d} n={ns} horizon={horizon}"),
            worst_route,
            0.0,
            Comparison::Absolute(1e-6),
        )
        .with_note(format!("relative tail term up to {worst_tail:.3e}")),
    );
    let growth = vars.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    out.push(
        CheckReport::new("var_zn_increasing", format!("d={d} n={ns}"), growth, 1.0, Comparison::Above)
            .with_note(format!("Var(Z_n)={}", fmt_list(&vars))),
    );
    let last = *corrs.last().expect("non-empty");
    out.push(
        CheckReport::new("corr_zn_near_one", format!("d={d} n={n_max} h={h}"), last, 0.99, Comparison::Above)
            .with_note(format!("Corr={}", fmt_list(&corrs))),
    );
    if corrs.len() > 1 {
        let shrink = corrs
            .windows(2)
            .map(|w| (1.0 - w[1]) / (1.0 - w[0]))
            .fold(0.0, f64::max);
        out.push(CheckReport::new(
            "corr_gap_decreasing",
            format!("d={d} n={ns} h={h}"),
            shrink,
            1.0,
            Comparison::Below,
        ));
    }
    if mc_reps > 1 {
        out.push(mc_var_zn(d, n_max, mc_reps, seed)?);
    }
    Ok(out)
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(";")
}

/// Sample `Var(Z_n)` over independent simulated Type-I paths against the
/// partial-sum formula evaluated with the simulator's own truncated filter.
fn mc_var_zn(d: f64, n: usize, reps: usize, seed: u64) -> Result<CheckReport> {
    let spec = ProcessSpec::type_one(d, InnovationSpec::gaussian(0));
    let sim = FarimaSimulator::new(&spec, n, None)?;
    let gamma = filter_autocovariances(sim.coefficients(), n);
    let dv = partial_sum_variances(&gamma, n);
    let want = zn_covariance(&dv, n, n);
    let zs = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let x = sim.generate(replication_seed(seed, r))?.values;
            Ok(x[n - 1] + if n >= 2 { x[n - 2] } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;
    // zero-mean innovations: the known mean is used
    let var = zs.iter().map(|z| z * z).sum::<f64>() / reps as f64;
    let se = want * (2.0 / reps as f64).sqrt();
    Ok(CheckReport::new(
        "var_zn_monte_carlo",
        format!("d={d} n={n} reps={reps} M={}", sim.truncation()),
        var,
        want,
        Comparison::Absolute(3.0 * se),
    )
    .with_note(format!("se={se:.3e} (3 sigma)")))
}

/// Sizes of the verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub f_grid: usize,
    pub gauss_terms: usize,
    pub gauss_h_max: usize,
    pub gauss_d: Vec<f64>,
    pub acov_m: usize,
    pub acov_h_max: usize,
    pub acov_d: Vec<f64>,
    pub newton_max_len: usize,
    pub newton_max_k: usize,
    pub mc_draws: usize,
    pub zn_d: f64,
    pub zn_n: Vec<usize>,
    pub zn_h: usize,
    pub zn_horizon: usize,
    pub zn_mc_reps: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            f_grid: 100_000,
            gauss_terms: 1_000_000,
            gauss_h_max: 20,
            gauss_d: (1..=9).map(|i| -(i as f64) / 10.0).collect(),
            acov_m: 10_000_000,
            acov_h_max: 20,
            acov_d: vec![-0.4, -0.2, 0.2, 0.4],
            newton_max_len: 20,
            newton_max_k: 4,
            mc_draws: 10_000_000,
            zn_d: 0.75,
            zn_n: vec![100, 1000, 10_000],
            zn_h: 5,
            zn_horizon: 10_000_000,
            zn_mc_reps: 1000,
            seed: 20_240_601,
        }
    }
}

impl VerifyConfig {
    /// Reduced sizes for smoke runs.
    pub fn quick() -> Self {
        Self {
            f_grid: 2_000,
            gauss_terms: 100_000,
            gauss_h_max: 5,
            gauss_d: vec![-0.2, -0.7],
            acov_m: 200_000,
            acov_h_max: 5,
            acov_d: vec![-0.2, 0.2],
            newton_max_len: 8,
            newton_max_k: 3,
            mc_draws: 200_000,
            zn_d: 0.75,
            zn_n: vec![100, 1000, 10_000],
            zn_h: 5,
            zn_horizon: 1_000_000,
            zn_mc_reps: 0,
            seed: 7,
        }
    }
}

type CheckJob<'a> = Box<dyn Fn() -> Result<Vec<CheckReport>> + Send + Sync + 'a>;

/// Every check, run concurrently; report order is fixed.
pub fn run_all(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let mut jobs: Vec<(String, CheckJob)> = Vec::new();
    jobs.push(("f_positivity".into(), Box::new(|| check_f_positivity(cfg.f_grid))));
    for &d in &cfg.gauss_d {
        jobs.push((
            format!("gauss_reduction d={d}"),
            Box::new(move || check_gauss_reduction(d, cfg.gauss_h_max, cfg.gauss_terms)),
        ));
    }
    for &d in &cfg.acov_d {
        jobs.push((
            format!("acov d={d}"),
            Box::new(move || check_autocovariance_sum(d, cfg.acov_h_max, cfg.acov_m).map(|r| vec![r])),
        ));
    }
    jobs.push((
        "newton".into(),
        Box::new(|| Ok(vec![check_newton_identities(cfg.newton_max_len, cfg.newton_max_k, cfg.seed)])),
    ));
    jobs.push((
        "square_mc".into(),
        Box::new(|| check_square_transform_mc(cfg.mc_draws, cfg.seed)),
    ));
    jobs.push((
        "var_zn".into(),
        Box::new(|| check_var_zn_growth(cfg.zn_d, &cfg.zn_n, cfg.zn_h, cfg.zn_horizon, cfg.zn_mc_reps, cfg.seed)),
    ));
    jobs.par_iter()
        .map(|(label, job)| job().unwrap_or_else(|e| vec![CheckReport::failed(label, "", &e)]))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn elementary_examples() {
        let c = [1.0f64, 2.0, 3.0];
        let e = elementary_symmetric(&c, 3);
        assert_eq!(e, vec![1.0, 6.0, 11.0, 6.0]);
        assert_eq!(elementary_symmetric_brute(&c, 2), 11.0);
        assert_eq!(elementary_symmetric_brute(&c, 4), 0.0);
    }

    #[test]
    fn uu_examples() {
        // c = (1, 2, 3) arises from a = (1, 1, 2, 1.5) at h = 1
        let a = [1.0f64, 1.0, 2.0, 1.5];
        let v = uu_leading_covariance(&a, 2, 1, 3.0).unwrap();
        assert!((v - 9.0 * 11.0).abs() < 1e-12);
        let a = [0.7f64, -0.2, 0.4, 0.9];
        let v = uu_leading_covariance(&a, 1, 2, 2.0).unwrap();
        assert!((v - 4.0 * (0.7 * 0.4 - 0.2 * 0.9)).abs() < 1e-12);
        assert_eq!(uu_leading_covariance(&[1.0, 0.6], 2, 1, 1.0).unwrap(), 0.0);
        assert!(uu_leading_covariance(&[1.0, 0.6], 7, 0, 1.0).is_err());
        assert_eq!(uu_leading_covariance(&[1.0, 0.6], 3, 0, 1.0).unwrap(), 0.0);
        assert_eq!(uu_leading_covariance(&[1.0, 0.6], 1, 5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn square_oracle_examples() {
        assert_eq!(square_transform_cov_oracle(&[1.0, 0.5], 0, 0.0), 3.125);
        assert_eq!(square_transform_cov_oracle(&[1.0], 1, 0.0), 0.0);
        assert_eq!(square_transform_cov_oracle(&[1.0, 0.5], 1, 1.0), 0.75);
    }

    #[test]
    fn scaled_elementary_matches_enumeration() {
        for scale in [1e-70, 1.0, 1e70] {
            let c: Vec<f64> = (1..=12).map(|i| scale * (i as f64 - 6.5)).collect();
            let e = elementary_symmetric_scaled(&c, 4);
            for k in 1..=4 {
                let b = elementary_symmetric_brute(&c, k);
                assert!((e[k] - b).abs() <= 1e-12 * b.abs().max(scale.powi(k as i32)), "scale {scale} k {k}");
            }
        }
    }

    #[test]
    fn newton_matches_enumeration_in_floats() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for len in 1..=20 {
            let c: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let e = elementary_symmetric(&c, 4);
            for k in 1..=4 {
                let b = elementary_symmetric_brute(&c, k);
                assert!((e[k] - b).abs() < 1e-12 * b.abs().max(1.0), "len {len} k {k}");
            }
        }
    }

    #[test]
    fn exact_newton_check_passes() {
        let r = check_newton_identities(20, 4, 11);
        assert!(r.passed, "{r}");
        let q: Vec<Ratio<i64>> = vec![Ratio::new(1, 2), Ratio::new(-2, 3), Ratio::new(5, 7)];
        assert_eq!(elementary_symmetric(&q, 2)[2], elementary_symmetric_brute(&q, 2));
    }

    #[test]
    fn f_function_values() {
        let v = f_positivity_function(0.5).unwrap();
        assert!((v - (2.0 * std::f64::consts::PI - 6.0)).abs() < 1e-12);
        assert!((f_positivity_function(1.0).unwrap() - 1.0).abs() < 1e-12);
        let reps = check_f_positivity(5000).unwrap();
        assert!(reps.iter().all(|r| r.passed), "{reps:?}");
    }

    #[test]
    fn gauss_reduction_examples() {
        let r = check_gauss_reduction(-0.3, 1, 1_000_000).unwrap();
        assert!(r.iter().all(|r| r.passed), "{r:?}");
        let r = check_gauss_reduction(-0.5 + 1e-6, 5, 1_000_000).unwrap();
        assert!(r[1].computed < 1e-5, "{r:?}");
        let r = check_gauss_reduction(-0.9, 2, 1_000_000).unwrap();
        assert!(r[1].computed < 1e-6, "{r:?}");
        assert!(check_gauss_reduction(0.2, 2, 10).is_err());
    }

    #[test]
    fn acov_check_small() {
        for d in [-0.2, 0.2] {
            let r = check_autocovariance_sum(d, 5, 200_000).unwrap();
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn var_zn_examples() {
        let reps = check_var_zn_growth(0.75, &[100, 1000, 10_000], 5, 2_000_000, 0, 0).unwrap();
        for r in &reps {
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn var_zn_matches_simulation() {
        let r = mc_var_zn(0.75, 300, 2000, 5).unwrap();
        assert!(r.passed, "{r}");
    }

    #[test]
    fn mc_covariance_examples() {
        let e = mc_covariance(&Transform::power(2), &[1.0, 0.5], &InnovationSpec::gaussian(0), 0, 1_000_000, 1).unwrap();
        assert!((e.value - 3.125).abs() < 3.0 * e.std_error, "{e:?}");
        let a = [1.0, 0.4, -0.3];
        let e = mc_covariance(&Transform::identity(), &a, &InnovationSpec::student_t(10.0, 0), 1, 1_000_000, 2).unwrap();
        assert!((e.value - (0.4 - 0.12)).abs() < 3.0 * e.std_error, "{e:?}");
        assert!(mc_covariance(&Transform::power(3), &a, &InnovationSpec::student_t(5.0, 0), 0, 100, 2).is_err());
    }

    #[test]
    fn leading_term_scales_as_power_law() {
        // d = 0.4, k = 2: UU(h) ~ C h^{2(2d−1)}
        let ratios: Vec<f64> = [100usize, 1000, 10_000]
            .iter()
            .map(|&h| uu_leading_covariance_f0d0(0.4, 2, h, 1.0, 1_000_000).unwrap() / (h as f64).powf(2.0 * (0.8 - 1.0)))
            .collect();
        assert!(ratios.iter().all(|r| *r > 0.0));
        for w in ratios.windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.1, "{ratios:?}");
        }
    }

    #[test]
    fn quick_suite_passes() {
        let reps = run_all(&VerifyConfig::quick());
        for r in &reps {
            assert!(r.passed, "{r}");
        }
        let csv = render_csv(&reps);
        assert!(csv.starts_with("check,parameters"));
        assert_eq!(csv.lines().count(), reps.len() + 1);
        assert!(render_table(&reps).contains("PASS"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn newton_exact_on_random_rationals(nums in prop::collection::vec((-20i64..20, 1i64..12), 1..12), k in 1usize..5) {
            let c: Vec<BigRational> = nums.iter().map(|&(n, d)| BigRational::new(n.into(), d.into())).collect();
            let e = elementary_symmetric(&c, k);
            prop_assert_eq!(e[k].clone(), elementary_symmetric_brute(&c, k));
        }
    }
}
