//! Seedable innovation streams.
//!
//! Every stream is driven by a ChaCha8 generator keyed by a 64-bit seed, so a
//! given [`InnovationSpec`] always yields the same draws. Monte-Carlo
//! replication `r` uses seed `base + r` (see [`replication_seed`]).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::special::log_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum InnovationLaw {
    Gaussian,
    StudentT { nu: f64 },
    /// `|T|` with `T ~ t(ν)`: nonnegative, nonzero mean.
    AbsStudentT { nu: f64 },
}

impl InnovationLaw {
    pub fn degrees_of_freedom(&self) -> Option<f64> {
        match *self {
            InnovationLaw::Gaussian => None,
            InnovationLaw::StudentT { nu } | InnovationLaw::AbsStudentT { nu } => Some(nu),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            InnovationLaw::Gaussian => "gaussian",
            InnovationLaw::StudentT { .. } => "t",
            InnovationLaw::AbsStudentT { .. } => "abs-t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnovationSpec {
    #[serde(flatten)]
    pub law: InnovationLaw,
    /// Rescale so the emitted stream has `E ε² = 1`.
    pub standardize: bool,
    pub seed: u64,
}

impl InnovationSpec {
    pub fn gaussian(seed: u64) -> Self {
        Self {
            law: InnovationLaw::Gaussian,
            standardize: true,
            seed,
        }
    }

    pub fn student_t(nu: f64, seed: u64) -> Self {
        Self {
            law: InnovationLaw::StudentT { nu },
            standardize: true,
            seed,
        }
    }

    pub fn abs_student_t(nu: f64, seed: u64) -> Self {
        Self {
            law: InnovationLaw::AbsStudentT { nu },
            standardize: true,
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(nu) = self.law.degrees_of_freedom() {
            if !(nu > 0.0) || !nu.is_finite() {
                return Err(invalid(format!("degrees of freedom must be positive, got {nu}")));
            }
            if self.standardize && nu <= 2.0 {
                return Err(invalid(format!(
                    "cannot standardize t({nu}): variance is infinite for ν ≤ 2"
                )));
            }
        }
        Ok(())
    }

    /// Multiplier applied to raw draws.
    pub fn scale(&self) -> f64 {
        match (self.standardize, self.law.degrees_of_freedom()) {
            (true, Some(nu)) => ((nu - 2.0) / nu).sqrt(),
            _ => 1.0,
        }
    }

    pub fn has_finite_fourth_moment(&self) -> bool {
        self.law.degrees_of_freedom().is_none_or(|nu| nu > 4.0)
    }

    /// `E ε²` of the emitted stream.
    pub fn second_moment(&self) -> f64 {
        match self.law.degrees_of_freedom() {
            None => 1.0,
            Some(nu) if nu > 2.0 => self.scale().powi(2) * nu / (nu - 2.0),
            Some(_) => f64::INFINITY,
        }
    }

    pub fn mean(&self) -> f64 {
        match self.law {
            InnovationLaw::AbsStudentT { nu } => self.scale() * abs_student_t_mean(nu),
            _ => 0.0,
        }
    }

    /// `E ε⁴ / (E ε²)² − 3` for the symmetric laws; scale-free.
    pub fn excess_kurtosis(&self) -> Option<f64> {
        match self.law {
            InnovationLaw::Gaussian => Some(0.0),
            InnovationLaw::StudentT { nu } if nu > 4.0 => Some(6.0 / (nu - 4.0)),
            _ => None,
        }
    }
}

/// `E|T|` for `T ~ t(ν)`, `ν > 1`.
pub fn abs_student_t_mean(nu: f64) -> f64 {
    if nu <= 1.0 {
        return f64::INFINITY;
    }
    let ln = log_gamma((nu + 1.0) / 2.0).unwrap() - log_gamma(nu / 2.0).unwrap();
    2.0 * nu.sqrt() * ln.exp() / (std::f64::consts::PI.sqrt() * (nu - 1.0))
}

pub fn replication_seed(base: u64, replication: u64) -> u64 {
    base.wrapping_add(replication)
}

/// Single-owner generator for one innovation stream.
pub struct InnovationStream {
    rng: ChaCha8Rng,
    law: InnovationLaw,
    student: Option<StudentT<f64>>,
    scale: f64,
}

impl InnovationStream {
    pub fn new(spec: &InnovationSpec) -> Result<Self> {
        spec.validate()?;
        let student = match spec.law.degrees_of_freedom() {
            Some(nu) => Some(
                StudentT::new(nu).map_err(|e| invalid(format!("t({nu}) innovations: {e}")))?,
            ),
            None => None,
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            law: spec.law,
            student,
            scale: spec.scale(),
        })
    }

    /// Independent stream `id` under the same seed, for parallel chunks.
    pub fn substream(spec: &InnovationSpec, id: u64) -> Result<Self> {
        let mut s = Self::new(spec)?;
        s.rng.set_stream(id);
        Ok(s)
    }

    #[inline]
    pub fn next_value(&mut self) -> f64 {
        let raw = match (self.law, &self.student) {
            (InnovationLaw::Gaussian, _) => StandardNormal.sample(&mut self.rng),
            (InnovationLaw::StudentT { .. }, Some(t)) => t.sample(&mut self.rng),
            (InnovationLaw::AbsStudentT { .. }, Some(t)) => t.sample(&mut self.rng).abs(),
            _ => unreachable!("student-t law without a sampler"),
        };
        self.scale * raw
    }

    pub fn fill<T: Real>(&mut self, out: &mut [T]) {
        for slot in out.iter_mut() {
            *slot = T::lit(self.next_value());
        }
    }

    /// Uniform draw on `[0, 1)` from the same underlying stream.
    pub fn next_uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// `n` i.i.d. draws from the law in `spec`; bit-identical for equal inputs.
pub fn draw_stream<T: Real>(spec: &InnovationSpec, n: usize) -> Result<Vec<T>> {
    if n == 0 {
        return Err(invalid("innovation stream length must be at least 1"));
    }
    let mut stream = InnovationStream::new(spec)?;
    let mut out = vec![T::zero(); n];
    stream.fill(&mut out);
    Ok(out)
}
