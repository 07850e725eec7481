//! Monte-Carlo experiments over (model, transform) grids and the preset
//! tables of the simulation study.
//!
//! Config grammar (`#` starts a comment, keys are case-insensitive):
//!
//! ```text
//! [experiment]
//! n = 2000
//! replications = 200
//! seed = 1
//! bandwidth = default          # or a fixed count
//! regressor = log-sin          # or log-lambda
//! truncation = 4000            # optional, default 2n
//! rank_tolerance = 0.001       # option payoffs
//! transforms = id; pow:2; exp@gaussian
//! output = table.csv           # optional
//!
//! [model farima(1,d,0)]
//! kind = farima                # or type1
//! d = 0.2, 0.4                 # one model per value
//! ar = -0.3
//! ma =
//! innovation = t:10            # gaussian, t:<nu>, abs-t:<nu>; append :raw to skip standardization
//! transforms = pow:2           # optional, replaces the experiment list
//! ```
//!
//! A transform entry `K@law` simulates that cell with the given innovation law.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::farima::{FarimaSimulator, ProcessKind, ProcessSpec};
use crate::innovations::{replication_seed, InnovationLaw, InnovationSpec};
use crate::memory_theory::{
    classify_spectral, classify_square_antipersistent, classify_type1_square, MemoryClass, MemoryLabel,
};
use crate::power_rank::{
    analytic_option_derivatives, analytic_put_derivatives, option_rank, power_rank, EmpiricalMarginal,
    MarginalSampler, OptionRank, RankTolerance,
};
use crate::scalar::{format_ratio_decimal, pairwise_sum, parse_decimal_ratio};
use crate::spectral::{gph_estimate, Bandwidth, Regressor};
use crate::transforms::Transform;
use crate::{ExactMemoryClass, Rational};

pub const DEFAULT_SEED: u64 = 20_100_601;
const RANK_SAMPLE: usize = 200_000;

/// Innovation law in the config grammar: `gaussian`, `t:10`, `abs-t:10`, with an optional `:raw`.
pub fn parse_innovation(text: &str) -> Result<InnovationSpec> {
    let t = text.trim().to_ascii_lowercase();
    let (body, standardize) = match t.strip_suffix(":raw") {
        Some(b) => (b, false),
        None => (t.as_str(), true),
    };
    let nu = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad degrees of freedom in {text:?}")))
    };
    let law = match body.split_once(':') {
        None if body == "gaussian" || body == "normal" => InnovationLaw::Gaussian,
        Some(("t", v)) => InnovationLaw::StudentT { nu: nu(v)? },
        Some(("abs-t", v)) => InnovationLaw::AbsStudentT { nu: nu(v)? },
        _ => return Err(Error::Parse(format!("unknown innovation law {text:?}"))),
    };
    let spec = InnovationSpec {
        law,
        standardize,
        seed: 0,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn format_innovation(spec: &InnovationSpec) -> String {
    let body = match spec.law {
        InnovationLaw::Gaussian => "gaussian".to_string(),
        InnovationLaw::StudentT { nu } => format!("t:{nu}"),
        InnovationLaw::AbsStudentT { nu } => format!("abs-t:{nu}"),
    };
    if spec.standardize || spec.law == InnovationLaw::Gaussian {
        body
    } else {
        format!("{body}:raw")
    }
}

/// A transform with an optional innovation law that overrides the model's.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformConfig {
    pub transform: Transform<f64>,
    pub innovation: Option<InnovationSpec>,
}

impl TransformConfig {
    pub fn new(transform: Transform<f64>) -> Self {
        Self {
            transform,
            innovation: None,
        }
    }

    pub fn with_innovation(transform: Transform<f64>, innovation: InnovationSpec) -> Self {
        Self {
            transform,
            innovation: Some(innovation),
        }
    }
}

impl FromStr for TransformConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('@') {
            Some((t, law)) => Ok(Self::with_innovation(t.parse()?, parse_innovation(law)?)),
            None => Ok(Self::new(s.parse()?)),
        }
    }
}

impl fmt::Display for TransformConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.innovation {
            Some(i) => write!(f, "{}@{}", self.transform, format_innovation(i)),
            None => write!(f, "{}", self.transform),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub id: String,
    pub spec: ProcessSpec<f64>,
    /// Replaces the experiment-level transform list when set.
    pub transforms: Option<Vec<TransformConfig>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub models: Vec<ModelConfig>,
    pub transforms: Vec<TransformConfig>,
    pub n: usize,
    pub replications: usize,
    pub bandwidth: Bandwidth,
    pub regressor: Regressor,
    pub truncation: Option<usize>,
    pub seed: u64,
    /// Threshold on `|H′∞(0)|`, `|H″∞(0)|` for option payoff ranks.
    pub rank_tolerance: f64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(invalid("experiment has no models"));
        }
        if self.n < 8 {
            return Err(invalid(format!("series length must be at least 8, got {}", self.n)));
        }
        if self.replications == 0 {
            return Err(invalid("replications must be positive"));
        }
        if !(self.rank_tolerance > 0.0) {
            return Err(invalid("rank tolerance must be positive"));
        }
        for m in &self.models {
            m.spec.validate()?;
            if self.transforms_for(m).is_empty() {
                return Err(invalid(format!("model {} has no transforms", m.id)));
            }
        }
        Ok(())
    }

    pub fn transforms_for<'a>(&'a self, model: &'a ModelConfig) -> &'a [TransformConfig] {
        model.transforms.as_deref().unwrap_or(&self.transforms)
    }
}

/// Power rank as reported in a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(k) => write!(f, "{k}"),
            Rank::Infinite => f.write_str("inf"),
        }
    }
}

impl From<OptionRank> for Rank {
    fn from(r: OptionRank) -> Self {
        match r {
            OptionRank::One => Rank::Finite(1),
            OptionRank::Two => Rank::Finite(2),
            OptionRank::Infinite => Rank::Infinite,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub model: String,
    pub d: f64,
    pub transform: String,
    pub rank: Option<Rank>,
    pub theory: Option<ExactMemoryClass>,
    /// `None` when every replication was degenerate.
    pub mean_dhat: Option<f64>,
    pub sd_dhat: Option<f64>,
    /// Non-degenerate estimates behind the mean and sd.
    pub replications: usize,
    pub n: usize,
    pub degenerate_count: usize,
}

impl TableRow {
    /// Theory column: the memory parameter, blank when none applies.
    pub fn theory_text(&self) -> String {
        self.theory
            .as_ref()
            .and_then(MemoryClass::theory_value)
            .map(|v| format_ratio_decimal(&v))
            .unwrap_or_default()
    }
}

pub const CSV_HEADER: &str = "model,d,transform,rank,theory,mean_dhat,sd_dhat,N,n,degenerate_count";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(rows: &[TableRow]) -> String {
    let num = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"));
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.model),
            r.d,
            csv_field(&r.transform),
            r.rank.map(|k| k.to_string()).unwrap_or_default(),
            r.theory_text(),
            num(r.mean_dhat),
            num(r.sd_dhat),
            r.replications,
            r.n,
            r.degenerate_count
        );
    }
    out
}

/// Write the CSV table, creating missing parent directories.
pub fn write_table(path: &Path, rows: &[TableRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, render_csv(rows))?;
    Ok(())
}

/// Power ranks of the catalog transforms.
fn catalog_rank(t: &Transform<f64>) -> Option<u32> {
    const RANKS: [u32; 9] = [1, 2, 1, 2, 3, 4, 1, 1, 1];
    Transform::catalog()
        .iter()
        .position(|c| c == t)
        .map(|i| RANKS[i])
}

/// Exact `d` from its shortest decimal form.
pub fn exact_parameter(d: f64) -> Result<Rational> {
    parse_decimal_ratio(&d.to_string()).ok_or_else(|| invalid(format!("d = {d} has no short decimal form")))
}

/// Theoretical class of `K(X)`, or `None` where no result applies.
pub fn theory_for(spec: &ProcessSpec<f64>, t: &Transform<f64>, rank: Option<Rank>) -> Result<Option<ExactMemoryClass>> {
    let d = exact_parameter(spec.d)?;
    let zero = Rational::from_integer(0);
    let square = *t == Transform::power(2);
    Ok(match spec.kind {
        ProcessKind::TypeI => square.then(|| classify_type1_square(d)).transpose()?,
        ProcessKind::StationaryFarima if d > zero => match rank {
            Some(Rank::Finite(k)) => {
                let c = classify_spectral(d, k)?;
                (c.label != MemoryLabel::OutOfScope).then_some(c)
            }
            _ => None,
        },
        ProcessKind::StationaryFarima if d < zero => {
            if t.is_identity() {
                Some(MemoryClass {
                    label: MemoryLabel::Lm(d),
                    rule: "linear process",
                })
            } else if square && spec.ar.is_empty() && spec.ma.is_empty() {
                Some(classify_square_antipersistent(d)?)
            } else {
                None
            }
        }
        ProcessKind::StationaryFarima => None,
    })
}

/// Option payoffs: `(H′∞(0), H″∞(0))` from the empirical law of one simulated
/// path, centred at its mean. Other transforms: catalog rank, else the
/// numerical power rank under the truncated-filter marginal.
fn rank_for(
    cfg: &ExperimentConfig,
    sim: &FarimaSimulator<f64>,
    spec: &ProcessSpec<f64>,
    t: &Transform<f64>,
) -> Result<Option<Rank>> {
    if spec.kind == ProcessKind::TypeI {
        return Ok(None);
    }
    if t.is_payoff() {
        let path = sim.generate(replication_seed(cfg.seed, 0))?.values;
        let mean = pairwise_sum(&path) / path.len() as f64;
        let centred: Vec<f64> = path.iter().map(|x| x - mean).collect();
        let g = EmpiricalMarginal::new(&centred)?;
        let (first, second) = match *t {
            Transform::CallFromMean(off) => analytic_option_derivatives(off, |x| g.cdf(x), |x| g.pdf(x)),
            Transform::Call(k) => analytic_option_derivatives(k - mean, |x| g.cdf(x), |x| g.pdf(x)),
            Transform::PutFromMean(off) => analytic_put_derivatives(off, |x| g.cdf(x), |x| g.pdf(x)),
            Transform::Put(k) => analytic_put_derivatives(k - mean, |x| g.cdf(x), |x| g.pdf(x)),
            _ => unreachable!("payoff transforms only"),
        };
        return Ok(Some(option_rank(first, second, cfg.rank_tolerance).into()));
    }
    if let Some(k) = catalog_rank(t) {
        return Ok(Some(Rank::Finite(k)));
    }
    let sample = MarginalSampler::farima(spec.clone(), sim.truncation(), RANK_SAMPLE, cfg.seed).sample()?;
    let r = power_rank(t, &sample, 4, RankTolerance::default())?;
    Ok(r.rank.map(|k| Rank::Finite(k as u32)))
}

fn summarize(estimates: &[f64]) -> (Option<f64>, Option<f64>) {
    if estimates.is_empty() {
        return (None, None);
    }
    let n = estimates.len() as f64;
    let mean = pairwise_sum(estimates) / n;
    let sd = if estimates.len() > 1 {
        let dev: Vec<f64> = estimates.iter().map(|x| (x - mean) * (x - mean)).collect();
        Some((pairwise_sum(&dev) / (n - 1.0)).sqrt())
    } else {
        None
    };
    (Some(mean), sd)
}

/// All cells of one model that share an innovation law: one simulated path
/// per replication feeds every transform.
fn run_group(
    cfg: &ExperimentConfig,
    model: &ModelConfig,
    spec: &ProcessSpec<f64>,
    cells: &[&TransformConfig],
) -> Result<Vec<TableRow>> {
    let sim = FarimaSimulator::new(spec, cfg.n, cfg.truncation)?;
    let per_rep: Vec<Vec<Option<f64>>> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| {
            let path = sim.generate(replication_seed(cfg.seed, r))?.values;
            cells
                .iter()
                .map(|c| match gph_estimate(&c.transform.map(&path), cfg.bandwidth, cfg.regressor) {
                    Ok(e) => Ok(Some(e.d_hat)),
                    Err(Error::Degenerate(_)) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    cells
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let ok: Vec<f64> = per_rep.iter().filter_map(|row| row[j]).collect();
            let (mean_dhat, sd_dhat) = summarize(&ok);
            let rank = rank_for(cfg, &sim, spec, &c.transform)?;
            Ok(TableRow {
                model: model.id.clone(),
                d: spec.d,
                transform: c.transform.to_string(),
                rank,
                theory: theory_for(spec, &c.transform, rank)?,
                mean_dhat,
                sd_dhat,
                replications: ok.len(),
                n: cfg.n,
                degenerate_count: cfg.replications - ok.len(),
            })
        })
        .collect()
}

/// Rows come out in model order, then transform order. Replication `r` uses
/// seed `seed + r`, and results do not depend on the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TableRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for model in &cfg.models {
        let cells = cfg.transforms_for(model);
        let mut slots: Vec<Option<TableRow>> = vec![None; cells.len()];
        // group by innovation law, keeping first-appearance order
        let mut groups: Vec<(InnovationSpec, Vec<usize>)> = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            let law = c.innovation.unwrap_or(model.spec.innovation);
            match groups.iter_mut().find(|(l, _)| *l == law) {
                Some((_, idx)) => idx.push(i),
                None => groups.push((law, vec![i])),
            }
        }
        for (law, idx) in groups {
            let spec = ProcessSpec {
                innovation: law,
                ..model.spec.clone()
            };
            let group: Vec<&TransformConfig> = idx.iter().map(|&i| &cells[i]).collect();
            for (i, row) in idx.iter().zip(run_group(cfg, model, &spec, &group)?) {
                slots[*i] = Some(row);
            }
        }
        rows.extend(slots.into_iter().map(|r| r.expect("every cell filled")));
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    T1,
    T2,
    T4,
    T5,
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().trim_start_matches("TABLE").trim() {
            "T1" | "1" => Ok(TableId::T1),
            "T2" | "2" => Ok(TableId::T2),
            "T4" | "4" => Ok(TableId::T4),
            "T5" | "5" => Ok(TableId::T5),
            _ => Err(Error::Parse(format!("unknown table {s:?}; expected T1, T2, T4 or T5"))),
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableId::T1 => "T1",
            TableId::T2 => "T2",
            TableId::T4 => "T4",
            TableId::T5 => "T5",
        })
    }
}

/// Mean-relative strike offsets `C − μ` of the option table, per `d`.
pub const OPTION_OFFSETS_D02: [f64; 6] = [-6.89, -5.69, -2.19, 1.81, 37.61, 38.31];
pub const OPTION_OFFSETS_D04: [f64; 6] = [-44.74, -43.24, -39.74, -35.74, 0.06, 0.76];

fn scaled(base: usize, scale: f64) -> usize {
    ((base as f64 * scale).round() as usize).max(1)
}

fn catalog_cells(t: InnovationSpec) -> Vec<TransformConfig> {
    Transform::catalog()
        .into_iter()
        .map(|k| match k {
            Transform::Exp => TransformConfig::with_innovation(k, InnovationSpec::gaussian(0)),
            _ => TransformConfig::with_innovation(k, t),
        })
        .collect()
}

/// The model/transform grid of a preset table with `N` and `n` multiplied by `scale`.
pub fn table_config(id: TableId, scale: f64, seed: u64) -> Result<ExperimentConfig> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(invalid(format!("scale must lie in (0, 1], got {scale}")));
    }
    let t10 = InnovationSpec::student_t(10.0, 0);
    let model = |id: &str, spec: ProcessSpec<f64>, transforms: Option<Vec<TransformConfig>>| ModelConfig {
        id: id.to_string(),
        spec,
        transforms,
    };
    let (models, base_n) = match id {
        TableId::T1 => (
            [-0.8, -0.4, -0.2, 0.2, 0.4]
                .iter()
                .map(|&d| model("farima(0,d,0)", ProcessSpec::fractional_noise(d, t10), None))
                .collect::<Vec<_>>(),
            2000,
        ),
        TableId::T2 => {
            let mut v = Vec::new();
            for &d in &[0.2, 0.4] {
                v.push(model("farima(1,d,0)", ProcessSpec::farima(d, vec![-0.3], vec![], t10), None));
            }
            for &d in &[0.2, 0.4] {
                v.push(model("farima(1,d,1)", ProcessSpec::farima(d, vec![-0.4], vec![0.7], t10), None));
            }
            (v, 2000)
        }
        TableId::T4 => {
            let t5 = InnovationSpec::student_t(5.0, 0);
            let mut cells = vec![TransformConfig::with_innovation(Transform::power(2), t5)];
            for k in [Transform::power(3), Transform::power(4), Transform::cubic_hermite(), Transform::quartic_centered()] {
                cells.push(TransformConfig::with_innovation(k, t10));
            }
            (
                [0.55, 0.65, 0.75, 0.85, 0.95]
                    .iter()
                    .map(|&d| model("type1", ProcessSpec::type_one(d, t10), Some(cells.clone())))
                    .collect(),
                2000,
            )
        }
        TableId::T5 => {
            let abs_t = InnovationSpec {
                standardize: false,
                ..InnovationSpec::abs_student_t(10.0, 0)
            };
            let calls = |offsets: &[f64]| {
                offsets
                    .iter()
                    .map(|&o| TransformConfig::new(Transform::CallFromMean(o)))
                    .collect::<Vec<_>>()
            };
            (
                vec![
                    model("farima(0,d,0)", ProcessSpec::fractional_noise(0.2, abs_t), Some(calls(&OPTION_OFFSETS_D02))),
                    model("farima(0,d,0)", ProcessSpec::fractional_noise(0.4, abs_t), Some(calls(&OPTION_OFFSETS_D04))),
                ],
                1 << 20,
            )
        }
    };
    let transforms = match id {
        TableId::T1 | TableId::T2 => catalog_cells(t10),
        _ => Vec::new(),
    };
    Ok(ExperimentConfig {
        models,
        transforms,
        n: scaled(base_n, scale),
        replications: scaled(2000, scale),
        bandwidth: Bandwidth::Default,
        regressor: Regressor::default(),
        truncation: None,
        seed,
        rank_tolerance: 1e-3,
        output: None,
    })
}

pub fn reproduce_table(id: TableId, scale: f64) -> Result<Vec<TableRow>> {
    run_experiment(&table_config(id, scale, DEFAULT_SEED)?)
}

/// Parse the config grammar described at the top of this module. Relative
/// output paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<ExperimentConfig> {
    let mut sections: Vec<(String, BTreeMap<String, (usize, String)>)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = no + 1;
        if let Some(head) = line.strip_prefix('[') {
            let name = head
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse(format!("line {lineno}: unterminated section header")))?;
            sections.push((name.trim().to_string(), BTreeMap::new()));
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {lineno}: expected key = value")))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| Error::Parse(format!("line {lineno}: key outside any section")))?;
        let key = k.trim().to_ascii_lowercase();
        if section.1.insert(key.clone(), (lineno, v.trim().to_string())).is_some() {
            return Err(Error::Parse(format!("line {lineno}: duplicate key {key:?}")));
        }
    }

    fn take<T: FromStr>(map: &mut BTreeMap<String, (usize, String)>, key: &str) -> Result<Option<T>> {
        match map.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("line {line}: bad value {v:?} for {key}"))),
        }
    }
    fn reals(map: &mut BTreeMap<String, (usize, String)>, key: &str) -> Result<Vec<f64>> {
        let Some((line, v)) = map.remove(key) else {
            return Ok(Vec::new());
        };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.replace('\u{2212}', "-")
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {line}: bad number {s:?} in {key}")))
            })
            .collect()
    }
    fn cells(map: &mut BTreeMap<String, (usize, String)>) -> Result<Option<Vec<TransformConfig>>> {
        let Some((line, v)) = map.remove("transforms") else {
            return Ok(None);
        };
        v.split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| Error::Parse(format!("line {line}: {e}"))))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
    fn leftovers(name: &str, map: &BTreeMap<String, (usize, String)>) -> Result<()> {
        match map.iter().next() {
            Some((k, (line, _))) => Err(Error::Parse(format!("line {line}: unknown key {k:?} in [{name}]"))),
            None => Ok(()),
        }
    }

    let mut exp = None;
    let mut models = Vec::new();
    for (name, mut map) in sections {
        if name.eq_ignore_ascii_case("experiment") {
            if exp.is_some() {
                return Err(Error::Parse("duplicate [experiment] section".into()));
            }
            let bandwidth = match map.remove("bandwidth") {
                None => Bandwidth::Default,
                Some((_, v)) if v.eq_ignore_ascii_case("default") => Bandwidth::Default,
                Some((line, v)) => Bandwidth::Fixed(
                    v.parse()
                        .map_err(|_| Error::Parse(format!("line {line}: bad bandwidth {v:?}")))?,
                ),
            };
            let regressor = match map.remove("regressor") {
                None => Regressor::default(),
                Some((line, v)) => v.parse().map_err(|e| Error::Parse(format!("line {line}: {e}")))?,
            };
            let output = take::<String>(&mut map, "output")?.map(|p| {
                let p = PathBuf::from(p);
                match base_dir {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p,
                }
            });
            let cfg = ExperimentConfig {
                models: Vec::new(),
                transforms: cells(&mut map)?.unwrap_or_default(),
                n: take(&mut map, "n")?.ok_or_else(|| invalid("[experiment] needs n"))?,
                replications: take(&mut map, "replications")?
                    .ok_or_else(|| invalid("[experiment] needs replications"))?,
                bandwidth,
                regressor,
                truncation: take(&mut map, "truncation")?,
                seed: take(&mut map, "seed")?.unwrap_or(DEFAULT_SEED),
                rank_tolerance: take(&mut map, "rank_tolerance")?.unwrap_or(1e-3),
                output,
            };
            leftovers(&name, &map)?;
            exp = Some(cfg);
        } else if let Some(id) = name.strip_prefix("model") {
            let id = id.trim();
            if id.is_empty() {
                return Err(Error::Parse("model section needs an id: [model <id>]".into()));
            }
            let kind = match take::<String>(&mut map, "kind")?.as_deref() {
                None | Some("farima") => ProcessKind::StationaryFarima,
                Some("type1") | Some("type-i") => ProcessKind::TypeI,
                Some(other) => return Err(Error::Parse(format!("unknown process kind {other:?}"))),
            };
            let ds = reals(&mut map, "d")?;
            if ds.is_empty() {
                return Err(invalid(format!("model {id} needs d")));
            }
            let ar = reals(&mut map, "ar")?;
            let ma = reals(&mut map, "ma")?;
            let innovation = match map.remove("innovation") {
                None => InnovationSpec::gaussian(0),
                Some((line, v)) => parse_innovation(&v).map_err(|e| Error::Parse(format!("line {line}: {e}")))?,
            };
            let transforms = cells(&mut map)?;
            leftovers(&name, &map)?;
            for d in ds {
                let spec = ProcessSpec {
                    d,
                    ar: ar.clone(),
                    ma: ma.clone(),
                    kind,
                    innovation,
                };
                models.push(ModelConfig {
                    id: id.to_string(),
                    spec,
                    transforms: transforms.clone(),
                });
            }
        } else {
            return Err(Error::Parse(format!("unknown section [{name}]")));
        }
    }
    let mut cfg = exp.ok_or_else(|| Error::Parse("missing [experiment] section".into()))?;
    cfg.models = models;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path.parent())
}

/// Inverse of [`parse_config`].
pub fn render_config(cfg: &ExperimentConfig) -> String {
    let list = |c: &[TransformConfig]| c.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("; ");
    let nums = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
    let mut out = String::from("[experiment]\n");
    let _ = writeln!(out, "n = {}", cfg.n);
    let _ = writeln!(out, "replications = {}", cfg.replications);
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(
        out,
        "bandwidth = {}",
        match cfg.bandwidth {
            Bandwidth::Default => "default".to_string(),
            Bandwidth::Fixed(m) => m.to_string(),
        }
    );
    let _ = writeln!(out, "regressor = {}", cfg.regressor.label());
    if let Some(m) = cfg.truncation {
        let _ = writeln!(out, "truncation = {m}");
    }
    let _ = writeln!(out, "rank_tolerance = {}", cfg.rank_tolerance);
    if !cfg.transforms.is_empty() {
        let _ = writeln!(out, "transforms = {}", list(&cfg.transforms));
    }
    if let Some(p) = &cfg.output {
        let _ = writeln!(out, "output = {}", p.display());
    }
    for m in &cfg.models {
        let _ = writeln!(out, "\n[model {}]", m.id);
        let _ = writeln!(
            out,
            "kind = {}",
            match m.spec.kind {
                ProcessKind::StationaryFarima => "farima",
                ProcessKind::TypeI => "type1",
            }
        );
        let _ = writeln!(out, "d = {}", m.spec.d);
        if !m.spec.ar.is_empty() {
            let _ = writeln!(out, "ar = {}", nums(&m.spec.ar));
        }
        if !m.spec.ma.is_empty() {
            let _ = writeln!(out, "ma = {}", nums(&m.spec.ma));
        }
        let _ = writeln!(out, "innovation = {}", format_innovation(&m.spec.innovation));
        if let Some(t) = &m.transforms {
            let _ = writeln!(out, "transforms = {}", list(t));
        }
    }
    out
}
