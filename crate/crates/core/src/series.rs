//! Series container and its on-disk form: one value per line plus a JSON
//! sidecar carrying the generating parameters.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farima::{ProcessKind, ProcessSpec};
use crate::innovations::InnovationSpec;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMeta<T> {
    pub spec: Option<ProcessSpec<T>>,
    pub seed: u64,
    pub truncation: usize,
    pub burn_in: usize,
    /// `Σ_{i≥M} a_i²` of the fractional filter, the variance the truncation drops.
    pub truncation_variance_loss: Option<f64>,
    /// Transforms applied so far, in application order.
    pub transforms: Vec<String>,
}

impl<T> Default for SeriesMeta<T> {
    fn default() -> Self {
        Self {
            spec: None,
            seed: 0,
            truncation: 0,
            burn_in: 0,
            truncation_variance_loss: None,
            transforms: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    pub values: Vec<T>,
    pub meta: SeriesMeta<T>,
}

impl<T: Real> Series<T> {
    pub fn from_values(values: Vec<T>) -> Self {
        Self {
            values,
            meta: SeriesMeta::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sidecar(&self) -> Sidecar {
        let spec = self.meta.spec.as_ref();
        Sidecar {
            kind: spec.map(|s| s.kind.label().to_string()),
            d: spec.map(|s| s.d.to_f64_lossy()),
            ar: spec.map(|s| s.ar.iter().map(|v| v.to_f64_lossy()).collect()).unwrap_or_default(),
            ma: spec.map(|s| s.ma.iter().map(|v| v.to_f64_lossy()).collect()).unwrap_or_default(),
            innovation: spec.map(|s| s.innovation),
            seed: self.meta.seed,
            n: self.values.len(),
            truncation: self.meta.truncation,
            burn_in: self.meta.burn_in,
            truncation_variance_loss: self.meta.truncation_variance_loss,
            transforms: self.meta.transforms.clone(),
        }
    }
}

/// JSON metadata written next to a series file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub kind: Option<String>,
    pub d: Option<f64>,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub innovation: Option<InnovationSpec>,
    pub seed: u64,
    pub n: usize,
    #[serde(rename = "M")]
    pub truncation: usize,
    pub burn_in: usize,
    pub truncation_variance_loss: Option<f64>,
    #[serde(default)]
    pub transforms: Vec<String>,
}

impl Sidecar {
    pub fn process_spec(&self) -> Option<ProcessSpec<f64>> {
        let kind = match self.kind.as_deref()? {
            "farima" => ProcessKind::StationaryFarima,
            "type1" => ProcessKind::TypeI,
            _ => return None,
        };
        Some(ProcessSpec {
            d: self.d?,
            ar: self.ar.clone(),
            ma: self.ma.clone(),
            kind,
            innovation: self.innovation?,
        })
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".json");
    path.with_file_name(name)
}

/// Write values one per line in shortest round-trip form, plus `<path>.json`.
pub fn write_series<T: Real>(path: &Path, series: &Series<T>) -> Result<()> {
    write_values(path, &series.values)?;
    let json = serde_json::to_string_pretty(&series.sidecar())
        .map_err(|e| Error::Parse(format!("sidecar encoding: {e}")))?;
    fs::write(sidecar_path(path), json + "\n")?;
    Ok(())
}

pub fn write_values<T: Real>(path: &Path, values: &[T]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in values {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Read a one-value-per-line file. Blank lines are skipped; a single
/// non-numeric first line is treated as a header.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(v) => {
                return Err(Error::NonFinite(format!("{}:{}: {v}", path.display(), lineno + 1)))
            }
            Err(_) if lineno == 0 => continue,
            Err(_) => {
                return Err(Error::Parse(format!(
                    "{}:{}: not a number: {field:?}",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Read a series and, when present, its sidecar.
pub fn read_series(path: &Path) -> Result<(Series<f64>, Option<Sidecar>)> {
    let values = read_values(path)?;
    let side = sidecar_path(path);
    let sidecar = if side.exists() {
        let text = fs::read_to_string(&side)?;
        Some(
            serde_json::from_str::<Sidecar>(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", side.display())))?,
        )
    } else {
        None
    };
    let mut series = Series::from_values(values);
    if let Some(s) = &sidecar {
        series.meta = SeriesMeta {
            spec: s.process_spec(),
            seed: s.seed,
            truncation: s.truncation,
            burn_in: s.burn_in,
            truncation_variance_loss: s.truncation_variance_loss,
            transforms: s.transforms.clone(),
        };
    }
    Ok((series, sidecar))
}
