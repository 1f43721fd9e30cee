//! Ordered `(x, value)` series shared by simulated and ingested data.
//!
//! CSV files carry a two-column header whose first name depends on the
//! series kind: `freq_offset_ghz` for spectra, `time_ns` for wavepackets and
//! `tau_ns` for correlation functions. Values are written with 17 significant
//! digits so that a write/read cycle is bit-exact.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Transmission,
    Ple,
    Wavepacket,
    Correlation,
}

impl SeriesKind {
    pub fn axis_header(self) -> &'static str {
        match self {
            SeriesKind::Transmission | SeriesKind::Ple => "freq_offset_ghz",
            SeriesKind::Wavepacket => "time_ns",
            SeriesKind::Correlation => "tau_ns",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeries")]
pub struct SpectrumSeries {
    pub label: String,
    pub kind: SeriesKind,
    points: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct RawSeries {
    label: String,
    kind: SeriesKind,
    points: Vec<(f64, f64)>,
}

impl TryFrom<RawSeries> for SpectrumSeries {
    type Error = Error;
    fn try_from(r: RawSeries) -> Result<Self> {
        SpectrumSeries::new(r.label, r.kind, r.points)
    }
}

impl SpectrumSeries {
    pub fn new(label: impl Into<String>, kind: SeriesKind, points: Vec<(f64, f64)>) -> Result<Self> {
        for (k, &(x, v)) in points.iter().enumerate() {
            if !x.is_finite() || !v.is_finite() {
                return Err(Error::Parse(format!("non-finite sample at row {k}")));
            }
            if k > 0 && x <= points[k - 1].0 {
                return Err(Error::Parse(format!(
                    "abscissa not strictly increasing at row {k} ({} after {})",
                    x,
                    points[k - 1].0
                )));
            }
        }
        Ok(Self {
            label: label.into(),
            kind,
            points,
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// Trapezoidal integral over the abscissa.
    pub fn integral(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([self.kind.axis_header(), "value"])?;
        for &(x, v) in &self.points {
            wr.write_record([format!("{x:.16e}"), format!("{v:.16e}")])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    /// Parse a two-column CSV. The axis header must match `kind`.
    pub fn read_csv<R: Read>(r: R, label: impl Into<String>, kind: SeriesKind) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rd.headers()?.clone();
        let expected = [kind.axis_header(), "value"];
        if headers.len() != 2 || headers.get(0) != Some(expected[0]) || headers.get(1) != Some(expected[1]) {
            return Err(Error::Parse(format!(
                "expected header `{},{}`, found `{}`",
                expected[0],
                expected[1],
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        for (k, rec) in rd.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!("row {} has {} fields", k + 1, rec.len())));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: `{s}`: {e}", k + 1)))
            };
            points.push((parse(&rec[0])?, parse(&rec[1])?));
        }
        Self::new(label, kind, points)
    }

    pub fn from_csv_path(path: &Path, kind: SeriesKind) -> Result<Self> {
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::read_csv(std::fs::File::open(path)?, label, kind)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
