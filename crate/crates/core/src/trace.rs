//! Probe time series and their CSV form.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub probe: String,
    pub species: String,
    pub values: Vec<f64>,
}

impl Series {
    pub fn label(&self) -> String {
        format!("{}.{}", self.probe, self.species)
    }
}

/// Concentration samples at probe locations [mol/m³] over time [s].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trace {
    pub times: Vec<f64>,
    pub series: Vec<Series>,
}

impl Trace {
    pub fn new(columns: impl IntoIterator<Item = (String, String)>) -> Self {
        Self {
            times: Vec::new(),
            series: columns
                .into_iter()
                .map(|(probe, species)| Series {
                    probe,
                    species,
                    values: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn push(&mut self, t: f64, values: &[f64]) {
        debug_assert_eq!(values.len(), self.series.len());
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        for (s, v) in self.series.iter_mut().zip(values) {
            s.values.push(*v);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn column(&self, probe: &str, species: &str) -> Option<&[f64]> {
        self.series
            .iter()
            .find(|s| s.probe == probe && s.species == species)
            .map(|s| s.values.as_slice())
    }

    /// Mean of a column over samples with `start <= t < end`.
    pub fn window_mean(&self, probe: &str, species: &str, start: f64, end: f64) -> Result<f64> {
        let values = self.column(probe, species).ok_or_else(|| {
            Error::InvalidInput(format!("trace has no column `{probe}.{species}`"))
        })?;
        let (sum, count) = self
            .times
            .iter()
            .zip(values)
            .filter(|(t, _)| **t >= start && **t < end)
            .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
        if count == 0 {
            return Err(Error::Schedule(format!(
                "no samples in window [{start}, {end})"
            )));
        }
        Ok(sum / count as f64)
    }

    /// `t,<probe>.<species>,...` header followed by one row per sample;
    /// values use the shortest exact decimal form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for s in &self.series {
            out.push(',');
            out.push_str(&s.label());
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            write!(out, "{t}").unwrap();
            for s in &self.series {
                write!(out, ",{}", s.values[i]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty trace csv".into()))?;
        let mut cols = header.split(',');
        if cols.next() != Some("t") {
            return Err(Error::Parse("trace csv must start with a `t` column".into()));
        }
        let mut trace = Trace::new(cols.map(|c| {
            let (p, s) = c.split_once('.').unwrap_or((c, ""));
            (p.to_string(), s.to_string())
        }));
        for (n, line) in lines.enumerate() {
            let nums: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse).collect();
            let nums = nums.map_err(|e| Error::Parse(format!("trace csv row {}: {e}", n + 2)))?;
            if nums.len() != trace.series.len() + 1 {
                return Err(Error::Parse(format!("trace csv row {} has wrong width", n + 2)));
            }
            trace.push(nums[0], &nums[1..]);
        }
        Ok(trace)
    }
}
