//! Sampled populations, transport-efficiency metrics and run comparisons.

use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{SinkSpec, StateIndex};

/// Quadrature agreement required between the sink diagonal and
/// `Γ_sink ∫ ρ_MM dt`.
pub const SINK_QUADRATURE_TOL: f64 = 1e-4;

/// Populations sampled on a uniform time grid, laid out by [`StateIndex`].
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub index: StateIndex,
    pub times: Vec<f64>,
    /// `samples × dim` diagonal of the extended density matrix.
    pub populations: Array2<f64>,
    pub purity: Vec<f64>,
    /// `|Tr ρ − 1|` per sample.
    pub trace_error: Vec<f64>,
    /// Smallest eigenvalue of `ρ` per sample (zero where not computed).
    pub min_eigenvalue: Vec<f64>,
    /// `max |ρ − ρ†|` per sample, measured before re-symmetrization.
    pub hermiticity_error: Vec<f64>,
    /// Sink channel that fed this run, if any.
    pub sink: Option<SinkSpec>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, state: usize) -> Vec<f64> {
        self.populations.column(state).to_vec()
    }

    pub fn site_column(&self, chain: usize, site: usize) -> Vec<f64> {
        self.column(self.index.site(chain, site))
    }

    pub fn ground(&self) -> Vec<f64> {
        self.column(self.index.ground())
    }

    pub fn t_final(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// `|Σ_k p_k − 1|` per sample.
    pub fn bookkeeping_error(&self) -> Vec<f64> {
        self.populations.rows().into_iter().map(|r| (r.sum() - 1.0).abs()).collect()
    }

    /// Header `t,p_ground,p_site_1..,p_pm_1..,p_sink,purity,trace_err`, one row
    /// per sample, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for label in self.index.labels() {
            out.push(',');
            out.push_str(&label);
        }
        out.push_str(",purity,trace_err\n");
        for (k, row) in self.populations.rows().into_iter().enumerate() {
            write!(out, "{}", fmt_f64(self.times[k])).unwrap();
            for p in row {
                write!(out, ",{}", fmt_f64(*p)).unwrap();
            }
            writeln!(out, ",{},{}", fmt_f64(self.purity[k]), fmt_f64(self.trace_error[k])).unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Full-precision float formatting shared by every CSV writer.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sink population column. Logs a warning when the column disagrees with the
/// quadrature `Γ_sink ∫ ρ_MM dt` by more than [`SINK_QUADRATURE_TOL`].
pub fn sink_population(ts: &TimeSeries) -> Vec<f64> {
    let p = ts.column(ts.index.sink());
    if let Some(dev) = sink_quadrature_deviation(ts) {
        if dev > SINK_QUADRATURE_TOL {
            warn!("sink population deviates from Γ_sink ∫ρ_MM dt by {dev:.3e}; sampling may be too coarse");
        }
    }
    p
}

/// Largest difference between the sink diagonal and the quadrature
/// `P_sink(0) + Γ_sink ∫₀ᵗ ρ_MM dt'` on the (uniform) sample grid: composite
/// Simpson at even samples, plus a three-point end panel at odd ones.
/// `None` when the run has no sink.
pub fn sink_quadrature_deviation(ts: &TimeSeries) -> Option<f64> {
    let sink = ts.sink?;
    let f = ts.column(ts.index.site(1, sink.attach_site));
    let p = ts.column(ts.index.sink());
    let mut even = p[0];
    let mut worst: f64 = 0.0;
    for k in 1..ts.len() {
        let h = ts.times[k] - ts.times[k - 1];
        let integral = if k == 1 {
            even + sink.gamma_sink * 0.5 * h * (f[0] + f[1])
        } else if k % 2 == 0 {
            even += sink.gamma_sink * h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
            even
        } else {
            even + sink.gamma_sink * h / 12.0 * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k])
        };
        worst = worst.max((integral - p[k]).abs());
    }
    Some(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EfficiencyReport {
    pub p_sink_final: f64,
    /// First sample time at which `P_sink ≥ p_sink_final / 2`.
    pub t_half: Option<f64>,
    /// Trapezoid `∫ P_sink dt` over the run.
    pub auc: f64,
}

pub fn efficiency(ts: &TimeSeries) -> EfficiencyReport {
    let p = ts.column(ts.index.sink());
    let p_sink_final = p.last().copied().unwrap_or(0.0);
    let t_half = if p_sink_final > 0.0 {
        p.iter().position(|&v| v >= 0.5 * p_sink_final).map(|k| ts.times[k])
    } else {
        None
    };
    let auc = (1..p.len()).map(|k| 0.5 * (ts.times[k] - ts.times[k - 1]) * (p[k] + p[k - 1])).sum();
    EfficiencyReport { p_sink_final, t_half, auc }
}

/// `P_sink(t)` for several runs on a shared time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    /// One column per run.
    pub sink: Vec<Vec<f64>>,
}

impl ComparisonTable {
    pub fn finals(&self) -> Vec<f64> {
        self.sink.iter().map(|c| c.last().copied().unwrap_or(0.0)).collect()
    }

    /// Run labels sorted by ascending final sink population.
    pub fn ordering(&self) -> Vec<&str> {
        let finals = self.finals();
        let mut order: Vec<usize> = (0..self.labels.len()).collect();
        order.sort_by(|&a, &b| finals[a].total_cmp(&finals[b]));
        order.into_iter().map(|k| self.labels[k].as_str()).collect()
    }

    /// True when the final values increase strictly in the given label order.
    pub fn strictly_increasing(&self) -> bool {
        self.finals().windows(2).all(|w| w[1] > w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            out.push_str(&fmt_f64(*t));
            for col in &self.sink {
                out.push(',');
                out.push_str(&fmt_f64(col[k]));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

pub fn compare_runs(runs: &[TimeSeries], labels: &[String]) -> Result<ComparisonTable> {
    if runs.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: runs.len(), found: labels.len() });
    }
    let Some(first) = runs.first() else {
        return Ok(ComparisonTable { labels: vec![], times: vec![], sink: vec![] });
    };
    for (run, label) in runs.iter().zip(labels).skip(1) {
        let same = run.times.len() == first.times.len()
            && run.times.iter().zip(&first.times).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
        if !same {
            return Err(Error::GridMismatch(labels[0].clone(), label.clone()));
        }
    }
    Ok(ComparisonTable {
        labels: labels.to_vec(),
        times: first.times.clone(),
        sink: runs.iter().map(sink_population).collect(),
    })
}
