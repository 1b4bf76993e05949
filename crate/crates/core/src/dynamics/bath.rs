//! Chains coupled to an explicitly discretized reservoir.
//!
//! The structure function is sampled on a uniform midpoint grid of
//! `bath_modes` frequencies `ω_λ` over `[ω_c − W, ω_c + W]`. Site `(j, i)`
//! couples to mode `λ` with `Ω_j u_{ri} 𝔤_λ`, `𝔤_λ² = D(ω_λ) Δω / 2π`, so
//! `Σ_λ 𝔤_λ² → 1` as the grid refines and the window widens. The resulting
//! single-excitation Schrödinger equation is integrated directly.

use std::f64::consts::PI;

use ndarray::Array2;

use super::ode::Integrator;
use crate::error::{Error, Result};
use crate::model::{validate_system, RunConfig, StateIndex, SystemSpec};
use crate::observables::TimeSeries;
use crate::spectral::{evaluate_density, SpectralDensity};
use crate::system::build_eigenbasis;
use crate::C64;

pub const MIN_BATH_MODES: usize = 100;

/// Default window half-width in units of the largest Lorentzian width.
pub const DEFAULT_WINDOW_WIDTHS: f64 = 150.0;

/// Fraction of `∫ D dω / 2π` the window must capture.
const MIN_CAPTURED_WEIGHT: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathOptions {
    pub modes: usize,
    /// Half-width `W` of the sampling window; `None` uses
    /// [`DEFAULT_WINDOW_WIDTHS`] times the largest width.
    pub half_width: Option<f64>,
}

impl BathOptions {
    pub fn new(modes: usize) -> Self {
        BathOptions { modes, half_width: None }
    }
}

/// Sampled reservoir: mode frequencies and the shared coupling profile
/// `𝔤_λ` (multiply by `Ω_j u_{ri}` for a given site).
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedBath {
    pub frequencies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub spacing: f64,
    /// Exact fraction of the normalized density inside the window.
    pub captured_weight: f64,
}

impl DiscretizedBath {
    pub fn sample(sd: &SpectralDensity, opts: BathOptions) -> Result<Self> {
        if opts.modes < MIN_BATH_MODES {
            return Err(Error::TooFewBathModes { min: MIN_BATH_MODES, got: opts.modes });
        }
        let center = sd.center();
        let offset = sd.terms().iter().map(|t| (t.center - center).abs()).fold(0.0, f64::max);
        let half_width = opts.half_width.unwrap_or(DEFAULT_WINDOW_WIDTHS * sd.max_width() + offset);
        let (lo, hi) = (center - half_width, center + half_width);
        // ∫_lo^hi D dω / 2π in closed form.
        let captured_weight: f64 = sd
            .terms()
            .iter()
            .map(|t| {
                let x = |w: f64| (2.0 * (w - t.center) / t.width).atan();
                t.weight * (x(hi) - x(lo)) / PI
            })
            .sum();
        if captured_weight < MIN_CAPTURED_WEIGHT {
            return Err(Error::BathWindow { captured: captured_weight });
        }
        let spacing = (hi - lo) / opts.modes as f64;
        let frequencies: Vec<f64> = (0..opts.modes).map(|k| lo + spacing * (k as f64 + 0.5)).collect();
        let couplings = frequencies
            .iter()
            .map(|&w| (evaluate_density(sd, w) * spacing / (2.0 * PI)).sqrt())
            .collect();
        Ok(DiscretizedBath { frequencies, couplings, spacing, captured_weight })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// `Σ_λ 𝔤_λ²`; multiply by `Ω_i²` for the per-level total.
    pub fn total_weight(&self) -> f64 {
        self.couplings.iter().map(|g| g * g).sum()
    }
}

pub fn integrate_discretized_bath(
    spec: &SystemSpec,
    sd: &SpectralDensity,
    bath_modes: usize,
    run: &RunConfig,
) -> Result<TimeSeries> {
    integrate_discretized_bath_with(spec, sd, BathOptions::new(bath_modes), run)
}

/// Starts from `run.initial_site` on chain 1. The returned series uses a
/// one-pseudomode layout whose `p_pm_1` column holds the total reservoir
/// population; the sink column is always zero.
pub fn integrate_discretized_bath_with(
    spec: &SystemSpec,
    sd: &SpectralDensity,
    opts: BathOptions,
    run: &RunConfig,
) -> Result<TimeSeries> {
    validate_system(spec).into_result()?;
    let bath = DiscretizedBath::sample(sd, opts)?;
    let basis = build_eigenbasis(spec.chain_len, spec.omega0, spec.j_coupling)?;
    let (n, m) = (spec.n_chains, spec.chain_len);
    let ns = n * m;
    // Site weights Ω_j u_{ri}, chain-major.
    let profile: Vec<f64> = (0..ns)
        .map(|k| spec.omega_big[k / m] * basis.u[[spec.r_index - 1, k % m]])
        .collect();
    let (omega0, hop) = (spec.omega0, spec.j_coupling);

    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        let minus_i = -C64::i();
        let (sites, modes) = y.split_at(ns);
        let field: C64 = bath.couplings.iter().zip(modes).map(|(g, c)| g * c).sum();
        let source: C64 = profile.iter().zip(sites).map(|(w, a)| w * a).sum();
        for k in 0..ns {
            let i = k % m;
            let mut acc = omega0 * sites[k] + profile[k] * field;
            if i > 0 {
                acc += hop * sites[k - 1];
            }
            if i + 1 < m {
                acc += hop * sites[k + 1];
            }
            dy[k] = minus_i * acc;
        }
        for (lam, (w, g)) in bath.frequencies.iter().zip(&bath.couplings).enumerate() {
            dy[ns + lam] = minus_i * (w * modes[lam] + g * source);
        }
    };

    let mut y0 = vec![C64::new(0.0, 0.0); ns + bath.len()];
    y0[run.initial_site - 1] = C64::new(1.0, 0.0);

    let index = StateIndex { n_chains: n, chain_len: m, n_pseudomodes: 1 };
    let samples = run.sample_count;
    let mut ts = TimeSeries {
        index,
        times: Vec::with_capacity(samples),
        populations: Array2::zeros((samples, index.dim())),
        purity: Vec::with_capacity(samples),
        trace_error: Vec::with_capacity(samples),
        min_eigenvalue: Vec::with_capacity(samples),
        hermiticity_error: Vec::with_capacity(samples),
        sink: None,
    };
    let times = run.sample_times();
    Integrator::new(run.abs_tol, run.rel_tol).run(rhs, y0, &times, |_, _| Ok(()), |k, t, y| {
        let mut row = ts.populations.row_mut(k);
        for (slot, a) in row.iter_mut().skip(1).zip(&y[..ns]) {
            *slot = a.norm_sqr();
        }
        row[index.pseudomode(1)] = y[ns..].iter().map(|c| c.norm_sqr()).sum();
        let total = row.sum();
        ts.times.push(t);
        ts.purity.push(1.0);
        ts.trace_error.push((total - 1.0).abs());
        ts.min_eigenvalue.push(0.0);
        ts.hermiticity_error.push(0.0);
        Ok(())
    })?;
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_modes_is_an_error() {
        let sd = SpectralDensity::lorentzian(1.02, 0.1).unwrap();
        assert!(matches!(
            DiscretizedBath::sample(&sd, BathOptions::new(50)),
            Err(Error::TooFewBathModes { .. })
        ));
    }

    #[test]
    fn narrow_window_is_rejected() {
        let sd = SpectralDensity::lorentzian(1.02, 0.1).unwrap();
        // ±20Γ holds (2/π)·atan(40) ≈ 0.984 of the weight.
        let opts = BathOptions { modes: 2000, half_width: Some(2.0) };
        match DiscretizedBath::sample(&sd, opts) {
            Err(Error::BathWindow { captured }) => assert!((captured - 0.98408).abs() < 1e-4),
            other => panic!("expected window error, got {other:?}"),
        }
    }

    #[test]
    fn sampled_weight_matches_coupling_strength() {
        let sd = SpectralDensity::lorentzian(1.02, 0.1).unwrap();
        let bath = DiscretizedBath::sample(&sd, BathOptions::new(2000)).unwrap();
        assert!(bath.captured_weight > 0.99);
        // Midpoint sum vs exact window integral.
        assert!((bath.total_weight() - bath.captured_weight).abs() < 1e-3);
        assert!((bath.total_weight() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn uncoupled_chain_keeps_its_populations() {
        let spec = SystemSpec::uniform(1, 1, 1.0, 0.1, 1, 0.0);
        let sd = SpectralDensity::lorentzian(1.02, 0.1).unwrap();
        let ts = integrate_discretized_bath(&spec, &sd, 200, &RunConfig::new(10.0, 11).with_tolerances(1e-12, 1e-12)).unwrap();
        for row in ts.populations.rows() {
            assert!((row[1] - 1.0).abs() < 1e-10, "{row}");
            assert!(row[2].abs() < 1e-20);
        }
    }
}
