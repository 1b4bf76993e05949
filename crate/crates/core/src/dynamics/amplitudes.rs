//! Amplitude picture: chain eigenmode amplitudes `c` and pseudomode
//! amplitudes `s` evolve under
//!
//! ```text
//! i dc_{j,l}/dt = E_l c_{j,l} + δ_{l,r} Σ_m 𝔤_{j,m} s_m
//! i ds_m/dt    = z_m s_m + Σ_j 𝔤*_{j,m} c_{j,r}
//! ```
//!
//! with complex pseudomode frequencies `z_m`. Norm leaks out through
//! `Im z_m < 0` into the ground state. There is no sink channel here.

use ndarray::Array2;

use super::ode::Integrator;
use crate::error::{Error, Result};
use crate::model::{validate_system, RunConfig, SinkSpec, StateIndex, SystemSpec};
use crate::observables::TimeSeries;
use crate::spectral::PseudomodeModel;
use crate::system::{build_eigenbasis, EigenBasis};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeState {
    /// Eigenmode amplitudes, `c[(j−1)·M + (l−1)]` for `|φ_j^l⟩`.
    pub c: Vec<C64>,
    /// Pseudomode amplitudes.
    pub s: Vec<C64>,
    /// Ground amplitude; constant in time.
    pub c0: C64,
}

impl AmplitudeState {
    /// Single excitation on site `site` of chain `chain`.
    pub fn site(spec: &SystemSpec, n_pseudomodes: usize, chain: usize, site: usize) -> Result<Self> {
        let basis = build_eigenbasis(spec.chain_len, spec.omega0, spec.j_coupling)?;
        let mut local = vec![C64::new(0.0, 0.0); spec.chain_len];
        local[site - 1] = C64::new(1.0, 0.0);
        let mut c = vec![C64::new(0.0, 0.0); spec.n_sites()];
        let m = spec.chain_len;
        c[(chain - 1) * m..chain * m].copy_from_slice(&basis.to_eigen(&local));
        Ok(AmplitudeState { c, s: vec![C64::new(0.0, 0.0); n_pseudomodes], c0: C64::new(0.0, 0.0) })
    }

    /// Single excitation in eigenmode `mode` of chain `chain`.
    pub fn eigenmode(spec: &SystemSpec, n_pseudomodes: usize, chain: usize, mode: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); spec.n_sites()];
        c[(chain - 1) * spec.chain_len + mode - 1] = C64::new(1.0, 0.0);
        AmplitudeState { c, s: vec![C64::new(0.0, 0.0); n_pseudomodes], c0: C64::new(0.0, 0.0) }
    }

    /// `Σ|c|² + Σ|s|² + |c₀|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().chain(&self.s).map(|z| z.norm_sqr()).sum::<f64>() + self.c0.norm_sqr()
    }
}

/// Evolves the amplitude equations and reports site-basis populations in the
/// [`StateIndex`] layout. The ground column holds `|c₀|²` plus the norm that
/// has leaked through pseudomode decay.
pub fn integrate_amplitudes(
    spec: &SystemSpec,
    pm: &PseudomodeModel,
    sink: &SinkSpec,
    a0: &AmplitudeState,
    run: &RunConfig,
) -> Result<TimeSeries> {
    if sink.gamma_sink != 0.0 {
        return Err(Error::SinkNotSupported(sink.gamma_sink));
    }
    validate_system(spec).into_result()?;
    let index = StateIndex::new(spec, pm.len());
    if a0.c.len() != index.n_sites() {
        return Err(Error::DimensionMismatch { expected: index.n_sites(), found: a0.c.len() });
    }
    if a0.s.len() != pm.len() {
        return Err(Error::DimensionMismatch { expected: pm.len(), found: a0.s.len() });
    }
    let basis = build_eigenbasis(spec.chain_len, spec.omega0, spec.j_coupling)?;
    let couplings = pm.couplings(&spec.omega_big);
    let poles: Vec<C64> = pm.modes.iter().map(|m| m.pole).collect();
    let (n, m, p) = (spec.n_chains, spec.chain_len, pm.len());
    let r = spec.r_index - 1;
    let ns = n * m;

    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        let minus_i = -C64::i();
        for j in 0..n {
            for l in 0..m {
                let k = j * m + l;
                let mut acc = basis.energies[l] * y[k];
                if l == r {
                    for (g, s) in couplings[j].iter().zip(&y[ns..]) {
                        acc += g * s;
                    }
                }
                dy[k] = minus_i * acc;
            }
        }
        for q in 0..p {
            let mut acc = poles[q] * y[ns + q];
            for j in 0..n {
                acc += couplings[j][q].conj() * y[j * m + r];
            }
            dy[ns + q] = minus_i * acc;
        }
    };

    let y0: Vec<C64> = a0.c.iter().chain(&a0.s).copied().collect();
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
    let c0 = a0.c0;
    let times = run.sample_times();
    Integrator::new(run.abs_tol, run.rel_tol).run(rhs, y0, &times, |_, _| Ok(()), |k, t, y| {
        record(&mut ts, k, t, y, c0, &basis, n, m);
        Ok(())
    })?;
    Ok(ts)
}

#[allow(clippy::too_many_arguments)]
fn record(ts: &mut TimeSeries, k: usize, t: f64, y: &[C64], c0: C64, basis: &EigenBasis, n: usize, m: usize) {
    let index = ts.index;
    let mut row = ts.populations.row_mut(k);
    let mut excited = 0.0;
    for j in 0..n {
        let site_amps = basis.to_site(&y[j * m..(j + 1) * m]);
        for (i, a) in site_amps.iter().enumerate() {
            let p = a.norm_sqr();
            row[index.site(j + 1, i + 1)] = p;
            excited += p;
        }
    }
    for (q, s) in y[n * m..].iter().enumerate() {
        let p = s.norm_sqr();
        row[index.pseudomode(q + 1)] = p;
        excited += p;
    }
    let leaked = (1.0 - excited - c0.norm_sqr()).max(0.0);
    row[index.ground()] = c0.norm_sqr() + leaked;
    row[index.sink()] = 0.0;
    // ρ = |ψ⟩⟨ψ| + leaked·|0⟩⟨0|, where ψ includes c₀.
    let psi_sqr = excited + c0.norm_sqr();
    let purity = psi_sqr * psi_sqr + 2.0 * leaked * c0.norm_sqr() + leaked * leaked;
    ts.times.push(t);
    ts.purity.push(purity);
    ts.trace_error.push((row.sum() - 1.0).abs());
    ts.min_eigenvalue.push(0.0);
    ts.hermiticity_error.push(0.0);
}
