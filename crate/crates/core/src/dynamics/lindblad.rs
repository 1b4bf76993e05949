use std::cell::Cell;

use ndarray::{Array2, ArrayView2, ArrayViewMut2};

use super::ode::Integrator;
use super::{ExtendedState, LindbladGenerator, StateTolerances};
use crate::error::{Error, Result};
use crate::model::RunConfig;
use crate::observables::TimeSeries;
use crate::{linalg, C64};

/// Invariant thresholds every sampled state must meet.
pub const STATE_TOL: StateTolerances = StateTolerances { trace: 1e-9, hermiticity: 1e-9, positivity: 1e-7 };

/// Mid-run violations beyond this multiple of [`STATE_TOL`] abort the run.
const ABORT_FACTOR: f64 = 10.0;

/// Integrates the master equation and records populations and diagnostics at
/// `run.sample_count` uniformly spaced times.
pub fn integrate(gen: &LindbladGenerator, rho0: &ExtendedState, run: &RunConfig) -> Result<TimeSeries> {
    let n = run.sample_count;
    let d = gen.dim();
    let mut ts = TimeSeries {
        index: gen.hamiltonian.index,
        times: Vec::with_capacity(n),
        populations: Array2::zeros((n, d)),
        purity: Vec::with_capacity(n),
        trace_error: Vec::with_capacity(n),
        min_eigenvalue: Vec::with_capacity(n),
        hermiticity_error: Vec::with_capacity(n),
        sink: gen.sink_spec(),
    };
    evolve(gen, rho0, run, |k, state, herm| {
        let check = state.check();
        ts.times.push(state.time);
        for (slot, p) in ts.populations.row_mut(k).iter_mut().zip(state.populations()) {
            *slot = p;
        }
        ts.purity.push(state.purity());
        ts.trace_error.push(check.trace_error);
        ts.min_eigenvalue.push(check.min_eigenvalue);
        ts.hermiticity_error.push(herm);
        if check.min_eigenvalue < -ABORT_FACTOR * STATE_TOL.positivity {
            return Err(Error::Invariant {
                time: state.time,
                detail: format!("negative eigenvalue {:.3e}", check.min_eigenvalue),
            });
        }
        Ok(())
    })?;
    Ok(ts)
}

/// Like [`integrate`] but returns the full sampled density matrices.
pub fn integrate_states(gen: &LindbladGenerator, rho0: &ExtendedState, run: &RunConfig) -> Result<Vec<ExtendedState>> {
    let mut out = Vec::with_capacity(run.sample_count);
    evolve(gen, rho0, run, |_, state, _| {
        out.push(state.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Shared driver: `sample(k, state, hermiticity_error)` where the Hermiticity
/// error is the largest seen before re-symmetrization since the last sample.
fn evolve<S>(gen: &LindbladGenerator, rho0: &ExtendedState, run: &RunConfig, mut sample: S) -> Result<()>
where
    S: FnMut(usize, &ExtendedState, f64) -> Result<()>,
{
    let d = gen.dim();
    if rho0.rho.dim() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.rho.nrows() });
    }
    rho0.validate(STATE_TOL)?;

    let y0: Vec<C64> = rho0.rho.iter().copied().collect();
    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        let rho = ArrayView2::from_shape((d, d), y).expect("square state");
        let out = ArrayViewMut2::from_shape((d, d), dy).expect("square state");
        gen.apply_into(rho, out);
    };
    let drift = Cell::new(0.0f64);
    let post_step = |t: f64, y: &mut [C64]| -> Result<()> {
        let mut rho = ArrayViewMut2::from_shape((d, d), y).expect("square state");
        let herm = linalg::hermiticity_error(&rho);
        let trace_err = (linalg::trace(&rho) - 1.0).norm();
        if trace_err > ABORT_FACTOR * STATE_TOL.trace || herm > ABORT_FACTOR * STATE_TOL.hermiticity {
            return Err(Error::Invariant {
                time: t,
                detail: format!("trace error {trace_err:.3e}, hermiticity error {herm:.3e}"),
            });
        }
        drift.set(drift.get().max(herm));
        linalg::symmetrize(&mut rho);
        Ok(())
    };
    let times = run.sample_times();
    Integrator::new(run.abs_tol, run.rel_tol).run(rhs, y0, &times, post_step, |k, t, y| {
        let rho = Array2::from_shape_vec((d, d), y.to_vec()).expect("square state");
        sample(k, &ExtendedState { rho, time: t }, drift.replace(0.0))
    })?;
    Ok(())
}
