//! Time evolution of the extended system.
//!
//! Three routes share one state layout:
//! - [`integrate`]: the Lindblad master equation on the density matrix, with
//!   pseudomode decay and the sink channel (production path);
//! - [`integrate_amplitudes`]: the coupled chain/pseudomode amplitude
//!   equations, valid without a sink;
//! - [`integrate_discretized_bath`]: the chains coupled to a finely sampled
//!   bosonic reservoir, the ground truth for the pseudomode reduction.

mod amplitudes;
mod bath;
mod generator;
mod lindblad;
pub mod ode;

pub use amplitudes::{integrate_amplitudes, AmplitudeState};
pub use bath::{
    integrate_discretized_bath, integrate_discretized_bath_with, BathOptions, DiscretizedBath,
    DEFAULT_WINDOW_WIDTHS, MIN_BATH_MODES,
};
pub use generator::{apply_generator, build_generator, Channel, Dissipator, LindbladGenerator};
pub use lindblad::{integrate, integrate_states, STATE_TOL};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::StateIndex;
use crate::system::EigenBasis;
use crate::C64;

/// Density matrix over the extended space at time `time`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedState {
    pub rho: Array2<C64>,
    pub time: f64,
}

/// Invariant diagnostics of a density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateCheck {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

/// Thresholds for [`ExtendedState::validate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateTolerances {
    pub trace: f64,
    pub hermiticity: f64,
    /// Lower bound on the smallest eigenvalue is `-positivity`.
    pub positivity: f64,
}

impl StateTolerances {
    pub fn scaled(self, factor: f64) -> Self {
        StateTolerances {
            trace: self.trace * factor,
            hermiticity: self.hermiticity * factor,
            positivity: self.positivity * factor,
        }
    }
}

impl ExtendedState {
    /// `|ψ⟩⟨ψ|` for an amplitude vector over the extended space.
    pub fn pure(psi: &[C64]) -> Self {
        let d = psi.len();
        let rho = Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj());
        ExtendedState { rho, time: 0.0 }
    }

    /// Projector onto a single basis state.
    pub fn basis_state(dim: usize, state: usize) -> Self {
        let mut rho = Array2::zeros((dim, dim));
        rho[[state, state]] = C64::new(1.0, 0.0);
        ExtendedState { rho, time: 0.0 }
    }

    /// Excitation on one site, everything else empty.
    pub fn site_excitation(index: &StateIndex, chain: usize, site: usize) -> Self {
        Self::basis_state(index.dim(), index.site(chain, site))
    }

    /// Chain eigenmode `|φ_chain^mode⟩` expressed in the site basis.
    pub fn eigenmode(index: &StateIndex, basis: &EigenBasis, chain: usize, mode: usize) -> Self {
        let mut psi = vec![C64::new(0.0, 0.0); index.dim()];
        for i in 1..=index.chain_len {
            psi[index.site(chain, i)] = basis.u[[mode - 1, i - 1]].into();
        }
        Self::pure(&psi)
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.rho.diag().iter().map(|z| z.re).collect()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ_ij ρ_ij ρ_ji
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.rho[[i, j]] * self.rho[[j, i]];
            }
        }
        acc.re
    }

    /// Population of eigenmode `mode` of chain `chain`, `⟨φ|ρ|φ⟩`, for a
    /// site-basis state.
    pub fn eigenmode_population(&self, index: &StateIndex, basis: &EigenBasis, chain: usize, mode: usize) -> f64 {
        let start = index.site(chain, 1);
        let m = index.chain_len;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..m {
            for k in 0..m {
                acc += basis.u[[mode - 1, i]] * self.rho[[start + i, start + k]] * basis.u[[mode - 1, k]];
            }
        }
        acc.re
    }

    pub fn check(&self) -> StateCheck {
        let ev = linalg::hermitian_eigenvalues(&self.rho);
        StateCheck {
            trace_error: (linalg::trace(&self.rho) - 1.0).norm(),
            hermiticity_error: linalg::hermiticity_error(&self.rho),
            min_eigenvalue: ev.first().copied().unwrap_or(0.0),
        }
    }

    pub fn validate(&self, tol: StateTolerances) -> Result<StateCheck> {
        let c = self.check();
        let detail = if c.trace_error > tol.trace {
            Some(format!("trace deviates from 1 by {:.3e}", c.trace_error))
        } else if c.hermiticity_error > tol.hermiticity {
            Some(format!("hermiticity error {:.3e}", c.hermiticity_error))
        } else if c.min_eigenvalue < -tol.positivity {
            Some(format!("negative eigenvalue {:.3e}", c.min_eigenvalue))
        } else {
            None
        };
        match detail {
            Some(detail) => Err(Error::Invariant { time: self.time, detail }),
            None => Ok(c),
        }
    }
}
