//! Pseudomode simulation of excitation transport through a dissipative XY
//! spin channel.
//!
//! `N` identical XY chains of length `M` share a single Lorentzian (or
//! Lorentzian-sum) reservoir. Each pole of the reservoir structure function
//! becomes a damped pseudomode, which turns the non-Markovian chain dynamics
//! into an exact Lindblad equation on an enlarged single-excitation space
//! `{ground, N·M sites, pseudomodes, sink}`. The last site of chain 1 feeds an
//! absorbing sink whose population measures transport efficiency.
//!
//! Module map:
//! - [`model`]: user-facing specifications, the JSON config, and the
//!   canonical state indexing.
//! - [`spectral`]: structure function, poles/residues, pseudomode couplings.
//! - [`system`]: chain eigenbasis and the extended Hamiltonian.
//! - [`dynamics`]: Lindblad integration plus the amplitude and
//!   discretized-bath oracles.
//! - [`observables`]: sink population and run comparisons.
//! - [`verify`]: the built-in oracle checks run by `pmtransport verify`.
//! - [`cli`]: command-line front end.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod observables;
pub mod spectral;
pub mod system;
pub mod verify;

mod linalg;

pub use error::{Error, Result};

/// Complex double used for all amplitudes and matrix elements.
pub type C64 = num_complex::Complex64;

use dynamics::{build_generator, integrate, ExtendedState};
use model::{Resolved, StateIndex};
use observables::TimeSeries;

/// Builds the site-basis model for a resolved configuration and integrates
/// the master equation from `run.initial_site` on chain 1.
pub fn simulate(resolved: &Resolved) -> Result<TimeSeries> {
    let pm = spectral::extract_pseudomodes(&resolved.density)?;
    let h = system::build_site_hamiltonian(&resolved.system, &pm)?;
    let gen = build_generator(&h, &pm, &resolved.sink)?;
    let index = StateIndex::new(&resolved.system, pm.len());
    let rho0 = ExtendedState::site_excitation(&index, 1, resolved.run.initial_site);
    integrate(&gen, &rho0, &resolved.run)
}
