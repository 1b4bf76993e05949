//! Reservoir structure function and its pseudomode decomposition.
//!
//! Supported densities are normalized sums of Lorentzians,
//!
//! ```text
//! D(ω) = Σ_m w_m Γ_m / ((ω − ω_m)² + (Γ_m/2)²),   Σ_m w_m = 1,
//! ```
//!
//! so that `∫ D dω = 2π`. Each term has a single simple pole in the lower
//! half plane at `z_m = ω_m − iΓ_m/2` with residue `r_m = i·w_m`, which gives
//! `−i r_m = w_m` and the normalization `Σ (−i r_m) = 1` for free.

use log::warn;

use crate::error::{Error, Result};
use crate::C64;

/// One Lorentzian term: `weight · width / ((ω − center)² + (width/2)²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianTerm {
    pub weight: f64,
    pub center: f64,
    /// Full width at half maximum `Γ`, which is also the pseudomode decay rate.
    pub width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityKind {
    Lorentzian,
    SumOfLorentzians,
}

/// Normalized structure function `D(ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDensity {
    kind: DensityKind,
    terms: Vec<LorentzianTerm>,
}

impl SpectralDensity {
    /// Single Lorentzian centred on `omega_c` with full width `gamma`.
    pub fn lorentzian(omega_c: f64, gamma: f64) -> Result<Self> {
        let term = LorentzianTerm { weight: 1.0, center: omega_c, width: gamma };
        check_term(&term)?;
        Ok(SpectralDensity { kind: DensityKind::Lorentzian, terms: vec![term] })
    }

    /// Sum of Lorentzians. Weights that do not add up to one are rescaled.
    pub fn sum(terms: Vec<LorentzianTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::SpectralDensity("a Lorentzian sum needs at least one term".into()));
        }
        terms.iter().try_for_each(check_term)?;
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        if total <= 0.0 || total.is_nan() {
            return Err(Error::SpectralDensity("weights sum to zero; density is not normalizable".into()));
        }
        let mut terms = terms;
        if (total - 1.0).abs() > 1e-12 {
            warn!("Lorentzian weights sum to {total}; rescaling to 1");
            for t in &mut terms {
                t.weight /= total;
            }
        }
        Ok(SpectralDensity { kind: DensityKind::SumOfLorentzians, terms })
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn terms(&self) -> &[LorentzianTerm] {
        &self.terms
    }

    /// Number of lower-half-plane poles carrying nonzero weight.
    pub fn n_poles(&self) -> usize {
        self.terms.iter().filter(|t| t.weight > 0.0).count()
    }

    /// Largest Lorentzian width.
    pub fn max_width(&self) -> f64 {
        self.terms.iter().map(|t| t.width).fold(0.0, f64::max)
    }

    /// Weighted mean of the term centres.
    pub fn center(&self) -> f64 {
        self.terms.iter().map(|t| t.weight * t.center).sum()
    }
}

fn check_term(t: &LorentzianTerm) -> Result<()> {
    if !(t.width > 0.0 && t.width.is_finite()) {
        return Err(Error::SpectralDensity(format!("width must be positive, got {}", t.width)));
    }
    if !(t.weight >= 0.0 && t.weight.is_finite()) {
        return Err(Error::SpectralDensity(format!("weight must be non-negative, got {}", t.weight)));
    }
    if !t.center.is_finite() {
        return Err(Error::SpectralDensity("centre must be finite".into()));
    }
    Ok(())
}

/// `D(ω)` on the real axis.
pub fn evaluate_density(sd: &SpectralDensity, omega: f64) -> f64 {
    sd.terms
        .iter()
        .map(|t| {
            let half = 0.5 * t.width;
            let d = omega - t.center;
            t.weight * t.width / (d * d + half * half)
        })
        .sum()
}

/// One pseudomode: a lower-half-plane pole `z` of `D` and its residue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pseudomode {
    pub pole: C64,
    pub residue: C64,
}

impl Pseudomode {
    /// `−i r`, the weight the pole contributes to the normalization.
    pub fn weight(&self) -> C64 {
        -C64::i() * self.residue
    }

    /// Principal square root `√(−i r)`; multiplying by `Ω_i` gives the
    /// coupling of level `i` to this mode.
    pub fn coupling_factor(&self) -> C64 {
        self.weight().sqrt()
    }

    /// Free oscillation frequency `Re z`.
    pub fn frequency(&self) -> f64 {
        self.pole.re
    }

    /// Lindblad decay rate `−2 Im z`.
    pub fn decay_rate(&self) -> f64 {
        -2.0 * self.pole.im
    }
}

/// Pseudomode decomposition of a structure function.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudomodeModel {
    pub modes: Vec<Pseudomode>,
}

impl PseudomodeModel {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// A single undamped mode at `omega_c` with unit weight: the `Γ → 0` limit
    /// of a Lorentzian.
    pub fn lossless(omega_c: f64) -> Self {
        PseudomodeModel { modes: vec![Pseudomode { pole: C64::new(omega_c, 0.0), residue: C64::i() }] }
    }

    /// `Σ_l (−i r_l)`; equals one for a normalized density.
    pub fn residue_sum(&self) -> C64 {
        self.modes.iter().map(Pseudomode::weight).sum()
    }

    /// `𝔤_il = Ω_i √(−i r_l)`, indexed `[level][mode]`.
    pub fn couplings(&self, omega_big: &[f64]) -> Vec<Vec<C64>> {
        omega_big
            .iter()
            .map(|&w| self.modes.iter().map(|m| w * m.coupling_factor()).collect())
            .collect()
    }

    /// Rebuilds `D(ω)` on the real axis from the partial fractions,
    /// `D(ω) = Σ_l 2 Re[r_l / (ω − z_l)]`.
    pub fn reconstruct_density(&self, omega: f64) -> f64 {
        self.modes.iter().map(|m| 2.0 * (m.residue / (omega - m.pole)).re).sum()
    }
}

/// One pseudomode per lower-half-plane pole, with residues from the closed
/// form partial fractions of each Lorentzian. Zero-weight terms have no pole
/// and are dropped.
pub fn extract_pseudomodes(sd: &SpectralDensity) -> Result<PseudomodeModel> {
    let modes: Vec<Pseudomode> = sd
        .terms
        .iter()
        .filter(|t| t.weight > 0.0)
        .map(|t| {
            // Γ / ((z − ω_c)² + (Γ/2)²) = Γ / ((z − z₋)(z − z₊)); at z₋ the
            // residue is Γ / (z₋ − z₊) = Γ / (−iΓ) = i.
            let lower = C64::new(t.center, -0.5 * t.width);
            let upper = lower.conj();
            let residue = t.weight * t.width / (lower - upper);
            Pseudomode { pole: lower, residue }
        })
        .collect();
    let total = modes.iter().map(Pseudomode::weight).sum::<C64>();
    if modes.is_empty() || (total - 1.0).norm() > 1e-10 {
        return Err(Error::SpectralDensity(format!(
            "density is not normalizable (Σ(−i r) = {total})"
        )));
    }
    Ok(PseudomodeModel { modes })
}

/// Memory kernel `G_ij(τ) = −i Ω_i Ω_j Σ_l r_l e^{−i z_l τ}` for `τ ≥ 0`.
pub fn kernel(sd: &SpectralDensity, omega_i: f64, omega_j: f64, dt: f64) -> C64 {
    let sum: C64 = sd
        .terms
        .iter()
        .filter(|t| t.weight > 0.0)
        .map(|t| {
            let pole = C64::new(t.center, -0.5 * t.width);
            let residue = C64::new(0.0, t.weight);
            residue * (-C64::i() * pole * dt).exp()
        })
        .sum();
    -C64::i() * omega_i * omega_j * sum
}
