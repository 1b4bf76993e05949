use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, ArrayViewMut2};

use super::ExtendedState;
use crate::error::{Error, Result};
use crate::model::SinkSpec;
use crate::spectral::PseudomodeModel;
use crate::system::{Basis, ExtendedHamiltonian};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    /// Decay of pseudomode `l` (1-based) into the ground state.
    Pseudomode(usize),
    /// Irreversible transfer from the attach site into the sink.
    Sink,
}

/// A term `rate · (L ρ L† − ½{L†L, ρ})` whose jump `L` moves the excitation
/// from one basis state to another.
#[derive(Clone, Debug, PartialEq)]
pub struct Dissipator {
    pub channel: Channel,
    pub rate: f64,
    pub jump: Array2<C64>,
    from: usize,
    to: usize,
    amplitude: C64,
}

impl Dissipator {
    /// Fails unless `rate ≥ 0` and `jump` has exactly one nonzero entry off
    /// the diagonal.
    pub fn new(channel: Channel, rate: f64, jump: Array2<C64>) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::Config(format!("dissipator rate must be non-negative, got {rate}")));
        }
        let nonzero: Vec<_> = jump.indexed_iter().filter(|(_, z)| z.norm() != 0.0).collect();
        match nonzero.as_slice() {
            [((to, from), &amplitude)] if to != from => {
                let (to, from) = (*to, *from);
                Ok(Dissipator { channel, rate, jump, from, to, amplitude })
            }
            _ => Err(Error::Config(format!(
                "{channel:?} jump must transfer exactly one excitation ({} nonzero entries)",
                nonzero.len()
            ))),
        }
    }

    /// `|to⟩⟨from|` with unit amplitude.
    pub fn transfer(channel: Channel, rate: f64, dim: usize, from: usize, to: usize) -> Result<Self> {
        let mut jump = Array2::zeros((dim, dim));
        jump[[to, from]] = C64::new(1.0, 0.0);
        Self::new(channel, rate, jump)
    }

    pub fn source(&self) -> usize {
        self.from
    }

    pub fn target(&self) -> usize {
        self.to
    }
}

/// `dρ/dt = −i[H, ρ] + Σ_k γ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladGenerator {
    pub hamiltonian: ExtendedHamiltonian,
    pub dissipators: Vec<Dissipator>,
}

impl LindbladGenerator {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// The sink channel as a [`SinkSpec`], if present.
    pub fn sink_spec(&self) -> Option<SinkSpec> {
        let d = self.dissipators.iter().find(|d| d.channel == Channel::Sink)?;
        let (_, attach_site) = self.hamiltonian.index.decode_site(d.from)?;
        Some(SinkSpec { gamma_sink: d.rate, attach_site })
    }

    /// Writes `𝔏(ρ)` into `out` without forming the superoperator.
    pub fn apply_into(&self, rho: ArrayView2<C64>, mut out: ArrayViewMut2<C64>) {
        let h = &self.hamiltonian.matrix;
        let minus_i = -C64::i();
        // out = −i H ρ + i ρ H
        general_mat_mul(minus_i, h, &rho, C64::new(0.0, 0.0), &mut out);
        general_mat_mul(C64::i(), &rho, h, C64::new(1.0, 0.0), &mut out);
        for d in &self.dissipators {
            if d.rate == 0.0 {
                continue;
            }
            let g = d.rate * d.amplitude.norm_sqr();
            let (f, t) = (d.from, d.to);
            out[[t, t]] += g * rho[[f, f]];
            let half = 0.5 * g;
            for k in 0..rho.ncols() {
                out[[f, k]] -= half * rho[[f, k]];
                out[[k, f]] -= half * rho[[k, f]];
            }
        }
    }
}

/// One pseudomode dissipator per mode at rate `−2 Im z_l`, plus the sink
/// dissipator from site `attach_site` of chain 1.
pub fn build_generator(h: &ExtendedHamiltonian, pm: &PseudomodeModel, sink: &SinkSpec) -> Result<LindbladGenerator> {
    if h.basis != Basis::Site {
        return Err(Error::SinkInEigenBasis);
    }
    let index = h.index;
    if pm.len() != index.n_pseudomodes {
        return Err(Error::DimensionMismatch { expected: index.n_pseudomodes, found: pm.len() });
    }
    if sink.attach_site < 1 || sink.attach_site > index.chain_len {
        return Err(Error::Config(format!(
            "attach_site out of range: {} not in [1, {}]",
            sink.attach_site, index.chain_len
        )));
    }
    let d = index.dim();
    let mut dissipators = Vec::with_capacity(pm.len() + 1);
    for (l, mode) in pm.modes.iter().enumerate() {
        dissipators.push(Dissipator::transfer(
            Channel::Pseudomode(l + 1),
            mode.decay_rate(),
            d,
            index.pseudomode(l + 1),
            index.ground(),
        )?);
    }
    dissipators.push(Dissipator::transfer(
        Channel::Sink,
        sink.gamma_sink,
        d,
        index.site(1, sink.attach_site),
        index.sink(),
    )?);
    Ok(LindbladGenerator { hamiltonian: h.clone(), dissipators })
}

/// Right-hand side `𝔏(ρ)` of the master equation.
pub fn apply_generator(gen: &LindbladGenerator, rho: &ExtendedState) -> Result<Array2<C64>> {
    let d = gen.dim();
    if rho.rho.dim() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: rho.rho.nrows() });
    }
    let mut out = Array2::zeros((d, d));
    gen.apply_into(rho.rho.view(), out.view_mut());
    Ok(out)
}
