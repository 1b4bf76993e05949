//! Chain eigenbasis and the extended Hamiltonian over
//! `{ground, sites, pseudomodes, sink}`.
//!
//! In the site basis each chain is a uniform XY chain with on-site energy
//! `ω₀` and hopping `J`. Its single-excitation eigenstates are the sine modes
//! `|φ^l⟩ = Σ_i u_{li} |i⟩` with `u_{li} = √(2/(M+1)) sin(i q_l)`,
//! `q_l = πl/(M+1)`, and energies `E_l = ω₀ + 2J cos q_l`. With reservoir
//! couplings shaped as `u_{rl}`, only mode `r` of every chain talks to the
//! pseudomodes; the other `(M−1)·N` modes form a decoupled subspace.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{validate_system, StateIndex, SystemSpec, DIMENSION_CAP};
use crate::spectral::PseudomodeModel;
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenBasis {
    /// `u[[l-1, i-1]] = u_{li}`; rows are eigenmodes, columns sites.
    pub u: Array2<f64>,
    pub energies: Vec<f64>,
    pub wavenumbers: Vec<f64>,
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Eigen amplitudes `c_l = Σ_i u_{li} ψ_i` of one chain's site amplitudes.
    pub fn to_eigen(&self, site: &[C64]) -> Vec<C64> {
        self.u.rows().into_iter().map(|row| row.iter().zip(site).map(|(&u, &a)| u * a).sum()).collect()
    }

    /// Site amplitudes `ψ_i = Σ_l u_{li} c_l`.
    pub fn to_site(&self, eigen: &[C64]) -> Vec<C64> {
        self.u.columns().into_iter().map(|col| col.iter().zip(eigen).map(|(&u, &c)| u * c).sum()).collect()
    }
}

pub fn build_eigenbasis(chain_len: usize, omega0: f64, j_coupling: f64) -> Result<EigenBasis> {
    if chain_len < 1 {
        return Err(Error::Config("chain length must be at least 1".into()));
    }
    let m = chain_len as f64;
    let norm = (2.0 / (m + 1.0)).sqrt();
    let wavenumbers: Vec<f64> = (1..=chain_len).map(|l| PI * l as f64 / (m + 1.0)).collect();
    let u = Array2::from_shape_fn((chain_len, chain_len), |(l, i)| {
        norm * ((i + 1) as f64 * wavenumbers[l]).sin()
    });
    let energies = wavenumbers.iter().map(|q| omega0 + 2.0 * j_coupling * q.cos()).collect();
    Ok(EigenBasis { u, energies, wavenumbers })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// Chain blocks indexed by site.
    Site,
    /// Chain blocks indexed by eigenmode `|φ_j^l⟩`.
    Eigen,
}

/// Hermitian Hamiltonian on the extended single-excitation space.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedHamiltonian {
    pub matrix: Array2<C64>,
    pub basis: Basis,
    pub index: StateIndex,
}

impl ExtendedHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The `M×M` block of chain `chain` (1-based).
    pub fn chain_block(&self, chain: usize) -> Array2<C64> {
        let m = self.index.chain_len;
        let start = self.index.site(chain, 1);
        self.matrix.slice(ndarray::s![start..start + m, start..start + m]).to_owned()
    }

    /// Writes real and imaginary parts row-major: one CSV line per matrix row,
    /// columns `re_0,im_0,re_1,im_1,…`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let d = self.dim();
        let mut out = String::new();
        out.push_str("row");
        for k in 0..d {
            write!(out, ",re_{k},im_{k}").unwrap();
        }
        out.push('\n');
        for (i, row) in self.matrix.rows().into_iter().enumerate() {
            write!(out, "{i}").unwrap();
            for z in row {
                write!(out, ",{:.17e},{:.17e}", z.re + 0.0, z.im + 0.0).unwrap();
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

fn checked_index(spec: &SystemSpec, pm: &PseudomodeModel, cap: usize) -> Result<StateIndex> {
    validate_system(spec).into_result()?;
    if pm.is_empty() {
        return Err(Error::SpectralDensity("pseudomode model has no modes".into()));
    }
    let index = StateIndex::new(spec, pm.len());
    if index.dim() > cap {
        return Err(Error::DimensionCap { dimension: index.dim(), cap });
    }
    Ok(index)
}

/// Site-basis Hamiltonian: on-site `ω₀`, nearest-neighbour `J` within each
/// chain, pseudomode energies `Re z_l`, and site `(j, i)` coupled to
/// pseudomode `l` with `Ω_j √(−i r_l) u_{ri}`.
pub fn build_site_hamiltonian(spec: &SystemSpec, pm: &PseudomodeModel) -> Result<ExtendedHamiltonian> {
    build_site_hamiltonian_capped(spec, pm, DIMENSION_CAP)
}

pub fn build_site_hamiltonian_capped(
    spec: &SystemSpec,
    pm: &PseudomodeModel,
    cap: usize,
) -> Result<ExtendedHamiltonian> {
    let index = checked_index(spec, pm, cap)?;
    let basis = build_eigenbasis(spec.chain_len, spec.omega0, spec.j_coupling)?;
    let couplings = pm.couplings(&spec.omega_big);
    let r = spec.r_index - 1;
    let mut h = Array2::<C64>::zeros((index.dim(), index.dim()));
    for chain in 1..=spec.n_chains {
        for site in 1..=spec.chain_len {
            let a = index.site(chain, site);
            h[[a, a]] = spec.omega0.into();
            if site < spec.chain_len {
                h[[a, a + 1]] = spec.j_coupling.into();
                h[[a + 1, a]] = spec.j_coupling.into();
            }
            for (l, g) in couplings[chain - 1].iter().enumerate() {
                let b = index.pseudomode(l + 1);
                let v = g * basis.u[[r, site - 1]];
                h[[a, b]] = v;
                h[[b, a]] = v.conj();
            }
        }
    }
    set_pseudomode_energies(&mut h, &index, pm);
    Ok(ExtendedHamiltonian { matrix: h, basis: Basis::Site, index })
}

/// Eigen-basis Hamiltonian: diagonal `E_l` per chain and coupling `Ω_j √(−i r_l)`
/// only on the `r`-th eigenmode of each chain.
pub fn build_eigen_hamiltonian(spec: &SystemSpec, pm: &PseudomodeModel) -> Result<ExtendedHamiltonian> {
    let index = checked_index(spec, pm, DIMENSION_CAP)?;
    let basis = build_eigenbasis(spec.chain_len, spec.omega0, spec.j_coupling)?;
    let couplings = pm.couplings(&spec.omega_big);
    let mut h = Array2::<C64>::zeros((index.dim(), index.dim()));
    for chain in 1..=spec.n_chains {
        for mode in 1..=spec.chain_len {
            let a = index.site(chain, mode);
            h[[a, a]] = basis.energies[mode - 1].into();
        }
        let a = index.site(chain, spec.r_index);
        for (l, g) in couplings[chain - 1].iter().enumerate() {
            let b = index.pseudomode(l + 1);
            h[[a, b]] = *g;
            h[[b, a]] = g.conj();
        }
    }
    set_pseudomode_energies(&mut h, &index, pm);
    Ok(ExtendedHamiltonian { matrix: h, basis: Basis::Eigen, index })
}

fn set_pseudomode_energies(h: &mut Array2<C64>, index: &StateIndex, pm: &PseudomodeModel) {
    for (l, mode) in pm.modes.iter().enumerate() {
        let b = index.pseudomode(l + 1);
        h[[b, b]] = mode.frequency().into();
    }
}

/// Conjugates every chain block by `u` (site → eigen) or `uᵀ` (eigen → site),
/// leaving the ground, pseudomode and sink rows alone.
pub fn change_of_basis(h: &ExtendedHamiltonian, basis: &EigenBasis) -> Result<ExtendedHamiltonian> {
    let m = h.index.chain_len;
    if basis.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: basis.len() });
    }
    let d = h.dim();
    let mut t = Array2::<C64>::eye(d);
    for chain in 1..=h.index.n_chains {
        let start = h.index.site(chain, 1);
        for l in 0..m {
            for i in 0..m {
                t[[start + l, start + i]] = basis.u[[l, i]].into();
            }
        }
    }
    // u is real, so the adjoint is the transpose.
    let (matrix, tag) = match h.basis {
        Basis::Site => (t.dot(&h.matrix).dot(&t.t()), Basis::Eigen),
        Basis::Eigen => (t.t().dot(&h.matrix).dot(&t), Basis::Site),
    };
    Ok(ExtendedHamiltonian { matrix, basis: tag, index: h.index })
}
