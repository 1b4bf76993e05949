//! Built-in consistency checks: analytic limits, agreement between the three
//! solvers, and properties of the pseudomode decomposition. Each check runs on
//! fixed parameters and seeds, so reports are reproducible.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{
    build_generator, integrate, integrate_amplitudes, integrate_discretized_bath, integrate_states, AmplitudeState,
    ExtendedState, STATE_TOL,
};
use crate::error::Result;
use crate::model::{RunConfig, SinkSpec, StateIndex, SystemSpec};
use crate::observables::{sink_population, TimeSeries};
use crate::spectral::{evaluate_density, extract_pseudomodes, LorentzianTerm, PseudomodeModel, SpectralDensity};
use crate::system::{build_eigenbasis, build_site_hamiltonian, build_eigen_hamiltonian};

pub const DEFAULT_BATH_MODES: usize = 2000;
const SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Largest grid used by the discretized-bath comparison.
    pub bath_modes: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { bath_modes: DEFAULT_BATH_MODES }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckResult { name, passed, detail }
    }

    fn within(name: &'static str, deviation: f64, bound: f64) -> Self {
        CheckResult::new(name, deviation <= bound, format!("deviation {deviation:.3e} (bound {bound:.0e})"))
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

type Check = fn(&VerifyOptions) -> Result<CheckResult>;

const CHECKS: [(&str, Check); 9] = [
    ("residue_normalization", |_| residue_normalization()),
    ("density_quadrature", |_| density_quadrature()),
    ("two_level_sink_decay", |_| two_level_sink_decay()),
    ("vacuum_rabi", |_| vacuum_rabi()),
    ("amplitude_equivalence", |_| amplitude_equivalence()),
    ("bath_equivalence", bath_equivalence),
    ("bath_refinement", bath_refinement),
    ("noise_free_subspace", |_| noise_free_subspace()),
    ("state_invariants", |_| state_invariants()),
];

/// Runs every check in parallel. Results come back in a fixed order; a check
/// that errors is reported as a failure.
pub fn run_all(opts: &VerifyOptions) -> Vec<CheckResult> {
    CHECKS
        .par_iter()
        .map(|(name, check)| {
            check(opts).unwrap_or_else(|e| CheckResult::new(name, false, format!("error: {e}")))
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_density(rng: &mut ChaCha8Rng) -> Result<SpectralDensity> {
    let n = rng.random_range(1..=4);
    let mut terms: Vec<LorentzianTerm> = (0..n)
        .map(|_| LorentzianTerm {
            weight: rng.random_range(0.05..1.0),
            center: rng.random_range(0.5..1.5),
            width: rng.random_range(0.01..1.0),
        })
        .collect();
    let total: f64 = terms.iter().map(|t| t.weight).sum();
    for t in &mut terms {
        t.weight /= total;
    }
    SpectralDensity::sum(terms)
}

/// `Σ(−i r) = 1` and partial-fraction reconstruction of `D` for the
/// Lorentzian and a set of random sums.
pub fn residue_normalization() -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut densities = vec![SpectralDensity::lorentzian(1.02, 0.1)?];
    for _ in 0..20 {
        densities.push(random_density(&mut rng)?);
    }
    let mut worst_sum = 0.0f64;
    let mut worst_rebuild = 0.0f64;
    for sd in &densities {
        let pm = extract_pseudomodes(sd)?;
        worst_sum = worst_sum.max((pm.residue_sum() - 1.0).norm());
        for k in 0..200 {
            let w = -1.0 + 0.02 * k as f64;
            let exact = evaluate_density(sd, w);
            worst_rebuild = worst_rebuild.max((pm.reconstruct_density(w) - exact).abs() / exact.max(1e-300));
        }
    }
    let passed = worst_sum <= 1e-10 && worst_rebuild <= 1e-8;
    Ok(CheckResult::new(
        "residue_normalization",
        passed,
        format!("|Σ(−ir) − 1| = {worst_sum:.3e}, reconstruction error {worst_rebuild:.3e}"),
    ))
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + h * k as f64) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// `∫ D dω = 2π`: on the window `ω_c ± 10³Γ` to relative `10⁻³`, and over the
/// whole line (via `ω = ω_c + tan θ`) to relative `10⁻⁶`.
pub fn density_quadrature() -> Result<CheckResult> {
    let (omega_c, gamma) = (1.02, 0.1);
    let sd = SpectralDensity::lorentzian(omega_c, gamma)?;
    let half = 1e3 * gamma;
    let window = simpson(|w| evaluate_density(&sd, w), omega_c - half, omega_c + half, 400_000);
    let window_dev = (window / (2.0 * PI) - 1.0).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let mut full_dev = 0.0f64;
    let mut densities = vec![sd];
    for _ in 0..5 {
        densities.push(random_density(&mut rng)?);
    }
    for sd in &densities {
        let c = sd.center();
        let full = simpson(
            |th| {
                let cos = th.cos();
                if cos.abs() < 1e-300 {
                    return 0.0;
                }
                evaluate_density(sd, c + th.tan()) / (cos * cos)
            },
            -0.5 * PI,
            0.5 * PI,
            200_000,
        );
        full_dev = full_dev.max((full / (2.0 * PI) - 1.0).abs());
    }
    let passed = window_dev <= 1e-3 && full_dev <= 1e-6;
    Ok(CheckResult::new(
        "density_quadrature",
        passed,
        format!("window relative error {window_dev:.3e} (bound 1e-3), full line {full_dev:.3e} (bound 1e-6)"),
    ))
}

/// One site, no reservoir coupling: `P_sink(t) = 1 − e^{−Γ_s t}`.
pub fn two_level_sink_decay() -> Result<CheckResult> {
    let gamma_sink = 0.6;
    let spec = SystemSpec::uniform(1, 1, 1.0, 0.1, 1, 0.0);
    let sd = SpectralDensity::lorentzian(1.02, 0.1)?;
    let pm = extract_pseudomodes(&sd)?;
    let h = build_site_hamiltonian(&spec, &pm)?;
    let gen = build_generator(&h, &pm, &SinkSpec::at_end(&spec, gamma_sink))?;
    let index = StateIndex::new(&spec, pm.len());
    let run = RunConfig::new(20.0, 201).with_tolerances(1e-11, 1e-11);
    let ts = integrate(&gen, &ExtendedState::site_excitation(&index, 1, 1), &run)?;
    let exact: Vec<f64> = ts.times.iter().map(|t| 1.0 - (-gamma_sink * t).exp()).collect();
    Ok(CheckResult::within("two_level_sink_decay", max_abs_diff(&sink_population(&ts), &exact), 1e-6))
}

/// One site resonant with a lossless mode: `P_site(t) = cos²(Ω t)`.
pub fn vacuum_rabi() -> Result<CheckResult> {
    let omega = 0.15;
    let spec = SystemSpec::uniform(1, 1, 1.0, 0.1, 1, omega);
    let pm = PseudomodeModel::lossless(1.0);
    let h = build_site_hamiltonian(&spec, &pm)?;
    let gen = build_generator(&h, &pm, &SinkSpec::at_end(&spec, 0.0))?;
    let index = StateIndex::new(&spec, pm.len());
    let run = RunConfig::new(100.0, 401).with_tolerances(1e-11, 1e-11);
    let ts = integrate(&gen, &ExtendedState::site_excitation(&index, 1, 1), &run)?;
    let exact: Vec<f64> = ts.times.iter().map(|t| (omega * t).cos().powi(2)).collect();
    Ok(CheckResult::within("vacuum_rabi", max_abs_diff(&ts.site_column(1, 1), &exact), 1e-6))
}

fn max_population_diff(a: &TimeSeries, b: &TimeSeries) -> f64 {
    (&a.populations - &b.populations).iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Amplitude equations against the master equation without a sink, for
/// random systems and densities.
pub fn amplitude_equivalence() -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=4);
        let r = rng.random_range(1..=m);
        let omega_big: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.3)).collect();
        let spec = SystemSpec {
            n_chains: n,
            chain_len: m,
            omega0: 1.0,
            j_coupling: rng.random_range(0.05..0.2),
            r_index: r,
            omega_big,
        };
        let sd = if rng.random_bool(0.5) {
            SpectralDensity::lorentzian(rng.random_range(0.9..1.1), rng.random_range(0.05..0.5))?
        } else {
            random_density(&mut rng)?
        };
        let pm = extract_pseudomodes(&sd)?;
        let no_sink = SinkSpec::at_end(&spec, 0.0);
        let start = rng.random_range(1..=m);
        let run = RunConfig::new(30.0, 61).with_tolerances(1e-12, 1e-12);

        let a0 = AmplitudeState::site(&spec, pm.len(), 1, start)?;
        let amp = integrate_amplitudes(&spec, &pm, &no_sink, &a0, &run)?;

        let h = build_site_hamiltonian(&spec, &pm)?;
        let gen = build_generator(&h, &pm, &no_sink)?;
        let index = StateIndex::new(&spec, pm.len());
        let lind = integrate(&gen, &ExtendedState::site_excitation(&index, 1, start), &run)?;
        worst = worst.max(max_population_diff(&amp, &lind));
    }
    Ok(CheckResult::within("amplitude_equivalence", worst, 1e-8))
}

fn bath_reference(bath_modes: usize, t_scale: f64) -> Result<(TimeSeries, TimeSeries)> {
    let spec = SystemSpec::uniform(1, 3, 1.0, 0.1, 1, 0.15);
    let sd = SpectralDensity::lorentzian(1.02, 0.1)?;
    let run = RunConfig::new(t_scale / 0.1, 101).with_tolerances(1e-10, 1e-10);
    let bath = integrate_discretized_bath(&spec, &sd, bath_modes, &run)?;
    let no_sink = SinkSpec::at_end(&spec, 0.0);
    let pm = extract_pseudomodes(&sd)?;
    let a0 = AmplitudeState::site(&spec, pm.len(), 1, 1)?;
    let amp = integrate_amplitudes(&spec, &pm, &no_sink, &a0, &run)?;
    Ok((bath, amp))
}

fn site_deviation(bath: &TimeSeries, amp: &TimeSeries) -> f64 {
    let index = amp.index;
    (1..=index.chain_len)
        .map(|i| max_abs_diff(&bath.site_column(1, i), &amp.site_column(1, i)))
        .fold(0.0, f64::max)
}

/// Site populations from an explicitly discretized reservoir against the
/// single-pseudomode model over `t ∈ [0, 5/Γ]`.
pub fn bath_equivalence(opts: &VerifyOptions) -> Result<CheckResult> {
    let (bath, amp) = bath_reference(opts.bath_modes, 5.0)?;
    let dev = site_deviation(&bath, &amp);
    Ok(CheckResult::new(
        "bath_equivalence",
        dev <= 1e-2,
        format!("{} modes: deviation {dev:.3e} (bound 1e-2)", opts.bath_modes),
    ))
}

/// Mode counts for the refinement study: halvings down from `bath_modes`,
/// or doublings up from it when halving would go below the minimum.
pub fn refinement_ladder(bath_modes: usize) -> Vec<usize> {
    if bath_modes / 8 >= crate::dynamics::MIN_BATH_MODES {
        vec![bath_modes / 8, bath_modes / 4, bath_modes / 2, bath_modes]
    } else {
        vec![bath_modes, 2 * bath_modes, 4 * bath_modes, 8 * bath_modes]
    }
}

/// Deviation from the pseudomode model must shrink at every refinement.
pub fn bath_refinement(opts: &VerifyOptions) -> Result<CheckResult> {
    let ladder = refinement_ladder(opts.bath_modes);
    let devs: Vec<f64> = ladder
        .par_iter()
        .map(|&k| bath_reference(k, 5.0).map(|(b, a)| site_deviation(&b, &a)))
        .collect::<Result<_>>()?;
    let passed = devs.windows(2).all(|w| w[1] < w[0]);
    let detail = ladder.iter().zip(&devs).map(|(k, d)| format!("{k}: {d:.2e}")).collect::<Vec<_>>().join(", ");
    Ok(CheckResult::new("bath_refinement", passed, detail))
}

/// Chain eigenmodes that do not couple to the reservoir keep their
/// population when the sink is off.
pub fn noise_free_subspace() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut dark_ok = true;
    for m in [3usize, 5] {
        let spec = SystemSpec::uniform(2, m, 1.0, 0.1, 1, 0.15);
        let sd = SpectralDensity::lorentzian(1.02, 0.1)?;
        let pm = extract_pseudomodes(&sd)?;
        let he = build_eigen_hamiltonian(&spec, &pm)?;
        let index = he.index;
        let ns = index.n_sites();
        let dark = (1..=ns)
            .filter(|&k| ((ns + 1)..(ns + 1 + pm.len())).all(|p| he.matrix[[k, p]].norm() == 0.0))
            .count();
        dark_ok &= dark == (m - 1) * spec.n_chains;

        let basis = build_eigenbasis(m, spec.omega0, spec.j_coupling)?;
        let h = build_site_hamiltonian(&spec, &pm)?;
        let gen = build_generator(&h, &pm, &SinkSpec::at_end(&spec, 0.0))?;
        let run = RunConfig::new(100.0, 21).with_tolerances(1e-11, 1e-11);
        for chain in 1..=spec.n_chains {
            for mode in (1..=m).filter(|&l| l != spec.r_index) {
                let rho0 = ExtendedState::eigenmode(&index, &basis, chain, mode);
                for state in integrate_states(&gen, &rho0, &run)? {
                    let p = state.eigenmode_population(&index, &basis, chain, mode);
                    worst = worst.max((p - 1.0).abs());
                }
            }
        }
    }
    Ok(CheckResult::new(
        "noise_free_subspace",
        dark_ok && worst <= 1e-8,
        format!("dark-mode count {}, population drift {worst:.3e} (bound 1e-8)", if dark_ok { "ok" } else { "wrong" }),
    ))
}

/// Trace, Hermiticity and positivity on a two-chain run with a sink.
pub fn state_invariants() -> Result<CheckResult> {
    let spec = SystemSpec::uniform(2, 3, 1.0, 0.1, 1, 0.15);
    let sd = SpectralDensity::lorentzian(1.02, 0.1)?;
    let pm = extract_pseudomodes(&sd)?;
    let h = build_site_hamiltonian(&spec, &pm)?;
    let gen = build_generator(&h, &pm, &SinkSpec::at_end(&spec, 0.6))?;
    let index = StateIndex::new(&spec, pm.len());
    let ts = integrate(&gen, &ExtendedState::site_excitation(&index, 1, 1), &RunConfig::new(200.0, 2001))?;
    let trace = ts.trace_error.iter().copied().fold(0.0, f64::max);
    let herm = ts.hermiticity_error.iter().copied().fold(0.0, f64::max);
    let min_eig = ts.min_eigenvalue.iter().copied().fold(f64::INFINITY, f64::min);
    let passed = trace <= STATE_TOL.trace && herm <= STATE_TOL.hermiticity && min_eig >= -STATE_TOL.positivity;
    Ok(CheckResult::new(
        "state_invariants",
        passed,
        format!("trace error {trace:.2e}, hermiticity error {herm:.2e}, min eigenvalue {min_eig:.2e}"),
    ))
}
