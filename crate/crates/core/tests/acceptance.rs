//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pmtransport::dynamics::{
    build_generator, integrate, integrate_amplitudes, integrate_discretized_bath, integrate_states, AmplitudeState,
    ExtendedState,
};
use pmtransport::model::{RunConfig, SinkSpec, StateIndex, SystemSpec};
use pmtransport::observables::{sink_population, TimeSeries};
use pmtransport::spectral::{
    evaluate_density, extract_pseudomodes, LorentzianTerm, PseudomodeModel, SpectralDensity,
};
use pmtransport::system::{build_eigen_hamiltonian, build_eigenbasis, build_site_hamiltonian};

const OMEGA_C: f64 = 1.02;
const OMEGA: f64 = 0.15;
const GAMMA_SINK: f64 = 0.6;
const J: f64 = 0.1;
const GAMMA: f64 = 0.1;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn lindblad(spec: &SystemSpec, pm: &PseudomodeModel, gamma_sink: f64, start: usize, run: &RunConfig) -> TimeSeries {
    let h = build_site_hamiltonian(spec, pm).unwrap();
    let gen = build_generator(&h, pm, &SinkSpec::at_end(spec, gamma_sink)).unwrap();
    let index = StateIndex::new(spec, pm.len());
    integrate(&gen, &ExtendedState::site_excitation(&index, 1, start), run).unwrap()
}

fn lorentzian(omega_c: f64, gamma: f64) -> PseudomodeModel {
    extract_pseudomodes(&SpectralDensity::lorentzian(omega_c, gamma).unwrap()).unwrap()
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.passed &= took < limit;
    o.detail.push_str(&format!("; {:.2} s (limit {} s)", took.as_secs_f64(), limit.as_secs()));
    o
}

/// Every Lindblad run made by the criteria, for the structural checks.
#[derive(Default)]
struct Runs(Vec<(String, TimeSeries)>);

impl Runs {
    fn keep(&mut self, name: impl Into<String>, ts: &TimeSeries) {
        self.0.push((name.into(), ts.clone()));
    }
}

fn two_level_decay(runs: &mut Runs) -> Outcome {
    timed(Duration::from_secs(1), || {
        let spec = SystemSpec::uniform(1, 1, 1.0, J, 1, 0.0);
        let ts = lindblad(&spec, &lorentzian(OMEGA_C, GAMMA), GAMMA_SINK, 1, &RunConfig::new(20.0, 2001));
        let exact: Vec<f64> = ts.times.iter().map(|t| 1.0 - (-GAMMA_SINK * t).exp()).collect();
        let dev = max_diff(&sink_population(&ts), &exact);
        runs.keep("two-level decay", &ts);
        outcome(dev <= 1e-6, format!("max |P_sink − (1 − e^(−0.6t))| = {dev:.2e}"))
    })
}

fn vacuum_rabi(runs: &mut Runs) -> Outcome {
    timed(Duration::from_secs(1), || {
        let spec = SystemSpec::uniform(1, 1, 1.0, J, 1, OMEGA);
        let ts = lindblad(&spec, &PseudomodeModel::lossless(1.0), 0.0, 1, &RunConfig::new(100.0, 1001));
        let exact: Vec<f64> = ts.times.iter().map(|t| (OMEGA * t).cos().powi(2)).collect();
        let dev = max_diff(&ts.site_column(1, 1), &exact);
        let purity = ts.purity.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
        runs.keep("vacuum Rabi", &ts);
        outcome(
            dev <= 1e-6 && purity <= 1e-8,
            format!("max |P_site − cos²(0.15t)| = {dev:.2e}, purity deviation {purity:.2e}"),
        )
    })
}

fn pseudomode_reduction(runs: &mut Runs) -> Outcome {
    timed(Duration::from_secs(120), || {
        let spec = SystemSpec::uniform(1, 3, 1.0, J, 1, OMEGA);
        let sd = SpectralDensity::lorentzian(OMEGA_C, GAMMA).unwrap();
        let run = RunConfig::new(5.0 / GAMMA, 201).with_tolerances(1e-10, 1e-10);
        let reference = lindblad(&spec, &extract_pseudomodes(&sd).unwrap(), 0.0, 1, &run);
        runs.keep("pseudomode reduction", &reference);
        let devs: Vec<f64> = [250, 500, 1000, 2000]
            .iter()
            .map(|&k| {
                let bath = integrate_discretized_bath(&spec, &sd, k, &run).unwrap();
                (1..=3)
                    .map(|i| max_diff(&bath.site_column(1, i), &reference.site_column(1, i)))
                    .fold(0.0, f64::max)
            })
            .collect();
        let decreasing = devs.windows(2).all(|w| w[1] < w[0]);
        outcome(
            devs[3] <= 1e-2 && decreasing,
            format!(
                "deviation at 250/500/1000/2000 modes: {}",
                devs.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join(", ")
            ),
        )
    })
}

fn amplitude_equivalence(runs: &mut Runs) -> Outcome {
    timed(Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut worst = 0.0f64;
        for draw in 0..10 {
            let n = rng.random_range(1..=3);
            let m = rng.random_range(1..=4);
            let spec = SystemSpec {
                n_chains: n,
                chain_len: m,
                omega0: 1.0,
                j_coupling: rng.random_range(0.02..0.3),
                r_index: rng.random_range(1..=m),
                omega_big: (0..n).map(|_| rng.random_range(0.0..0.4)).collect(),
            };
            let pm = lorentzian(rng.random_range(0.8..1.2), rng.random_range(0.02..1.0));
            let run = RunConfig::new(40.0, 81).with_tolerances(1e-12, 1e-12);
            let start = rng.random_range(1..=m);
            let lind = lindblad(&spec, &pm, 0.0, start, &run);
            let a0 = AmplitudeState::site(&spec, pm.len(), 1, start).unwrap();
            let amp = integrate_amplitudes(&spec, &pm, &SinkSpec::at_end(&spec, 0.0), &a0, &run).unwrap();
            let dev = (&lind.populations - &amp.populations).iter().map(|x| x.abs()).fold(0.0, f64::max);
            worst = worst.max(dev);
            runs.keep(format!("amplitude draw {draw}"), &lind);
        }
        outcome(worst <= 1e-8, format!("max population difference over 10 draws = {worst:.2e}"))
    })
}

fn structural_invariants(runs: &Runs) -> Outcome {
    let mut failures = Vec::new();
    for (name, ts) in &runs.0 {
        let trace = ts.trace_error.iter().copied().fold(0.0, f64::max);
        let herm = ts.hermiticity_error.iter().copied().fold(0.0, f64::max);
        let min_eig = ts.min_eigenvalue.iter().copied().fold(f64::INFINITY, f64::min);
        let books = ts
            .populations
            .rows()
            .into_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max);
        let sink = ts.column(ts.index.sink());
        let sink_drop = sink.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
        let ok = trace <= 1e-9 && herm <= 1e-9 && min_eig >= -1e-7 && books <= 1e-9 && sink_drop <= 1e-12;
        if !ok {
            failures.push(format!(
                "{name} (trace {trace:.1e}, herm {herm:.1e}, min eig {min_eig:.1e}, sum {books:.1e}, sink drop {sink_drop:.1e})"
            ));
        }
    }
    let detail = if failures.is_empty() {
        format!("{} runs checked", runs.0.len())
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn noise_free_subspace(runs: &mut Runs) -> Outcome {
    let mut notes = Vec::new();
    let mut passed = true;
    for m in [3usize, 5] {
        let spec = SystemSpec::uniform(2, m, 1.0, J, 1, OMEGA);
        let pm = lorentzian(OMEGA_C, GAMMA);
        let he = build_eigen_hamiltonian(&spec, &pm).unwrap();
        let index = he.index;
        let dark = (1..=index.n_sites())
            .filter(|&k| (1..=pm.len()).all(|l| he.matrix[[k, index.pseudomode(l)]].norm() == 0.0))
            .count();
        passed &= dark == (m - 1) * 2;

        let basis = build_eigenbasis(m, 1.0, J).unwrap();
        let h = build_site_hamiltonian(&spec, &pm).unwrap();
        let gen = build_generator(&h, &pm, &SinkSpec::at_end(&spec, 0.0)).unwrap();
        let run = RunConfig::new(200.0, 41);
        let mut drift = 0.0f64;
        for chain in 1..=2 {
            for mode in 2..=m {
                let rho0 = ExtendedState::eigenmode(&index, &basis, chain, mode);
                for s in integrate_states(&gen, &rho0, &run).unwrap() {
                    drift = drift.max((s.eigenmode_population(&index, &basis, chain, mode) - 1.0).abs());
                }
            }
        }
        let ts = integrate(&gen, &ExtendedState::eigenmode(&index, &basis, 1, 2), &run).unwrap();
        runs.keep(format!("noise-free M={m}"), &ts);
        passed &= drift <= 1e-8;
        notes.push(format!("M={m}: {dark} dark rows (expected {}), drift {drift:.1e}", (m - 1) * 2));
    }
    outcome(passed, notes.join(", "))
}

fn residue_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut densities = vec![SpectralDensity::lorentzian(OMEGA_C, GAMMA).unwrap()];
    for _ in 0..5 {
        let n = rng.random_range(2..=5);
        let terms: Vec<LorentzianTerm> = (0..n)
            .map(|_| LorentzianTerm {
                weight: 1.0 / n as f64,
                center: rng.random_range(0.5..1.5),
                width: rng.random_range(0.02..0.8),
            })
            .collect();
        densities.push(SpectralDensity::sum(terms).unwrap());
    }
    let worst = densities
        .iter()
        .map(|sd| (extract_pseudomodes(sd).unwrap().residue_sum() - 1.0).norm())
        .fold(0.0, f64::max);
    // Trapezoid rule over ω_c ± 10³Γ.
    let sd = &densities[0];
    let (lo, hi, n) = (OMEGA_C - 1e3 * GAMMA, OMEGA_C + 1e3 * GAMMA, 2_000_000);
    let h = (hi - lo) / n as f64;
    let mut integral = 0.5 * (evaluate_density(sd, lo) + evaluate_density(sd, hi));
    for k in 1..n {
        integral += evaluate_density(sd, lo + h * k as f64);
    }
    integral *= h;
    let rel = (integral / (2.0 * PI) - 1.0).abs();
    outcome(
        worst <= 1e-10 && rel <= 1e-3,
        format!("max |Σ(−ir) − 1| = {worst:.1e}; ∫D dω = {integral:.6} (relative error {rel:.1e})"),
    )
}

/// Final sink population for N = 1, 2, 6 at chain length `m`.
fn finals(m: usize, runs: &mut Runs) -> Vec<f64> {
    [1usize, 2, 6]
        .iter()
        .map(|&n| {
            let spec = SystemSpec::uniform(n, m, 1.0, J, 1, OMEGA);
            let ts = lindblad(&spec, &lorentzian(OMEGA_C, GAMMA), GAMMA_SINK, 1, &RunConfig::new(200.0, 2001));
            runs.keep(format!("M={m} N={n}"), &ts);
            *sink_population(&ts).last().unwrap()
        })
        .collect()
}

fn main() -> ExitCode {
    let mut runs = Runs::default();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 two-level sink decay", two_level_decay(&mut runs)),
        ("2 vacuum Rabi limit", vacuum_rabi(&mut runs)),
        ("3 discretized bath vs pseudomode", pseudomode_reduction(&mut runs)),
        ("4 amplitude vs Lindblad", amplitude_equivalence(&mut runs)),
    ];
    let c6 = noise_free_subspace(&mut runs);
    let c7 = residue_normalization();

    let start = Instant::now();
    let m3 = finals(3, &mut runs);
    let m5 = finals(5, &mut runs);
    let took = start.elapsed();
    let increasing = |p: &[f64]| p.windows(2).all(|w| w[1] > w[0]);
    let gain = |p: &[f64]| p[2] / p[0];
    let c8a = outcome(
        increasing(&m3) && increasing(&m5) && took < Duration::from_secs(300),
        format!("M=3 {m3:.4?}, M=5 {m5:.4?}; {:.2} s", took.as_secs_f64()),
    );
    let c8b = outcome(
        gain(&m5) >= gain(&m3),
        format!("P(N=6)/P(N=1): M=5 {:.4} vs M=3 {:.4}", gain(&m5), gain(&m3)),
    );

    results.push(("5 structural invariants", structural_invariants(&runs)));
    results.push(("6 noise-free subspace", c6));
    results.push(("7 residue normalization", c7));
    results.push(("8a sink efficiency increases with N", c8a));
    results.push(("8b longer channels gain more from N", c8b));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
