use proptest::prelude::*;

use pmtransport::dynamics::{build_generator, integrate, ExtendedState};
use pmtransport::model::{RunConfig, SinkSpec, StateIndex, SystemSpec};
use pmtransport::observables::{compare_runs, sink_population, sink_quadrature_deviation, TimeSeries};
use pmtransport::spectral::{extract_pseudomodes, LorentzianTerm, PseudomodeModel, SpectralDensity};
use pmtransport::system::build_site_hamiltonian;

fn run(spec: &SystemSpec, pm: &PseudomodeModel, sink: SinkSpec, start: usize, cfg: &RunConfig) -> TimeSeries {
    let h = build_site_hamiltonian(spec, pm).unwrap();
    let gen = build_generator(&h, pm, &sink).unwrap();
    let index = StateIndex::new(spec, pm.len());
    integrate(&gen, &ExtendedState::site_excitation(&index, 1, start), cfg).unwrap()
}

fn default_run(n: usize, m: usize) -> TimeSeries {
    let spec = SystemSpec::uniform(n, m, 1.0, 0.1, 1, 0.15);
    let pm = extract_pseudomodes(&SpectralDensity::lorentzian(1.02, 0.1).unwrap()).unwrap();
    run(&spec, &pm, SinkSpec::at_end(&spec, 0.6), 1, &RunConfig::new(200.0, 2001))
}

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0] - 1e-12)
}

#[test]
fn sink_matches_its_feed_integral() {
    let ts = default_run(2, 3);
    let dev = sink_quadrature_deviation(&ts).unwrap();
    assert!(dev < 1e-4, "quadrature deviation {dev}");
}

#[test]
fn efficiency_is_monotone_in_chain_count() {
    for m in [3, 5] {
        let runs: Vec<TimeSeries> = (1..=6).map(|n| default_run(n, m)).collect();
        let labels: Vec<String> = (1..=6).map(|n| format!("n{n}")).collect();
        let table = compare_runs(&runs, &labels).unwrap();
        let finals = table.finals();
        assert!(finals.windows(2).all(|w| w[1] >= w[0]), "M={m}: {finals:?}");
        assert_eq!(table.ordering(), ["n1", "n2", "n3", "n4", "n5", "n6"]);
    }
}

#[test]
fn lossless_closed_system_stays_pure() {
    let spec = SystemSpec::uniform(2, 3, 1.0, 0.1, 2, 0.2);
    let pm = PseudomodeModel::lossless(1.02);
    let ts = run(&spec, &pm, SinkSpec::at_end(&spec, 0.0), 2, &RunConfig::new(100.0, 101).with_tolerances(1e-10, 1e-10));
    for p in &ts.purity {
        assert!((p - 1.0).abs() < 1e-8, "purity {p}");
    }
}

#[test]
fn sink_on_an_inner_site() {
    let spec = SystemSpec::uniform(1, 4, 1.0, 0.1, 1, 0.15);
    let pm = extract_pseudomodes(&SpectralDensity::lorentzian(1.02, 0.1).unwrap()).unwrap();
    let sink = SinkSpec { gamma_sink: 0.6, attach_site: 2 };
    let ts = run(&spec, &pm, sink, 1, &RunConfig::new(100.0, 1001));
    assert!(sink_quadrature_deviation(&ts).unwrap() < 1e-4);
    assert!(*sink_population(&ts).last().unwrap() > 0.5);
}

fn system() -> impl Strategy<Value = (SystemSpec, PseudomodeModel, f64, usize)> {
    (1usize..4, 1usize..5, 0.02f64..0.3, 0.0f64..0.4, 0.0f64..1.5, prop::collection::vec((0.1f64..1.0, 0.8f64..1.2, 0.02f64..1.0), 1..3))
        .prop_flat_map(|(n, m, j, omega, gs, terms)| {
            (Just((n, m, j, omega, gs, terms)), 1..=m, 1..=m)
        })
        .prop_map(|((n, m, j, omega, gs, terms), r, start)| {
            let spec = SystemSpec::uniform(n, m, 1.0, j, r, omega);
            let terms = terms
                .into_iter()
                .map(|(weight, center, width)| LorentzianTerm { weight, center, width })
                .collect();
            let pm = extract_pseudomodes(&SpectralDensity::sum(terms).unwrap()).unwrap();
            (spec, pm, gs, start)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_states_are_physical((spec, pm, gs, start) in system()) {
        let ts = run(&spec, &pm, SinkSpec::at_end(&spec, gs), start, &RunConfig::new(60.0, 121));
        for k in 0..ts.len() {
            prop_assert!(ts.trace_error[k] <= 1e-9);
            prop_assert!(ts.hermiticity_error[k] <= 1e-9);
            prop_assert!(ts.min_eigenvalue[k] >= -1e-7);
            prop_assert!((ts.populations.row(k).sum() - 1.0).abs() <= 1e-9);
        }
        let sink = sink_population(&ts);
        prop_assert!(non_decreasing(&sink));
        prop_assert!(sink.iter().all(|&p| p <= 1.0 + 1e-12));
        prop_assert!(non_decreasing(&ts.ground()));
    }
}
