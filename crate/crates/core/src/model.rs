//! System, sink and run specifications, the JSON configuration file, and the
//! canonical single-excitation state indexing.
//!
//! All frequencies and rates are in units of the two-level transition
//! frequency `ω₀`; times are in units of `ω₀⁻¹`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{LorentzianTerm, SpectralDensity};

/// Largest extended-state dimension the dense builders accept.
pub const DIMENSION_CAP: usize = 4096;

/// Default nearest-neighbour XY coupling (a modelling choice, not a measured
/// value).
pub const DEFAULT_J: f64 = 0.1;

/// `N` identical XY chains of length `M` sharing one reservoir. Chain 1 is the
/// transport channel.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub n_chains: usize,
    pub chain_len: usize,
    pub omega0: f64,
    pub j_coupling: f64,
    /// 1-based index of the chain eigenmode that couples to the reservoir.
    pub r_index: usize,
    /// Per-chain collective coupling `Ω_j` to the pseudomode(s).
    pub omega_big: Vec<f64>,
}

impl SystemSpec {
    /// Chains all coupled with the same strength `omega`.
    pub fn uniform(
        n_chains: usize,
        chain_len: usize,
        omega0: f64,
        j_coupling: f64,
        r_index: usize,
        omega: f64,
    ) -> Self {
        SystemSpec {
            n_chains,
            chain_len,
            omega0,
            j_coupling,
            r_index,
            omega_big: vec![omega; n_chains],
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_chains * self.chain_len
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinkSpec {
    pub gamma_sink: f64,
    /// 1-based site on chain 1 that feeds the sink.
    pub attach_site: usize,
}

impl SinkSpec {
    /// Sink attached to the last site of the channel.
    pub fn at_end(spec: &SystemSpec, gamma_sink: f64) -> Self {
        SinkSpec { gamma_sink, attach_site: spec.chain_len }
    }
}

/// Integration settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t_final: f64,
    #[serde(default = "default_sample_count")]
    pub sample_count: usize,
    #[serde(default = "default_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_tol")]
    pub rel_tol: f64,
    /// 1-based site on chain 1 that starts excited.
    #[serde(default = "default_initial_site")]
    pub initial_site: usize,
}

fn default_sample_count() -> usize {
    201
}

fn default_tol() -> f64 {
    1e-9
}

fn default_initial_site() -> usize {
    1
}

impl RunConfig {
    pub fn new(t_final: f64, sample_count: usize) -> Self {
        RunConfig {
            t_final,
            sample_count,
            abs_tol: default_tol(),
            rel_tol: default_tol(),
            initial_site: 1,
        }
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    /// Uniformly spaced sample times in `[0, t_final]`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = self.sample_count.max(2);
        (0..n).map(|k| self.t_final * k as f64 / (n - 1) as f64).collect()
    }
}

/// Canonical enumeration of the single-excitation sector:
/// `0` is the global ground state, `1..=N·M` the site states in chain-major
/// order, the next `P` indices the pseudomode excitations, and the last index
/// the sink.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateIndex {
    pub n_chains: usize,
    pub chain_len: usize,
    pub n_pseudomodes: usize,
}

impl StateIndex {
    pub fn new(spec: &SystemSpec, n_pseudomodes: usize) -> Self {
        StateIndex { n_chains: spec.n_chains, chain_len: spec.chain_len, n_pseudomodes }
    }

    pub fn dim(&self) -> usize {
        self.n_sites() + self.n_pseudomodes + 2
    }

    pub fn n_sites(&self) -> usize {
        self.n_chains * self.chain_len
    }

    pub fn ground(&self) -> usize {
        0
    }

    /// Index of site `site` (1-based) on chain `chain` (1-based).
    pub fn site(&self, chain: usize, site: usize) -> usize {
        debug_assert!((1..=self.n_chains).contains(&chain));
        debug_assert!((1..=self.chain_len).contains(&site));
        (chain - 1) * self.chain_len + site
    }

    /// Inverse of [`StateIndex::site`]; `None` outside the site block.
    pub fn decode_site(&self, index: usize) -> Option<(usize, usize)> {
        if index == 0 || index > self.n_sites() {
            return None;
        }
        let k = index - 1;
        Some((k / self.chain_len + 1, k % self.chain_len + 1))
    }

    /// Index of pseudomode `mode` (1-based).
    pub fn pseudomode(&self, mode: usize) -> usize {
        debug_assert!((1..=self.n_pseudomodes).contains(&mode));
        self.n_sites() + mode
    }

    pub fn sink(&self) -> usize {
        self.dim() - 1
    }

    /// Column labels matching the CSV layout of a time series.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.dim());
        out.push("p_ground".to_string());
        out.extend((1..=self.n_sites()).map(|k| format!("p_site_{k}")));
        out.extend((1..=self.n_pseudomodes).map(|l| format!("p_pm_{l}")));
        out.push("p_sink".to_string());
        out
    }
}

/// A single violated invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NoChains,
    EmptyChain,
    RIndexOutOfRange { r_index: usize, chain_len: usize },
    OmegaLengthMismatch { expected: usize, found: usize },
    NegativeOmega { chain: usize, value: f64 },
    NonFinite(&'static str),
    NegativeSinkRate(f64),
    AttachSiteOutOfRange { attach_site: usize, chain_len: usize },
}

impl Violation {
    /// Config key the violation refers to.
    pub fn key(&self) -> &'static str {
        match self {
            Violation::NoChains => "n_chains",
            Violation::EmptyChain => "chain_len",
            Violation::RIndexOutOfRange { .. } => "r_index",
            Violation::OmegaLengthMismatch { .. } | Violation::NegativeOmega { .. } => "omega_big",
            Violation::NonFinite(key) => key,
            Violation::NegativeSinkRate(_) => "gamma_sink",
            Violation::AttachSiteOutOfRange { .. } => "attach_site",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoChains => write!(f, "n_chains must be at least 1"),
            Violation::EmptyChain => write!(f, "chain_len must be at least 1"),
            Violation::RIndexOutOfRange { r_index, chain_len } => {
                write!(f, "r_index out of range: {r_index} not in [1, {chain_len}]")
            }
            Violation::OmegaLengthMismatch { expected, found } => {
                write!(f, "omega_big length mismatch: expected {expected} entries, found {found}")
            }
            Violation::NegativeOmega { chain, value } => {
                write!(f, "omega_big entry for chain {chain} is negative ({value})")
            }
            Violation::NonFinite(key) => write!(f, "{key} must be finite"),
            Violation::NegativeSinkRate(g) => write!(f, "gamma_sink must be non-negative, got {g}"),
            Violation::AttachSiteOutOfRange { attach_site, chain_len } => {
                write!(f, "attach_site out of range: {attach_site} not in [1, {chain_len}]")
            }
        }
    }
}

/// Every violated invariant of a specification; empty when valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_system(spec: &SystemSpec) -> ValidationReport {
    let mut violations = Vec::new();
    if spec.n_chains < 1 {
        violations.push(Violation::NoChains);
    }
    if spec.chain_len < 1 {
        violations.push(Violation::EmptyChain);
    }
    if spec.r_index < 1 || spec.r_index > spec.chain_len {
        violations.push(Violation::RIndexOutOfRange {
            r_index: spec.r_index,
            chain_len: spec.chain_len,
        });
    }
    if spec.omega_big.len() != spec.n_chains {
        violations.push(Violation::OmegaLengthMismatch {
            expected: spec.n_chains,
            found: spec.omega_big.len(),
        });
    }
    for (k, &w) in spec.omega_big.iter().enumerate() {
        if !w.is_finite() {
            violations.push(Violation::NonFinite("omega_big"));
        } else if w < 0.0 {
            violations.push(Violation::NegativeOmega { chain: k + 1, value: w });
        }
    }
    if !spec.omega0.is_finite() {
        violations.push(Violation::NonFinite("omega0"));
    }
    if !spec.j_coupling.is_finite() {
        violations.push(Violation::NonFinite("j_coupling"));
    }
    ValidationReport { violations }
}

/// Checks every invariant of the system and sink specifications.
pub fn validate_spec(spec: &SystemSpec, sink: &SinkSpec) -> ValidationReport {
    let mut report = validate_system(spec);
    if !sink.gamma_sink.is_finite() {
        report.violations.push(Violation::NonFinite("gamma_sink"));
    } else if sink.gamma_sink < 0.0 {
        report.violations.push(Violation::NegativeSinkRate(sink.gamma_sink));
    }
    if sink.attach_site < 1 || sink.attach_site > spec.chain_len {
        report.violations.push(Violation::AttachSiteOutOfRange {
            attach_site: sink.attach_site,
            chain_len: spec.chain_len,
        });
    }
    report
}

/// Extended-state dimension `N·M + P + 2`.
pub fn state_dimension(spec: &SystemSpec, n_pseudomodes: usize) -> Result<usize> {
    validate_system(spec).into_result()?;
    if n_pseudomodes < 1 {
        return Err(Error::Config("at least one pseudomode is required".into()));
    }
    Ok(spec.n_sites() + n_pseudomodes + 2)
}

fn check_run(run: &RunConfig, spec: &SystemSpec) -> Result<()> {
    if !(run.t_final > 0.0 && run.t_final.is_finite()) {
        return Err(Error::Config(format!("t_final must be positive, got {}", run.t_final)));
    }
    if run.sample_count < 2 {
        return Err(Error::Config("sample_count must be at least 2".into()));
    }
    for (name, tol) in [("abs_tol", run.abs_tol), ("rel_tol", run.rel_tol)] {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Config(format!("{name} must lie in (0, 1), got {tol}")));
        }
    }
    if run.initial_site < 1 || run.initial_site > spec.chain_len {
        return Err(Error::Config(format!(
            "initial_site out of range: {} not in [1, {}]",
            run.initial_site, spec.chain_len
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// JSON configuration
// ---------------------------------------------------------------------------

/// `omega_big` may be one number (uniform) or one entry per chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaBig {
    Uniform(f64),
    PerChain(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n_chains: usize,
    pub chain_len: usize,
    #[serde(default = "one")]
    pub omega0: f64,
    #[serde(default = "default_j")]
    pub j_coupling: f64,
    #[serde(default = "one_usize")]
    pub r_index: usize,
    pub omega_big: OmegaBig,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn default_j() -> f64 {
    DEFAULT_J
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinkConfig {
    pub gamma_sink: f64,
    /// Defaults to the last site of the channel.
    #[serde(default)]
    pub attach_site: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReservoirConfig {
    Lorentzian { omega_c: f64, gamma: f64 },
    /// Terms are `[weight, omega_c, gamma]` triples.
    Sum { terms: Vec<[f64; 3]> },
}

impl ReservoirConfig {
    pub fn density(&self) -> Result<SpectralDensity> {
        match self {
            ReservoirConfig::Lorentzian { omega_c, gamma } => {
                SpectralDensity::lorentzian(*omega_c, *gamma)
            }
            ReservoirConfig::Sum { terms } => SpectralDensity::sum(
                terms
                    .iter()
                    .map(|&[weight, center, width]| LorentzianTerm { weight, center, width })
                    .collect(),
            ),
        }
    }
}

/// Top-level configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub system: SystemConfig,
    pub sink: SinkConfig,
    pub reservoir: ReservoirConfig,
    pub run: RunConfig,
}

/// A configuration resolved into validated domain types.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub system: SystemSpec,
    pub sink: SinkSpec,
    pub density: SpectralDensity,
    pub run: RunConfig,
}

impl Config {
    pub fn system_spec(&self) -> SystemSpec {
        let s = &self.system;
        let omega_big = match &s.omega_big {
            OmegaBig::Uniform(w) => vec![*w; s.n_chains],
            OmegaBig::PerChain(v) => v.clone(),
        };
        SystemSpec {
            n_chains: s.n_chains,
            chain_len: s.chain_len,
            omega0: s.omega0,
            j_coupling: s.j_coupling,
            r_index: s.r_index,
            omega_big,
        }
    }

    pub fn sink_spec(&self) -> SinkSpec {
        SinkSpec {
            gamma_sink: self.sink.gamma_sink,
            attach_site: self.sink.attach_site.unwrap_or(self.system.chain_len),
        }
    }

    /// Validates every section and applies the dimension cap.
    pub fn resolve(&self) -> Result<Resolved> {
        let system = self.system_spec();
        let sink = self.sink_spec();
        validate_spec(&system, &sink).into_result()?;
        let density = self.reservoir.density()?;
        check_run(&self.run, &system)?;
        let dimension = state_dimension(&system, density.n_poles())?;
        if dimension > DIMENSION_CAP {
            return Err(Error::DimensionCap { dimension, cap: DIMENSION_CAP });
        }
        Ok(Resolved { system, sink, density, run: self.run.clone() })
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Raw configuration text, kept around so errors can point at a line.
#[derive(Clone, Debug)]
pub struct ConfigSource {
    pub text: String,
    pub value: serde_json::Value,
}

impl ConfigSource {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(text)
    }

    /// Parses JSON syntax only; schema checks happen in [`ConfigSource::config`].
    pub fn parse(text: String) -> Result<Self> {
        let value = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(ConfigSource { text, value })
    }

    /// Applies a `section.key=value` override. The value is parsed as JSON,
    /// falling back to a plain string.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        let value = serde_json::from_str(raw.trim())
            .unwrap_or_else(|_| serde_json::Value::String(raw.trim().to_string()));
        set_path(&mut self.value, path.trim(), value)
    }

    pub fn config(&self) -> Result<Config> {
        Config::from_value(self.value.clone()).map_err(|e| self.anchor(e))
    }

    /// Parses and validates, anchoring errors to the line of the offending key.
    pub fn resolve(&self) -> Result<(Config, Resolved)> {
        let config = self.config()?;
        let resolved = config.resolve().map_err(|e| self.anchor(e))?;
        Ok((config, resolved))
    }

    fn anchor(&self, err: Error) -> Error {
        let key = match &err {
            Error::InvalidSpec(report) => report.violations.first().map(Violation::key),
            Error::DimensionCap { .. } => Some("n_chains"),
            Error::SpectralDensity(_) => Some("reservoir"),
            Error::Config(msg) => ["t_final", "sample_count", "abs_tol", "rel_tol", "initial_site"]
                .into_iter()
                .find(|k| msg.starts_with(k))
                .or_else(|| quoted_field(msg)),
            _ => None,
        };
        match key.and_then(|k| line_of_key(&self.text, k)) {
            Some(line) => Error::Config(format!("line {line}: {err}")),
            None => Error::Config(err.to_string()),
        }
    }
}

/// Pulls a field name out of serde messages such as "unknown field `foo`".
fn quoted_field(msg: &str) -> Option<&str> {
    let start = msg.find('`')? + 1;
    let end = start + msg[start..].find('`')?;
    Some(&msg[start..end])
}

/// 1-based line of the first occurrence of `"key"` in the config text.
pub fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|k| k + 1)
}

fn set_path(root: &mut serde_json::Value, path: &str, value: serde_json::Value) -> Result<()> {
    let mut node = root;
    let mut parts = path.split('.').peekable();
    while let Some(part) = parts.next() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("`{path}` does not resolve to an object")))?;
        if parts.peek().is_none() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .get_mut(part)
            .ok_or_else(|| Error::Config(format!("unknown config section `{part}` in `{path}`")))?;
    }
    Err(Error::Config("empty override path".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_site(n: usize) -> SystemSpec {
        SystemSpec::uniform(n, 3, 1.0, 0.1, 1, 0.15)
    }

    #[test]
    fn default_parameters_validate() {
        let spec = three_site(1);
        let sink = SinkSpec::at_end(&spec, 0.6);
        assert!(validate_spec(&spec, &sink).is_empty());
    }

    #[test]
    fn r_index_out_of_range_is_reported() {
        let mut spec = three_site(1);
        spec.r_index = 4;
        let report = validate_spec(&spec, &SinkSpec::at_end(&spec, 0.6));
        assert_eq!(report.violations.len(), 1);
        assert!(report.to_string().contains("r_index out of range"));
    }

    #[test]
    fn omega_length_mismatch_is_reported() {
        let mut spec = SystemSpec::uniform(2, 5, 1.0, 0.1, 1, 0.15);
        spec.omega_big = vec![0.15];
        let report = validate_spec(&spec, &SinkSpec::at_end(&spec, 0.6));
        assert!(report.to_string().contains("omega_big length mismatch"));
    }

    #[test]
    fn report_collects_every_violation() {
        let spec = SystemSpec {
            n_chains: 2,
            chain_len: 3,
            omega0: 1.0,
            j_coupling: 0.1,
            r_index: 0,
            omega_big: vec![-1.0],
        };
        let sink = SinkSpec { gamma_sink: -0.1, attach_site: 7 };
        let report = validate_spec(&spec, &sink);
        assert_eq!(report.violations.len(), 5, "{report}");
    }

    #[test]
    fn dimension_examples() {
        let d = |n, m, p| state_dimension(&SystemSpec::uniform(n, m, 1.0, 0.1, 1, 0.15), p).unwrap();
        assert_eq!(d(1, 1, 1), 4);
        assert_eq!(d(6, 3, 1), 21);
        assert_eq!(d(2, 5, 2), 14);
    }

    #[test]
    fn dimension_rejects_invalid_spec() {
        let mut spec = three_site(1);
        spec.r_index = 9;
        assert!(state_dimension(&spec, 1).is_err());
        assert!(state_dimension(&three_site(1), 0).is_err());
    }

    #[test]
    fn labels_follow_index_layout() {
        let idx = StateIndex { n_chains: 2, chain_len: 2, n_pseudomodes: 1 };
        assert_eq!(
            idx.labels(),
            ["p_ground", "p_site_1", "p_site_2", "p_site_3", "p_site_4", "p_pm_1", "p_sink"]
        );
        assert_eq!(idx.site(2, 1), 3);
        assert_eq!(idx.pseudomode(1), 5);
        assert_eq!(idx.sink(), 6);
    }

    const SAMPLE: &str = r#"{
  "system": {"n_chains": 6, "chain_len": 3, "omega_big": 0.15},
  "sink": {"gamma_sink": 0.6},
  "reservoir": {"kind": "lorentzian", "omega_c": 1.02, "gamma": 0.1},
  "run": {"t_final": 200.0}
}"#;

    #[test]
    fn config_defaults_resolve() {
        let src = ConfigSource::parse(SAMPLE.to_string()).unwrap();
        let (_, r) = src.resolve().unwrap();
        assert_eq!(r.system.omega_big, vec![0.15; 6]);
        assert_eq!(r.system.j_coupling, DEFAULT_J);
        assert_eq!(r.system.r_index, 1);
        assert_eq!(r.sink.attach_site, 3);
        assert_eq!(r.run.initial_site, 1);
        assert_eq!(r.run.abs_tol, 1e-9);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = SAMPLE.replace("\"gamma_sink\"", "\"gamma_snk\"");
        let err = ConfigSource::parse(text).unwrap().config().unwrap_err();
        assert!(err.to_string().starts_with("line 3:") && err.to_string().contains("gamma_snk"), "{err}");
        let text = SAMPLE.replace("\"run\": {", "\"run\": {\"extra\": 1, ");
        assert!(ConfigSource::parse(text).unwrap().config().is_err());
    }

    #[test]
    fn validation_errors_point_at_a_line() {
        let text = SAMPLE.replace("\"chain_len\": 3", "\"chain_len\": 3, \"r_index\": 9");
        let err = ConfigSource::parse(text).unwrap().resolve().unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("line 2:"), "{msg}");
        assert!(msg.contains("r_index out of range"), "{msg}");
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let mut src = ConfigSource::parse(SAMPLE.to_string()).unwrap();
        src.set("system.n_chains=2000").unwrap();
        let err = src.resolve().unwrap_err();
        assert!(err.to_string().contains("dimension cap"), "{err}");
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let mut src = ConfigSource::parse(SAMPLE.to_string()).unwrap();
        src.set("system.n_chains=2").unwrap();
        src.set("reservoir.gamma=0.3").unwrap();
        let (cfg, r) = src.resolve().unwrap();
        assert_eq!(r.system.n_chains, 2);
        assert_eq!(cfg.reservoir, ReservoirConfig::Lorentzian { omega_c: 1.02, gamma: 0.3 });
        assert!(src.set("nosuch.key=1").is_err());
    }

    #[test]
    fn sum_reservoir_parses() {
        let text = SAMPLE.replace(
            r#"{"kind": "lorentzian", "omega_c": 1.02, "gamma": 0.1}"#,
            r#"{"kind": "sum", "terms": [[0.5, 1.0, 0.1], [0.5, 1.1, 0.2]]}"#,
        );
        let (_, r) = ConfigSource::parse(text).unwrap().resolve().unwrap();
        assert_eq!(r.density.n_poles(), 2);
    }

    proptest::proptest! {
        #[test]
        fn dimension_grows_in_every_argument(n in 1usize..20, m in 1usize..20, p in 1usize..5) {
            let dim = |n, m, p| state_dimension(&SystemSpec::uniform(n, m, 1.0, 0.1, 1, 0.1), p).unwrap();
            let d = dim(n, m, p);
            proptest::prop_assert!(dim(n + 1, m, p) > d);
            proptest::prop_assert!(dim(n, m + 1, p) > d);
            proptest::prop_assert!(dim(n, m, p + 1) > d);
        }

        #[test]
        fn site_index_round_trips(n in 1usize..8, m in 1usize..8, p in 1usize..4) {
            let index = StateIndex { n_chains: n, chain_len: m, n_pseudomodes: p };
            for j in 1..=n {
                for l in 1..=m {
                    proptest::prop_assert_eq!(index.decode_site(index.site(j, l)), Some((j, l)));
                }
            }
            proptest::prop_assert_eq!(index.decode_site(index.ground()), None);
            proptest::prop_assert_eq!(index.decode_site(index.pseudomode(1)), None);
        }
    }
}
