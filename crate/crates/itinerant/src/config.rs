//! Experiment files: one TOML document per experiment, with sections named
//! after the library modules. Every field has a default matching the shipped
//! three-class experiment, so a config only spells out what it changes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use itinerant_core::experiment::{DecisionSpec, Experiment, RhoSpec, TuningSpec};
use itinerant_core::integrator::RunSpec;
use itinerant_core::plant::{Filter, NoiseSource, PlantSpec};
use itinerant_core::rnn::{FitSpec, Layout, Sigmoid, INPUT_DIM};
use itinerant_core::signals::{InputShape, InputSignal, Interval, SignalClass, SignalFamily};

use crate::error::CliError;
use crate::io::read_noise_table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Root of every random stream in the experiment.
    pub seed: u64,
    pub run: RunSection,
    pub input: InputSection,
    pub plant: PlantSection,
    pub signals: SignalsSection,
    pub truth: TruthSection,
    pub prototype: PrototypeSection,
    pub rho: RhoSpec,
    pub decision: DecisionSpec,
    pub analysis: AnalysisSection,
    pub rnn: RnnSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub record_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    Sine,
    Constant,
    Ramp,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub kind: InputKind,
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
    /// Level of a constant input.
    pub value: f64,
    pub slope: f64,
    /// Start of the degenerate input.
    pub t0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterKind {
    Identity,
    Linear,
    LinearSine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Zero,
    Uniform,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    pub phi: FilterKind,
    pub gain: f64,
    pub offset: f64,
    pub ripple: f64,
    pub s0_range: [f64; 2],
    pub s0: f64,
    /// `Δ_η`; also sets the dead zone `ε = Δ_η / φ_min`.
    pub noise_bound: f64,
    pub noise: NoiseKind,
    /// CSV of `(t, η)` rows, relative to the config file.
    pub noise_file: Option<PathBuf>,
}

/// A class given by family name, or as a table overriding the shared ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassEntry {
    Name(String),
    Table(ClassTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassTable {
    pub family: String,
    /// Level of the `constant` family.
    pub value: Option<f64>,
    pub theta_range: Option<[f64; 2]>,
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalsSection {
    pub theta_range: [f64; 2],
    /// `[a, b]`, the range of the parameter read-out.
    pub window: [f64; 2],
    /// Bank order; ids are 1-based positions.
    pub classes: Vec<ClassEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruthSection {
    pub class: usize,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrototypeSection {
    pub kappa: f64,
    pub d: f64,
    pub safety: f64,
    pub delta: f64,
    pub nu_x: f64,
    pub gamma: Option<f64>,
    pub shat0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub sweep_points: usize,
    /// Radius of the convergence set; the tuned accuracy radius when absent.
    pub bound: Option<f64>,
    /// Window `L` of the excitation scan; the input period when absent.
    pub pe_window: Option<f64>,
    /// Required `∫|u|` per window; 0.999 of the measured minimum when absent.
    pub pe_delta: Option<f64>,
    pub pe_l_star: Option<f64>,
    pub pe_horizon: f64,
    /// Samples before this time are dropped from the excitation scan.
    pub pe_transient: f64,
    pub persistency_window: Option<f64>,
    pub persistency_horizon: f64,
    /// Windows starting at or after this time count as late.
    pub persistency_late_from: f64,
    pub persistency_dt: f64,
    pub bounds_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RnnSection {
    pub n_units: Vec<usize>,
    pub ridge: f64,
    /// Overrides the top-level seed for the hidden weights.
    pub seed: Option<u64>,
    pub sigmoid: Sigmoid,
    pub layout: Layout,
    pub scale: [f64; 2],
    pub grid: [usize; INPUT_DIM],
    pub validation: usize,
    /// Relative inflation of the analytic state bounds.
    pub margin: f64,
    pub check_horizon: f64,
    pub check_dt: f64,
    /// Also run the full experiment with the largest networks and compare decisions.
    pub decision_check: bool,
    pub decision_dt: f64,
    /// CSV of `class,xi,s,shat,x,y,dshat,dx,dy` samples replacing the grid sampler.
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            run: RunSection::default(),
            input: InputSection::default(),
            plant: PlantSection::default(),
            signals: SignalsSection::default(),
            truth: TruthSection::default(),
            prototype: PrototypeSection::default(),
            rho: RhoSpec::default(),
            decision: DecisionSpec::default(),
            analysis: AnalysisSection::default(),
            rnn: RnnSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t0: 0.0,
            horizon: 3000.0,
            dt: 1e-3,
            record_every: 10,
        }
    }
}

impl Default for InputSection {
    fn default() -> Self {
        Self {
            kind: InputKind::Sine,
            amplitude: 1.0,
            omega: 1.0,
            phase: 0.0,
            value: 0.0,
            slope: 0.0,
            t0: 0.0,
        }
    }
}

impl Default for PlantSection {
    fn default() -> Self {
        Self {
            phi: FilterKind::Identity,
            gain: 1.0,
            offset: 0.0,
            ripple: 0.0,
            s0_range: [-1.0, 1.0],
            s0: 0.0,
            noise_bound: 1e-4,
            noise: NoiseKind::Uniform,
            noise_file: None,
        }
    }
}

impl Default for SignalsSection {
    fn default() -> Self {
        Self {
            theta_range: [0.5, 2.0],
            window: [0.25, 2.25],
            classes: ["linear", "sine", "quadratic-affine"]
                .map(|n| ClassEntry::Name(n.into()))
                .to_vec(),
        }
    }
}

impl Default for TruthSection {
    fn default() -> Self {
        Self {
            class: 2,
            theta: 1.2,
        }
    }
}

impl Default for PrototypeSection {
    fn default() -> Self {
        let t = TuningSpec::default();
        Self {
            kappa: t.kappa,
            d: t.d,
            safety: t.safety,
            delta: t.delta,
            nu_x: t.nu_x,
            gamma: t.gamma,
            shat0: 0.0,
        }
    }
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            sweep_points: 11,
            bound: None,
            pe_window: None,
            pe_delta: None,
            pe_l_star: None,
            pe_horizon: 100.0,
            pe_transient: 20.0,
            persistency_window: None,
            persistency_horizon: 600.0,
            persistency_late_from: 100.0,
            persistency_dt: 1e-2,
            bounds_tol: 1e-9,
        }
    }
}

impl Default for RnnSection {
    fn default() -> Self {
        let f = FitSpec::default();
        Self {
            n_units: vec![50, 100, 200, 400],
            ridge: f.ridge,
            seed: None,
            sigmoid: f.sigmoid,
            layout: f.layout,
            scale: [f.scale.0, f.scale.1],
            grid: f.grid,
            validation: f.validation,
            margin: 0.2,
            check_horizon: 2.0,
            check_dt: 1e-3,
            decision_check: false,
            decision_dt: 1e-2,
            dataset: None,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
}

/// A parsed config together with where it came from and its hash.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    /// Directory relative paths in the config are resolved against.
    pub base: PathBuf,
    pub hash: String,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    /// `out` is taken as given; a relative `output.dir` in the file is
    /// relative to the file.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dir) = &o.out {
            self.output.dir = std::path::absolute(dir).unwrap_or_else(|_| dir.clone());
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(dt) = o.dt {
            self.run.dt = dt;
        }
    }

    /// SHA-256 of the canonical JSON form of the resolved config, output
    /// location excluded.
    pub fn hash(&self) -> String {
        let mut unplaced = self.clone();
        unplaced.output = OutputSection::default();
        let canonical = serde_json::to_vec(&unplaced).expect("config serializes");
        Sha256::digest(&canonical)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn fit_spec(&self, n_units: usize) -> FitSpec {
        let r = &self.rnn;
        FitSpec {
            n_units,
            ridge: r.ridge,
            seed: r.seed.unwrap_or(self.seed),
            sigmoid: r.sigmoid,
            layout: r.layout,
            scale: (r.scale[0], r.scale[1]),
            grid: r.grid,
            validation: r.validation,
        }
    }

    pub fn run_spec(&self) -> RunSpec {
        RunSpec {
            t0: self.run.t0,
            horizon: self.run.horizon,
            dt: self.run.dt,
            record_every: self.run.record_every,
            seed: self.seed,
        }
    }

    pub fn input_signal(&self) -> Result<InputSignal, CliError> {
        let i = &self.input;
        Ok(match i.kind {
            InputKind::Sine => InputSignal {
                shape: InputShape::Sine {
                    amplitude: i.amplitude,
                    omega: i.omega,
                    phase: i.phase,
                },
                ..InputSignal::sine(i.amplitude, i.omega)
            },
            InputKind::Constant => InputSignal::constant(i.value),
            InputKind::Ramp => InputSignal::ramp(i.slope),
            InputKind::Degenerate => InputSignal::degenerate(i.t0)?,
        })
    }

    fn plant_spec(&self, base: &Path) -> Result<PlantSpec, CliError> {
        let p = &self.plant;
        let s0_range = interval(p.s0_range, "plant.s0_range")?;
        let mut spec = PlantSpec::identity(s0_range);
        match p.phi {
            FilterKind::Identity => {}
            FilterKind::Linear => {
                spec.phi = Filter::Linear {
                    gain: p.gain,
                    offset: p.offset,
                }
            }
            FilterKind::LinearSine => {
                spec.phi = Filter::LinearSine {
                    gain: p.gain,
                    ripple: p.ripple,
                }
            }
        }
        let (lo, hi) = spec
            .phi
            .slope_bounds()
            .expect("built-in filters have analytic slopes");
        spec.phi_min = lo;
        spec.phi_max = hi;
        spec.noise_bound = p.noise_bound;
        spec.noise = match p.noise {
            NoiseKind::Zero => NoiseSource::Zero,
            NoiseKind::Uniform => NoiseSource::Uniform,
            NoiseKind::Table => {
                let file = p.noise_file.as_ref().ok_or_else(|| {
                    CliError::Parse("plant.noise = \"table\" needs plant.noise_file".into())
                })?;
                let rows = read_noise_table(&base.join(file))?;
                if let Some(r) = rows.iter().find(|r| r.1.abs() > p.noise_bound) {
                    return Err(CliError::Parse(format!(
                        "noise sample {} at t = {} exceeds plant.noise_bound = {}",
                        r.1, r.0, p.noise_bound
                    )));
                }
                NoiseSource::Table(rows)
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    fn classes(&self, xi_sup: f64) -> Result<Vec<SignalClass>, CliError> {
        let s = &self.signals;
        if s.classes.is_empty() {
            return Err(CliError::Parse("signals.classes is empty".into()));
        }
        s.classes
            .iter()
            .enumerate()
            .map(|(k, entry)| {
                let (name, value, range, window) = match entry {
                    ClassEntry::Name(n) => (n.as_str(), None, s.theta_range, s.window),
                    ClassEntry::Table(t) => (
                        t.family.as_str(),
                        t.value,
                        t.theta_range.unwrap_or(s.theta_range),
                        t.window.unwrap_or(s.window),
                    ),
                };
                let family = match (name, value) {
                    ("constant", Some(v)) => SignalFamily::Constant(v),
                    ("constant", None) => {
                        return Err(CliError::Parse("family \"constant\" needs a value".into()))
                    }
                    (other, _) => SignalFamily::from_name(other).ok_or_else(|| {
                        CliError::Parse(format!("unknown signal family \"{other}\""))
                    })?,
                };
                let range = interval(range, "theta_range")?;
                let window = interval(window, "window")?;
                Ok(SignalClass::builtin(k + 1, family, range, window, xi_sup)?)
            })
            .collect()
    }

    /// Resolves names, reads referenced files and builds the library experiment.
    pub fn experiment(&self, base: &Path) -> Result<Experiment, CliError> {
        let input = self.input_signal()?;
        if !input.xi_sup.is_finite() {
            return Err(CliError::Parse("the input must be bounded".into()));
        }
        let classes = self.classes(input.xi_sup)?;
        if !(1..=classes.len()).contains(&self.truth.class) {
            return Err(CliError::Parse(format!(
                "truth.class = {} does not name one of the {} classes",
                self.truth.class,
                classes.len()
            )));
        }
        let plant = self.plant_spec(base)?;
        if !plant.s0_range.contains(self.plant.s0) {
            return Err(CliError::Parse(
                "plant.s0 lies outside plant.s0_range".into(),
            ));
        }
        let p = &self.prototype;
        Ok(Experiment {
            classes,
            input,
            plant,
            true_class: self.truth.class,
            true_theta: self.truth.theta,
            s0: self.plant.s0,
            shat0: p.shat0,
            tuning: TuningSpec {
                kappa: p.kappa,
                d: p.d,
                safety: p.safety,
                delta: p.delta,
                nu_x: p.nu_x,
                gamma: p.gamma,
            },
            rho: self.rho,
            run: self.run_spec(),
            decision: self.decision,
        })
    }
}

fn interval(v: [f64; 2], what: &str) -> Result<Interval, CliError> {
    Interval::new(v[0], v[1]).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

/// Reads, overrides and hashes a config file.
pub fn load(path: &Path, overrides: &Overrides) -> Result<LoadedConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let mut config = ExperimentConfig::from_toml(&text)?;
    config.apply(overrides);
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let hash = config.hash();
    Ok(LoadedConfig { config, base, hash })
}
