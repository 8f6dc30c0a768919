//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{prepare_state_capped, FieldMode, FieldState, ModeState, StateSpec};
use crate::matter::{build_system, thermal_state, MatterPreset, MatterSystem, DEFAULT_EPSILON};
use crate::operator::{OperatorMatrix, C64, DEFAULT_MAX_DIM};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub matter: MatterConfig,
    #[serde(default)]
    pub field: Option<FieldConfig>,
    pub run: RunCommand,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
}

fn default_max_dim() -> usize {
    DEFAULT_MAX_DIM
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatterConfig {
    #[serde(flatten)]
    pub preset: MatterPreset,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub initial: InitialState,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    Ground,
    Thermal {
        beta_t: f64,
    },
    Level {
        level: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub modes: Vec<FieldMode>,
    /// One entry per mode.
    #[serde(default)]
    pub states: Option<Vec<ModeStateConfig>>,
    #[serde(default)]
    pub mixture: Option<Vec<MixtureComponent>>,
    #[serde(default)]
    pub custom: Option<CustomDensity>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeStateConfig {
    Vacuum,
    Fock { n: usize },
    Coherent { beta: [f64; 2] },
    Thermal { nbar: f64 },
    Squeezed { r: f64, #[serde(default)] phi: f64 },
    Cat { beta: [f64; 2], #[serde(default = "yes")] even: bool },
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    /// `[re, im]` per mode.
    pub beta: Vec<[f64; 2]>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomDensity {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

/// Either an explicit list or an inclusive linear grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Linear { start: f64, stop: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            Grid::List(v) => v.clone(),
            Grid::Linear { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        };
        if v.is_empty() {
            return Err(Error::Config("grid has no points".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("grid values must be finite".into()));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunCommand {
    /// χ³ along `(p₁ω, p₂ω, p₃ω)` for each grid value `ω`.
    Chi3Scan {
        frequencies: Grid,
        #[serde(default = "default_pattern")]
        pattern: [f64; 3],
    },
    SignalCompare {
        frequencies: Grid,
        #[serde(default)]
        detect: usize,
    },
    FdtCheck {
        beta_t: Vec<f64>,
        frequencies: Grid,
    },
    CorrelatorTable {
        #[serde(default)]
        detect: usize,
        #[serde(default)]
        frequencies: Option<Grid>,
    },
    TwoAtomDemo {
        #[serde(default)]
        atom2: Option<MatterPreset>,
        #[serde(default = "default_time")]
        time: f64,
        #[serde(default = "default_steps")]
        steps: usize,
        atom2_scales: Grid,
    },
    OracleValidate {
        #[serde(default)]
        detect: usize,
        couplings: Grid,
    },
}

fn default_pattern() -> [f64; 3] {
    [1.0, -1.0, 1.0]
}

fn default_time() -> f64 {
    20.0
}

fn default_steps() -> usize {
    2000
}

impl RunCommand {
    pub fn name(&self) -> &'static str {
        match self {
            RunCommand::Chi3Scan { .. } => "chi3-scan",
            RunCommand::SignalCompare { .. } => "signal-compare",
            RunCommand::FdtCheck { .. } => "fdt-check",
            RunCommand::CorrelatorTable { .. } => "correlator-table",
            RunCommand::TwoAtomDemo { .. } => "two-atom-demo",
            RunCommand::OracleValidate { .. } => "oracle-validate",
        }
    }

    fn needs_field(&self) -> bool {
        !matches!(self, RunCommand::Chi3Scan { .. } | RunCommand::FdtCheck { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default)]
    pub prefix: Option<String>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: default_dir(), prefix: None }
    }
}

impl RunConfig {
    /// Parses TOML text; errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.run.needs_field() && self.field.is_none() {
            return Err(Error::Config(format!("command {} needs a [field] table", self.run.name())));
        }
        if let Some(eps) = self.matter.epsilon {
            if !(eps > 0.0) {
                return Err(Error::Config("matter epsilon must be positive".into()));
            }
        }
        if let RunCommand::FdtCheck { beta_t, .. } = &self.run {
            if beta_t.is_empty() || beta_t.iter().any(|b| !(*b > 0.0)) {
                return Err(Error::Config("fdt-check needs positive beta_t values".into()));
            }
        }
        Ok(())
    }

    pub fn prefix(&self) -> String {
        self.output.prefix.clone().unwrap_or_else(|| self.run.name().to_string())
    }

    pub fn matter_system(&self) -> Result<MatterSystem> {
        build_system(&self.matter.preset, self.matter.epsilon.unwrap_or(DEFAULT_EPSILON))
    }

    pub fn matter_state(&self, sys: &MatterSystem) -> Result<OperatorMatrix> {
        match self.matter.initial {
            InitialState::Ground => Ok(sys.ground_state()),
            InitialState::Thermal { beta_t } => thermal_state(sys, beta_t),
            InitialState::Level { level } => sys.level_state(level),
        }
    }

    pub fn field_state(&self) -> Result<FieldState> {
        let f = self
            .field
            .as_ref()
            .ok_or_else(|| Error::Config("missing [field] table".into()))?;
        prepare_state_capped(&f.modes, f.spec()?, self.max_dim)
    }
}

impl FieldConfig {
    pub fn spec(&self) -> Result<StateSpec> {
        let given = [self.states.is_some(), self.mixture.is_some(), self.custom.is_some()];
        if given.iter().filter(|x| **x).count() != 1 {
            return Err(Error::Config("[field] needs exactly one of states, mixture, custom".into()));
        }
        let c = |b: &[f64; 2]| C64::new(b[0], b[1]);
        if let Some(states) = &self.states {
            return Ok(StateSpec::Product(
                states
                    .iter()
                    .map(|s| match s {
                        ModeStateConfig::Vacuum => ModeState::Vacuum,
                        ModeStateConfig::Fock { n } => ModeState::Fock(*n),
                        ModeStateConfig::Coherent { beta } => ModeState::Coherent(c(beta)),
                        ModeStateConfig::Thermal { nbar } => ModeState::Thermal(*nbar),
                        ModeStateConfig::Squeezed { r, phi } => ModeState::Squeezed { r: *r, phi: *phi },
                        ModeStateConfig::Cat { beta, even } => ModeState::Cat { beta: c(beta), even: *even },
                    })
                    .collect(),
            ));
        }
        if let Some(mix) = &self.mixture {
            return Ok(StateSpec::CoherentMixture(
                mix.iter().map(|m| (m.beta.iter().map(c).collect(), m.weight)).collect(),
            ));
        }
        let custom = self.custom.as_ref().expect("checked above");
        let n = custom.re.len();
        let im = custom.im.clone().unwrap_or_else(|| vec![vec![0.0; n]; n]);
        if custom.re.iter().chain(&im).any(|r| r.len() != n) || im.len() != n {
            return Err(Error::Config("custom density matrix must be square".into()));
        }
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| C64::new(custom.re[i][j], im[i][j]));
        Ok(StateSpec::Custom(OperatorMatrix::from_matrix(m)?))
    }
}
