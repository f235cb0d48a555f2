use std::fs;
use std::path::{Path, PathBuf};

use fracdml::experiments::SweepRange;
use fracdml::{Coupling, DmlParams, DmlSystem, FractionalOrder, SigmoidCoupling, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::args::CommonArgs;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    #[default]
    Single,
    DimerLinear,
    DimerSigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurrentRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Default for CurrentRange {
    fn default() -> Self {
        Self {
            from: 0.016,
            to: 0.03,
            points: 100,
        }
    }
}

/// Everything a command needs. Loaded from JSON, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub params: DmlParams,
    pub theta: f64,
    pub sigmoid: SigmoidCoupling,
    pub beta: f64,
    pub solver: SolverConfig,
    pub discard: usize,
    pub tail: usize,
    pub sweep: SweepRange,
    pub currents: CurrentRange,
    pub y0: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Single,
            params: DmlParams::default(),
            theta: 0.001,
            sigmoid: SigmoidCoupling::default(),
            beta: 0.97,
            solver: SolverConfig::default(),
            discard: fracdml::experiments::DEFAULT_DISCARD,
            tail: fracdml::experiments::DEFAULT_TAIL,
            sweep: SweepRange::default(),
            currents: CurrentRange::default(),
            y0: None,
            out: None,
            svg: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    /// Defaults, then the `--config` file, then individual flags.
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        cfg.apply(args)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, a: &CommonArgs) -> Result<(), CliError> {
        fn set<T: Copy>(slot: &mut T, value: Option<T>) {
            if let Some(v) = value {
                *slot = v;
            }
        }
        set(&mut self.model, a.model);
        set(&mut self.params.i, a.i);
        set(&mut self.params.a, a.a);
        set(&mut self.params.alpha, a.alpha);
        set(&mut self.params.gamma, a.gamma);
        set(&mut self.beta, a.beta);
        set(&mut self.theta, a.theta);
        set(&mut self.sigmoid.sigma, a.sigma);
        set(&mut self.sigmoid.v_s, a.vs);
        set(&mut self.sigmoid.lambda, a.lambda);
        set(&mut self.sigmoid.q, a.q);
        set(&mut self.solver.h, a.h);
        set(&mut self.solver.t_end, a.t_end);
        set(&mut self.discard, a.discard);
        set(&mut self.tail, a.tail);
        set(&mut self.sweep.from, a.beta_from);
        set(&mut self.sweep.to, a.beta_to);
        set(&mut self.sweep.step, a.beta_step);
        set(&mut self.currents.from, a.i_from);
        set(&mut self.currents.to, a.i_to);
        set(&mut self.currents.points, a.i_points);
        if a.fft {
            self.solver.use_fft = true;
        }
        if let Some(y0) = &a.y0 {
            self.y0 = Some(y0.clone());
        }
        if let Some(out) = &a.out {
            self.out = Some(out.clone());
        }
        if a.svg {
            self.svg = true;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(config_error)?;
        self.coupling().validate().map_err(config_error)?;
        self.solver.validate().map_err(config_error)?;
        if let Some(y0) = &self.y0 {
            let dim = self.coupling().dim();
            if y0.len() != dim {
                return Err(CliError::Config(format!(
                    "y0 has {} entries but the {} model has {dim} state variables",
                    y0.len(),
                    self.coupling().label()
                )));
            }
            if y0.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Config("y0 must be finite".into()));
            }
        }
        if self.svg && self.out.is_none() {
            return Err(CliError::Config(
                "--svg needs --out to name the plot file".into(),
            ));
        }
        Ok(())
    }

    pub fn coupling(&self) -> Coupling {
        match self.model {
            ModelKind::Single => Coupling::None,
            ModelKind::DimerLinear => Coupling::Linear { theta: self.theta },
            ModelKind::DimerSigmoid => Coupling::Sigmoid(self.sigmoid),
        }
    }

    pub fn system(&self) -> Result<DmlSystem, CliError> {
        DmlSystem::new(self.params, self.coupling()).map_err(config_error)
    }

    pub fn order(&self) -> Result<FractionalOrder, CliError> {
        FractionalOrder::new(self.beta).map_err(config_error)
    }

    pub fn initial_state(&self) -> Vec<f64> {
        match (&self.y0, self.model) {
            (Some(y0), _) => y0.clone(),
            (None, ModelKind::Single) => vec![0.1, 0.1],
            (None, _) => vec![0.1, 0.1, -0.2, 0.1],
        }
    }

    pub fn svg_path(&self) -> Option<PathBuf> {
        match (&self.out, self.svg) {
            (Some(out), true) => Some(out.with_extension("svg")),
            _ => None,
        }
    }
}

pub fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}
