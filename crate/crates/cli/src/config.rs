//! Experiment configuration read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use nllab_core::conditions::EnergyBall;
use nllab_core::grid::{Domain, Grid};
use nllab_core::measure::{MeasureSpec, RadialTable};
use nllab_core::solver::IvpConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub measure: MeasureBlock,
    pub grid: Option<GridBlock>,
    pub solver: Option<SolverBlock>,
    pub conditions: Option<ConditionsBlock>,
    pub solve: Option<SolveBlock>,
    pub experiment: Option<ExperimentBlock>,
    /// Output directory; `--out` takes precedence.
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    AlphaStable,
    Axes,
    Cusp,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Kernel as written, multiplier 1.
    Unit,
    /// Multiplier `2 − α`.
    Robust,
    /// Multiplier making the stable kind generate `−(−Δ)^{α/2}`.
    FractionalLaplacian,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureBlock {
    pub kind: KindName,
    pub dim: usize,
    pub alpha: f64,
    /// Cusp exponent.
    pub s: Option<f64>,
    /// Radius/density table, inline text.
    pub table: Option<String>,
    /// Radius/density table read from a file relative to the config.
    pub table_file: Option<String>,
    pub inner_exponent: Option<f64>,
    pub outer_exponent: Option<f64>,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
}

fn default_normalization() -> Normalization {
    Normalization::Unit
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainShape {
    Ball,
    Cube,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub h: f64,
    pub box_radius: f64,
    /// Radius of the equation domain; the box radius if absent.
    pub domain_radius: Option<f64>,
    #[serde(default = "default_shape")]
    pub domain: DomainShape,
}

fn default_shape() -> DomainShape {
    DomainShape::Ball
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub dt: f64,
    #[serde(default = "one")]
    pub theta: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Cap on conjugate-gradient iterations per step.
    pub max_iterations: Option<usize>,
}

fn one() -> f64 {
    1.0
}

fn default_tolerance() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsBlock {
    /// Radii for the moment condition.
    #[serde(default = "default_rhos")]
    pub rhos: Vec<f64>,
    /// Fine spacings for the energy comparison; empty skips it.
    #[serde(default)]
    pub dh: Vec<f64>,
    /// Energy balls as `[x, y, radius]`; the default balls if absent.
    pub balls: Option<Vec<[f64; 3]>>,
    /// Far-field moment exponent; absent skips that check.
    pub delta: Option<f64>,
    /// Budget for `Λ` (or `C₀` for the far-field moment).
    pub budget: Option<f64>,
    #[serde(default)]
    pub suite_seed: u64,
}

fn default_rhos() -> Vec<f64> {
    vec![0.125, 0.25, 0.5, 1.0, 2.0, 4.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Constant {
        value: f64,
    },
    /// `height·(1 − |x|²/width²)^power₊`.
    Bump {
        width: f64,
        height: f64,
        power: i32,
    },
    /// `h^{−d}` at the origin.
    Delta,
    /// Random ±1 on cells of side `cell` inside `B_radius`.
    RoughSigns {
        cell: f64,
        radius: f64,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolveBlock {
    pub t0: f64,
    pub t1: f64,
    pub initial: InitialSpec,
    /// Constant exterior value and source.
    #[serde(default)]
    pub exterior: f64,
    #[serde(default)]
    pub source: f64,
    /// Snapshot times, multiples of `dt` after `t0`.
    pub snapshots: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentName {
    Harnack,
    Hoelder,
    Scaling,
    Poincare,
    Loglemma,
    Moser,
    Heatkernel,
    Strongharnack,
}

impl ExperimentName {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Harnack => "harnack",
            ExperimentName::Hoelder => "hoelder",
            ExperimentName::Scaling => "scaling",
            ExperimentName::Poincare => "poincare",
            ExperimentName::Loglemma => "loglemma",
            ExperimentName::Moser => "moser",
            ExperimentName::Heatkernel => "heatkernel",
            ExperimentName::Strongharnack => "strongharnack",
        }
    }

    /// Experiments that draw random data and therefore need a seed.
    pub fn is_randomized(self) -> bool {
        matches!(
            self,
            ExperimentName::Harnack
                | ExperimentName::Hoelder
                | ExperimentName::Poincare
                | ExperimentName::Loglemma
                | ExperimentName::Moser
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MoserModeName {
    NegStep,
    NegIter,
    PosIter,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    pub name: ExperimentName,
    pub seed: Option<u64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Test functions used to certify each supersolution.
    #[serde(default = "default_certificates")]
    pub certificates: usize,
    /// Adds the constant function as an extra Harnack sample.
    #[serde(default)]
    pub include_constant: bool,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Moser exponents.
    #[serde(default)]
    pub exponents: Vec<f64>,
    #[serde(default)]
    pub modes: Vec<MoserModeName>,
    /// Inner and outer radius of the Moser cylinders.
    #[serde(default = "default_radii")]
    pub radii: [f64; 2],
    /// Number of log-level thresholds.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Hölder window.
    pub window: Option<WindowBlock>,
    /// Rough initial data for the Hölder fit.
    pub initial: Option<InitialSpec>,
    /// Scaling parameters.
    pub r: Option<f64>,
    #[serde(default)]
    pub xi: [f64; 2],
    #[serde(default)]
    pub tau: f64,
    /// Heat kernel times.
    #[serde(default)]
    pub times: Vec<f64>,
    /// Strong Harnack concentration widths.
    #[serde(default)]
    pub widths: Vec<f64>,
    pub offset: Option<f64>,
    pub steps: Option<usize>,
    /// Sine modes of the Poincaré test functions.
    #[serde(default = "default_modes")]
    pub sine_modes: usize,
}

fn default_samples() -> usize {
    50
}

fn default_certificates() -> usize {
    3
}

fn default_epsilon() -> f64 {
    1e-2
}

fn default_radii() -> [f64; 2] {
    [0.5, 1.0]
}

fn default_levels() -> usize {
    33
}

fn default_modes() -> usize {
    4
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WindowBlock {
    pub t_start: f64,
    pub t_end: f64,
    pub radius: f64,
    #[serde(default)]
    pub center: [f64; 2],
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::InvalidConfig(e.to_string()))
    }

    pub fn measure(&self, base: &Path) -> Result<MeasureSpec<f64>, CliError> {
        let m = &self.measure;
        let spec = match m.kind {
            KindName::AlphaStable => MeasureSpec::alpha_stable(m.dim, m.alpha),
            KindName::Axes => MeasureSpec::axes(m.dim, m.alpha),
            KindName::Cusp => {
                if m.dim != 2 {
                    return Err(CliError::InvalidConfig("cusp measure needs dim = 2".into()));
                }
                let s =
                    m.s.ok_or_else(|| CliError::InvalidConfig("cusp measure needs `s`".into()))?;
                MeasureSpec::cusp(m.alpha, s)
            }
            KindName::Tabulated => {
                let text = match (&m.table, &m.table_file) {
                    (Some(t), None) => t.clone(),
                    (None, Some(f)) => std::fs::read_to_string(base.join(f)).map_err(|e| {
                        CliError::InvalidConfig(format!("cannot read table file {f}: {e}"))
                    })?,
                    _ => {
                        return Err(CliError::InvalidConfig(
                            "tabulated measure needs exactly one of `table`, `table_file`".into(),
                        ))
                    }
                };
                let mut table = RadialTable::parse(&text)?;
                if let Some(g) = m.inner_exponent {
                    table = table.with_inner_exponent(g);
                }
                if let Some(g) = m.outer_exponent {
                    table = table.with_outer_exponent(g);
                }
                MeasureSpec::tabulated(m.dim, m.alpha, table)
            }
        }?;
        Ok(match m.normalization {
            Normalization::Unit => spec,
            Normalization::Robust => spec.robust(),
            Normalization::FractionalLaplacian => spec.fractional_laplacian(),
        })
    }

    pub fn grid_block(&self) -> Result<&GridBlock, CliError> {
        self.grid
            .as_ref()
            .ok_or_else(|| CliError::InvalidConfig("missing [grid] block".into()))
    }

    pub fn grid(&self) -> Result<Grid<f64>, CliError> {
        let g = self.grid_block()?;
        let r = g.domain_radius.unwrap_or(g.box_radius);
        let domain = match g.domain {
            DomainShape::Ball => Domain::Ball(r),
            DomainShape::Cube => Domain::Cube(r),
        };
        Ok(Grid::new(self.measure.dim, g.box_radius, g.h, domain)?)
    }

    pub fn solver_block(&self) -> Result<&SolverBlock, CliError> {
        self.solver
            .as_ref()
            .ok_or_else(|| CliError::InvalidConfig("missing [solver] block".into()))
    }

    pub fn ivp(&self, t0: f64, t1: f64) -> Result<IvpConfig<f64>, CliError> {
        let s = self.solver_block()?;
        let mut ivp = IvpConfig::new(t0, t1, s.dt)
            .with_theta(s.theta)
            .with_tolerance(s.tolerance);
        if let Some(n) = s.max_iterations {
            ivp.max_iterations = n;
        }
        ivp.steps()?;
        Ok(ivp)
    }

    pub fn experiment_block(&self) -> Result<&ExperimentBlock, CliError> {
        self.experiment
            .as_ref()
            .ok_or_else(|| CliError::InvalidConfig("missing [experiment] block".into()))
    }

    pub fn balls(&self) -> Option<Vec<EnergyBall<f64>>> {
        let c = self.conditions.as_ref()?;
        c.balls.as_ref().map(|bs| {
            bs.iter()
                .map(|b| EnergyBall::new([b[0], b[1]], b[2]))
                .collect()
        })
    }

    /// Seed from `--seed`, else from the experiment block.
    pub fn seed(&self, cli: Option<u64>) -> Option<u64> {
        cli.or_else(|| self.experiment.as_ref().and_then(|e| e.seed))
    }
}
