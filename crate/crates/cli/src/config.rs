//! Run configuration: a strict TOML document.
//!
//! ```toml
//! mode = "compare"            # scatter | sweep | ensemble | compare
//! output = "out"              # optional, `--out` wins
//!
//! [model]
//! order = 4                   # equation order 2s, even
//! alpha = 0.242               # eV⁻¹
//! m_eff = 0.067               # in units of the free electron mass
//! branch = "positive"         # positive | group-velocity
//!
//! [potential]
//! kind = "rtd"                # rtd | segments
//! a = [50.0, 60.0, 65.0, 70.0, 75.0, 85.0]
//! length = 135.0
//! v_l = 0.1
//! v_b = -0.3
//! # kind = "segments"
//! # segments = [{ start = 0.0, end = 5.0, v_start = 0.0, v_end = 0.0 }, ...]
//!
//! [numerics]                  # every key optional
//! points_per_nm = 8.0
//! min_intervals = 4
//! integrator = "gauss"        # gauss | dopri5
//! solver = "orthonormal"      # orthonormal | shooting | auto
//! n_kx = 128
//! n_sigma = 64
//!
//! [statistics]
//! temperature = 300.0
//! fermi_energy = 0.205        # eV, required for ensemble and compare
//! g_s = 2
//! g_v = 1
//! dispersion = "kane"         # kane | parabolic
//!
//! [scatter]
//! k = 0.5                     # nm⁻¹, sign selects the injecting lead
//!
//! [sweep]
//! k_min = 0.01
//! k_max = 1.5
//! points = 200
//!
//! [compare]
//! orders = [2, 4]
//! statistics = ["kane"]
//! ```
//!
//! Unknown keys are rejected. Every default is written back out in the
//! effective configuration of a run.

use std::path::PathBuf;

use kanewave_core::dispersion::{BranchConvention, DispersionModel, PhysicalParams};
use kanewave_core::ensemble::{EnsembleConfig, QuadratureSpec, StatisticsDispersion};
use kanewave_core::integrator::{GridSpec, IntegratorOptions, Method};
use kanewave_core::potential::{PiecewisePotential, RtdParams, Segment};
use kanewave_core::scattering::{SolveMethod, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Scatter,
    Sweep,
    Ensemble,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Statistics {
    Kane,
    Parabolic,
}

impl Statistics {
    pub fn name(self) -> &'static str {
        match self {
            Self::Kane => "kane",
            Self::Parabolic => "parabolic",
        }
    }
}

impl From<Statistics> for StatisticsDispersion {
    fn from(s: Statistics) -> Self {
        match s {
            Statistics::Kane => Self::Kane,
            Statistics::Parabolic => Self::Parabolic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Positive,
    GroupVelocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorKind {
    Gauss,
    Dopri5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Orthonormal,
    Shooting,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub order: usize,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::m_eff")]
    pub m_eff: f64,
    #[serde(default = "defaults::branch")]
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub start: f64,
    pub end: f64,
    pub v_start: f64,
    pub v_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Rtd {
        #[serde(default = "defaults::rtd_a")]
        a: [f64; 6],
        #[serde(default = "defaults::rtd_length")]
        length: f64,
        #[serde(default = "defaults::rtd_v_l")]
        v_l: f64,
        #[serde(default = "defaults::rtd_v_b")]
        v_b: f64,
    },
    Segments {
        segments: Vec<SegmentSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub points_per_nm: f64,
    pub min_intervals: usize,
    pub integrator: IntegratorKind,
    pub rtol: f64,
    pub atol: f64,
    pub overflow_guard: f64,
    pub collocation_theta: f64,
    pub max_steps: usize,
    pub solver: SolverKind,
    pub cond_max: f64,
    pub n_kx: usize,
    pub n_sigma: usize,
    pub threshold: f64,
    pub quadrature_rtol: f64,
    pub max_nodes: usize,
    pub box_scale: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let grid = GridSpec::default();
        let integ = IntegratorOptions::default();
        let solver = SolverOptions::default();
        let quad = QuadratureSpec::default();
        Self {
            points_per_nm: grid.points_per_nm,
            min_intervals: grid.min_intervals,
            integrator: IntegratorKind::Gauss,
            rtol: integ.rtol,
            atol: integ.atol,
            overflow_guard: integ.overflow_guard,
            collocation_theta: integ.collocation_theta,
            max_steps: integ.max_steps,
            solver: SolverKind::Orthonormal,
            cond_max: solver.cond_max,
            n_kx: quad.n_kx,
            n_sigma: quad.n_sigma,
            threshold: quad.threshold,
            quadrature_rtol: quad.rtol,
            max_nodes: quad.max_nodes,
            box_scale: quad.box_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticsSpec {
    #[serde(default = "defaults::temperature")]
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fermi_energy: Option<f64>,
    #[serde(default = "defaults::g_s")]
    pub g_s: u32,
    #[serde(default = "defaults::g_v")]
    pub g_v: u32,
    #[serde(default = "defaults::dispersion")]
    pub dispersion: Statistics,
}

impl Default for StatisticsSpec {
    fn default() -> Self {
        Self {
            temperature: defaults::temperature(),
            fermi_energy: None,
            g_s: defaults::g_s(),
            g_v: defaults::g_v(),
            dispersion: defaults::dispersion(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterSpec {
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    #[serde(default = "defaults::compare_orders")]
    pub orders: Vec<usize>,
    #[serde(default = "defaults::compare_statistics")]
    pub statistics: Vec<Statistics>,
}

impl Default for CompareSpec {
    fn default() -> Self {
        Self {
            orders: defaults::compare_orders(),
            statistics: defaults::compare_statistics(),
        }
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub model: ModelSpec,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub statistics: StatisticsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatter: Option<ScatterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSpec>,
}

mod defaults {
    use super::{Branch, Statistics};
    use kanewave_core::dispersion::PhysicalParams;
    use kanewave_core::potential::RtdParams;

    pub fn alpha() -> f64 {
        PhysicalParams::gaas().alpha
    }
    pub fn m_eff() -> f64 {
        PhysicalParams::gaas().m_eff
    }
    pub fn branch() -> Branch {
        Branch::Positive
    }
    pub fn rtd_a() -> [f64; 6] {
        RtdParams::reference().a
    }
    pub fn rtd_length() -> f64 {
        RtdParams::reference().length
    }
    pub fn rtd_v_l() -> f64 {
        RtdParams::reference().v_l
    }
    pub fn rtd_v_b() -> f64 {
        RtdParams::reference().v_b
    }
    pub fn temperature() -> f64 {
        PhysicalParams::gaas().temperature
    }
    pub fn g_s() -> u32 {
        2
    }
    pub fn g_v() -> u32 {
        1
    }
    pub fn dispersion() -> Statistics {
        Statistics::Kane
    }
    pub fn compare_orders() -> Vec<usize> {
        vec![2, 4]
    }
    pub fn compare_statistics() -> Vec<Statistics> {
        vec![Statistics::Kane]
    }
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses and validates a configuration document. `origin` names the source
/// in error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig> {
    let mut config = parse_unvalidated(text, origin)?;
    config.resolve();
    config.validate()?;
    Ok(config)
}

/// Parsing without validation, for callers that apply overrides first.
pub fn parse_unvalidated(text: &str, origin: &str) -> Result<RunConfig> {
    toml::from_str::<RunConfig>(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        CliError::Parse {
            path: origin.to_string(),
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

fn require(ok: bool, key: &str, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::validation(key, message()))
    }
}

impl RunConfig {
    /// Fills in sections whose presence depends on the mode.
    pub fn resolve(&mut self) {
        if self.mode == Mode::Compare && self.compare.is_none() {
            self.compare = Some(CompareSpec::default());
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        require(m.order >= 2 && m.order % 2 == 0, "model.order", || {
            format!("equation order must be a positive even integer (2, 4, 6, …), got {}", m.order)
        })?;
        require(m.order <= 48, "model.order", || format!("order {} exceeds the supported 48", m.order))?;
        require(m.alpha.is_finite() && m.alpha >= 0.0, "model.alpha", || {
            format!("must be finite and non-negative, got {}", m.alpha)
        })?;
        require(m.m_eff.is_finite() && m.m_eff > 0.0, "model.m_eff", || {
            format!("must be positive, got {}", m.m_eff)
        })?;

        self.potential()?;

        let n = &self.numerics;
        let positive = [
            ("numerics.points_per_nm", n.points_per_nm),
            ("numerics.rtol", n.rtol),
            ("numerics.atol", n.atol),
            ("numerics.overflow_guard", n.overflow_guard),
            ("numerics.collocation_theta", n.collocation_theta),
            ("numerics.cond_max", n.cond_max),
            ("numerics.quadrature_rtol", n.quadrature_rtol),
        ];
        for (key, v) in positive {
            require(v.is_finite() && v > 0.0, key, || format!("must be positive, got {v}"))?;
        }
        require(n.min_intervals >= 1, "numerics.min_intervals", || "must be at least 1".into())?;
        require(n.max_steps >= 1, "numerics.max_steps", || "must be at least 1".into())?;
        require(n.n_kx >= 2, "numerics.n_kx", || format!("must be at least 2, got {}", n.n_kx))?;
        require(n.n_sigma >= 1, "numerics.n_sigma", || format!("must be at least 1, got {}", n.n_sigma))?;
        require(n.threshold > 0.0 && n.threshold < 1.0, "numerics.threshold", || {
            format!("must lie in (0, 1), got {}", n.threshold)
        })?;
        require(n.box_scale.is_finite() && n.box_scale >= 1.0, "numerics.box_scale", || {
            format!("must be at least 1, got {}", n.box_scale)
        })?;
        require(n.max_nodes >= 1, "numerics.max_nodes", || "must be at least 1".into())?;

        let s = &self.statistics;
        require(s.temperature.is_finite() && s.temperature > 0.0, "statistics.temperature", || {
            format!("must be positive, got {}", s.temperature)
        })?;
        require(s.g_s >= 1, "statistics.g_s", || "must be at least 1".into())?;
        require(s.g_v >= 1, "statistics.g_v", || "must be at least 1".into())?;
        if let Some(ef) = s.fermi_energy {
            require(ef.is_finite(), "statistics.fermi_energy", || format!("must be finite, got {ef}"))?;
        }

        match self.mode {
            Mode::Scatter => {
                let sc = self.scatter.ok_or_else(|| {
                    CliError::validation("scatter.k", "scatter mode needs a [scatter] section with the incident k")
                })?;
                require(sc.k.is_finite() && sc.k != 0.0, "scatter.k", || {
                    format!("must be finite and nonzero, got {}", sc.k)
                })?;
            }
            Mode::Sweep => {
                let sw = self.sweep.ok_or_else(|| {
                    CliError::validation("sweep", "sweep mode needs a [sweep] section with k_min, k_max and points")
                })?;
                require(sw.points >= 1, "sweep.points", || "must be at least 1".into())?;
                require(sw.k_min.is_finite() && sw.k_max.is_finite() && sw.k_min <= sw.k_max, "sweep.k_min", || {
                    format!("k_min = {} must not exceed k_max = {}", sw.k_min, sw.k_max)
                })?;
                if let Some(w) = self.model(self.model.order)?.monotone_window() {
                    let widest = sw.k_min.abs().max(sw.k_max.abs());
                    require(widest < w, "sweep.k_max", || {
                        format!("|k| = {widest} leaves the propagating window |k| < {w} of order {}", self.model.order)
                    })?;
                }
            }
            Mode::Ensemble | Mode::Compare => {
                require(s.fermi_energy.is_some(), "statistics.fermi_energy", || {
                    "ensemble runs need an explicit Fermi energy in eV; no default is assumed".into()
                })?;
                if let Some(c) = &self.compare {
                    require(!c.orders.is_empty(), "compare.orders", || "list at least one order".into())?;
                    for &o in &c.orders {
                        require(o >= 2 && o % 2 == 0 && o <= 48, "compare.orders", || {
                            format!("equation order must be a positive even integer, got {o}")
                        })?;
                    }
                    require(!c.statistics.is_empty(), "compare.statistics", || "list at least one entry".into())?;
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            m_eff: self.model.m_eff,
            alpha: self.model.alpha,
            temperature: self.statistics.temperature,
            fermi_energy: self.statistics.fermi_energy.unwrap_or(0.0),
            g_s: self.statistics.g_s,
            g_v: self.statistics.g_v,
        }
    }

    pub fn model(&self, order: usize) -> Result<DispersionModel> {
        let branch = match self.model.branch {
            Branch::Positive => BranchConvention::PositiveWaveVector,
            Branch::GroupVelocity => BranchConvention::GroupVelocity,
        };
        DispersionModel::new(order, self.params())
            .map(|m| m.with_branch(branch))
            .map_err(|e| CliError::validation("model", e.to_string()))
    }

    pub fn potential(&self) -> Result<PiecewisePotential> {
        match &self.potential {
            PotentialSpec::Rtd { a, length, v_l, v_b } => {
                for (key, v) in [("potential.length", *length), ("potential.v_l", *v_l), ("potential.v_b", *v_b)] {
                    require(v.is_finite(), key, || format!("must be finite, got {v}"))?;
                }
                PiecewisePotential::rtd(&RtdParams {
                    a: *a,
                    length: *length,
                    v_l: *v_l,
                    v_b: *v_b,
                })
                .map_err(|e| CliError::validation("potential.a", format!("need 0 < a1 < … < a6 < length: {e}")))
            }
            PotentialSpec::Segments { segments } => {
                let segs = segments
                    .iter()
                    .map(|s| Segment::affine(s.start, s.end, s.v_start, s.v_end))
                    .collect();
                PiecewisePotential::new(segs).map_err(|e| CliError::validation("potential.segments", e.to_string()))
            }
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        let n = &self.numerics;
        SolverOptions {
            grid: GridSpec {
                points_per_nm: n.points_per_nm,
                min_intervals: n.min_intervals,
            },
            integrator: IntegratorOptions {
                method: match n.integrator {
                    IntegratorKind::Gauss => Method::GaussCollocation,
                    IntegratorKind::Dopri5 => Method::Dopri5,
                },
                rtol: n.rtol,
                atol: n.atol,
                overflow_guard: n.overflow_guard,
                collocation_theta: n.collocation_theta,
                max_steps: n.max_steps,
            },
            method: match n.solver {
                SolverKind::Orthonormal => SolveMethod::Orthonormal,
                SolverKind::Shooting => SolveMethod::Shooting,
                SolverKind::Auto => SolveMethod::Auto,
            },
            cond_max: n.cond_max,
        }
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        let n = &self.numerics;
        QuadratureSpec {
            n_kx: n.n_kx,
            n_sigma: n.n_sigma,
            threshold: n.threshold,
            rtol: n.quadrature_rtol,
            max_nodes: n.max_nodes,
            box_scale: n.box_scale,
        }
    }

    pub fn ensemble(&self, order: usize, statistics: Statistics) -> Result<EnsembleConfig> {
        Ok(EnsembleConfig {
            model: self.model(order)?,
            potential: self.potential()?,
            statistics: statistics.into(),
            quadrature: self.quadrature(),
            solver: self.solver_options(),
        })
    }

    /// The configuration as TOML, every default spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RTD: &str = r#"
mode = "ensemble"

[model]
order = 4
alpha = 0.242

[potential]
kind = "rtd"
a = [50.0, 60.0, 65.0, 70.0, 75.0, 85.0]
length = 135.0
v_l = 0.1
v_b = -0.3

[statistics]
temperature = 300.0
fermi_energy = 0.2
"#;

    #[test]
    fn reference_rtd_is_accepted() {
        let c = parse_config(RTD, "rtd.toml").unwrap();
        assert_eq!(c.model.order, 4);
        assert_eq!(c.numerics.n_kx, 128);
        assert_eq!(c.statistics.g_s, 2);
        let v = c.potential().unwrap();
        assert_eq!(v.length(), 135.0);
    }

    #[test]
    fn odd_order_is_a_validation_error() {
        let text = RTD.replace("order = 4", "order = 3");
        match parse_config(&text, "x") {
            Err(CliError::Validation { key, .. }) => assert_eq!(key, "model.order"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ensemble_without_fermi_energy_is_rejected() {
        let text = RTD.replace("fermi_energy = 0.2\n", "");
        match parse_config(&text, "x") {
            Err(CliError::Validation { key, message }) => {
                assert_eq!(key, "statistics.fermi_energy");
                assert!(message.contains("no default"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_position() {
        let text = RTD.replace("alpha = 0.242", "alpha = 0.242\nbeta = 1.0");
        match parse_config(&text, "cfg.toml") {
            Err(CliError::Parse { line, column, message, .. }) => {
                assert_eq!(line, 7);
                assert_eq!(column, 1);
                assert!(message.contains("beta"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_position() {
        let text = "mode = \"scatter\"\n[model]\norder = = 2\n";
        match parse_config(text, "bad.toml") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn effective_config_round_trips() {
        let c = parse_config(RTD, "x").unwrap();
        let echoed = c.to_toml();
        assert!(echoed.contains("n_sigma = 64"));
        let again = parse_config(&echoed, "echo").unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn segments_potential() {
        let text = r#"
mode = "scatter"
[model]
order = 2
[potential]
kind = "segments"
segments = [
  { start = 0.0, end = 5.0, v_start = 0.0, v_end = 0.0 },
  { start = 5.0, end = 10.0, v_start = -0.3, v_end = -0.3 },
  { start = 10.0, end = 15.0, v_start = 0.0, v_end = 0.0 },
]
[scatter]
k = 0.4
"#;
        let c = parse_config(text, "x").unwrap();
        assert_eq!(c.potential().unwrap().segments().len(), 3);
        let gap = text.replace("start = 5.0, end = 10.0", "start = 6.0, end = 10.0");
        assert!(matches!(parse_config(&gap, "x"), Err(CliError::Validation { .. })));
    }

    #[test]
    fn sweep_outside_window_is_rejected() {
        let text = RTD.replace("mode = \"ensemble\"", "mode = \"sweep\"") + "[sweep]\nk_min = 0.1\nk_max = 2.5\npoints = 3\n";
        match parse_config(&text, "x") {
            Err(CliError::Validation { key, .. }) => assert_eq!(key, "sweep.k_max"),
            other => panic!("{other:?}"),
        }
    }
}
