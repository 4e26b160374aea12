//! Fermi–Dirac ensemble over incident states: electron density `n(x)` and
//! electric current density.
//!
//! With `k = (k_x, σ cos θ, σ sin θ)` the three-dimensional `k`-integrals
//! reduce to
//!
//! ```text
//! n(x) =  g/(2π)² ∫ dk_x |Ψ_{k_x}(x)|² F(k_x)
//! 𝒥    = -q g/(2π)² ∫ dk_x J_{k_x} F(k_x),    F(k_x) = ∫ σ f_FD(ε(σ, k_x)) dσ
//! ```
//!
//! where `g = g_s g_v` and `J_{k_x}` is the transmitted current of the
//! scattering state injected with wave vector `k_x`. The `σ` integral uses a
//! Gauss–Legendre rule split at the Fermi surface. The `k_x` integral uses
//! adaptive composite Gauss–Legendre panels, split at the wave vectors where
//! the exit lead opens, and refined until the panel error estimates of both
//! the current and the density meet the tolerance.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::constants::{BOLTZMANN_EV_K, CURRENT_DENSITY_A_PER_M2};
use crate::dispersion::{kane_energy_exact, DispersionModel, PhysicalParams};
use crate::observables::current_profile;
use crate::potential::PiecewisePotential;
use crate::quadrature::{CompensatedSum, GaussLegendre};
use crate::scattering::{build_problem, solve_on_grid, Grid, SolverOptions};
use crate::{Error, Result};

/// Node flag threshold on the per-node conservation residual.
pub const NODE_RESIDUAL_LIMIT: f64 = 1e-8;

/// Panel rule size of the adaptive `k_x` quadrature.
const PANEL_NODES: usize = 16;

/// Band model used inside the occupation factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum StatisticsDispersion {
    #[default]
    Kane,
    Parabolic,
}

/// Logistic occupation `1/(1 + exp((ε - E_F)/k_B T))` without overflow.
pub fn fermi_dirac(energy: f64, fermi_energy: f64, temperature: f64) -> f64 {
    let x = (energy - fermi_energy) / (BOLTZMANN_EV_K * temperature);
    if x > 0.0 {
        let e = libm::exp(-x);
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + libm::exp(x))
    }
}

/// Band energy at total wave vector `√(σ² + k_x²)`.
pub fn transverse_energy(sigma: f64, k_x: f64, params: &PhysicalParams, stats: StatisticsDispersion) -> f64 {
    let k2 = sigma * sigma + k_x * k_x;
    match stats {
        StatisticsDispersion::Kane => kane_energy_exact(libm::sqrt(k2), params),
        StatisticsDispersion::Parabolic => params.kinetic_scale() * k2,
    }
}

/// `g(σ, k_x) = σ f_FD(ε(σ, k_x))`.
pub fn occupation_weight(sigma: f64, k_x: f64, params: &PhysicalParams, stats: StatisticsDispersion) -> f64 {
    sigma * fermi_dirac(transverse_energy(sigma, k_x, params, stats), params.fermi_energy, params.temperature)
}

/// `σ` at which `ε(σ, k_x) = e`, or `None` when `e ≤ ε(0, k_x)`.
fn sigma_at_energy(e: f64, k_x: f64, params: &PhysicalParams, stats: StatisticsDispersion) -> Option<f64> {
    let gamma2 = match stats {
        StatisticsDispersion::Kane => e * (1.0 + params.alpha * e),
        StatisticsDispersion::Parabolic => e,
    };
    if e <= 0.0 {
        return None;
    }
    let s2 = gamma2 / params.kinetic_scale() - k_x * k_x;
    (s2 > 0.0).then(|| libm::sqrt(s2))
}

/// `max_σ g` and its location by golden-section search on `[0, hi]`.
fn max_over_sigma(k_x: f64, hi: f64, params: &PhysicalParams, stats: StatisticsDispersion) -> (f64, f64) {
    let g = |s: f64| occupation_weight(s, k_x, params, stats);
    let r = 0.5 * (libm::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
        if b - a <= 1e-13 * hi {
            break;
        }
    }
    let s = 0.5 * (a + b);
    (g(s), s)
}

/// Smallest `(k_x_max, σ_max)` outside which `g < threshold · max g`.
pub fn support_bounds(params: &PhysicalParams, stats: StatisticsDispersion, threshold: f64) -> Result<(f64, f64)> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter {
            name: "threshold",
            reason: "must lie in (0, 1)".into(),
        });
    }
    params.validate()?;
    // Far outer bracket: energy where the occupation is below 1e-300.
    let kt = BOLTZMANN_EV_K * params.temperature;
    let e_far = params.fermi_energy.max(0.0) + 700.0 * kt;
    let far = sigma_at_energy(e_far, 0.0, params, stats).unwrap_or(1.0) * 2.0;
    let (gmax, smax) = max_over_sigma(0.0, far, params, stats);
    if !(gmax > 0.0) {
        return Ok((0.0, 0.0));
    }
    let level = threshold * gmax;
    let bisect = |mut lo: f64, mut hi: f64, above: &dyn Fn(f64) -> bool| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if above(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        hi
    };
    let sigma_max = bisect(smax, far, &|s| occupation_weight(s, 0.0, params, stats) >= level);
    let kx_max = bisect(0.0, far, &|k| max_over_sigma(k, far, params, stats).0 >= level);
    Ok((kx_max, sigma_max))
}

/// `F(k_x) = ∫_0^{σ_max} σ f_FD dσ`, split at the Fermi surface.
pub fn transverse_integral(k_x: f64, sigma_max: f64, params: &PhysicalParams, stats: StatisticsDispersion, rule: &GaussLegendre) -> f64 {
    let g = |s: f64| occupation_weight(s, k_x, params, stats);
    match sigma_at_energy(params.fermi_energy, k_x, params, stats).filter(|&s| s < sigma_max) {
        Some(sf) => rule.integrate(0.0, sf, g) + rule.integrate(sf, sigma_max, g),
        None => rule.integrate(0.0, sigma_max, g),
    }
}

/// Quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Initial `k_x` node budget, split evenly between the two signs.
    pub n_kx: usize,
    /// Gauss–Legendre nodes per `σ` panel.
    pub n_sigma: usize,
    /// Support truncation relative to the maximum of `g`.
    pub threshold: f64,
    /// Relative tolerance of the adaptive `k_x` refinement.
    pub rtol: f64,
    /// Hard cap on distinct `k_x` solves.
    pub max_nodes: usize,
    /// Multiplies the truncation box, for convergence studies.
    pub box_scale: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_kx: 128,
            n_sigma: 64,
            threshold: 1e-12,
            rtol: 1e-9,
            max_nodes: 60_000,
            box_scale: 1.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if self.n_kx < 2 {
            return bad("n_kx", "must be at least 2");
        }
        if self.n_sigma < 2 {
            return bad("n_sigma", "must be at least 2");
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad("threshold", "must lie in (0, 1)");
        }
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return bad("rtol", "must be positive");
        }
        if !(self.box_scale >= 1.0 && self.box_scale.is_finite()) {
            return bad("box_scale", "must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    /// Dispersion of the inner solves; its parameters also set the statistics.
    pub model: DispersionModel,
    pub potential: PiecewisePotential,
    pub statistics: StatisticsDispersion,
    pub quadrature: QuadratureSpec,
    pub solver: SolverOptions,
}

impl EnsembleConfig {
    pub fn params(&self) -> &PhysicalParams {
        self.model.params()
    }

    pub fn degeneracy(&self) -> f64 {
        f64::from(self.params().g_s * self.params().g_v)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(&self.potential, &self.solver.grid)
    }
}

/// What one inner scattering solve contributes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSample {
    pub k_x: f64,
    /// Signed transmitted current in nm/fs.
    pub transmitted_current: f64,
    pub t2: f64,
    /// `|Ψ(x_i)|²` on the device grid.
    pub density: Vec<f64>,
    /// Spread of `J(x)` relative to the incident current.
    pub residual: f64,
}

/// Solves the scattering problem at `k_x` and extracts its ensemble data.
pub fn solve_node(config: &EnsembleConfig, grid: &Grid, k_x: f64) -> Result<NodeSample> {
    let problem = build_problem(config.model.clone(), config.potential.clone(), k_x)?;
    let solution = solve_on_grid(&problem, grid, &config.solver)?;
    let profile = current_profile(&solution)?;
    Ok(NodeSample {
        k_x,
        transmitted_current: profile.boundary.transmitted,
        t2: profile.t2,
        density: solution.table().density(),
        residual: profile.flux_residual,
    })
}

/// Per-node record of the final quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDiagnostic {
    pub k_x: f64,
    /// Quadrature weight in nm⁻¹.
    pub weight: f64,
    /// `F(k_x)` in nm⁻².
    pub occupation: f64,
    pub transmitted_current: f64,
    pub t2: f64,
    pub residual: f64,
    pub flagged: bool,
    pub error: Option<Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub x: Vec<f64>,
    /// Electron density in nm⁻³.
    pub density: Vec<f64>,
    /// Electric current density in A/m².
    pub current: f64,
    /// Contributions of `k_x > 0` and `k_x < 0`, A/m².
    pub current_by_sign: (f64, f64),
    /// Adaptive `k_x` error estimate of the current, A/m².
    pub current_error: f64,
    /// Adaptive `k_x` error estimate of the density, max over `x`, nm⁻³.
    pub density_error: f64,
    /// Largest relative change of `F(k_x)` from `n_sigma` to `2 n_sigma`.
    pub sigma_error: f64,
    /// Truncation box `(k_x_max, σ_max)` in nm⁻¹.
    pub support: (f64, f64),
    /// `k_x` limit imposed by the monotone window of the inner dispersion.
    pub window_limit: Option<f64>,
    pub nodes: Vec<NodeDiagnostic>,
    pub failed_nodes: usize,
    pub flagged_nodes: usize,
    /// `true` when refinement stopped on the node budget.
    pub budget_exhausted: bool,
}

impl EnsembleResult {
    /// Some node failed or the node budget ran out.
    pub fn is_partial(&self) -> bool {
        self.failed_nodes > 0 || self.budget_exhausted
    }
}

/// Wave vectors where a lead changes its number of propagating modes for
/// injection from the opposite side, within `(0, k_max)`.
fn channel_thresholds(config: &EnsembleConfig, sign: f64, k_max: f64) -> Vec<f64> {
    let v0 = config.potential.left_value();
    let vl = config.potential.right_value();
    // Exit kinetic energy ε_s(k) - V_inj + V_exit vanishes at ε_s(k) = V_inj - V_exit.
    let target = if sign > 0.0 { v0 - vl } else { vl - v0 };
    if target <= 0.0 {
        return Vec::new();
    }
    let m = &config.model;
    let f = |k: f64| m.truncated_energy(k) - target;
    if !(f(k_max) > 0.0) {
        return Vec::new();
    }
    let (mut lo, mut hi) = (0.0, k_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    vec![0.5 * (lo + hi)]
}

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    /// Integral of the vector integrand with the panel rule.
    coarse: Vec<f64>,
    /// Sum over the two half panels.
    fine: Vec<f64>,
    halves: [Vec<f64>; 2],
    error: f64,
}

/// Node evaluator: solves every `k_x` of a batch, preserving order.
pub trait NodeEvaluator {
    fn evaluate(&mut self, k: &[f64]) -> Vec<Result<NodeSample>>;
}

impl<F: FnMut(&[f64]) -> Vec<Result<NodeSample>>> NodeEvaluator for F {
    fn evaluate(&mut self, k: &[f64]) -> Vec<Result<NodeSample>> {
        self(k)
    }
}

/// Sequential evaluator over [`solve_node`].
pub fn sequential_evaluator<'a>(config: &'a EnsembleConfig, grid: &'a Grid) -> impl FnMut(&[f64]) -> Vec<Result<NodeSample>> + 'a {
    move |ks: &[f64]| ks.iter().map(|&k| solve_node(config, grid, k)).collect()
}

/// Memoizes node solves by the bit pattern of `k_x`.
#[derive(Debug, Default, Clone)]
pub struct NodeCache {
    map: BTreeMap<u64, Result<NodeSample>>,
}

impl NodeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn fetch<E: NodeEvaluator>(&mut self, eval: &mut E, ks: &[f64]) {
        let mut missing: Vec<f64> = ks.iter().copied().filter(|k| !self.map.contains_key(&k.to_bits())).collect();
        missing.sort_by(f64::total_cmp);
        missing.dedup();
        if missing.is_empty() {
            return;
        }
        for (k, r) in missing.iter().zip(eval.evaluate(&missing)) {
            self.map.insert(k.to_bits(), r);
        }
    }

    fn get(&self, k: f64) -> &Result<NodeSample> {
        &self.map[&k.to_bits()]
    }
}

struct Integrand<'a> {
    config: &'a EnsembleConfig,
    rule_sigma: GaussLegendre,
    rule_sigma_fine: GaussLegendre,
    sigma_max: f64,
    grid_len: usize,
}

impl Integrand<'_> {
    fn occupation(&self, k: f64) -> f64 {
        transverse_integral(k, self.sigma_max, self.config.params(), self.config.statistics, &self.rule_sigma)
    }

    fn occupation_fine(&self, k: f64) -> f64 {
        transverse_integral(k, self.sigma_max, self.config.params(), self.config.statistics, &self.rule_sigma_fine)
    }

    /// `[J F, |Ψ|² F …]`; failed nodes contribute zero.
    fn value(&self, sample: &Result<NodeSample>, k: f64) -> Vec<f64> {
        let mut v = vec![0.0; 1 + self.grid_len];
        if let Ok(s) = sample {
            let f = self.occupation(k);
            v[0] = s.transmitted_current * f;
            for (o, d) in v[1..].iter_mut().zip(&s.density) {
                *o = d * f;
            }
        }
        v
    }
}

fn panel_nodes(rule: &GaussLegendre, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    rule.mapped(a, b)
}

fn panel_sum(rule: &GaussLegendre, a: f64, b: f64, integrand: &Integrand, cache: &NodeCache) -> Vec<f64> {
    let mut acc: Vec<CompensatedSum> = vec![CompensatedSum::default(); 1 + integrand.grid_len];
    for (k, w) in panel_nodes(rule, a, b) {
        let v = integrand.value(cache.get(k), k);
        for (s, x) in acc.iter_mut().zip(v) {
            s.add(w * x);
        }
    }
    acc.iter().map(|s| s.value()).collect()
}

/// Ensemble integration with a caller-supplied evaluator and node cache.
///
/// The cache may be shared across calls whose configs differ only in the
/// statistics (temperature, Fermi energy, band model for the occupation).
pub fn integrate_with<E: NodeEvaluator>(config: &EnsembleConfig, evaluator: &mut E, cache: &mut NodeCache) -> Result<EnsembleResult> {
    config.quadrature.validate()?;
    config.params().validate()?;
    let grid = config.grid()?;
    let q = config.quadrature;
    let (kx_support, sigma_support) = support_bounds(config.params(), config.statistics, q.threshold)?;
    let kx_box = kx_support * q.box_scale;
    let sigma_max = sigma_support * q.box_scale;
    let window = config.model.monotone_window();
    let kx_max = match window {
        Some(w) => kx_box.min(w * (1.0 - 1e-6)),
        None => kx_box,
    };
    let window_limit = window.filter(|&w| w < kx_box);

    let rule = GaussLegendre::new(PANEL_NODES);
    let integrand = Integrand {
        config,
        rule_sigma: GaussLegendre::new(q.n_sigma),
        rule_sigma_fine: GaussLegendre::new(2 * q.n_sigma),
        sigma_max,
        grid_len: grid.len(),
    };

    // Initial panels per sign, distributed over the threshold-split intervals.
    let per_sign = (q.n_kx / 2).div_ceil(PANEL_NODES).max(1);
    let mut panels: Vec<Panel> = Vec::new();
    let mut spans: Vec<(f64, f64)> = Vec::new();
    if kx_max > 0.0 {
        for sign in [-1.0, 1.0] {
            let mut cuts = vec![0.0];
            cuts.extend(channel_thresholds(config, sign, kx_max));
            cuts.push(kx_max);
            for w in cuts.windows(2) {
                let count = (libm::round(per_sign as f64 * (w[1] - w[0]) / kx_max) as usize).max(1);
                let h = (w[1] - w[0]) / count as f64;
                for i in 0..count {
                    let lo = w[0] + h * i as f64;
                    let hi = if i + 1 == count { w[1] } else { w[0] + h * (i + 1) as f64 };
                    spans.push(if sign > 0.0 { (lo, hi) } else { (-hi, -lo) });
                }
            }
        }
    }
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));

    let new_panels = |spans: &[(f64, f64)], cache: &mut NodeCache, evaluator: &mut E| -> Vec<Panel> {
        let mut ks = Vec::new();
        for &(a, b) in spans {
            let m = 0.5 * (a + b);
            for (lo, hi) in [(a, b), (a, m), (m, b)] {
                ks.extend(panel_nodes(&rule, lo, hi).map(|(k, _)| k));
            }
        }
        cache.fetch(evaluator, &ks);
        spans
            .iter()
            .map(|&(a, b)| {
                let m = 0.5 * (a + b);
                let coarse = panel_sum(&rule, a, b, &integrand, cache);
                let left = panel_sum(&rule, a, m, &integrand, cache);
                let right = panel_sum(&rule, m, b, &integrand, cache);
                let fine: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
                Panel {
                    a,
                    b,
                    coarse,
                    fine,
                    halves: [left, right],
                    error: 0.0,
                }
            })
            .collect()
    };

    panels.extend(new_panels(&spans, cache, evaluator));
    let mut budget_exhausted = false;
    loop {
        // Scales: absolute current of both signs, peak density.
        let mut j_pos = 0.0;
        let mut j_neg = 0.0;
        let mut dens = vec![0.0; grid.len()];
        for p in &panels {
            if p.a >= 0.0 {
                j_pos += p.fine[0];
            } else {
                j_neg += p.fine[0];
            }
            for (d, v) in dens.iter_mut().zip(&p.fine[1..]) {
                *d += v;
            }
        }
        let j_scale = (j_pos.abs() + j_neg.abs()).max(f64::MIN_POSITIVE);
        let n_scale = dens.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut total = 0.0;
        for p in panels.iter_mut() {
            let ej = (p.coarse[0] - p.fine[0]).abs() / j_scale;
            let en = p.coarse[1..]
                .iter()
                .zip(&p.fine[1..])
                .fold(0.0f64, |m, (c, f)| m.max((c - f).abs()))
                / n_scale;
            p.error = ej.max(en);
            total += p.error;
        }
        if total <= q.rtol {
            break;
        }
        // Split every panel above the equidistributed share.
        let share = q.rtol / panels.len() as f64;
        let (split, keep): (Vec<Panel>, Vec<Panel>) = panels.into_iter().partition(|p| p.error > share);
        if cache.len() + split.len() * 4 * PANEL_NODES > q.max_nodes || split.is_empty() {
            panels = keep.into_iter().chain(split).collect();
            budget_exhausted = !panels.is_empty();
            break;
        }
        let mut children_spans = Vec::with_capacity(2 * split.len());
        for p in &split {
            let m = 0.5 * (p.a + p.b);
            children_spans.push((p.a, m));
            children_spans.push((m, p.b));
        }
        panels = keep;
        panels.extend(new_panels(&children_spans, cache, evaluator));
        panels.sort_by(|a, b| a.a.total_cmp(&b.a));
    }
    panels.sort_by(|a, b| a.a.total_cmp(&b.a));

    // Final assembly with the half-panel rules.
    let prefactor = config.degeneracy() / (4.0 * PI * PI);
    let mut current_pos = CompensatedSum::default();
    let mut current_neg = CompensatedSum::default();
    let mut density: Vec<CompensatedSum> = vec![CompensatedSum::default(); grid.len()];
    let mut current_err = 0.0;
    let mut density_err = vec![0.0; grid.len()];
    let mut nodes = Vec::new();
    let mut failed = 0;
    let mut flagged = 0;
    let mut sigma_error = 0.0f64;
    for p in &panels {
        let m = 0.5 * (p.a + p.b);
        let sum = if p.a >= 0.0 { &mut current_pos } else { &mut current_neg };
        sum.add(p.halves[0][0]);
        sum.add(p.halves[1][0]);
        for (d, (l, r)) in density.iter_mut().zip(p.halves[0][1..].iter().zip(&p.halves[1][1..])) {
            d.add(*l);
            d.add(*r);
        }
        current_err += (p.coarse[0] - p.fine[0]).abs();
        for (e, (c, f)) in density_err.iter_mut().zip(p.coarse[1..].iter().zip(&p.fine[1..])) {
            *e += (c - f).abs();
        }
        for (lo, hi) in [(p.a, m), (m, p.b)] {
            for (k, w) in panel_nodes(&rule, lo, hi) {
                let occupation = integrand.occupation(k);
                let fine = integrand.occupation_fine(k);
                if fine > 0.0 {
                    sigma_error = sigma_error.max((occupation - fine).abs() / fine);
                }
                let diag = match cache.get(k) {
                    Ok(s) => {
                        let bad = !(s.residual < NODE_RESIDUAL_LIMIT);
                        flagged += bad as usize;
                        NodeDiagnostic {
                            k_x: k,
                            weight: w,
                            occupation,
                            transmitted_current: s.transmitted_current,
                            t2: s.t2,
                            residual: s.residual,
                            flagged: bad,
                            error: None,
                        }
                    }
                    Err(e) => {
                        failed += 1;
                        NodeDiagnostic {
                            k_x: k,
                            weight: w,
                            occupation,
                            transmitted_current: 0.0,
                            t2: 0.0,
                            residual: f64::NAN,
                            flagged: true,
                            error: Some(e.clone()),
                        }
                    }
                };
                nodes.push(diag);
            }
        }
    }
    let to_amps = -prefactor * CURRENT_DENSITY_A_PER_M2;
    let pos = current_pos.value() * to_amps;
    let neg = current_neg.value() * to_amps;
    Ok(EnsembleResult {
        x: grid.nodes().to_vec(),
        density: density.iter().map(|d| d.value() * prefactor).collect(),
        current: pos + neg,
        current_by_sign: (pos, neg),
        current_error: current_err * prefactor * CURRENT_DENSITY_A_PER_M2,
        density_error: density_err.iter().fold(0.0f64, |m, &e| m.max(e)) * prefactor,
        sigma_error,
        support: (kx_box, sigma_max),
        window_limit,
        nodes,
        failed_nodes: failed,
        flagged_nodes: flagged,
        budget_exhausted,
    })
}

/// Sequential ensemble integration.
pub fn integrate(config: &EnsembleConfig) -> Result<EnsembleResult> {
    let grid = config.grid()?;
    let mut eval = sequential_evaluator(config, &grid);
    integrate_with(config, &mut eval, &mut NodeCache::new())
}

/// `n(x)` in nm⁻³ on the solver grid.
pub fn electron_density(config: &EnsembleConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = integrate(config)?;
    Ok((r.x, r.density))
}

/// Electric current density in A/m².
pub fn total_current(config: &EnsembleConfig) -> Result<f64> {
    Ok(integrate(config)?.current)
}
