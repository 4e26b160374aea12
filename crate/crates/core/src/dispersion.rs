//! Kane dispersion relation, its truncated power series and the wave-vector
//! solver for the resulting degree-`s` polynomial in `u = k²`.
//!
//! The isotropic Kane relation `ε(1 + αε) = γ²` with `γ² = ħ²k²/(2m*)` has the
//! series solution `ε = Σ_j c_j α^{j-1} γ^{2j}` where
//! `c_j = binom(1/2, j)·2^{2j-1}` are the signed Catalan numbers
//! `1, -1, 2, -5, 14, …`. Truncating after `s` terms gives a Hamiltonian with
//! spatial derivatives up to order `2s`.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::constants::hbar2_over_2m;
use crate::linalg;
use crate::{Error, Result};

/// Exact rational used for the expansion coefficients.
pub type Rational = Ratio<i128>;

/// Imaginary parts of `u = k²` below this (relative) size are treated as zero.
pub const ROOT_IMAG_TOLERANCE: f64 = 1e-10;
/// Wave vectors closer than this (nm⁻¹) are reported as degenerate. A double
/// root of the dispersion polynomial is only resolved to about `√ε·|k|`, so
/// the limit sits a few times above that.
pub const DEGENERACY_TOLERANCE: f64 = 1e-7;
/// Allowed scaled back-substitution residual for a dispersion root.
pub const ROOT_RESIDUAL_TOLERANCE: f64 = 1e-10;

/// `binom(1/2, j)`, exactly.
fn binomial_half(j: usize) -> Rational {
    let half = Rational::new(1, 2);
    let mut acc = Rational::one();
    for i in 0..j {
        acc = acc * (half - Rational::from_integer(i as i128)) / Rational::from_integer(i as i128 + 1);
    }
    acc
}

/// Expansion coefficients `c_1 … c_s` of the Kane series, exactly.
///
/// # Panics
///
/// Panics when `s == 0` or when `s` is large enough to overflow `i128`
/// intermediates (beyond `s ≈ 30`).
pub fn kane_coefficients(s: usize) -> Vec<Rational> {
    assert!(s >= 1, "the truncation order s must be at least 1");
    (1..=s)
        .map(|j| binomial_half(j) * Rational::from_integer(1i128 << (2 * j - 1)))
        .collect()
}

/// Material and statistics parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Effective mass in units of the free electron mass.
    pub m_eff: f64,
    /// Non-parabolicity factor in eV⁻¹.
    pub alpha: f64,
    /// Lattice temperature in K.
    pub temperature: f64,
    /// Fermi energy in eV, measured from the local band edge of each lead.
    pub fermi_energy: f64,
    /// Spin degeneracy.
    pub g_s: u32,
    /// Valley degeneracy.
    pub g_v: u32,
}

impl PhysicalParams {
    /// GaAs Γ valley at room temperature with the Fermi level at the band edge.
    pub fn gaas() -> Self {
        Self {
            m_eff: 0.067,
            alpha: 0.242,
            temperature: 300.0,
            fermi_energy: 0.0,
            g_s: 2,
            g_v: 1,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_fermi_energy(mut self, fermi_energy: f64) -> Self {
        self.fermi_energy = fermi_energy;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    /// `ħ²/(2m*)` in eV·nm².
    pub fn kinetic_scale(&self) -> f64 {
        hbar2_over_2m(self.m_eff)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.into(),
            })
        };
        if !(self.m_eff > 0.0 && self.m_eff.is_finite()) {
            return bad("m_eff", "must be positive and finite");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha", "must be non-negative and finite");
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad("temperature", "must be positive and finite");
        }
        if !self.fermi_energy.is_finite() {
            return bad("fermi_energy", "must be finite");
        }
        if self.g_s == 0 {
            return bad("g_s", "must be at least 1");
        }
        if self.g_v == 0 {
            return bad("g_v", "must be at least 1");
        }
        Ok(())
    }
}

/// Closed-form Kane energy `(-1 + √(1 + 4αγ²)) / (2α)`; `γ²` when `α = 0`.
pub fn kane_energy_exact(k: f64, params: &PhysicalParams) -> f64 {
    let gamma2 = params.kinetic_scale() * k * k;
    if params.alpha == 0.0 {
        return gamma2;
    }
    // Rationalized form of the closed expression; free of cancellation for small αγ².
    2.0 * gamma2 / (1.0 + libm::sqrt(1.0 + 4.0 * params.alpha * gamma2))
}

/// Lead side of a mode set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Propagating,
    Evanescent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// Wave vector in nm⁻¹, in the outward convention (see [`ModeSet`]).
    pub wave_vector: Complex64,
    pub kind: ModeKind,
}

/// How the direction of a real root is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BranchConvention {
    /// Every propagating wave vector has positive real part. On a branch where
    /// `dε_s/dk < 0` the selected wave then travels back into the device.
    #[default]
    PositiveWaveVector,
    /// A propagating root is flipped when `dε_s/dk < 0`, so every exterior
    /// mode carries current away from the device.
    GroupVelocity,
}

/// The `s` admissible wave vectors of one lead.
///
/// Wave vectors use the outward convention: a mode `k` describes the wave
/// `exp(i k d)` where `d ≥ 0` is the distance from the device edge into the
/// lead. Evanescent modes have positive imaginary part, which keeps
/// `exp(i k d)` bounded. Propagating modes have positive real part, except
/// under [`BranchConvention::GroupVelocity`] where roots on a descending
/// branch are stored negated. For the left lead the mode is the reflected
/// wave `exp(-i k x)` and for the right lead the transmitted wave
/// `exp(i k (x - L))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    modes: Vec<Mode>,
    side: Side,
    kinetic_energy: f64,
}

impl ModeSet {
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn wave_vectors(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.wave_vector).collect()
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// `E + qV` at the lead, in eV.
    pub fn kinetic_energy(&self) -> f64 {
        self.kinetic_energy
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn all_propagating(&self) -> bool {
        self.modes.iter().all(|m| m.kind == ModeKind::Propagating)
    }

    pub fn propagating_count(&self) -> usize {
        self.modes
            .iter()
            .filter(|m| m.kind == ModeKind::Propagating)
            .count()
    }

    /// Largest `|k|` in the set.
    pub fn max_magnitude(&self) -> f64 {
        self.modes.iter().map(|m| m.wave_vector.norm()).fold(0.0, f64::max)
    }

    /// Moves the propagating mode matching the real incident wave vector `k`
    /// to the front and pins it to exactly `k`.
    pub(crate) fn place_incident_first(&mut self, k: f64) -> Result<()> {
        let target = Complex64::new(k, 0.0);
        let (idx, dist) = self
            .modes
            .iter()
            .enumerate()
            .map(|(i, m)| (i, (m.wave_vector - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or(Error::EvanescentIncident { k })?;
        if self.modes[idx].kind != ModeKind::Propagating || dist > 1e-6 * k.abs().max(1.0) {
            return Err(Error::EvanescentIncident { k });
        }
        let mut mode = self.modes.remove(idx);
        mode.wave_vector = target;
        self.modes.insert(0, mode);
        Ok(())
    }
}

/// Truncated Kane dispersion of order `2s` for a fixed material.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionModel {
    order_half: usize,
    requested_order_half: usize,
    exact: Vec<Rational>,
    coeffs: Vec<f64>,
    params: PhysicalParams,
    kinetic_scale: f64,
    series: Vec<f64>,
    branch: BranchConvention,
}

impl DispersionModel {
    /// Model for an even equation order `2s`.
    pub fn new(order: usize, params: PhysicalParams) -> Result<Self> {
        if order == 0 || order % 2 != 0 {
            return Err(Error::InvalidParameter {
                name: "order",
                reason: alloc::format!("equation order must be a positive even integer, got {order}"),
            });
        }
        Self::with_order_half(order / 2, params)
    }

    /// Model with `s` retained series terms.
    pub fn with_order_half(s: usize, params: PhysicalParams) -> Result<Self> {
        params.validate()?;
        if s == 0 || s > 24 {
            return Err(Error::InvalidParameter {
                name: "order",
                reason: alloc::format!("s = {s} outside the supported range 1..=24"),
            });
        }
        // With α = 0 every term beyond the first carries α^{j-1} = 0.
        let effective = if params.alpha == 0.0 { 1 } else { s };
        let exact = kane_coefficients(effective);
        let coeffs: Vec<f64> = exact.iter().map(|c| *c.numer() as f64 / *c.denom() as f64).collect();
        let kinetic_scale = params.kinetic_scale();
        let series = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * pow_usize(params.alpha, i) * pow_usize(kinetic_scale, i + 1))
            .collect();
        Ok(Self {
            order_half: effective,
            requested_order_half: s,
            exact,
            coeffs,
            params,
            kinetic_scale,
            series,
            branch: BranchConvention::default(),
        })
    }

    pub fn with_branch(mut self, branch: BranchConvention) -> Self {
        self.branch = branch;
        self
    }

    pub fn branch(&self) -> BranchConvention {
        self.branch
    }

    /// Effective `s` (1 whenever `α = 0`).
    pub fn order_half(&self) -> usize {
        self.order_half
    }

    /// Effective equation order `2s`.
    pub fn order(&self) -> usize {
        2 * self.order_half
    }

    pub fn requested_order_half(&self) -> usize {
        self.requested_order_half
    }

    pub fn exact_coefficients(&self) -> &[Rational] {
        &self.exact
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    /// `ħ²/(2m*)` in eV·nm².
    pub fn kinetic_scale(&self) -> f64 {
        self.kinetic_scale
    }

    /// `p_j = c_j α^{j-1} (ħ²/2m*)^j`, so that `ε_s(k) = Σ_j p_j k^{2j}`.
    pub fn series_coefficients(&self) -> &[f64] {
        &self.series
    }

    /// Coefficients `a_j = c_j α^{j-1} (-ħ²/2m*)^j` multiplying `Ψ^{(2j)}` in
    /// the stationary equation `Σ_j a_j Ψ^{(2j)} = (E + qV) Ψ`.
    pub fn operator_coefficients(&self) -> Vec<f64> {
        self.series
            .iter()
            .enumerate()
            .map(|(i, &p)| if i % 2 == 0 { -p } else { p })
            .collect()
    }

    /// Partial sum `Σ_{j≤s} c_j α^{j-1} γ^{2j}` at real `k`.
    pub fn truncated_energy(&self, k: f64) -> f64 {
        let u = k * k;
        self.series.iter().rev().fold(0.0, |acc, &p| (acc + p) * u)
    }

    /// `dε_s/dk` in eV·nm.
    pub fn energy_slope(&self, k: f64) -> f64 {
        let u = k * k;
        let mut acc = 0.0;
        for (i, &p) in self.series.iter().enumerate().rev() {
            acc = acc * u + (i as f64 + 1.0) * p;
        }
        2.0 * k * acc
    }

    /// Smallest positive `k` at which `dε_s/dk` vanishes, if any. Incident
    /// waves beyond it have negative group velocity.
    pub fn monotone_window(&self) -> Option<f64> {
        if self.order_half == 1 {
            return None;
        }
        // Σ j c_j w^{j-1} = 0 with w = αγ².
        let poly: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as f64 + 1.0) * c)
            .collect();
        let w = linalg::polynomial_roots(&poly)
            .into_iter()
            .filter(|z| z.im.abs() <= 1e-12 * z.norm().max(1.0) && z.re > 0.0)
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min);
        w.is_finite()
            .then(|| libm::sqrt(w / (self.params.alpha * self.kinetic_scale)))
    }

    /// Scaled residual of `Σ p_j k^{2j} - e` at a (complex) wave vector.
    pub fn dispersion_residual(&self, k: Complex64, kinetic_energy: f64) -> f64 {
        let u = k * k;
        let mut value = Complex64::new(-kinetic_energy, 0.0);
        let mut scale = kinetic_energy.abs();
        let mut power = Complex64::new(1.0, 0.0);
        for &p in &self.series {
            power *= u;
            value += power * p;
            scale += (power * p).norm();
        }
        value.norm() / scale.max(f64::MIN_POSITIVE)
    }

    /// Roots `u_j = k_j²` of `Σ p_j u^j = kinetic_energy`.
    pub fn squared_wave_vectors(&self, kinetic_energy: f64) -> Result<Vec<Complex64>> {
        if self.order_half == 1 {
            return Ok(alloc::vec![Complex64::new(kinetic_energy / self.series[0], 0.0)]);
        }
        // Dimensionless form in w = α γ²: Σ c_j w^j - α e = 0.
        let alpha = self.params.alpha;
        let mut poly = Vec::with_capacity(self.order_half + 1);
        poly.push(-alpha * kinetic_energy);
        poly.extend_from_slice(&self.coeffs);
        let roots = linalg::polynomial_roots(&poly);
        let to_u = 1.0 / (alpha * self.kinetic_scale);
        let mut out = Vec::with_capacity(roots.len());
        for w in roots {
            let (value, _) = linalg::horner(&poly, w);
            let scale: f64 = poly
                .iter()
                .enumerate()
                .map(|(j, c)| c.abs() * libm::pow(w.norm(), j as f64))
                .sum();
            let residual = value.norm() / scale.max(f64::MIN_POSITIVE);
            if residual > ROOT_RESIDUAL_TOLERANCE {
                return Err(Error::RootResidual { residual });
            }
            out.push(w * to_u);
        }
        Ok(out)
    }

    /// The `s` admissible wave vectors of a lead where `E + qV = kinetic_energy`.
    pub fn solve_wave_vectors(&self, kinetic_energy: f64, side: Side) -> Result<ModeSet> {
        let mut modes: Vec<(Mode, f64)> = Vec::with_capacity(self.order_half);
        for u in self.squared_wave_vectors(kinetic_energy)? {
            let mut mode = classify_root(u)?;
            if self.branch == BranchConvention::GroupVelocity
                && mode.kind == ModeKind::Propagating
                && self.energy_slope(mode.wave_vector.re) < 0.0
            {
                mode.wave_vector = -mode.wave_vector;
            }
            modes.push((mode, u.norm()));
        }
        modes.sort_by(|(a, ua), (b, ub)| {
            let rank = |m: &Mode| (m.kind == ModeKind::Evanescent) as u8;
            rank(a)
                .cmp(&rank(b))
                .then(ua.total_cmp(ub))
                .then(a.wave_vector.re.total_cmp(&b.wave_vector.re))
                .then(a.wave_vector.im.total_cmp(&b.wave_vector.im))
        });
        let modes: Vec<Mode> = modes.into_iter().map(|(m, _)| m).collect();
        for i in 0..modes.len() {
            for j in (i + 1)..modes.len() {
                let separation = (modes[i].wave_vector - modes[j].wave_vector).norm();
                if separation < DEGENERACY_TOLERANCE {
                    return Err(Error::DegenerateModes { i, j, separation });
                }
            }
        }
        Ok(ModeSet {
            modes,
            side,
            kinetic_energy,
        })
    }
}

/// Branch selection for one root `u = k²`.
fn classify_root(u: Complex64) -> Result<Mode> {
    if !(u.re.is_finite() && u.im.is_finite()) {
        return Err(Error::NoBoundedBranch { re: u.re, im: u.im });
    }
    let real = u.im.abs() < ROOT_IMAG_TOLERANCE * u.norm().max(1.0);
    let mode = if real {
        if u.re > 0.0 {
            Mode {
                wave_vector: Complex64::new(libm::sqrt(u.re), 0.0),
                kind: ModeKind::Propagating,
            }
        } else {
            Mode {
                wave_vector: Complex64::new(0.0, libm::sqrt(-u.re)),
                kind: ModeKind::Evanescent,
            }
        }
    } else {
        let k = u.sqrt();
        Mode {
            wave_vector: if k.im < 0.0 { -k } else { k },
            kind: ModeKind::Evanescent,
        }
    };
    if mode.wave_vector.norm() < DEGENERACY_TOLERANCE {
        return Err(Error::NoBoundedBranch { re: u.re, im: u.im });
    }
    Ok(mode)
}

fn pow_usize(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, _| acc * x)
}

/// `true` when a rational is an integer.
pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one() || r.numer().is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn model(order: usize) -> DispersionModel {
        DispersionModel::new(order, PhysicalParams::gaas()).unwrap()
    }

    #[test]
    fn signed_catalan_coefficients() {
        let c = kane_coefficients(5);
        let expect: Vec<Rational> = [1, -1, 2, -5, 14].iter().map(|&v| Rational::from_integer(v)).collect();
        assert_eq!(c, expect);
        assert_eq!(kane_coefficients(1), vec![Rational::one()]);
        assert!(kane_coefficients(12).iter().all(is_integer));
    }

    #[test]
    #[should_panic]
    fn zero_order_is_rejected() {
        let _ = kane_coefficients(0);
    }

    #[test]
    fn exact_energy_limits() {
        let p = PhysicalParams::gaas();
        assert_eq!(kane_energy_exact(0.0, &p), 0.0);
        let parabolic = p.with_alpha(0.0);
        let beta = parabolic.kinetic_scale();
        assert_eq!(kane_energy_exact(1.3, &parabolic), beta * 1.3 * 1.3);
        // γ² = 0.568654 eV at k = 1; closed form by scalar evaluation.
        let g2 = p.kinetic_scale();
        let direct = (-1.0 + libm::sqrt(1.0 + 4.0 * 0.242 * g2)) / (2.0 * 0.242);
        assert!((kane_energy_exact(1.0, &p) - direct).abs() < 1e-15);
        assert!((direct - 0.5068).abs() < 5e-4);
    }

    #[test]
    fn truncated_energy_terms() {
        let g2 = PhysicalParams::gaas().kinetic_scale();
        assert_eq!(model(2).truncated_energy(1.0), g2);
        let two = model(4).truncated_energy(1.0);
        assert!((two - (g2 - 0.242 * g2 * g2)).abs() < 1e-15);
        assert!((two - 0.4906).abs() < 5e-4);
        let six = model(12).truncated_energy(1.0);
        assert!((six - kane_energy_exact(1.0, &PhysicalParams::gaas())).abs() < 2e-3);
    }

    #[test]
    fn alpha_zero_collapses_to_parabolic() {
        let m = DispersionModel::new(6, PhysicalParams::gaas().with_alpha(0.0)).unwrap();
        assert_eq!(m.order_half(), 1);
        assert_eq!(m.requested_order_half(), 3);
    }

    #[test]
    fn odd_order_rejected() {
        assert!(matches!(
            DispersionModel::new(3, PhysicalParams::gaas()),
            Err(Error::InvalidParameter { name: "order", .. })
        ));
    }

    #[test]
    fn parabolic_single_mode() {
        let m = model(2);
        let e = m.kinetic_scale();
        let modes = m.solve_wave_vectors(e, Side::Left).unwrap();
        assert_eq!(modes.len(), 1);
        assert!((modes.modes()[0].wave_vector - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn quartic_factorization_and_sum_rule() {
        let m = model(4);
        let beta = m.kinetic_scale();
        let alpha = 0.242;
        for &k1 in &[0.3, 0.9, 1.5, 1.8] {
            let e = m.truncated_energy(k1);
            let set = m.solve_wave_vectors(e, Side::Left).unwrap();
            assert!(set.all_propagating());
            let k = set.wave_vectors();
            let sum = k[0].re * k[0].re + k[1].re * k[1].re;
            let expect = 1.0 / (alpha * beta);
            assert!((sum / expect - 1.0).abs() < 1e-12, "k1 = {k1}");
            // (u - k1²)(a u + β + a k1²) with a = -αβ²
            let a = -alpha * beta * beta;
            let other = -(beta + a * k1 * k1) / a;
            assert!(k.iter().any(|z| (z.re * z.re - other).abs() < 1e-10 * other));
        }
    }

    #[test]
    fn quartic_evanescent_beyond_window() {
        let m = model(4);
        let kmax = libm::sqrt(1.0 / (0.242 * m.kinetic_scale()));
        assert!((kmax - 2.695).abs() < 1e-3);
        let e = m.truncated_energy(2.8);
        let set = m.solve_wave_vectors(e, Side::Left).unwrap();
        assert_eq!(set.propagating_count(), 1);
        let ev = set.modes()[1];
        assert_eq!(ev.kind, ModeKind::Evanescent);
        assert!(ev.wave_vector.im > 0.0);
    }

    #[test]
    fn group_velocity_window() {
        let m = model(4);
        let w = m.monotone_window().unwrap();
        let expect = libm::sqrt(1.0 / (2.0 * 0.242 * m.kinetic_scale()));
        assert!((w - expect).abs() < 1e-12);
        assert!(m.energy_slope(0.99 * w) > 0.0);
        assert!(m.energy_slope(1.01 * w) < 0.0);
        assert!(model(2).monotone_window().is_none());
        assert!(model(6).monotone_window().is_none());
        assert!(model(8).monotone_window().is_some());
    }

    #[test]
    fn degenerate_modes_rejected() {
        let m = model(4);
        let w = m.monotone_window().unwrap();
        let e = m.truncated_energy(w);
        assert!(matches!(
            m.solve_wave_vectors(e, Side::Right),
            Err(Error::DegenerateModes { .. })
        ));
    }

    #[test]
    fn zero_kinetic_energy_has_no_branch() {
        assert!(matches!(
            model(2).solve_wave_vectors(0.0, Side::Left),
            Err(Error::NoBoundedBranch { .. })
        ));
    }

    #[test]
    fn higher_orders_bounded_and_accurate() {
        for order in [6, 8, 10, 12] {
            let m = model(order);
            for &e in &[-0.2, 0.05, 0.3, 0.6] {
                let set = m.solve_wave_vectors(e, Side::Right).unwrap();
                assert_eq!(set.len(), order / 2);
                for mode in set.modes() {
                    match mode.kind {
                        ModeKind::Propagating => assert!(mode.wave_vector.re > 0.0),
                        ModeKind::Evanescent => assert!(mode.wave_vector.im > 0.0),
                    }
                    assert!(m.dispersion_residual(mode.wave_vector, e) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn energy_consistency_with_incident_wave() {
        // E = Σ c_p α^{p-1} (-β)^p (i k)^{2p} equals ε_s(k) for real k.
        let m = model(8);
        let a = m.operator_coefficients();
        for &k in &[0.1, 0.7, 1.2] {
            let ik = Complex64::new(0.0, k);
            let mut e = Complex64::new(0.0, 0.0);
            for (j, &aj) in a.iter().enumerate() {
                e += ik.powu(2 * (j as u32 + 1)) * aj;
            }
            assert!(e.im.abs() < 1e-15);
            assert!((e.re - m.truncated_energy(k)).abs() < 1e-14);
        }
    }
}
