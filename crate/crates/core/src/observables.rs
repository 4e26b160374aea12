//! Probability current of the order-`2s` equation, boundary currents,
//! transmission and reflection probabilities, conservation diagnostics.
//!
//! For `Σ_j a_j Ψ^{(2j)} = e Ψ` the conserved current is
//!
//! `J = -(2/ħ) Σ_j a_j Im Σ_{r<j} (-1)^r conj(Ψ^{(r)}) Ψ^{(2j-1-r)}`
//!
//! which reduces to `(ħ/m*) Im(conj(Ψ) Ψ')` for `s = 1`. Currents are
//! reported in nm/fs for unit-amplitude waves.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::constants::HBAR_EV_FS;
use crate::dispersion::{DispersionModel, ModeKind, Side};
use crate::scattering::ScatteringSolution;
use crate::{Error, Result};

/// Lower guard of the conservation residual denominator.
pub const RESIDUAL_FLOOR: f64 = 1e-300;

/// `Ψ^{(l)}(x_i)` for `l < depth` at a list of points.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTable {
    depth: usize,
    x: Vec<f64>,
    values: Vec<Complex64>,
}

impl DerivativeTable {
    /// `values` is row-major: `depth` consecutive derivatives per point.
    pub fn new(depth: usize, x: Vec<f64>, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), depth * x.len(), "table shape mismatch");
        Self { depth, x, values }
    }

    /// Table of `Σ_j A_j exp(i κ_j (x - origin))`.
    pub fn plane_waves(depth: usize, amplitudes: &[Complex64], wave_numbers: &[Complex64], origin: f64, x: &[f64]) -> Self {
        let mut values = Vec::with_capacity(depth * x.len());
        for &xi in x {
            let mut row = alloc::vec![Complex64::new(0.0, 0.0); depth];
            for (&a, &k) in amplitudes.iter().zip(wave_numbers) {
                let ik = Complex64::new(0.0, 1.0) * k;
                let mut term = a * (ik * (xi - origin)).exp();
                for v in row.iter_mut() {
                    *v += term;
                    term *= ik;
                }
            }
            values.extend(row);
        }
        Self::new(depth, x.to_vec(), values)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.values[i * self.depth..(i + 1) * self.depth]
    }

    pub fn psi(&self, i: usize) -> Complex64 {
        self.values[i * self.depth]
    }

    /// `|Ψ(x_i)|²` at every point.
    pub fn density(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.psi(i).norm_sqr()).collect()
    }
}

/// Current at one point from `Ψ, Ψ', …, Ψ^{(2s-1)}` and operator
/// coefficients `a_1 … a_s`.
pub fn current_at(operator: &[f64], derivatives: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for (jm1, &a) in operator.iter().enumerate() {
        let j = jm1 + 1;
        let mut inner = 0.0;
        for r in 0..j {
            let term = (derivatives[r].conj() * derivatives[2 * j - 1 - r]).im;
            if r % 2 == 0 {
                inner += term;
            } else {
                inner -= term;
            }
        }
        acc += a * inner;
    }
    -2.0 * acc / HBAR_EV_FS
}

/// `J(x_i)` over a derivative table.
pub fn current_density(table: &DerivativeTable, model: &DispersionModel) -> Result<Vec<f64>> {
    let required = model.order();
    if table.depth() < required {
        return Err(Error::MissingDerivatives {
            available: table.depth(),
            required,
        });
    }
    let a = model.operator_coefficients();
    Ok((0..table.len()).map(|i| current_at(&a, &table.row(i)[..required])).collect())
}

/// Current of `Σ_j A_j exp(i κ_j (x - origin))` at `x`.
pub fn plane_wave_current(model: &DispersionModel, amplitudes: &[Complex64], wave_numbers: &[Complex64], origin: f64, x: f64) -> f64 {
    let table = DerivativeTable::plane_waves(model.order(), amplitudes, wave_numbers, origin, &[x]);
    current_at(&model.operator_coefficients(), table.row(0))
}

/// Signed asymptotic currents of the exterior waves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCurrents {
    pub incident: f64,
    pub reflected: f64,
    pub transmitted: f64,
}

impl BoundaryCurrents {
    /// `J_inc + J_refl - J_transm`.
    pub fn balance(&self) -> f64 {
        self.incident + self.reflected - self.transmitted
    }
}

/// Exterior plane-wave pieces of a solution, in the form
/// `Σ A_j exp(i κ_j (x - origin))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorWave {
    pub amplitudes: Vec<Complex64>,
    pub wave_numbers: Vec<Complex64>,
    pub origin: f64,
}

impl ExteriorWave {
    pub fn current(&self, model: &DispersionModel, x: f64) -> f64 {
        plane_wave_current(model, &self.amplitudes, &self.wave_numbers, self.origin, x)
    }
}

/// Incident, propagating-reflected and propagating-transmitted waves.
pub fn exterior_waves(solution: &ScatteringSolution) -> (ExteriorWave, ExteriorWave, ExteriorWave) {
    let problem = solution.problem();
    let length = problem.potential().length();
    let k1 = problem.incident_k();
    let inj = problem.injection_modes();
    let exit = problem.exit_modes();
    // Outward wave vectors point into -x on the left lead and +x on the right.
    let (inj_sign, inj_origin, exit_sign, exit_origin) = match problem.injection() {
        Side::Left => (-1.0, 0.0, 1.0, length),
        Side::Right => (1.0, length, -1.0, 0.0),
    };
    let incident = ExteriorWave {
        amplitudes: alloc::vec![Complex64::new(1.0, 0.0)],
        wave_numbers: alloc::vec![Complex64::new(k1, 0.0)],
        origin: inj_origin,
    };
    let pick = |modes: &crate::dispersion::ModeSet, amps: &[Complex64], sign: f64, origin: f64| {
        let mut w = ExteriorWave {
            amplitudes: Vec::new(),
            wave_numbers: Vec::new(),
            origin,
        };
        for (m, &a) in modes.modes().iter().zip(amps) {
            if m.kind == ModeKind::Propagating {
                w.amplitudes.push(a);
                w.wave_numbers.push(m.wave_vector * sign);
            }
        }
        w
    };
    let reflected = pick(inj, solution.reflection(), inj_sign, inj_origin);
    let transmitted = pick(exit, solution.transmission_edge(), exit_sign, exit_origin);
    (incident, reflected, transmitted)
}

/// Asymptotic currents of the propagating exterior waves, evaluated at the
/// injection boundary (incident, reflected) and the exit boundary (transmitted).
pub fn boundary_currents(solution: &ScatteringSolution) -> BoundaryCurrents {
    let model = solution.problem().model();
    let (inc, refl, trans) = exterior_waves(solution);
    BoundaryCurrents {
        incident: inc.current(model, inc.origin),
        reflected: refl.current(model, refl.origin),
        transmitted: trans.current(model, trans.origin),
    }
}

/// `(|T|², |R|²) = (|J_transm|, |J_refl|) / |J_inc|`.
pub fn transmission_reflection(j_inc: f64, j_refl: f64, j_transm: f64) -> Result<(f64, f64)> {
    if j_inc == 0.0 || !j_inc.is_finite() {
        return Err(Error::ZeroIncidentCurrent);
    }
    Ok((j_transm.abs() / j_inc.abs(), j_refl.abs() / j_inc.abs()))
}

/// `(max J - min J) / max(max |J|, floor)`.
pub fn conservation_residual(current: &[f64]) -> f64 {
    conservation_residual_against(current, 0.0)
}

/// Spread of `J` relative to `max(max |J|, scale)`. Passing `|J_inc|` as
/// `scale` measures the spread against the injected flux.
pub fn conservation_residual_against(current: &[f64], scale: f64) -> f64 {
    let (lo, hi, mag) = current
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY, 0.0f64), |(lo, hi, m), &j| {
            (lo.min(j), hi.max(j), m.max(j.abs()))
        });
    if current.is_empty() {
        return 0.0;
    }
    (hi - lo) / mag.max(scale.abs()).max(RESIDUAL_FLOOR)
}

/// Current diagnostics of one scattering solution.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentProfile {
    pub x: Vec<f64>,
    pub current: Vec<f64>,
    pub boundary: BoundaryCurrents,
    pub t2: f64,
    pub r2: f64,
    /// Spread of `J(x)` relative to its largest magnitude.
    pub conservation_residual: f64,
    /// Spread of `J(x)` relative to the incident current.
    pub flux_residual: f64,
}

pub fn current_profile(solution: &ScatteringSolution) -> Result<CurrentProfile> {
    let model = solution.problem().model();
    let current = current_density(solution.table(), model)?;
    let boundary = boundary_currents(solution);
    let (t2, r2) = transmission_reflection(boundary.incident, boundary.reflected, boundary.transmitted)?;
    Ok(CurrentProfile {
        x: solution.table().x().to_vec(),
        conservation_residual: conservation_residual(&current),
        flux_residual: conservation_residual_against(&current, boundary.incident),
        current,
        boundary,
        t2,
        r2,
    })
}
