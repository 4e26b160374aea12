//! Scattering states of the order-`2s` equation on `[0, L]` with
//! transparent boundary conditions.
//!
//! Outside the device the solution is a sum of lead modes. For `k₁ > 0`
//!
//! ```text
//! Ψ(x) = e^{i k₁ x} + Σ r_j e^{-i k_j x}            x < 0
//! Ψ(x) = Σ t_j e^{i k̃_j x} = Σ t'_j e^{i k̃_j (x-L)}  x > L
//! ```
//!
//! and for `k₁ < 0` the roles of the leads are swapped, with the incident
//! wave `e^{i k₁ (x-L)}` entering from the right. Matching `Ψ` and its first
//! `2s - 1` derivatives at both edges and eliminating the exterior amplitudes
//! yields `s` conditions per edge on the interior state `y = (Ψ, …, Ψ^{(2s-1)})`.
//!
//! Two solvers are provided. [`SolveMethod::Shooting`] integrates the
//! fundamental set with identity data at `x = 0` and solves the `2s × 2s`
//! boundary system for `c_p = Ψ^{(p)}(0)`. [`SolveMethod::Orthonormal`]
//! carries an orthonormal basis of the exit-admissible subspace from the exit
//! edge to the injection edge, re-orthonormalizing on every grid interval,
//! and then recovers the solution by triangular back-substitution. It stays
//! accurate when evanescent modes grow by many orders of magnitude across
//! the device.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dispersion::{DispersionModel, ModeSet, Side};
pub use crate::integrator::{Grid, GridSpec, IntegratorOptions, Method};
use crate::integrator::{Integrator, LinearOde};
use crate::linalg;
use crate::observables::DerivativeTable;
use crate::potential::PiecewisePotential;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SolveMethod {
    /// Fundamental set from `x = 0` and one dense boundary solve.
    Shooting,
    /// Stabilized sweep from the exit edge with per-interval QR.
    #[default]
    Orthonormal,
    /// Shooting, falling back to the orthonormal sweep on overflow or
    /// ill-conditioning.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub grid: GridSpec,
    pub integrator: IntegratorOptions,
    pub method: SolveMethod,
    /// Largest accepted condition number of the equilibrated boundary system.
    pub cond_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            integrator: IntegratorOptions::default(),
            method: SolveMethod::default(),
            cond_max: 1e12,
        }
    }
}

/// One incident wave on one device.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringProblem {
    model: DispersionModel,
    potential: PiecewisePotential,
    incident_k: f64,
    energy: f64,
    left_modes: ModeSet,
    right_modes: ModeSet,
}

impl ScatteringProblem {
    /// Energy and lead modes for the incident wave vector `incident_k`
    /// (positive: injected at `x = 0`, negative: injected at `x = L`).
    pub fn new(model: DispersionModel, potential: PiecewisePotential, incident_k: f64) -> Result<Self> {
        if incident_k == 0.0 || !incident_k.is_finite() {
            return Err(Error::InvalidParameter {
                name: "incident_k",
                reason: alloc::format!("must be finite and nonzero, got {incident_k}"),
            });
        }
        let k = incident_k.abs();
        let v0 = potential.left_value();
        let vl = potential.right_value();
        let injection_v = if incident_k > 0.0 { v0 } else { vl };
        let energy = model.truncated_energy(k) - injection_v;
        let mut left_modes = model.solve_wave_vectors(energy + v0, Side::Left)?;
        let mut right_modes = model.solve_wave_vectors(energy + vl, Side::Right)?;
        if incident_k > 0.0 {
            left_modes.place_incident_first(k)?;
        } else {
            right_modes.place_incident_first(k)?;
        }
        Ok(Self {
            model,
            potential,
            incident_k,
            energy,
            left_modes,
            right_modes,
        })
    }

    pub fn model(&self) -> &DispersionModel {
        &self.model
    }

    pub fn potential(&self) -> &PiecewisePotential {
        &self.potential
    }

    pub fn incident_k(&self) -> f64 {
        self.incident_k
    }

    /// Total energy `E` in eV.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn left_modes(&self) -> &ModeSet {
        &self.left_modes
    }

    pub fn right_modes(&self) -> &ModeSet {
        &self.right_modes
    }

    pub fn injection(&self) -> Side {
        if self.incident_k > 0.0 {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Modes of the lead the wave is injected from; the incident one is first.
    pub fn injection_modes(&self) -> &ModeSet {
        match self.injection() {
            Side::Left => &self.left_modes,
            Side::Right => &self.right_modes,
        }
    }

    pub fn exit_modes(&self) -> &ModeSet {
        match self.injection() {
            Side::Left => &self.right_modes,
            Side::Right => &self.left_modes,
        }
    }

    pub fn ode(&self) -> LinearOde {
        LinearOde::new(self.model.operator_coefficients(), self.energy)
    }

    fn dim(&self) -> usize {
        self.model.order()
    }

    /// Columns `(σ i k_j)^l` of the outward modes of a lead, `σ = -1` on the
    /// left and `+1` on the right.
    fn lead_basis(&self, side: Side) -> DMatrix<Complex64> {
        let (modes, sign) = match side {
            Side::Left => (&self.left_modes, -1.0),
            Side::Right => (&self.right_modes, 1.0),
        };
        let n = self.dim();
        let mut b = DMatrix::zeros(n, modes.len());
        for (j, m) in modes.modes().iter().enumerate() {
            let ik = I * m.wave_vector * sign;
            let mut p = Complex64::new(1.0, 0.0);
            for l in 0..n {
                b[(l, j)] = p;
                p *= ik;
            }
        }
        b
    }

    /// `((i k₁)^l)_l`, the derivatives of the incident wave at its edge.
    fn incident_vector(&self) -> DVector<Complex64> {
        let ik = I * self.incident_k;
        let mut p = Complex64::new(1.0, 0.0);
        DVector::from_fn(self.dim(), |_, _| {
            let v = p;
            p *= ik;
            v
        })
    }

    fn mode_scale(&self) -> f64 {
        self.left_modes
            .max_magnitude()
            .max(self.right_modes.max_magnitude())
            .max(1.0)
    }
}

/// Free-function form of [`ScatteringProblem::new`].
pub fn build_problem(model: DispersionModel, potential: PiecewisePotential, incident_k: f64) -> Result<ScatteringProblem> {
    ScatteringProblem::new(model, potential, incident_k)
}

/// Fundamental solutions `φ_p` with `φ_p^{(l)}(0) = δ_{pl}` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSet {
    grid: Grid,
    values: Vec<DMatrix<f64>>,
}

impl FundamentalSet {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `Φ(x_i)`, column `p` holding `φ_p^{(l)}(x_i)` for `l = 0..2s`.
    pub fn at(&self, i: usize) -> &DMatrix<f64> {
        &self.values[i]
    }

    pub fn at_end(&self) -> &DMatrix<f64> {
        self.values.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn integrate_fundamental_set(
    problem: &ScatteringProblem,
    grid_spec: &GridSpec,
    options: &IntegratorOptions,
) -> Result<FundamentalSet> {
    let grid = Grid::new(problem.potential(), grid_spec)?;
    let ode = problem.ode();
    let values = Integrator::new(&ode, problem.potential(), *options).fundamental_matrices(&grid)?;
    Ok(FundamentalSet { grid, values })
}

/// `s` linear conditions `G y = h` on the state at one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRows {
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
}

/// Conditions expressing `y - particular ∈ span(basis)`: with the basis split
/// into its first and last `s` rows, `y_bot - B_bot B_top⁻¹ y_top` must equal
/// the same combination of the particular vector.
fn boundary_rows(basis: &DMatrix<Complex64>, particular: Option<&DVector<Complex64>>) -> Result<BoundaryRows> {
    let s = basis.ncols();
    let n = basis.nrows();
    let top = basis.rows(0, s).into_owned();
    let bot = basis.rows(s, n - s).into_owned();
    let top_inv = top.try_inverse().ok_or(Error::SingularSystem { condition: f64::INFINITY })?;
    let coupling = -(bot * top_inv);
    let mut matrix = DMatrix::zeros(s, n);
    matrix.view_mut((0, 0), (s, s)).copy_from(&coupling);
    for i in 0..s {
        matrix[(i, s + i)] = Complex64::new(1.0, 0.0);
    }
    let rhs = match particular {
        Some(e) => &matrix * e,
        None => DVector::zeros(s),
    };
    Ok(BoundaryRows { matrix, rhs })
}

/// Transparent boundary conditions at `x = 0` and `x = L`.
#[derive(Debug, Clone, PartialEq)]
pub struct TbcRows {
    pub left: BoundaryRows,
    pub right: BoundaryRows,
}

pub fn boundary_conditions(problem: &ScatteringProblem) -> Result<TbcRows> {
    let e = problem.incident_vector();
    let (pl, pr) = match problem.injection() {
        Side::Left => (Some(&e), None),
        Side::Right => (None, Some(&e)),
    };
    Ok(TbcRows {
        left: boundary_rows(&problem.lead_basis(Side::Left), pl)?,
        right: boundary_rows(&problem.lead_basis(Side::Right), pr)?,
    })
}

/// The `2s × 2s` system `A c = b` for `c_p = Ψ^{(p)}(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TbcSystem {
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
}

/// Stacks the left conditions on `c` and the right conditions on `Φ(L) c`.
pub fn assemble_tbc_system(problem: &ScatteringProblem, fundamental_at_l: &DMatrix<f64>) -> Result<TbcSystem> {
    let n = problem.dim();
    let s = n / 2;
    let rows = boundary_conditions(problem)?;
    let phi = fundamental_at_l.map(|v| Complex64::new(v, 0.0));
    let mut matrix = DMatrix::zeros(n, n);
    matrix.view_mut((0, 0), (s, n)).copy_from(&rows.left.matrix);
    matrix.view_mut((s, 0), (s, n)).copy_from(&(&rows.right.matrix * phi));
    let mut rhs = DVector::zeros(n);
    rhs.rows_mut(0, s).copy_from(&rows.left.rhs);
    rhs.rows_mut(s, s).copy_from(&rows.right.rhs);
    Ok(TbcSystem { matrix, rhs })
}

/// Solution of one scattering problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    problem: ScatteringProblem,
    table: DerivativeTable,
    reflection: Vec<Complex64>,
    transmission_edge: Vec<Complex64>,
    condition: f64,
    method: SolveMethod,
}

impl ScatteringSolution {
    pub fn problem(&self) -> &ScatteringProblem {
        &self.problem
    }

    /// `Ψ^{(l)}` at every grid node, ascending in `x`.
    pub fn table(&self) -> &DerivativeTable {
        &self.table
    }

    pub fn grid_nodes(&self) -> &[f64] {
        self.table.x()
    }

    /// `c_p = Ψ^{(p)}(0)`.
    pub fn coefficients(&self) -> &[Complex64] {
        self.table.row(0)
    }

    /// `r_j`, ordered like the injection lead modes (`r_1` pairs with `k₁`).
    pub fn reflection(&self) -> &[Complex64] {
        &self.reflection
    }

    /// Transmitted amplitudes referenced to the exit edge, `t'_j`.
    pub fn transmission_edge(&self) -> &[Complex64] {
        &self.transmission_edge
    }

    /// `t_j = t'_j e^{-i k̃_j L}`, the amplitudes of `e^{i k̃_j x}` for
    /// `k₁ > 0` and of `e^{-i k̃_j (x-L)}` for `k₁ < 0`. Evanescent entries can
    /// be huge or overflow; use [`Self::transmission_edge`] for those.
    pub fn transmission(&self) -> Vec<Complex64> {
        let length = self.problem.potential().length();
        self.problem
            .exit_modes()
            .modes()
            .iter()
            .zip(&self.transmission_edge)
            .map(|(m, &t)| t * (-I * m.wave_vector * length).exp())
            .collect()
    }

    /// 1-norm condition number of the equilibrated final linear system.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// The method that produced this solution.
    pub fn method(&self) -> SolveMethod {
        self.method
    }
}

pub fn solve_scattering(problem: &ScatteringProblem, options: &SolverOptions) -> Result<ScatteringSolution> {
    let grid = Grid::new(problem.potential(), &options.grid)?;
    solve_on_grid(problem, &grid, options)
}

/// Like [`solve_scattering`] on a caller-supplied grid.
pub fn solve_on_grid(problem: &ScatteringProblem, grid: &Grid, options: &SolverOptions) -> Result<ScatteringSolution> {
    match options.method {
        SolveMethod::Shooting => shooting(problem, grid, options),
        SolveMethod::Orthonormal => orthonormal(problem, grid, options),
        SolveMethod::Auto => match shooting(problem, grid, options) {
            Err(Error::IntegrationOverflow { .. }) | Err(Error::SingularSystem { .. }) => orthonormal(problem, grid, options),
            other => other,
        },
    }
}

fn finish(
    problem: &ScatteringProblem,
    grid: &Grid,
    states: Vec<DVector<Complex64>>,
    condition: f64,
    method: SolveMethod,
) -> Result<ScatteringSolution> {
    let n = problem.dim();
    let s = n / 2;
    let first = &states[0];
    let last = &states[states.len() - 1];
    let (y_inj, y_exit, inj_side, exit_side) = match problem.injection() {
        Side::Left => (first, last, Side::Left, Side::Right),
        Side::Right => (last, first, Side::Right, Side::Left),
    };
    let inj_top = problem.lead_basis(inj_side).rows(0, s).into_owned();
    let exit_top = problem.lead_basis(exit_side).rows(0, s).into_owned();
    let excess = y_inj.rows(0, s) - problem.incident_vector().rows(0, s);
    let singular = Error::SingularSystem { condition: f64::INFINITY };
    let reflection = linalg::solve(&inj_top, &excess).ok_or(singular.clone())?;
    let transmission = linalg::solve(&exit_top, &y_exit.rows(0, s).into_owned()).ok_or(singular)?;
    let mut values = Vec::with_capacity(n * states.len());
    for y in &states {
        values.extend(y.iter().copied());
    }
    Ok(ScatteringSolution {
        problem: problem.clone(),
        table: DerivativeTable::new(n, grid.nodes().to_vec(), values),
        reflection: reflection.iter().copied().collect(),
        transmission_edge: transmission.iter().copied().collect(),
        condition,
        method,
    })
}

fn checked_solve(a: &DMatrix<Complex64>, b: &DVector<Complex64>, cond_max: f64) -> Result<(DVector<Complex64>, f64)> {
    let out = linalg::solve_conditioned(a, b).ok_or(Error::SingularSystem { condition: f64::INFINITY })?;
    if !(out.condition <= cond_max) {
        return Err(Error::SingularSystem { condition: out.condition });
    }
    Ok((out.solution, out.condition))
}

fn shooting(problem: &ScatteringProblem, grid: &Grid, options: &SolverOptions) -> Result<ScatteringSolution> {
    let ode = problem.ode();
    let phis = Integrator::new(&ode, problem.potential(), options.integrator).fundamental_matrices(grid)?;
    let system = assemble_tbc_system(problem, phis.last().unwrap())?;
    let (c, condition) = checked_solve(&system.matrix, &system.rhs, options.cond_max)?;
    let states = phis
        .iter()
        .map(|phi| phi.map(|v| Complex64::new(v, 0.0)) * &c)
        .collect();
    finish(problem, grid, states, condition, SolveMethod::Shooting)
}

fn orthonormal(problem: &ScatteringProblem, grid: &Grid, options: &SolverOptions) -> Result<ScatteringSolution> {
    let n = problem.dim();
    let s = n / 2;
    let ode = problem.ode();
    let props = Integrator::new(&ode, problem.potential(), options.integrator).interval_propagators(grid)?;

    // Derivative-order scaling y_l → κ^{-l} y_l balances the mode bases.
    let kappa = problem.mode_scale();
    let scale: Vec<f64> = (0..n).map(|l| libm::pow(kappa, -(l as f64))).collect();
    let scale_rows = |m: &mut DMatrix<Complex64>| {
        for (l, sc) in scale.iter().enumerate() {
            m.row_mut(l).scale_mut(*sc);
        }
    };

    let (inj_side, exit_side) = match problem.injection() {
        Side::Left => (Side::Left, Side::Right),
        Side::Right => (Side::Right, Side::Left),
    };
    let mut exit_basis = problem.lead_basis(exit_side);
    scale_rows(&mut exit_basis);

    // Sweep order: node indices from the exit edge to the injection edge.
    let nodes = grid.len();
    let order: Vec<usize> = match exit_side {
        Side::Right => (0..nodes).rev().collect(),
        Side::Left => (0..nodes).collect(),
    };
    let step_map = |from: usize, to: usize| -> Result<DMatrix<Complex64>> {
        let p = if to > from {
            props[from].clone()
        } else {
            props[to]
                .clone()
                .try_inverse()
                .ok_or(Error::SingularSystem { condition: f64::INFINITY })?
        };
        Ok(DMatrix::from_fn(n, n, |l, m| {
            Complex64::new(p[(l, m)] * scale[l] / scale[m], 0.0)
        }))
    };

    let mut q: Vec<DMatrix<Complex64>> = Vec::with_capacity(nodes);
    let mut r: Vec<DMatrix<Complex64>> = Vec::with_capacity(nodes - 1);
    q.push(exit_basis.qr().q());
    for w in order.windows(2) {
        let t = step_map(w[0], w[1])?;
        let qr = (t * q.last().unwrap()).qr();
        q.push(qr.q());
        r.push(qr.r());
    }

    let mut inj_basis = problem.lead_basis(inj_side);
    scale_rows(&mut inj_basis);
    let mut e = problem.incident_vector();
    for (l, sc) in scale.iter().enumerate() {
        e[l] *= *sc;
    }
    let q_inj = q.last().unwrap();
    let mut system = DMatrix::zeros(n, n);
    system.view_mut((0, 0), (n, s)).copy_from(q_inj);
    system.view_mut((0, s), (n, s)).copy_from(&(-&inj_basis));
    let (sol, condition) = checked_solve(&system, &e, options.cond_max)?;

    // Back-substitute toward the exit edge: z_i = R_i⁻¹ z_{i+1}.
    let mut z = sol.rows(0, s).into_owned();
    let mut swept: Vec<DVector<Complex64>> = Vec::with_capacity(nodes);
    swept.push(q_inj * &z);
    for i in (0..r.len()).rev() {
        z = r[i]
            .solve_upper_triangular(&z)
            .ok_or(Error::SingularSystem { condition: f64::INFINITY })?;
        swept.push(&q[i] * &z);
    }
    // `swept` runs from the injection edge to the exit edge.
    let mut states = alloc::vec![DVector::zeros(n); nodes];
    for (pos, y) in swept.into_iter().enumerate() {
        let node = order[nodes - 1 - pos];
        let mut y = y;
        for (l, sc) in scale.iter().enumerate() {
            y[l] /= *sc;
        }
        states[node] = y;
    }
    finish(problem, grid, states, condition, SolveMethod::Orthonormal)
}
