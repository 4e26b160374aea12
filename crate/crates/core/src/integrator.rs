//! Integration of the stationary equation `Σ_j a_j Ψ^{(2j)} = e(x) Ψ` as a
//! first-order system for `y = (Ψ, Ψ', …, Ψ^{(2s-1)})`.
//!
//! Two one-step methods are available. [`Method::GaussCollocation`] is the
//! four-stage Gauss–Legendre collocation scheme of order 8. It is symmetric
//! and preserves quadratic invariants of linear systems, so the probability
//! current is constant to rounding. [`Method::Dopri5`] is the adaptive
//! Dormand–Prince 5(4) pair with Hairer's dense output.
//!
//! Both methods step exactly onto every segment boundary. Within a segment the
//! kinetic energy `e(x) = E + V(x)` is affine.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::potential::{PiecewisePotential, Segment};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Resolution of the sampling grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points_per_nm: f64,
    /// Minimum number of intervals in every potential segment.
    pub min_intervals: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points_per_nm: 8.0,
            min_intervals: 4,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.points_per_nm > 0.0 && self.points_per_nm.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "points_per_nm",
                reason: "must be positive".into(),
            });
        }
        if self.min_intervals == 0 {
            return Err(Error::InvalidParameter {
                name: "min_intervals",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Grid nodes on `[0, L]`, uniform inside each potential segment and placed
/// exactly on every breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    /// Potential segment of interval `[nodes[i], nodes[i + 1]]`.
    interval_segment: Vec<usize>,
}

impl Grid {
    pub fn new(potential: &PiecewisePotential, spec: &GridSpec) -> Result<Self> {
        spec.validate()?;
        let mut nodes = vec![0.0];
        let mut interval_segment = Vec::new();
        for (si, s) in potential.segments().iter().enumerate() {
            let n = (libm::ceil(s.width() * spec.points_per_nm) as usize).max(spec.min_intervals);
            let h = s.width() / n as f64;
            for i in 1..n {
                nodes.push(s.start + h * i as f64);
                interval_segment.push(si);
            }
            nodes.push(s.end);
            interval_segment.push(si);
        }
        Ok(Self {
            nodes,
            interval_segment,
        })
    }

    /// Grid from explicit nodes; every breakpoint of `potential` must be a node.
    pub fn from_nodes(potential: &PiecewisePotential, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 || *nodes.last().unwrap() != potential.length() {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: "nodes must start at 0 and end at L".into(),
            });
        }
        let mut interval_segment = Vec::with_capacity(nodes.len() - 1);
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::OrderingViolation { index: i + 1 });
            }
            let si = potential.segment_index(w[0])?;
            if potential.segments()[si].end < w[1] {
                return Err(Error::InvalidParameter {
                    name: "grid",
                    reason: alloc::format!("interval {i} straddles a potential breakpoint"),
                });
            }
            interval_segment.push(si);
        }
        Ok(Self {
            nodes,
            interval_segment,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn interval_segment(&self, i: usize) -> usize {
        self.interval_segment[i]
    }

    /// The grid of the mirrored potential: nodes `L - x` in ascending order.
    pub fn mirrored(&self, potential: &PiecewisePotential) -> Result<Self> {
        let length = potential.length();
        let mirrored = potential.mirrored();
        let mut nodes: Vec<f64> = self.nodes.iter().rev().map(|&x| length - x).collect();
        nodes[0] = 0.0;
        *nodes.last_mut().unwrap() = length;
        // Snap onto the mirrored breakpoints so intervals never straddle one.
        for b in mirrored.breakpoints() {
            if let Some(n) = nodes.iter_mut().find(|n| (**n - b).abs() < 1e-9 * length.max(1.0)) {
                *n = b;
            }
        }
        Self::from_nodes(&mirrored, nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    #[default]
    GaussCollocation,
    Dopri5,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub method: Method,
    /// Relative and absolute tolerances of the adaptive method.
    pub rtol: f64,
    pub atol: f64,
    /// Largest admissible magnitude of any fundamental-set component.
    pub overflow_guard: f64,
    /// Collocation substep limit `h·|λ|max`.
    pub collocation_theta: f64,
    /// Step budget of the adaptive method per call.
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            method: Method::GaussCollocation,
            rtol: 1e-10,
            atol: 1e-10,
            overflow_guard: 1e12,
            collocation_theta: 0.5,
            max_steps: 1_000_000,
        }
    }
}

/// The linear system `y' = A(x) y` for given operator coefficients `a_j`
/// and total energy `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOde {
    a: Vec<f64>,
    energy: f64,
}

impl LinearOde {
    /// `a[j-1]` multiplies `Ψ^{(2j)}`.
    pub fn new(a: Vec<f64>, energy: f64) -> Self {
        assert!(!a.is_empty() && *a.last().unwrap() != 0.0, "leading coefficient must be nonzero");
        Self { a, energy }
    }

    /// System dimension `2s`.
    pub fn dim(&self) -> usize {
        2 * self.a.len()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    /// Kinetic energy `E + V(x)` on a segment.
    pub fn kinetic(&self, segment: &Segment, x: f64) -> f64 {
        self.energy + segment.value(x)
    }

    /// Companion matrix at kinetic energy `e`.
    pub fn matrix(&self, e: f64) -> DMatrix<f64> {
        let n = self.dim();
        let s = self.a.len();
        let lead = self.a[s - 1];
        let mut m = DMatrix::zeros(n, n);
        for l in 0..n - 1 {
            m[(l, l + 1)] = 1.0;
        }
        m[(n - 1, 0)] = e / lead;
        for j in 1..s {
            m[(n - 1, 2 * j)] = -self.a[j - 1] / lead;
        }
        m
    }

    /// `out = A(e) y` for a column-major `n × m` block.
    fn apply(&self, e: f64, y: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let s = self.a.len();
        let lead = self.a[s - 1];
        for (yc, oc) in y.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
            oc[..n - 1].copy_from_slice(&yc[1..]);
            let mut top = e * yc[0];
            for j in 1..s {
                top -= self.a[j - 1] * yc[2 * j];
            }
            oc[n - 1] = top / lead;
        }
    }

    /// Upper bound on `|λ|` over roots of `Σ a_j λ^{2j} = e`.
    pub fn exponent_bound(&self, e: f64) -> f64 {
        let s = self.a.len();
        let lead = self.a[s - 1].abs();
        // Fujiwara bound for the polynomial in v = λ².
        let mut bound: f64 = libm::pow(e.abs() / (2.0 * lead), 1.0 / s as f64);
        for j in 1..s {
            bound = bound.max(libm::pow(self.a[j - 1].abs() / lead, 1.0 / (s - j) as f64));
        }
        libm::sqrt(2.0 * bound)
    }

    fn segment_bound(&self, segment: &Segment) -> f64 {
        let e0 = self.kinetic(segment, segment.start);
        let e1 = self.kinetic(segment, segment.end);
        self.exponent_bound(e0.abs().max(e1.abs()))
    }
}

/// Four-stage Gauss–Legendre Butcher tableau on `[0, 1]`.
#[derive(Debug, Clone)]
struct GaussTableau {
    c: [f64; 4],
    a: [[f64; 4]; 4],
    b: [f64; 4],
}

impl GaussTableau {
    fn new() -> Self {
        let rule = GaussLegendre::new(4);
        let mut c = [0.0; 4];
        let mut b = [0.0; 4];
        for i in 0..4 {
            c[i] = 0.5 * (rule.nodes()[i] + 1.0);
            b[i] = 0.5 * rule.weights()[i];
        }
        // a_ij = ∫_0^{c_i} ℓ_j(t) dt; ℓ_j has degree 3 so the rule is exact.
        let lagrange = |j: usize, t: f64| {
            (0..4)
                .filter(|&m| m != j)
                .fold(1.0, |acc, m| acc * (t - c[m]) / (c[j] - c[m]))
        };
        let mut a = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                a[i][j] = rule.integrate(0.0, c[i], |t| lagrange(j, t));
            }
        }
        Self { c, a, b }
    }
}

/// Propagator of one collocation step `[x, x + h]` for `y' = A(x) y`.
fn gauss_step(ode: &LinearOde, tab: &GaussTableau, segment: &Segment, x: f64, h: f64) -> Result<DMatrix<f64>> {
    let n = ode.dim();
    let stages: Vec<DMatrix<f64>> = tab
        .c
        .iter()
        .map(|&c| ode.matrix(ode.kinetic(segment, x + c * h)))
        .collect();
    // (I - h (a_ij A_i)) K = [A_i], K_i the stage slopes for identity data.
    let mut lhs = DMatrix::<f64>::identity(4 * n, 4 * n);
    let mut rhs = DMatrix::<f64>::zeros(4 * n, n);
    for i in 0..4 {
        for j in 0..4 {
            let f = -h * tab.a[i][j];
            for r in 0..n {
                for q in 0..n {
                    lhs[(i * n + r, j * n + q)] += f * stages[i][(r, q)];
                }
            }
        }
        rhs.view_mut((i * n, 0), (n, n)).copy_from(&stages[i]);
    }
    let k = lhs
        .lu()
        .solve(&rhs)
        .ok_or(Error::StepFailure { x, step: h })?;
    let mut p = DMatrix::<f64>::identity(n, n);
    for i in 0..4 {
        p += k.view((i * n, 0), (n, n)) * (h * tab.b[i]);
    }
    Ok(p)
}

/// Integrator bound to one equation and one potential.
#[derive(Debug, Clone)]
pub struct Integrator<'a> {
    ode: &'a LinearOde,
    potential: &'a PiecewisePotential,
    options: IntegratorOptions,
    tableau: GaussTableau,
}

impl<'a> Integrator<'a> {
    pub fn new(ode: &'a LinearOde, potential: &'a PiecewisePotential, options: IntegratorOptions) -> Self {
        Self {
            ode,
            potential,
            options,
            tableau: GaussTableau::new(),
        }
    }

    pub fn options(&self) -> &IntegratorOptions {
        &self.options
    }

    fn collocation_substeps(&self, segment: &Segment, h: f64) -> usize {
        let bound = self.ode.segment_bound(segment);
        (libm::ceil(h * bound / self.options.collocation_theta) as usize).max(1)
    }

    fn collocation_propagator(&self, segment: &Segment, x0: f64, x1: f64) -> Result<DMatrix<f64>> {
        let m = self.collocation_substeps(segment, x1 - x0);
        let h = (x1 - x0) / m as f64;
        let mut p = gauss_step(self.ode, &self.tableau, segment, x0, h)?;
        if m > 1 {
            if segment.is_constant() {
                let step = p.clone();
                for _ in 1..m {
                    p = &step * p;
                }
            } else {
                for i in 1..m {
                    p = gauss_step(self.ode, &self.tableau, segment, x0 + h * i as f64, h)? * p;
                }
            }
        }
        Ok(p)
    }

    /// Propagators `P_i` with `y(x_{i+1}) = P_i y(x_i)` for every grid interval.
    pub fn interval_propagators(&self, grid: &Grid) -> Result<Vec<DMatrix<f64>>> {
        let nodes = grid.nodes();
        let mut out: Vec<DMatrix<f64>> = Vec::with_capacity(grid.intervals());
        let mut cached: Option<(usize, usize)> = None;
        for i in 0..grid.intervals() {
            let si = grid.interval_segment(i);
            let segment = &self.potential.segments()[si];
            let (x0, x1) = (nodes[i], nodes[i + 1]);
            let p = match self.options.method {
                Method::GaussCollocation => {
                    // Uniform spacing on a constant segment: reuse the first propagator.
                    let reuse = cached.filter(|&(cs, ci)| {
                        cs == si
                            && segment.is_constant()
                            && ((nodes[ci + 1] - nodes[ci]) - (x1 - x0)).abs() <= 1e-12 * (x1 - x0)
                    });
                    match reuse {
                        Some((_, ci)) => out[ci].clone(),
                        None => {
                            cached = Some((si, i));
                            self.collocation_propagator(segment, x0, x1)?
                        }
                    }
                }
                Method::Dopri5 => {
                    let n = self.ode.dim();
                    let id = DMatrix::<f64>::identity(n, n);
                    let mut states = self.dopri_segment(segment, x0, x1, id.as_slice(), &[x1])?;
                    DMatrix::from_vec(n, n, states.pop().unwrap())
                }
            };
            out.push(p);
        }
        Ok(out)
    }

    /// Fundamental matrix `Φ(x_i)` at every node with `Φ(0) = I`.
    ///
    /// Column `p` holds `φ_p^{(l)}(x_i)` for `l = 0..2s`.
    pub fn fundamental_matrices(&self, grid: &Grid) -> Result<Vec<DMatrix<f64>>> {
        let n = self.ode.dim();
        let nodes = grid.nodes();
        let mut out = Vec::with_capacity(grid.len());
        out.push(DMatrix::<f64>::identity(n, n));
        match self.options.method {
            Method::GaussCollocation => {
                for (i, p) in self.interval_propagators(grid)?.into_iter().enumerate() {
                    let next = p * &out[i];
                    self.guard(nodes[i + 1], &next)?;
                    out.push(next);
                }
            }
            Method::Dopri5 => {
                let mut i = 0;
                while i < grid.intervals() {
                    let si = grid.interval_segment(i);
                    let mut j = i;
                    while j < grid.intervals() && grid.interval_segment(j) == si {
                        j += 1;
                    }
                    let segment = &self.potential.segments()[si];
                    let start = out[i].clone();
                    let states = self.dopri_segment(segment, nodes[i], nodes[j], start.as_slice(), &nodes[i + 1..=j])?;
                    for (k, st) in states.into_iter().enumerate() {
                        let m = DMatrix::from_vec(n, n, st);
                        self.guard(nodes[i + 1 + k], &m)?;
                        out.push(m);
                    }
                    i = j;
                }
            }
        }
        Ok(out)
    }

    fn guard(&self, x: f64, m: &DMatrix<f64>) -> Result<()> {
        let magnitude = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if !(magnitude <= self.options.overflow_guard) {
            return Err(Error::IntegrationOverflow { x, magnitude });
        }
        Ok(())
    }

    /// Adaptive DOPRI5 over `[x0, x1]` inside one segment, returning the
    /// state at each requested output point (ascending, within the span).
    fn dopri_segment(&self, segment: &Segment, x0: f64, x1: f64, y0: &[f64], outputs: &[f64]) -> Result<Vec<Vec<f64>>> {
        let ode = self.ode;
        let rhs = |x: f64, y: &[f64], dy: &mut [f64]| ode.apply(ode.kinetic(segment, x), y, dy);
        let span = x1 - x0;
        let bound = ode.segment_bound(segment).max(1.0 / span);
        let mut stepper = Dopri5::new(y0.len(), self.options.rtol, self.options.atol);
        let mut h = (0.2 / bound).min(span);
        let mut x = x0;
        let mut y = y0.to_vec();
        let mut results = Vec::with_capacity(outputs.len());
        let mut next_out = 0;
        let mut steps = 0;
        stepper.prime(&rhs, x, &y);
        while x < x1 {
            if steps >= self.options.max_steps {
                return Err(Error::StepFailure { x, step: h });
            }
            steps += 1;
            let last = x + h >= x1 - 1e-14 * span.abs();
            let h_try = if last { x1 - x } else { h };
            let (y_new, err) = stepper.attempt(&rhs, x, &y, h_try);
            if !err.is_finite() {
                return Err(Error::StepFailure { x, step: h_try });
            }
            if err <= 1.0 {
                let x_new = if last { x1 } else { x + h_try };
                while next_out < outputs.len() && outputs[next_out] <= x_new {
                    let theta = (outputs[next_out] - x) / h_try;
                    results.push(if outputs[next_out] == x_new {
                        y_new.clone()
                    } else {
                        stepper.dense(theta, &y, &y_new, h_try)
                    });
                    next_out += 1;
                }
                stepper.accept();
                x = x_new;
                y = y_new;
            }
            let factor = (0.9 * libm::pow(err.max(1e-10), -0.2)).clamp(0.2, 5.0);
            h = h_try * if err <= 1.0 { factor } else { factor.min(1.0) };
            if h < 1e-14 * span.abs().max(1.0) {
                return Err(Error::StepFailure { x, step: h });
            }
        }
        while results.len() < outputs.len() {
            results.push(y.clone());
        }
        Ok(results)
    }
}

// Dormand–Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const DP_D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Stage storage for the first-same-as-last DOPRI5 pair.
#[derive(Debug, Clone)]
struct Dopri5 {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    rtol: f64,
    atol: f64,
}

impl Dopri5 {
    fn new(n: usize, rtol: f64, atol: f64) -> Self {
        Self {
            k: core::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            rtol,
            atol,
        }
    }

    fn prime<F: Fn(f64, &[f64], &mut [f64])>(&mut self, f: &F, x: f64, y: &[f64]) {
        f(x, y, &mut self.k[0]);
    }

    /// Attempts a step; returns the 5th-order solution and the scaled error norm.
    fn attempt<F: Fn(f64, &[f64], &mut [f64])>(&mut self, f: &F, x: f64, y: &[f64], h: f64) -> (Vec<f64>, f64) {
        let n = y.len();
        for s in 1..7 {
            let (done, rest) = self.k.split_at_mut(s);
            for i in 0..n {
                let acc: f64 = DP_A[s - 1].iter().zip(done.iter()).map(|(a, k)| a * k[i]).sum();
                self.tmp[i] = y[i] + h * acc;
            }
            f(x + DP_C[s] * h, &self.tmp, &mut rest[0]);
        }
        // The last stage is evaluated at the 5th-order solution (FSAL).
        let y_new = self.tmp.clone();
        let mut err = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, ej) in DP_E.iter().enumerate() {
                e += ej * self.k[j][i];
            }
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            let r = h * e / sc;
            err += r * r;
        }
        (y_new, libm::sqrt(err / n as f64))
    }

    fn accept(&mut self) {
        self.k.swap(0, 6);
    }

    fn dense(&self, theta: f64, y_old: &[f64], y_new: &[f64], h: f64) -> Vec<f64> {
        let t1 = 1.0 - theta;
        (0..y_old.len())
            .map(|i| {
                let c1 = y_new[i] - y_old[i];
                let c2 = h * self.k[0][i] - c1;
                let c3 = c1 - h * self.k[6][i] - c2;
                let mut d = 0.0;
                for (j, dj) in DP_D.iter().enumerate() {
                    d += dj * self.k[j][i];
                }
                let c4 = h * d;
                y_old[i] + theta * (c1 + t1 * (c2 + theta * (c3 + t1 * c4)))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_ode(k: f64) -> LinearOde {
        // -Ψ'' = k² Ψ
        LinearOde::new(vec![-1.0], k * k)
    }

    fn zero(length: f64) -> PiecewisePotential {
        PiecewisePotential::constant(length, 0.0).unwrap()
    }

    #[test]
    fn tableau_is_order_eight() {
        let t = GaussTableau::new();
        // Simplifying conditions B(8) on the weights and C(4) on the rows.
        for q in 1..=8 {
            let s: f64 = (0..4).map(|i| t.b[i] * libm::pow(t.c[i], (q - 1) as f64)).sum();
            assert!((s - 1.0 / q as f64).abs() < 1e-14, "B({q})");
        }
        for i in 0..4 {
            for q in 1..=4 {
                let s: f64 = (0..4).map(|j| t.a[i][j] * libm::pow(t.c[j], (q - 1) as f64)).sum();
                assert!((s - libm::pow(t.c[i], q as f64) / q as f64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn grid_hits_breakpoints() {
        let v = PiecewisePotential::steps(&[(1.0, 0.0), (1.3, 0.2), (4.0, 0.0)]).unwrap();
        let g = Grid::new(&v, &GridSpec::default()).unwrap();
        for b in v.breakpoints() {
            assert!(g.nodes().contains(&b));
        }
        // 8 + 4 (minimum) + 22
        assert_eq!(g.intervals(), 8 + 4 + 22);
        assert_eq!(g.interval_segment(9), 1);
    }

    #[test]
    fn mirrored_grid_aligns() {
        let v = PiecewisePotential::steps(&[(1.0, 0.0), (1.3, 0.2), (4.0, 0.0)]).unwrap();
        let g = Grid::new(&v, &GridSpec::default()).unwrap();
        let m = g.mirrored(&v).unwrap();
        assert_eq!(m.len(), g.len());
        assert!(m.nodes().contains(&2.7));
    }

    fn check_free_fundamental(method: Method, tol: f64) {
        let k = 1.0;
        let ode = free_ode(k);
        let v = zero(20.0);
        let grid = Grid::new(&v, &GridSpec::default()).unwrap();
        let opts = IntegratorOptions {
            method,
            ..Default::default()
        };
        let phi = Integrator::new(&ode, &v, opts).fundamental_matrices(&grid).unwrap();
        for (x, m) in grid.nodes().iter().zip(&phi) {
            let (s, c) = (libm::sin(k * x), libm::cos(k * x));
            assert!((m[(0, 0)] - c).abs() < tol, "x = {x}");
            assert!((m[(1, 0)] + k * s).abs() < tol);
            assert!((m[(0, 1)] - s / k).abs() < tol);
            assert!((m[(1, 1)] - c).abs() < tol);
        }
    }

    #[test]
    fn free_particle_collocation() {
        check_free_fundamental(Method::GaussCollocation, 1e-12);
    }

    #[test]
    fn free_particle_dopri() {
        check_free_fundamental(Method::Dopri5, 1e-9);
    }

    #[test]
    fn quartic_matches_closed_form() {
        // Ψ'''' = -5Ψ'' - 4Ψ has exponents ±i, ±2i; φ_0 = (4cos x - cos 2x)/3.
        let ode = LinearOde::new(vec![5.0, 1.0], -4.0);
        let v = zero(10.0);
        let grid = Grid::new(&v, &GridSpec::default()).unwrap();
        for method in [Method::GaussCollocation, Method::Dopri5] {
            let opts = IntegratorOptions {
                method,
                ..Default::default()
            };
            let phi = Integrator::new(&ode, &v, opts).fundamental_matrices(&grid).unwrap();
            for (x, m) in grid.nodes().iter().zip(&phi) {
                let exact = (4.0 * libm::cos(*x) - libm::cos(2.0 * x)) / 3.0;
                assert!((m[(0, 0)] - exact).abs() < 1e-8, "{method:?} x = {x}");
            }
        }
    }

    #[test]
    fn affine_segment_against_dopri() {
        // Collocation and DOPRI5 agree on a ramp, and propagator products match.
        let v = PiecewisePotential::new(vec![Segment::affine(0.0, 6.0, 0.0, 0.3)]).unwrap();
        let ode = LinearOde::new(vec![-0.5686, -0.0782], 0.2);
        let grid = Grid::new(&v, &GridSpec::default()).unwrap();
        let a = Integrator::new(&ode, &v, IntegratorOptions::default())
            .fundamental_matrices(&grid)
            .unwrap();
        let opts = IntegratorOptions {
            method: Method::Dopri5,
            rtol: 1e-12,
            atol: 1e-12,
            ..Default::default()
        };
        let b = Integrator::new(&ode, &v, opts).fundamental_matrices(&grid).unwrap();
        let scale = a.last().unwrap().amax();
        assert!((a.last().unwrap() - b.last().unwrap()).amax() < 1e-8 * scale);
        let props = Integrator::new(&ode, &v, opts).interval_propagators(&grid).unwrap();
        let mut prod = DMatrix::<f64>::identity(4, 4);
        for p in &props {
            prod = p * prod;
        }
        assert!((&prod - b.last().unwrap()).amax() < 1e-8 * scale);
    }

    #[test]
    fn overflow_guard_trips() {
        // Ψ'' = 25 Ψ grows like e^{5x}.
        let ode = LinearOde::new(vec![1.0], 25.0);
        let v = zero(10.0);
        let grid = Grid::new(&v, &GridSpec::default()).unwrap();
        let r = Integrator::new(&ode, &v, IntegratorOptions::default()).fundamental_matrices(&grid);
        assert!(matches!(r, Err(Error::IntegrationOverflow { .. })));
    }

    #[test]
    fn exponent_bound_covers_roots() {
        let ode = LinearOde::new(vec![5.0, 1.0], -4.0);
        assert!(ode.exponent_bound(-4.0) >= 2.0);
    }
}
