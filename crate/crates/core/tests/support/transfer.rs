//! Transfer-matrix reference for the parabolic equation on piecewise-constant
//! potentials, written independently of the solver.

use kanewave_core::Complex64;

/// Piecewise-constant device given as `(width, V)` slabs with `V` in volts.
#[derive(Debug, Clone)]
pub struct Slabs {
    pub slabs: Vec<(f64, f64)>,
}

impl Slabs {
    /// `(end, value)` pairs for `PiecewisePotential::steps`.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let mut x = 0.0;
        self.slabs
            .iter()
            .map(|&(w, v)| {
                x += w;
                (x, v)
            })
            .collect()
    }

    fn reversed(&self) -> Self {
        Self {
            slabs: self.slabs.iter().rev().copied().collect(),
        }
    }
}

fn wave_number(kinetic: f64, beta: f64) -> Complex64 {
    Complex64::new(kinetic / beta, 0.0).sqrt()
}

/// `(|T|², |R|²)` for a wave of lead wave vector `k` (sign: side of injection)
/// with the leads held at the first and last slab values; `beta` is
/// `ħ²/(2m*)` in eV·nm².
pub fn transfer_probabilities(device: &Slabs, k: f64, beta: f64) -> (f64, f64) {
    let device = if k > 0.0 { device.clone() } else { device.reversed() };
    let k = k.abs();
    let v_in = device.slabs[0].1;
    let v_out = device.slabs[device.slabs.len() - 1].1;
    let energy = beta * k * k - v_in;

    // Walk from the exit lead, where only the outgoing wave (A, B) = (1, 0) exists.
    let k_out = wave_number(energy + v_out, beta);
    let (mut psi, mut dpsi) = (Complex64::new(1.0, 0.0), Complex64::i() * k_out);
    for &(w, v) in device.slabs.iter().rev() {
        let q = wave_number(energy + v, beta);
        let iq = Complex64::i() * q;
        // Local amplitudes at the right edge, carried back across the slab.
        let a = 0.5 * (psi + dpsi / iq) * (-iq * w).exp();
        let b = 0.5 * (psi - dpsi / iq) * (iq * w).exp();
        psi = a + b;
        dpsi = iq * (a - b);
    }
    let ik = Complex64::i() * k;
    let a0 = 0.5 * (psi + dpsi / ik);
    let b0 = 0.5 * (psi - dpsi / ik);
    let r2 = (b0 / a0).norm_sqr();
    let t2 = if k_out.im.abs() < 1e-14 * k_out.norm() {
        k_out.re / k / a0.norm_sqr()
    } else {
        0.0
    };
    (t2, r2)
}
