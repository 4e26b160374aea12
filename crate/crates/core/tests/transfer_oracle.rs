mod support;

use kanewave_core::dispersion::{DispersionModel, PhysicalParams};
use kanewave_core::observables::current_profile;
use kanewave_core::potential::PiecewisePotential;
use kanewave_core::scattering::{build_problem, solve_scattering, SolveMethod, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::transfer::{transfer_probabilities, Slabs};

/// 1–3 barriers of height ≤ 0.4 eV and width 2–10 nm between flat leads.
fn random_device(rng: &mut ChaCha8Rng) -> Slabs {
    let mut slabs = vec![(rng.gen_range(1.0..5.0), 0.0)];
    for _ in 0..rng.gen_range(1..=3) {
        slabs.push((rng.gen_range(2.0..10.0), -rng.gen_range(0.05..0.4)));
        slabs.push((rng.gen_range(1.0..8.0), 0.0));
    }
    Slabs { slabs }
}

#[test]
fn parabolic_solver_matches_transfer_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let model = DispersionModel::new(2, PhysicalParams::gaas()).unwrap();
    let beta = model.kinetic_scale();
    for method in [SolveMethod::Shooting, SolveMethod::Orthonormal] {
        let opts = SolverOptions {
            method,
            ..SolverOptions::default()
        };
        for _ in 0..10 {
            let device = random_device(&mut rng);
            let v = PiecewisePotential::steps(&device.steps()).unwrap();
            for _ in 0..8 {
                let k = rng.gen_range(0.05..1.2) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let (t2, r2) = transfer_probabilities(&device, k, beta);
                let p = build_problem(model.clone(), v.clone(), k).unwrap();
                let prof = current_profile(&solve_scattering(&p, &opts).unwrap()).unwrap();
                assert!((prof.t2 - t2).abs() < 1e-8, "{method:?} k={k}: T2 {} vs {t2}", prof.t2);
                assert!((prof.r2 - r2).abs() < 1e-8, "{method:?} k={k}: R2 {} vs {r2}", prof.r2);
            }
        }
    }
}

#[test]
fn biased_step_matches_transfer_matrices() {
    let model = DispersionModel::new(2, PhysicalParams::gaas()).unwrap();
    let device = Slabs {
        slabs: vec![(4.0, 0.0), (5.0, -0.2), (6.0, 0.1)],
    };
    let v = PiecewisePotential::steps(&device.steps()).unwrap();
    for &k in &[0.1, 0.5, 0.9, -0.2, -0.45, -0.7, -1.0] {
        let (t2, r2) = transfer_probabilities(&device, k, model.kinetic_scale());
        let p = build_problem(model.clone(), v.clone(), k).unwrap();
        let prof = current_profile(&solve_scattering(&p, &SolverOptions::default()).unwrap()).unwrap();
        assert!((prof.t2 - t2).abs() < 1e-8, "k={k}: {} vs {t2}", prof.t2);
        assert!((prof.r2 - r2).abs() < 1e-8, "k={k}: {} vs {r2}", prof.r2);
    }
}
