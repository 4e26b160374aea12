use kanewave_core::dispersion::{BranchConvention, DispersionModel, ModeKind, PhysicalParams, Side};
use kanewave_core::observables::current_profile;
use kanewave_core::potential::{PiecewisePotential, RtdParams};
use kanewave_core::scattering::{build_problem, solve_scattering, SolverOptions};
use kanewave_core::Error;
use proptest::prelude::*;

fn model(order: usize) -> DispersionModel {
    DispersionModel::new(order, PhysicalParams::gaas()).unwrap()
}

fn rtd_params() -> impl Strategy<Value = RtdParams> {
    (prop::collection::vec(1.0f64..20.0, 7), -0.5f64..0.5, -0.5f64..0.5).prop_map(|(gaps, v_l, v_b)| {
        let mut a = [0.0; 6];
        let mut x = 0.0;
        for (ai, g) in a.iter_mut().zip(&gaps) {
            x += g;
            *ai = x;
        }
        RtdParams {
            a,
            length: x + gaps[6],
            v_l,
            v_b,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potential_is_affine_inside_segments(p in rtd_params()) {
        let v = PiecewisePotential::rtd(&p).unwrap();
        for s in v.segments() {
            let mid = 0.5 * (s.start + s.end);
            let quarter = s.start + 0.25 * s.width();
            let lhs = v.eval(mid).unwrap() - v.eval(quarter).unwrap();
            let rhs = 0.25 * s.width() * s.slope;
            prop_assert!((lhs - rhs).abs() < 1e-13);
            prop_assert!((s.value(mid) - 0.5 * (s.v0 + s.value(s.end))).abs() < 1e-14);
        }
    }

    #[test]
    fn roots_satisfy_the_dispersion(s in 1usize..6, e in -1.5f64..2.5) {
        let m = DispersionModel::with_order_half(s, PhysicalParams::gaas()).unwrap();
        let set = match m.solve_wave_vectors(e, Side::Left) {
            Ok(set) => set,
            Err(Error::DegenerateModes { .. }) | Err(Error::NoBoundedBranch { .. }) => return Ok(()),
            Err(other) => panic!("{other:?}"),
        };
        prop_assert_eq!(set.len(), s);
        for mode in set.modes() {
            prop_assert!(m.dispersion_residual(mode.wave_vector, e) <= 1e-10);
            match mode.kind {
                ModeKind::Propagating => prop_assert!(mode.wave_vector.re > 0.0 && mode.wave_vector.im == 0.0),
                ModeKind::Evanescent => prop_assert!(mode.wave_vector.im > 0.0),
            }
        }
    }

    #[test]
    fn quartic_sum_rule(k in 0.01f64..1.9) {
        let m = model(4);
        let e = m.truncated_energy(k);
        let set = m.solve_wave_vectors(e, Side::Right).unwrap();
        prop_assume!(set.all_propagating());
        let sum: f64 = set.modes().iter().map(|md| md.wave_vector.re.powi(2)).sum();
        let target = 1.0 / (m.params().alpha * m.kinetic_scale());
        prop_assert!((sum - target).abs() <= 1e-12 * target);
    }

    #[test]
    fn rtd_currents_are_conserved(order in prop::sample::select(vec![2usize, 4, 6]), k in -1.5f64..1.5) {
        prop_assume!(k.abs() > 0.02);
        let v = PiecewisePotential::rtd(&RtdParams::reference()).unwrap();
        let p = match build_problem(model(order), v, k) {
            Ok(p) => p,
            Err(Error::DegenerateModes { .. }) => return Ok(()),
            Err(other) => panic!("{other:?}"),
        };
        let prof = current_profile(&solve_scattering(&p, &SolverOptions::default()).unwrap()).unwrap();
        prop_assert!(prof.flux_residual < 1e-8, "residual {}", prof.flux_residual);
        prop_assert!(prof.boundary.balance().abs() < 1e-8 * prof.boundary.incident.abs());
    }

    #[test]
    fn outgoing_modes_give_unitarity(order in prop::sample::select(vec![2usize, 4]), k in -1.85f64..1.85) {
        prop_assume!(k.abs() > 0.02);
        let m = model(order).with_branch(BranchConvention::GroupVelocity);
        let v = PiecewisePotential::rtd(&RtdParams::reference()).unwrap();
        let p = build_problem(m, v, k).unwrap();
        let prof = current_profile(&solve_scattering(&p, &SolverOptions::default()).unwrap()).unwrap();
        prop_assert!((prof.r2 + prof.t2 - 1.0).abs() < 1e-9, "R2 {} T2 {}", prof.r2, prof.t2);
    }
}

#[test]
fn descending_branch_mode_enters_the_device_under_positive_convention() {
    // V ≡ 0: the second root sits beyond the band maximum where dε/dk < 0.
    let v = PiecewisePotential::constant(20.0, 0.0).unwrap();
    let p = build_problem(model(4), v.clone(), 0.8).unwrap();
    let k2 = p.exit_modes().modes()[1].wave_vector.re;
    assert!(p.model().energy_slope(k2) < 0.0);
    let sol = solve_scattering(&p, &SolverOptions::default()).unwrap();
    for t in sol.transmission().iter().skip(1) {
        assert!(t.norm() < 1e-10);
    }

    let gv = model(4).with_branch(BranchConvention::GroupVelocity);
    let p = build_problem(gv, v, 0.8).unwrap();
    assert!(p.exit_modes().modes()[1].wave_vector.re < 0.0);
}
