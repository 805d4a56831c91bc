//! Structural properties of the generators and the thermodynamic
//! functionals over randomized parameters.

use num_complex::Complex64;
use proptest::prelude::*;

use polariton_core::linalg::{self, CMat};
use polariton_core::model::{self, Branch};
use polariton_core::{liouville, thermo, GeneratorSet, PolaritonSpec, SuperOp};

const M_O: usize = 4;

fn spec_strategy() -> impl Strategy<Value = PolaritonSpec> {
    (0.5f64..3.0, 0.0f64..2e-3, 0.0f64..0.1, 0.0f64..0.1, 0.05f64..0.5, 0.05f64..0.5, 0.8f64..1.2).prop_map(
        |(v, chi, a_x, a_p, gx, gp, wd)| PolaritonSpec {
            coupling: Complex64::new(v, 0.0),
            chi,
            a_x,
            a_p,
            gamma_x: gx,
            gamma_p: gp,
            omega_drive: wd,
            m_o: M_O,
            ..PolaritonSpec::default()
        },
    )
}

/// Full-rank density matrix from raw entries: (G G† + δ)/Tr.
fn state_strategy(n: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |raw| {
        let g = CMat::from_fn(n, n, |i, j| Complex64::new(raw[2 * (i * n + j)], raw[2 * (i * n + j) + 1]));
        let mut rho = &g * g.adjoint() + CMat::identity(n, n) * Complex64::new(0.05, 0.0);
        let tr = linalg::trace(&rho);
        rho /= tr;
        rho
    })
}

fn close(a: &SuperOp, b: &SuperOp, tol: f64) -> bool {
    linalg::max_abs(&(&a.matrix - &b.matrix)) <= tol * (1.0 + a.max_abs())
}

fn generator_ops(gen: &GeneratorSet) -> [&SuperOp; 7] {
    [&gen.free, &gen.relax_x, &gen.relax_p, &gen.drive_x.plus, &gen.drive_x.minus, &gen.drive_p.plus, &gen.drive_p.minus]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn every_generator_preserves_trace(spec in spec_strategy()) {
        let gen = liouville::assemble(&spec).unwrap();
        for op in generator_ops(&gen) {
            prop_assert!(op.trace_defect() < 1e-10);
        }
    }

    #[test]
    fn hermiticity_is_preserved(spec in spec_strategy(), rho in state_strategy(2 * M_O)) {
        let gen = liouville::assemble(&spec).unwrap();
        // time-independent parts map Hermitian to Hermitian
        for op in [&gen.free, &gen.relax_x, &gen.relax_p, &gen.a_o] {
            prop_assert!(close(&op.hermitian_partner(), op, 1e-10));
        }
        // the pair is swapped by conjugation, so f₊A₊ + f₋A₋ stays Hermitian
        prop_assert!(close(&gen.drive_x.plus.hermitian_partner(), &gen.drive_x.minus, 1e-10));
        prop_assert!(close(&gen.a_plus.hermitian_partner(), &gen.a_minus, 1e-10));
        for t in [0.0, 0.9, 3.7] {
            let image = gen.at(t).apply(&rho);
            prop_assert!(linalg::hermiticity_defect(&image) < 1e-9 * (1.0 + linalg::max_abs(&image)));
        }
    }

    #[test]
    fn driving_generators_scale_quadratically(spec in spec_strategy(), k in 0.2f64..3.0) {
        prop_assume!(spec.a_x > 1e-3);
        let gen = liouville::assemble(&spec).unwrap();
        let scaled = liouville::assemble(&PolaritonSpec { a_x: k * spec.a_x, ..spec.clone() }).unwrap();
        let want = gen.drive_x.plus.scale(Complex64::new(k * k, 0.0));
        prop_assert!(close(&scaled.drive_x.plus, &want, 1e-9));
    }

    #[test]
    fn relaxation_is_unaffected_by_drive(spec in spec_strategy()) {
        let driven = liouville::assemble(&spec).unwrap();
        let idle = liouville::assemble(&PolaritonSpec { a_x: 0.0, a_p: 0.0, ..spec }).unwrap();
        prop_assert!(close(&driven.relax_x, &idle.relax_x, 1e-12));
        prop_assert!(idle.drive_x.plus.is_zero() && idle.a_minus.is_zero());
    }

    #[test]
    fn spohn_inequality(spec in spec_strategy(), rho in state_strategy(2 * M_O)) {
        let gen = liouville::assemble(&spec).unwrap();
        let q = thermo::irreversible_heat_rate(&gen, &rho, spec.t_env).unwrap();
        prop_assert!(q.rate >= -1e-10, "rate {}", q.rate);
        prop_assert!(q.mismatch() <= 1e-8 * (1.0 + q.rate.abs()), "mismatch {}", q.mismatch());
    }

    #[test]
    fn entropy_rates_sum_to_entropy_derivative(spec in spec_strategy(), rho in state_strategy(2 * M_O), t in 0.0f64..6.0) {
        let gen = liouville::assemble(&spec).unwrap();
        let rates = thermo::entropy_rates(&gen, &rho, t).unwrap();
        // dρ/dt = −L(t)ρ, central difference of S along that direction
        let flow = gen.at(t).apply(&rho) * Complex64::new(-1.0, 0.0);
        let h = 1e-5;
        let s = |x: f64| thermo::entropy(&(&rho + &flow * Complex64::new(x, 0.0))).unwrap();
        let fd = (s(h) - s(-h)) / (2.0 * h);
        prop_assert!((fd - rates.total()).abs() < 1e-6 * (1.0 + fd.abs()), "fd {fd} vs {}", rates.total());
    }

    #[test]
    fn doublets_match_closed_form(spec in spec_strategy()) {
        let spectrum = model::diagonalize(&model::build_hamiltonian(&spec).unwrap()).unwrap();
        for (k, tag) in spectrum.branches.iter().enumerate() {
            if let Some((branch, m)) = tag {
                let (lo, hi) = model::analytic_eigenvalues(&spec, *m);
                let want = if *branch == Branch::Lower { lo } else { hi };
                prop_assert!((spectrum.energies[k] - want).abs() < 1e-10);
            }
        }
    }
}
