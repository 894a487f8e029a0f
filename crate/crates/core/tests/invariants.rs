use proptest::prelude::*;

use ghostbound::commutator::{coefficient_triple, poisson_bracket_ch};
use ghostbound::fock::{build_hamiltonian, diagonalize, FockBasis};
use ghostbound::grid::{init_gaussian, measure_moments, read_checkpoint, write_checkpoint, Propagator, StencilOrder, WidthConvention};
use ghostbound::model::classical_observables;
use ghostbound::{Coupling, GridSpec, PhasePoint};

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn coefficients_vanish(x in -10.0..10.0f64, y in -10.0..10.0f64, lam in -1.0..1.0f64) {
        let c = Coupling::new(lam).unwrap();
        prop_assert!(coefficient_triple(x, y, c).max_abs() <= 1e-10 * lam.abs().max(1e-3));
    }

    #[test]
    fn bracket_vanishes(x in -4.0..4.0f64, px in -4.0..4.0f64, y in -4.0..4.0f64, py in -4.0..4.0f64,
                        lam in -1.0..1.0f64) {
        let p = PhasePoint::new(x, px, y, py);
        prop_assert!(poisson_bracket_ch(&p, Coupling::new(lam).unwrap()).abs() < 1e-10);
    }

    // Pointwise version of the moment bound: E - Sigma never exceeds |lambda|.
    #[test]
    fn e_sigma_gap_bounded(x in -20.0..20.0f64, px in -5.0..5.0f64, y in -20.0..20.0f64, py in -5.0..5.0f64,
                           lam in -2.0..2.0f64) {
        let obs = classical_observables(&PhasePoint::new(x, px, y, py), Coupling::new(lam).unwrap());
        prop_assert!((obs.e - obs.sigma).abs() <= lam.abs() * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(8) })]

    #[test]
    fn propagation_is_unitary(cx in -1.5..1.5f64, cy in -1.5..1.5f64, lam in -0.9..0.9f64,
                              dt in 1e-3..2e-2f64, order in 0usize..3) {
        let grid = GridSpec::new(6.0, 48).unwrap();
        let mut psi = init_gaussian(&grid, (cx, cy), 0.8, WidthConvention::Amplitude).unwrap();
        let order = [StencilOrder::Second, StencilOrder::Fourth, StencilOrder::Sixth][order];
        let prop = Propagator::new(grid, dt, Coupling::new(lam).unwrap(), order).unwrap();
        let n0 = psi.norm_sqr();
        prop.advance(&mut psi, 20);
        prop_assert!((psi.norm_sqr() - n0).abs() < 1e-12);
    }

    #[test]
    fn checkpoint_round_trips(n in 16usize..40, l in 2.0..12.0f64, cx in -0.5..0.5f64) {
        let grid = GridSpec::new(l, n).unwrap();
        let width = 4.0 * grid.spacing();
        let psi = init_gaussian(&grid, (cx, 0.0), width, WidthConvention::Amplitude).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&psi, &mut bytes).unwrap();
        prop_assert_eq!(bytes.len(), 24 + 16 * n * n);
        let back = read_checkpoint::<f64, _>(bytes.as_slice()).unwrap();
        prop_assert_eq!(back.amplitudes, psi.amplitudes);
        prop_assert_eq!(back.grid.half_extent(), l);
    }

    #[test]
    fn moments_are_physical(cx in -1.0..1.0f64, cy in -1.0..1.0f64, lam in -1.0..1.0f64) {
        let grid = GridSpec::new(7.0, 64).unwrap();
        let psi = init_gaussian(&grid, (cx, cy), 0.9, WidthConvention::Density).unwrap();
        let rec = measure_moments(&psi, Coupling::new(lam).unwrap(), StencilOrder::default());
        prop_assert!(rec.x2 > 0.0 && rec.y2 > 0.0 && rec.px2 > 0.0 && rec.py2 > 0.0 && rec.k2 >= 0.0);
        prop_assert!((rec.norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fock_spectrum_preserves_trace(lam in -1.0..1.0f64) {
        let basis = FockBasis::new(8);
        let h = build_hamiltonian(&basis, Coupling::new(lam).unwrap(), 48).unwrap();
        let spec = diagonalize(&h).unwrap();
        prop_assert_eq!(spec.len(), 81);
        let trace: f64 = h.entries().diag().sum();
        let sum: f64 = spec.eigenvalues.iter().sum();
        prop_assert!((trace - sum).abs() < 1e-10);
    }
}
