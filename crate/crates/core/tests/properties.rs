use proptest::prelude::*;

use complete_minimal::config::parse_config;
use complete_minimal::domain::{sample_grid, Cycle, Region};
use complete_minimal::export::{export_mesh, fmt_sig};
use complete_minimal::form::HoloForm;
use complete_minimal::labyrinth::lopez_ros_deform;
use complete_minimal::laurent::Laurent;
use complete_minimal::metric::graph_from_lambda;
use complete_minimal::weierstrass::{flux, from_gauss_pair, integrate_immersion, isotropy_residual, GaussPair};
use complete_minimal::Complex64;

fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn exponent() -> impl Strategy<Value = Laurent> {
    prop::collection::vec(coeff(), 1..5).prop_map(|cs| Laurent::new(0, cs))
}

fn annulus_exponent() -> impl Strategy<Value = Laurent> {
    prop::collection::vec(coeff(), 1..5).prop_map(|cs| Laurent::new(-2, cs.into_iter().map(|c| c * 0.3).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauss_pairs_are_isotropic_on_disks(u in exponent(), a in coeff()) {
        let region = Region::disk(1.0).unwrap();
        let phi3 = HoloForm::from_laurent(Laurent::new(0, vec![Complex64::new(2.0, 0.0) + a, Complex64::new(0.5, 0.0)]));
        let t = from_gauss_pair(&GaussPair::exponential(u, phi3), region).unwrap();
        let grid = sample_grid(&region, 8, 32).unwrap();
        prop_assert!(isotropy_residual(&t, &grid) < 1e-12);
    }

    #[test]
    fn gauss_pairs_are_isotropic_on_annuli(u in annulus_exponent()) {
        let region = Region::annulus(0.5, 2.0).unwrap();
        let pair = GaussPair {
            exponent: u,
            ..GaussPair::rational(Laurent::monomial(1, Complex64::new(1.0, 0.0)), Laurent::constant(Complex64::new(1.0, 0.0)), HoloForm::dz_over_z())
        };
        let t = from_gauss_pair(&pair, region).unwrap();
        let grid = sample_grid(&region, 8, 32).unwrap();
        prop_assert!(isotropy_residual(&t, &grid) < 1e-12);
    }

    #[test]
    fn deformations_are_isotropic(m in 0.01..1000.0f64) {
        let region = Region::annulus(0.25, 1.0).unwrap();
        let t = lopez_ros_deform(&HoloForm::dz_over_z(), region, m).unwrap();
        prop_assert!(isotropy_residual(&t, &sample_grid(&region, 4, 16).unwrap()) < 1e-12);
    }

    #[test]
    fn flux_is_linear_in_the_turn_count(u in annulus_exponent(), turns in 1i32..4) {
        let region = Region::annulus(0.5, 2.0).unwrap();
        let pair = GaussPair {
            exponent: u,
            ..GaussPair::rational(Laurent::monomial(1, Complex64::new(1.0, 0.0)), Laurent::constant(Complex64::new(1.0, 0.0)), HoloForm::dz_over_z())
        };
        let t = from_gauss_pair(&pair, region).unwrap();
        let one = flux(&t, &Cycle::circle(Complex64::new(0.0, 0.0), 1.0, 512, 1));
        let many = flux(&t, &Cycle::circle(Complex64::new(0.0, 0.0), 1.0, 512, turns));
        for j in 0..3 {
            prop_assert!((many[j] - turns as f64 * one[j]).abs() < 1e-9 * (1.0 + one[j].abs()));
        }
    }

    #[test]
    fn graph_distances_satisfy_the_triangle_inequality(
        lam in prop::collection::vec(0.1..5.0f64, 6 * 16),
        a in 0usize..96, b in 0usize..96, c in 0usize..96,
    ) {
        let grid = sample_grid(&Region::annulus(0.5, 1.5).unwrap(), 6, 16).unwrap();
        let g = graph_from_lambda(&grid, &lam);
        let da = g.distances_from(&[a]);
        let db = g.distances_from(&[b]);
        prop_assert!((da[b] - db[a]).abs() < 1e-12);
        prop_assert!(da[c] <= da[b] + db[c] + 1e-12);
        prop_assert_eq!(da[a], 0.0);
    }

    #[test]
    fn larger_metrics_give_larger_distances(
        lam in prop::collection::vec(0.1..5.0f64, 6 * 16),
        bump in prop::collection::vec(0.0..2.0f64, 6 * 16),
        src in 0usize..96,
    ) {
        let grid = sample_grid(&Region::annulus(0.5, 1.5).unwrap(), 6, 16).unwrap();
        let big: Vec<f64> = lam.iter().zip(&bump).map(|(l, b)| l + b).collect();
        let d = graph_from_lambda(&grid, &lam).distances_from(&[src]);
        let e = graph_from_lambda(&grid, &big).distances_from(&[src]);
        for (x, y) in d.iter().zip(&e) {
            prop_assert!(y + 1e-12 >= *x);
        }
    }

    #[test]
    fn solver_settings_round_trip(
        degree in 1usize..=256, eps in 0.001..1.0f64, stages in 1usize..=6,
        nr in 2usize..200, na in 8usize..1000, dir in "[a-z]{1,8}",
    ) {
        let text = format!(
            r#"{{"spec_version": 1, "domain": {{"tower": "disk-tower", "stages": {stages}}}, "prescription": {{"h": "re-z"}},
                "solver": {{"degree": {degree}, "epsilon": {eps}}}, "grid": {{"u": [{nr}, {na}]}}, "output": {{"dir": "{dir}"}}}}"#
        );
        let cfg = parse_config(&text).unwrap();
        prop_assert_eq!(cfg.solver.degree, degree);
        prop_assert_eq!(cfg.solver.epsilon, eps);
        prop_assert_eq!(&cfg.output.dir, &dir);
        prop_assert_eq!(parse_config(&cfg.to_json().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn significant_digits_are_kept(x in -1e12..1e12f64) {
        let back: f64 = fmt_sig(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-9 * x.abs());
    }

    #[test]
    fn mesh_export_is_deterministic(u in exponent(), nr in 2usize..6, na in 8usize..20) {
        let region = Region::disk(1.0).unwrap();
        let t = from_gauss_pair(&GaussPair::exponential(u, HoloForm::dz()), region).unwrap();
        let grid = sample_grid(&region, nr, na).unwrap();
        let x = integrate_immersion(&t, Complex64::new(0.0, 0.0), &grid, None).unwrap();
        let first = export_mesh(&x).unwrap();
        prop_assert_eq!(&first, &export_mesh(&x).unwrap());
        // a disk grid has a single center node
        prop_assert_eq!(first.lines().filter(|l| l.starts_with("v ")).count(), 1 + (nr - 1) * na);
        prop_assert_eq!(first.lines().filter(|l| l.starts_with("f ")).count(), na * (nr - 1));
    }

    #[test]
    fn annulus_mesh_face_count(nr in 2usize..8, na in 8usize..32) {
        let region = Region::annulus(0.5, 1.0).unwrap();
        let t = lopez_ros_deform(&HoloForm::dz(), region, 2.0).unwrap();
        let grid = sample_grid(&region, nr, na).unwrap();
        let x = integrate_immersion(&t, Complex64::new(0.5, 0.0), &grid, None).unwrap();
        let mesh = export_mesh(&x).unwrap();
        prop_assert_eq!(mesh.lines().filter(|l| l.starts_with("f ")).count(), na * (nr - 1));
    }
}
