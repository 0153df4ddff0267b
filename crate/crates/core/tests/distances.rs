use complete_minimal::domain::{make_annulus, sample_grid, Region};
use complete_minimal::form::HoloForm;
use complete_minimal::labyrinth::{build_labyrinth, lopez_ros_deform, DeformParams};
use complete_minimal::metric::{crossing_grid, crossing_length, graph_from_lambda, intrinsic_distance, metric_graph};
use complete_minimal::weierstrass::{induced_metric, MetricField};
use complete_minimal::{Complex64, Error};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn constant_factor_scales_every_distance() {
    let g = sample_grid(&Region::disk(1.0).unwrap(), 24, 96).unwrap();
    let one = graph_from_lambda(&g, &vec![1.0; g.len()]).distances_from(&[0]);
    let three = graph_from_lambda(&g, &vec![3.0; g.len()]).distances_from(&[0]);
    for (a, b) in one.iter().zip(&three) {
        assert!((b - 3.0 * a).abs() <= 1e-14 * b.max(1.0));
    }
}

#[test]
fn flat_radial_distances_are_exact() {
    let d = sample_grid(&Region::disk(1.0).unwrap(), 128, 512).unwrap();
    let g = graph_from_lambda(&d, &vec![1.0; d.len()]);
    assert!((intrinsic_distance(&g, 0, &d.outer_boundary()).unwrap() - 1.0).abs() < 1e-12);
    let a = sample_grid(&Region::annulus(0.5, 2.0).unwrap(), 128, 512).unwrap();
    let g = graph_from_lambda(&a, &vec![1.0; a.len()]);
    let cross = g.set_distance(&a.inner_boundary(), &a.outer_boundary()).unwrap();
    assert!((cross - 1.5).abs() < 1e-12);
}

#[test]
fn catenoid_radial_distance_matches_quadrature() {
    let region = Region::annulus(1.0, 2.0).unwrap();
    let grid = sample_grid(&region, 128, 512).unwrap();
    // λ = |φ3|·(|g| + 1/|g|)/√2 with g = z, φ3 = dz/z
    let lam: Vec<f64> = grid.nodes().iter().map(|n| (1.0 + 1.0 / n.z.norm_sqr()) / 2f64.sqrt()).collect();
    let d = graph_from_lambda(&grid, &lam).set_distance(&grid.inner_boundary(), &grid.outer_boundary()).unwrap();
    let steps = 20_000;
    let h = 1.0 / steps as f64;
    let integral: f64 = (0..steps)
        .map(|k| {
            let r = 1.0 + (k as f64 + 0.5) * h;
            (1.0 + 1.0 / (r * r)) / 2f64.sqrt() * h
        })
        .sum();
    assert!((d - integral).abs() / integral < 0.05);
    assert!(d >= integral - 1e-9);
}

#[test]
fn generic_flat_chords_stay_within_the_eight_neighbour_bound() {
    // Off-axis chords carry the anisotropy of the 8-neighbour stencil, which
    // does not shrink with refinement; the graph length is always an upper
    // bound of the straight chord and within 1/cos(π/8) of it.
    let bound = 1.0 / (std::f64::consts::PI / 8.0).cos();
    for (nr, na) in [(64, 256), (128, 512)] {
        let d = sample_grid(&Region::disk(1.0).unwrap(), nr, na).unwrap();
        let g = graph_from_lambda(&d, &vec![1.0; d.len()]);
        for (p, q) in [(c(0.5, 0.0), c(0.0, 0.5)), (c(0.5, 0.0), c(-0.6, 0.3))] {
            let (i, j) = (d.nearest_node(p), d.nearest_node(q));
            let exact = (d.z(i) - d.z(j)).norm();
            let graph = intrinsic_distance(&g, i, &[j]).unwrap();
            assert!(graph >= exact - 1e-12);
            assert!(graph <= bound * exact, "{graph} vs {exact}");
        }
    }
}

#[test]
fn triangle_inequality_on_a_curved_metric() {
    let grid = sample_grid(&Region::annulus(0.5, 2.0).unwrap(), 24, 96).unwrap();
    let lam: Vec<f64> = grid.nodes().iter().map(|n| 1.0 + (3.0 * n.z.re).sin().powi(2)).collect();
    let g = graph_from_lambda(&grid, &lam);
    let picks = [0, 100, 700, 1500, grid.len() - 1];
    let rows: Vec<Vec<f64>> = picks.iter().map(|&p| g.distances_from(&[p])).collect();
    for (a, ra) in picks.iter().zip(&rows) {
        for (b, rb) in picks.iter().zip(&rows) {
            assert!((ra[*b] - rb[*a]).abs() < 1e-12);
            for c in picks {
                assert!(ra[c] <= ra[*b] + rb[c] + 1e-12);
            }
        }
    }
}

#[test]
fn vanishing_metric_is_a_branch_point() {
    let grid = sample_grid(&Region::disk(1.0).unwrap(), 4, 16).unwrap();
    let mut lambda2 = vec![1.0; grid.len()];
    lambda2[5] = 0.0;
    let field = MetricField { lambda2 };
    assert!(matches!(metric_graph(&grid, &field), Err(Error::BranchPoint { node: 5, .. })));
}

#[test]
fn metric_graph_uses_the_induced_factor() {
    let region = Region::annulus(0.5, 2.0).unwrap();
    let grid = sample_grid(&region, 16, 64).unwrap();
    let t = lopez_ros_deform(&HoloForm::dz(), region, 2.0).unwrap();
    let m = induced_metric(&t, &grid).unwrap();
    let from_field = metric_graph(&grid, &m).unwrap().distances_from(&[0]);
    let direct = graph_from_lambda(&grid, &m.lambda()).distances_from(&[0]);
    assert_eq!(from_field, direct);
}

#[test]
fn crossing_grows_with_the_labyrinth_but_not_without_it() {
    let ca = make_annulus(0.25, 1.0).unwrap();
    let mut undeformed = Vec::new();
    let mut lengths = Vec::new();
    for n in [3usize, 4] {
        let spec = build_labyrinth(&ca, n).unwrap();
        let grid = crossing_grid(&ca, n, 3, 512).unwrap();
        let t = lopez_ros_deform(&HoloForm::dz(), Region::Annulus(ca), DeformParams::default_m(n)).unwrap();
        let r = crossing_length(&spec, &t, &HoloForm::dz(), &grid, 0.9).unwrap();
        assert!(r.length >= 0.9 * n as f64);
        assert!(r.undeformed_length >= 0.9 * 0.75);
        undeformed.push(r.undeformed_length);
        lengths.push(r.length);
    }
    assert!((undeformed[0] - 0.75).abs() < 1e-12 && (undeformed[1] - 0.75).abs() < 1e-12);
    assert!(lengths[1] > lengths[0]);
}

#[test]
fn crossing_requires_resolved_bands() {
    let ca = make_annulus(0.25, 1.0).unwrap();
    let spec = build_labyrinth(&ca, 3).unwrap();
    let grid = sample_grid(&Region::Annulus(ca), 32, 128).unwrap();
    let t = lopez_ros_deform(&HoloForm::dz(), Region::Annulus(ca), 324.0).unwrap();
    assert!(matches!(crossing_length(&spec, &t, &HoloForm::dz(), &grid, 0.9), Err(Error::Resolution(_))));
}
