use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use splitgeom::causal::{classify_components, trapped_classify, CausalClass, MarginalReading, TrappedClass};
use splitgeom::curvature::{curvature, metric_compatibility_residual};
use splitgeom::immersion::Immersion;
use splitgeom::mesh::{StructuredGrid, SurfaceMesh};
use splitgeom::parabolicity::{gaussian_curvature, total_curvature};
use splitgeom::spacetime::{catalog, FiberMetric};
use splitgeom::tau::{laplacian_tau, tau_gradient};
use splitgeom::{ChartPoint, Expr};

fn e(s: &str) -> Expr {
    Expr::parse(s).unwrap()
}

// g_t = f(t) δ on a k-slice: H = −(k f'/2f) ∂_t, so ḡ(H, ∂_t) = k f'/2f.
#[test]
fn grw_slices_match_the_warping_rate() {
    let cases = [("exp(2*t)", 0.3, 2.0), ("t^2 + 1", 0.5, 1.0 / 1.25), ("cosh(t)", -0.4, (-0.4f64).tanh())];
    for (f, t0, rate) in cases {
        let m = catalog::grw(e(f), FiberMetric::identity(3)).unwrap();
        for axes in [vec![1, 2], vec![1, 2, 3]] {
            let k = axes.len();
            let x2 = if k == 2 { vec![0.4] } else { vec![] };
            let imm = Immersion::slice(3, t0, &axes, &x2).unwrap();
            let q = vec![0.2; k];
            let geo = imm.geometry(&m, &q).unwrap();
            assert_relative_eq!(geo.h_dot_partial_t(), k as f64 * rate / 2.0, epsilon = 1e-9);
            assert!(geo.mean.iter().skip(1).all(|c| c.abs() < 1e-9));
        }
    }
}

#[test]
fn static_slices_are_totally_geodesic() {
    let m = catalog::static_sin();
    let imm = Immersion::slice(3, 0.7, &[1, 2], &[-0.3]).unwrap();
    for q in [[0.0, 0.0], [1.0, -0.5], [-2.0, 0.8]] {
        let geo = imm.geometry(&m, &q).unwrap();
        assert!(geo.mean.norm() < 1e-9);
        assert!(laplacian_tau(&m, &imm, &q).unwrap().abs() < 1e-9);
    }
}

// Minkowski graph t = a·x: h = I − a aᵀ, so |∇τ|² = |a|²/(1 − |a|²) and Δτ = 0.
#[test]
fn linear_graph_in_minkowski() {
    let m = catalog::mink();
    let (a1, a2) = (0.3, -0.4);
    let imm = Immersion::graph(3, e(&format!("{a1}*x1 + ({a2})*x3")), &[1, 3], &[0.5]).unwrap();
    let a2sum = a1 * a1 + a2 * a2;
    for q in [[0.0, 0.0], [1.5, -0.7]] {
        let s = tau_gradient(&m, &imm, &q).unwrap();
        assert_relative_eq!(s.tau, a1 * q[0] + a2 * q[1], epsilon = 1e-12);
        assert_relative_eq!(s.grad_norm_sq, a2sum / (1.0 - a2sum), epsilon = 1e-10);
        assert!(laplacian_tau(&m, &imm, &q).unwrap().abs() < 1e-10);
    }
}

#[test]
fn expanding_slices_are_past_trapped_and_contracting_ones_future_trapped() {
    let grid = StructuredGrid::cube(2, 1.0, 5).unwrap();
    let imm = Immersion::slice(3, 0.0, &[1, 2], &[0.0]).unwrap();
    let expect = [("exp(2*t)", TrappedClass::PastTrapped), ("exp(-2*t)", TrappedClass::FutureTrapped)];
    for (f, class) in expect {
        let m = catalog::grw(e(f), FiberMetric::identity(3)).unwrap();
        let r = trapped_classify(&m, &imm, &grid, MarginalReading::default()).unwrap();
        assert_eq!(r.class, class, "{f}");
        assert_eq!(r.per_vertex.len(), grid.len());
    }
    let flat = trapped_classify(&catalog::mink(), &imm, &grid, MarginalReading::default()).unwrap();
    assert_eq!(flat.class, TrappedClass::Extremal);
}

#[test]
fn flat_spacetimes_have_no_curvature() {
    let p = ChartPoint::new(0.3, vec![1.2, 0.4, -0.6]);
    for m in [catalog::mink(), catalog::spherical_minkowski()] {
        let c = curvature(&m, &p).unwrap();
        let n = c.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    for d in 0..n {
                        worst = worst.max(c.riemann_up(a, b, cc, d).abs());
                    }
                }
            }
        }
        assert!(worst < 1e-7, "{worst}");
        assert!(metric_compatibility_residual(&m, &p).unwrap() < 1e-9);
    }
}

// Round unit sphere: K = 1 with second-order convergence away from the
// chart poles, total curvature 4π.
#[test]
fn round_sphere_from_its_metric() {
    use std::f64::consts::PI;
    let sphere = |count| {
        let mesh = SurfaceMesh::from_metric(StructuredGrid::sphere(count).unwrap(), |q| {
            let s = q[0].sin();
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, s * s]))
        });
        let k = gaussian_curvature(&mesh).unwrap();
        let grid = &mesh.grid;
        let worst = (0..grid.len())
            .filter(|&id| (0.5..PI - 0.5).contains(&grid.param(id)[0]))
            .filter_map(|id| k[id])
            .map(|x| (x - 1.0).abs())
            .fold(0.0, f64::max);
        (worst, total_curvature(&mesh, &k))
    };
    let (coarse, _) = sphere(48);
    let (fine, total) = sphere(96);
    assert!(fine < 1e-2, "{fine}");
    assert!((coarse / fine).log2() > 1.5, "{coarse} -> {fine}");
    assert_relative_eq!(total, 4.0 * PI, max_relative = 0.02);
}

proptest! {
    // sign of −β dt² + |dx|² and of dt decide the class
    #[test]
    fn causal_class_matches_the_quadratic_form(
        beta in 0.2f64..4.0,
        dt in -2.0f64..2.0,
        dx in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let mut g = DMatrix::identity(4, 4);
        g[(0, 0)] = -beta;
        let v = DVector::from_iterator(4, std::iter::once(dt).chain(dx.iter().copied()));
        let q = -beta * dt * dt + dx.iter().map(|x| x * x).sum::<f64>();
        prop_assume!(q.abs() > 1e-6);
        let class = classify_components(&g, &v);
        let expected = if q > 0.0 {
            CausalClass::Spacelike
        } else if dt > 0.0 {
            CausalClass::TimelikeFuture
        } else {
            CausalClass::TimelikePast
        };
        prop_assert_eq!(class, expected);
        prop_assert_eq!(classify_components(&g, &(-v)), expected.mirrored());
    }

    // ∂_t is Killing in a standard static spacetime: every slice has H = 0
    #[test]
    fn static_slices_stay_extremal(t0 in -2.0f64..2.0, c in 1.5f64..3.0, q in prop::collection::vec(-1.0f64..1.0, 2)) {
        let m = catalog::standard_static(e(&format!("{c} + sin(x1)*cos(x2)")), FiberMetric::identity(3)).unwrap();
        let imm = Immersion::slice(3, t0, &[1, 2], &[0.1]).unwrap();
        let geo = imm.geometry(&m, &q).unwrap();
        prop_assert!(geo.mean.norm() < 1e-8);
    }
}
