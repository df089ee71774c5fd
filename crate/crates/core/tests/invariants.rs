//! Property and invariant tests across the modules: metric-tensor
//! oracles, isometry invariance, spectrum identities, quadrature
//! strategy agreement, and the deformation-transfer correspondence.

mod common;

use nalgebra::{DVector, Vector3};
use proptest::prelude::*;
use rand::Rng;

use polyrigid_core::angleopt::{
    base_point, edge_sums, maximize_on_fiber, reduced_volume_probe, EdgeMap,
};
use polyrigid_core::hyp::{
    dihedral_angle, dual_plane, hyp_distance, klein_metric, plane_of_face, truncated_edge_length,
    KleinPoint,
};
use polyrigid_core::mesh::{instance_mesh, validate_mesh};
use polyrigid_core::pipeline;
use polyrigid_core::rigidity::{
    euclidean_length_jacobian, euclidean_trivial_motions, hyperbolic_length_jacobian,
    rigidity_verdict, so31_trivial_motions, EdgeSet, RigidityMode, Verdict,
};
use polyrigid_core::shapes;
use polyrigid_core::simplex::{
    simplex_dihedrals, simplex_lengths, simplex_volume, transform_simplex, HyperidealSimplex,
};

// ---------------------------------------------------------------------
// hyp-core
// ---------------------------------------------------------------------

#[test]
fn dual_plane_orthogonal_to_lines_through_pole() {
    let mut rng = common::seeded(21);
    for _ in 0..20 {
        let v = common::random_hyperideal(&mut rng, 1.2, 3.0);
        let plane = dual_plane(&v).unwrap();
        let (n, c) = plane.chart();
        // a line through v hitting the ball: aim at a random interior point
        for _ in 0..20 {
            let target = common::random_interior(&mut rng);
            let dir = (target.0 - v.0).normalize();
            // crossing point of the line with the dual plane
            let t = (c - n.dot(&v.0)) / n.dot(&dir);
            let x = v.0 + dir * t;
            if x.norm() >= 0.999 {
                continue;
            }
            let g = klein_metric(&KleinPoint(x)).unwrap();
            // the plane's tangent directions are g-orthogonal to the line
            let mut basis = Vec::new();
            for trial in [Vector3::x(), Vector3::y(), Vector3::z()] {
                let w = trial - n * trial.dot(&n);
                if w.norm() > 0.1 {
                    basis.push(w.normalize());
                }
                if basis.len() == 2 {
                    break;
                }
            }
            for w in &basis {
                let cosang =
                    (g * dir).dot(w) / (((g * dir).dot(&dir)).sqrt() * ((g * w).dot(w)).sqrt());
                assert!(
                    cosang.abs() < 1e-8,
                    "line through pole not orthogonal to dual plane: cos = {cosang:.3e}"
                );
            }
        }
    }
}

#[test]
fn truncated_length_isometry_invariant() {
    let mut rng = common::seeded(22);
    for _ in 0..50 {
        let v = common::random_hyperideal(&mut rng, 1.1, 2.5);
        let w = KleinPoint(-v.0 + Vector3::from_fn(|_, _| rng.random_range(-0.2..0.2)));
        let Ok(len) = truncated_edge_length(&v, &w) else {
            continue;
        };
        let m = common::random_isometry(&mut rng);
        let vm = polyrigid_core::hyp::apply_isometry_hyperideal(&m, &v).unwrap();
        let wm = polyrigid_core::hyp::apply_isometry_hyperideal(&m, &w).unwrap();
        let len_m = truncated_edge_length(&vm, &wm).unwrap();
        assert!((len - len_m).abs() < 1e-10, "{len} vs {len_m}");
    }
}

#[test]
fn hyp_distance_matches_cross_ratio_and_path_length() {
    let mut rng = common::seeded(23);
    for _ in 0..50 {
        let p = common::random_interior(&mut rng);
        let q = common::random_interior(&mut rng);
        let d = hyp_distance(&p, &q).unwrap();
        let cr = common::cross_ratio_distance(&p.0, &q.0);
        assert!((d - cr).abs() < 1e-10, "lift {d} vs cross-ratio {cr}");
    }
    // path-length oracle through the metric tensor
    let p = KleinPoint::new(-0.4, 0.2, 0.1);
    let q = KleinPoint::new(0.5, -0.3, 0.2);
    let d = hyp_distance(&p, &q).unwrap();
    let arc = common::klein_chord_length(&p.0, &q.0, 2000);
    assert!((d - arc).abs() < 1e-9, "lift {d} vs path {arc}");
}

#[test]
fn dihedral_angle_matches_metric_tensor_oracle() {
    // two random planes through a common interior point
    let mut rng = common::seeded(24);
    for _ in 0..20 {
        let x = common::random_interior(&mut rng);
        // planes spanned by random directions through x
        let mk_plane = |rng: &mut rand::rngs::StdRng| loop {
            let a = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let b = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let p1 = KleinPoint(x.0 + a * 0.05);
            let p2 = KleinPoint(x.0 + b * 0.05);
            if let Ok(plane) = plane_of_face(&p1, &p2, &x) {
                return plane;
            }
        };
        let pl1 = mk_plane(&mut rng);
        let pl2 = mk_plane(&mut rng);
        let Ok(theta) = dihedral_angle(&pl1, &pl2) else {
            continue;
        };
        // oracle: angle between the g-gradients of the defining
        // functions at x, with outward normals
        let g = klein_metric(&x).unwrap();
        let ginv = g.try_inverse().unwrap();
        let (n1, _) = pl1.chart();
        let (n2, _) = pl2.chart();
        let w1 = ginv * n1;
        let w2 = ginv * n2;
        let cosn = (g * w1).dot(&w2) / (((g * w1).dot(&w1)).sqrt() * ((g * w2).dot(&w2)).sqrt());
        let oracle = (-cosn).clamp(-1.0, 1.0).acos();
        assert!(
            (theta - oracle).abs() < 1e-8,
            "dihedral {theta} vs metric oracle {oracle}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn prop_hyp_distance_triangle_inequality(
        a in prop::array::uniform3(-0.55f64..0.55),
        b in prop::array::uniform3(-0.55f64..0.55),
        c in prop::array::uniform3(-0.55f64..0.55),
    ) {
        let pa = KleinPoint::new(a[0], a[1], a[2]);
        let pb = KleinPoint::new(b[0], b[1], b[2]);
        let pc = KleinPoint::new(c[0], c[1], c[2]);
        let ab = hyp_distance(&pa, &pb).unwrap();
        let bc = hyp_distance(&pb, &pc).unwrap();
        let ac = hyp_distance(&pa, &pc).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn prop_mink_inner_bilinear_symmetric(
        x in prop::array::uniform4(-10.0f64..10.0),
        y in prop::array::uniform4(-10.0f64..10.0),
        s in -3.0f64..3.0,
    ) {
        use polyrigid_core::hyp::{mink_inner, MinkowskiVec};
        let vx = MinkowskiVec::new(x[0], x[1], x[2], x[3]);
        let vy = MinkowskiVec::new(y[0], y[1], y[2], y[3]);
        let scaled = MinkowskiVec::new(s * x[0], s * x[1], s * x[2], s * x[3]);
        prop_assert!((mink_inner(&vx, &vy) - mink_inner(&vy, &vx)).abs() < 1e-12);
        prop_assert!((mink_inner(&scaled, &vy) - s * mink_inner(&vx, &vy)).abs() < 1e-9);
    }

    #[test]
    fn prop_edge_sum_map_affine(lambda in 0.0f64..1.0, seed in 0u64..1000) {
        let tri = common::triangulation_of(&shapes::octahedron_instance(1.2));
        let theta0 = base_point(&tri).unwrap();
        let mut rng = common::seeded(seed);
        let n = theta0.dim();
        let d1 = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-0.01..0.01)));
        let d2 = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-0.01..0.01)));
        let t1 = polyrigid_core::angleopt::AngleAssignment::from_flat(&(theta0.flatten() + d1));
        let t2 = polyrigid_core::angleopt::AngleAssignment::from_flat(&(theta0.flatten() + d2));
        let mix = polyrigid_core::angleopt::AngleAssignment::from_flat(
            &(t1.flatten() * lambda + t2.flatten() * (1.0 - lambda)),
        );
        let f1 = edge_sums(&tri, &t1).unwrap();
        let f2 = edge_sums(&tri, &t2).unwrap();
        let fm = edge_sums(&tri, &mix).unwrap();
        for k in 0..f1.0.len() {
            let expect = lambda * f1.0[k] + (1.0 - lambda) * f2.0[k];
            prop_assert!((fm.0[k] - expect).abs() < 1e-12);
        }
    }
}

// ---------------------------------------------------------------------
// simplex-geom
// ---------------------------------------------------------------------

#[test]
fn vertex_margin_shrinks_towards_ideal() {
    let mut last = f64::NEG_INFINITY;
    for s in [1.01, 1.05, 1.2] {
        let simplex = shapes::regular_simplex(s);
        let angles = simplex_dihedrals(&simplex).unwrap();
        let margin = angles
            .vertex_margins()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(margin > 0.0, "margin positive at s = {s}");
        assert!(margin > last, "margins increase with s");
        last = margin;
    }
}

#[test]
fn simplex_length_jacobian_rank_six_on_random_simplices() {
    let mut rng = common::seeded(31);
    for _ in 0..20 {
        let s = common::random_simplex(&mut rng);
        let inst = {
            let vs = s.vertices();
            polyrigid_core::mesh::Instance {
                vertices: vs.iter().map(|v| [v.0.x, v.0.y, v.0.z]).collect(),
                triangles: vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [2, 0, 3]],
                cells: Some(vec![vec![0, 1, 2, 3]]),
                ellipsoid: None,
            }
        };
        let tri = common::triangulation_of(&inst);
        let (jac, _) = hyperbolic_length_jacobian(&tri, EdgeSet::All).unwrap();
        assert_eq!(jac.nrows(), 6);
        assert_eq!(jac.rank(1e-8), 6);
        // kernel = exactly the trivial motions
        let points: Vec<KleinPoint> = tri.mesh().vertices.iter().map(|v| KleinPoint(*v)).collect();
        let trivial = so31_trivial_motions(&points).unwrap();
        let rep = rigidity_verdict(&jac, &trivial, 1e-8, RigidityMode::HyperbolicLength);
        assert_eq!(rep.kernel_dim, 6);
        assert_eq!(rep.verdict, Verdict::Rigid);
    }
}

#[test]
fn quadrature_strategies_agree() {
    let tol = 1e-8;
    for s in [1.1, 1.25, 1.5] {
        let simplex = shapes::regular_simplex(s);
        let uniform = simplex_volume(&simplex, tol).unwrap();
        let adaptive = common::adaptive_volume(&simplex, tol);
        assert!(
            (uniform - adaptive).abs() <= 10.0 * tol * uniform.abs(),
            "s = {s}: uniform {uniform:.12} vs adaptive {adaptive:.12}"
        );
    }
}

#[test]
fn volume_gap_to_ideal_shrinks_towards_limit() {
    // the ideal-limit trend behind acceptance criterion 12: the gap to
    // 3 Lambda(pi/3) decreases monotonically as s -> 1+
    let oracle = common::ideal_regular_volume();
    let mut last = f64::INFINITY;
    for s in [1.1, 1.05, 1.02, 1.01] {
        let v = simplex_volume(&shapes::regular_simplex(s), 1e-6).unwrap();
        let gap = (v - oracle).abs();
        assert!(gap < last, "gap not shrinking at s = {s}: {gap}");
        last = gap;
    }
    assert!(last < 0.08, "gap at s = 1.01 is {last:.4}");
}

#[test]
fn volume_isometry_invariance_random() {
    let mut rng = common::seeded(33);
    let tol = 1e-7;
    let s = common::random_simplex(&mut rng);
    let v = simplex_volume(&s, tol).unwrap();
    for _ in 0..3 {
        let m = common::random_isometry(&mut rng);
        let moved = transform_simplex(&s, &m).unwrap();
        let vm = simplex_volume(&moved, tol).unwrap();
        assert!((v - vm).abs() <= 10.0 * tol * v, "{v} vs {vm}");
    }
}

// ---------------------------------------------------------------------
// rigidity-engine
// ---------------------------------------------------------------------

#[test]
fn octahedron_family_kernels_are_six() {
    for d in [1.05, 1.2, 1.35] {
        let inst = shapes::octahedron_instance(d);
        let out = pipeline::theorem_b(&inst, pipeline::EllipsoidSource::Given, 1e-8).unwrap();
        assert_eq!(out.length_report.kernel_dim, 6, "length kernel at d = {d}");
        assert_eq!(out.angle_report.kernel_dim, 6, "angle kernel at d = {d}");
    }
}

/// Chart-level deformation transfer: lateral parts kept, radial parts
/// scaled by `1 - |v|^2`. Carries Euclidean trivial motions onto the
/// hyperbolic ones and vice versa.
fn chart_transfer(v: &Vector3<f64>, u: &Vector3<f64>) -> Vector3<f64> {
    let radial = v / v.norm();
    let f = u.dot(&radial);
    u - radial * f + radial * f * (1.0 - v.norm_squared())
}

#[test]
fn deformation_transfer_maps_kernels_to_kernels() {
    let inst = shapes::octahedron_instance(1.2);
    let tri = common::triangulation_of(&inst);
    let mesh = tri.mesh();
    let jac_euc = euclidean_length_jacobian(mesh);
    let (jac_hyp, _) = hyperbolic_length_jacobian(&tri, EdgeSet::Boundary).unwrap();

    // Euclidean trivial motions transfer into the hyperbolic kernel
    for field in euclidean_trivial_motions(mesh).unwrap() {
        let transferred: Vec<Vector3<f64>> = mesh
            .vertices
            .iter()
            .zip(field.0.iter())
            .map(|(v, u)| chart_transfer(v, u))
            .collect();
        let flat = polyrigid_core::rigidity::DeformationField(transferred).flatten();
        let res = (&jac_hyp * &flat).norm() / flat.norm();
        assert!(res < 1e-7, "forward transfer residual {res:.3e}");
    }

    // hyperbolic trivial motions transfer back into the Euclidean kernel
    let points: Vec<KleinPoint> = mesh.vertices.iter().map(|v| KleinPoint(*v)).collect();
    for field in so31_trivial_motions(&points).unwrap() {
        let back: Vec<Vector3<f64>> = mesh
            .vertices
            .iter()
            .zip(field.0.iter())
            .map(|(v, w)| {
                let radial = v / v.norm();
                let f = w.dot(&radial);
                w - radial * f + radial * f / (1.0 - v.norm_squared())
            })
            .collect();
        let flat = polyrigid_core::rigidity::DeformationField(back).flatten();
        let res = (&jac_euc * &flat).norm() / flat.norm();
        assert!(res < 1e-7, "backward transfer residual {res:.3e}");
    }

    // a random field is in neither kernel, and its transfer is in
    // neither kernel
    let mut rng = common::seeded(34);
    for _ in 0..10 {
        let field: Vec<Vector3<f64>> = mesh
            .vertices
            .iter()
            .map(|_| Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)))
            .collect();
        let flat = polyrigid_core::rigidity::DeformationField(field.clone()).flatten();
        let transferred: Vec<Vector3<f64>> = mesh
            .vertices
            .iter()
            .zip(field.iter())
            .map(|(v, u)| chart_transfer(v, u))
            .collect();
        let tflat = polyrigid_core::rigidity::DeformationField(transferred).flatten();
        let euc = (&jac_euc * &flat).norm() / flat.norm();
        let hyp = (&jac_hyp * &tflat).norm() / tflat.norm();
        assert!(
            euc > 1e-4 && hyp > 1e-4,
            "random field near a kernel: {euc:.2e} {hyp:.2e}"
        );
    }
}

#[test]
fn trivial_motions_in_kernel_after_diameter_normalization() {
    // absolute residual < 1e-9 on the unit-diameter normalized mesh
    let inst = shapes::bumped_octahedron_instance(1.2, 1.01);
    let tri = common::triangulation_of(&inst);
    let mesh = tri.mesh();
    let (jac, _) = hyperbolic_length_jacobian(&tri, EdgeSet::Boundary).unwrap();
    let points: Vec<KleinPoint> = mesh.vertices.iter().map(|v| KleinPoint(*v)).collect();
    for field in so31_trivial_motions(&points).unwrap() {
        let flat = field.flatten();
        let res = (&jac * &flat).norm() / flat.norm();
        assert!(res < 1e-9, "residual {res:.3e}");
    }
}

// ---------------------------------------------------------------------
// pogorelov
// ---------------------------------------------------------------------

#[test]
fn radial_norm_preserved_exactly() {
    let mut rng = common::seeded(35);
    for _ in 0..50 {
        let p = common::random_hyperideal(&mut rng, 1.1, 3.5);
        let x = polyrigid_core::pogorelov::DeSitterPoint::from_chart(&p).unwrap();
        let n = x.radial_vector();
        let f = rng.random_range(-2.0..2.0);
        let seed = polyrigid_core::hyp::MinkowskiVec::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            0.0,
        );
        // build a tangent with prescribed radial coefficient: project
        // onto the tangent space, strip its radial part, add f N
        let inner = polyrigid_core::hyp::mink_inner(&seed, &x.coords());
        let tangent_seed = polyrigid_core::pogorelov::TangentAtDeSitter::new(
            x,
            polyrigid_core::hyp::MinkowskiVec(seed.0 - x.coords().0 * inner),
        )
        .unwrap();
        let lateral = polyrigid_core::pogorelov::split_radial_lateral(&tangent_seed).lateral;
        let vec = polyrigid_core::hyp::MinkowskiVec(lateral.0 + n.0 * f);
        let t = polyrigid_core::pogorelov::TangentAtDeSitter::new(x, vec).unwrap();
        let (chart, w) = polyrigid_core::pogorelov::pogorelov_push(&t);
        let radial_part = w.dot(&(chart.0 / chart.norm()));
        let split = polyrigid_core::pogorelov::split_radial_lateral(&t);
        assert!((split.f - f).abs() < 1e-10);
        assert!((radial_part.abs() - f.abs()).abs() < 1e-12);
    }
}

// ---------------------------------------------------------------------
// angle-opt
// ---------------------------------------------------------------------

#[test]
fn volume_gradient_matches_finite_differences() {
    let tri = common::triangulation_of(&shapes::regular_simplex_instance(1.25));
    let theta0 = base_point(&tri).unwrap();
    let grad = polyrigid_core::angleopt::volume_gradient(&tri, &theta0).unwrap();
    // central differences of the total volume with Richardson over
    // (h, h/2); fixed-level quadrature keeps the errors correlated
    let s0 = polyrigid_core::angleopt::cell_simplex(&tri, 0).unwrap();
    let _ = s0;
    let eval = |theta: &polyrigid_core::angleopt::AngleAssignment, level: usize| -> f64 {
        let mut total = 0.0;
        for a in &theta.0 {
            let s = polyrigid_core::simplex::solve_from_angles(a, 1e-12).unwrap();
            let v0 = polyrigid_core::simplex::simplex_volume_at_level(&s, level).unwrap();
            let v1 = polyrigid_core::simplex::simplex_volume_at_level(&s, level + 1).unwrap();
            total += v1 + (v1 - v0) / 63.0;
        }
        total
    };
    let mut worst: f64 = 0.0;
    for k in 0..6 {
        let fd_at = |h: f64| -> f64 {
            let mut tp = theta0.clone();
            tp.0[0].0[k] += h;
            let mut tm = theta0.clone();
            tm.0[0].0[k] -= h;
            (eval(&tp, 5) - eval(&tm, 5)) / (2.0 * h)
        };
        let f1 = fd_at(1e-4);
        let f2 = fd_at(5e-5);
        let fd = (4.0 * f2 - f1) / 3.0;
        worst = worst.max((fd - grad[k]).abs());
    }
    assert!(worst < 1e-6, "gradient mismatch {worst:.3e}");
}

#[test]
fn projected_fiber_hessian_negative_definite() {
    for inst in [
        shapes::bipyramid_instance(1.3, 1.3),
        shapes::octahedron_instance(1.2),
    ] {
        let tri = common::triangulation_of(&inst);
        let theta0 = base_point(&tri).unwrap();
        let map = EdgeMap::new(&tri);
        let f = map.matrix(tri.cells().len());
        // null-space basis by the normal-matrix eigendecomposition
        let normal = f.transpose() * &f;
        let eig = normal.symmetric_eigen();
        let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let cols: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&k| eig.eigenvalues[k] <= 1e-12 * lmax)
            .collect();
        let n = theta0.dim();
        let mut z = nalgebra::DMatrix::zeros(n, cols.len());
        for (c, &k) in cols.iter().enumerate() {
            z.set_column(c, &eig.eigenvectors.column(k));
        }
        let grad_z = |flat: &DVector<f64>| -> DVector<f64> {
            let theta = polyrigid_core::angleopt::AngleAssignment::from_flat(flat);
            let g = polyrigid_core::angleopt::volume_gradient(&tri, &theta).unwrap();
            z.transpose() * g
        };
        let base = theta0.flatten();
        let h = 1e-4;
        let mut hess = nalgebra::DMatrix::zeros(cols.len(), cols.len());
        for c in 0..cols.len() {
            let dir = z.column(c).into_owned();
            let gp = grad_z(&(&base + &dir * h));
            let gm = grad_z(&(&base - &dir * h));
            hess.set_column(c, &((gp - gm) / (2.0 * h)));
        }
        let hess = (&hess + &hess.transpose()) / 2.0;
        let eigvals = hess.symmetric_eigen().eigenvalues;
        let max_eig = eigvals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            max_eig < -1e-8,
            "projected Hessian max eigenvalue {max_eig:.3e}"
        );
    }
}

#[test]
fn perturbed_base_point_loses_criticality() {
    // off the critical point, strict concavity forces the incident
    // simplices to disagree on shared edge lengths
    let tri = common::triangulation_of(&shapes::octahedron_instance(1.2));
    let theta0 = base_point(&tri).unwrap();
    let map = EdgeMap::new(&tri);
    let f = map.matrix(tri.cells().len());
    let mut rng = common::seeded(40);
    let n = theta0.dim();
    let raw = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)));
    let svd = f.clone().svd(true, true);
    let range_part = svd.solve(&(&f * &raw), 1e-12).unwrap();
    let mut dir = raw - range_part;
    dir /= dir.norm();
    let perturbed =
        polyrigid_core::angleopt::AngleAssignment::from_flat(&(theta0.flatten() + dir * 1e-2));
    let residual = polyrigid_core::angleopt::criticality_residual(&tri, &perturbed).unwrap();
    assert!(
        residual > 1e-4,
        "criticality residual off the critical point: {residual:.3e}"
    );
}

#[test]
fn reduced_volume_probe_rejects_oversized_perturbation() {
    let tri = common::triangulation_of(&shapes::octahedron_instance(1.2));
    let theta0 = base_point(&tri).unwrap();
    let alpha0 = edge_sums(&tri, &theta0).unwrap();
    // a shift below the per-edge caps but outside the realizable
    // angle polytope
    let a1 = polyrigid_core::angleopt::EdgeSums(alpha0.0.iter().map(|a| a + 0.9).collect());
    let res = reduced_volume_probe(&tri, &a1, &alpha0, 3, 1e-7);
    assert!(
        matches!(res, Err(polyrigid_core::OptError::LeftPolytope)),
        "expected LeftPolytope, got {res:?}"
    );
    // and a shift exceeding the caps is an empty fiber outright
    let a2 = polyrigid_core::angleopt::EdgeSums(alpha0.0.iter().map(|a| a + 2.0).collect());
    assert!(matches!(
        reduced_volume_probe(&tri, &a2, &alpha0, 3, 1e-7),
        Err(polyrigid_core::OptError::EmptyFiber)
    ));
}

#[test]
fn total_volume_matches_geometric_cells_at_base_point() {
    let tri = common::triangulation_of(&shapes::octahedron_instance(1.2));
    let theta0 = base_point(&tri).unwrap();
    let tol = 1e-8;
    let through_solver = polyrigid_core::angleopt::total_volume(&tri, &theta0, tol).unwrap();
    let mut direct = 0.0;
    for ci in 0..tri.cells().len() {
        let s = polyrigid_core::angleopt::cell_simplex(&tri, ci).unwrap();
        direct += simplex_volume(&s, tol).unwrap();
    }
    assert!(
        (through_solver - direct).abs() <= 10.0 * tol * direct,
        "solver route {through_solver:.12} vs direct {direct:.12}"
    );
}

#[test]
fn total_volume_midpoint_concave_near_base() {
    let tri = common::triangulation_of(&shapes::octahedron_instance(1.2));
    let theta0 = base_point(&tri).unwrap();
    let mut rng = common::seeded(39);
    let tol = 1e-9;
    let n = theta0.dim();
    for _ in 0..3 {
        let d = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-2e-2..2e-2)));
        let t1 = polyrigid_core::angleopt::AngleAssignment::from_flat(&(theta0.flatten() + &d));
        let t2 = polyrigid_core::angleopt::AngleAssignment::from_flat(&(theta0.flatten() - &d));
        let mid = polyrigid_core::angleopt::AngleAssignment::from_flat(&theta0.flatten());
        let v1 = polyrigid_core::angleopt::total_volume(&tri, &t1, tol).unwrap();
        let v2 = polyrigid_core::angleopt::total_volume(&tri, &t2, tol).unwrap();
        let vm = polyrigid_core::angleopt::total_volume(&tri, &mid, tol).unwrap();
        assert!(
            vm > (v1 + v2) / 2.0,
            "not concave: {vm} vs avg of {v1}, {v2}"
        );
    }
}

#[test]
fn maximizer_is_deterministic() {
    let tri = common::triangulation_of(&shapes::octahedron_instance(1.2));
    let theta0 = base_point(&tri).unwrap();
    let alpha = edge_sums(&tri, &theta0).unwrap();
    let mut rng = common::seeded(36);
    let n = theta0.dim();
    let noise = DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1e-3..1e-3)));
    let start = polyrigid_core::angleopt::AngleAssignment::from_flat(&(theta0.flatten() + noise));
    let a = maximize_on_fiber(&tri, &alpha, &start).unwrap();
    let b = maximize_on_fiber(&tri, &alpha, &start).unwrap();
    // identical output bits
    assert_eq!(a.theta.flatten().as_slice(), b.theta.flatten().as_slice());
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn reduced_volume_concave_along_segment() {
    let tri = common::triangulation_of(&shapes::octahedron_instance(1.2));
    let theta0 = base_point(&tri).unwrap();
    let alpha0 = edge_sums(&tri, &theta0).unwrap();
    // symmetric perturbation of the edge sums around the base point
    let mut rng = common::seeded(37);
    let delta: Vec<f64> = alpha0
        .0
        .iter()
        .map(|_| rng.random_range(-5e-3..5e-3))
        .collect();
    let a1 = polyrigid_core::angleopt::EdgeSums(
        alpha0.0.iter().zip(&delta).map(|(a, d)| a + d).collect(),
    );
    let a2 = polyrigid_core::angleopt::EdgeSums(
        alpha0.0.iter().zip(&delta).map(|(a, d)| a - d).collect(),
    );
    let probe = reduced_volume_probe(&tri, &a1, &a2, 4, 1e-9).unwrap();
    assert!(
        probe.concave,
        "sampled values not concave: {:?}",
        probe.values
    );
    // strictness at the midpoint
    let mid = probe.values[2];
    assert!(mid > (probe.values[0] + probe.values[4]) / 2.0 + 1e-10);
}

#[test]
fn theorem_c_kernel_matches_trivial_when_chart_passes() {
    for inst in [
        shapes::bipyramid_instance(1.3, 1.3),
        shapes::octahedron_instance(1.2),
    ] {
        let tri = common::triangulation_of(&inst);
        let rep = polyrigid_core::angleopt::theorem_e_check(&tri, 1e-8).unwrap();
        assert_eq!(rep.chart_rank, rep.expected_rank);
        let (jac, _) = hyperbolic_length_jacobian(&tri, EdgeSet::Boundary).unwrap();
        let points: Vec<KleinPoint> = tri.mesh().vertices.iter().map(|v| KleinPoint(*v)).collect();
        let trivial = so31_trivial_motions(&points).unwrap();
        let verdict = rigidity_verdict(&jac, &trivial, 1e-8, RigidityMode::HyperbolicLength);
        assert_eq!(verdict.kernel_dim, 6);
        assert_eq!(verdict.verdict, Verdict::Rigid);
    }
}

// ---------------------------------------------------------------------
// mesh-model
// ---------------------------------------------------------------------

#[test]
fn shared_nontriangular_facets_triangulated_consistently() {
    // cube split into two triangular prisms sharing a rectangle facet
    let vertices = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
    ];
    let triangles = vec![
        [0, 3, 2],
        [0, 2, 1],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
        [4, 5, 6],
        [4, 6, 7],
    ];
    let inst = polyrigid_core::mesh::Instance {
        vertices,
        triangles,
        // prisms split along the diagonal plane through (0,2,6,4)
        cells: Some(vec![vec![0, 1, 2, 4, 5, 6], vec![0, 2, 3, 4, 6, 7]]),
        ellipsoid: None,
    };
    let mesh = validate_mesh(instance_mesh(&inst)).unwrap();
    let cells =
        polyrigid_core::mesh::validate_cellulation(&mesh, inst.cells.as_ref().unwrap()).unwrap();
    let tri = polyrigid_core::mesh::triangulate_cellulation(&cells).unwrap();
    // 3 tetrahedra per prism, total volume preserved, no new vertices
    assert_eq!(tri.cells().len(), 6);
    assert!((tri.total_cell_volume() - 1.0).abs() < 1e-12);
    assert_eq!(tri.mesh().vertices.len(), 8);
}

#[test]
fn ellipsoid_check_affine_invariant() {
    let inst = shapes::octahedron_instance(1.2);
    let mesh = validate_mesh(instance_mesh(&inst)).unwrap();
    let cells =
        polyrigid_core::mesh::validate_cellulation(&mesh, inst.cells.as_ref().unwrap()).unwrap();
    let e = polyrigid_core::mesh::Ellipsoid::unit_sphere();
    assert!(polyrigid_core::mesh::ellipsoid_hypothesis_check(&cells, &e).pass);

    let mut rng = common::seeded(38);
    for _ in 0..5 {
        let (m, t) = common::random_affine(&mut rng);
        let minv = m.try_inverse().unwrap();
        // transform the mesh by x -> m x + t and the ellipsoid with it:
        // (x - c)^T A (x - c) becomes A' = m^-T A m^-1, c' = m c + t
        let moved = polyrigid_core::mesh::SurfaceMesh {
            vertices: mesh.vertices.iter().map(|v| m * v + t).collect(),
            triangles: mesh.triangles.clone(),
        };
        let moved = validate_mesh(moved).unwrap();
        let moved_cells =
            polyrigid_core::mesh::validate_cellulation(&moved, inst.cells.as_ref().unwrap())
                .unwrap();
        let e2 = polyrigid_core::mesh::Ellipsoid {
            a: minv.transpose() * e.a * minv,
            c: m * e.c + t,
        };
        assert!(
            polyrigid_core::mesh::ellipsoid_hypothesis_check(&moved_cells, &e2).pass,
            "hypothesis not affine-invariant"
        );
    }
}
