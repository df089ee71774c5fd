//! Subcommand implementations: each builds a verdict document from the
//! core pipeline and harness operations.

use std::path::Path;
use std::time::Instant;

use nalgebra::Vector3;
use serde_json::{json, Map, Value};

use polyrigid_core::angleopt::{
    base_point, criticality_residual, edge_sums, maximize_on_fiber, total_volume, EdgeMap,
};
use polyrigid_core::hyp::{mink_inner, KleinPoint, MinkowskiVec};
use polyrigid_core::mesh::{
    fit_ellipsoid as fit_quadric, hyperideal_check, instance_mesh, load_mesh, parse_off,
    triangulate_cellulation, validate_mesh, write_off_polytopes, Ellipsoid, Instance, MeshFormat,
    SurfaceMesh, Triangulation,
};
use polyrigid_core::pipeline::{self, EllipsoidSource};
use polyrigid_core::pogorelov::{
    desitter_killing, desitter_sphere_forms, dphi_s, euclidean_sphere_forms,
    lie_derivative_desitter, lie_derivative_euclidean, phi_s, pogorelov_pull, pogorelov_push,
    verify_eq_pogo, DeSitterPoint,
};
use polyrigid_core::rigidity::{so31_generators, Verdict};
use polyrigid_core::simplex::{schlafli_residual, simplex_volume, truncate};

use crate::document::{digest, Status, VerdictDocument};
use crate::rng::SplitMix64;

type CmdResult = Result<VerdictDocument, Box<dyn std::error::Error>>;

struct Timings {
    enabled: bool,
    start: Instant,
    entries: Map<String, Value>,
}

impl Timings {
    fn new(enabled: bool) -> Self {
        Self {
            enabled,
            start: Instant::now(),
            entries: Map::new(),
        }
    }

    fn lap(&mut self, name: &str) {
        if self.enabled {
            let ms = self.start.elapsed().as_secs_f64() * 1e3;
            self.entries.insert(name.into(), json!(ms));
            self.start = Instant::now();
        }
    }

    fn finish(self) -> Option<Map<String, Value>> {
        if self.enabled {
            Some(self.entries)
        } else {
            None
        }
    }
}

fn read_instance(path: &Path) -> Result<(Instance, String), Box<dyn std::error::Error>> {
    let bytes = std::fs::read(path)?;
    let dig = digest(&bytes);
    if path.extension().is_some_and(|e| e == "off") {
        let mesh = parse_off(&bytes)?;
        let inst = Instance {
            vertices: mesh.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
            triangles: mesh.triangles.clone(),
            cells: None,
            ellipsoid: None,
        };
        Ok((inst, dig))
    } else {
        let inst: Instance = serde_json::from_slice(&bytes)?;
        Ok((inst, dig))
    }
}

fn validated_triangulation(inst: &Instance) -> Result<Triangulation, Box<dyn std::error::Error>> {
    let cellulation = pipeline::validated_cellulation(inst)?;
    Ok(triangulate_cellulation(&cellulation)?)
}

fn verdict_status(v: Verdict) -> Status {
    match v {
        Verdict::Rigid => Status::Rigid,
        Verdict::Flexible => Status::Flexible,
        Verdict::Inconclusive => Status::Inconclusive,
    }
}

pub fn theorem_b(
    path: &Path,
    ellipsoid: &str,
    shrink: f64,
    sigma_tol: f64,
    emit_off: Option<&Path>,
    no_timings: bool,
) -> CmdResult {
    let mut timings = Timings::new(!no_timings);
    let (inst, input_digest) = read_instance(path)?;
    let source = match ellipsoid {
        "given" => EllipsoidSource::Given,
        "auto" => EllipsoidSource::Auto { shrink },
        other => return Err(format!("unknown ellipsoid source '{other}'").into()),
    };
    timings.lap("load");
    match pipeline::theorem_b(&inst, source, sigma_tol) {
        Ok(out) => {
            timings.lap("pipeline");
            if let Some(off_path) = emit_off {
                emit_truncated_cells(&inst, source, off_path)?;
                timings.lap("emit_off");
            }
            let status = verdict_status(out.length_report.verdict);
            Ok(VerdictDocument {
                command: "theorem-b".into(),
                input_digest,
                parameters: json!({
                    "ellipsoid": ellipsoid,
                    "shrink": shrink,
                    "sigma_tol": sigma_tol,
                }),
                status,
                reports: serde_json::to_value(&out)?,
                timings_ms: timings.finish(),
            })
        }
        Err(pipeline::PipelineError::HypothesisViolated { report }) => Ok(VerdictDocument {
            command: "theorem-b".into(),
            input_digest,
            parameters: json!({
                "ellipsoid": ellipsoid,
                "shrink": shrink,
                "sigma_tol": sigma_tol,
            }),
            status: Status::Fail,
            reports: json!({ "hypothesis_violated": serde_json::to_value(&report)? }),
            timings_ms: timings.finish(),
        }),
        Err(e) => Err(e.into()),
    }
}

fn emit_truncated_cells(
    inst: &Instance,
    source: EllipsoidSource,
    off_path: &Path,
) -> Result<(), Box<dyn std::error::Error>> {
    let cellulation = pipeline::validated_cellulation(inst)?;
    let ellipsoid = match source {
        EllipsoidSource::Given => {
            Ellipsoid::from_json(inst.ellipsoid.as_ref().ok_or("instance has no ellipsoid")?)
        }
        EllipsoidSource::Auto { shrink } => fit_quadric(&cellulation.mesh.vertices)?
            .ellipsoid
            .shrink(shrink)?,
    };
    let map = ellipsoid.normalize_to_ball();
    let normalized = pipeline::transform_cellulation(&cellulation, &map)?;
    let tri = triangulate_cellulation(&normalized)?;
    let mut polys = Vec::new();
    for ci in 0..tri.cells().len() {
        let s = polyrigid_core::angleopt::cell_simplex(&tri, ci)?;
        polys.push(truncate(&s)?.polytope);
    }
    std::fs::write(off_path, write_off_polytopes(&polys))?;
    Ok(())
}

pub fn check_euclidean(path: &Path, sigma_tol: f64, no_timings: bool) -> CmdResult {
    let mut timings = Timings::new(!no_timings);
    let (inst, input_digest) = read_instance(path)?;
    timings.lap("load");
    let report = pipeline::check_euclidean(&inst, sigma_tol)?;
    timings.lap("verdict");
    Ok(VerdictDocument {
        command: "check-euclidean".into(),
        input_digest,
        parameters: json!({ "sigma_tol": sigma_tol }),
        status: verdict_status(report.verdict),
        reports: serde_json::to_value(&report)?,
        timings_ms: timings.finish(),
    })
}

pub fn validate(path: &Path, no_timings: bool) -> CmdResult {
    let mut timings = Timings::new(!no_timings);
    let (inst, input_digest) = read_instance(path)?;
    let mesh = validate_mesh(instance_mesh(&inst))?;
    timings.lap("mesh");
    let mut reports = json!({
        "mesh": {
            "vertices": mesh.vertices.len(),
            "edges": mesh.edges().len(),
            "triangles": mesh.triangles.len(),
            "euler_characteristic": 2,
            "enclosed_volume": mesh.enclosed_volume(),
        }
    });
    if let Some(cells) = &inst.cells {
        let cellulation = polyrigid_core::mesh::validate_cellulation(&mesh, cells)?;
        reports["cellulation"] = json!({
            "cells": cellulation.cells.len(),
            "cell_edges": cellulation.cell_edges().len(),
            "total_cell_volume": cellulation.total_cell_volume(),
        });
        timings.lap("cellulation");
    }
    Ok(VerdictDocument {
        command: "validate".into(),
        input_digest,
        parameters: Value::Null,
        status: Status::Pass,
        reports,
        timings_ms: timings.finish(),
    })
}

pub fn triangulate(path: &Path, no_timings: bool) -> CmdResult {
    let mut timings = Timings::new(!no_timings);
    let (inst, input_digest) = read_instance(path)?;
    let cellulation = pipeline::validated_cellulation(&inst)?;
    let before = cellulation.total_cell_volume();
    let tri = triangulate_cellulation(&cellulation)?;
    timings.lap("triangulate");
    Ok(VerdictDocument {
        command: "triangulate".into(),
        input_digest,
        parameters: Value::Null,
        status: Status::Pass,
        reports: json!({
            "tetrahedra": tri.tetrahedra(),
            "volume_before": before,
            "volume_after": tri.total_cell_volume(),
        }),
        timings_ms: timings.finish(),
    })
}

pub fn volume(path: &Path, tol: f64, emit_off: Option<&Path>, no_timings: bool) -> CmdResult {
    let mut timings = Timings::new(!no_timings);
    let (inst, input_digest) = read_instance(path)?;
    let tri = validated_triangulation(&inst)?;
    let hyper = hyperideal_check(&tri);
    if !hyper.pass {
        return Ok(VerdictDocument {
            command: "volume".into(),
            input_digest,
            parameters: json!({ "tol": tol }),
            status: Status::Fail,
            reports: json!({ "hyperideal": serde_json::to_value(&hyper)? }),
            timings_ms: timings.finish(),
        });
    }
    timings.lap("validate");
    let mut per_cell = Vec::new();
    let mut total = 0.0;
    let mut polys = Vec::new();
    for ci in 0..tri.cells().len() {
        let s = polyrigid_core::angleopt::cell_simplex(&tri, ci)?;
        let v = simplex_volume(&s, tol)?;
        per_cell.push(v);
        total += v;
        if emit_off.is_some() {
            polys.push(truncate(&s)?.polytope);
        }
    }
    timings.lap("quadrature");
    if let Some(off_path) = emit_off {
        std::fs::write(off_path, write_off_polytopes(&polys))?;
    }
    Ok(VerdictDocument {
        command: "volume".into(),
        input_digest,
        parameters: json!({ "tol": tol }),
        status: Status::Pass,
        reports: json!({
            "cell_volumes": per_cell,
            "total_volume": total,
        }),
        timings_ms: timings.finish(),
    })
}

pub fn schlafli_test(
    path: &Path,
    step: f64,
    level: usize,
    seed: u64,
    no_timings: bool,
) -> CmdResult {
    let mut timings = Timings::new(!no_timings);
    let (inst, input_digest) = read_instance(path)?;
    let tri = validated_triangulation(&inst)?;
    let mut rng = SplitMix64::new(seed);
    let mut cells = Vec::new();
    let mut pass = true;
    for ci in 0..tri.cells().len() {
        let s = polyrigid_core::angleopt::cell_simplex(&tri, ci)?;
        let mut direction = [0.0; 6];
        for d in direction.iter_mut() {
            *d = rng.range(-1.0, 1.0);
        }
        let norm: f64 = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        for d in direction.iter_mut() {
            *d /= norm;
        }
        let r1 = schlafli_residual(&s, &direction, step, level)?;
        let r2 = schlafli_residual(&s, &direction, step / 2.0, level)?;
        let ratio = r1 / r2;
        let ok = r1 < 1e-6 && (3.5..=4.5).contains(&ratio);
        pass &= ok;
        cells.push(json!({
            "cell": ci,
            "residual": r1,
            "residual_half_step": r2,
            "ratio": ratio,
            "pass": ok,
        }));
    }
    timings.lap("residuals");
    Ok(VerdictDocument {
        command: "schlafli-test".into(),
        input_digest,
        parameters: json!({ "step": step, "level": level, "seed": seed }),
        status: if pass { Status::Pass } else { Status::Fail },
        reports: json!({ "cells": cells }),
        timings_ms: timings.finish(),
    })
}

pub fn angle_solve(path: &Path, perturb: f64, seed: u64, tol: f64, no_timings: bool) -> CmdResult {
    let mut timings = Timings::new(!no_timings);
    let (inst, input_digest) = read_instance(path)?;
    let tri = validated_triangulation(&inst)?;
    let theta0 = base_point(&tri)?;
    let alpha = edge_sums(&tri, &theta0)?;
    timings.lap("base_point");

    let start = if perturb > 0.0 {
        // in-fiber perturbation: a combination of null-space directions
        let map = EdgeMap::new(&tri);
        let f = map.matrix(tri.cells().len());
        let mut rng = SplitMix64::new(seed);
        let raw = nalgebra::DVector::from_iterator(
            theta0.dim(),
            (0..theta0.dim()).map(|_| rng.range(-1.0, 1.0)),
        );
        // project onto the null space of F
        let svd = f.clone().svd(true, true);
        let correction = svd.solve(&(&f * &raw), 1e-12).map_err(|e| e.to_string())?;
        let mut dir = raw - correction;
        let n = dir.norm();
        if n > 0.0 {
            dir /= n;
        }
        polyrigid_core::angleopt::AngleAssignment::from_flat(&(theta0.flatten() + dir * perturb))
    } else {
        theta0.clone()
    };

    let result = maximize_on_fiber(&tri, &alpha, &start)?;
    timings.lap("maximize");
    let vol = total_volume(&tri, &result.theta, tol)?;
    let crit = criticality_residual(&tri, &result.theta)?;
    timings.lap("volume");
    let theta_c: Vec<Vec<f64>> = result.theta.0.iter().map(|a| a.0.to_vec()).collect();
    Ok(VerdictDocument {
        command: "angle-solve".into(),
        input_digest,
        parameters: json!({ "perturb": perturb, "seed": seed, "tol": tol }),
        status: Status::Pass,
        reports: json!({
            "theta_c": theta_c,
            "volume": vol,
            "gradient_norm": result.grad_norm,
            "criticality_residual": crit,
            "iterations": result.iterations,
        }),
        timings_ms: timings.finish(),
    })
}

pub fn pogorelov_test(samples: usize, seed: u64, step: f64, no_timings: bool) -> CmdResult {
    let mut timings = Timings::new(!no_timings);
    let mut rng = SplitMix64::new(seed);
    let gens = so31_generators();

    let sample_chart_point = |rng: &mut SplitMix64| -> Vector3<f64> {
        loop {
            let v = Vector3::new(
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            );
            if v.norm() > 0.1 {
                let r = rng.range(1.05, 4.0);
                return v / v.norm() * r;
            }
        }
    };

    // forward: de Sitter Killing generators push to Euclidean fields
    // with vanishing metric Lie derivative
    let mut forward = Vec::new();
    let mut pass = true;
    for (gi, gen) in gens.iter().enumerate() {
        let field = move |p: &Vector3<f64>| -> Option<Vector3<f64>> {
            if p.norm() <= 1.0 + 1e-9 {
                return None;
            }
            let base = DeSitterPoint::from_chart(&KleinPoint(*p)).ok()?;
            let tangent = desitter_killing(gen, &base).ok()?;
            Some(pogorelov_push(&tangent).1)
        };
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = sample_chart_point(&mut rng);
            let a = Vector3::new(
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            );
            let b = Vector3::new(
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            );
            let r = lie_derivative_euclidean(&field, &x, &a, &b, step * x.norm())?;
            worst = worst.max(r.abs());
        }
        pass &= worst < 1e-7;
        forward.push(json!({ "generator": gi, "max_residual": worst }));
    }
    timings.lap("forward");

    // backward: Euclidean Killing fields pull to de Sitter fields with
    // vanishing Lie derivative
    let mut backward = Vec::new();
    for gi in 0..6 {
        let field = move |x: &DeSitterPoint| -> Option<MinkowskiVec> {
            let chart = phi_s(x);
            let u = if gi < 3 {
                let mut a = Vector3::zeros();
                a[gi] = 1.0;
                a
            } else {
                let mut b = Vector3::zeros();
                b[gi - 3] = 1.0;
                b.cross(&chart.0)
            };
            pogorelov_pull(&chart, &u).ok().map(|t| t.vec)
        };
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let p = sample_chart_point(&mut rng);
            let x = DeSitterPoint::from_chart(&KleinPoint(p)).map_err(|e| e.to_string())?;
            let mk = |raw: MinkowskiVec| -> MinkowskiVec {
                let inner = mink_inner(&raw, &x.coords());
                MinkowskiVec(raw.0 - x.coords().0 * inner)
            };
            let a = mk(MinkowskiVec::new(
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            ));
            let b = mk(MinkowskiVec::new(
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            ));
            let r = lie_derivative_desitter(&field, &x, &a, &b, step)?;
            worst = worst.max(r.abs());
        }
        pass &= worst < 1e-7;
        backward.push(json!({ "generator": gi, "max_residual": worst }));
    }
    timings.lap("backward");

    // proportionality of the metric Lie derivatives for a non-Killing
    // radial field f(rho) N with f = rho
    let field = |x: &DeSitterPoint| -> Option<MinkowskiVec> {
        let n = x.radial_vector();
        Some(MinkowskiVec(n.0 * x.rho()))
    };
    let mut eq_samples = Vec::new();
    for _ in 0..20 {
        let p = sample_chart_point(&mut rng);
        let x = DeSitterPoint::from_chart(&KleinPoint(p)).map_err(|e| e.to_string())?;
        let mk = |raw: MinkowskiVec| -> MinkowskiVec {
            let inner = mink_inner(&raw, &x.coords());
            MinkowskiVec(raw.0 - x.coords().0 * inner)
        };
        let a = mk(MinkowskiVec::new(
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
        ));
        let b = mk(MinkowskiVec::new(
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
        ));
        eq_samples.push((x, a, b));
    }
    let (_, max_rel) = verify_eq_pogo(&field, &eq_samples, step)?;
    pass &= max_rel < 1e-4;
    timings.lap("proportionality");

    // sphere forms: I and II scale by sinh^2(rho) between matched
    // spheres
    let mut spheres = Vec::new();
    for t in [1.5, 2.0, 3.0] {
        let x =
            DeSitterPoint::from_chart(&KleinPoint::new(t, 0.0, 0.0)).map_err(|e| e.to_string())?;
        let rho = x.rho();
        let scale = rho.sinh().powi(2);
        // two lateral tangents (u4 = 0, orthogonal to the spatial ray)
        let u1 = MinkowskiVec::new(0.0, 1.0, 0.0, 0.0);
        let u2 = MinkowskiVec::new(0.0, 0.3, 1.0, 0.0);
        let mut worst: f64 = 0.0;
        for (a, b) in [(u1, u1), (u1, u2), (u2, u2)] {
            let (i_rho, ii_rho) = desitter_sphere_forms(&x, &a, &b);
            let abar = dphi_s(&x, &a);
            let bbar = dphi_s(&x, &b);
            let (i_t, ii_t) = euclidean_sphere_forms(&phi_s(&x).0, &abar, &bbar);
            worst = worst.max((i_rho - scale * i_t).abs());
            worst = worst.max((ii_rho - scale * ii_t).abs());
        }
        pass &= worst < 1e-9;
        spheres.push(json!({ "t": t, "sinh2_rho": scale, "max_deviation": worst }));
    }
    timings.lap("spheres");

    Ok(VerdictDocument {
        command: "pogorelov-test".into(),
        input_digest: "none".into(),
        parameters: json!({ "samples": samples, "seed": seed, "step": step }),
        status: if pass { Status::Pass } else { Status::Fail },
        reports: json!({
            "forward_killing": forward,
            "backward_killing": backward,
            "proportionality_max_rel_error": max_rel,
            "sphere_forms": spheres,
        }),
        timings_ms: timings.finish(),
    })
}

pub fn fit_ellipsoid(path: &Path, shrink: Option<f64>, no_timings: bool) -> CmdResult {
    let mut timings = Timings::new(!no_timings);
    let bytes = std::fs::read(path)?;
    let input_digest = digest(&bytes);
    let mesh: SurfaceMesh = if path.extension().is_some_and(|e| e == "off") {
        load_mesh(&bytes, MeshFormat::Off)?
    } else {
        load_mesh(&bytes, MeshFormat::Json)?
    };
    let report = fit_quadric(&mesh.vertices)?;
    timings.lap("fit");
    let mut reports = json!({
        "ellipsoid": report.ellipsoid.to_json(),
        "max_residual": report.max_residual,
    });
    if let Some(factor) = shrink {
        reports["shrunk"] = serde_json::to_value(report.ellipsoid.shrink(factor)?.to_json())?;
    }
    Ok(VerdictDocument {
        command: "fit-ellipsoid".into(),
        input_digest,
        parameters: json!({ "shrink": shrink }),
        status: Status::Pass,
        reports,
        timings_ms: timings.finish(),
    })
}
