//! Small convex-polytope toolkit: hull facets of a point set and
//! halfspace intersection with vertex enumeration.
//!
//! Cells and truncated simplices in this crate are tiny (a handful of
//! facets), so both problems are solved by plane / triple enumeration
//! rather than incremental algorithms. All tests are tolerance-based;
//! exact predicates are out of scope.

use nalgebra::{Matrix3, Vector3};

/// Closed halfspace `{x : n . x <= c}` with unit normal `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfspace {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vector3<f64>, offset: f64) -> Self {
        let s = normal.norm();
        Self {
            normal: normal / s,
            offset: offset / s,
        }
    }

    /// Signed distance of `x` to the boundary plane (positive outside).
    pub fn eval(&self, x: &Vector3<f64>) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

/// Convex polytope described by its vertices and facet cycles.
/// `facets[k]` lists vertex indices in cyclic order; `planes[k]` is the
/// supporting halfspace of that facet (outward normal).
#[derive(Debug, Clone)]
pub struct ConvexPolytope {
    pub vertices: Vec<Vector3<f64>>,
    pub facets: Vec<Vec<usize>>,
    pub planes: Vec<Halfspace>,
}

impl ConvexPolytope {
    /// Euclidean volume by coning the facet fans from the vertex mean.
    pub fn volume(&self) -> f64 {
        let centroid = self.vertex_mean();
        let mut vol = 0.0;
        for facet in &self.facets {
            for k in 1..facet.len() - 1 {
                let a = self.vertices[facet[0]] - centroid;
                let b = self.vertices[facet[k]] - centroid;
                let c = self.vertices[facet[k + 1]] - centroid;
                vol += a.dot(&b.cross(&c)).abs() / 6.0;
            }
        }
        vol
    }

    /// Euclidean area of facet `k`.
    pub fn facet_area(&self, k: usize) -> f64 {
        let f = &self.facets[k];
        let mut area = 0.0;
        for i in 1..f.len() - 1 {
            let a = self.vertices[f[i]] - self.vertices[f[0]];
            let b = self.vertices[f[i + 1]] - self.vertices[f[0]];
            area += a.cross(&b).norm() / 2.0;
        }
        area
    }

    pub fn vertex_mean(&self) -> Vector3<f64> {
        self.vertices.iter().sum::<Vector3<f64>>() / self.vertices.len() as f64
    }

    /// Undirected vertex-index edges, each listed once.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = std::collections::BTreeSet::new();
        for f in &self.facets {
            for i in 0..f.len() {
                let a = f[i];
                let b = f[(i + 1) % f.len()];
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.into_iter().collect()
    }
}

/// Orders coplanar points into a convex cycle around their mean, using
/// the plane normal to fix the turning direction.
fn order_cycle(points: &[Vector3<f64>], idx: &[usize], normal: &Vector3<f64>) -> Vec<usize> {
    let mean: Vector3<f64> =
        idx.iter().map(|&i| points[i]).sum::<Vector3<f64>>() / idx.len() as f64;
    // in-plane frame
    let seed = points[idx[0]] - mean;
    let u = (seed - normal * seed.dot(normal)).normalize();
    let v = normal.cross(&u);
    let mut order: Vec<usize> = idx.to_vec();
    order.sort_by(|&a, &b| {
        let pa = points[a] - mean;
        let pb = points[b] - mean;
        let ta = pa.dot(&v).atan2(pa.dot(&u));
        let tb = pb.dot(&v).atan2(pb.dot(&u));
        ta.partial_cmp(&tb).unwrap()
    });
    order
}

/// Facet structure of the convex hull of a full-dimensional point set.
///
/// Every supporting plane through three points with all others on one
/// side becomes a facet, collecting all points on it. Returns `None`
/// when the set is degenerate (fewer than 4 points, coplanar, or some
/// listed point is not a hull vertex).
pub fn hull_facets(points: &[Vector3<f64>], eps: f64) -> Option<ConvexPolytope> {
    let n = points.len();
    if n < 4 {
        return None;
    }
    let mut planes: Vec<Halfspace> = Vec::new();
    let mut facets: Vec<Vec<usize>> = Vec::new();

    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let a = points[j] - points[i];
                let b = points[k] - points[i];
                let m = a.cross(&b);
                if m.norm() <= eps {
                    continue;
                }
                let m = m.normalize();
                let c = m.dot(&points[i]);
                let evals: Vec<f64> = points.iter().map(|p| m.dot(p) - c).collect();
                let above = evals.iter().any(|&e| e > eps);
                let below = evals.iter().any(|&e| e < -eps);
                let sign = match (above, below) {
                    (true, true) => continue,      // not supporting
                    (false, true) => 1.0,          // all on or below: outward = +m
                    (true, false) => -1.0,         // all on or above: outward = -m
                    (false, false) => return None, // all coplanar
                };
                let hs = Halfspace::new(m * sign, c * sign);
                if planes.iter().any(|p| {
                    (p.normal - hs.normal).norm() < 1e-7
                        && (p.offset - hs.offset).abs() < eps.max(1e-9)
                }) {
                    continue;
                }
                let on: Vec<usize> = (0..n).filter(|&t| evals[t].abs() <= eps).collect();
                if on.len() < 3 {
                    continue;
                }
                facets.push(order_cycle(points, &on, &hs.normal));
                planes.push(hs);
            }
        }
    }
    if facets.len() < 4 {
        return None;
    }
    // every listed point must appear on some facet, i.e. be a hull vertex
    let mut seen = vec![false; n];
    for f in &facets {
        for &i in f {
            seen[i] = true;
        }
    }
    if seen.iter().any(|&s| !s) {
        return None;
    }
    Some(ConvexPolytope {
        vertices: points.to_vec(),
        facets,
        planes,
    })
}

/// Bounded intersection of halfspaces by triple enumeration.
///
/// Solves every 3-plane system, keeps solutions satisfying all
/// constraints within `eps`, deduplicates, and rebuilds the facet
/// cycles. Returns the (possibly lower-dimensional) vertex list and,
/// when the result is full-dimensional, its facet structure.
pub fn halfspace_intersection(halfspaces: &[Halfspace], eps: f64) -> Vec<Vector3<f64>> {
    let m = halfspaces.len();
    let mut vertices: Vec<Vector3<f64>> = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                let a = Matrix3::from_rows(&[
                    halfspaces[i].normal.transpose(),
                    halfspaces[j].normal.transpose(),
                    halfspaces[k].normal.transpose(),
                ]);
                let b = Vector3::new(
                    halfspaces[i].offset,
                    halfspaces[j].offset,
                    halfspaces[k].offset,
                );
                let det = a.determinant();
                if det.abs() < 1e-12 {
                    continue;
                }
                let Some(x) = a.lu().solve(&b) else { continue };
                if halfspaces.iter().all(|h| h.eval(&x) <= eps)
                    && !vertices
                        .iter()
                        .any(|v| (v - x).norm() < 10.0 * eps.max(1e-12))
                {
                    vertices.push(x);
                }
            }
        }
    }
    vertices
}

/// Full polytope (vertices + facets) from a halfspace description.
/// Returns `None` if the intersection is empty or not full-dimensional.
pub fn polytope_from_halfspaces(halfspaces: &[Halfspace], eps: f64) -> Option<ConvexPolytope> {
    let vertices = halfspace_intersection(halfspaces, eps);
    if vertices.len() < 4 {
        return None;
    }
    hull_facets(&vertices, eps)
}
