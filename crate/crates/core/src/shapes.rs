//! Canonical problem instances: octahedra, bumped octahedra, subdivided
//! cubes, bipyramids and regular simplices at a given scale.
//!
//! These are the reference configurations exercised by the test suites
//! and the CLI examples; all of them are built with exact coordinates
//! so results are reproducible bit-for-bit.

use nalgebra::Vector3;

use crate::hyp::KleinPoint;
use crate::mesh::{Ellipsoid, Instance};
use crate::simplex::HyperidealSimplex;

/// Octahedron with vertices at distance `d` on the coordinate axes,
/// cellulated into 4 tetrahedra around the x-axis diagonal, with the
/// unit sphere attached as the ellipsoid.
///
/// Vertex order: `+x, -x, +y, -y, +z, -z`.
pub fn octahedron_instance(d: f64) -> Instance {
    let vertices = vec![
        [d, 0.0, 0.0],
        [-d, 0.0, 0.0],
        [0.0, d, 0.0],
        [0.0, -d, 0.0],
        [0.0, 0.0, d],
        [0.0, 0.0, -d],
    ];
    let triangles = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    // four wedges around the x-axis diagonal (0, 1)
    let cells = vec![
        vec![0, 1, 2, 4],
        vec![0, 1, 4, 3],
        vec![0, 1, 3, 5],
        vec![0, 1, 5, 2],
    ];
    Instance {
        vertices,
        triangles,
        cells: Some(cells),
        ellipsoid: Some(Ellipsoid::unit_sphere().to_json()),
    }
}

/// Octahedron at distance `d` with the `(+x, +y, +z)` face replaced by
/// a three-triangle bump to an apex at `apex_norm * (1,1,1)/sqrt(3)`.
/// Non-convex for tall enough bumps; cellulated as the four octahedron
/// tetrahedra plus the bump tetrahedron.
pub fn bumped_octahedron_instance(d: f64, apex_norm: f64) -> Instance {
    let mut inst = octahedron_instance(d);
    let s = apex_norm / 3.0f64.sqrt();
    inst.vertices.push([s, s, s]); // index 6
                                   // replace face (0, 2, 4) by the bump
    inst.triangles.retain(|t| *t != [0, 2, 4]);
    inst.triangles.push([0, 2, 6]);
    inst.triangles.push([2, 4, 6]);
    inst.triangles.push([4, 0, 6]);
    if let Some(cells) = inst.cells.as_mut() {
        cells.push(vec![0, 2, 4, 6]);
    }
    inst
}

/// Cube `[-1, 1]^3` with the top face subdivided by its coplanar
/// centroid `(0, 0, 1)` (vertex index 8). The added vertex can move
/// normally to the face without changing any edge length to first
/// order, so the mesh is Euclidean-flexible.
pub fn subdivided_cube_instance() -> Instance {
    let vertices = vec![
        [-1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0],
        [1.0, 1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
        [1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0],
        [-1.0, 1.0, 1.0],
        [0.0, 0.0, 1.0],
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
        [4, 5, 8],
        [5, 6, 8],
        [6, 7, 8],
        [7, 4, 8],
    ];
    Instance {
        vertices,
        triangles,
        cells: None,
        ellipsoid: None,
    }
}

/// Triangular bipyramid: equatorial triangle of circumradius `r` in the
/// `z = 0` plane, poles at `(0, 0, +/-c)`, cellulated into the two
/// tetrahedra glued along the equator. Hyperideal for `1 < r < 2` and
/// `c > 1` (with pole edges still crossing the ball).
///
/// Vertex order: three equator vertices, then the two poles.
pub fn bipyramid_instance(r: f64, c: f64) -> Instance {
    let mut vertices = Vec::new();
    for k in 0..3 {
        let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
        vertices.push([r * t.cos(), r * t.sin(), 0.0]);
    }
    vertices.push([0.0, 0.0, c]); // 3: north
    vertices.push([0.0, 0.0, -c]); // 4: south
    let triangles = vec![
        [0, 1, 3],
        [1, 2, 3],
        [2, 0, 3],
        [1, 0, 4],
        [2, 1, 4],
        [0, 2, 4],
    ];
    let cells = vec![vec![0, 1, 2, 3], vec![0, 1, 2, 4]];
    Instance {
        vertices,
        triangles,
        cells: Some(cells),
        ellipsoid: Some(Ellipsoid::unit_sphere().to_json()),
    }
}

/// Regular tetrahedron directions `(1,1,1), (1,-1,-1), (-1,1,-1),
/// (-1,-1,1)` normalized to unit length.
pub fn regular_tetra_directions() -> [Vector3<f64>; 4] {
    let s = 1.0 / 3.0f64.sqrt();
    [
        Vector3::new(s, s, s),
        Vector3::new(s, -s, -s),
        Vector3::new(-s, s, -s),
        Vector3::new(-s, -s, s),
    ]
}

/// Regular hyperideal simplex with vertices at norm `scale`,
/// `1 < scale < sqrt(3)` (edge midpoints sit at norm `scale/sqrt(3)`).
pub fn regular_simplex(scale: f64) -> HyperidealSimplex {
    let dirs = regular_tetra_directions();
    HyperidealSimplex::new([
        KleinPoint(dirs[0] * scale),
        KleinPoint(dirs[1] * scale),
        KleinPoint(dirs[2] * scale),
        KleinPoint(dirs[3] * scale),
    ])
    .expect("regular simplex in the valid scale range")
}

/// Single-cell instance wrapping the regular simplex surface.
pub fn regular_simplex_instance(scale: f64) -> Instance {
    let dirs = regular_tetra_directions();
    let vertices: Vec<[f64; 3]> = dirs
        .iter()
        .map(|d| {
            let v = d * scale;
            [v.x, v.y, v.z]
        })
        .collect();
    let triangles = vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [2, 0, 3]];
    Instance {
        vertices,
        triangles,
        cells: Some(vec![vec![0, 1, 2, 3]]),
        ellipsoid: Some(Ellipsoid::unit_sphere().to_json()),
    }
}
