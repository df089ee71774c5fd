//! ASCII OFF reader and writer.
//!
//! Reads the standard layout: an `OFF` header line, a counts line
//! `V F E`, `V` vertex lines, `F` face lines. Only triangular faces are
//! accepted on input; the writer emits general polygons (used for
//! truncated-polytope export).

use nalgebra::Vector3;

use crate::error::MeshError;
use crate::polytope::ConvexPolytope;

use super::SurfaceMesh;

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses an ASCII OFF byte stream into an (unvalidated) mesh.
pub fn parse_off(source: &[u8]) -> Result<SurfaceMesh, MeshError> {
    let text = std::str::from_utf8(source).map_err(|e| parse_err(0, e.to_string()))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = lines.next().ok_or_else(|| parse_err(0, "empty file"))?;
    let mut counts_tokens: Vec<&str> = Vec::new();
    if let Some(rest) = header.strip_prefix("OFF") {
        let rest = rest.trim();
        if !rest.is_empty() {
            counts_tokens = rest.split_whitespace().collect();
        }
    } else {
        return Err(parse_err(ln, "missing OFF header"));
    }
    let (counts_line, counts) = if counts_tokens.is_empty() {
        let (n, l) = lines
            .next()
            .ok_or_else(|| parse_err(ln, "missing counts line"))?;
        (n, l.split_whitespace().collect::<Vec<_>>())
    } else {
        (ln, counts_tokens)
    };
    if counts.len() < 2 {
        return Err(parse_err(
            counts_line,
            "counts line needs vertex and face counts",
        ));
    }
    let nv: usize = counts[0]
        .parse()
        .map_err(|_| parse_err(counts_line, "bad vertex count"))?;
    let nf: usize = counts[1]
        .parse()
        .map_err(|_| parse_err(counts_line, "bad face count"))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = lines
            .next()
            .ok_or_else(|| parse_err(counts_line, "unexpected end of file in vertex list"))?;
        let coords: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| parse_err(n, "bad vertex coordinate"))?;
        if coords.len() != 3 {
            return Err(parse_err(n, "vertex line must have 3 coordinates"));
        }
        vertices.push(Vector3::new(coords[0], coords[1], coords[2]));
    }

    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (n, l) = lines
            .next()
            .ok_or_else(|| parse_err(counts_line, "unexpected end of file in face list"))?;
        let fields: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| parse_err(n, "bad face index"))?;
        if fields.is_empty() || fields[0] + 1 != fields.len() {
            return Err(parse_err(n, "face line count mismatch"));
        }
        if fields[0] != 3 {
            return Err(parse_err(n, "only triangular faces are supported"));
        }
        triangles.push([fields[1], fields[2], fields[3]]);
    }

    Ok(SurfaceMesh {
        vertices,
        triangles,
    })
}

/// Writes one or more convex polytopes (polygonal facets) as a single
/// OFF object with concatenated vertex tables.
pub fn write_off_polytopes(polytopes: &[ConvexPolytope]) -> String {
    let nv: usize = polytopes.iter().map(|p| p.vertices.len()).sum();
    let nf: usize = polytopes.iter().map(|p| p.facets.len()).sum();
    let mut out = String::new();
    out.push_str("OFF\n");
    out.push_str(&format!("{nv} {nf} 0\n"));
    for p in polytopes {
        for v in &p.vertices {
            out.push_str(&format!("{:.17} {:.17} {:.17}\n", v.x, v.y, v.z));
        }
    }
    let mut offset = 0;
    for p in polytopes {
        for f in &p.facets {
            out.push_str(&f.len().to_string());
            for &i in f {
                out.push_str(&format!(" {}", i + offset));
            }
            out.push('\n');
        }
        offset += p.vertices.len();
    }
    out
}
