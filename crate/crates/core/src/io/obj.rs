use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Vector3;

use crate::error::IoError;
use crate::geometry::Pose;
use crate::real::Real;
use crate::surface::TriangleMesh;

/// Writes `v` and `f` records only.
pub fn write_obj<T: Real>(mesh: &TriangleMesh<T>, path: &Path) -> Result<(), IoError> {
    write_posed_obj(mesh, &Pose::identity(), path)
}

/// Writes `mesh` with every vertex mapped through `pose`.
pub fn write_posed_obj<T: Real>(mesh: &TriangleMesh<T>, pose: &Pose<T>, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        for v in &mesh.vertices {
            let p = pose.to_world(v);
            writeln!(w, "v {:?} {:?} {:?}", p.x.as_f64(), p.y.as_f64(), p.z.as_f64())?;
        }
        for t in &mesh.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        w.flush()
    };
    body().map_err(|e| IoError::io(path, e))
}

/// Reads `v` and `f` records; other records are skipped. Polygons are
/// fanned into triangles, `v/vt/vn` references keep the vertex index and
/// negative indices count from the end.
pub fn read_obj<T: Real>(path: &Path) -> Result<TriangleMesh<T>, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| IoError::io(path, e))?;
        let bad = |m: String| IoError::format(path, format!("line {}: {m}", idx + 1));
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let mut c = [T::zero(); 3];
                for slot in &mut c {
                    let text = parts.next().ok_or_else(|| bad("vertex needs three coordinates".into()))?;
                    let v: f64 = text.parse().map_err(|_| bad(format!("bad coordinate `{text}`")))?;
                    *slot = T::lit(v);
                }
                vertices.push(Vector3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut ids = Vec::new();
                for text in parts {
                    let head = text.split('/').next().unwrap_or(text);
                    let i: i64 = head.parse().map_err(|_| bad(format!("bad face index `{text}`")))?;
                    let n = vertices.len() as i64;
                    let resolved = if i > 0 { i - 1 } else { n + i };
                    if i == 0 || resolved < 0 || resolved >= n {
                        return Err(bad(format!("face index {i} out of range")));
                    }
                    ids.push(resolved as usize);
                }
                if ids.len() < 3 {
                    return Err(bad("face needs at least three vertices".into()));
                }
                for k in 1..ids.len() - 1 {
                    triangles.push([ids[0], ids[k], ids[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(TriangleMesh::new(vertices, triangles))
}
