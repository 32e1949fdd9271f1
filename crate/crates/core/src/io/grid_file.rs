use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::Vector3;

use crate::error::IoError;
use crate::levelset::LevelSetGrid;
use crate::real::Real;

/// Leading bytes of a grid file.
pub const GRID_MAGIC: &[u8; 4] = b"LSG1";

/// Little-endian: magic, dims as 3×u64, origin as 3×f64, step as f64, then
/// the values as f64 with x fastest.
pub fn write_grid<T: Real>(grid: &LevelSetGrid<T>, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        w.write_all(GRID_MAGIC)?;
        for d in grid.dims {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for k in 0..3 {
            w.write_all(&grid.origin[k].as_f64().to_le_bytes())?;
        }
        w.write_all(&grid.step.as_f64().to_le_bytes())?;
        for v in &grid.values {
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
        w.flush()
    };
    body().map_err(|e| IoError::io(path, e))
}

pub fn read_grid<T: Real>(path: &Path) -> Result<LevelSetGrid<T>, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    let mut r = BufReader::new(file);
    let truncated = |e: std::io::Error| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            IoError::format(path, "truncated grid file")
        } else {
            IoError::io(path, e)
        }
    };
    let mut word = [0u8; 8];
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != GRID_MAGIC {
        return Err(IoError::format(path, "not a level-set grid (bad magic)"));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        r.read_exact(&mut word).map_err(truncated)?;
        *d = usize::try_from(u64::from_le_bytes(word))
            .map_err(|_| IoError::format(path, "grid dimension does not fit in memory"))?;
    }
    let mut f = || -> Result<f64, IoError> {
        r.read_exact(&mut word).map_err(truncated)?;
        Ok(f64::from_le_bytes(word))
    };
    let origin = Vector3::new(T::lit(f()?), T::lit(f()?), T::lit(f()?));
    let step = T::lit(f()?);
    if dims.iter().any(|&d| d < 2) || !(step > T::zero()) {
        return Err(IoError::format(path, "grid needs at least 2 nodes per axis and a positive step"));
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| IoError::format(path, "grid node count overflows"))?;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        values.push(T::lit(f()?));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| IoError::io(path, e))? != 0 {
        return Err(IoError::format(path, "trailing bytes after grid values"));
    }
    Ok(LevelSetGrid {
        origin,
        step,
        dims,
        values,
    })
}
