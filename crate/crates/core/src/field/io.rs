//! Binary field files (`.field`).
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! offset  size        content
//! 0       8           magic "SPDFLD01"
//! 8       4  (u32)    n, matrix dimension (2 or 3)
//! 12      4  (u32)    d, number of grid axes (1 or 2)
//! 16      8*d (u64)   grid dims N_1 .. N_d
//! ..      8*J (f64)   cell weights mu_j, J = N_1 * .. * N_d, row-major
//! ..      8*J*n(n+1)/2 (f64)
//!                     per cell, row-major cell order: upper triangle of the
//!                     matrix in row-major order, e.g. g00 g01 g11 for n = 2
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{MeasureGrid, MetricField};
use crate::spd::{packed_len, SpdMatrix};

pub const MAGIC: &[u8; 8] = b"SPDFLD01";

pub fn write_field<W: Write>(mut w: W, field: &MetricField) -> Result<()> {
    let grid = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(field.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.dims().len() as u32).to_le_bytes())?;
    for &d in grid.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for &mu in grid.weights() {
        w.write_all(&mu.to_le_bytes())?;
    }
    for v in field.values() {
        for &x in v.upper() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_field<R: Read>(mut r: R) -> Result<MetricField> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, not a field file".into()));
    }
    let n = read_u32(&mut r)? as usize;
    if n != 2 && n != 3 {
        return Err(Error::Format(format!("matrix dimension {n} unsupported")));
    }
    let ndims = read_u32(&mut r)? as usize;
    if ndims == 0 || ndims > 2 {
        return Err(Error::Format(format!("grid with {ndims} axes unsupported")));
    }
    let mut dims = Vec::with_capacity(ndims);
    for _ in 0..ndims {
        let d = read_u64(&mut r)?;
        if d == 0 || d > 1 << 24 {
            return Err(Error::Format(format!("grid axis of length {d}")));
        }
        dims.push(d as usize);
    }
    let cells: usize = dims.iter().product();
    let weights = (0..cells)
        .map(|_| read_f64(&mut r))
        .collect::<Result<Vec<_>>>()?;
    let grid =
        MeasureGrid::with_weights(&dims, weights).map_err(|e| Error::Format(e.to_string()))?;
    let mut upper = vec![0.0; packed_len(n)];
    let mut values = Vec::with_capacity(cells);
    for j in 0..cells {
        for x in upper.iter_mut() {
            *x = read_f64(&mut r)?;
        }
        values.push(
            SpdMatrix::from_upper(n, &upper)
                .map_err(|e| Error::Format(format!("cell {j}: {e}")))?,
        );
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after the last cell".into()));
    }
    MetricField::new(Arc::new(grid), values)
}

pub fn save_field(path: impl AsRef<Path>, field: &MetricField) -> Result<()> {
    write_field(BufWriter::new(File::create(path)?), field)
}

pub fn load_field(path: impl AsRef<Path>) -> Result<MetricField> {
    read_field(BufReader::new(File::open(path)?))
}
