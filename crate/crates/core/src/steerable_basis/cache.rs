//! `FBB1` basis cache container, little-endian:
//!
//! ```text
//! magic      b"FBB1"
//! grid_size  u32
//! c          f64          disk radius in pixels
//! m          u32          stored (k >= 0) columns
//! rows       u32          in-disk pixels
//! k[m]       u32
//! q[m]       u32
//! roots[m]   f64          R_{k,q}
//! norms[m]   f64          N_{k,q}
//! pixel[rows] u32         row-major linear pixel index of each matrix row
//! psi[rows][m]  f64 re, f64 im   orthonormalized sample matrix, row-major
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;
use num_complex::Complex;

use super::basis::FourierBesselBasis;
use super::coeffs::CoeffIndex;
use crate::{Error, Result};

pub const BASIS_MAGIC: &[u8; 4] = b"FBB1";

pub fn write_basis<W: Write>(basis: &FourierBesselBasis, mut w: W) -> Result<()> {
    let m = basis.len();
    let rows = basis.pixels().len();
    w.write_all(BASIS_MAGIC)?;
    w.write_u32::<LE>(basis.grid_size() as u32)?;
    w.write_f64::<LE>(basis.disk_radius())?;
    w.write_u32::<LE>(m as u32)?;
    w.write_u32::<LE>(rows as u32)?;
    for &k in basis.angular_index() {
        w.write_u32::<LE>(k)?;
    }
    for &q in basis.radial_index() {
        w.write_u32::<LE>(q)?;
    }
    for &r in basis.bessel_roots() {
        w.write_f64::<LE>(r)?;
    }
    for &n in basis.normalizers() {
        w.write_f64::<LE>(n)?;
    }
    for &p in basis.pixels() {
        w.write_u32::<LE>(p as u32)?;
    }
    let psi = basis.sample_matrix();
    for r in 0..rows {
        for c in 0..m {
            w.write_f64::<LE>(psi[(r, c)].re)?;
            w.write_f64::<LE>(psi[(r, c)].im)?;
        }
    }
    Ok(())
}

pub fn read_basis<R: Read>(mut r: R) -> Result<FourierBesselBasis> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != BASIS_MAGIC {
        return Err(Error::Format(format!("bad basis magic {magic:?}")));
    }
    let grid_size = r.read_u32::<LE>()? as usize;
    let disk_radius = r.read_f64::<LE>()?;
    let m = r.read_u32::<LE>()? as usize;
    let rows = r.read_u32::<LE>()? as usize;
    if grid_size == 0 || rows > grid_size * grid_size {
        return Err(Error::Format("inconsistent basis header".into()));
    }
    let read_u32s = |r: &mut R, n: usize| -> Result<Vec<u32>> {
        (0..n).map(|_| r.read_u32::<LE>().map_err(Error::from)).collect()
    };
    let read_f64s = |r: &mut R, n: usize| -> Result<Vec<f64>> {
        (0..n).map(|_| r.read_f64::<LE>().map_err(Error::from)).collect()
    };
    let ks = read_u32s(&mut r, m)?;
    let qs = read_u32s(&mut r, m)?;
    let roots = read_f64s(&mut r, m)?;
    let norms = read_f64s(&mut r, m)?;
    let pixels: Vec<usize> = read_u32s(&mut r, rows)?.into_iter().map(|p| p as usize).collect();
    let mut psi = DMatrix::zeros(rows, m);
    for row in 0..rows {
        for col in 0..m {
            let re = r.read_f64::<LE>()?;
            let im = r.read_f64::<LE>()?;
            psi[(row, col)] = Complex::new(re, im);
        }
    }
    FourierBesselBasis::from_parts(grid_size, disk_radius, CoeffIndex::new(ks, qs)?, roots, norms, pixels, psi)
}
