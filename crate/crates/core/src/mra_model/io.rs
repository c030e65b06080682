//! Dataset containers, little-endian, all reals stored as `f64`.
//!
//! ```text
//! MRA2 (2-D):  b"MRA2" version:u32 n:u32 m:u32 L:u32 sigma:f64
//!              k[m]:u32 q[m]:u32 truth[m]:(re,im) rotation[n]:u32 obs[n][m]:(re,im)
//! MRA1 (1-D):  b"MRA1" version:u32 n:u32 len:u32 sigma:f64
//!              truth[len]:f64 shift[n]:u32 signal[n][len]:f64
//! ```

use std::io::{Read, Write};
use std::sync::Arc;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use num_complex::Complex;

use super::{Dataset1D, Dataset2D};
use crate::steerable_basis::{CoeffIndex, SteerableCoeffs};
use crate::{Error, Real, Result};

pub const MAGIC_2D: &[u8; 4] = b"MRA2";
pub const MAGIC_1D: &[u8; 4] = b"MRA1";
const VERSION: u32 = 1;

fn write_complex<W: Write, T: Real>(w: &mut W, z: &Complex<T>) -> Result<()> {
    w.write_f64::<LE>(z.re.as_f64())?;
    w.write_f64::<LE>(z.im.as_f64())?;
    Ok(())
}

fn read_complex<R: Read, T: Real>(r: &mut R) -> Result<Complex<T>> {
    let re = r.read_f64::<LE>()?;
    let im = r.read_f64::<LE>()?;
    Ok(Complex::new(T::of(re), T::of(im)))
}

fn check_header<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<()> {
    let mut got = [0u8; 4];
    r.read_exact(&mut got)?;
    if &got != magic {
        return Err(Error::Format(format!("expected magic {magic:?}, found {got:?}")));
    }
    let version = r.read_u32::<LE>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported container version {version}")));
    }
    Ok(())
}

pub fn write_dataset_2d<W: Write, T: Real>(data: &Dataset2D<T>, mut w: W) -> Result<()> {
    let m = data.truth.len();
    w.write_all(MAGIC_2D)?;
    w.write_u32::<LE>(VERSION)?;
    w.write_u32::<LE>(data.observations.len() as u32)?;
    w.write_u32::<LE>(m as u32)?;
    w.write_u32::<LE>(data.grid_size as u32)?;
    w.write_f64::<LE>(data.noise_sigma.as_f64())?;
    for &k in data.truth.angular_index() {
        w.write_u32::<LE>(k)?;
    }
    for &q in data.truth.radial_index() {
        w.write_u32::<LE>(q)?;
    }
    for z in data.truth.values() {
        write_complex(&mut w, z)?;
    }
    for &l in &data.rotations {
        w.write_u32::<LE>(l as u32)?;
    }
    for obs in &data.observations {
        if !obs.same_index(&data.truth) {
            return Err(Error::IndexMismatch);
        }
        for z in obs.values() {
            write_complex(&mut w, z)?;
        }
    }
    Ok(())
}

pub fn read_dataset_2d<R: Read, T: Real>(mut r: R) -> Result<Dataset2D<T>> {
    check_header(&mut r, MAGIC_2D)?;
    let n = r.read_u32::<LE>()? as usize;
    let m = r.read_u32::<LE>()? as usize;
    let grid_size = r.read_u32::<LE>()? as usize;
    let sigma = r.read_f64::<LE>()?;
    if grid_size == 0 {
        return Err(Error::Format("rotation grid of size 0".into()));
    }
    let ks = (0..m).map(|_| r.read_u32::<LE>()).collect::<std::io::Result<Vec<_>>>()?;
    let qs = (0..m).map(|_| r.read_u32::<LE>()).collect::<std::io::Result<Vec<_>>>()?;
    let index = Arc::new(CoeffIndex::new(ks, qs)?);
    let truth_vals = (0..m).map(|_| read_complex(&mut r)).collect::<Result<Vec<_>>>()?;
    let truth = SteerableCoeffs::new(truth_vals, Arc::clone(&index))?;
    let mut rotations = Vec::with_capacity(n);
    for _ in 0..n {
        let l = r.read_u32::<LE>()? as usize;
        if l >= grid_size {
            return Err(Error::Format(format!("rotation index {l} outside grid of {grid_size}")));
        }
        rotations.push(l);
    }
    let mut observations = Vec::with_capacity(n);
    for _ in 0..n {
        let vals = (0..m).map(|_| read_complex(&mut r)).collect::<Result<Vec<_>>>()?;
        observations.push(SteerableCoeffs::new(vals, Arc::clone(&index))?);
    }
    Ok(Dataset2D { observations, truth, rotations, noise_sigma: T::of(sigma), grid_size })
}

pub fn write_dataset_1d<W: Write, T: Real>(data: &Dataset1D<T>, mut w: W) -> Result<()> {
    let len = data.truth.len();
    w.write_all(MAGIC_1D)?;
    w.write_u32::<LE>(VERSION)?;
    w.write_u32::<LE>(data.signals.len() as u32)?;
    w.write_u32::<LE>(len as u32)?;
    w.write_f64::<LE>(data.noise_sigma.as_f64())?;
    for x in &data.truth {
        w.write_f64::<LE>(x.as_f64())?;
    }
    for &s in &data.shifts {
        w.write_u32::<LE>(s as u32)?;
    }
    for y in &data.signals {
        if y.len() != len {
            return Err(Error::Dimension { expected: len, actual: y.len() });
        }
        for v in y {
            w.write_f64::<LE>(v.as_f64())?;
        }
    }
    Ok(())
}

pub fn read_dataset_1d<R: Read, T: Real>(mut r: R) -> Result<Dataset1D<T>> {
    check_header(&mut r, MAGIC_1D)?;
    let n = r.read_u32::<LE>()? as usize;
    let len = r.read_u32::<LE>()? as usize;
    let sigma = r.read_f64::<LE>()?;
    let truth = (0..len).map(|_| r.read_f64::<LE>().map(T::of)).collect::<std::io::Result<Vec<_>>>()?;
    let mut shifts = Vec::with_capacity(n);
    for _ in 0..n {
        let s = r.read_u32::<LE>()? as usize;
        if s >= len {
            return Err(Error::Format(format!("shift {s} outside signal length {len}")));
        }
        shifts.push(s);
    }
    let signals = (0..n)
        .map(|_| (0..len).map(|_| r.read_f64::<LE>().map(T::of)).collect::<std::io::Result<Vec<_>>>())
        .collect::<std::io::Result<Vec<_>>>()?;
    Ok(Dataset1D { signals, truth, shifts, noise_sigma: T::of(sigma) })
}

/// Long-format CSV: `kind,index,rotation,k,q,re,im`, truth rows first (`kind = truth`).
pub fn write_dataset_2d_csv<W: Write, T: Real>(data: &Dataset2D<T>, mut w: W) -> Result<()> {
    writeln!(w, "kind,index,rotation,k,q,re,im")?;
    let rows = std::iter::once(("truth", 0usize, 0usize, &data.truth)).chain(
        data.observations.iter().enumerate().map(|(i, o)| ("observation", i, data.rotations[i], o)),
    );
    for (kind, i, rot, c) in rows {
        for ((z, k), q) in c.values().iter().zip(c.angular_index()).zip(c.radial_index()) {
            writeln!(w, "{kind},{i},{rot},{k},{q},{:e},{:e}", z.re.as_f64(), z.im.as_f64())?;
        }
    }
    Ok(())
}

/// Long-format CSV: `kind,index,shift,n,value`, truth rows first.
pub fn write_dataset_1d_csv<W: Write, T: Real>(data: &Dataset1D<T>, mut w: W) -> Result<()> {
    writeln!(w, "kind,index,shift,n,value")?;
    for (n, x) in data.truth.iter().enumerate() {
        writeln!(w, "truth,0,0,{n},{:e}", x.as_f64())?;
    }
    for (i, y) in data.signals.iter().enumerate() {
        for (n, v) in y.iter().enumerate() {
            writeln!(w, "observation,{i},{},{n},{:e}", data.shifts[i], v.as_f64())?;
        }
    }
    Ok(())
}
