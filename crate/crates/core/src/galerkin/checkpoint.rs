//! Little-endian binary checkpoints.
//!
//! Layout: `"MHDG"`, version `u32 = 1`, `N: u32`, `nu, eta, t: f64`,
//! `count: u64`, then `count` records of `n1, n2, n3: i32` followed by the
//! real and imaginary parts of the three components of `V(n)` and then
//! `B(n)` (12 `f64`), sorted lexicographically by `n`.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{CoreError, Result};
use crate::field::{MhdState, SpectralField, Vec3};
use crate::modes::{ModeSet, WaveVector};

pub const MAGIC: &[u8; 4] = b"MHDG";
pub const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(mut w: W, s: &MhdState<f64>) -> Result<()> {
    let modes = s.modes();
    let mut buf = Vec::with_capacity(36 + modes.len() * 108);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&modes.n_max().to_le_bytes());
    for x in [s.nu, s.eta, s.t] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    buf.extend_from_slice(&(modes.len() as u64).to_le_bytes());
    for i in 0..modes.len() {
        for c in modes.vector(i).0 {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        for f in [&s.v, &s.b] {
            for z in &f.coeffs()[i] {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        let end = self.pos + K;
        if end > self.data.len() {
            return Err(CoreError::Checkpoint("unexpected end of checkpoint".into()));
        }
        let out = self.data[self.pos..end].try_into().expect("slice length");
        self.pos = end;
        Ok(out)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<MhdState<f64>> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut c = Cursor { data: &data, pos: 0 };
    let magic: [u8; 4] = c.take()?;
    if &magic != MAGIC {
        return Err(CoreError::Checkpoint("bad checkpoint magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(CoreError::CheckpointVersion(version));
    }
    let n_max = c.u32()?;
    if n_max == 0 {
        return Err(CoreError::Checkpoint("truncation radius must be positive".into()));
    }
    let nu = c.f64()?;
    let eta = c.f64()?;
    let t = c.f64()?;
    let count = c.u64()?;
    let modes = ModeSet::shared(n_max);
    if count != modes.len() as u64 {
        return Err(CoreError::Checkpoint(format!(
            "record count {count} does not match the {} modes of N={n_max}",
            modes.len()
        )));
    }
    let mut v: Vec<Vec3<f64>> = Vec::with_capacity(modes.len());
    let mut b: Vec<Vec3<f64>> = Vec::with_capacity(modes.len());
    for i in 0..modes.len() {
        let n = WaveVector::new(c.i32()?, c.i32()?, c.i32()?);
        if n != modes.vector(i) {
            return Err(CoreError::Checkpoint(format!(
                "record {i} has wavevector {n}, expected {}",
                modes.vector(i)
            )));
        }
        let mut read3 = || -> Result<Vec3<f64>> {
            let mut out = [Complex::new(0.0, 0.0); 3];
            for z in &mut out {
                *z = Complex::new(c.f64()?, c.f64()?);
            }
            Ok(out)
        };
        v.push(read3()?);
        b.push(read3()?);
    }
    if c.pos != data.len() {
        return Err(CoreError::Checkpoint("trailing bytes after checkpoint records".into()));
    }
    let v = SpectralField::new(modes.clone(), v)?;
    let b = SpectralField::new(modes, b)?;
    MhdState::new(v, b, t, nu, eta)
}

pub fn save_checkpoint(path: &Path, s: &MhdState<f64>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_checkpoint(&mut w, s)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<MhdState<f64>> {
    let f = std::fs::File::open(path)?;
    read_checkpoint(std::io::BufReader::new(f))
}
