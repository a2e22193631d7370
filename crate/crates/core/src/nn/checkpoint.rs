//! Binary container for named parameter tensors.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   8 bytes  "QLADCKP1"
//! count   u32
//! repeat count times:
//!   name_len u32, name (UTF-8, name_len bytes)
//!   rank     u32, dims (u64 × rank)
//!   values   f64 × product(dims), row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::tensor::{NamedTensor, Parameterized};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"QLADCKP1";

#[derive(Debug, Clone, PartialEq)]
pub struct OwnedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

pub fn write_tensors<W: Write>(mut w: W, tensors: &[NamedTensor<'_>]) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(tensors.len() as u32).to_le_bytes())?;
    for t in tensors {
        let expect: usize = t.shape.iter().product();
        if expect != t.values.len() {
            return Err(Error::Dimension(format!(
                "tensor '{}' has shape {:?} but {} values",
                t.name,
                t.shape,
                t.values.len()
            )));
        }
        w.write_all(&(t.name.len() as u32).to_le_bytes())?;
        w.write_all(t.name.as_bytes())?;
        w.write_all(&(t.shape.len() as u32).to_le_bytes())?;
        for &d in &t.shape {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for v in t.values {
            w.write_all(&v.to_le_bytes())?;
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

pub fn read_tensors<R: Read>(mut r: R) -> Result<Vec<OwnedTensor>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Data("not a checkpoint file (bad magic)".into()));
    }
    let count = read_u32(&mut r)? as usize;
    let mut out = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let name_len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let name =
            String::from_utf8(name).map_err(|_| Error::Data("tensor name is not UTF-8".into()))?;
        let rank = read_u32(&mut r)? as usize;
        let shape = (0..rank)
            .map(|_| read_u64(&mut r).map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let n: usize = shape.iter().product();
        let mut values = Vec::with_capacity(n);
        let mut b = [0u8; 8];
        for _ in 0..n {
            r.read_exact(&mut b)?;
            values.push(f64::from_le_bytes(b));
        }
        out.push(OwnedTensor {
            name,
            shape,
            values,
        });
    }
    Ok(out)
}

pub fn save<P: Parameterized>(path: impl AsRef<Path>, model: &P) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    write_tensors(f, &model.named_tensors())
}

/// Loads tensors into `model`, requiring names and shapes to match exactly
/// and in order.
pub fn load_into<P: Parameterized>(path: impl AsRef<Path>, model: &mut P) -> Result<()> {
    let tensors = read_tensors(BufReader::new(File::open(path)?))?;
    assign_tensors(model, &tensors)
}

pub fn assign_tensors<P: Parameterized>(model: &mut P, tensors: &[OwnedTensor]) -> Result<()> {
    {
        let expected = model.named_tensors();
        if expected.len() != tensors.len() {
            return Err(Error::Data(format!(
                "checkpoint has {} tensors, model has {}",
                tensors.len(),
                expected.len()
            )));
        }
        for (e, t) in expected.iter().zip(tensors) {
            if e.name != t.name || e.shape != t.shape {
                return Err(Error::Data(format!(
                    "checkpoint tensor '{}' {:?} does not match model tensor '{}' {:?}",
                    t.name, t.shape, e.name, e.shape
                )));
            }
        }
    }
    let flat: Vec<f64> = tensors
        .iter()
        .flat_map(|t| t.values.iter().copied())
        .collect();
    model.assign_flat(&flat)
}
