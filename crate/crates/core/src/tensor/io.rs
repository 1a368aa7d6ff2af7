//! Binary tensor container.
//!
//! Layout: the magic bytes `TGT1`, a little-endian `u32` order `D`, `D`
//! little-endian `u64` mode sizes, then the column-major values as
//! little-endian `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

pub const MAGIC: &[u8; 4] = b"TGT1";

/// Upper bound on the element count accepted from a header.
const MAX_ELEMENTS: u64 = 1 << 34;

pub fn write_tensor_to<T: Scalar, W: Write>(t: &DenseTensor<T>, mut w: W) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(t.order() as u32).to_le_bytes())?;
    for &s in t.shape() {
        w.write_all(&(s as u64).to_le_bytes())?;
    }
    for v in t.data() {
        w.write_all(&v.to_f64_lossless().to_le_bytes())?;
    }
    w.flush()
}

pub fn write_tensor<T: Scalar>(t: &DenseTensor<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_tensor_to(t, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}

/// Reads a tensor; `origin` only labels errors.
pub fn read_tensor_from<T: Scalar, R: Read>(mut r: R, origin: &Path) -> Result<DenseTensor<T>> {
    let io = |e: std::io::Error| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::format(origin, "truncated file")
        } else {
            Error::io(origin, e)
        }
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::format(origin, "bad magic bytes"));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4).map_err(io)?;
    let order = u32::from_le_bytes(b4) as usize;
    if order == 0 || order > 64 {
        return Err(Error::format(origin, format!("implausible order {order}")));
    }
    let mut shape = Vec::with_capacity(order);
    let mut count: u64 = 1;
    let mut b8 = [0u8; 8];
    for _ in 0..order {
        r.read_exact(&mut b8).map_err(io)?;
        let s = u64::from_le_bytes(b8);
        count = count.saturating_mul(s);
        if s == 0 || count > MAX_ELEMENTS {
            return Err(Error::format(origin, "invalid mode size"));
        }
        shape.push(s as usize);
    }
    let mut data = Vec::with_capacity(count as usize);
    for _ in 0..count {
        r.read_exact(&mut b8).map_err(io)?;
        data.push(T::of(f64::from_le_bytes(b8)));
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra).map_err(io)? != 0 {
        return Err(Error::format(origin, "trailing bytes after tensor data"));
    }
    DenseTensor::new(shape, data)
}

pub fn read_tensor<T: Scalar>(path: impl AsRef<Path>) -> Result<DenseTensor<T>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_tensor_from(BufReader::new(f), path)
}
