//! Binary dump of trained reservoir weights.
//!
//! Little-endian layout:
//!
//! ```text
//! magic   8 bytes  "HESNDUMP"
//! version u32      DUMP_VERSION
//! flags   u32      bit 0: expert parameters appended
//! d_r     u64
//! d_u     u64
//! d_feat  u64
//! d_in    u64
//! A       d_r * d_r   f64, row-major
//! B       d_r * d_in  f64, row-major
//! C       d_u * d_feat f64, row-major
//! expert  (flag bit 0) n: u64, coupling: f64, omega: n * f64, dt: f64
//! ```

use std::io::{Read, Write};

use crate::dynamics::KuramotoParams;
use crate::error::{Error, Result};
use crate::Matrix;

pub const DUMP_MAGIC: &[u8; 8] = b"HESNDUMP";
pub const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDump {
    pub internal: Matrix,
    pub input: Matrix,
    pub readout: Matrix,
    /// Expert parameters and step size for hybrid reservoirs.
    pub expert: Option<(KuramotoParams, f64)>,
}

fn write_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_row_major<W: Write>(w: &mut W, m: &Matrix) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            write_f64(w, m[(i, j)])?;
        }
    }
    Ok(())
}

pub fn write_dump<W: Write>(w: &mut W, dump: &ModelDump) -> Result<()> {
    let d_r = dump.internal.nrows();
    if dump.internal.ncols() != d_r || dump.input.nrows() != d_r {
        return Err(Error::InvalidParameter("inconsistent reservoir matrix shapes".into()));
    }
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    let flags: u32 = dump.expert.is_some() as u32;
    w.write_all(&flags.to_le_bytes())?;
    for d in [d_r, dump.readout.nrows(), dump.readout.ncols(), dump.input.ncols()] {
        write_u64(w, d as u64)?;
    }
    write_row_major(w, &dump.internal)?;
    write_row_major(w, &dump.input)?;
    write_row_major(w, &dump.readout)?;
    if let Some((params, dt)) = &dump.expert {
        write_u64(w, params.omega.len() as u64)?;
        write_f64(w, params.coupling)?;
        for &o in &params.omega {
            write_f64(w, o)?;
        }
        write_f64(w, *dt)?;
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

fn read_row_major<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<Matrix> {
    let mut m = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = read_f64(r)?;
        }
    }
    Ok(m)
}

const MAX_DIM: u64 = 1 << 20;

pub fn read_dump<R: Read>(r: &mut R) -> Result<ModelDump> {
    let magic: [u8; 8] = read_array(r)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Io("not a reservoir dump (bad magic)".into()));
    }
    let version = u32::from_le_bytes(read_array(r)?);
    if version != DUMP_VERSION {
        return Err(Error::Io(format!("unsupported dump version {version}")));
    }
    let flags = u32::from_le_bytes(read_array(r)?);
    let mut dims = [0usize; 4];
    for d in dims.iter_mut() {
        let v = read_u64(r)?;
        if v > MAX_DIM {
            return Err(Error::Io(format!("implausible dimension {v} in dump header")));
        }
        *d = v as usize;
    }
    let [d_r, d_u, d_feat, d_in] = dims;
    let internal = read_row_major(r, d_r, d_r)?;
    let input = read_row_major(r, d_r, d_in)?;
    let readout = read_row_major(r, d_u, d_feat)?;
    let expert = if flags & 1 == 1 {
        let n = read_u64(r)?;
        if n > MAX_DIM {
            return Err(Error::Io(format!("implausible oscillator count {n}")));
        }
        let coupling = read_f64(r)?;
        let omega = (0..n).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
        let dt = read_f64(r)?;
        Some((KuramotoParams::new(omega, coupling)?, dt))
    } else {
        None
    };
    Ok(ModelDump {
        internal,
        input,
        readout,
        expert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_with_expert() {
        let dump = ModelDump {
            internal: Matrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64 * 0.5),
            input: Matrix::from_fn(3, 4, |i, j| if j == i { 0.1 } else { 0.0 }),
            readout: Matrix::from_fn(2, 5, |i, j| -((i + j) as f64)),
            expert: Some((KuramotoParams::new(vec![0.1, -0.2], 1.5).unwrap(), 0.1)),
        };
        let mut buf = Vec::new();
        write_dump(&mut buf, &dump).unwrap();
        assert_eq!(&buf[..8], DUMP_MAGIC);
        assert_eq!(read_dump(&mut buf.as_slice()).unwrap(), dump);
        // Header: magic + version + flags + four u64 dims.
        assert_eq!(buf.len(), 8 + 4 + 4 + 32 + 8 * (9 + 12 + 10) + 8 * 5);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_dump(&mut &b"NOTADUMP\x01\0\0\0"[..]).is_err());
        let mut buf = Vec::new();
        buf.extend_from_slice(DUMP_MAGIC);
        buf.extend_from_slice(&7u32.to_le_bytes());
        assert!(read_dump(&mut buf.as_slice()).is_err());
    }
}
