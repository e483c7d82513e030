//! Binary snapshot of a [`FieldState`].
//!
//! Layout, little-endian throughout:
//!
//! | offset | size | content                         |
//! |--------|------|---------------------------------|
//! | 0      | 8    | magic `NLPCKPT1`                |
//! | 8      | 4    | u32 format version (1)          |
//! | 12     | 4    | u32 reserved, zero              |
//! | 16     | 8    | u64 number of points n          |
//! | 24     | 8    | f64 domain length [m]           |
//! | 32     | 8    | f64 propagation time t [s]      |
//! | 40     | 16n  | n pairs of f64 (re, im) of Ψ    |

use std::io::{Read, Write};

use num_complex::Complex64;

use super::state::FieldState;
use crate::error::{Error, Result};
use crate::grid::Grid;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"NLPCKPT1";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(mut w: W, state: &FieldState) -> Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    w.write_all(&(state.grid.n() as u64).to_le_bytes())?;
    w.write_all(&state.grid.length().to_le_bytes())?;
    w.write_all(&state.t.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * state.psi.len());
    for c in &state.psi {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<FieldState> {
    if &read_array::<8, _>(&mut r)? != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let _reserved = read_array::<4, _>(&mut r)?;
    let n = u64::from_le_bytes(read_array(&mut r)?);
    let length = f64::from_le_bytes(read_array(&mut r)?);
    let t = f64::from_le_bytes(read_array(&mut r)?);
    let n = usize::try_from(n).map_err(|_| Error::Checkpoint("point count overflows".into()))?;
    let grid = Grid::new(n, length).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let mut raw = vec![0u8; 16 * n];
    r.read_exact(&mut raw)?;
    let psi = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok(FieldState { psi, t, grid })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let grid = Grid::new(256, 0.03).unwrap();
        let psi = (0..256).map(|j| Complex64::new(j as f64, -0.5 * j as f64)).collect();
        let state = FieldState { psi, t: 1.25e-6, grid };
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &state).unwrap();
        assert_eq!(bytes.len(), 40 + 16 * 256);
        assert_eq!(&bytes[..8], b"NLPCKPT1");
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 256);
        assert_eq!(f64::from_le_bytes(bytes[40 + 16 * 3..48 + 16 * 3].try_into().unwrap()), 3.0);
        let back = read_checkpoint(bytes.as_slice()).unwrap();
        assert_eq!(back, state);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_checkpoint(&b"NOTACKPT\x01\0\0\0"[..]).is_err());
        let grid = Grid::new(256, 0.03).unwrap();
        let state = FieldState { psi: vec![Complex64::new(1.0, 0.0); 256], t: 0.0, grid };
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &state).unwrap();
        bytes.truncate(100);
        assert!(read_checkpoint(bytes.as_slice()).is_err());
    }
}
