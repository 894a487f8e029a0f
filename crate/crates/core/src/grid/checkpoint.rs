//! Binary wavefunction checkpoints.
//!
//! Layout, all little-endian:
//!
//! | offset | size     | field                                  |
//! |--------|----------|----------------------------------------|
//! | 0      | 4        | magic `GHWF`                           |
//! | 4      | 4        | version, `u32` (currently 1)           |
//! | 8      | 4        | `N`, points per axis, `u32`            |
//! | 12     | 4        | reserved, zero                         |
//! | 16     | 8        | half extent `L`, `f64`                 |
//! | 24     | 16 N^2   | amplitudes, row-major `(re, im)` `f64` |
//!
//! Row-major means element `[i, j]` (at `x_i`, `y_j`) is record `i N + j`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex;

use super::{GridSpec, Wavefunction};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"GHWF";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<T: Real, W: Write>(psi: &Wavefunction<T>, mut out: W) -> Result<()> {
    let n = psi.grid.points_per_axis();
    let n32 = u32::try_from(n).map_err(|_| Error::Format(format!("grid of {n} points does not fit u32")))?;
    out.write_all(&CHECKPOINT_MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    out.write_all(&n32.to_le_bytes())?;
    out.write_all(&[0u8; 4])?;
    out.write_all(&psi.grid.half_extent().as_f64().to_le_bytes())?;
    for z in psi.amplitudes.iter() {
        out.write_all(&z.re.as_f64().to_le_bytes())?;
        out.write_all(&z.im.as_f64().to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a checkpoint; the time is not stored and comes back as zero.
pub fn read_checkpoint<T: Real, R: Read>(mut input: R) -> Result<Wavefunction<T>> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header).map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    if header[0..4] != CHECKPOINT_MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &header[0..4])));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
    let mut word = [0u8; 8];
    input.read_exact(&mut word).map_err(|e| Error::Format(format!("missing half extent: {e}")))?;
    let l = f64::from_le_bytes(word);
    let grid = GridSpec::new(T::lit(l), n).map_err(|e| Error::Format(e.to_string()))?;

    let mut body = vec![0u8; 16 * n * n];
    input.read_exact(&mut body).map_err(|e| Error::Format(format!("truncated amplitudes: {e}")))?;
    let mut extra = [0u8; 1];
    if input.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after amplitudes".into()));
    }
    let values: Vec<Complex<T>> = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[0..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..16].try_into().expect("8 bytes"));
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    let amplitudes = Array2::from_shape_vec((n, n), values).expect("n*n values");
    Wavefunction::new(grid, amplitudes, T::zero())
}

pub fn save_checkpoint<T: Real>(psi: &Wavefunction<T>, path: impl AsRef<Path>) -> Result<()> {
    write_checkpoint(psi, BufWriter::new(File::create(path)?))
}

pub fn load_checkpoint<T: Real>(path: impl AsRef<Path>) -> Result<Wavefunction<T>> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{init_gaussian, WidthConvention};

    fn sample() -> Wavefunction<f64> {
        let g = GridSpec::<f64>::new(4.0, 20).unwrap();
        let mut psi = init_gaussian(&g, (0.5, -0.25), 1.2, WidthConvention::Amplitude).unwrap();
        psi.amplitudes[[3, 7]] = Complex::new(-0.125, 0.375);
        psi
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let psi = sample();
        let mut buf = Vec::new();
        write_checkpoint(&psi, &mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 16 * 400);
        let back: Wavefunction<f64> = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back.amplitudes, psi.amplitudes);
        assert_eq!(back.grid, psi.grid);
    }

    #[test]
    fn header_layout() {
        let mut buf = Vec::new();
        write_checkpoint(&sample(), &mut buf).unwrap();
        assert_eq!(&buf[0..4], b"GHWF");
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(&buf[8..12], &20u32.to_le_bytes());
        assert_eq!(&buf[12..16], &[0, 0, 0, 0]);
        assert_eq!(&buf[16..24], &4.0f64.to_le_bytes());
        // element [0, 1] is the second record
        let psi = sample();
        let re = f64::from_le_bytes(buf[40..48].try_into().unwrap());
        assert_eq!(re, psi.amplitudes[[0, 1]].re);
    }

    #[test]
    fn corrupt_inputs_rejected() {
        let mut buf = Vec::new();
        write_checkpoint(&sample(), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_checkpoint::<f64, _>(bad.as_slice()), Err(Error::Format(_))));
        assert!(read_checkpoint::<f64, _>(&buf[..buf.len() - 3]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(read_checkpoint::<f64, _>(long.as_slice()).is_err());
        let mut v2 = buf;
        v2[4] = 2;
        assert!(read_checkpoint::<f64, _>(v2.as_slice()).is_err());
    }
}
