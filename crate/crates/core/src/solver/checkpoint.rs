use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::norms::PairField;
use crate::spectral::{FourierGrid, SpectralField, VectorSpectralField};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"MHDK";
pub const CHECKPOINT_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 3 * 4 + 4 * 8;

/// Contents of a checkpoint file.
///
/// Layout, all little-endian: magic `MHDK`, version `u32`, `dim u32`,
/// `points_per_axis u32`, then `box_length, t, mu, nu` as `f64`, then the
/// coefficients of `u_0 .. u_{dim-1}, b_0 .. b_{dim-1}` in grid order, each
/// as a `(re, im)` pair of `f64`.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub t: f64,
    pub mu: f64,
    pub nu: f64,
    pub fields: PairField,
}

pub fn encode_checkpoint(c: &Checkpoint) -> Vec<u8> {
    let grid = c.fields.grid();
    let n_comp = 2 * grid.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + n_comp * grid.len() * 16);
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    for v in [grid.box_length(), c.t, c.mu, c.nu] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for comp in c.fields.u.components().iter().chain(c.fields.b.components()) {
        for z in comp.coeffs() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let bad = |msg: String| Error::Checkpoint(msg);
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[..4] != CHECKPOINT_MAGIC {
        return Err(bad("missing MHDK magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(4);
    if version != CHECKPOINT_VERSION {
        return Err(bad(format!(
            "unsupported version {version}, expected {CHECKPOINT_VERSION}"
        )));
    }
    let dim = u32_at(8) as usize;
    let n = u32_at(12) as usize;
    let grid = FourierGrid::new(dim, n, f64_at(16))
        .map_err(|e| bad(format!("invalid grid in header: {e}")))?;
    let (t, mu, nu) = (f64_at(24), f64_at(32), f64_at(40));
    let expected = HEADER_LEN + 2 * dim * grid.len() * 16;
    if bytes.len() != expected {
        return Err(bad(format!(
            "expected {expected} bytes for a {dim}D {n}-point grid, found {}",
            bytes.len()
        )));
    }
    let mut comps = Vec::with_capacity(2 * dim);
    for chunk in bytes[HEADER_LEN..].chunks_exact(grid.len() * 16) {
        let coeffs = chunk
            .chunks_exact(16)
            .map(|z| {
                Complex64::new(
                    f64::from_le_bytes(z[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(z[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        comps.push(SpectralField::from_coeffs(&grid, coeffs)?);
    }
    let b = comps.split_off(dim);
    let fields = PairField::new(VectorSpectralField::new(comps)?, VectorSpectralField::new(b)?)?;
    Ok(Checkpoint { t, mu, nu, fields })
}

pub fn write_checkpoint(path: impl AsRef<Path>, c: &Checkpoint) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(c)).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
