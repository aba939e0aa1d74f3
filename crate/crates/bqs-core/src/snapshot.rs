//! Bit-exact binary snapshots of a trajectory point.
//!
//! Layout, all little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "BQS1"
//!      4     4  format version (u32, currently 1)
//!      8     4  n1 (u32)
//!     12     4  n2 (u32)
//!     16     4  reserved (u32, written as 0, ignored on load)
//!     20     8  t (f64)
//!     28    48  alpha, beta, sigma, gamma, nu, kappa (6 x f64)
//!     76     -  omega_hat then theta_hat, row-major (re, im) f64 pairs
//! ```
//!
//! Total size: `28 + 48 + 2 * n1 * n2 * 16` bytes. The loader validates the
//! header arithmetic against the file length and rejects unknown versions.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::dynamics::SimState;
use crate::error::BqsError;
use crate::multipliers::ParamSet;
use crate::spectral::{Grid, SpectralField};
use crate::Result;

pub const MAGIC: &[u8; 4] = b"BQS1";
pub const VERSION: u32 = 1;

/// Exact byte size of a snapshot for an `n1 x n2` grid.
pub fn file_size(n1: usize, n2: usize) -> usize {
    28 + 48 + 2 * n1 * n2 * 16
}

pub fn to_bytes(state: &SimState) -> Vec<u8> {
    let grid = state.grid();
    let mut buf = Vec::with_capacity(file_size(grid.n1(), grid.n2()));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.n1() as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.n2() as u32).to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&state.t.to_le_bytes());
    let p = &state.params;
    for v in [p.alpha, p.beta, p.sigma, p.gamma, p.nu, p.kappa] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for field in [&state.omega, &state.theta] {
        for c in field.coeffs() {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    buf
}

pub fn from_bytes(bytes: &[u8]) -> Result<SimState> {
    if bytes.len() < 76 {
        return Err(BqsError::Snapshot(format!(
            "file too short for header: {} bytes",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(BqsError::Snapshot("bad magic, not a BQS1 snapshot".into()));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let f64_at = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(BqsError::Snapshot(format!(
            "unsupported format version {version} (expected {VERSION})"
        )));
    }
    let n1 = u32_at(8) as usize;
    let n2 = u32_at(12) as usize;
    let expected = file_size(n1, n2);
    if bytes.len() != expected {
        return Err(BqsError::Snapshot(format!(
            "length mismatch: {} bytes for a {}x{} snapshot (expected {})",
            bytes.len(),
            n1,
            n2,
            expected
        )));
    }
    let grid = Grid::new(n1, n2).map_err(|e| BqsError::Snapshot(e.to_string()))?;
    let t = f64_at(20);
    let params = ParamSet {
        alpha: f64_at(28),
        beta: f64_at(36),
        sigma: f64_at(44),
        gamma: f64_at(52),
        nu: f64_at(60),
        kappa: f64_at(68),
    };
    let read_field = |base: usize| -> SpectralField {
        let mut coeffs = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let off = base + i * 16;
            coeffs.push(Complex64::new(f64_at(off), f64_at(off + 8)));
        }
        SpectralField::from_coeffs(grid, coeffs).expect("length checked")
    };
    let omega = read_field(76);
    let theta = read_field(76 + grid.len() * 16);
    Ok(SimState {
        t,
        omega,
        theta,
        params,
    })
}

pub fn save(state: &SimState, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(state))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<SimState> {
    let bytes = fs::read(path)?;
    from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward, PhysField};

    fn sample_state() -> SimState {
        let grid = Grid::square(8).unwrap();
        SimState {
            t: 0.625,
            omega: forward(&PhysField::from_fn(grid, |x1, x2| x1.sin() + (2.0 * x2).cos())),
            theta: forward(&PhysField::from_fn(grid, |x1, x2| (x1 + x2).sin())),
            params: ParamSet {
                alpha: 0.95,
                beta: 0.08,
                sigma: 0.0,
                gamma: 0.25,
                nu: 1.0,
                kappa: 1.0,
            },
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample_state();
        let bytes = to_bytes(&s);
        let back = from_bytes(&bytes).unwrap();
        assert_eq!(back.t.to_bits(), s.t.to_bits());
        assert_eq!(back.params, s.params);
        for (a, b) in back.omega.coeffs().iter().zip(s.omega.coeffs()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        for (a, b) in back.theta.coeffs().iter().zip(s.theta.coeffs()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        // writing again is byte-identical
        assert_eq!(to_bytes(&back), bytes);
    }

    #[test]
    fn zero_state_on_8x8_is_2124_bytes() {
        let grid = Grid::square(8).unwrap();
        let s = SimState {
            t: 0.0,
            omega: SpectralField::zeros(grid),
            theta: SpectralField::zeros(grid),
            params: ParamSet {
                alpha: 0.95,
                beta: 0.08,
                sigma: 0.0,
                gamma: 0.0,
                nu: 1.0,
                kappa: 1.0,
            },
        };
        let bytes = to_bytes(&s);
        assert_eq!(bytes.len(), 2124);
        assert_eq!(file_size(8, 8), 2124);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let mut bytes = to_bytes(&sample_state());
        bytes.pop();
        let err = from_bytes(&bytes).unwrap_err();
        assert!(err.to_string().contains("length mismatch"));
    }

    #[test]
    fn bad_magic_and_unknown_version_are_rejected() {
        let mut bytes = to_bytes(&sample_state());
        bytes[0] = b'X';
        assert!(from_bytes(&bytes).unwrap_err().to_string().contains("magic"));

        let mut bytes = to_bytes(&sample_state());
        bytes[4] = 9;
        assert!(from_bytes(&bytes)
            .unwrap_err()
            .to_string()
            .contains("unsupported format version"));
    }

    #[test]
    fn save_and_load_through_filesystem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.bqs");
        let s = sample_state();
        save(&s, &path).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back.omega.coeffs(), s.omega.coeffs());
    }
}
