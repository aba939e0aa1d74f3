//! Fourier multipliers: fractional powers `Lambda^s`, the modified Riesz
//! transform `R_alpha = Lambda^{-alpha} d_x1`, logarithmic powers
//! `(log(I - Laplace))^gamma`, the velocity law `P(Lambda)` and the
//! Biot-Savart map `omega -> u`.
//!
//! Symbols that are singular or vanish at `xi = 0` on the whole plane are
//! gauged to `m(0) = 0` on the torus; the dynamics conserve the means of
//! omega and theta, so velocity is only defined up to this gauge anyway.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::error::BqsError;
use crate::spectral::{check_same_grid, Grid, SpectralField};
use crate::Result;

/// Physical and regularity parameters of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub nu: f64,
    pub kappa: f64,
}

impl ParamSet {
    pub fn new(alpha: f64, beta: f64, sigma: f64, gamma: f64, nu: f64, kappa: f64) -> Result<Self> {
        let p = ParamSet {
            alpha,
            beta,
            sigma,
            gamma,
            nu,
            kappa,
        };
        p.validate()?;
        Ok(p)
    }

    /// Range checks only; admissibility against the global-regularity region
    /// is a separate concern (see `regions`).
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(BqsError::InvalidParameter(msg.to_string()));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail("alpha must lie in (0, 1]");
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return fail("beta must lie in (0, 1]");
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return fail("sigma must be finite and >= 0");
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return fail("gamma must be finite and >= 0");
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return fail("nu must be finite and >= 0");
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return fail("kappa must be finite and >= 0");
        }
        Ok(())
    }
}

/// A multiplier symbol family `k -> m(k)` on the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Multiplier {
    /// `|k|^s`, gauged to 0 at the origin for `s < 0`.
    FractionalPower { s: f64 },
    /// `i k1 |k|^{-alpha}`, the modified Riesz transform.
    ModifiedRiesz { alpha: f64 },
    /// `(log(1 + |k|^2))^gamma`.
    LogPower { gamma: f64 },
    /// `(log(1 + |k|^2))^{-gamma}` with the `k = 0` mode gauged away; inverts
    /// the log factor of the velocity law (the `v`-variable of the twin run).
    InverseLogPower { gamma: f64 },
    /// `P(Lambda) = |k|^sigma (log(1 + |k|^2))^gamma`.
    VelocityLaw { sigma: f64, gamma: f64 },
    /// Sharp dyadic block: `|k| <= 1` for `j = -1`, `2^j < |k| <= 2^{j+1}` else.
    DyadicBlock { j: i32 },
    /// Sharp low-pass `S_j`, the union of blocks `-1..=j-1`, i.e. `|k| <= 2^j`.
    LowPass { j: i32 },
}

impl Multiplier {
    pub fn fractional_power(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(BqsError::InvalidParameter("fractional power s must be finite".into()));
        }
        Ok(Multiplier::FractionalPower { s })
    }

    pub fn modified_riesz(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(BqsError::InvalidParameter(
                "modified Riesz transform requires alpha in (0, 1)".into(),
            ));
        }
        Ok(Multiplier::ModifiedRiesz { alpha })
    }

    pub fn log_power(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(BqsError::InvalidParameter("log power gamma must be >= 0".into()));
        }
        Ok(Multiplier::LogPower { gamma })
    }

    pub fn inverse_log_power(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(BqsError::InvalidParameter("log power gamma must be >= 0".into()));
        }
        Ok(Multiplier::InverseLogPower { gamma })
    }

    pub fn velocity_law(sigma: f64, gamma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(BqsError::InvalidParameter("velocity law sigma must be >= 0".into()));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(BqsError::InvalidParameter("velocity law gamma must be >= 0".into()));
        }
        Ok(Multiplier::VelocityLaw { sigma, gamma })
    }

    pub fn dyadic_block(j: i32) -> Result<Self> {
        if j < -1 {
            return Err(BqsError::InvalidParameter("dyadic block index must be >= -1".into()));
        }
        Ok(Multiplier::DyadicBlock { j })
    }

    pub fn low_pass(j: i32) -> Result<Self> {
        if j < -1 {
            return Err(BqsError::InvalidParameter("low-pass index must be >= -1".into()));
        }
        Ok(Multiplier::LowPass { j })
    }

    /// Symbol value at the integer wavenumber `(k1, k2)`.
    pub fn symbol(&self, k1: i32, k2: i32) -> Complex64 {
        let kk = (k1 as f64) * (k1 as f64) + (k2 as f64) * (k2 as f64);
        match *self {
            Multiplier::FractionalPower { s } => {
                let v = if kk == 0.0 {
                    // 0^0 = 1 keeps Lambda^0 the identity; negative powers are gauged.
                    if s < 0.0 {
                        0.0
                    } else {
                        0.0f64.powf(s)
                    }
                } else {
                    kk.powf(0.5 * s)
                };
                Complex64::new(v, 0.0)
            }
            Multiplier::ModifiedRiesz { alpha } => {
                if kk == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k1 as f64 * kk.powf(-0.5 * alpha))
                }
            }
            Multiplier::LogPower { gamma } => Complex64::new(kk.ln_1p().powf(gamma), 0.0),
            Multiplier::InverseLogPower { gamma } => {
                if gamma == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else if kk == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(kk.ln_1p().powf(-gamma), 0.0)
                }
            }
            Multiplier::VelocityLaw { sigma, gamma } => {
                let frac = if kk == 0.0 { 0.0f64.powf(sigma) } else { kk.powf(0.5 * sigma) };
                Complex64::new(frac * kk.ln_1p().powf(gamma), 0.0)
            }
            Multiplier::DyadicBlock { j } => {
                Complex64::new(if in_sharp_block(k1, k2, j) { 1.0 } else { 0.0 }, 0.0)
            }
            Multiplier::LowPass { j } => {
                let keep = if j < 0 {
                    false
                } else if j > 30 {
                    true
                } else {
                    let kk_int = (k1 as i64) * (k1 as i64) + (k2 as i64) * (k2 as i64);
                    kk_int as u64 <= 1u64 << (2 * j as u32)
                };
                Complex64::new(if keep { 1.0 } else { 0.0 }, 0.0)
            }
        }
    }
}

/// Exact integer-arithmetic membership test for the sharp annulus of block `j`.
#[inline]
pub fn in_sharp_block(k1: i32, k2: i32, j: i32) -> bool {
    let kk = (k1 as i64) * (k1 as i64) + (k2 as i64) * (k2 as i64);
    let kk = kk as u64;
    if j == -1 {
        kk <= 1
    } else if j >= 0 && j <= 30 {
        let lo = 1u64 << (2 * j as u32);
        let hi = 1u64 << (2 * (j as u32 + 1));
        kk > lo && kk <= hi
    } else {
        false
    }
}

/// Applies the symbol pointwise: `out(k) = m(k) * f(k)`.
pub fn apply_multiplier(m: &Multiplier, f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let mut out = f.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (k1, k2) = grid.wavenumber(idx);
        *c *= m.symbol(k1, k2);
    }
    out
}

// Cached real-valued symbol tables keyed on exact parameter bits.
type SymbolKey = (usize, usize, u8, u64, u64);
static SYMBOL_TABLES: Lazy<Mutex<HashMap<SymbolKey, Arc<Vec<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

const TABLE_BIOT_SAVART: u8 = 0;
const TABLE_FRACTIONAL: u8 = 1;

fn cached_table(key: SymbolKey, build: impl FnOnce() -> Vec<f64>) -> Arc<Vec<f64>> {
    let mut cache = SYMBOL_TABLES.lock().unwrap();
    cache.entry(key).or_insert_with(|| Arc::new(build())).clone()
}

/// `m_P(k) / |k|^2` table used by the Biot-Savart map, gauged to 0 at `k = 0`.
fn biot_savart_table(grid: Grid, sigma: f64, gamma: f64) -> Arc<Vec<f64>> {
    let key = (
        grid.n1(),
        grid.n2(),
        TABLE_BIOT_SAVART,
        sigma.to_bits(),
        gamma.to_bits(),
    );
    cached_table(key, || {
        (0..grid.len())
            .map(|idx| {
                let (k1, k2) = grid.wavenumber(idx);
                let kk = (k1 as f64) * (k1 as f64) + (k2 as f64) * (k2 as f64);
                if kk == 0.0 {
                    0.0
                } else {
                    kk.powf(0.5 * sigma) * kk.ln_1p().powf(gamma) / kk
                }
            })
            .collect()
    })
}

/// `|k|^s` table (gauge 0 at the origin for s < 0); shared by the stepper.
pub(crate) fn fractional_power_table(grid: Grid, s: f64) -> Arc<Vec<f64>> {
    let key = (grid.n1(), grid.n2(), TABLE_FRACTIONAL, s.to_bits(), 0);
    cached_table(key, || {
        let m = Multiplier::FractionalPower { s };
        (0..grid.len())
            .map(|idx| {
                let (k1, k2) = grid.wavenumber(idx);
                m.symbol(k1, k2).re
            })
            .collect()
    })
}

/// Velocity from vorticity: solves `Laplace psi = P(Lambda) omega` with
/// `psi_hat(0) = 0` and returns `u = (-d_x2 psi, d_x1 psi)`. Spectrally
/// `u_hat = (i k2, -i k1) |k|^{-2} m_P(k) omega_hat(k)`, so `k . u_hat = 0`.
pub fn biot_savart(omega: &SpectralField, params: &ParamSet) -> (SpectralField, SpectralField) {
    let grid = omega.grid();
    let table = biot_savart_table(grid, params.sigma, params.gamma);
    let mut u1 = SpectralField::zeros(grid);
    let mut u2 = SpectralField::zeros(grid);
    for idx in 0..grid.len() {
        let (k1, k2) = grid.wavenumber(idx);
        let w = omega.coeffs()[idx] * table[idx];
        u1.coeffs_mut()[idx] = Complex64::new(0.0, k2 as f64) * w;
        u2.coeffs_mut()[idx] = Complex64::new(0.0, -(k1 as f64)) * w;
    }
    (u1, u2)
}

/// Grid-checked variant of [`apply_multiplier`] for callers holding fields of
/// unknown provenance.
pub fn apply_multiplier_checked(m: &Multiplier, f: &SpectralField, grid: Grid) -> Result<SpectralField> {
    check_same_grid(f.grid(), grid)?;
    Ok(apply_multiplier(m, f))
}
