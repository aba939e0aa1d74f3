//! Grids, Fourier transforms, dealiasing and collocation L^p norms.
//!
//! Conventions, fixed once for the whole crate:
//! * the domain is the periodic square `[0, 2pi)^2` with collocation nodes
//!   `x_{ij} = (2 pi i / n1, 2 pi j / n2)`;
//! * wavenumbers are integer vectors with `k_i in {-n_i/2, ..., n_i/2 - 1}`
//!   stored in FFT order;
//! * the forward transform is the spatial average against `e^{-ik.x}`, so the
//!   `k = 0` coefficient equals the field mean and a unit complex exponential
//!   has a single unit coefficient;
//! * all L^p norms use the normalized measure `dx/(2pi)^2`, which makes
//!   Parseval weight-free: `||f||_2^2 = sum_k |f_hat(k)|^2`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::BqsError;
use crate::Result;

/// Periodic n1 x n2 grid on `[0, 2pi)^2`. Dimensions are powers of two, >= 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n1: usize,
    n2: usize,
}

impl Grid {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        let ok = |n: usize| n >= 8 && n.is_power_of_two();
        if !ok(n1) || !ok(n2) {
            return Err(BqsError::GridDimension { n1, n2 });
        }
        Ok(Grid { n1, n2 })
    }

    /// Square grid shorthand.
    pub fn square(n: usize) -> Result<Self> {
        Grid::new(n, n)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer wavenumber of the flat index `idx = r*n2 + c` in FFT order.
    #[inline]
    pub fn wavenumber(&self, idx: usize) -> (i32, i32) {
        let r = idx / self.n2;
        let c = idx % self.n2;
        (wrap(r, self.n1), wrap(c, self.n2))
    }

    /// Flat index of the wavenumber `(k1, k2)`; both must be in range.
    #[inline]
    pub fn index_of(&self, k1: i32, k2: i32) -> usize {
        let r = unwrap_idx(k1, self.n1);
        let c = unwrap_idx(k2, self.n2);
        r * self.n2 + c
    }

    /// Largest wavenumber modulus present on the lattice.
    pub fn max_wavenumber(&self) -> f64 {
        let a = (self.n1 / 2) as f64;
        let b = (self.n2 / 2) as f64;
        (a * a + b * b).sqrt()
    }

    /// Index of `-k` for the flat index `idx` (Nyquist rows map to themselves).
    #[inline]
    pub fn neg_index(&self, idx: usize) -> usize {
        let (k1, k2) = self.wavenumber(idx);
        self.index_of(neg_wavenumber(k1, self.n1), neg_wavenumber(k2, self.n2))
    }
}

#[inline]
fn wrap(i: usize, n: usize) -> i32 {
    if i < n / 2 {
        i as i32
    } else {
        i as i32 - n as i32
    }
}

#[inline]
fn unwrap_idx(k: i32, n: usize) -> usize {
    debug_assert!(k >= -(n as i32) / 2 && k < n as i32 / 2);
    if k >= 0 {
        k as usize
    } else {
        (k + n as i32) as usize
    }
}

/// `-k` on the wrapped lattice; the Nyquist frequency is its own negative.
#[inline]
fn neg_wavenumber(k: i32, n: usize) -> i32 {
    if k == -(n as i32) / 2 {
        k
    } else {
        -k
    }
}

/// Complex Fourier coefficients of a scalar field, row-major in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(BqsError::DimensionMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, k1: i32, k2: i32) -> Complex64 {
        self.coeffs[self.grid.index_of(k1, k2)]
    }

    pub fn set(&mut self, k1: i32, k2: i32, v: Complex64) {
        let idx = self.grid.index_of(k1, k2);
        self.coeffs[idx] = v;
    }

    /// Sets `c(k) = v` and `c(-k) = conj(v)` so the field stays real.
    pub fn set_mode_pair(&mut self, k1: i32, k2: i32, v: Complex64) {
        self.set(k1, k2, v);
        let nk1 = neg_wavenumber(k1, self.grid.n1);
        let nk2 = neg_wavenumber(k2, self.grid.n2);
        if (nk1, nk2) != (k1, k2) {
            self.set(nk1, nk2, v.conj());
        }
    }

    /// Field mean, i.e. the `k = 0` coefficient.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Max deviation from Hermitian symmetry `c(-k) = conj(c(k))`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..self.coeffs.len() {
            let m = self.grid.neg_index(idx);
            let d = (self.coeffs[m] - self.coeffs[idx].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    /// Projects onto the Hermitian part, making the represented field real.
    pub fn symmetrize(&mut self) {
        for idx in 0..self.coeffs.len() {
            let m = self.grid.neg_index(idx);
            if m < idx {
                continue;
            }
            let avg = 0.5 * (self.coeffs[idx] + self.coeffs[m].conj());
            self.coeffs[idx] = avg;
            self.coeffs[m] = avg.conj();
        }
    }

    /// Spectral l2 sum `sqrt(sum_k |c(k)|^2)`; equals the L^2 norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Partial derivative along axis 0 (`x1`) or 1 (`x2`): multiply by `i k_a`.
    pub fn derivative(&self, axis: usize) -> SpectralField {
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            let (k1, k2) = self.grid.wavenumber(idx);
            let k = if axis == 0 { k1 } else { k2 } as f64;
            *c *= Complex64::new(0.0, k);
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &SpectralField, s: f64) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(other, 1.0);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }
}

/// Real values at the collocation nodes, row-major (`values[i1*n2 + i2]`).
#[derive(Debug, Clone, PartialEq)]
pub struct PhysField {
    grid: Grid,
    values: Vec<f64>,
}

impl PhysField {
    pub fn zeros(grid: Grid) -> Self {
        PhysField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(BqsError::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(PhysField { grid, values })
    }

    /// Samples `f(x1, x2)` at the collocation nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let step1 = 2.0 * std::f64::consts::PI / grid.n1 as f64;
        let step2 = 2.0 * std::f64::consts::PI / grid.n2 as f64;
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n1 {
            for j in 0..grid.n2 {
                values.push(f(i as f64 * step1, j as f64 * step2));
            }
        }
        PhysField { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

// Plan cache shared across calls; rustfft plans are Send + Sync.
static FFT_PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn fft_plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = FFT_PLANS.lock().unwrap();
    cache
        .entry((len, inverse))
        .or_insert_with(|| {
            let dir = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            FftPlanner::new().plan_fft(len, dir)
        })
        .clone()
}

/// Unnormalized 2D FFT over a row-major n1 x n2 buffer.
fn fft2_in_place(data: &mut [Complex64], n1: usize, n2: usize, inverse: bool) {
    let row_plan = fft_plan(n2, inverse);
    for row in data.chunks_exact_mut(n2) {
        row_plan.process(row);
    }
    let col_plan = fft_plan(n1, inverse);
    let mut col = vec![Complex64::new(0.0, 0.0); n1];
    for c in 0..n2 {
        for r in 0..n1 {
            col[r] = data[r * n2 + c];
        }
        col_plan.process(&mut col);
        for r in 0..n1 {
            data[r * n2 + c] = col[r];
        }
    }
}

/// Forward transform: coefficients are spatial averages against `e^{-ik.x}`.
pub fn forward(field: &PhysField) -> SpectralField {
    let grid = field.grid;
    let mut data: Vec<Complex64> = field
        .values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft2_in_place(&mut data, grid.n1, grid.n2, false);
    let scale = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    SpectralField { grid, coeffs: data }
}

/// Inverse transform onto the collocation nodes; imaginary parts (zero for
/// Hermitian input up to rounding) are discarded.
pub fn inverse(field: &SpectralField) -> PhysField {
    PhysField {
        grid: field.grid,
        values: inverse_complex(field).into_iter().map(|c| c.re).collect(),
    }
}

/// Inverse transform keeping complex values; used for non-Hermitian fields
/// such as single complex exponentials in the norm toolkit.
pub fn inverse_complex(field: &SpectralField) -> Vec<Complex64> {
    let grid = field.grid;
    let mut data = field.coeffs.clone();
    fft2_in_place(&mut data, grid.n1, grid.n2, true);
    data
}

/// True if the wavenumber survives the 2/3-rule cut on this grid.
#[inline]
pub fn dealias_keeps(grid: Grid, k1: i32, k2: i32) -> bool {
    3 * k1.unsigned_abs() <= grid.n1 as u32 && 3 * k2.unsigned_abs() <= grid.n2 as u32
}

/// 2/3-rule projection: zeroes every coefficient with `|k1| > n1/3` or
/// `|k2| > n2/3`. Applied to quadratic products, never to linear terms.
pub fn dealias(field: &SpectralField) -> SpectralField {
    let mut out = field.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(field: &mut SpectralField) {
    let grid = field.grid;
    for (idx, c) in field.coeffs.iter_mut().enumerate() {
        let (k1, k2) = grid.wavenumber(idx);
        if !dealias_keeps(grid, k1, k2) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// L^p norm with the normalized measure `dx/(2pi)^2`; `p = inf` gives the
/// collocation max. Rejects `p < 1`.
pub fn lp_norm(field: &PhysField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(BqsError::InvalidNormExponent(p));
    }
    Ok(lp_norm_of_abs(field.values.iter().map(|v| v.abs()), field.grid.len(), p))
}

/// Shared kernel: L^p aggregate of a stream of magnitudes over `n` nodes.
pub(crate) fn lp_norm_of_abs(mags: impl Iterator<Item = f64>, n: usize, p: f64) -> f64 {
    if p.is_infinite() {
        return mags.fold(0.0f64, f64::max);
    }
    let inv_n = 1.0 / n as f64;
    let sum: f64 = if p == 2.0 {
        mags.map(|m| m * m).sum()
    } else if p == 1.0 {
        mags.sum()
    } else if p == 4.0 {
        mags.map(|m| {
            let s = m * m;
            s * s
        })
        .sum()
    } else {
        mags.map(|m| m.powf(p)).sum()
    };
    (sum * inv_n).powf(1.0 / p)
}

/// Collocation quadrature of `f*g` with the normalized measure.
pub fn inner_product(f: &PhysField, g: &PhysField) -> f64 {
    debug_assert_eq!(f.grid, g.grid);
    let sum: f64 = f.values.iter().zip(&g.values).map(|(a, b)| a * b).sum();
    sum / f.grid.len() as f64
}

pub(crate) fn check_same_grid(a: Grid, b: Grid) -> Result<()> {
    if a != b {
        return Err(BqsError::GridMismatch {
            a1: a.n1,
            a2: a.n2,
            b1: b.n1,
            b2: b.n2,
        });
    }
    Ok(())
}
