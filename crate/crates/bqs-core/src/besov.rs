//! Dyadic Littlewood-Paley decomposition and the Besov norm families
//! `B^{s,gamma}_{p,q}`, homogeneous variants and space-time forms.
//!
//! The default convention uses sharp Fourier cutoffs: `Delta_{-1}` holds
//! `|k| <= 1` and `Delta_j` the annulus `2^j < |k| <= 2^{j+1}`. On the integer
//! lattice these blocks partition the frequencies exactly, so the partition of
//! unity and block orthogonality are machine-checkable identities rather than
//! smooth-cutoff approximations. A raised-cosine `Smooth` mode mirrors the
//! textbook overlap structure (`Delta_j Delta_k = 0` only for `|j-k| >= 2`).

use crate::error::BqsError;
use crate::multipliers::in_sharp_block;
use crate::spectral::{inverse_complex, lp_norm_of_abs, Grid, SpectralField};
use crate::Result;

/// Choice of dyadic cutoff family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DyadicConvention {
    #[default]
    Sharp,
    Smooth,
}

/// Identifies a norm `B^{s,gamma}_{p,q}` or one of its space-time variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub gamma_log: f64,
    pub homogeneous: bool,
    /// Time exponent `rho` for space-time norms; `None` for purely spatial.
    pub time_exponent: Option<f64>,
    /// Tilde form: time integration per block before the `l^q` sum over `j`.
    pub tilde: bool,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, q: f64) -> Self {
        BesovSpec {
            s,
            p,
            q,
            gamma_log: 0.0,
            homogeneous: false,
            time_exponent: None,
            tilde: false,
        }
    }

    pub fn with_log(mut self, gamma_log: f64) -> Self {
        self.gamma_log = gamma_log;
        self
    }

    pub fn homogeneous(mut self) -> Self {
        self.homogeneous = true;
        self
    }

    pub fn in_time(mut self, rho: f64) -> Self {
        self.time_exponent = Some(rho);
        self
    }

    pub fn tilde(mut self) -> Self {
        self.tilde = true;
        self
    }

    /// `H^s = B^s_{2,2}`.
    pub fn sobolev(s: f64) -> Self {
        BesovSpec::new(s, 2.0, 2.0)
    }
}

/// Highest dyadic block index carried by the grid: the unique `j` with
/// `2^j < max|k| <= 2^{j+1}`.
pub fn j_max(grid: Grid) -> i32 {
    let max_k = grid.max_wavenumber();
    let mut j = 0i32;
    while 2f64.powi(j + 1) < max_k {
        j += 1;
    }
    j
}

fn chi_smooth(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let t = r.log2(); // in (0, 1)
        let c = (std::f64::consts::FRAC_PI_2 * t).cos();
        c * c
    }
}

/// Cutoff symbol of block `j` at wavenumber `(k1, k2)`.
pub fn block_symbol(j: i32, conv: DyadicConvention, k1: i32, k2: i32) -> f64 {
    match conv {
        DyadicConvention::Sharp => {
            if in_sharp_block(k1, k2, j) {
                1.0
            } else {
                0.0
            }
        }
        DyadicConvention::Smooth => {
            let r = (((k1 as f64) * (k1 as f64)) + ((k2 as f64) * (k2 as f64))).sqrt();
            if j == -1 {
                chi_smooth(r)
            } else if j >= 0 {
                chi_smooth(r / 2f64.powi(j + 1)) - chi_smooth(r / 2f64.powi(j))
            } else {
                0.0
            }
        }
    }
}

/// `Delta_j f`; out-of-range `j` gives the zero field.
pub fn dyadic_block(f: &SpectralField, j: i32, conv: DyadicConvention) -> SpectralField {
    let grid = f.grid();
    let mut out = f.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (k1, k2) = grid.wavenumber(idx);
        *c *= block_symbol(j, conv, k1, k2);
    }
    out
}

/// `S_j f`, the sum of blocks `-1 <= m <= j-1`.
pub fn low_pass(f: &SpectralField, j: i32, conv: DyadicConvention) -> SpectralField {
    let grid = f.grid();
    let mut out = f.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (k1, k2) = grid.wavenumber(idx);
        let mut sym = 0.0;
        for m in -1..j {
            sym += block_symbol(m, conv, k1, k2);
        }
        *c *= sym;
    }
    out
}

/// L^p norm of `Delta_j f` without materializing intermediate fields; the
/// `p = 2` path stays spectral via Parseval.
pub fn block_lp_norm(f: &SpectralField, j: i32, conv: DyadicConvention, p: f64) -> f64 {
    let block = dyadic_block(f, j, conv);
    if p == 2.0 {
        return block.l2_norm();
    }
    let vals = inverse_complex(&block);
    lp_norm_of_abs(vals.iter().map(|c| c.norm()), block.grid().len(), p)
}

fn weight(spec: &BesovSpec, j: i32) -> f64 {
    2f64.powf(j as f64 * spec.s) * (1.0 + j.abs() as f64).powf(spec.gamma_log)
}

fn lq_aggregate(terms: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        terms.iter().fold(0.0f64, |m, &v| m.max(v))
    } else if q == 1.0 {
        terms.iter().sum()
    } else if q == 2.0 {
        terms.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        terms.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn j_range(spec: &BesovSpec, grid: Grid) -> std::ops::RangeInclusive<i32> {
    let start = if spec.homogeneous { 0 } else { -1 };
    start..=j_max(grid)
}

/// `|| 2^{js} (1 + |j|)^gamma ||Delta_j f||_{L^p} ||_{l^q}`.
pub fn besov_norm(f: &SpectralField, spec: &BesovSpec, conv: DyadicConvention) -> f64 {
    let terms: Vec<f64> = j_range(spec, f.grid())
        .map(|j| weight(spec, j) * block_lp_norm(f, j, conv, spec.p))
        .collect();
    lq_aggregate(&terms, spec.q)
}

/// Besov norm of a two-component field, with the block `L^2` norm taken over
/// both components jointly. Used for the velocity difference `v` of the
/// stability functional.
pub fn besov_norm_vector2(
    f1: &SpectralField,
    f2: &SpectralField,
    spec: &BesovSpec,
    conv: DyadicConvention,
) -> f64 {
    let terms: Vec<f64> = j_range(spec, f1.grid())
        .map(|j| {
            let a = block_lp_norm(f1, j, conv, spec.p);
            let b = block_lp_norm(f2, j, conv, spec.p);
            weight(spec, j) * (a * a + b * b).sqrt()
        })
        .collect();
    lq_aggregate(&terms, spec.q)
}

fn validate_history(history: &[(f64, SpectralField)]) -> Result<()> {
    if history.len() < 2 {
        return Err(BqsError::History(format!(
            "need at least 2 samples, got {}",
            history.len()
        )));
    }
    for w in history.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(BqsError::History("timestamps must be strictly increasing".into()));
        }
    }
    Ok(())
}

/// Trapezoid `L^rho` aggregate of a sampled scalar function of time.
fn time_aggregate(ts: &[f64], vals: &[f64], rho: f64) -> f64 {
    if rho.is_infinite() {
        return vals.iter().fold(0.0f64, |m, &v| m.max(v));
    }
    let mut acc = 0.0;
    for i in 1..ts.len() {
        let dt = ts[i] - ts[i - 1];
        acc += 0.5 * dt * (vals[i - 1].powf(rho) + vals[i].powf(rho));
    }
    acc.powf(1.0 / rho)
}

/// Space-time Besov norm over a sampled history. The plain `L^rho_T B` form
/// integrates the spatial norm in time; the tilde form integrates each block
/// in time first and takes `l^q` over `j` second.
pub fn spacetime_besov_norm(
    history: &[(f64, SpectralField)],
    spec: &BesovSpec,
    conv: DyadicConvention,
) -> Result<f64> {
    validate_history(history)?;
    let rho = spec.time_exponent.ok_or_else(|| {
        BqsError::History("space-time norm requires a time exponent rho".into())
    })?;
    let ts: Vec<f64> = history.iter().map(|(t, _)| *t).collect();
    let grid = history[0].1.grid();
    if spec.tilde {
        let terms: Vec<f64> = j_range(spec, grid)
            .map(|j| {
                let vals: Vec<f64> = history
                    .iter()
                    .map(|(_, f)| block_lp_norm(f, j, conv, spec.p))
                    .collect();
                weight(spec, j) * time_aggregate(&ts, &vals, rho)
            })
            .collect();
        Ok(lq_aggregate(&terms, spec.q))
    } else {
        let spatial = BesovSpec {
            time_exponent: None,
            tilde: false,
            ..*spec
        };
        let vals: Vec<f64> = history
            .iter()
            .map(|(_, f)| besov_norm(f, &spatial, conv))
            .collect();
        Ok(time_aggregate(&ts, &vals, rho))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward, PhysField};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_spectral(grid: Grid, seed: u64) -> SpectralField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        forward(&PhysField::from_values(grid, vals).unwrap())
    }

    fn single_exponential(grid: Grid, k1: i32, k2: i32) -> SpectralField {
        let mut f = SpectralField::zeros(grid);
        f.set(k1, k2, Complex64::new(1.0, 0.0));
        f
    }

    #[test]
    fn exponential_lands_in_its_annulus() {
        // |k| = 5 for k = (3,4): 2^2 < 5 <= 2^3, so the block is j = 2.
        let grid = Grid::square(16).unwrap();
        let f = single_exponential(grid, 3, 4);
        for j in -1..=j_max(grid) {
            let b = dyadic_block(&f, j, DyadicConvention::Sharp);
            if j == 2 {
                assert_eq!(b, f);
            } else {
                assert!(b.l2_norm() == 0.0, "leak into block {j}");
            }
        }
    }

    #[test]
    fn constant_field_lives_in_lowest_block() {
        let grid = Grid::square(8).unwrap();
        let f = forward(&PhysField::from_fn(grid, |_, _| 4.2));
        let low = dyadic_block(&f, -1, DyadicConvention::Sharp);
        assert_eq!(low, f);
        for j in 0..=j_max(grid) {
            assert!(dyadic_block(&f, j, DyadicConvention::Sharp).l2_norm() == 0.0);
        }
    }

    #[test]
    fn sharp_partition_of_unity_is_exact() {
        let grid = Grid::square(16).unwrap();
        let f = random_spectral(grid, 2);
        let mut sum = SpectralField::zeros(grid);
        for j in -1..=j_max(grid) {
            sum.add_scaled(&dyadic_block(&f, j, DyadicConvention::Sharp), 1.0);
        }
        let err = sum
            .coeffs()
            .iter()
            .zip(f.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn smooth_partition_of_unity_and_overlap() {
        let grid = Grid::square(32).unwrap();
        let jm = j_max(grid);
        for idx in 0..grid.len() {
            let (k1, k2) = grid.wavenumber(idx);
            let total: f64 = (-1..=jm)
                .map(|j| block_symbol(j, DyadicConvention::Smooth, k1, k2))
                .sum();
            assert!((total - 1.0).abs() < 1e-13, "partition fails at ({k1},{k2})");
        }
        // non-adjacent blocks have disjoint supports
        for idx in 0..grid.len() {
            let (k1, k2) = grid.wavenumber(idx);
            for j in -1..=jm {
                for l in (j + 2)..=jm {
                    let a = block_symbol(j, DyadicConvention::Smooth, k1, k2);
                    let b = block_symbol(l, DyadicConvention::Smooth, k1, k2);
                    assert!(a * b == 0.0, "overlap j={j}, l={l} at ({k1},{k2})");
                }
            }
        }
    }

    #[test]
    fn low_pass_is_cumulative_sum_of_blocks() {
        let grid = Grid::square(16).unwrap();
        let f = random_spectral(grid, 9);
        let s2 = low_pass(&f, 2, DyadicConvention::Sharp);
        let mut manual = SpectralField::zeros(grid);
        for m in -1..2 {
            manual.add_scaled(&dyadic_block(&f, m, DyadicConvention::Sharp), 1.0);
        }
        let err = s2
            .coeffs()
            .iter()
            .zip(manual.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-15);
    }

    #[test]
    fn besov_norm_of_single_block_field() {
        let grid = Grid::square(16).unwrap();
        let f = single_exponential(grid, 3, 4);
        let plain = besov_norm(&f, &BesovSpec::new(1.0, 2.0, 1.0), DyadicConvention::Sharp);
        assert!((plain - 4.0).abs() < 1e-13);
        let logged = besov_norm(
            &f,
            &BesovSpec::new(1.0, 2.0, 1.0).with_log(1.0),
            DyadicConvention::Sharp,
        );
        assert!((logged - 12.0).abs() < 1e-13);
    }

    #[test]
    fn besov_norm_of_zero_field_vanishes() {
        let grid = Grid::square(8).unwrap();
        let z = SpectralField::zeros(grid);
        for spec in [
            BesovSpec::new(0.7, 2.0, 1.0),
            BesovSpec::new(-0.3, f64::INFINITY, f64::INFINITY).with_log(2.0),
            BesovSpec::sobolev(0.05).homogeneous(),
        ] {
            assert_eq!(besov_norm(&z, &spec, DyadicConvention::Sharp), 0.0);
        }
    }

    #[test]
    fn sobolev_comparability_window() {
        let grid = Grid::square(32).unwrap();
        for s in [0.25, 0.8] {
            let mut f = random_spectral(grid, 31);
            f.set(0, 0, Complex64::new(0.0, 0.0));
            let b = besov_norm(&f, &BesovSpec::sobolev(s), DyadicConvention::Sharp);
            let h: f64 = f
                .coeffs()
                .iter()
                .enumerate()
                .map(|(idx, c)| {
                    let (k1, k2) = grid.wavenumber(idx);
                    let kk = (k1 as f64).powi(2) + (k2 as f64).powi(2);
                    kk.powf(s) * c.norm_sqr()
                })
                .sum::<f64>()
                .sqrt();
            let ratio = (b * b) / (h * h);
            let lo = 2f64.powf(-2.0 * s);
            let hi = 2f64.powf(2.0 * s);
            assert!(ratio >= lo * (1.0 - 1e-12) && ratio <= hi * (1.0 + 1e-12), "s={s} ratio={ratio}");
        }
    }

    #[test]
    fn besov_monotone_in_log_weight_and_order() {
        let grid = Grid::square(16).unwrap();
        let f = single_exponential(grid, 3, 4);
        let base = besov_norm(&f, &BesovSpec::new(0.5, 2.0, 1.0), DyadicConvention::Sharp);
        let heavier = besov_norm(
            &f,
            &BesovSpec::new(0.5, 2.0, 1.0).with_log(1.5),
            DyadicConvention::Sharp,
        );
        let higher = besov_norm(&f, &BesovSpec::new(1.5, 2.0, 1.0), DyadicConvention::Sharp);
        assert!(heavier > base);
        assert!(higher > base);
    }

    #[test]
    fn spacetime_constant_history() {
        let grid = Grid::square(16).unwrap();
        let f = random_spectral(grid, 4);
        let t_end = 1.75;
        let history: Vec<(f64, SpectralField)> = (0..8)
            .map(|i| (t_end * i as f64 / 7.0, f.clone()))
            .collect();
        let spatial = BesovSpec::new(0.3, 2.0, 2.0);
        let b = besov_norm(&f, &spatial, DyadicConvention::Sharp);
        let l1 = spacetime_besov_norm(&history, &spatial.in_time(1.0), DyadicConvention::Sharp).unwrap();
        assert!((l1 - t_end * b).abs() < 1e-12 * b.max(1.0));
        let l2 = spacetime_besov_norm(&history, &spatial.in_time(2.0), DyadicConvention::Sharp).unwrap();
        assert!((l2 - t_end.sqrt() * b).abs() < 1e-12 * b.max(1.0));
    }

    #[test]
    fn tilde_equals_plain_for_single_block_history() {
        let grid = Grid::square(16).unwrap();
        let f = single_exponential(grid, 3, 4);
        let history: Vec<(f64, SpectralField)> =
            (0..5).map(|i| (0.25 * i as f64, f.clone())).collect();
        let spec = BesovSpec::new(0.8, 2.0, 1.0).in_time(2.0);
        let plain = spacetime_besov_norm(&history, &spec, DyadicConvention::Sharp).unwrap();
        let tilde = spacetime_besov_norm(&history, &spec.tilde(), DyadicConvention::Sharp).unwrap();
        assert!((plain - tilde).abs() < 1e-13);
    }

    #[test]
    fn spacetime_rejects_degenerate_histories() {
        let grid = Grid::square(8).unwrap();
        let f = SpectralField::zeros(grid);
        let spec = BesovSpec::new(0.0, 2.0, 2.0).in_time(1.0);
        assert!(spacetime_besov_norm(&[(0.0, f.clone())], &spec, DyadicConvention::Sharp).is_err());
        let bad = vec![(0.0, f.clone()), (0.0, f.clone())];
        assert!(spacetime_besov_norm(&bad, &spec, DyadicConvention::Sharp).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn prop_sharp_blocks_are_orthogonal(seed in 0u64..500) {
            let grid = Grid::square(16).unwrap();
            let f = random_spectral(grid, seed);
            let jm = j_max(grid);
            for j in -1..=jm {
                let bj = dyadic_block(&f, j, DyadicConvention::Sharp);
                for l in -1..=jm {
                    if l != j {
                        let nested = dyadic_block(&bj, l, DyadicConvention::Sharp);
                        prop_assert!(nested.l2_norm() == 0.0);
                    }
                }
            }
        }

        #[test]
        fn prop_minkowski_embedding_between_tilde_and_plain(seed in 0u64..500) {
            let grid = Grid::square(16).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let history: Vec<(f64, SpectralField)> = (0..4)
                .map(|i| (i as f64 * 0.5, random_spectral(grid, seed.wrapping_mul(31).wrapping_add(i))))
                .collect();
            let _ = &mut rng;
            // q >= rho: tilde norm <= plain norm; rho >= q: reversed
            let spec_a = BesovSpec::new(0.2, 2.0, 4.0).in_time(2.0);
            let plain_a = spacetime_besov_norm(&history, &spec_a, DyadicConvention::Sharp).unwrap();
            let tilde_a = spacetime_besov_norm(&history, &spec_a.tilde(), DyadicConvention::Sharp).unwrap();
            prop_assert!(tilde_a <= plain_a * (1.0 + 1e-12));

            let spec_b = BesovSpec::new(0.2, 2.0, 1.0).in_time(3.0);
            let plain_b = spacetime_besov_norm(&history, &spec_b, DyadicConvention::Sharp).unwrap();
            let tilde_b = spacetime_besov_norm(&history, &spec_b.tilde(), DyadicConvention::Sharp).unwrap();
            prop_assert!(tilde_b >= plain_b * (1.0 - 1e-12));
        }
    }
}
