//! Derived quantities monitored along a run: the good unknown
//! `G = omega - R_alpha theta`, its energy balance, the commutator fields
//! behind the key estimates, tracked norm histories, and the twin-run
//! stability functional with its Osgood majorant.

use crate::besov::{besov_norm, besov_norm_vector2, dyadic_block, BesovSpec, DyadicConvention};
use crate::config::RunConfig;
use crate::dynamics::{advection_term, initial_state, random_field, SimState, StepScheme};
use crate::error::BqsError;
use crate::multipliers::{apply_multiplier, biot_savart, fractional_power_table, Multiplier};
use crate::spectral::{inner_product, inverse, lp_norm, PhysField, SpectralField};
use crate::Result;

/// `G = omega - R_alpha theta`. The source `d_x1 theta` of the vorticity
/// equation cancels in the evolution of G, leaving a clean energy identity.
pub fn compute_g(state: &SimState) -> SpectralField {
    let riesz = Multiplier::ModifiedRiesz {
        alpha: state.params.alpha,
    };
    state.omega.sub(&apply_multiplier(&riesz, &state.theta))
}

/// Which commutator to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommutatorKind {
    /// `[R_alpha, u . grad] f = R_alpha(u . grad f) - u . grad (R_alpha f)`.
    RieszAdvection { alpha: f64 },
    /// `[Delta_j, u . grad] f` with the sharp dyadic block.
    BlockAdvection { j: i32 },
}

/// Computes the commutator field with the quadratic products dealiased
/// identically on both branches.
pub fn commutator_field(
    u1: &PhysField,
    u2: &PhysField,
    f: &SpectralField,
    kind: CommutatorKind,
) -> SpectralField {
    let adv_f = advection_term(u1, u2, f);
    match kind {
        CommutatorKind::RieszAdvection { alpha } => {
            let riesz = Multiplier::ModifiedRiesz { alpha };
            let branch1 = apply_multiplier(&riesz, &adv_f);
            let branch2 = advection_term(u1, u2, &apply_multiplier(&riesz, f));
            branch1.sub(&branch2)
        }
        CommutatorKind::BlockAdvection { j } => {
            let branch1 = dyadic_block(&adv_f, j, DyadicConvention::Sharp);
            let branch2 = advection_term(u1, u2, &dyadic_block(f, j, DyadicConvention::Sharp));
            branch1.sub(&branch2)
        }
    }
}

/// `||Lambda^{alpha/2} G||_2^2`, evaluated spectrally.
pub fn dissipation_integrand(g: &SpectralField, alpha: f64) -> f64 {
    let tab = fractional_power_table(g.grid(), alpha);
    g.coeffs()
        .iter()
        .zip(tab.iter())
        .map(|(c, &l)| l * c.norm_sqr())
        .sum()
}

/// Residual of the G energy identity over one solver step:
///
/// ```text
/// 1/2 d/dt ||G||_2^2 + ||Lambda^{alpha/2} G||_2^2
///    = int [R_alpha, u . grad] theta G dx + int Lambda^{beta-alpha} d_x1 theta G dx
/// ```
///
/// with a centered difference for `d/dt` and midpoint collocation quadratures
/// for the integrals, normalized by `max(||Lambda^{alpha/2} G||^2, 1e-8)`.
pub fn energy_balance_residual(prev: &SimState, cur: &SimState, dt: f64) -> f64 {
    let p = &cur.params;
    let g_prev = compute_g(prev);
    let g_cur = compute_g(cur);

    let mut omega_mid = prev.omega.clone();
    omega_mid.add_scaled(&cur.omega, 1.0);
    omega_mid.scale(0.5);
    let mut theta_mid = prev.theta.clone();
    theta_mid.add_scaled(&cur.theta, 1.0);
    theta_mid.scale(0.5);
    let mut g_mid = g_prev.clone();
    g_mid.add_scaled(&g_cur, 1.0);
    g_mid.scale(0.5);

    let diss = dissipation_integrand(&g_mid, p.alpha);
    let ddt = (g_cur.l2_norm().powi(2) - g_prev.l2_norm().powi(2)) / (2.0 * dt);
    let lhs = ddt + diss;

    let (u1s, u2s) = biot_savart(&omega_mid, p);
    let u1 = inverse(&u1s);
    let u2 = inverse(&u2s);
    let commutator = commutator_field(
        &u1,
        &u2,
        &theta_mid,
        CommutatorKind::RieszAdvection { alpha: p.alpha },
    );
    let lam = Multiplier::FractionalPower {
        s: p.beta - p.alpha,
    };
    let forcing = apply_multiplier(&lam, &theta_mid.derivative(0));
    let g_phys = inverse(&g_mid);
    let rhs = inner_product(&inverse(&commutator), &g_phys)
        + inner_product(&inverse(&forcing), &g_phys);

    (lhs - rhs).abs() / diss.max(1e-8)
}

/// One time-sample of every tracked norm, residual and ratio.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `(p, ||theta||_{L^p})` for p in {2, 4, inf}.
    pub lp_theta: Vec<(f64, f64)>,
    pub l2_g: f64,
    /// `||Lambda^{alpha/2} G||_2^2` at this sample.
    pub diss_g_integrand: f64,
    /// Trapezoid-cumulative `int_0^t ||Lambda^{alpha/2} G||_2^2 dtau`.
    pub diss_g_cum: f64,
    /// `(q, ||G||_{L^q})` for the configured exponents.
    pub lq_g: Vec<(f64, f64)>,
    /// `(p, ||omega||_{L^p})` for p in {2, 4, inf}.
    pub lp_omega: Vec<(f64, f64)>,
    /// `||omega||_{B^{0,gamma}_{inf,1}}`.
    pub besov_omega_0gamma: f64,
    /// `||theta||_{H^{1-alpha}}` as `B^{1-alpha}_{2,2}`.
    pub besov_theta_hs: f64,
    /// `||theta||_{B^{1-alpha+eps}_{inf,1}}`.
    pub besov_theta_binf: f64,
    pub energy_residual: f64,
    pub commutator_ratio: f64,
    /// Trapezoid-cumulative `int_0^t ||omega||_{B^{0,gamma}_{inf,1}} dtau`.
    pub cum_l1t_besov_omega: f64,
}

/// Stateful record builder: carries the trapezoid accumulators between
/// samples. One recorder per trajectory.
pub struct Recorder {
    besov_eps: f64,
    lq_g: Vec<f64>,
    prev_t: Option<f64>,
    prev_diss: f64,
    prev_besov_omega: f64,
    cum_diss: f64,
    cum_besov_omega: f64,
}

impl Recorder {
    pub fn new(config: &RunConfig) -> Self {
        Recorder {
            besov_eps: config.besov_eps,
            lq_g: config.lq_g.clone(),
            prev_t: None,
            prev_diss: 0.0,
            prev_besov_omega: 0.0,
            cum_diss: 0.0,
            cum_besov_omega: 0.0,
        }
    }

    /// Fills a full record at `state.t`. `last_step`, when present, is the
    /// state before the most recent step and the step size, used for the
    /// energy-balance residual.
    pub fn record(&mut self, state: &SimState, last_step: Option<(&SimState, f64)>) -> DiagnosticsRecord {
        let p = &state.params;
        let eps = self.besov_eps;
        let conv = DyadicConvention::Sharp;

        let theta_phys = inverse(&state.theta);
        let omega_phys = inverse(&state.omega);
        let lp = |f: &PhysField, p: f64| lp_norm(f, p).expect("p >= 1");
        let lp_theta = vec![
            (2.0, lp(&theta_phys, 2.0)),
            (4.0, lp(&theta_phys, 4.0)),
            (f64::INFINITY, lp(&theta_phys, f64::INFINITY)),
        ];
        let lp_omega = vec![
            (2.0, lp(&omega_phys, 2.0)),
            (4.0, lp(&omega_phys, 4.0)),
            (f64::INFINITY, lp(&omega_phys, f64::INFINITY)),
        ];

        let g = compute_g(state);
        let g_phys = inverse(&g);
        let l2_g = g.l2_norm();
        let diss = dissipation_integrand(&g, p.alpha);
        let lq_g: Vec<(f64, f64)> = self.lq_g.iter().map(|&q| (q, lp(&g_phys, q))).collect();

        let besov_omega_0gamma = besov_norm(
            &state.omega,
            &BesovSpec::new(0.0, f64::INFINITY, 1.0).with_log(p.gamma),
            conv,
        );
        let besov_theta_hs = besov_norm(&state.theta, &BesovSpec::sobolev(1.0 - p.alpha), conv);
        let besov_theta_binf = besov_norm(
            &state.theta,
            &BesovSpec::new(1.0 - p.alpha + eps, f64::INFINITY, 1.0),
            conv,
        );

        // commutator ratio: || [R_a, u.grad] theta ||_{B^0_{2,1}} against the
        // right-hand side combination of the commutator estimate
        let (u1s, u2s) = biot_savart(&state.omega, p);
        let u1 = inverse(&u1s);
        let u2 = inverse(&u2s);
        let commutator = commutator_field(
            &u1,
            &u2,
            &state.theta,
            CommutatorKind::RieszAdvection { alpha: p.alpha },
        );
        let num = besov_norm(&commutator, &BesovSpec::new(0.0, 2.0, 1.0), conv);
        let den_u = besov_norm_vector2(
            &u1s,
            &u2s,
            &BesovSpec::new(1.0 - p.sigma - eps, 2.0, f64::INFINITY).homogeneous(),
            conv,
        );
        let den_theta = besov_norm(
            &state.theta,
            &BesovSpec::new(1.0 + p.sigma + eps - p.alpha, f64::INFINITY, 1.0),
            conv,
        ) + lp(&theta_phys, f64::INFINITY);
        let den = den_u * den_theta;
        let commutator_ratio = if num == 0.0 {
            0.0
        } else if den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        };

        let energy_residual = match last_step {
            Some((prev, dt)) => energy_balance_residual(prev, state, dt),
            None => 0.0,
        };

        if let Some(prev_t) = self.prev_t {
            let dt = state.t - prev_t;
            self.cum_diss += 0.5 * dt * (self.prev_diss + diss);
            self.cum_besov_omega += 0.5 * dt * (self.prev_besov_omega + besov_omega_0gamma);
        }
        self.prev_t = Some(state.t);
        self.prev_diss = diss;
        self.prev_besov_omega = besov_omega_0gamma;

        DiagnosticsRecord {
            t: state.t,
            lp_theta,
            l2_g,
            diss_g_integrand: diss,
            diss_g_cum: self.cum_diss,
            lq_g,
            lp_omega,
            besov_omega_0gamma,
            besov_theta_hs,
            besov_theta_binf,
            energy_residual,
            commutator_ratio,
            cum_l1t_besov_omega: self.cum_besov_omega,
        }
    }
}

/// The stability functional of the uniqueness argument, evaluated on a pair
/// of states at equal times:
/// `Y = ||theta2 - theta1||_{B^{-alpha}_{2,inf}} + ||v2 - v1||_{B^0_{2,inf}}`
/// with `v = (log(Id - Laplace))^{-gamma} u`.
pub fn stability_y(a: &SimState, b: &SimState) -> f64 {
    let p = &a.params;
    let theta_diff = b.theta.sub(&a.theta);
    let inv_log = Multiplier::InverseLogPower { gamma: p.gamma };
    let (ua1, ua2) = biot_savart(&a.omega, p);
    let (ub1, ub2) = biot_savart(&b.omega, p);
    let v_diff1 = apply_multiplier(&inv_log, &ub1.sub(&ua1));
    let v_diff2 = apply_multiplier(&inv_log, &ub2.sub(&ua2));
    let conv = DyadicConvention::Sharp;
    besov_norm(
        &theta_diff,
        &BesovSpec::new(-p.alpha, 2.0, f64::INFINITY),
        conv,
    ) + besov_norm_vector2(
        &v_diff1,
        &v_diff2,
        &BesovSpec::new(0.0, 2.0, f64::INFINITY),
        conv,
    )
}

/// `D1 = ||theta1||_{B^{1-alpha,gamma}_{inf,1}} + ||omega1||_{B^{0,gamma}_{inf,1}}
///       + ||omega2||_{B^{0,gamma}_{inf,1}}` and `D2 = ||omega1||_2 + ||omega2||_2`.
pub fn stability_coefficients(a: &SimState, b: &SimState) -> (f64, f64) {
    let p = &a.params;
    let conv = DyadicConvention::Sharp;
    let d1 = besov_norm(
        &a.theta,
        &BesovSpec::new(1.0 - p.alpha, f64::INFINITY, 1.0).with_log(p.gamma),
        conv,
    ) + besov_norm(
        &a.omega,
        &BesovSpec::new(0.0, f64::INFINITY, 1.0).with_log(p.gamma),
        conv,
    ) + besov_norm(
        &b.omega,
        &BesovSpec::new(0.0, f64::INFINITY, 1.0).with_log(p.gamma),
        conv,
    );
    let d2 = a.omega.l2_norm() + b.omega.l2_norm();
    (d1, d2)
}

/// Numerically integrates the Osgood majorant ODE
/// `Y' = C D1(t) [ Y log(1 + D2(t)/Y) + Y ]` on the sample grid `times`,
/// with linear interpolation of the coefficients and RK4 substeps.
/// `y0 = 0` returns the identically-zero function.
pub fn osgood_majorant(y0: f64, times: &[f64], d1: &[f64], d2: &[f64], c: f64) -> Vec<f64> {
    assert_eq!(times.len(), d1.len());
    assert_eq!(times.len(), d2.len());
    if y0 <= 0.0 {
        return vec![0.0; times.len()];
    }
    let rhs = |y: f64, d1v: f64, d2v: f64| -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        c * d1v * (y * (d2v / y).ln_1p() + y)
    };
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0;
    out.push(y);
    const SUBSTEPS: usize = 32;
    for i in 1..times.len() {
        let t0 = times[i - 1];
        let t1 = times[i];
        let h = (t1 - t0) / SUBSTEPS as f64;
        let interp = |arr: &[f64], t: f64| -> f64 {
            if t1 == t0 {
                return arr[i];
            }
            let w = (t - t0) / (t1 - t0);
            arr[i - 1] * (1.0 - w) + arr[i] * w
        };
        for s in 0..SUBSTEPS {
            let t = t0 + s as f64 * h;
            let k1 = rhs(y, interp(d1, t), interp(d2, t));
            let k2 = rhs(y + 0.5 * h * k1, interp(d1, t + 0.5 * h), interp(d2, t + 0.5 * h));
            let k3 = rhs(y + 0.5 * h * k2, interp(d1, t + 0.5 * h), interp(d2, t + 0.5 * h));
            let k4 = rhs(y + h * k3, interp(d1, t + h), interp(d2, t + h));
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push(y);
    }
    out
}

/// One sample of a twin-run comparison.
#[derive(Debug, Clone, Copy)]
pub struct TwinRow {
    pub t: f64,
    pub y: f64,
    pub majorant: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Runs two trajectories, the second from initial data perturbed by
/// `delta` times unit-norm random fields, and tracks the stability
/// functional `Y(t)` against the integrated Osgood majorant with constant
/// `c_osgood`.
pub fn twin_stability(config: &RunConfig, delta: f64, c_osgood: f64) -> Result<Vec<TwinRow>> {
    if !(delta >= 0.0) {
        return Err(BqsError::InvalidParameter(
            "perturbation amplitude delta must be >= 0".into(),
        ));
    }
    let base = initial_state(config)?;
    let grid = base.grid();
    let zeta = random_field(grid, config.init.seed.wrapping_add(2), config.init.slope, config.init.k_c, 1.0);
    let eta = random_field(grid, config.init.seed.wrapping_add(3), config.init.slope, config.init.k_c, 1.0);
    let mut perturbed = base.clone();
    perturbed.omega.add_scaled(&zeta, delta);
    perturbed.theta.add_scaled(&eta, delta);

    let mut run1 = base;
    let mut run2 = perturbed;

    let mut times = Vec::new();
    let mut ys = Vec::new();
    let mut d1s = Vec::new();
    let mut d2s = Vec::new();

    let mut sample = |a: &SimState, b: &SimState| {
        times.push(a.t);
        ys.push(stability_y(a, b));
        let (d1, d2) = stability_coefficients(a, b);
        d1s.push(d1);
        d2s.push(d2);
    };
    sample(&run1, &run2);

    let mut diag_i: u64 = 1;
    while run1.t < config.t_end - 1e-12 {
        let target = (config.diag_interval * diag_i as f64).min(config.t_end);
        advance_to(&mut run1, target, config)?;
        advance_to(&mut run2, target, config)?;
        sample(&run1, &run2);
        diag_i += 1;
    }

    let majorant = osgood_majorant(ys[0], &times, &d1s, &d2s, c_osgood);
    Ok(times
        .iter()
        .zip(&ys)
        .zip(&majorant)
        .zip(d1s.iter().zip(&d2s))
        .map(|(((t, y), m), (d1, d2))| TwinRow {
            t: *t,
            y: *y,
            majorant: *m,
            d1: *d1,
            d2: *d2,
        })
        .collect())
}

fn advance_to(state: &mut SimState, target: f64, config: &RunConfig) -> Result<()> {
    while state.t < target - 1e-12 {
        let mut dt = match config.fixed_dt {
            Some(fixed) => fixed,
            None => crate::dynamics::cfl_dt(state, config.cfl_safety).min(config.max_dt),
        };
        let rem = target - state.t;
        let hits = dt >= rem || (rem - dt) <= rem * 1e-12 + 1e-9;
        if hits {
            dt = rem;
        }
        *state = crate::dynamics::step(state, &StepScheme::if_rk4(dt))?;
        if hits {
            state.t = target;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipliers::ParamSet;
    use crate::spectral::{forward, Grid};
    use num_complex::Complex64;

    fn params(alpha: f64) -> ParamSet {
        ParamSet {
            alpha,
            beta: 0.08,
            sigma: 0.0,
            gamma: 0.0,
            nu: 1.0,
            kappa: 1.0,
        }
    }

    fn state(grid: Grid, p: ParamSet, w: impl Fn(f64, f64) -> f64, th: impl Fn(f64, f64) -> f64) -> SimState {
        SimState {
            t: 0.0,
            omega: forward(&PhysField::from_fn(grid, w)),
            theta: forward(&PhysField::from_fn(grid, th)),
            params: p,
        }
    }

    #[test]
    fn g_reduces_to_omega_for_zero_theta() {
        let grid = Grid::square(16).unwrap();
        let s = state(grid, params(0.95), |x1, x2| x1.sin() * x2.cos(), |_, _| 0.0);
        let g = compute_g(&s);
        assert!(g.sub(&s.omega).l2_norm() < 1e-15);
    }

    #[test]
    fn g_vanishes_when_omega_matches_riesz_theta() {
        let grid = Grid::square(16).unwrap();
        let p = params(0.6);
        let theta = forward(&PhysField::from_fn(grid, |x1, x2| (x1 + 2.0 * x2).sin()));
        let riesz = Multiplier::modified_riesz(p.alpha).unwrap();
        let s = SimState {
            t: 0.0,
            omega: apply_multiplier(&riesz, &theta),
            theta,
            params: p,
        };
        assert!(compute_g(&s).l2_norm() < 1e-15);
    }

    #[test]
    fn g_single_mode_reference_value() {
        // omega = theta = sin 2x1, alpha = 0.95: G = sin 2x1 - 2^{0.05} cos 2x1
        let grid = Grid::square(16).unwrap();
        let s = state(
            grid,
            params(0.95),
            |x1, _| (2.0 * x1).sin(),
            |x1, _| (2.0 * x1).sin(),
        );
        let g = inverse(&compute_g(&s));
        let gain = 2f64.powf(0.05);
        let expect = PhysField::from_fn(grid, |x1, _| (2.0 * x1).sin() - gain * (2.0 * x1).cos());
        let err = g
            .values()
            .iter()
            .zip(expect.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn g_is_linear_in_its_arguments() {
        let grid = Grid::square(16).unwrap();
        let p = params(0.8);
        let s1 = state(grid, p, |x1, _| x1.sin(), |x1, x2| (x1 + x2).cos());
        let s2 = state(grid, p, |_, x2| (3.0 * x2).cos(), |x1, x2| (2.0 * x1 - x2).sin());
        let summed = SimState {
            t: 0.0,
            omega: s1.omega.add(&s2.omega),
            theta: s1.theta.add(&s2.theta),
            params: p,
        };
        let lhs = compute_g(&summed);
        let rhs = compute_g(&s1).add(&compute_g(&s2));
        assert!(lhs.sub(&rhs).l2_norm() < 1e-13);
    }

    #[test]
    fn commutators_vanish_for_constant_velocity() {
        let grid = Grid::square(16).unwrap();
        let u1 = PhysField::from_fn(grid, |_, _| 0.7);
        let u2 = PhysField::from_fn(grid, |_, _| -0.4);
        let f = forward(&PhysField::from_fn(grid, |x1, x2| (2.0 * x1).sin() * x2.cos()));
        let c1 = commutator_field(&u1, &u2, &f, CommutatorKind::RieszAdvection { alpha: 0.7 });
        let c2 = commutator_field(&u1, &u2, &f, CommutatorKind::BlockAdvection { j: 1 });
        assert!(c1.l2_norm() < 1e-13, "riesz commutator {}", c1.l2_norm());
        assert!(c2.l2_norm() < 1e-13, "block commutator {}", c2.l2_norm());
    }

    #[test]
    fn commutators_of_zero_field_vanish() {
        let grid = Grid::square(16).unwrap();
        let u1 = PhysField::from_fn(grid, |x1, _| x1.sin());
        let u2 = PhysField::from_fn(grid, |_, x2| x2.cos());
        let z = SpectralField::zeros(grid);
        let c = commutator_field(&u1, &u2, &z, CommutatorKind::RieszAdvection { alpha: 0.5 });
        assert_eq!(c.l2_norm(), 0.0);
    }

    #[test]
    fn energy_residual_vanishes_for_zero_state() {
        let grid = Grid::square(16).unwrap();
        let p = params(0.95);
        let a = state(grid, p, |_, _| 0.0, |_, _| 0.0);
        let mut b = a.clone();
        b.t = 1e-3;
        assert_eq!(energy_balance_residual(&a, &b, 1e-3), 0.0);
    }

    #[test]
    fn energy_residual_tiny_on_exact_exponential() {
        // advection-free, theta = 0: ||G||^2 decays exactly; only the centered
        // difference error (O(dt^2) with |k| = 1 modes) remains
        let grid = Grid::square(16).unwrap();
        let p = params(0.95);
        let a = state(grid, p, |x1, x2| x1.sin() + x2.cos(), |_, _| 0.0);
        let dt = 1e-5;
        let b = crate::dynamics::step(&a, &StepScheme::if_rk4(dt).without_advection()).unwrap();
        let res = energy_balance_residual(&a, &b, dt);
        assert!(res < 1e-10, "residual {res}");
    }

    #[test]
    fn energy_residual_is_second_order_in_dt() {
        let grid = Grid::square(32).unwrap();
        let p = params(0.95);
        let mut s = SimState {
            t: 0.0,
            omega: random_field(grid, 5, 2.0, 5.0, 1.0),
            theta: random_field(grid, 6, 2.0, 5.0, 1.0),
            params: p,
        };
        // settle transients so the pair is a genuine solver step
        for _ in 0..5 {
            s = crate::dynamics::step(&s, &StepScheme::if_rk4(1e-3)).unwrap();
        }
        let res_at = |dt: f64| {
            let next = crate::dynamics::step(&s, &StepScheme::if_rk4(dt)).unwrap();
            energy_balance_residual(&s, &next, dt)
        };
        let coarse = res_at(2e-3);
        let fine = res_at(1e-3);
        assert!(fine <= coarse / 3.0, "no dt^2 decay: {coarse} -> {fine}");
    }

    #[test]
    fn recorder_on_zero_state_is_all_zero() {
        let cfg = crate::config::parse_config("n = 16\ninit = explicit_modes\n").unwrap();
        let grid = Grid::square(16).unwrap();
        let s = state(grid, cfg.params, |_, _| 0.0, |_, _| 0.0);
        let mut rec = Recorder::new(&cfg);
        let r = rec.record(&s, None);
        assert_eq!(r.l2_g, 0.0);
        assert_eq!(r.diss_g_cum, 0.0);
        assert_eq!(r.commutator_ratio, 0.0);
        assert_eq!(r.energy_residual, 0.0);
        assert!(r.lp_theta.iter().all(|(_, v)| *v == 0.0));
        assert!(r.lp_omega.iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn recorder_accumulates_trapezoids() {
        let cfg = crate::config::parse_config("n = 16\n").unwrap();
        let grid = Grid::square(16).unwrap();
        let p = cfg.params;
        let mut rec = Recorder::new(&cfg);
        let mut s = state(grid, p, |x1, _| x1.sin(), |x1, x2| (x1 + x2).cos());
        let r0 = rec.record(&s, None);
        s.t = 0.5;
        let r1 = rec.record(&s, None);
        // same state, so trapezoid = interval * integrand
        assert!((r1.diss_g_cum - 0.5 * r0.diss_g_integrand).abs() < 1e-14);
        assert!((r1.cum_l1t_besov_omega - 0.5 * r0.besov_omega_0gamma).abs() < 1e-14);
    }

    #[test]
    fn osgood_zero_initial_condition_stays_zero() {
        let times = [0.0, 0.5, 1.0];
        let d1 = [1.0, 1.0, 1.0];
        let d2 = [1.0, 1.0, 1.0];
        let m = osgood_majorant(0.0, &times, &d1, &d2, 1.0);
        assert_eq!(m, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn osgood_reduces_to_gronwall_for_zero_d2() {
        let n = 21;
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.05).collect();
        let d1 = vec![0.8; n];
        let d2 = vec![0.0; n];
        let y0 = 1e-4;
        let m = osgood_majorant(y0, &times, &d1, &d2, 1.0);
        for (i, &t) in times.iter().enumerate() {
            let exact = y0 * (0.8 * t).exp();
            assert!((m[i] - exact).abs() < 1e-10 * exact, "at t={t}");
        }
    }

    #[test]
    fn osgood_self_converges_under_grid_refinement() {
        let y0 = 1e-6;
        let coarse_times: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let fine_times: Vec<f64> = (0..1001).map(|i| i as f64 * 0.001).collect();
        let coarse = osgood_majorant(y0, &coarse_times, &vec![1.0; 11], &vec![1.0; 11], 1.0);
        let fine = osgood_majorant(y0, &fine_times, &vec![1.0; 1001], &vec![1.0; 1001], 1.0);
        let a = coarse.last().unwrap();
        let b = fine.last().unwrap();
        assert!((a - b).abs() / b < 1e-6, "coarse {a} vs fine {b}");
    }

    #[test]
    fn stability_y_is_symmetric_and_zero_on_equal_states() {
        let grid = Grid::square(16).unwrap();
        let p = ParamSet {
            gamma: 0.7,
            ..params(0.95)
        };
        let a = state(grid, p, |x1, _| x1.sin(), |x1, x2| (x1 + x2).cos());
        let b = state(grid, p, |x1, x2| x1.sin() + 0.01 * (x2).cos(), |x1, x2| {
            (x1 + x2).cos() - 0.02 * x1.sin()
        });
        assert_eq!(stability_y(&a, &a), 0.0);
        let yab = stability_y(&a, &b);
        let yba = stability_y(&b, &a);
        assert!((yab - yba).abs() < 1e-13 * yab.max(1.0));
        assert!(yab > 0.0);
    }

    #[test]
    fn twin_with_zero_delta_is_identically_zero() {
        let cfg = crate::config::parse_config(
            "n = 16\nseed = 4\ninit_kc = 3\nt_end = 0.04\ndiag_interval = 0.02\nmax_dt = 0.005\n",
        )
        .unwrap();
        let rows = twin_stability(&cfg, 0.0, 1.0).unwrap();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert!(r.y <= 1e-13, "Y = {} at t = {}", r.y, r.t);
            assert_eq!(r.majorant, 0.0);
        }
    }

    #[test]
    fn twin_tracks_small_perturbations_below_majorant() {
        let cfg = crate::config::parse_config(
            "n = 32\nseed = 4\ninit_kc = 4\nt_end = 0.1\ndiag_interval = 0.05\nmax_dt = 0.005\n",
        )
        .unwrap();
        let delta = 1e-6;
        let rows = twin_stability(&cfg, delta, 1.0).unwrap();
        assert!(rows[0].y > 0.0);
        for r in &rows {
            assert!(r.y <= r.majorant * (1.0 + 1e-9), "Y {} above majorant {} at t {}", r.y, r.majorant, r.t);
            assert!(r.d1.is_finite() && r.d2.is_finite());
        }
    }

    #[test]
    fn riesz_commutator_matches_composition_on_modes() {
        // sanity: commutator is the difference of the two composition orders
        let grid = Grid::square(16).unwrap();
        let alpha = 0.8;
        let u1 = PhysField::from_fn(grid, |x1, x2| (x1).sin() * (x2).cos());
        let u2 = PhysField::from_fn(grid, |x1, x2| (x1).cos() * (x2).sin());
        let f = forward(&PhysField::from_fn(grid, |x1, x2| (2.0 * x1 + x2).sin()));
        let riesz = Multiplier::modified_riesz(alpha).unwrap();
        let com = commutator_field(&u1, &u2, &f, CommutatorKind::RieszAdvection { alpha });
        let manual = apply_multiplier(&riesz, &advection_term(&u1, &u2, &f))
            .sub(&advection_term(&u1, &u2, &apply_multiplier(&riesz, &f)));
        assert!(com.sub(&manual).l2_norm() < 1e-15);
        // and it carries Hermitian symmetry
        assert!(com.hermitian_residual() < 1e-13);
        let _ = Complex64::new(0.0, 0.0);
    }
}
