//! Right-hand-side evaluation and time integration of the coupled system in
//! vorticity form:
//!
//! ```text
//! d_t omega = -dealias(u . grad omega) - nu Lambda^alpha omega + d_x1 theta
//! d_t theta = -dealias(u . grad theta) - kappa Lambda^beta theta
//! ```
//!
//! The fractional dissipation is diagonal in Fourier space, so the stepper
//! uses an integrating factor: linear decay is applied exactly through
//! `e^{-nu |k|^alpha dt}` and only the nonlinear and coupling terms see the
//! explicit RK4 stages. Advection is formed pseudospectrally in convective
//! form and the quadratic products are 2/3-rule dealiased; with band-limited
//! data this keeps the kept modes alias-free and the quadratic invariants of
//! the inviscid limit exact in space.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{InitKind, RunConfig};
use crate::diagnostics::{DiagnosticsRecord, Recorder};
use crate::error::BqsError;
use crate::multipliers::{biot_savart, fractional_power_table, ParamSet};
use crate::snapshot;
use crate::spectral::{
    dealias_in_place, forward, inverse, Grid, PhysField, SpectralField,
};
use crate::Result;

/// One point of a trajectory: time, vorticity, temperature, parameters.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub omega: SpectralField,
    pub theta: SpectralField,
    pub params: ParamSet,
}

impl SimState {
    pub fn grid(&self) -> Grid {
        self.omega.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// Integrating-factor classical RK4 (default).
    IfRk4,
    /// Integrating-factor forward Euler; first order, testing only.
    IfEuler,
}

#[derive(Debug, Clone, Copy)]
pub struct StepScheme {
    pub kind: SchemeKind,
    pub dt: f64,
    /// Advection on/off switch; disabling isolates the exactly-solvable
    /// linear subproblem.
    pub advection: bool,
}

impl StepScheme {
    pub fn if_rk4(dt: f64) -> Self {
        StepScheme {
            kind: SchemeKind::IfRk4,
            dt,
            advection: true,
        }
    }

    pub fn if_euler(dt: f64) -> Self {
        StepScheme {
            kind: SchemeKind::IfEuler,
            dt,
            advection: true,
        }
    }

    pub fn without_advection(mut self) -> Self {
        self.advection = false;
        self
    }
}

/// Dealiased pseudospectral `u . grad f`: gradients and velocity move to the
/// collocation grid, multiply pointwise, transform back, cut. The mean mode
/// is zeroed exactly; analytically it vanishes since `u . grad f = div(u f)`.
pub fn advection_term(
    u1: &PhysField,
    u2: &PhysField,
    f: &SpectralField,
) -> SpectralField {
    let fx = inverse(&f.derivative(0));
    let fy = inverse(&f.derivative(1));
    let mut prod = PhysField::zeros(f.grid());
    for (((p, a), b), (gx, gy)) in prod
        .values_mut()
        .iter_mut()
        .zip(u1.values())
        .zip(u2.values())
        .zip(fx.values().iter().zip(fy.values()))
    {
        *p = a * gx + b * gy;
    }
    let mut out = forward(&prod);
    dealias_in_place(&mut out);
    out.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    out
}

/// Nonlinear + coupling part of the tendency (everything the integrating
/// factor does not absorb).
fn nonlinear_tendency(
    omega: &SpectralField,
    theta: &SpectralField,
    params: &ParamSet,
    advection: bool,
) -> (SpectralField, SpectralField) {
    let grid = omega.grid();
    let mut d_omega = theta.derivative(0);
    let mut d_theta = SpectralField::zeros(grid);
    if advection {
        let (u1s, u2s) = biot_savart(omega, params);
        let u1 = inverse(&u1s);
        let u2 = inverse(&u2s);
        d_omega.add_scaled(&advection_term(&u1, &u2, omega), -1.0);
        d_theta.add_scaled(&advection_term(&u1, &u2, theta), -1.0);
    }
    (d_omega, d_theta)
}

/// Full instantaneous tendency `(d omega/dt, d theta/dt)`.
pub fn tendency(state: &SimState) -> (SpectralField, SpectralField) {
    tendency_with(state, true)
}

pub fn tendency_with(state: &SimState, advection: bool) -> (SpectralField, SpectralField) {
    let grid = state.grid();
    let (mut d_omega, mut d_theta) = nonlinear_tendency(&state.omega, &state.theta, &state.params, advection);
    let a_tab = fractional_power_table(grid, state.params.alpha);
    let b_tab = fractional_power_table(grid, state.params.beta);
    for idx in 0..grid.len() {
        d_omega.coeffs_mut()[idx] -= state.params.nu * a_tab[idx] * state.omega.coeffs()[idx];
        d_theta.coeffs_mut()[idx] -= state.params.kappa * b_tab[idx] * state.theta.coeffs()[idx];
    }
    (d_omega, d_theta)
}

fn decay_factors(grid: Grid, coef: f64, s: f64, dt: f64) -> Vec<f64> {
    let tab = fractional_power_table(grid, s);
    tab.iter().map(|&l| (-coef * l * dt).exp()).collect()
}

fn apply_factor(f: &SpectralField, fac: &[f64]) -> SpectralField {
    let mut out = f.clone();
    for (c, &e) in out.coeffs_mut().iter_mut().zip(fac) {
        *c *= e;
    }
    out
}

fn apply_factor_in_place(f: &mut SpectralField, fac: &[f64]) {
    for (c, &e) in f.coeffs_mut().iter_mut().zip(fac) {
        *c *= e;
    }
}

/// Advances one step of size `scheme.dt`. The linear dissipative part is
/// propagated exactly; a pure-decay problem is therefore solved to machine
/// precision regardless of `dt`.
pub fn step(state: &SimState, scheme: &StepScheme) -> Result<SimState> {
    let grid = state.grid();
    let dt = scheme.dt;
    let p = &state.params;
    let ew_half = decay_factors(grid, p.nu, p.alpha, 0.5 * dt);
    let ew_full = decay_factors(grid, p.nu, p.alpha, dt);
    let et_half = decay_factors(grid, p.kappa, p.beta, 0.5 * dt);
    let et_full = decay_factors(grid, p.kappa, p.beta, dt);

    let nl = |w: &SpectralField, th: &SpectralField| nonlinear_tendency(w, th, p, scheme.advection);

    let (omega_next, theta_next) = match scheme.kind {
        SchemeKind::IfEuler => {
            let (k1w, k1t) = nl(&state.omega, &state.theta);
            let mut w = state.omega.clone();
            w.add_scaled(&k1w, dt);
            apply_factor_in_place(&mut w, &ew_full);
            let mut th = state.theta.clone();
            th.add_scaled(&k1t, dt);
            apply_factor_in_place(&mut th, &et_full);
            (w, th)
        }
        SchemeKind::IfRk4 => {
            let (k1w, k1t) = nl(&state.omega, &state.theta);

            let mut aw = state.omega.clone();
            aw.add_scaled(&k1w, 0.5 * dt);
            apply_factor_in_place(&mut aw, &ew_half);
            let mut at = state.theta.clone();
            at.add_scaled(&k1t, 0.5 * dt);
            apply_factor_in_place(&mut at, &et_half);
            let (k2w, k2t) = nl(&aw, &at);

            let mut bw = apply_factor(&state.omega, &ew_half);
            bw.add_scaled(&k2w, 0.5 * dt);
            let mut bt = apply_factor(&state.theta, &et_half);
            bt.add_scaled(&k2t, 0.5 * dt);
            let (k3w, k3t) = nl(&bw, &bt);

            let mut cw = apply_factor(&state.omega, &ew_full);
            cw.add_scaled(&apply_factor(&k3w, &ew_half), dt);
            let mut ct = apply_factor(&state.theta, &et_full);
            ct.add_scaled(&apply_factor(&k3t, &et_half), dt);
            let (k4w, k4t) = nl(&cw, &ct);

            let sixth = dt / 6.0;
            let mut w = apply_factor(&state.omega, &ew_full);
            w.add_scaled(&apply_factor(&k1w, &ew_full), sixth);
            let mut mid = k2w;
            mid.add_scaled(&k3w, 1.0);
            w.add_scaled(&apply_factor(&mid, &ew_half), 2.0 * sixth);
            w.add_scaled(&k4w, sixth);

            let mut th = apply_factor(&state.theta, &et_full);
            th.add_scaled(&apply_factor(&k1t, &et_full), sixth);
            let mut midt = k2t;
            midt.add_scaled(&k3t, 1.0);
            th.add_scaled(&apply_factor(&midt, &et_half), 2.0 * sixth);
            th.add_scaled(&k4t, sixth);
            (w, th)
        }
    };

    if !omega_next.is_finite() || !theta_next.is_finite() {
        return Err(BqsError::BlowUp {
            t: state.t + dt,
            detail: "non-finite spectral coefficient after step".into(),
        });
    }
    Ok(SimState {
        t: state.t + dt,
        omega: omega_next,
        theta: theta_next,
        params: *p,
    })
}

/// Advective CFL bound `safety * dx / max(||u||_inf, 1e-8)`.
pub fn cfl_dt(state: &SimState, safety: f64) -> f64 {
    let (u1s, u2s) = biot_savart(&state.omega, &state.params);
    let u1 = inverse(&u1s).max_abs();
    let u2 = inverse(&u2s).max_abs();
    let dx = 2.0 * std::f64::consts::PI / state.grid().n1().max(state.grid().n2()) as f64;
    safety * dx / u1.max(u2).max(1e-8)
}

/// Band-limited random field with spectrum `|k|^{-slope} e^{-|k|^2/k_c^2}`,
/// zero mean, L^2 norm `amplitude`, supported inside the dealias mask.
pub fn random_field(grid: Grid, seed: u64, slope: f64, k_c: f64, amplitude: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    for c in f.coeffs_mut() {
        *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    f.symmetrize();
    for idx in 0..grid.len() {
        let (k1, k2) = grid.wavenumber(idx);
        let kk = (k1 as f64).powi(2) + (k2 as f64).powi(2);
        let env = if kk == 0.0 {
            0.0
        } else {
            kk.powf(-0.5 * slope) * (-kk / (k_c * k_c)).exp()
        };
        f.coeffs_mut()[idx] *= env;
    }
    dealias_in_place(&mut f);
    let norm = f.l2_norm();
    if norm > 0.0 {
        f.scale(amplitude / norm);
    }
    f
}

/// Builds the initial state from the configured init spec. Fields are
/// truncated to the dealias band so the pseudospectral products stay
/// alias-free along the whole trajectory.
pub fn initial_state(config: &RunConfig) -> Result<SimState> {
    let grid = config.grid()?;
    let (omega, theta) = match config.init.kind {
        InitKind::RandomBandlimited => {
            let w = random_field(
                grid,
                config.init.seed,
                config.init.slope,
                config.init.k_c,
                config.init.amplitude,
            );
            let th = random_field(
                grid,
                config.init.seed.wrapping_add(1),
                config.init.slope,
                config.init.k_c,
                config.init.amplitude,
            );
            (w, th)
        }
        InitKind::ExplicitModes => {
            let mut w = SpectralField::zeros(grid);
            for m in &config.init.omega_modes {
                w.set_mode_pair(m.k1, m.k2, Complex64::new(m.re, m.im));
            }
            let mut th = SpectralField::zeros(grid);
            for m in &config.init.theta_modes {
                th.set_mode_pair(m.k1, m.k2, Complex64::new(m.re, m.im));
            }
            dealias_in_place(&mut w);
            dealias_in_place(&mut th);
            (w, th)
        }
        InitKind::File => {
            let path = config.init.file.as_ref().expect("validated");
            let loaded = snapshot::load(path)?;
            if loaded.grid() != grid {
                return Err(BqsError::Snapshot(format!(
                    "snapshot grid {}x{} does not match configured {}x{}",
                    loaded.grid().n1(),
                    loaded.grid().n2(),
                    grid.n1(),
                    grid.n2()
                )));
            }
            let mut w = loaded.omega;
            let mut th = loaded.theta;
            dealias_in_place(&mut w);
            dealias_in_place(&mut th);
            (w, th)
        }
    };
    Ok(SimState {
        t: 0.0,
        omega,
        theta,
        params: config.params,
    })
}

/// Why a run stopped before `t_end`.
#[derive(Debug, Clone)]
pub struct BlowupReport {
    pub t: f64,
    pub detail: String,
}

/// Everything a run produces in memory; the CLI layer persists it.
#[derive(Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<SimState>,
    pub final_state: SimState,
    pub blowup: Option<BlowupReport>,
}

/// Advances from `t = 0` to `t_end`, adapting `dt` by the CFL bound (or the
/// configured fixed step), emitting diagnostics every `diag_interval` and
/// snapshots every `snap_interval`. Steps are clamped so records land exactly
/// on the sample times. Stops early with a flagged report on blow-up.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let mut state = initial_state(config)?;
    let guard = {
        let winf = inverse(&state.omega).max_abs();
        if winf > 0.0 {
            config.guard_factor * winf
        } else {
            config.guard_factor
        }
    };
    let mut recorder = Recorder::new(config);
    let mut records = vec![recorder.record(&state, None)];
    let mut snapshots = vec![state.clone()];
    let mut blowup = None;

    let mut diag_i: u64 = 1;
    let mut snap_i: u64 = 1;
    let t_end = config.t_end;
    'outer: while state.t < t_end - 1e-12 {
        let next_diag = config.diag_interval * diag_i as f64;
        let next_snap = config.snap_interval * snap_i as f64;
        let target = next_diag.min(next_snap).min(t_end);

        let mut dt = match config.fixed_dt {
            Some(fixed) => fixed,
            None => cfl_dt(&state, config.cfl_safety).min(config.max_dt),
        };
        let rem = target - state.t;
        let hits_target = dt >= rem || (rem - dt) <= rem * 1e-12 + 1e-9;
        if hits_target {
            dt = rem;
        }
        if dt < 1e-12 {
            blowup = Some(BlowupReport {
                t: state.t,
                detail: "time step collapsed below 1e-12".into(),
            });
            break;
        }

        let scheme = StepScheme::if_rk4(dt);
        let pre = state.clone();
        state = match step(&pre, &scheme) {
            Ok(s) => s,
            Err(BqsError::BlowUp { t, detail }) => {
                blowup = Some(BlowupReport { t, detail });
                break;
            }
            Err(e) => return Err(e),
        };
        if hits_target {
            state.t = target; // land exactly on the sample time
            if target == next_diag || target == t_end {
                let winf = inverse(&state.omega).max_abs();
                if !winf.is_finite() || winf > guard {
                    blowup = Some(BlowupReport {
                        t: state.t,
                        detail: format!("||omega||_inf = {winf:e} exceeded guard {guard:e}"),
                    });
                    break 'outer;
                }
                records.push(recorder.record(&state, Some((&pre, dt))));
                if target == next_diag {
                    diag_i += 1;
                }
            }
            if target == next_snap {
                snapshots.push(state.clone());
                snap_i += 1;
            }
        }
    }

    Ok(RunOutput {
        records,
        snapshots,
        final_state: state,
        blowup,
    })
}
