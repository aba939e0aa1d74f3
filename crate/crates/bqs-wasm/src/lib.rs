//! Browser demo bindings. Three interactive surfaces, all pure data so the
//! JS side only blits pixels and draws bars:
//!
//! * [`Sim`]: step the Boussinesq system live and render omega/theta/G/|u|
//!   as RGBA buffers for a `<canvas>` `ImageData`;
//! * [`region_map_rgba`] / [`region_verdict_json`]: the `(alpha, beta)`
//!   admissibility landscape and point queries;
//! * [`Sim::block_norms`]: the dyadic Littlewood-Paley spectrum of the
//!   current fields for a bar chart.
//!
//! Everything here also compiles natively, which is how the logic is tested;
//! the `wasm-bindgen` layer stays out of the internal functions.

use wasm_bindgen::prelude::*;

use bqs_core::besov::{block_lp_norm, j_max, DyadicConvention};
use bqs_core::diagnostics::compute_g;
use bqs_core::dynamics::{cfl_dt, random_field, step, SimState, StepScheme};
use bqs_core::multipliers::{biot_savart, ParamSet};
use bqs_core::regions::{check_admissible, g_alpha, TheoremId};
use bqs_core::spectral::{inverse, Grid, PhysField, SpectralField};

const MAX_DT: f64 = 0.01;
const CFL_SAFETY: f64 = 0.5;

fn build_state(n: usize, params: ParamSet, seed: u64) -> Result<SimState, String> {
    let grid = Grid::new(n, n).map_err(|e| e.to_string())?;
    params.validate().map_err(|e| e.to_string())?;
    let k_c = (n as f64 / 8.0).clamp(3.0, 12.0);
    Ok(SimState {
        t: 0.0,
        omega: random_field(grid, seed, 2.0, k_c, 1.0),
        theta: random_field(grid, seed.wrapping_add(1), 2.0, k_c, 1.0),
        params,
    })
}

fn advance_state(state: &mut SimState, steps: u32) -> Result<(), String> {
    for _ in 0..steps {
        let dt = cfl_dt(state, CFL_SAFETY).min(MAX_DT);
        *state = step(state, &StepScheme::if_rk4(dt)).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn field_values(state: &SimState, which: &str) -> Result<PhysField, String> {
    match which {
        "omega" => Ok(inverse(&state.omega)),
        "theta" => Ok(inverse(&state.theta)),
        "g" => Ok(inverse(&compute_g(state))),
        "speed" => {
            let (u1s, u2s) = biot_savart(&state.omega, &state.params);
            let u1 = inverse(&u1s);
            let u2 = inverse(&u2s);
            let mut out = PhysField::zeros(state.grid());
            for ((o, a), b) in out.values_mut().iter_mut().zip(u1.values()).zip(u2.values()) {
                *o = (a * a + b * b).sqrt();
            }
            Ok(out)
        }
        other => Err(format!("unknown field \"{other}\" (omega, theta, g, speed)")),
    }
}

/// Diverging blue-white-red map on [-1, 1].
fn diverging(v: f64) -> [u8; 3] {
    let v = v.clamp(-1.0, 1.0);
    if v >= 0.0 {
        let w = 1.0 - v;
        [255, (255.0 * w) as u8, (255.0 * w) as u8]
    } else {
        let w = 1.0 + v;
        [(255.0 * w) as u8, (255.0 * w) as u8, 255]
    }
}

fn rgba_from_field(f: &PhysField) -> Vec<u8> {
    let peak = f.max_abs().max(1e-30);
    let mut buf = Vec::with_capacity(f.values().len() * 4);
    for &v in f.values() {
        let [r, g, b] = diverging(v / peak);
        buf.extend_from_slice(&[r, g, b, 255]);
    }
    buf
}

fn spectrum_of(state: &SimState, which: &str) -> Result<Vec<f64>, String> {
    let f: &SpectralField = match which {
        "omega" => &state.omega,
        "theta" => &state.theta,
        other => return Err(format!("unknown field \"{other}\" (omega, theta)")),
    };
    let jm = j_max(state.grid());
    Ok((-1..=jm)
        .map(|j| block_lp_norm(f, j, DyadicConvention::Sharp, 2.0))
        .collect())
}

fn diagnostics_json_of(state: &SimState) -> String {
    let theta = inverse(&state.theta);
    let omega = inverse(&state.omega);
    let g = compute_g(state);
    let l2 = |f: &PhysField| bqs_core::spectral::lp_norm(f, 2.0).unwrap_or(f64::NAN);
    format!(
        "{{\"t\":{},\"l2_theta\":{},\"linf_theta\":{},\"l2_omega\":{},\"linf_omega\":{},\"l2_g\":{}}}",
        state.t,
        l2(&theta),
        theta.max_abs(),
        l2(&omega),
        omega.max_abs(),
        g.l2_norm()
    )
}

fn region_rgba(width: usize, height: usize, a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> Vec<u8> {
    let mut buf = Vec::with_capacity(width * height * 4);
    for row in 0..height {
        // beta decreases downward so the plot reads like an (alpha, beta) axis
        let beta = b_hi - (b_hi - b_lo) * row as f64 / (height - 1).max(1) as f64;
        for col in 0..width {
            let alpha = a_lo + (a_hi - a_lo) * col as f64 / (width - 1).max(1) as f64;
            let main = check_admissible(alpha, beta, None, TheoremId::Main);
            let px: [u8; 3] = if main.admissible {
                // shade by distance to the boundary
                let m = main
                    .constraints
                    .iter()
                    .map(|c| c.margin)
                    .fold(f64::INFINITY, f64::min);
                let w = (m / 0.03).clamp(0.0, 1.0);
                [40, 130 + (90.0 * w) as u8, 70]
            } else if alpha >= 0.95 && alpha < 1.0 && beta > 1.0 - alpha && beta < 1.0 {
                // conjectured band beyond g(alpha)
                [200, 160, 40]
            } else {
                [38, 38, 48]
            };
            buf.extend_from_slice(&[px[0], px[1], px[2], 255]);
        }
    }
    buf
}

fn verdict_json(alpha: f64, beta: f64) -> String {
    let v = check_admissible(alpha, beta, None, TheoremId::Main);
    let g = g_alpha(alpha).unwrap_or(f64::NAN);
    let constraints: Vec<String> = v
        .constraints
        .iter()
        .map(|c| {
            format!(
                "{{\"name\":\"{}\",\"satisfied\":{},\"margin\":{}}}",
                c.name,
                c.satisfied,
                if c.margin.is_finite() {
                    format!("{}", c.margin)
                } else {
                    "null".to_string()
                }
            )
        })
        .collect();
    format!(
        "{{\"alpha\":{},\"beta\":{},\"g_alpha\":{},\"admissible\":{},\"constraints\":[{}]}}",
        alpha,
        beta,
        if g.is_finite() { format!("{g}") } else { "null".to_string() },
        v.admissible,
        constraints.join(",")
    )
}

/// A live simulation handle owned by the page.
#[wasm_bindgen]
pub struct Sim {
    state: SimState,
}

#[wasm_bindgen]
impl Sim {
    /// Fresh simulation on an `n x n` grid with band-limited random data.
    #[wasm_bindgen(constructor)]
    pub fn new(
        n: u32,
        alpha: f64,
        beta: f64,
        sigma: f64,
        gamma: f64,
        seed: u32,
    ) -> Result<Sim, JsValue> {
        let params = ParamSet {
            alpha,
            beta,
            sigma,
            gamma,
            nu: 1.0,
            kappa: 1.0,
        };
        build_state(n as usize, params, seed as u64)
            .map(|state| Sim { state })
            .map_err(|e| JsValue::from_str(&e))
    }

    /// Advances `steps` CFL-adaptive RK4 steps.
    pub fn advance(&mut self, steps: u32) -> Result<(), JsValue> {
        advance_state(&mut self.state, steps).map_err(|e| JsValue::from_str(&e))
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn size(&self) -> u32 {
        self.state.grid().n1() as u32
    }

    /// RGBA pixels (row-major, `size x size`) of "omega", "theta", "g" or "speed".
    pub fn field_rgba(&self, which: &str) -> Result<Vec<u8>, JsValue> {
        field_values(&self.state, which)
            .map(|f| rgba_from_field(&f))
            .map_err(|e| JsValue::from_str(&e))
    }

    /// Per-block L^2 norms `||Delta_j f||_2` for j = -1.. of "omega" or "theta".
    pub fn block_norms(&self, which: &str) -> Result<Vec<f64>, JsValue> {
        spectrum_of(&self.state, which).map_err(|e| JsValue::from_str(&e))
    }

    /// A small JSON object of instantaneous norms.
    pub fn diagnostics_json(&self) -> String {
        diagnostics_json_of(&self.state)
    }
}

/// RGBA admissibility map over `[a_lo, a_hi] x [b_lo, b_hi]`; green inside
/// the proven region, amber in the conjectured band, dark outside.
#[wasm_bindgen]
pub fn region_map_rgba(width: u32, height: u32, a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> Vec<u8> {
    region_rgba(width as usize, height as usize, a_lo, a_hi, b_lo, b_hi)
}

/// JSON verdict of the global-regularity hypotheses at one `(alpha, beta)`.
#[wasm_bindgen]
pub fn region_verdict_json(alpha: f64, beta: f64) -> String {
    verdict_json(alpha, beta)
}

/// `g(alpha)`, or NaN outside `(0, 1)`.
#[wasm_bindgen]
pub fn g_alpha_value(alpha: f64) -> f64 {
    g_alpha(alpha).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_params() -> ParamSet {
        ParamSet {
            alpha: 0.95,
            beta: 0.08,
            sigma: 0.0,
            gamma: 0.0,
            nu: 1.0,
            kappa: 1.0,
        }
    }

    #[test]
    fn state_builds_steps_and_renders() {
        let mut s = build_state(32, demo_params(), 7).unwrap();
        advance_state(&mut s, 3).unwrap();
        assert!(s.t > 0.0);
        for which in ["omega", "theta", "g", "speed"] {
            let f = field_values(&s, which).unwrap();
            let buf = rgba_from_field(&f);
            assert_eq!(buf.len(), 32 * 32 * 4);
            assert!(buf.chunks(4).all(|px| px[3] == 255));
        }
        assert!(field_values(&s, "vorticity").is_err());
    }

    #[test]
    fn spectrum_has_one_bar_per_block() {
        let s = build_state(32, demo_params(), 7).unwrap();
        let bars = spectrum_of(&s, "omega").unwrap();
        assert_eq!(bars.len(), (j_max(s.grid()) + 2) as usize);
        assert!(bars.iter().all(|b| b.is_finite()));
        // total block energy reproduces the full L2 norm
        let total: f64 = bars.iter().map(|b| b * b).sum();
        assert!((total.sqrt() - s.omega.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_json_is_wellformed() {
        let s = build_state(16, demo_params(), 1).unwrap();
        let json = diagnostics_json_of(&s);
        assert!(json.starts_with('{') && json.ends_with('}'));
        for key in ["\"t\":", "\"l2_theta\":", "\"l2_g\":"] {
            assert!(json.contains(key), "{json}");
        }
    }

    #[test]
    fn region_map_marks_the_proven_point_green() {
        let w = 50;
        let h = 50;
        let buf = region_rgba(w, h, 0.9, 1.0, 0.0, 0.2);
        assert_eq!(buf.len(), w * h * 4);
        // (alpha, beta) = (0.96, 0.05): col = (0.96-0.9)/0.1*49 = 29, beta row
        let col = 29;
        let row = ((0.2 - 0.05) / 0.2 * 49.0) as usize;
        let px = &buf[(row * w + col) * 4..(row * w + col) * 4 + 4];
        assert!(px[1] > px[0] && px[1] > px[2], "not green: {px:?}");
    }

    #[test]
    fn verdict_json_carries_margins() {
        let json = verdict_json(0.95, 0.12);
        assert!(json.contains("\"admissible\":false"));
        assert!(json.contains("beta < g(alpha)"));
        let json = verdict_json(0.95, 0.08);
        assert!(json.contains("\"admissible\":true"));
        assert!(json.contains("\"g_alpha\":0.10000000000000009") || json.contains("\"g_alpha\":0.1"));
    }
}
