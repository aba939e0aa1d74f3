//! Diagnostics persistence: the `diagnostics.csv` table and per-norm
//! plot-data files. All values are written with 17 significant digits so
//! every acceptance recomputation is possible from the outputs alone.

use std::fs;
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, TwinRow};
use crate::error::BqsError;
use crate::Result;

pub const CSV_HEADER: &str = "t,l2_theta,l4_theta,linf_theta,l2_G,diss_G_cum,lq_G,lp_omega,\
besov_omega_0gamma,besov_theta_hs,energy_residual,commutator_ratio,cum_l1t_besov_omega";

/// Full-precision decimal: 17 significant digits round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn lookup(pairs: &[(f64, f64)], key: f64) -> f64 {
    pairs
        .iter()
        .find(|(p, _)| *p == key || (p.is_infinite() && key.is_infinite()))
        .map(|(_, v)| *v)
        .unwrap_or(f64::NAN)
}

/// One CSV row; `lq_G` is the first configured exponent, `lp_omega` is p = 4.
fn csv_row(r: &DiagnosticsRecord) -> String {
    let cols = [
        r.t,
        lookup(&r.lp_theta, 2.0),
        lookup(&r.lp_theta, 4.0),
        lookup(&r.lp_theta, f64::INFINITY),
        r.l2_g,
        r.diss_g_cum,
        r.lq_g.first().map(|(_, v)| *v).unwrap_or(f64::NAN),
        lookup(&r.lp_omega, 4.0),
        r.besov_omega_0gamma,
        r.besov_theta_hs,
        r.energy_residual,
        r.commutator_ratio,
        r.cum_l1t_besov_omega,
    ];
    cols.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",")
}

pub fn csv_string(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

/// Two-column `t value` plot data.
fn plot_string(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = String::new();
    for (t, v) in points {
        out.push_str(&fmt_f64(t));
        out.push(' ');
        out.push_str(&fmt_f64(v));
        out.push('\n');
    }
    out
}

/// Writes `diagnostics.csv` plus one `plot_<name>.dat` file per tracked norm
/// into `dir` (created if missing).
pub fn emit_outputs(records: &[DiagnosticsRecord], dir: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(BqsError::InvalidParameter(
            "cannot emit outputs for an empty record series".into(),
        ));
    }
    fs::create_dir_all(dir)?;
    fs::write(dir.join("diagnostics.csv"), csv_string(records))?;

    let series: &[(&str, fn(&DiagnosticsRecord) -> f64)] = &[
        ("l2_theta", |r| lookup(&r.lp_theta, 2.0)),
        ("l4_theta", |r| lookup(&r.lp_theta, 4.0)),
        ("linf_theta", |r| lookup(&r.lp_theta, f64::INFINITY)),
        ("l2_G", |r| r.l2_g),
        ("diss_G_integrand", |r| r.diss_g_integrand),
        ("diss_G_cum", |r| r.diss_g_cum),
        ("lq_G", |r| r.lq_g.first().map(|(_, v)| *v).unwrap_or(f64::NAN)),
        ("l2_omega", |r| lookup(&r.lp_omega, 2.0)),
        ("lp_omega", |r| lookup(&r.lp_omega, 4.0)),
        ("linf_omega", |r| lookup(&r.lp_omega, f64::INFINITY)),
        ("besov_omega_0gamma", |r| r.besov_omega_0gamma),
        ("besov_theta_hs", |r| r.besov_theta_hs),
        ("besov_theta_binf", |r| r.besov_theta_binf),
        ("energy_residual", |r| r.energy_residual),
        ("commutator_ratio", |r| r.commutator_ratio),
        ("cum_l1t_besov_omega", |r| r.cum_l1t_besov_omega),
    ];
    for (name, get) in series {
        let body = plot_string(records.iter().map(|r| (r.t, get(r))));
        fs::write(dir.join(format!("plot_{name}.dat")), body)?;
    }
    Ok(())
}

/// Writes the twin-run series: `t, Y, majorant, D1, D2`.
pub fn emit_twin(rows: &[TwinRow], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut out = String::from("t,Y,majorant,D1,D2\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.t),
            fmt_f64(r.y),
            fmt_f64(r.majorant),
            fmt_f64(r.d1),
            fmt_f64(r.d2)
        ));
    }
    fs::write(dir.join("twin_stability.csv"), out)?;
    Ok(())
}
