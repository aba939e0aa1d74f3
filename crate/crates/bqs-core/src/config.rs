//! Run configuration: a line-oriented `key = value` format with `#` comments,
//! strict key checking and documented defaults. Parsing also validates the
//! parameter point against the proven admissibility region unless the run is
//! explicitly flagged experimental or inviscid.

use std::path::PathBuf;

use crate::error::BqsError;
use crate::multipliers::ParamSet;
use crate::regions::{check_admissible, TheoremId};
use crate::spectral::Grid;
use crate::Result;

/// How the initial fields are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum InitKind {
    RandomBandlimited,
    ExplicitModes,
    File,
}

/// One explicitly prescribed spectral mode: sets the coefficient at `(k1,k2)`
/// and its conjugate mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub k1: i32,
    pub k2: i32,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitSpec {
    pub kind: InitKind,
    pub seed: u64,
    /// Spectrum slope `r` of `|k|^{-r} e^{-|k|^2/k_c^2}`.
    pub slope: f64,
    pub k_c: f64,
    /// Target L^2 norm of each random initial field.
    pub amplitude: f64,
    pub omega_modes: Vec<ModeSpec>,
    pub theta_modes: Vec<ModeSpec>,
    pub file: Option<PathBuf>,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec {
            kind: InitKind::RandomBandlimited,
            seed: 0,
            slope: 2.0,
            k_c: 12.0,
            amplitude: 1.0,
            omega_modes: Vec::new(),
            theta_modes: Vec::new(),
            file: None,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n1: usize,
    pub n2: usize,
    pub params: ParamSet,
    pub t_end: f64,
    pub max_dt: f64,
    /// Fixed time step overriding the CFL adaptation (convergence studies).
    pub fixed_dt: Option<f64>,
    pub cfl_safety: f64,
    pub diag_interval: f64,
    pub snap_interval: f64,
    pub init: InitSpec,
    /// The small Besov-index shift used by monitored norms.
    pub besov_eps: f64,
    /// Permit beta in (1 - alpha, 1) beyond g(alpha); such runs are outside
    /// the proven region and reported as experimental.
    pub experimental_beta: bool,
    /// Permit nu = kappa = 0 (test configurations only).
    pub allow_inviscid: bool,
    pub guard_factor: f64,
    pub output_dir: PathBuf,
    /// Exponents `q` for the tracked `||G||_{L^q}` family; the first entry is
    /// the one emitted to the CSV.
    pub lq_g: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n1: 256,
            n2: 256,
            params: ParamSet {
                alpha: 0.95,
                beta: 0.08,
                sigma: 0.0,
                gamma: 0.0,
                nu: 1.0,
                kappa: 1.0,
            },
            t_end: 1.0,
            max_dt: 0.01,
            fixed_dt: None,
            cfl_safety: 0.5,
            diag_interval: 0.01,
            snap_interval: 0.5,
            init: InitSpec::default(),
            besov_eps: 0.01,
            experimental_beta: false,
            allow_inviscid: false,
            guard_factor: 1e6,
            output_dir: default_output_dir(),
            lq_g: vec![20.0 / 9.0 - 0.01],
        }
    }
}

fn default_output_dir() -> PathBuf {
    std::env::var_os("BQS_OUTPUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| BqsError::Config {
        line,
        msg: format!("cannot parse value \"{v}\" for key {key} as a number"),
    })?;
    if x.is_nan() {
        return Err(BqsError::Config {
            line,
            msg: format!("key {key} must not be NaN"),
        });
    }
    Ok(x)
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| BqsError::Config {
        line,
        msg: format!("cannot parse value \"{v}\" for key {key} as an integer"),
    })
}

fn parse_u64(line: usize, key: &str, v: &str) -> Result<u64> {
    v.parse().map_err(|_| BqsError::Config {
        line,
        msg: format!("cannot parse value \"{v}\" for key {key} as an integer"),
    })
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(BqsError::Config {
            line,
            msg: format!("cannot parse value \"{v}\" for key {key} as a bool"),
        }),
    }
}

fn parse_mode(line: usize, key: &str, v: &str) -> Result<ModeSpec> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(BqsError::Config {
            line,
            msg: format!("key {key} expects \"k1,k2,re,im\", got \"{v}\""),
        });
    }
    Ok(ModeSpec {
        k1: parts[0].parse().map_err(|_| BqsError::Config {
            line,
            msg: format!("bad k1 in {key}"),
        })?,
        k2: parts[1].parse().map_err(|_| BqsError::Config {
            line,
            msg: format!("bad k2 in {key}"),
        })?,
        re: parse_f64(line, key, parts[2])?,
        im: parse_f64(line, key, parts[3])?,
    })
}

/// Parses the `key = value` text and validates the resulting configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| BqsError::Config {
            line: line_no,
            msg: format!("expected \"key = value\", got \"{line}\""),
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "n" => {
                let n = parse_usize(line_no, key, value)?;
                cfg.n1 = n;
                cfg.n2 = n;
            }
            "n1" => cfg.n1 = parse_usize(line_no, key, value)?,
            "n2" => cfg.n2 = parse_usize(line_no, key, value)?,
            "alpha" => cfg.params.alpha = parse_f64(line_no, key, value)?,
            "beta" => cfg.params.beta = parse_f64(line_no, key, value)?,
            "sigma" => cfg.params.sigma = parse_f64(line_no, key, value)?,
            "gamma" => cfg.params.gamma = parse_f64(line_no, key, value)?,
            "nu" => cfg.params.nu = parse_f64(line_no, key, value)?,
            "kappa" => cfg.params.kappa = parse_f64(line_no, key, value)?,
            "t_end" => cfg.t_end = parse_f64(line_no, key, value)?,
            "max_dt" => cfg.max_dt = parse_f64(line_no, key, value)?,
            "fixed_dt" => cfg.fixed_dt = Some(parse_f64(line_no, key, value)?),
            "cfl_safety" => cfg.cfl_safety = parse_f64(line_no, key, value)?,
            "diag_interval" => cfg.diag_interval = parse_f64(line_no, key, value)?,
            "snap_interval" => cfg.snap_interval = parse_f64(line_no, key, value)?,
            "init" => {
                cfg.init.kind = match value {
                    "random_bandlimited" => InitKind::RandomBandlimited,
                    "explicit_modes" => InitKind::ExplicitModes,
                    "file" => InitKind::File,
                    other => {
                        return Err(BqsError::Config {
                            line: line_no,
                            msg: format!("unknown init kind \"{other}\""),
                        })
                    }
                }
            }
            "seed" => cfg.init.seed = parse_u64(line_no, key, value)?,
            "init_slope" => cfg.init.slope = parse_f64(line_no, key, value)?,
            "init_kc" => cfg.init.k_c = parse_f64(line_no, key, value)?,
            "init_amplitude" => cfg.init.amplitude = parse_f64(line_no, key, value)?,
            "init_file" => cfg.init.file = Some(PathBuf::from(value)),
            "omega_mode" => cfg.init.omega_modes.push(parse_mode(line_no, key, value)?),
            "theta_mode" => cfg.init.theta_modes.push(parse_mode(line_no, key, value)?),
            "besov_eps" => cfg.besov_eps = parse_f64(line_no, key, value)?,
            "experimental_beta" => cfg.experimental_beta = parse_bool(line_no, key, value)?,
            "allow_inviscid" => cfg.allow_inviscid = parse_bool(line_no, key, value)?,
            "guard_factor" => cfg.guard_factor = parse_f64(line_no, key, value)?,
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "lq_g" => {
                let mut qs = Vec::new();
                for part in value.split(',') {
                    qs.push(parse_f64(line_no, key, part.trim())?);
                }
                cfg.lq_g = qs;
            }
            other => {
                return Err(BqsError::Config {
                    line: line_no,
                    msg: format!("unknown key \"{other}\""),
                })
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n1, self.n2)
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.n1, self.n2)?;
        self.params.validate()?;
        let fail = |msg: &str| Err(BqsError::InvalidParameter(msg.to_string()));
        if !(self.t_end > 0.0) {
            return fail("t_end must be > 0");
        }
        if !(self.max_dt > 0.0) {
            return fail("max_dt must be > 0");
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0) {
                return fail("fixed_dt must be > 0");
            }
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return fail("cfl_safety must lie in (0, 1]");
        }
        if !(self.diag_interval > 0.0) || !(self.snap_interval > 0.0) {
            return fail("diag_interval and snap_interval must be > 0");
        }
        if !(self.besov_eps > 0.0) {
            return fail("besov_eps must be > 0");
        }
        if !(self.guard_factor > 1.0) {
            return fail("guard_factor must be > 1");
        }
        if self.lq_g.is_empty() {
            return fail("lq_g must list at least one exponent");
        }
        for &q in &self.lq_g {
            if !(q >= 1.0) {
                return fail("lq_g exponents must be >= 1");
            }
        }
        if (self.params.nu == 0.0 || self.params.kappa == 0.0) && !self.allow_inviscid {
            return fail("nu = 0 or kappa = 0 requires allow_inviscid = true");
        }
        if self.init.kind == InitKind::File && self.init.file.is_none() {
            return fail("init = file requires init_file");
        }
        if self.allow_inviscid {
            return Ok(()); // flagged test configuration, outside the theorems
        }
        if self.experimental_beta {
            // conjectured band: alpha in [19/20, 1), beta in (1 - alpha, 1)
            let a = self.params.alpha;
            let b = self.params.beta;
            if !(a >= 0.95 && a < 1.0) {
                return Err(BqsError::NotAdmissible {
                    constraint: "alpha >= 19/20 and alpha < 1".into(),
                    margin: (a - 0.95).min(1.0 - a),
                });
            }
            if !(b > 1.0 - a && b < 1.0) {
                return Err(BqsError::NotAdmissible {
                    constraint: "beta in (1 - alpha, 1)".into(),
                    margin: (b - (1.0 - a)).min(1.0 - b),
                });
            }
            return Ok(());
        }
        let verdict = check_admissible(self.params.alpha, self.params.beta, None, TheoremId::Main);
        if !verdict.admissible {
            let binding = verdict.binding_violation().expect("inadmissible without violation");
            return Err(BqsError::NotAdmissible {
                constraint: binding.name.clone(),
                margin: binding.margin,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.n1, 256);
        assert_eq!(cfg.params.alpha, 0.95);
        assert_eq!(cfg.params.beta, 0.08);
        assert_eq!(cfg.cfl_safety, 0.5);
        assert_eq!(cfg.diag_interval, 0.01);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config("# full comment\n\n  n = 64  # inline\nseed = 7\n").unwrap();
        assert_eq!(cfg.n1, 64);
        assert_eq!(cfg.init.seed, 7);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_config("frobnicate = 3\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn inadmissible_beta_rejected_with_margin() {
        let err = parse_config("beta = 0.12\n").unwrap_err();
        match err {
            BqsError::NotAdmissible { constraint, margin } => {
                assert_eq!(constraint, "beta < g(alpha)");
                assert!((margin + 0.02).abs() < 1e-12, "margin {margin}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn experimental_beta_lifts_the_ceiling() {
        let cfg = parse_config("beta = 0.12\nexperimental_beta = true\n").unwrap();
        assert!(cfg.experimental_beta);
        // but not beyond the conjectured band
        assert!(parse_config("beta = 1.0\nexperimental_beta = true\n").is_err());
    }

    #[test]
    fn alpha_out_of_range_rejected() {
        let err = parse_config("alpha = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("alpha"));
    }

    #[test]
    fn inviscid_requires_flag() {
        assert!(parse_config("nu = 0\nkappa = 0\n").is_err());
        let cfg = parse_config("nu = 0\nkappa = 0\nallow_inviscid = true\n").unwrap();
        assert_eq!(cfg.params.nu, 0.0);
    }

    #[test]
    fn explicit_modes_parse() {
        let cfg = parse_config("init = explicit_modes\nomega_mode = 1, 0, 0.0, -0.5\nomega_mode = 2,1,0.25,0\n").unwrap();
        assert_eq!(cfg.init.omega_modes.len(), 2);
        assert_eq!(cfg.init.omega_modes[0].k1, 1);
        assert_eq!(cfg.init.omega_modes[0].im, -0.5);
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(parse_config("n 64\n").is_err());
        assert!(parse_config("n = sixty-four\n").is_err());
        assert!(parse_config("omega_mode = 1,2,3\n").is_err());
    }
}
