//! `bqs` command line: run simulations, twin-run stability experiments,
//! admissibility queries, norm evaluation on snapshots, and the brute-force
//! operator oracle.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bqs_core::besov::{besov_norm, BesovSpec, DyadicConvention};
use bqs_core::config::{parse_config, RunConfig};
use bqs_core::diagnostics::twin_stability;
use bqs_core::dynamics::run;
use bqs_core::oracle::oracle_check;
use bqs_core::output::{emit_outputs, emit_twin, fmt_f64};
use bqs_core::regions::{check_admissible, g_alpha, nesting_sweep, TheoremId};
use bqs_core::snapshot;

#[derive(Parser)]
#[command(name = "bqs", about = "Pseudospectral generalized 2D Boussinesq solver and diagnostics", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a config file and write diagnostics + snapshots.
    Run {
        /// Path to a `key = value` config file.
        config: PathBuf,
        /// Output directory (overrides the config and BQS_OUTPUT_DIR).
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Twin-run stability experiment: perturb the initial data by delta and
    /// track the stability functional against its Osgood majorant.
    Twin {
        config: PathBuf,
        /// Perturbation amplitude added to the initial data.
        #[arg(long)]
        delta: f64,
        /// Constant C in the majorant ODE.
        #[arg(long, default_value_t = 1.0)]
        c_osgood: f64,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Admissibility queries: g(alpha), per-theorem verdicts, region sweep.
    Regions {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: Option<f64>,
        /// Exponent q for the L^q window (g_lq theorem).
        #[arg(long)]
        q: Option<f64>,
        /// Theorem id: main, g_l2, g_lq, g_besov.
        #[arg(long, default_value = "main")]
        theorem: String,
        /// Run the 200x200 nesting sweep instead of a point query.
        #[arg(long)]
        sweep: bool,
    },
    /// Evaluate Besov norms of the fields stored in a snapshot.
    Norms {
        snapshot: PathBuf,
        /// Norm spec "s,p,q,gamma"; s may be negative, p and q accept "inf".
        #[arg(long, allow_hyphen_values = true)]
        spec: String,
    },
    /// Compare every spectral operator against brute-force DFT compositions.
    Oracle,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cmd {
        Command::Run { config, output_dir } => cmd_run(config, output_dir),
        Command::Twin {
            config,
            delta,
            c_osgood,
            output_dir,
        } => cmd_twin(config, delta, c_osgood, output_dir),
        Command::Regions {
            alpha,
            beta,
            q,
            theorem,
            sweep,
        } => cmd_regions(alpha, beta, q, &theorem, sweep),
        Command::Norms { snapshot, spec } => cmd_norms(snapshot, &spec),
        Command::Oracle => cmd_oracle(),
    }
}

fn load_config(path: &PathBuf, output_dir: Option<PathBuf>) -> Result<RunConfig, Box<dyn std::error::Error>> {
    let text = fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    Ok(cfg)
}

fn write_run_info(cfg: &RunConfig, dir: &std::path::Path) -> std::io::Result<()> {
    let p = &cfg.params;
    let mut info = String::new();
    info.push_str(&format!("grid = {}x{}\n", cfg.n1, cfg.n2));
    info.push_str(&format!(
        "alpha = {}\nbeta = {}\nsigma = {}\ngamma = {}\nnu = {}\nkappa = {}\n",
        p.alpha, p.beta, p.sigma, p.gamma, p.nu, p.kappa
    ));
    info.push_str(&format!("seed = {}\n", cfg.init.seed));
    info.push_str(&format!("t_end = {}\n", cfg.t_end));
    if cfg.experimental_beta {
        info.push_str("experimental_beta = true  # outside the proven region\n");
    }
    if cfg.allow_inviscid {
        info.push_str("allow_inviscid = true  # flagged test configuration\n");
    }
    fs::write(dir.join("run_info.txt"), info)
}

fn cmd_run(config: PathBuf, output_dir: Option<PathBuf>) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cfg = load_config(&config, output_dir)?;
    let out = run(&cfg)?;
    fs::create_dir_all(&cfg.output_dir)?;
    emit_outputs(&out.records, &cfg.output_dir)?;
    write_run_info(&cfg, &cfg.output_dir)?;
    for (i, snap) in out.snapshots.iter().enumerate() {
        snapshot::save(snap, &cfg.output_dir.join(format!("snapshot_{i:04}.bqs")))?;
    }
    snapshot::save(&out.final_state, &cfg.output_dir.join("snapshot_final.bqs"))?;
    println!(
        "run complete: t = {}, {} records, {} snapshots -> {}",
        out.final_state.t,
        out.records.len(),
        out.snapshots.len(),
        cfg.output_dir.display()
    );
    if let Some(b) = out.blowup {
        eprintln!("error: blow-up at t = {}: {}", b.t, b.detail);
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_twin(
    config: PathBuf,
    delta: f64,
    c_osgood: f64,
    output_dir: Option<PathBuf>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cfg = load_config(&config, output_dir)?;
    let rows = twin_stability(&cfg, delta, c_osgood)?;
    fs::create_dir_all(&cfg.output_dir)?;
    emit_twin(&rows, &cfg.output_dir)?;
    let last = rows.last().expect("at least the initial sample");
    println!(
        "twin complete: delta = {delta}, Y({}) = {}, majorant = {}",
        last.t,
        fmt_f64(last.y),
        fmt_f64(last.majorant)
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_regions(
    alpha: f64,
    beta: Option<f64>,
    q: Option<f64>,
    theorem: &str,
    sweep: bool,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    if sweep {
        let s = nesting_sweep(200, 0.9, 0.9999, 1e-4, 0.2);
        println!("sweep_samples = {}", s.samples);
        println!("main_admissible = {}", s.main_admissible);
        println!("nesting_violations = {}", s.nesting_violations);
        match s.nonempty_threshold {
            Some(t) => println!("nonempty_threshold_alpha = {t}"),
            None => println!("nonempty_threshold_alpha = none"),
        }
        return Ok(ExitCode::SUCCESS);
    }
    let id = TheoremId::parse(theorem)?;
    match beta {
        None => {
            let g = g_alpha(alpha)?;
            println!("g_alpha = {}", fmt_f64(g));
            println!("beta_interval = ({}, {})", fmt_f64(1.0 - alpha), fmt_f64(g));
        }
        Some(beta) => {
            let v = check_admissible(alpha, beta, q, id);
            println!("theorem = {}", v.theorem.name());
            println!("admissible = {}", v.admissible);
            for c in &v.constraints {
                println!(
                    "constraint: {} | satisfied = {} | margin = {}",
                    c.name,
                    c.satisfied,
                    if c.margin.is_finite() {
                        fmt_f64(c.margin)
                    } else {
                        "inf".to_string()
                    }
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_extended(s: &str) -> Result<f64, Box<dyn std::error::Error>> {
    match s.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        other => Ok(other.parse::<f64>()?),
    }
}

fn cmd_norms(path: PathBuf, spec: &str) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("--spec expects \"s,p,q,gamma\", got \"{spec}\"").into());
    }
    let s = parse_extended(parts[0])?;
    let p = parse_extended(parts[1])?;
    let q = parse_extended(parts[2])?;
    let gamma = parse_extended(parts[3])?;
    let state = snapshot::load(&path)?;
    let bspec = BesovSpec::new(s, p, q).with_log(gamma);
    let conv = DyadicConvention::Sharp;
    println!("besov_omega = {}", fmt_f64(besov_norm(&state.omega, &bspec, conv)));
    println!("besov_theta = {}", fmt_f64(besov_norm(&state.theta, &bspec, conv)));
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle() -> Result<ExitCode, Box<dyn std::error::Error>> {
    let report = oracle_check();
    for e in &report.entries {
        println!(
            "{:32} max_abs_error = {:>12.3e}  {}",
            e.name,
            e.max_abs_error,
            if e.pass { "PASS" } else { "FAIL" }
        );
    }
    if report.all_pass() {
        println!("oracle: all {} checks passed (tolerance {:.0e})", report.entries.len(), report.tolerance);
        Ok(ExitCode::SUCCESS)
    } else {
        Err("oracle comparisons failed".into())
    }
}
