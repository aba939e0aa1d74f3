//! Parameter-admissibility formulas: the global-regularity ceiling
//! `g(alpha)` and the per-theorem `(alpha, beta, q)` windows, each evaluated
//! literally with signed margins so near-boundary cases are visible.

use crate::error::BqsError;
use crate::Result;

/// Which theorem's hypotheses to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremId {
    /// Global regularity: `alpha in [19/20, 1)`, `beta in (1-alpha, g(alpha))`.
    Main,
    /// L^2 bound on G: `alpha in (3/4, 1)`, `beta in (1-alpha, min{3a-2, 2-2a}]`.
    GL2,
    /// L^q bound on G for `q in [2, 20/9)`.
    GLq,
    /// Besov-in-time bound on G at `q = 20/9 - eps1`; same window as Main.
    GBesov,
}

impl TheoremId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(TheoremId::Main),
            "g_l2" => Ok(TheoremId::GL2),
            "g_lq" => Ok(TheoremId::GLq),
            "g_besov" => Ok(TheoremId::GBesov),
            other => Err(BqsError::InvalidParameter(format!(
                "unknown theorem id \"{other}\" (expected main, g_l2, g_lq, g_besov)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::Main => "main",
            TheoremId::GL2 => "g_l2",
            TheoremId::GLq => "g_lq",
            TheoremId::GBesov => "g_besov",
        }
    }
}

/// One inequality of a theorem's hypothesis, with its signed margin: the
/// distance to the binding boundary, positive when satisfied.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub satisfied: bool,
    pub margin: f64,
}

impl Constraint {
    /// Strict lower bound `x > lo`.
    fn above(name: &str, x: f64, lo: f64) -> Self {
        let margin = x - lo;
        Constraint {
            name: name.to_string(),
            satisfied: margin > 0.0,
            margin,
        }
    }

    /// Non-strict lower bound `x >= lo`.
    fn at_least(name: &str, x: f64, lo: f64) -> Self {
        let margin = x - lo;
        Constraint {
            name: name.to_string(),
            satisfied: margin >= 0.0,
            margin,
        }
    }

    /// Strict upper bound `x < hi`; `hi = +inf` is vacuously satisfied.
    fn below(name: &str, x: f64, hi: f64) -> Self {
        if hi.is_infinite() {
            return Constraint {
                name: name.to_string(),
                satisfied: true,
                margin: f64::INFINITY,
            };
        }
        let margin = hi - x;
        Constraint {
            name: name.to_string(),
            satisfied: margin > 0.0,
            margin,
        }
    }

    /// Non-strict upper bound `x <= hi`.
    fn at_most(name: &str, x: f64, hi: f64) -> Self {
        let margin = hi - x;
        Constraint {
            name: name.to_string(),
            satisfied: margin >= 0.0,
            margin,
        }
    }
}

/// Verdict of one admissibility check: the conjunction of all constraints.
#[derive(Debug, Clone)]
pub struct RegionVerdict {
    pub theorem: TheoremId,
    pub admissible: bool,
    pub constraints: Vec<Constraint>,
}

impl RegionVerdict {
    fn from_constraints(theorem: TheoremId, constraints: Vec<Constraint>) -> Self {
        RegionVerdict {
            theorem,
            admissible: constraints.iter().all(|c| c.satisfied),
            constraints,
        }
    }

    /// The violated constraint with the most negative margin, if any.
    pub fn binding_violation(&self) -> Option<&Constraint> {
        self.constraints
            .iter()
            .filter(|c| !c.satisfied)
            .min_by(|a, b| a.margin.partial_cmp(&b.margin).unwrap())
    }
}

/// The explicit admissibility ceiling
/// `g(alpha) = min{2 - 2a, (8/3)a - 2, 5a(1-a)/(11-10a)}` for `alpha in (0,1)`.
pub fn g_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(BqsError::InvalidParameter(format!(
            "g(alpha) requires alpha in (0, 1), got {alpha}"
        )));
    }
    Ok(g_alpha_unchecked(alpha))
}

fn g_alpha_unchecked(alpha: f64) -> f64 {
    let a = 2.0 - 2.0 * alpha;
    let b = 8.0 / 3.0 * alpha - 2.0;
    let c = 5.0 * alpha * (1.0 - alpha) / (11.0 - 10.0 * alpha);
    a.min(b).min(c)
}

/// Evaluates every inequality of the named theorem at `(alpha, beta, q)`,
/// strict or non-strict exactly as printed.
pub fn check_admissible(alpha: f64, beta: f64, q: Option<f64>, theorem: TheoremId) -> RegionVerdict {
    let mut cs = Vec::new();
    match theorem {
        TheoremId::Main | TheoremId::GBesov => {
            cs.push(Constraint::at_least("alpha >= 19/20", alpha, 19.0 / 20.0));
            cs.push(Constraint::below("alpha < 1", alpha, 1.0));
            cs.push(Constraint::above("beta > 1 - alpha", beta, 1.0 - alpha));
            cs.push(Constraint::below(
                "beta < g(alpha)",
                beta,
                g_alpha_unchecked(alpha),
            ));
        }
        TheoremId::GL2 => {
            cs.push(Constraint::above("alpha > 3/4", alpha, 0.75));
            cs.push(Constraint::below("alpha < 1", alpha, 1.0));
            cs.push(Constraint::above("beta > 1 - alpha", beta, 1.0 - alpha));
            // printed with a closing "]": half-open interval, non-strict top
            let top = (3.0 * alpha - 2.0).min(2.0 - 2.0 * alpha);
            cs.push(Constraint::at_most(
                "beta <= min{3 alpha - 2, 2 - 2 alpha}",
                beta,
                top,
            ));
        }
        TheoremId::GLq => {
            let q = q.unwrap_or(2.0);
            cs.push(Constraint::at_least("q >= 2", q, 2.0));
            cs.push(Constraint::below("q < 20/9", q, 20.0 / 9.0));
            cs.push(Constraint::above(
                "alpha > (9q - 12)/(8q - 8)",
                alpha,
                (9.0 * q - 12.0) / (8.0 * q - 8.0),
            ));
            cs.push(Constraint::below("alpha < 1", alpha, 1.0));
            cs.push(Constraint::above("beta > 1 - alpha", beta, 1.0 - alpha));
            cs.push(Constraint::below("beta < 2 - 2 alpha", beta, 2.0 - 2.0 * alpha));
            cs.push(Constraint::below(
                "beta < ((5q - 4)/(3q - 4)) alpha - 2",
                beta,
                (5.0 * q - 4.0) / (3.0 * q - 4.0) * alpha - 2.0,
            ));
            // the printed formula presumes a positive denominator; a
            // non-positive one makes the branch vacuous
            let denom = 4.0 / alpha * (1.0 - 1.0 / q) - 2.0;
            let top = if denom > 0.0 {
                (1.0 - alpha) / denom
            } else {
                f64::INFINITY
            };
            cs.push(Constraint::below(
                "beta < (1 - alpha)/((4/alpha)(1 - 1/q) - 2)",
                beta,
                top,
            ));
        }
    }
    RegionVerdict::from_constraints(theorem, cs)
}

/// Result row of an `(alpha, beta)` sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepSummary {
    pub samples: usize,
    pub main_admissible: usize,
    /// Main-admissible points that fail G_L2 or G_Lq at `q = 20/9 - 0.01`.
    pub nesting_violations: usize,
    /// Smallest sampled alpha with a nonempty interval `(1 - alpha, g(alpha))`.
    pub nonempty_threshold: Option<f64>,
}

/// Sweeps an `n x n` grid over `(alpha, beta) in [a_lo, a_hi] x [b_lo, b_hi]`
/// checking the nesting of the main window inside the section-level windows.
pub fn nesting_sweep(n: usize, a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> SweepSummary {
    let q_star = 20.0 / 9.0 - 0.01;
    let mut main_admissible = 0;
    let mut violations = 0;
    let mut threshold: Option<f64> = None;
    for i in 0..n {
        let alpha = a_lo + (a_hi - a_lo) * i as f64 / (n - 1) as f64;
        if alpha > 0.0 && alpha < 1.0 {
            let g = g_alpha_unchecked(alpha);
            if g > 1.0 - alpha && threshold.is_none() {
                threshold = Some(alpha);
            }
        }
        for jj in 0..n {
            let beta = b_lo + (b_hi - b_lo) * jj as f64 / (n - 1) as f64;
            let main = check_admissible(alpha, beta, None, TheoremId::Main);
            if main.admissible {
                main_admissible += 1;
                let l2 = check_admissible(alpha, beta, None, TheoremId::GL2);
                let lq = check_admissible(alpha, beta, Some(q_star), TheoremId::GLq);
                if !l2.admissible || !lq.admissible {
                    violations += 1;
                }
            }
        }
    }
    SweepSummary {
        samples: n * n,
        main_admissible,
        nesting_violations: violations,
        nonempty_threshold: threshold,
    }
}
