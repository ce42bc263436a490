//! Endemic equilibrium via the monotone fixed-point operator
//!
//! ```text
//! (T y)_i = (beta/gamma) * (u / (u + beta (M y)_i)) * (M y)_i
//! ```
//!
//! For `R0 > 1` the interior fixed point `y+` is enclosed between a
//! subsolution `alpha * v` (a small multiple of the right Perron vector) and
//! a constant supersolution; iterating `T` drives the lower sequence up and
//! the upper sequence down onto `y+`, and both orderings are recorded as a
//! machine-checkable certificate.

use serde::Serialize;

use crate::dynamics::{integrate, EpidemicParams, SirState};
use crate::error::{Error, Result};
use crate::operator::ContactMatrix;

/// Solver knobs; the defaults match the engine-wide tolerances.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Stop once the bracket width drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting scale for the subsolution `alpha * v` (halved until the
    /// subsolution inequality holds).
    pub alpha_init: f64,
    /// Margin added to the a-priori bound `u/gamma` for the supersolution.
    pub upper_margin: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 100_000,
            alpha_init: 1e-3,
            upper_margin: 1e-6,
        }
    }
}

/// Per-iteration ordering checks: `lower_ok[k]` records that iterate `k` of
/// the lower sequence did not decrease, `upper_ok[k]` that the upper one did
/// not increase (both with slack `1e-12`).
#[derive(Debug, Clone, Default, Serialize)]
pub struct MonotoneCertificate {
    pub lower_ok: Vec<bool>,
    pub upper_ok: Vec<bool>,
}

impl MonotoneCertificate {
    pub fn all_ok(&self) -> bool {
        self.lower_ok.iter().all(|&b| b) && self.upper_ok.iter().all(|&b| b)
    }

    pub fn violations(&self) -> usize {
        self.lower_ok.iter().filter(|&&b| !b).count()
            + self.upper_ok.iter().filter(|&&b| !b).count()
    }
}

/// Converged endemic equilibrium with its enclosure diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub y_dagger: Vec<f64>,
    pub s_dagger: Vec<f64>,
    pub iterations: usize,
    /// Final `max_i (upper_i - lower_i)`; the midpoint is reported, so the
    /// error bar is half this.
    pub bracket_width: f64,
    pub monotone_certificate: MonotoneCertificate,
    pub r0: f64,
    /// True when `u/gamma > 1` forced the supersolution to start at 1.
    pub upper_capped: bool,
}

/// One application of the fixed-point operator `T`.
pub fn apply_t(y: &[f64], m: &ContactMatrix, p: &EpidemicParams) -> Vec<f64> {
    debug_assert_eq!(y.len(), m.n());
    debug_assert!(y.iter().all(|&v| v >= 0.0));
    let my = m.mul_vec(y);
    my.iter()
        .map(|&x| (p.beta / p.gamma) * (p.u / (p.u + p.beta * x)) * x)
        .collect()
}

/// Solves for the endemic equilibrium by sub/supersolution bracketing.
///
/// Fails when `R0 <= 1` (no interior equilibrium), when a valid bracket
/// cannot be constructed, or when the bracket does not contract to `tol`
/// within `max_iter` sweeps.
pub fn solve_endemic(
    m: &ContactMatrix,
    p: &EpidemicParams,
    opts: &SolveOptions,
) -> Result<EquilibriumReport> {
    let spectral = m.spectral()?;
    let r0 = p.beta / p.gamma * spectral.lambda_max;
    if r0 <= 1.0 {
        return Err(Error::NoEndemicEquilibrium { r0 });
    }
    let n = m.n();

    // Max-normalized Perron direction for the subsolution.
    let vmax = spectral
        .right_perron
        .iter()
        .fold(0.0_f64, |a, &b| a.max(b));
    let v: Vec<f64> = spectral.right_perron.iter().map(|&x| x / vmax).collect();

    // Supersolution: T(y) < (u/gamma) * 1 componentwise, so any constant
    // above u/gamma works; y is a fraction, so cap at 1 and verify.
    let cap = p.u / p.gamma + opts.upper_margin;
    let upper_capped = cap > 1.0;
    let upper_start = cap.min(1.0);
    let mut upper = vec![upper_start; n];
    if upper_capped {
        let t_up = apply_t(&upper, m, p);
        if !strictly_below(&t_up, &upper) {
            return Err(Error::BracketFailure(format!(
                "u/gamma = {} > 1 and T(1) is not below 1; equilibrium may lie outside [0,1]^n",
                p.u / p.gamma
            )));
        }
    }

    // Subsolution: shrink alpha until T(alpha v) > alpha v strictly.
    let mut alpha = opts.alpha_init.min(upper_start / 2.0);
    let mut lower = None;
    for _ in 0..1024 {
        let cand: Vec<f64> = v.iter().map(|&x| alpha * x).collect();
        let t_cand = apply_t(&cand, m, p);
        if strictly_above(&t_cand, &cand) {
            lower = Some(cand);
            break;
        }
        alpha *= 0.5;
    }
    let mut lower = lower.ok_or_else(|| {
        Error::BracketFailure("no subsolution found along the Perron direction".into())
    })?;

    let mut certificate = MonotoneCertificate::default();
    let mut width = bracket_width(&lower, &upper);
    let mut iterations = 0;

    while width > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::FixedPointMaxIter {
                max_iter: opts.max_iter,
                width,
            });
        }
        let new_lower = apply_t(&lower, m, p);
        let new_upper = apply_t(&upper, m, p);
        certificate.lower_ok.push(nondecreasing(&lower, &new_lower));
        certificate.upper_ok.push(nonincreasing(&upper, &new_upper));
        lower = new_lower;
        upper = new_upper;
        width = bracket_width(&lower, &upper);
        iterations += 1;
    }

    let y_dagger: Vec<f64> = lower
        .iter()
        .zip(&upper)
        .map(|(&lo, &hi)| 0.5 * (lo + hi))
        .collect();
    let my = m.mul_vec(&y_dagger);
    let s_dagger: Vec<f64> = my.iter().map(|&x| p.u / (p.u + p.beta * x)).collect();

    Ok(EquilibriumReport {
        y_dagger,
        s_dagger,
        iterations,
        bracket_width: width,
        monotone_certificate: certificate,
        r0,
        upper_capped,
    })
}

/// Deviation between the computed equilibrium and the long-time ODE limit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossCheck {
    pub y_deviation: f64,
    pub s_deviation: f64,
    pub t_end: f64,
}

/// Integrates from the generic interior point `(s, y) = (0.9, 0.05)` at
/// every node and reports the final distance to the equilibrium.
pub fn cross_check_ode(
    report: &EquilibriumReport,
    m: &ContactMatrix,
    p: &EpidemicParams,
    t_end: f64,
    dt: f64,
) -> Result<CrossCheck> {
    let n = m.n();
    let initial = SirState::new(vec![0.9; n], vec![0.05; n])?;
    let n_steps = (t_end / dt).round() as usize;
    let traj = integrate(m, p, &initial, t_end, dt, n_steps.max(1))?;
    let last = traj.last();
    let dev = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0_f64, f64::max)
    };
    Ok(CrossCheck {
        y_deviation: dev(&last.y, &report.y_dagger),
        s_deviation: dev(&last.s, &report.s_dagger),
        t_end,
    })
}

fn bracket_width(lower: &[f64], upper: &[f64]) -> f64 {
    lower
        .iter()
        .zip(upper)
        .map(|(&lo, &hi)| hi - lo)
        .fold(0.0_f64, f64::max)
}

fn strictly_above(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x > y)
}

fn strictly_below(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x < y)
}

fn nondecreasing(old: &[f64], new: &[f64]) -> bool {
    new.iter().zip(old).all(|(n, o)| *n >= o - 1e-12)
}

fn nonincreasing(old: &[f64], new: &[f64]) -> bool {
    new.iter().zip(old).all(|(n, o)| *n <= o + 1e-12)
}
