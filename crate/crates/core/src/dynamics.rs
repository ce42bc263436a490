//! The curvature-weighted SIR flow and its runtime monitors.
//!
//! Per node the dynamics are
//!
//! ```text
//! s' = u (1 - s) - beta * s .* (M y)
//! y' = beta * s .* (M y) - gamma * y
//! ```
//!
//! integrated with fixed-step classical RK4. Recorded samples are checked
//! against the box `[0, 1]`; excursions beyond a small tolerance are clipped
//! and reported rather than failing the run. The recovered compartment is
//! not integrated; `r = 1 - s - y` is derivable for plots.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::ContactMatrix;

/// Tolerance below which box-constraint excursions are treated as integrator
/// noise and recorded as-is.
pub const BOX_TOL: f64 = 1e-9;

/// Transmission, recovery and replenishment rates (each per unit time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpidemicParams {
    pub beta: f64,
    pub gamma: f64,
    pub u: f64,
}

impl EpidemicParams {
    pub fn new(beta: f64, gamma: f64, u: f64) -> Result<Self> {
        if !(beta > 0.0 && gamma > 0.0 && u > 0.0)
            || !beta.is_finite()
            || !gamma.is_finite()
            || !u.is_finite()
        {
            return Err(Error::InvalidParameter(format!(
                "rates must be positive and finite, got beta={beta}, gamma={gamma}, u={u}"
            )));
        }
        Ok(EpidemicParams { beta, gamma, u })
    }
}

/// Per-node susceptible and infected fractions at a time point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SirState {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl SirState {
    /// State at `t = 0`; both vectors must sit inside the invariant box.
    pub fn new(s: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if s.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "s has {} entries, y has {}",
                s.len(),
                y.len()
            )));
        }
        for i in 0..s.len() {
            let inside = s[i] >= -BOX_TOL
                && y[i] >= -BOX_TOL
                && s[i] <= 1.0 + BOX_TOL
                && y[i] <= 1.0 + BOX_TOL
                && s[i] + y[i] <= 1.0 + BOX_TOL;
            if !inside || !s[i].is_finite() || !y[i].is_finite() {
                return Err(Error::InvalidState(format!(
                    "node {i}: (s, y) = ({}, {}) outside the invariant region",
                    s[i], y[i]
                )));
            }
        }
        Ok(SirState { s, y, t: 0.0 })
    }

    /// Homogeneous state: every node at `(1 - y0, y0)`.
    pub fn homogeneous(n: usize, y0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&y0) {
            return Err(Error::InvalidState(format!(
                "initial infected fraction {y0} outside [0, 1]"
            )));
        }
        SirState::new(vec![1.0 - y0; n], vec![y0; n])
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }
}

/// A recorded clip of one component back into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClipEvent {
    pub step: usize,
    pub t: f64,
    pub node: usize,
    /// `'s'` or `'y'`.
    pub var: char,
    /// The offending raw value before clipping.
    pub value: f64,
}

/// Uniformly sampled solution of the SIR flow.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SirState>,
    pub clips: Vec<ClipEvent>,
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.states.first().map_or(0, SirState::n)
    }

    pub fn last(&self) -> &SirState {
        self.states.last().expect("trajectory has at least t = 0")
    }
}

/// Evaluates the vector field at a state: returns `(ds, dy)`.
pub fn rhs(state: &SirState, m: &ContactMatrix, p: &EpidemicParams) -> Result<(Vec<f64>, Vec<f64>)> {
    if state.n() != m.n() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} nodes, operator has {}",
            state.n(),
            m.n()
        )));
    }
    let n = m.n();
    let mut my = vec![0.0; n];
    let mut ds = vec![0.0; n];
    let mut dy = vec![0.0; n];
    rhs_raw(&state.s, &state.y, m, p, &mut my, &mut ds, &mut dy);
    Ok((ds, dy))
}

#[inline]
fn rhs_raw(
    s: &[f64],
    y: &[f64],
    m: &ContactMatrix,
    p: &EpidemicParams,
    my: &mut [f64],
    ds: &mut [f64],
    dy: &mut [f64],
) {
    m.mul_vec_into(y, my);
    for i in 0..s.len() {
        let infection = p.beta * s[i] * my[i];
        ds[i] = p.u * (1.0 - s[i]) - infection;
        dy[i] = infection - p.gamma * y[i];
    }
}

/// Integrates the flow with classical fixed-step RK4.
///
/// States are recorded at step 0, every `sample_every` steps, and at the
/// final step. Recorded components outside `[0, 1]` by more than [`BOX_TOL`]
/// are clipped and logged as [`ClipEvent`]s; the live integrator state is
/// never clipped.
pub fn integrate(
    m: &ContactMatrix,
    p: &EpidemicParams,
    initial: &SirState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t_end must be >= 0, got {t_end}"
        )));
    }
    if sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be >= 1".into()));
    }
    if initial.n() != m.n() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} nodes, operator has {}",
            initial.n(),
            m.n()
        )));
    }

    let n = m.n();
    let n_steps = (t_end / dt).round() as usize;

    let mut s = initial.s.clone();
    let mut y = initial.y.clone();

    let mut my = vec![0.0; n];
    let mut k1s = vec![0.0; n];
    let mut k1y = vec![0.0; n];
    let mut k2s = vec![0.0; n];
    let mut k2y = vec![0.0; n];
    let mut k3s = vec![0.0; n];
    let mut k3y = vec![0.0; n];
    let mut k4s = vec![0.0; n];
    let mut k4y = vec![0.0; n];
    let mut ts = vec![0.0; n];
    let mut ty = vec![0.0; n];

    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut clips = Vec::new();

    record(0, 0.0, &s, &y, &mut times, &mut states, &mut clips);

    for step in 1..=n_steps {
        rhs_raw(&s, &y, m, p, &mut my, &mut k1s, &mut k1y);
        stage(&s, &y, &k1s, &k1y, 0.5 * dt, &mut ts, &mut ty);
        rhs_raw(&ts, &ty, m, p, &mut my, &mut k2s, &mut k2y);
        stage(&s, &y, &k2s, &k2y, 0.5 * dt, &mut ts, &mut ty);
        rhs_raw(&ts, &ty, m, p, &mut my, &mut k3s, &mut k3y);
        stage(&s, &y, &k3s, &k3y, dt, &mut ts, &mut ty);
        rhs_raw(&ts, &ty, m, p, &mut my, &mut k4s, &mut k4y);

        let sixth = dt / 6.0;
        for i in 0..n {
            s[i] += sixth * (k1s[i] + 2.0 * k2s[i] + 2.0 * k3s[i] + k4s[i]);
            y[i] += sixth * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
        }

        let t = step as f64 * dt;
        if s.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step, t });
        }
        if step % sample_every == 0 || step == n_steps {
            record(step, t, &s, &y, &mut times, &mut states, &mut clips);
        }
    }

    Ok(Trajectory {
        times,
        states,
        clips,
    })
}

#[inline]
fn stage(s: &[f64], y: &[f64], ks: &[f64], ky: &[f64], h: f64, ts: &mut [f64], ty: &mut [f64]) {
    for i in 0..s.len() {
        ts[i] = s[i] + h * ks[i];
        ty[i] = y[i] + h * ky[i];
    }
}

fn record(
    step: usize,
    t: f64,
    s: &[f64],
    y: &[f64],
    times: &mut Vec<f64>,
    states: &mut Vec<SirState>,
    clips: &mut Vec<ClipEvent>,
) {
    let mut rs = s.to_vec();
    let mut ry = y.to_vec();
    for i in 0..rs.len() {
        clip_component(step, t, i, 's', &mut rs[i], clips);
        clip_component(step, t, i, 'y', &mut ry[i], clips);
    }
    times.push(t);
    states.push(SirState { s: rs, y: ry, t });
}

/// Clips `value` into `[0, 1]` when it strays further than [`BOX_TOL`],
/// recording the event; smaller excursions are kept verbatim so the
/// invariance monitor can see them.
fn clip_component(
    step: usize,
    t: f64,
    node: usize,
    var: char,
    value: &mut f64,
    clips: &mut Vec<ClipEvent>,
) {
    if *value < -BOX_TOL {
        clips.push(ClipEvent {
            step,
            t,
            node,
            var,
            value: *value,
        });
        *value = 0.0;
    } else if *value > 1.0 + BOX_TOL {
        clips.push(ClipEvent {
            step,
            t,
            node,
            var,
            value: *value,
        });
        *value = 1.0;
    }
}

/// Linear Lyapunov values `V(t) = sum_i v_i y_i(t)` along a trajectory; `v`
/// should be the left Perron vector of the operator that generated it.
pub fn linear_lyapunov(traj: &Trajectory, left_perron: &[f64]) -> Result<Vec<f64>> {
    if traj.n() != left_perron.len() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} nodes, vector has {}",
            traj.n(),
            left_perron.len()
        )));
    }
    Ok(traj
        .states
        .iter()
        .map(|st| st.y.iter().zip(left_perron).map(|(a, b)| a * b).sum())
        .collect())
}

/// Volterra functional
/// `W = sum_i (s_i - s+_i - s+_i ln(s_i/s+_i)) + (y_i - y+_i - y+_i ln(y_i/y+_i))`
/// for a strictly interior state against a strictly positive equilibrium.
/// Nonnegative, zero exactly at the equilibrium.
pub fn volterra_lyapunov(state: &SirState, s_eq: &[f64], y_eq: &[f64]) -> Result<f64> {
    let n = state.n();
    if s_eq.len() != n || y_eq.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "state has {n} nodes, equilibrium has ({}, {})",
            s_eq.len(),
            y_eq.len()
        )));
    }
    let mut w = 0.0;
    for i in 0..n {
        if state.s[i] <= 0.0 || state.y[i] <= 0.0 {
            return Err(Error::NonInteriorState);
        }
        if s_eq[i] <= 0.0 || y_eq[i] <= 0.0 {
            return Err(Error::InvalidParameter(
                "equilibrium must be strictly positive".into(),
            ));
        }
        w += volterra_term(state.s[i], s_eq[i]);
        w += volterra_term(state.y[i], y_eq[i]);
    }
    Ok(w)
}

#[inline]
fn volterra_term(x: f64, x_eq: f64) -> f64 {
    x - x_eq - x_eq * (x / x_eq).ln()
}

/// Worst-case excesses over the invariant region along a trajectory.
/// Negative values mean the bound was never approached.
#[derive(Debug, Clone, Serialize)]
pub struct OmegaReport {
    /// `max_t (-min_i s_i)`: positive iff some `s` went negative.
    pub s_negative: f64,
    /// `max_t (-min_i y_i)`.
    pub y_negative: f64,
    /// `max_t (max_i s_i - 1)`.
    pub s_excess: f64,
    /// `max_t (max_i y_i - 1)`.
    pub y_excess: f64,
    /// `max_t (max_i (s_i + y_i) - 1)`.
    pub sum_excess: f64,
    pub clip_events: Vec<ClipEvent>,
}

/// Single-sample version of the invariance monitor: the largest violation of
/// `0 <= s, y` and `s + y <= 1` (negative when fully inside).
pub fn omega_excess(state: &SirState) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..state.n() {
        worst = worst
            .max(-state.s[i])
            .max(-state.y[i])
            .max(state.s[i] - 1.0)
            .max(state.y[i] - 1.0)
            .max(state.s[i] + state.y[i] - 1.0);
    }
    worst
}

/// Scans a trajectory for violations of the invariant region.
pub fn omega_monitor(traj: &Trajectory) -> OmegaReport {
    let mut rep = OmegaReport {
        s_negative: f64::NEG_INFINITY,
        y_negative: f64::NEG_INFINITY,
        s_excess: f64::NEG_INFINITY,
        y_excess: f64::NEG_INFINITY,
        sum_excess: f64::NEG_INFINITY,
        clip_events: traj.clips.clone(),
    };
    for st in &traj.states {
        for i in 0..st.n() {
            rep.s_negative = rep.s_negative.max(-st.s[i]);
            rep.y_negative = rep.y_negative.max(-st.y[i]);
            rep.s_excess = rep.s_excess.max(st.s[i] - 1.0);
            rep.y_excess = rep.y_excess.max(st.y[i] - 1.0);
            rep.sum_excess = rep.sum_excess.max(st.s[i] + st.y[i] - 1.0);
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::WeightField;
    use crate::graph::Graph;
    use crate::operator::MatrixMode;

    fn k2_raw() -> ContactMatrix {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        ContactMatrix::build(&g, &WeightField::ones(&g), MatrixMode::Raw).unwrap()
    }

    fn scalar_m() -> ContactMatrix {
        ContactMatrix::from_triplets(1, &[(0, 0, 1.0)], MatrixMode::Raw).unwrap()
    }

    #[test]
    fn dfe_is_equilibrium() {
        let m = k2_raw();
        let p = EpidemicParams::new(0.4, 0.2, 0.1).unwrap();
        let state = SirState::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let (ds, dy) = rhs(&state, &m, &p).unwrap();
        assert!(ds.iter().all(|&v| v == 0.0));
        assert!(dy.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_endemic_point_is_stationary() {
        // n=1, M=[1], beta=0.4, gamma=0.2, u=0.1: equilibrium at (0.5, 0.25).
        let m = scalar_m();
        let p = EpidemicParams::new(0.4, 0.2, 0.1).unwrap();
        let state = SirState::new(vec![0.5], vec![0.25]).unwrap();
        let (ds, dy) = rhs(&state, &m, &p).unwrap();
        assert!(ds[0].abs() < 1e-15);
        assert!(dy[0].abs() < 1e-15);
    }

    #[test]
    fn boundary_inflow_only() {
        let m = k2_raw();
        let p = EpidemicParams::new(0.4, 0.2, 0.1).unwrap();
        let state = SirState::new(vec![0.0, 0.0], vec![0.3, 0.3]).unwrap();
        let (ds, dy) = rhs(&state, &m, &p).unwrap();
        for i in 0..2 {
            assert!((ds[i] - p.u).abs() < 1e-15);
            assert!((dy[i] + p.gamma * 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_infection_gives_scalar_s_relaxation() {
        // y = 0 decouples s: s(t) = 1 - (1 - s0) exp(-u t).
        let m = k2_raw();
        let p = EpidemicParams::new(0.4, 0.2, 0.1).unwrap();
        let s0 = 0.4;
        let initial = SirState::new(vec![s0, s0], vec![0.0, 0.0]).unwrap();
        let t_end = 1.0 / p.u;
        let traj = integrate(&m, &p, &initial, t_end, 0.01, 100).unwrap();
        let expected = 1.0 - (1.0 - s0) * (-p.u * t_end).exp();
        let last = traj.last();
        for i in 0..2 {
            assert!((last.s[i] - expected).abs() < 1e-6);
            assert_eq!(last.y[i], 0.0);
        }
    }

    #[test]
    fn subcritical_infection_decays() {
        // K2 raw: lambda = 1, R0 = beta/gamma = 0.5 < 1.
        let m = k2_raw();
        let p = EpidemicParams::new(0.1, 0.2, 0.05).unwrap();
        let initial = SirState::new(vec![0.9, 0.9], vec![0.1, 0.1]).unwrap();
        let traj = integrate(&m, &p, &initial, 100.0, 0.01, 1000).unwrap();
        let y_end: f64 = traj.last().y.iter().fold(0.0_f64, |a, &b| a.max(b));
        assert!(y_end < 0.1);
    }

    #[test]
    fn rk4_has_fourth_order_richardson_ratio() {
        let m = k2_raw();
        let p = EpidemicParams::new(0.4, 0.2, 0.1).unwrap();
        let initial = SirState::new(vec![0.8, 0.8], vec![0.1, 0.1]).unwrap();
        let t_end = 5.0;
        let dt = 0.1;
        let solve = |h: f64| {
            let traj = integrate(&m, &p, &initial, t_end, h, usize::MAX).unwrap();
            traj.last().y.clone()
        };
        let y_h = solve(dt);
        let y_h2 = solve(dt / 2.0);
        let y_ref = solve(dt / 8.0);
        let err = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0_f64, f64::max)
        };
        let ratio = err(&y_h, &y_ref) / err(&y_h2, &y_ref);
        assert!(
            (12.0..=20.0).contains(&ratio),
            "Richardson ratio {ratio} outside [12, 20]"
        );
    }

    #[test]
    fn integrate_detects_nonfinite() {
        // Huge beta blows the state up to infinity within a few steps.
        let m = scalar_m();
        let p = EpidemicParams::new(1e200, 0.2, 0.1).unwrap();
        let initial = SirState::new(vec![0.5], vec![0.5]).unwrap();
        match integrate(&m, &p, &initial, 1.0, 0.1, 1) {
            Err(Error::NonFinite { .. }) => {}
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn clip_records_event_and_clamps() {
        let mut clips = Vec::new();
        let mut v = -1e-6;
        clip_component(3, 0.3, 1, 'y', &mut v, &mut clips);
        assert_eq!(v, 0.0);
        assert_eq!(clips.len(), 1);
        assert_eq!(clips[0].node, 1);

        // inside tolerance: untouched, unlogged
        let mut v = -1e-12;
        clip_component(3, 0.3, 1, 's', &mut v, &mut clips);
        assert_eq!(v, -1e-12);
        assert_eq!(clips.len(), 1);
    }

    #[test]
    fn linear_lyapunov_values() {
        let m = k2_raw();
        let p = EpidemicParams::new(0.1, 0.2, 0.1).unwrap();
        let initial = SirState::new(vec![0.9, 0.9], vec![0.1, 0.1]).unwrap();
        let traj = integrate(&m, &p, &initial, 1.0, 0.01, 10).unwrap();
        // v normalized to sum one turns V into a weighted average.
        let v = vec![0.5, 0.5];
        let vals = linear_lyapunov(&traj, &v).unwrap();
        assert!((vals[0] - 0.1).abs() < 1e-15);

        let zero_traj = Trajectory {
            times: vec![0.0],
            states: vec![SirState::new(vec![1.0], vec![0.0]).unwrap()],
            clips: vec![],
        };
        assert_eq!(linear_lyapunov(&zero_traj, &[1.0]).unwrap(), vec![0.0]);
        assert!(linear_lyapunov(&traj, &[1.0]).is_err());
    }

    #[test]
    fn volterra_hand_value() {
        // n=1, eq = (0.5, 0.5), state = (0.25, 0.25):
        // W = 2 * (0.25 - 0.5 - 0.5 ln 0.5) ~= 0.193147
        let state = SirState::new(vec![0.25], vec![0.25]).unwrap();
        let w = volterra_lyapunov(&state, &[0.5], &[0.5]).unwrap();
        assert!((w - 0.193147).abs() < 1e-6);
    }

    #[test]
    fn volterra_zero_at_equilibrium_positive_elsewhere() {
        let eq_s = [0.5, 0.6];
        let eq_y = [0.2, 0.1];
        let at_eq = SirState::new(eq_s.to_vec(), eq_y.to_vec()).unwrap();
        assert_eq!(volterra_lyapunov(&at_eq, &eq_s, &eq_y).unwrap(), 0.0);

        let off = SirState::new(vec![0.5, 0.55], vec![0.2, 0.1]).unwrap();
        assert!(volterra_lyapunov(&off, &eq_s, &eq_y).unwrap() > 0.0);
    }

    #[test]
    fn volterra_rejects_boundary_state() {
        let state = SirState::new(vec![0.0], vec![0.5]).unwrap();
        assert!(matches!(
            volterra_lyapunov(&state, &[0.5], &[0.5]),
            Err(Error::NonInteriorState)
        ));
    }

    #[test]
    fn omega_monitor_dfe_run_clean() {
        let m = k2_raw();
        let p = EpidemicParams::new(0.4, 0.2, 0.1).unwrap();
        let initial = SirState::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let traj = integrate(&m, &p, &initial, 10.0, 0.01, 100).unwrap();
        let rep = omega_monitor(&traj);
        assert!(rep.s_negative <= 1e-9);
        assert!(rep.y_negative <= 1e-9);
        assert!(rep.s_excess <= 1e-9);
        assert!(rep.y_excess <= 1e-9);
        assert!(rep.sum_excess <= 1e-9);
        assert!(rep.clip_events.is_empty());
    }

    #[test]
    fn omega_mass_bound_when_u_below_gamma() {
        // On s + y = 1 the outward derivative is (u - gamma) y <= 0 here.
        let m = k2_raw();
        let p = EpidemicParams::new(0.8, 0.3, 0.1).unwrap();
        let initial = SirState::new(vec![0.7, 0.5], vec![0.3, 0.5]).unwrap();
        let traj = integrate(&m, &p, &initial, 50.0, 0.01, 50).unwrap();
        let rep = omega_monitor(&traj);
        assert!(rep.sum_excess <= 1e-6, "sum excess {}", rep.sum_excess);
    }

    #[test]
    fn trajectory_sampling_grid() {
        let m = k2_raw();
        let p = EpidemicParams::new(0.4, 0.2, 0.1).unwrap();
        let initial = SirState::new(vec![0.9, 0.9], vec![0.05, 0.05]).unwrap();
        let traj = integrate(&m, &p, &initial, 1.0, 0.1, 2).unwrap();
        assert_eq!(traj.times.len(), 6); // t = 0.0, 0.2, 0.4, 0.6, 0.8, 1.0
        assert_eq!(traj.times[0], 0.0);
        assert!((traj.times[5] - 1.0).abs() < 1e-12);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }
}
