//! Method-of-steps simulation of `x′ = a·x(t−r) + x² + c·x·x(t−r)` and
//! limit-cycle detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::{cycle_radii, fold_mu, l1_from_cascade, l2_at};
use crate::scalar::Real;
use crate::spectrum::{a_for_mu, leading_pair, ModelParams};

pub const DIVERGENCE_CUTOFF: f64 = 10.0;
pub const MIN_STEPS_PER_DELAY: usize = 200;
/// Relative spread allowed among the last peaks of a settled cycle.
pub const PEAK_TOLERANCE: f64 = 5e-3;
pub const PEAKS_FOR_CONVERGENCE: usize = 5;
/// Peaks below this height count as decay to the equilibrium.
pub const AMPLITUDE_FLOOR: f64 = 1e-6;

fn rhs<T: Real>(p: &ModelParams<T>, x: T, xd: T) -> T {
    p.a * xd + x * x + p.c * x * xd
}

/// Initial function on `[−r, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum History<T> {
    Constant(T),
    /// Values and derivatives at the `N + 1` grid nodes `−r, −r + dt, …, 0`.
    Samples { x: Vec<T>, dx: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub params: ModelParams<T>,
    pub dt: T,
    pub steps_per_delay: usize,
    /// Constant history value, or the history's value at `0` for sampled histories.
    pub history_amp: T,
    /// Samples at `t = −r + k·dt`; the first `N` entries are the history.
    pub x: Vec<T>,
    pub diverged: bool,
    pub truncated_at: Option<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn time(&self, k: usize) -> T {
        T::lit(k as f64 - self.steps_per_delay as f64) * self.dt
    }

    /// Samples from `t = 0` on.
    pub fn solution(&self) -> &[T] {
        &self.x[self.steps_per_delay..]
    }

    pub fn t_end(&self) -> T {
        self.time(self.x.len() - 1)
    }
}

/// Integrates from a constant history.
pub fn integrate<T: Real>(params: &ModelParams<T>, history_amp: T, horizon: T, n: usize) -> Result<Trajectory<T>> {
    integrate_history(params, &History::Constant(history_amp), horizon, n)
}

/// Classic RK4 with `dt = r/N`. Delayed values at full steps are grid nodes;
/// half-step values come from cubic Hermite interpolation of stored values
/// and right-hand-side derivatives. `horizon` is rounded up to whole steps.
pub fn integrate_history<T: Real>(
    params: &ModelParams<T>,
    history: &History<T>,
    horizon: T,
    n: usize,
) -> Result<Trajectory<T>> {
    if n < MIN_STEPS_PER_DELAY {
        return Err(Error::InvalidParameter(format!(
            "steps per delay must be at least {MIN_STEPS_PER_DELAY}, got {n}"
        )));
    }
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let dt = params.r / T::lit(n as f64);
    let steps = (horizon / dt - T::lit(1e-9)).ceil().to_usize().ok_or_else(|| {
        Error::InvalidParameter(format!("step count for horizon {horizon} not representable"))
    })?;

    let (mut x, mut dx, left_dx_at_zero, amp) = match history {
        History::Constant(h) => {
            let mut dx = vec![T::zero(); n + 1];
            dx[n] = rhs(params, *h, *h);
            (vec![*h; n + 1], dx, T::zero(), *h)
        }
        History::Samples { x, dx } => {
            if x.len() != n + 1 || dx.len() != n + 1 {
                return Err(Error::InvalidParameter(format!(
                    "sampled history needs {} nodes, got {} values and {} derivatives",
                    n + 1,
                    x.len(),
                    dx.len()
                )));
            }
            let mut d = dx.clone();
            d[n] = rhs(params, x[n], x[0]);
            (x.clone(), d, dx[n], x[n])
        }
    };
    x.reserve(steps);
    dx.reserve(steps);

    let half = dt / T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let eighth = dt / T::lit(8.0);
    let cutoff = T::lit(DIVERGENCE_CUTOFF);
    let mut diverged = false;
    let mut truncated_at = None;

    for step in 0..steps {
        let k = n + step;
        let i = step;
        let (xd0, xd1) = (x[i], x[i + 1]);
        // the history's own slope applies on its last interval, not the solution's
        let dx_right_end = if i + 1 == n { left_dx_at_zero } else { dx[i + 1] };
        let xdm = (xd0 + xd1) / T::lit(2.0) + eighth * (dx[i] - dx_right_end);
        let y = x[k];
        let k1 = rhs(params, y, xd0);
        let k2 = rhs(params, y + half * k1, xdm);
        let k3 = rhs(params, y + half * k2, xdm);
        let k4 = rhs(params, y + dt * k3, xd1);
        let next = y + sixth * (k1 + T::lit(2.0) * (k2 + k3) + k4);
        if !next.is_finite() || next.abs() > cutoff {
            diverged = true;
            truncated_at = Some(T::lit((step + 1) as f64) * dt);
            break;
        }
        x.push(next);
        dx.push(rhs(params, next, xd1));
    }

    Ok(Trajectory {
        params: *params,
        dt,
        steps_per_delay: n,
        history_amp: amp,
        x,
        diverged,
        truncated_at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attracting,
    RepellingEstimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleInfo<T> {
    pub amplitude: T,
    pub period: T,
    pub converged: bool,
    pub stability: Stability,
}

/// Strict local maxima refined by a parabola through each sample triple: `(time, height)`.
pub fn peaks<T: Real>(traj: &Trajectory<T>, from: usize) -> Vec<(T, T)> {
    let x = &traj.x;
    let half = T::lit(0.5);
    let mut out = Vec::new();
    for k in from.max(traj.steps_per_delay + 1)..x.len().saturating_sub(1) {
        let (y0, y1, y2) = (x[k - 1], x[k], x[k + 1]);
        if y1 > y0 && y1 >= y2 {
            let den = y0 - y1 - y1 + y2;
            let d = if den < T::zero() { half * (y0 - y2) / den } else { T::zero() };
            out.push((traj.time(k) + d * traj.dt, y1 - T::lit(0.25) * (y0 - y2) * d));
        }
    }
    out
}

fn settled<T: Real>(v: &[T]) -> Option<T> {
    let mean = v.iter().fold(T::zero(), |s, &y| s + y) / T::lit(v.len() as f64);
    let tol = T::lit(PEAK_TOLERANCE) * mean.abs();
    v.iter().all(|&y| (y - mean).abs() <= tol).then_some(mean)
}

/// Detects a settled oscillation in the part of `traj` after `transient_fraction` of its length.
pub fn find_cycle<T: Real>(traj: &Trajectory<T>, transient_fraction: T) -> Result<Option<CycleInfo<T>>> {
    if !(transient_fraction >= T::zero() && transient_fraction <= T::lit(0.9)) {
        return Err(Error::InvalidParameter(format!(
            "transient fraction must lie in [0, 0.9], got {transient_fraction}"
        )));
    }
    if traj.diverged {
        return Ok(None);
    }
    let len = traj.solution().len();
    let skip = (transient_fraction * T::lit(len as f64)).to_usize().unwrap_or(0);
    let pk = peaks(traj, traj.steps_per_delay + skip);
    if pk.len() < PEAKS_FOR_CONVERGENCE + 1 {
        return Ok(None);
    }
    let tail = &pk[pk.len() - PEAKS_FOR_CONVERGENCE..];
    let heights: Vec<T> = tail.iter().map(|p| p.1).collect();
    let gaps: Vec<T> = pk[pk.len() - PEAKS_FOR_CONVERGENCE - 1..]
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .collect();
    let (Some(amplitude), Some(period)) = (settled(&heights), settled(&gaps)) else {
        return Ok(None);
    };
    if !(amplitude > T::lit(AMPLITUDE_FLOOR)) || !(period > T::zero()) {
        return Ok(None);
    }
    Ok(Some(CycleInfo {
        amplitude,
        period,
        converged: true,
        stability: Stability::Attracting,
    }))
}

/// Integration settings shared by the detection routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    pub steps_per_delay: usize,
    pub horizon: T,
    pub transient_fraction: T,
    pub bisection_iterations: usize,
}

impl<T: Real> Default for SimConfig<T> {
    fn default() -> Self {
        Self {
            steps_per_delay: MIN_STEPS_PER_DELAY,
            horizon: T::lit(4000.0),
            transient_fraction: T::lit(0.8),
            bisection_iterations: 30,
        }
    }
}

fn escapes<T: Real>(params: &ModelParams<T>, amp: T, cfg: &SimConfig<T>) -> Result<bool> {
    Ok(integrate(params, amp, cfg.horizon, cfg.steps_per_delay)?.diverged)
}

/// Constant-history amplitude separating bounded from escaping solutions.
pub fn basin_bisection<T: Real>(params: &ModelParams<T>, amp_lo: T, amp_hi: T, cfg: &SimConfig<T>) -> Result<T> {
    if !(amp_lo < amp_hi) {
        return Err(Error::Precondition(format!("need amp_lo < amp_hi, got {amp_lo} and {amp_hi}")));
    }
    if escapes(params, amp_lo, cfg)? {
        return Err(Error::Precondition(format!("lower amplitude {amp_lo} already escapes")));
    }
    if !escapes(params, amp_hi, cfg)? {
        return Err(Error::Precondition(format!("upper amplitude {amp_hi} stays bounded")));
    }
    let (mut lo, mut hi) = (amp_lo, amp_hi);
    for _ in 0..cfg.bisection_iterations {
        let mid = (lo + hi) / T::lit(2.0);
        if escapes(params, mid, cfg)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// One parameter point of the nested-cycle search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow<T> {
    pub a: T,
    pub c: T,
    pub mu: T,
    pub l1: T,
    pub l2: T,
    /// Normal-form x-amplitudes `2ρ`, absent outside the two-cycle region.
    pub predicted_inner: Option<T>,
    pub predicted_outer: Option<T>,
    pub inner_amp: Option<T>,
    pub inner_period: Option<T>,
    pub inner_attracting: Option<bool>,
    pub outer_amp: Option<T>,
    pub outer_stability: Option<Stability>,
    pub flags: Vec<String>,
}

impl<T: Real> ScanRow<T> {
    pub fn ok(&self) -> bool {
        self.flags.is_empty()
    }
}

/// History amplitude used to reach the inner cycle.
pub const INNER_START: f64 = 0.02;

/// Detects both cycles at `(a, c)` with normal-form coefficients `l1`, `l2`.
pub fn scan_point<T: Real>(a: T, c: T, l1: T, l2: T, cfg: &SimConfig<T>) -> Result<ScanRow<T>> {
    let params = ModelParams::with_default_delay(a, c);
    let mu = leading_pair(&params)?.mu;
    let two = T::lit(2.0);
    let radii = cycle_radii(mu, l1, l2).ok();
    let mut row = ScanRow {
        a,
        c,
        mu,
        l1,
        l2,
        predicted_inner: radii.map(|r| two * r.inner),
        predicted_outer: radii.map(|r| two * r.outer),
        inner_amp: None,
        inner_period: None,
        inner_attracting: None,
        outer_amp: None,
        outer_stability: None,
        flags: Vec::new(),
    };
    if radii.is_none() {
        row.flags.push("no two-cycle prediction at this mu".into());
    }

    let start = T::lit(INNER_START);
    let inner = find_cycle(&integrate(&params, start, cfg.horizon, cfg.steps_per_delay)?, cfg.transient_fraction)?;
    match inner {
        Some(cyc) => {
            row.inner_amp = Some(cyc.amplitude);
            row.inner_period = Some(cyc.period);
            let mut same = true;
            for f in [0.9, 1.1] {
                let other = integrate(&params, start * T::lit(f), cfg.horizon, cfg.steps_per_delay)?;
                same &= matches!(find_cycle(&other, cfg.transient_fraction)?,
                    Some(o) if (o.amplitude - cyc.amplitude).abs() <= T::lit(0.01) * cyc.amplitude);
            }
            row.inner_attracting = Some(same);
            if !same {
                row.flags.push("perturbed histories settle elsewhere".into());
            }
        }
        None => row.flags.push("inner cycle not detected".into()),
    }

    if let Some(inner_amp) = row.inner_amp {
        let guess = row.predicted_outer.unwrap_or(inner_amp * two);
        let mut hi = (guess * two).max(inner_amp * two);
        let cutoff = T::lit(DIVERGENCE_CUTOFF);
        while hi < cutoff && !escapes(&params, hi, cfg)? {
            hi = hi * two;
        }
        match basin_bisection(&params, start, hi.min(cutoff), cfg) {
            Ok(b) => {
                row.outer_amp = Some(b);
                row.outer_stability = Some(Stability::RepellingEstimated);
                if !(b > inner_amp) {
                    row.flags.push("basin boundary not outside the inner cycle".into());
                }
            }
            Err(e) => row.flags.push(format!("outer cycle not bracketed: {e}")),
        }
    }
    Ok(row)
}

/// Which side of the Bautin candidate the scan walks.
fn scan_direction<T: Real>(c_star: T) -> Result<T> {
    let h = T::lit(1e-3);
    let up = l1_from_cascade(c_star + h)?;
    let down = l1_from_cascade(c_star - h)?;
    if up < T::zero() {
        Ok(T::one())
    } else if down < T::zero() {
        Ok(-T::one())
    } else {
        Err(Error::EmptyRegion(format!("l1 is not negative on either side of c = {c_star}")))
    }
}

/// Rows of the nested-cycle search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec<T> {
    pub rows: usize,
    /// Width of the c-range walked away from the candidate.
    pub c_span: T,
    /// `μ` as a fraction of the fold value `l1²/(4·l2)`.
    pub mu_fraction: T,
}

impl<T: Real> Default for ScanSpec<T> {
    fn default() -> Self {
        Self {
            rows: 4,
            c_span: T::lit(0.2),
            mu_fraction: T::lit(0.5),
        }
    }
}

/// Horizon long enough for the inner cycle to settle to well under a percent.
fn settle_horizon<T: Real>(mu: T, l1: T, l2: T, floor: T) -> T {
    let Ok(rad) = cycle_radii(mu, l1, l2) else {
        return floor;
    };
    let u = rad.inner * rad.inner;
    let rate = (T::lit(2.0) * u * (l1 + T::lit(2.0) * l2 * u)).abs();
    (T::lit(10.0) / rate).max(floor).min(T::lit(60_000.0))
}

/// Walks `rows` values of `c` away from `c_star` (toward `l1 < 0`), choosing
/// `a` so that `μ = mu_fraction·l1²/(4·l2)`, and detects both cycles per row.
/// Rows run in parallel; failures are flagged in the row.
pub fn two_cycle_scan<T: Real>(c_star: T, spec: &ScanSpec<T>, cfg: &SimConfig<T>) -> Result<Vec<ScanRow<T>>> {
    if spec.rows == 0 {
        return Err(Error::EmptyRegion("zero rows requested".into()));
    }
    if !(spec.mu_fraction > T::zero() && spec.mu_fraction < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "mu fraction must lie in (0, 1), got {}",
            spec.mu_fraction
        )));
    }
    let dir = scan_direction(c_star)?;
    let r = T::FRAC_PI_2();
    let mut points = Vec::with_capacity(spec.rows);
    for k in 1..=spec.rows {
        let c = c_star + dir * spec.c_span * T::lit(k as f64 / spec.rows as f64);
        let l1 = l1_from_cascade(c)?;
        let l2 = l2_at(c)?;
        if !(l1 < T::zero() && l2 > T::zero()) {
            continue;
        }
        let mu = spec.mu_fraction * fold_mu(l1, l2);
        points.push((c, l1, l2, mu, a_for_mu(mu, r)?));
    }
    if points.is_empty() {
        return Err(Error::EmptyRegion(format!("no c near {c_star} with l1 < 0 < l2")));
    }
    points
        .into_par_iter()
        .map(|(c, l1, l2, mu, a)| {
            let local = SimConfig {
                horizon: settle_horizon(mu, l1, l2, cfg.horizon),
                ..*cfg
            };
            scan_point(a, c, l1, l2, &local)
        })
        .collect()
}
