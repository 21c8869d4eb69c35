//! Fixed-step RK4 integration of `θ̇ = ω − B𝒜 sin(Bᵀθ)`.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sync_tests::OscillatorSystem;
use crate::torus::PhaseState;

/// Bound on `dt·(‖ω‖_∞ + 2·max weighted degree)`.
pub const STEP_GUARD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record every `stride`-th step (the initial and final states are
    /// always recorded).
    pub stride: usize,
}

impl SimConfig {
    /// `dt = 1e−3 / max(1, ‖ω‖_∞)`, `t_end = 100`.
    pub fn default_for(sys: &OscillatorSystem) -> Self {
        let wmax = sys.omega_raw().amax();
        SimConfig {
            dt: 1e-3 / wmax.max(1.0),
            t_end: 100.0,
            stride: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Wrapped to `[0, 2π)`.
    pub states: Vec<PhaseState>,
    /// `θ̇` at each sample.
    pub freq: Vec<Vec<f64>>,
    /// Mean natural frequency, the frequency a synchronized network rotates at.
    pub omega_syn: f64,
    #[serde(skip)]
    unwrapped: Vec<DVector<f64>>,
}

impl Trajectory {
    /// Angles without wrapping, continuous in time.
    pub fn unwrapped(&self) -> &[DVector<f64>] {
        &self.unwrapped
    }

    pub fn final_state(&self) -> &PhaseState {
        self.states.last().expect("a trajectory has at least one sample")
    }

    pub fn final_unwrapped(&self) -> &DVector<f64> {
        self.unwrapped.last().expect("a trajectory has at least one sample")
    }

    pub fn span(&self) -> f64 {
        self.times.last().unwrap_or(&0.0) - self.times.first().unwrap_or(&0.0)
    }
}

/// Right-hand side `ω − B𝒜 sin(Bᵀθ)` with the raw (non-centered) frequencies.
pub fn vector_field(sys: &OscillatorSystem, omega_raw: &DVector<f64>, theta: &DVector<f64>) -> DVector<f64> {
    let g = sys.graph();
    let sines: Vec<f64> = g
        .edge_differences(theta.as_slice())
        .iter()
        .map(|d| d.sin())
        .collect();
    omega_raw - g.weighted_divergence(&sines)
}

/// Integrates from `theta0`. The state is carried unwrapped so that winding
/// is not lost; samples are stored both wrapped and unwrapped.
pub fn simulate(sys: &OscillatorSystem, theta0: &[f64], config: &SimConfig) -> Result<Trajectory> {
    let n = sys.n();
    if theta0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: theta0.len(),
        });
    }
    if !(config.dt > 0.0) || !config.dt.is_finite() {
        return Err(Error::ConfigInvalid(format!("dt must be positive, got {}", config.dt)));
    }
    if !(config.t_end >= 0.0) || config.stride == 0 {
        return Err(Error::ConfigInvalid("t_end must be >= 0 and stride >= 1".into()));
    }
    let omega_raw = sys.omega_raw();
    let rate = omega_raw.amax() + 2.0 * sys.graph().max_weighted_degree();
    if config.dt * rate > STEP_GUARD {
        return Err(Error::StepTooLarge {
            dt: config.dt,
            bound: STEP_GUARD / rate,
        });
    }
    let steps = (config.t_end / config.dt).round() as usize;
    let dt = config.dt;
    let f = |x: &DVector<f64>| vector_field(sys, &omega_raw, x);

    let mut x = DVector::from_column_slice(theta0);
    let capacity = steps / config.stride + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        freq: Vec::with_capacity(capacity),
        omega_syn: sys.omega_syn(),
        unwrapped: Vec::with_capacity(capacity),
    };
    let record = |t: f64, x: &DVector<f64>, traj: &mut Trajectory| {
        traj.times.push(t);
        traj.states.push(PhaseState::new(x.iter().copied().collect()));
        traj.freq.push(f(x).iter().copied().collect());
        traj.unwrapped.push(x.clone());
    };
    record(0.0, &x, &mut traj);
    for step in 1..=steps {
        let k1 = f(&x);
        let k2 = f(&(&x + &k1 * (0.5 * dt)));
        let k3 = f(&(&x + &k2 * (0.5 * dt)));
        let k4 = f(&(&x + &k3 * dt));
        x += (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
        if step % config.stride == 0 || step == steps {
            record(step as f64 * dt, &x, &mut traj);
        }
    }
    Ok(traj)
}

/// Frequency synchronization over the final `window` time units:
/// `max_i |θ̇_i − ω_syn| < tol` at every sample in the window.
pub fn detect_frequency_sync(traj: &Trajectory, window: f64, tol: f64) -> Result<(bool, f64)> {
    let span = traj.span();
    if window > span {
        return Err(Error::WindowTooLong { window, span });
    }
    let t_last = *traj.times.last().expect("nonempty trajectory");
    let synced = traj
        .times
        .iter()
        .zip(&traj.freq)
        .filter(|(t, _)| **t >= t_last - window)
        .all(|(_, f)| f.iter().all(|v| (v - traj.omega_syn).abs() < tol));
    Ok((synced, traj.omega_syn))
}
