//! Two-level tunneling dynamics in the chirality basis `{|−1⟩, |+1⟩}`.
//!
//! Hamiltonian `H = E0·I − δ·σx + ε·σz`, with `σz|±1⟩ = ±|±1⟩`. The
//! environment is reduced to pure dephasing with jump operator `σz` at rate
//! `γ`:
//!
//! ```text
//! dρ/dt = −i[H, ρ] + γ (σz ρ σz − ρ)
//! ```
//!
//! Coherences decay at `2γ`. The bath does not renormalize `δ`.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{pauli_propagator, Mat2, ONE, ZERO};

/// Tolerance on the state normalization.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Largest allowed `dt · max(‖H‖, γ)`.
pub const MAX_STEP_PRODUCT: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("time step too large: dt * rate = {product} >= {limit}")]
    StepTooLarge { product: f64, limit: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("density matrix is invalid: {0}")]
    InvalidDensity(String),
}

/// Parameters of the spin-boson Hamiltonian plus dephasing and RF drive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelParams {
    pub e0: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub drive_amp: f64,
    pub drive_freq: f64,
}

impl Default for TwoLevelParams {
    fn default() -> Self {
        TwoLevelParams {
            e0: 0.0,
            delta: 0.5,
            epsilon: 0.0,
            gamma: 0.0,
            drive_amp: 0.0,
            drive_freq: 0.0,
        }
    }
}

impl TwoLevelParams {
    /// Closed system with tunneling `delta` and bias `epsilon`.
    pub fn closed(e0: f64, delta: f64, epsilon: f64) -> Self {
        TwoLevelParams {
            e0,
            delta,
            epsilon,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let fields = [
            ("e0", self.e0),
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("gamma", self.gamma),
            ("drive_amp", self.drive_amp),
            ("drive_freq", self.drive_freq),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(DynamicsError::InvalidParams(format!("{name} must be finite")));
            }
        }
        for (name, v) in [
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("drive_amp", self.drive_amp),
            ("drive_freq", self.drive_freq),
        ] {
            if v < 0.0 {
                return Err(DynamicsError::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Half the level splitting, `Ω = √(δ² + ε²)`.
    pub fn half_splitting(&self) -> f64 {
        self.delta.hypot(self.epsilon)
    }

    /// Transition frequency `E2 − E1 = 2Ω`.
    pub fn resonance(&self) -> f64 {
        2.0 * self.half_splitting()
    }

    /// Static Hamiltonian as a matrix.
    pub fn hamiltonian(&self) -> Mat2 {
        Mat2::real(self.e0 - self.epsilon, -self.delta, -self.delta, self.e0 + self.epsilon)
    }

    /// Pauli vector of the static part, `(−δ, 0, ε)`.
    fn pauli(&self) -> [f64; 3] {
        [-self.delta, 0.0, self.epsilon]
    }

    fn check_step(&self, dt: f64, rate: f64) -> Result<(), DynamicsError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(DynamicsError::InvalidParams(format!("dt must be > 0, got {dt}")));
        }
        let product = dt * rate;
        if product >= MAX_STEP_PRODUCT {
            return Err(DynamicsError::StepTooLarge {
                product,
                limit: MAX_STEP_PRODUCT,
            });
        }
        Ok(())
    }
}

/// Pure state `amp_minus·|−1⟩ + amp_plus·|+1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    pub amp_minus: Complex64,
    pub amp_plus: Complex64,
}

impl QubitState {
    pub fn new(amp_minus: Complex64, amp_plus: Complex64) -> Result<Self, DynamicsError> {
        let s = QubitState { amp_minus, amp_plus };
        let n = s.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(DynamicsError::NotNormalized(n));
        }
        Ok(s)
    }

    pub fn minus() -> Self {
        QubitState {
            amp_minus: ONE,
            amp_plus: ZERO,
        }
    }

    pub fn plus() -> Self {
        QubitState {
            amp_minus: ZERO,
            amp_plus: ONE,
        }
    }

    /// `(|−1⟩ + |+1⟩)/√2`.
    pub fn symmetric() -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitState {
            amp_minus: a,
            amp_plus: a,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_minus.norm_sqr() + self.amp_plus.norm_sqr()
    }

    pub fn pop_plus(&self) -> f64 {
        self.amp_plus.norm_sqr()
    }

    pub fn pop_minus(&self) -> f64 {
        self.amp_minus.norm_sqr()
    }

    /// `P|+1⟩ − P|−1⟩`.
    pub fn p_diff(&self) -> f64 {
        self.pop_plus() - self.pop_minus()
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.amp_minus, self.amp_plus]
    }

    pub fn from_array(v: [Complex64; 2]) -> Self {
        QubitState {
            amp_minus: v[0],
            amp_plus: v[1],
        }
    }

    /// `U|ψ⟩` for a unitary `U`, rescaled to the input norm (to exactly 1 for
    /// normalized input) so that rounding does not accumulate over many steps.
    pub fn evolve_by(&self, u: &Mat2) -> Self {
        let out = Self::from_array(u.apply(self.as_array()));
        let mut before = self.norm_sqr();
        if (before - 1.0).abs() < 1e-9 {
            before = 1.0;
        }
        let after = out.norm_sqr();
        if after > 0.0 && before != after {
            let k = (before / after).sqrt();
            Self::from_array([out.amp_minus * k, out.amp_plus * k])
        } else {
            out
        }
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &QubitState) -> f64 {
        (self.amp_minus.conj() * other.amp_minus + self.amp_plus.conj() * other.amp_plus).norm_sqr()
    }
}

/// 2×2 density matrix in the chirality basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    pub rho: Mat2,
}

impl DensityMatrix {
    pub fn new(rho: Mat2) -> Result<Self, DynamicsError> {
        let d = DensityMatrix { rho };
        if (d.trace() - 1.0).abs() > 1e-12 {
            return Err(DynamicsError::InvalidDensity(format!("trace {}", d.trace())));
        }
        if d.hermiticity_error() > 1e-12 {
            return Err(DynamicsError::InvalidDensity("not Hermitian".into()));
        }
        if d.min_eigenvalue() < -1e-12 {
            return Err(DynamicsError::InvalidDensity("negative eigenvalue".into()));
        }
        Ok(d)
    }

    pub fn from_pure(state: &QubitState) -> Self {
        let v = state.as_array();
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = v[r] * v[c].conj();
            }
        }
        DensityMatrix { rho: Mat2(m) }
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    pub fn pop_plus(&self) -> f64 {
        self.rho.0[1][1].re
    }

    pub fn pop_minus(&self) -> f64 {
        self.rho.0[0][0].re
    }

    pub fn p_diff(&self) -> f64 {
        self.pop_plus() - self.pop_minus()
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.rho.max_abs_diff(&self.rho.dagger())
    }

    /// Smaller eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let (a0, a) = self.rho.hermitian_pauli();
        a0 - (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
    }

    fn conjugate(&self, u: &Mat2) -> Self {
        DensityMatrix {
            rho: *u * self.rho * u.dagger(),
        }
    }

    /// Exact solution of the dephasing channel over `t`: coherences shrink by
    /// `exp(−2γt)`.
    fn dephase(&self, gamma: f64, t: f64) -> Self {
        let f = (-2.0 * gamma * t).exp();
        let m = &self.rho.0;
        DensityMatrix {
            rho: Mat2::new(m[0][0], m[0][1] * f, m[1][0] * f, m[1][1]),
        }
    }
}

/// One energy level with its normalized eigenvector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub state: QubitState,
}

/// Ground and excited levels, `E0 ∓ √(δ² + ε²)`.
///
/// The ground state is `cos(α/2)|−1⟩ + sin(α/2)|+1⟩` with
/// `α = atan2(δ, ε)`. When `δ = ε = 0` this returns `|−1⟩` then `|+1⟩`.
pub fn eigensystem(params: &TwoLevelParams) -> [Level; 2] {
    let omega = params.half_splitting();
    let alpha = params.delta.atan2(params.epsilon);
    let (s, c) = (0.5 * alpha).sin_cos();
    let ground = QubitState {
        amp_minus: c.into(),
        amp_plus: s.into(),
    };
    let excited = QubitState {
        amp_minus: (-s).into(),
        amp_plus: c.into(),
    };
    [
        Level {
            energy: params.e0 - omega,
            state: ground,
        },
        Level {
            energy: params.e0 + omega,
            state: excited,
        },
    ]
}

/// `exp(−iHt)` of the static Hamiltonian.
pub fn closed_propagator(params: &TwoLevelParams, t: f64) -> Mat2 {
    pauli_propagator(params.e0, params.pauli(), t)
}

/// Closed-system evolution (ignores `gamma` and the drive).
pub fn evolve_closed(state: &QubitState, params: &TwoLevelParams, t: f64) -> QubitState {
    state.evolve_by(&closed_propagator(params, t))
}

/// `P(t) = P|+1⟩ − P|−1⟩` after starting in `|+1⟩`:
/// `1 − 2(δ²/Ω²)·sin²(Ωt)`, which is `cos(2δt)` at `ε = 0`.
pub fn beat_probability(params: &TwoLevelParams, t: f64) -> f64 {
    let omega = params.half_splitting();
    if omega == 0.0 {
        return 1.0;
    }
    let ratio = params.delta / omega;
    let s = (omega * t).sin();
    1.0 - 2.0 * ratio * ratio * s * s
}

/// Sample times `0, dt, 2dt, …` up to and including `t` (within rounding).
pub fn sample_times(t: f64, dt: f64) -> Vec<f64> {
    let steps = (t / dt + 1e-9).floor() as usize;
    (0..=steps).map(|k| k as f64 * dt).collect()
}

/// [`sample_times`], plus `t` itself when it is not on the `dt` grid.
pub fn step_times(t: f64, dt: f64) -> Vec<f64> {
    let mut times = sample_times(t, dt);
    let reached = *times.last().unwrap_or(&0.0);
    if t - reached > 1e-12 * t.abs().max(1.0) {
        times.push(t);
    }
    times
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

/// Dephasing master-equation trajectory sampled every `dt` on `[0, t]`.
///
/// Each step is a Strang split: half a unitary step, the exact dephasing
/// channel over `dt`, half a unitary step. All three maps are exact CPTP
/// maps, so trace, Hermiticity and positivity hold step by step and purity
/// never increases.
pub fn evolve_damped(
    rho: &DensityMatrix,
    params: &TwoLevelParams,
    t: f64,
    dt: f64,
) -> Result<Trajectory<DensityMatrix>, DynamicsError> {
    params.validate()?;
    params.check_step(dt, params.half_splitting().max(params.gamma))?;
    let half = closed_propagator(params, 0.5 * dt);
    let times = sample_times(t, dt);
    let mut states = Vec::with_capacity(times.len());
    let mut current = *rho;
    states.push(current);
    for _ in 1..times.len() {
        current = current.conjugate(&half).dephase(params.gamma, dt).conjugate(&half);
        states.push(current);
    }
    Ok(Trajectory { times, states })
}

/// One step of the driven Hamiltonian `E0 + εσz − δσx + A·cos(ωt)·σx` from
/// `t0` to `t0 + dt`, with the drive frozen at the step midpoint.
pub fn drive_step(params: &TwoLevelParams, t0: f64, dt: f64) -> Mat2 {
    let mid = t0 + 0.5 * dt;
    let field = params.drive_amp * (params.drive_freq * mid).cos();
    pauli_propagator(params.e0, [-params.delta + field, 0.0, params.epsilon], dt)
}

fn check_drive(params: &TwoLevelParams, dt: f64) -> Result<(), DynamicsError> {
    params.validate()?;
    if params.gamma != 0.0 {
        return Err(DynamicsError::InvalidParams(
            "driven evolution requires gamma = 0".into(),
        ));
    }
    params.check_step(dt, params.half_splitting() + params.drive_amp)
}

/// Net propagator of the driven qubit over `[0, t]` with step `dt`.
pub fn drive_propagator(params: &TwoLevelParams, t: f64, dt: f64) -> Result<Mat2, DynamicsError> {
    check_drive(params, dt)?;
    if params.drive_amp == 0.0 {
        return Ok(closed_propagator(params, t));
    }
    let times = step_times(t, dt);
    let mut u = Mat2::identity();
    for w in times.windows(2) {
        u = drive_step(params, w[0], w[1] - w[0]) * u;
    }
    Ok(u)
}

/// RF-driven closed evolution sampled every `dt` on `[0, t]`; the last sample
/// is at `t` even when `t` is off the grid.
///
/// With `drive_amp = 0` the samples are the analytic closed evolution.
pub fn drive_evolve(
    state: &QubitState,
    params: &TwoLevelParams,
    t: f64,
    dt: f64,
) -> Result<Trajectory<QubitState>, DynamicsError> {
    check_drive(params, dt)?;
    let times = step_times(t, dt);
    let states = if params.drive_amp == 0.0 {
        times.iter().map(|&s| evolve_closed(state, params, s)).collect()
    } else {
        let mut out = Vec::with_capacity(times.len());
        let mut current = *state;
        out.push(current);
        for w in times.windows(2) {
            current = current.evolve_by(&drive_step(params, w[0], w[1] - w[0]));
            out.push(current);
        }
        out
    };
    Ok(Trajectory { times, states })
}
