//! Linear chains of chirality qubits.
//!
//! A register of `n` qubits is a dense vector over the product basis. Bit `q`
//! of a basis index is 1 when qubit `q` is in `|+1⟩`, so index 0 is the
//! all-`|−1⟩` state. Neighbouring qubits are joined by weak links that are
//! either on or off; while a link is on, a current pulse of area `θ` applies
//! the isotropic exchange `exp(−iθ·σ⃗ᵢ·σ⃗ⱼ/4)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dynamics::{drive_propagator, DensityMatrix, DynamicsError, TwoLevelParams};
use crate::kspace::Chirality;
use crate::linalg::{Mat2, I, ZERO};

pub const MAX_QUBITS: usize = 12;
/// Allowed deviation of `U†U` from the identity for a gate.
pub const UNITARY_TOLERANCE: f64 = 1e-10;
/// Allowed deviation of the state norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Minimum bias separation, in units of the drive amplitude, for selective
/// RF addressing.
pub const ADDRESSING_MARGIN: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegisterError {
    #[error("gate is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("weak link {i}-{j} is off")]
    LinkOff { i: usize, j: usize },
    #[error("qubits {i} and {j} are not neighbours in the chain")]
    NotAdjacent { i: usize, j: usize },
    #[error("no link between qubits {i} and {j}")]
    MissingLink { i: usize, j: usize },
    #[error("register size {0} outside 1..={MAX_QUBITS}")]
    InvalidSize(usize),
    #[error("amplitude vector has length {len}, expected {expected}")]
    WrongLength { len: usize, expected: usize },
    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("biases {a} and {b} are closer than {margin} x drive amplitude {amp}")]
    InsufficientGradient { a: f64, b: f64, amp: f64, margin: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Switchable weak link between two neighbouring qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingLink {
    pub i: usize,
    pub j: usize,
    pub on: bool,
    pub strength: f64,
}

impl CouplingLink {
    pub fn new(i: usize, j: usize, strength: f64) -> Result<Self, RegisterError> {
        if i.abs_diff(j) != 1 {
            return Err(RegisterError::NotAdjacent { i, j });
        }
        if !(strength > 0.0) || !strength.is_finite() {
            return Err(RegisterError::InvalidParameter(format!(
                "link strength must be > 0, got {strength}"
            )));
        }
        Ok(CouplingLink {
            i,
            j,
            on: false,
            strength,
        })
    }

    pub fn switched(self, on: bool) -> Self {
        CouplingLink { on, ..self }
    }

    pub fn connects(&self, a: usize, b: usize) -> bool {
        (self.i == a && self.j == b) || (self.i == b && self.j == a)
    }

    /// Time the link must stay on to accumulate `pulse_area` at its strength.
    pub fn pulse_duration(&self, pulse_area: f64) -> f64 {
        pulse_area / self.strength
    }
}

/// Per-qubit bias `ε_i`, set by a field gradient along the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldProfile {
    pub eps: Vec<f64>,
}

impl FieldProfile {
    pub fn new(eps: Vec<f64>) -> Result<Self, RegisterError> {
        if let Some(bad) = eps.iter().find(|e| !e.is_finite()) {
            return Err(RegisterError::InvalidParameter(format!("bias {bad} is not finite")));
        }
        Ok(FieldProfile { eps })
    }

    /// `ε_i = base + step·i`.
    pub fn linear(n: usize, base: f64, step: f64) -> Self {
        FieldProfile {
            eps: (0..n).map(|i| base + step * i as f64).collect(),
        }
    }
}

/// Named single-qubit gates, in `(|−1⟩, |+1⟩)` storage order. `H` is
/// `(σx + σz)/√2` and sends `|+1⟩` to `(|−1⟩ + |+1⟩)/√2`. `S` and `T` are
/// phase gates relative to `|+1⟩`.
pub fn named_gate(name: &str) -> Option<Mat2> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let one = Complex64::new(1.0, 0.0);
    let gate = match name.to_ascii_uppercase().as_str() {
        "I" | "ID" => Mat2::identity(),
        "X" => Mat2::sigma_x(),
        "Y" => Mat2::sigma_y(),
        "Z" => Mat2::sigma_z(),
        "H" => Mat2::real(-r, r, r, r),
        "S" => Mat2::diag(I, one),
        "SDG" => Mat2::diag(-I, one),
        "T" => Mat2::diag(Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4), one),
        "TDG" => Mat2::diag(Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4), one),
        _ => return None,
    };
    Some(gate)
}

/// `exp(iφ·σz/2)`, a rotation about the chirality axis.
pub fn z_rotation(phi: f64) -> Mat2 {
    Mat2::diag(
        Complex64::from_polar(1.0, -0.5 * phi),
        Complex64::from_polar(1.0, 0.5 * phi),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegisterState {
    n: usize,
    amps: Vec<Complex64>,
}

impl RegisterState {
    /// All qubits in `|−1⟩`.
    pub fn new(n: usize) -> Result<Self, RegisterError> {
        check_size(n)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(RegisterState { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self, RegisterError> {
        check_size(n)?;
        if amps.len() != 1 << n {
            return Err(RegisterError::WrongLength {
                len: amps.len(),
                expected: 1 << n,
            });
        }
        let s = RegisterState { n, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(RegisterError::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Product basis state; `values[q]` is the chirality of qubit `q`.
    pub fn basis(values: &[Chirality]) -> Result<Self, RegisterError> {
        let n = values.len();
        let mut s = RegisterState::new(n)?;
        s.amps[0] = ZERO;
        s.amps[basis_index(values)] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Tensor product of single-qubit states `[a_minus, a_plus]`.
    pub fn product(factors: &[[Complex64; 2]]) -> Result<Self, RegisterError> {
        let n = factors.len();
        check_size(n)?;
        let amps = (0..1usize << n)
            .map(|idx| factors.iter().enumerate().map(|(q, f)| f[(idx >> q) & 1]).product())
            .collect();
        RegisterState::from_amplitudes(n, amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_index(&self, q: usize) -> Result<(), RegisterError> {
        if q >= self.n {
            return Err(RegisterError::IndexOutOfRange { index: q, n: self.n });
        }
        Ok(())
    }

    /// Probability that qubit `q` reads `+1`.
    pub fn prob_plus(&self, q: usize) -> Result<f64, RegisterError> {
        self.check_index(q)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| (idx >> q) & 1 == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Reduced density matrix of qubit `q`.
    pub fn reduced(&self, q: usize) -> Result<DensityMatrix, RegisterError> {
        self.check_index(q)?;
        let bit = 1usize << q;
        let mut m = [[ZERO; 2]; 2];
        for idx in (0..self.amps.len()).filter(|i| i & bit == 0) {
            let a = [self.amps[idx], self.amps[idx | bit]];
            for r in 0..2 {
                for c in 0..2 {
                    m[r][c] += a[r] * a[c].conj();
                }
            }
        }
        Ok(DensityMatrix { rho: Mat2(m) })
    }

    /// Von Neumann entropy (nats) of qubit `q`'s reduced state.
    pub fn entanglement_entropy(&self, q: usize) -> Result<f64, RegisterError> {
        let rho = self.reduced(q)?;
        let (a0, a) = rho.rho.hermitian_pauli();
        let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        Ok([a0 - r, a0 + r]
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum())
    }

    /// Apply a 2×2 unitary to qubit `q`.
    pub fn apply_single_gate(&self, q: usize, gate: &Mat2) -> Result<Self, RegisterError> {
        self.check_index(q)?;
        let err = gate.unitarity_error();
        if err > UNITARY_TOLERANCE {
            return Err(RegisterError::NotUnitary(err));
        }
        Ok(self.apply_unchecked(q, gate))
    }

    fn apply_unchecked(&self, q: usize, gate: &Mat2) -> Self {
        let bit = 1usize << q;
        let mut amps = self.amps.clone();
        for idx in (0..amps.len()).filter(|i| i & bit == 0) {
            let [lo, hi] = gate.apply([self.amps[idx], self.amps[idx | bit]]);
            amps[idx] = lo;
            amps[idx | bit] = hi;
        }
        RegisterState { n: self.n, amps }
    }

    fn check_link(&self, link: &CouplingLink) -> Result<(), RegisterError> {
        self.check_index(link.i)?;
        self.check_index(link.j)?;
        if link.i.abs_diff(link.j) != 1 {
            return Err(RegisterError::NotAdjacent { i: link.i, j: link.j });
        }
        if !link.on {
            return Err(RegisterError::LinkOff { i: link.i, j: link.j });
        }
        Ok(())
    }

    /// Exchange pulse `exp(−iθ·σ⃗ᵢ·σ⃗ⱼ/4)` through an open link.
    ///
    /// Since `σ⃗ᵢ·σ⃗ⱼ = 2·SWAP − 1`, this equals
    /// `e^{iθ/4}·(cos(θ/2) − i·sin(θ/2)·SWAP)`. `θ = π` swaps the two qubits
    /// and `θ = π/2` is the entangling square root of SWAP.
    pub fn exchange_pulse(&self, link: &CouplingLink, pulse_area: f64) -> Result<Self, RegisterError> {
        self.check_link(link)?;
        if !(pulse_area >= 0.0) || !pulse_area.is_finite() {
            return Err(RegisterError::InvalidParameter(format!(
                "pulse area must be >= 0, got {pulse_area}"
            )));
        }
        let global = Complex64::from_polar(1.0, 0.25 * pulse_area);
        let stay = global * (0.5 * pulse_area).cos();
        let swap = global * (-I) * (0.5 * pulse_area).sin();
        let (bi, bj) = (1usize << link.i, 1usize << link.j);
        let amps = (0..self.amps.len())
            .map(|idx| {
                let swapped = swap_bits(idx, bi, bj);
                stay * self.amps[idx] + swap * self.amps[swapped]
            })
            .collect();
        Ok(RegisterState { n: self.n, amps })
    }

    /// CNOT (control active on `|+1⟩`) built from two √SWAP pulses and
    /// single-qubit gates. The link must join `control` and `target` and be on.
    pub fn cnot_composed(&self, link: &CouplingLink, control: usize, target: usize) -> Result<Self, RegisterError> {
        self.check_index(control)?;
        self.check_index(target)?;
        if !link.connects(control, target) {
            return Err(RegisterError::MissingLink { i: control, j: target });
        }
        self.check_link(link)?;
        let mut s = self.clone();
        for step in cnot_sequence(control, target) {
            s = match step {
                CnotStep::Single(q, g) => s.apply_unchecked(q, &g),
                CnotStep::SqrtSwap => s.exchange_pulse(link, std::f64::consts::FRAC_PI_2)?,
            };
        }
        Ok(s)
    }

    /// Global RF pulse at the target's resonance `2|ε_target|`, all links off.
    ///
    /// With links off the Hamiltonian is a sum of single-qubit terms
    /// `ε_i·σz + A·cos(ωt)·σx`, so each qubit is propagated independently.
    pub fn selective_rf_pulse(
        &self,
        profile: &FieldProfile,
        target: usize,
        amp: f64,
        duration: f64,
        dt: f64,
    ) -> Result<Self, RegisterError> {
        self.check_index(target)?;
        if profile.eps.len() != self.n {
            return Err(RegisterError::InvalidParameter(format!(
                "field profile has {} entries for {} qubits",
                profile.eps.len(),
                self.n
            )));
        }
        if !(amp >= 0.0) || !amp.is_finite() || !(duration >= 0.0) || !duration.is_finite() {
            return Err(RegisterError::InvalidParameter(format!(
                "amp and duration must be finite and >= 0 (amp = {amp}, duration = {duration})"
            )));
        }
        for a in 0..self.n {
            for b in a + 1..self.n {
                let (ea, eb) = (profile.eps[a], profile.eps[b]);
                if (ea - eb).abs() < ADDRESSING_MARGIN * amp || ea == eb {
                    return Err(RegisterError::InsufficientGradient {
                        a: ea,
                        b: eb,
                        amp,
                        margin: ADDRESSING_MARGIN,
                    });
                }
            }
        }
        if amp == 0.0 {
            return Ok(self.clone());
        }
        let omega = 2.0 * profile.eps[target].abs();
        let mut s = self.clone();
        for (q, &eps) in profile.eps.iter().enumerate() {
            let params = TwoLevelParams {
                e0: 0.0,
                delta: 0.0,
                epsilon: eps,
                gamma: 0.0,
                drive_amp: amp,
                drive_freq: omega,
            };
            let u = drive_propagator(&params, duration, dt)?;
            s = s.apply_unchecked(q, &u);
        }
        Ok(s)
    }

    /// Reset qubit `q` to `value`: project and renormalize, or, when the
    /// projection is empty, move the other branch onto `value`.
    pub fn initialize_reset(&self, q: usize, value: Chirality) -> Result<Self, RegisterError> {
        self.check_index(q)?;
        let bit = 1usize << q;
        let want = matches!(value, Chirality::Plus);
        let weight: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| ((idx & bit) != 0) == want)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let mut amps = vec![ZERO; self.amps.len()];
        if weight > 0.0 {
            let scale = 1.0 / weight.sqrt();
            for (idx, a) in self.amps.iter().enumerate() {
                if ((idx & bit) != 0) == want {
                    amps[idx] = a * scale;
                }
            }
        } else {
            for (idx, a) in self.amps.iter().enumerate() {
                amps[idx ^ bit] = *a;
            }
        }
        Ok(RegisterState { n: self.n, amps })
    }

    /// Projective measurement of qubit `q` in the chirality basis.
    pub fn measure<R: Rng + ?Sized>(&self, q: usize, rng: &mut R) -> Result<(Chirality, Self), RegisterError> {
        let p_plus = self.prob_plus(q)?;
        let u: f64 = rng.gen();
        let outcome = if u < p_plus { Chirality::Plus } else { Chirality::Minus };
        Ok((outcome, self.initialize_reset(q, outcome)?))
    }

    /// [`measure`](Self::measure) with a fresh generator seeded by `seed`.
    pub fn measure_seeded(&self, q: usize, seed: u64) -> Result<(Chirality, Self), RegisterError> {
        self.measure(q, &mut measurement_rng(seed))
    }
}

/// The generator used for all measurement randomness.
pub fn measurement_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_size(n: usize) -> Result<(), RegisterError> {
    if n == 0 || n > MAX_QUBITS {
        return Err(RegisterError::InvalidSize(n));
    }
    Ok(())
}

pub fn basis_index(values: &[Chirality]) -> usize {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| matches!(v, Chirality::Plus))
        .map(|(q, _)| 1usize << q)
        .sum()
}

fn swap_bits(idx: usize, bi: usize, bj: usize) -> usize {
    let a = idx & bi != 0;
    let b = idx & bj != 0;
    if a == b {
        idx
    } else {
        idx ^ bi ^ bj
    }
}

/// One element of the exchange-based CNOT.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CnotStep {
    Single(usize, Mat2),
    SqrtSwap,
}

/// Time-ordered CNOT construction: a controlled phase from
/// `√SWAP · Rz_c(π) · √SWAP` followed by z-rotations, conjugated by `H` on
/// the target.
pub fn cnot_sequence(control: usize, target: usize) -> Vec<CnotStep> {
    use std::f64::consts::PI;
    let h = named_gate("H").expect("H is a named gate");
    vec![
        CnotStep::Single(target, h),
        CnotStep::SqrtSwap,
        CnotStep::Single(control, z_rotation(PI)),
        CnotStep::SqrtSwap,
        // Rz_c(π/2) from the controlled-phase identity, Rz_c(π) moves the
        // sign of the flipped block onto the control.
        CnotStep::Single(control, z_rotation(1.5 * PI)),
        CnotStep::Single(target, z_rotation(-0.5 * PI)),
        CnotStep::Single(target, h),
    ]
}

/// Hall voltage `V = N·v0` for a readout of chirality `N`.
pub fn hall_voltage(outcome: Chirality, v0: f64) -> f64 {
    outcome.signum() * v0
}

/// Mean Hall voltage `v0·P(t)` of a beating qubit prepared in `|+1⟩`.
pub fn expected_hall_trace(params: &TwoLevelParams, times: &[f64], v0: f64) -> Vec<f64> {
    times
        .iter()
        .map(|&t| v0 * crate::dynamics::beat_probability(params, t))
        .collect()
}
