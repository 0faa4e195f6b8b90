//! Chiral p-wave order parameter and its unit-vector texture in momentum space.
//!
//! Units: `ħ = 1` and `2m = 1`, so the band is `ε_k = k² − μ` and `k_F = √μ`.
//! The Γ5⁻ gap is `d_z = Δ·(k_x + iχk_y)/k_F`. For `μ ≤ 0` there is no Fermi
//! surface and the texture uses the unnormalized `Δ·(k_x + iχk_y)`; the
//! chirality number only depends on the degree of the texture, so dropping a
//! positive rescaling of the in-plane part changes nothing.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KspaceError {
    #[error("chemical potential must be positive for the k_F normalization (mu = {0})")]
    NonpositiveMu(f64),
    #[error("texture vanishes at k = ({kx}, {ky})")]
    ZeroTexture { kx: f64, ky: f64 },
    #[error("invalid gap parameters: {0}")]
    InvalidParams(String),
}

/// Chirality label `χ = ±1`. Doubles as the qubit basis label `N = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Chirality {
    Minus,
    Plus,
}

impl Chirality {
    pub fn sign(self) -> i32 {
        match self {
            Chirality::Minus => -1,
            Chirality::Plus => 1,
        }
    }

    pub fn signum(self) -> f64 {
        self.sign() as f64
    }

    pub fn flipped(self) -> Chirality {
        match self {
            Chirality::Minus => Chirality::Plus,
            Chirality::Plus => Chirality::Minus,
        }
    }

    pub fn from_sign(sign: i32) -> Option<Chirality> {
        match sign {
            1 => Some(Chirality::Plus),
            -1 => Some(Chirality::Minus),
            _ => None,
        }
    }
}

impl std::fmt::Display for Chirality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Chirality::Minus => write!(f, "-1"),
            Chirality::Plus => write!(f, "+1"),
        }
    }
}

/// A point `(k_x, k_y)` in the 2D momentum plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Momentum {
    pub kx: f64,
    pub ky: f64,
}

impl Momentum {
    pub const fn new(kx: f64, ky: f64) -> Self {
        Momentum { kx, ky }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.kx * self.kx + self.ky * self.ky
    }
}

/// Γ5⁻ order-parameter parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapParams {
    pub delta: f64,
    pub mu: f64,
    pub chi: Chirality,
}

impl GapParams {
    pub fn new(delta: f64, mu: f64, chi: Chirality) -> Result<Self, KspaceError> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(KspaceError::InvalidParams(format!(
                "delta must be finite and >= 0, got {delta}"
            )));
        }
        if !mu.is_finite() {
            return Err(KspaceError::InvalidParams(format!("mu must be finite, got {mu}")));
        }
        Ok(GapParams { delta, mu, chi })
    }

    /// `k_F = √μ`, or `None` without a Fermi surface.
    pub fn fermi_momentum(&self) -> Option<f64> {
        (self.mu > 0.0).then(|| self.mu.sqrt())
    }

    /// True when `|m(k)| > 0` everywhere.
    pub fn is_gapped(&self) -> bool {
        self.mu < 0.0 || (self.mu > 0.0 && self.delta > 0.0)
    }

    /// Natural momentum scale `max(√max(μ,0), Δ, 1)`.
    pub fn momentum_scale(&self) -> f64 {
        self.mu.max(0.0).sqrt().max(self.delta).max(1.0)
    }
}

/// Normalized gap amplitude `Δ·(k_x + iχk_y)/k_F`. Requires `μ > 0`.
pub fn d_z(k: Momentum, params: &GapParams) -> Result<Complex64, KspaceError> {
    let kf = params.fermi_momentum().ok_or(KspaceError::NonpositiveMu(params.mu))?;
    Ok(Complex64::new(k.kx, params.chi.signum() * k.ky) * (params.delta / kf))
}

/// Gap amplitude used for the texture: normalized when `μ > 0`, otherwise
/// `Δ·(k_x + iχk_y)`.
pub fn texture_gap(k: Momentum, params: &GapParams) -> Complex64 {
    let scale = match params.fermi_momentum() {
        Some(kf) => params.delta / kf,
        None => params.delta,
    };
    Complex64::new(k.kx, params.chi.signum() * k.ky) * scale
}

/// `ε_k = k² − μ`.
pub fn dispersion(k: Momentum, params: &GapParams) -> f64 {
    k.norm_sqr() - params.mu
}

/// `m = (Re d_z, Im d_z, ε_k)` before normalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MVector {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

impl MVector {
    pub fn norm(&self) -> f64 {
        (self.mx * self.mx + self.my * self.my + self.mz * self.mz).sqrt()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.mx, self.my, self.mz]
    }
}

pub fn m_vector(k: Momentum, params: &GapParams) -> MVector {
    let d = texture_gap(k, params);
    MVector {
        mx: d.re,
        my: d.im,
        mz: dispersion(k, params),
    }
}

/// Unit texture `m̂ = m/|m|`.
pub fn m_hat(k: Momentum, params: &GapParams) -> Result<[f64; 3], KspaceError> {
    let m = m_vector(k, params);
    let n = m.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(KspaceError::ZeroTexture { kx: k.kx, ky: k.ky });
    }
    Ok([m.mx / n, m.my / n, m.mz / n])
}
