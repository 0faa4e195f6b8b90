//! Sizing estimates for a single-domain chirality qubit.
//!
//! The RF manipulation energy of the whole pair condensate must stay below
//! the gap, which caps the number of pairs at `Δ/ε` and, with one pair per
//! unit cell, caps the qubit volume.

use thiserror::Error;

/// Bohr magneton, eV/T (CODATA 2018).
pub const BOHR_MAGNETON_EV_PER_T: f64 = 5.788_381_806_0e-5;
/// Tesla per gauss.
pub const TESLA_PER_GAUSS: f64 = 1e-4;
/// Upper bound on the film thickness of a thin-film qubit, Å.
pub const MAX_FILM_THICKNESS_A: f64 = 1000.0;
/// Critical temperature reported for the ruthenate, K.
pub const CRITICAL_TEMPERATURE_K: f64 = 1.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviceError {
    #[error("invalid material parameter {name} = {value}")]
    InvalidMaterial { name: &'static str, value: f64 },
    #[error("{name} must be > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("no thin-film geometry: thickness {thickness_a} A must be in (0, {MAX_FILM_THICKNESS_A})")]
    GeometryInfeasible { thickness_a: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    /// Gap `Δ` in eV.
    pub gap_ev: f64,
    /// Effective pair mass over the electron mass.
    pub mass_ratio: f64,
    /// Unit-cell volume, Å³.
    pub cell_volume_a3: f64,
    /// London penetration depth, Å.
    pub lambda_l_a: f64,
    /// Film thickness, Å.
    pub film_thickness_a: f64,
}

impl Default for MaterialParams {
    /// Sr₂RuO₄ figures: `2Δ ≈ 1 meV`, `m ≈ 4mₑ`, 100 Å³ cell, `λ_L ≈ 2000 Å`,
    /// 100 Å film.
    fn default() -> Self {
        MaterialParams {
            gap_ev: 0.5e-3,
            mass_ratio: 4.0,
            cell_volume_a3: 100.0,
            lambda_l_a: 2000.0,
            film_thickness_a: 100.0,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        let fields = [
            ("gap_ev", self.gap_ev),
            ("mass_ratio", self.mass_ratio),
            ("cell_volume_a3", self.cell_volume_a3),
            ("lambda_l_a", self.lambda_l_a),
            ("film_thickness_a", self.film_thickness_a),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(DeviceError::InvalidMaterial { name, value });
            }
        }
        if self.film_thickness_a >= MAX_FILM_THICKNESS_A {
            return Err(DeviceError::InvalidMaterial {
                name: "film_thickness_a",
                value: self.film_thickness_a,
            });
        }
        Ok(())
    }
}

pub fn gauss_to_tesla(h_gauss: f64) -> f64 {
    h_gauss * TESLA_PER_GAUSS
}

pub fn tesla_to_gauss(h_tesla: f64) -> f64 {
    h_tesla / TESLA_PER_GAUSS
}

/// Pair Zeeman splitting `ε = (μ_B/(m*/mₑ))·H`, in eV.
pub fn zeeman_splitting(h_gauss: f64, params: &MaterialParams) -> Result<f64, DeviceError> {
    if !(h_gauss > 0.0) || !h_gauss.is_finite() {
        return Err(DeviceError::NonPositive {
            name: "h_gauss",
            value: h_gauss,
        });
    }
    if !(params.mass_ratio > 0.0) {
        return Err(DeviceError::InvalidMaterial {
            name: "mass_ratio",
            value: params.mass_ratio,
        });
    }
    Ok(BOHR_MAGNETON_EV_PER_T / params.mass_ratio * gauss_to_tesla(h_gauss))
}

/// Largest pair count `floor(Δ/ε)` whose summed splitting stays below the gap.
pub fn max_pair_number(params: &MaterialParams, eps_ev: f64) -> Result<u64, DeviceError> {
    if !(eps_ev > 0.0) || !eps_ev.is_finite() {
        return Err(DeviceError::NonPositive {
            name: "eps_ev",
            value: eps_ev,
        });
    }
    if !(params.gap_ev > 0.0) {
        return Err(DeviceError::InvalidMaterial {
            name: "gap_ev",
            value: params.gap_ev,
        });
    }
    let ratio = params.gap_ev / eps_ev;
    // Absorb quotient rounding so exact ratios such as 1e-3/1e-9 floor to 10⁶.
    Ok((ratio * (1.0 + 4.0 * f64::EPSILON)).floor() as u64)
}

/// Film geometry `(L, L, thickness)`, Å.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    pub lx_a: f64,
    pub ly_a: f64,
    pub lz_a: f64,
}

impl Geometry {
    pub fn max_dimension(&self) -> f64 {
        self.lx_a.max(self.ly_a).max(self.lz_a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub volume_a3: f64,
    pub geometry: Geometry,
    /// Every dimension is below the penetration depth.
    pub within_lambda: bool,
}

/// Qubit volume for `n_pairs` (one pair per unit cell) and a square film of
/// the configured thickness.
pub fn max_volume(params: &MaterialParams, n_pairs: u64) -> Result<VolumeEstimate, DeviceError> {
    if n_pairs == 0 {
        return Err(DeviceError::NonPositive {
            name: "n_pairs",
            value: 0.0,
        });
    }
    let thickness = params.film_thickness_a;
    if !(thickness > 0.0) || !thickness.is_finite() || thickness >= MAX_FILM_THICKNESS_A {
        return Err(DeviceError::GeometryInfeasible { thickness_a: thickness });
    }
    let volume_a3 = n_pairs as f64 * params.cell_volume_a3;
    let side = (volume_a3 / thickness).sqrt();
    let geometry = Geometry {
        lx_a: side,
        ly_a: side,
        lz_a: thickness,
    };
    Ok(VolumeEstimate {
        volume_a3,
        geometry,
        within_lambda: geometry.max_dimension() < params.lambda_l_a,
    })
}

/// Complete estimate for one field value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviceReport {
    pub h_gauss: f64,
    pub eps_ev: f64,
    pub n_pairs: u64,
    pub volume: VolumeEstimate,
}

pub fn estimate(h_gauss: f64, params: &MaterialParams) -> Result<DeviceReport, DeviceError> {
    params.validate()?;
    let eps_ev = zeeman_splitting(h_gauss, params)?;
    let n_pairs = max_pair_number(params, eps_ev)?;
    let volume = max_volume(params, n_pairs.max(1))?;
    Ok(DeviceReport {
        h_gauss,
        eps_ev,
        n_pairs,
        volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeeman_examples() {
        let p = MaterialParams::default();
        let e1 = zeeman_splitting(1.0, &p).unwrap();
        assert!((e1 - 1.447_095_451_5e-9).abs() < 1e-18, "{e1}");
        let e_half = zeeman_splitting(0.5, &p).unwrap();
        assert!((e_half - 0.5 * e1).abs() <= 1e-12 * e1);
        let bare = MaterialParams { mass_ratio: 1.0, ..p };
        let e = zeeman_splitting(1.0, &bare).unwrap();
        assert!((e - 5.788_381_806e-9).abs() < 1e-18);
        assert!(zeeman_splitting(0.0, &p).is_err());
        assert!(zeeman_splitting(-1.0, &p).is_err());
    }

    #[test]
    fn pair_number_examples() {
        let p = MaterialParams::default();
        let n = max_pair_number(&p, 1.45e-9).unwrap();
        assert_eq!(n, 344_827);
        let unit = MaterialParams { gap_ev: 2e-4, ..p };
        assert_eq!(max_pair_number(&unit, 2e-4).unwrap(), 1);
        let full_gap = MaterialParams { gap_ev: 1e-3, ..p };
        assert_eq!(max_pair_number(&full_gap, 1e-9).unwrap(), 1_000_000);
        assert!(max_pair_number(&p, 0.0).is_err());
    }

    #[test]
    fn volume_examples() {
        let p = MaterialParams::default();
        let v = max_volume(&p, 1_000_000).unwrap();
        assert_eq!(v.volume_a3, 1e8);
        assert!((v.geometry.lx_a - 1000.0).abs() < 1e-9);
        assert_eq!(v.geometry.lz_a, 100.0);
        assert!(v.within_lambda);
        assert_eq!(max_volume(&p, 1).unwrap().volume_a3, 100.0);
        let thick = MaterialParams {
            film_thickness_a: 1500.0,
            ..p
        };
        assert!(matches!(
            max_volume(&thick, 10),
            Err(DeviceError::GeometryInfeasible { .. })
        ));
        assert!(max_volume(&p, 0).is_err());
    }

    #[test]
    fn large_condensate_exceeds_penetration_depth() {
        let p = MaterialParams::default();
        let v = max_volume(&p, 10_000_000).unwrap();
        assert!(!v.within_lambda);
    }

    #[test]
    fn monotone_in_splitting() {
        let p = MaterialParams::default();
        let mut prev = u64::MAX;
        for k in 1..2000 {
            let n = max_pair_number(&p, k as f64 * 1e-10).unwrap();
            assert!(n <= prev);
            prev = n;
        }
    }

    #[test]
    fn gauss_tesla_round_trip() {
        for h in [1e-3, 0.5, 1.0, 7.3, 1e4] {
            assert!((tesla_to_gauss(gauss_to_tesla(h)) - h).abs() <= 1e-15 * h);
        }
    }

    #[test]
    fn material_validation() {
        assert!(MaterialParams::default().validate().is_ok());
        let bad = MaterialParams {
            film_thickness_a: 1000.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = MaterialParams {
            gap_ev: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
