//! Topological chirality number of the `m̂` texture.
//!
//! Two independent evaluations of the winding integral
//! `N = (1/4π) ∬ m̂ · (∂ₓm̂ × ∂ᵧm̂) dk_x dk_y`:
//!
//! * [`chern_quadrature`]: central finite differences of `m̂` and the
//!   trapezoid rule on the mesh, with the truncated tail recovered from the
//!   boundary line integral `∮ (1 − m̂_z) dφ`.
//! * [`chern_plaquette`]: exact signed solid angles of the spherical
//!   triangles spanned by `m̂` on each plaquette, closed off by a fan of
//!   triangles from the north pole (the image of `|k| → ∞`).
//!
//! Orientation: the reported number is normalized so that `χ = +1` with a
//! Fermi surface gives `N = +1`. Taken literally, the integrand above is
//! negative for `χ = +1` (the texture starts at the south pole at `k = 0`), so
//! both methods report `−(1/4π)·∬…`.
//!
//! Mesh nodes sit at `−k_max + (i + ½)h` with `h = 2k_max/n`, which keeps
//! every node off `k = 0` for even `n`.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::kspace::{m_hat, GapParams, KspaceError, Momentum};

/// Largest accepted `|raw − round(raw)|`.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;
/// Smallest accepted mesh.
pub const MIN_GRID: usize = 32;
/// Corners closer than this to antipodal make a plaquette degenerate.
pub const ANTIPODAL_TOLERANCE: f64 = 1e-9;

/// Overall sign mapping the literal integrand to the reported `N`.
const ORIENTATION: f64 = -1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChiralityError {
    #[error("texture is gapless (delta = {delta}, mu = {mu}); the chirality number is undefined")]
    GaplessTexture { delta: f64, mu: f64 },
    #[error("not converged: raw = {raw}, residual = {residual} at n_grid = {grid_size}")]
    NotConverged { raw: f64, residual: f64, grid_size: usize },
    #[error("antipodal corner vectors in plaquette ({i}, {j}); refine the grid")]
    DegeneratePlaquette { i: usize, j: usize },
    #[error("k_max = {k_max} must exceed {min_k_max}")]
    CutoffTooSmall { k_max: f64, min_k_max: f64 },
    #[error("n_grid = {0} must be an even number >= 32")]
    GridTooSmall(usize),
    #[error("methods disagree: quadrature N = {quadrature}, plaquette N = {plaquette}")]
    MethodDisagreement { quadrature: i64, plaquette: i64 },
    #[error(transparent)]
    Texture(#[from] KspaceError),
}

/// Which integration route produced a [`ChernResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChernMethod {
    Quadrature,
    Plaquette,
}

impl std::fmt::Display for ChernMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChernMethod::Quadrature => write!(f, "quadrature"),
            ChernMethod::Plaquette => write!(f, "plaquette"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChernResult {
    pub method: ChernMethod,
    pub n_integer: i64,
    /// Accumulated value before rounding, including the tail correction.
    pub raw: f64,
    /// `|raw − n_integer|`.
    pub residual: f64,
    /// Fraction of the sphere (in units of 4π) covered by the image of
    /// `|k| > k_max`, already folded into `raw`.
    pub cap_correction: f64,
    pub grid_size: usize,
    pub k_max: f64,
}

/// Default cutoff `8·max(√μ, Δ, 1)`.
pub fn default_k_max(params: &GapParams) -> f64 {
    8.0 * params.momentum_scale()
}

fn check_preconditions(params: &GapParams, k_max: f64, n_grid: usize) -> Result<(), ChiralityError> {
    if !params.is_gapped() {
        return Err(ChiralityError::GaplessTexture {
            delta: params.delta,
            mu: params.mu,
        });
    }
    if n_grid < MIN_GRID || !n_grid.is_multiple_of(2) {
        return Err(ChiralityError::GridTooSmall(n_grid));
    }
    let min_k_max = 3.0 * params.momentum_scale();
    if !(k_max > min_k_max) {
        return Err(ChiralityError::CutoffTooSmall { k_max, min_k_max });
    }
    Ok(())
}

fn finish(
    method: ChernMethod,
    integral: f64,
    tail: f64,
    grid_size: usize,
    k_max: f64,
) -> Result<ChernResult, ChiralityError> {
    let raw = ORIENTATION * (integral + tail) / (4.0 * PI);
    let n_integer = raw.round();
    let residual = (raw - n_integer).abs();
    if !(residual < CONVERGENCE_TOLERANCE) {
        return Err(ChiralityError::NotConverged {
            raw,
            residual,
            grid_size,
        });
    }
    Ok(ChernResult {
        method,
        n_integer: n_integer as i64,
        raw,
        residual,
        cap_correction: (tail / (4.0 * PI)).abs(),
        grid_size,
        k_max,
    })
}

#[inline]
fn node(i: usize, k_max: f64, h: f64) -> f64 {
    -k_max + (i as f64 + 0.5) * h
}

#[inline]
fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Boundary of the mesh square, traversed counter-clockwise, sampled with
/// `per_edge` segments per side.
fn boundary_loop(half: f64, per_edge: usize) -> Vec<Momentum> {
    let step = 2.0 * half / per_edge as f64;
    let mut pts = Vec::with_capacity(4 * per_edge);
    for s in 0..per_edge {
        pts.push(Momentum::new(-half + s as f64 * step, -half));
    }
    for s in 0..per_edge {
        pts.push(Momentum::new(half, -half + s as f64 * step));
    }
    for s in 0..per_edge {
        pts.push(Momentum::new(half - s as f64 * step, half));
    }
    for s in 0..per_edge {
        pts.push(Momentum::new(-half, half - s as f64 * step));
    }
    pts
}

/// Chirality number from finite-difference quadrature of the winding density.
pub fn chern_quadrature(params: &GapParams, k_max: f64, n_grid: usize) -> Result<ChernResult, ChiralityError> {
    check_preconditions(params, k_max, n_grid)?;
    let h = 2.0 * k_max / n_grid as f64;
    // Difference step well below the mesh spacing; rounding error stays ~1e-11.
    let eta = 1e-5 * h.min(1.0);

    let density = |k: Momentum| -> Result<f64, KspaceError> {
        let xp = m_hat(Momentum::new(k.kx + eta, k.ky), params)?;
        let xm = m_hat(Momentum::new(k.kx - eta, k.ky), params)?;
        let yp = m_hat(Momentum::new(k.kx, k.ky + eta), params)?;
        let ym = m_hat(Momentum::new(k.kx, k.ky - eta), params)?;
        let c = m_hat(k, params)?;
        let dx = [
            (xp[0] - xm[0]) / (2.0 * eta),
            (xp[1] - xm[1]) / (2.0 * eta),
            (xp[2] - xm[2]) / (2.0 * eta),
        ];
        let dy = [
            (yp[0] - ym[0]) / (2.0 * eta),
            (yp[1] - ym[1]) / (2.0 * eta),
            (yp[2] - ym[2]) / (2.0 * eta),
        ];
        Ok(dot(&c, &cross(&dx, &dy)))
    };

    let weight = |i: usize| if i == 0 || i == n_grid - 1 { 0.5 } else { 1.0 };

    // Row sums in parallel, reduced in a fixed order so the result is
    // independent of the thread count.
    let rows: Vec<f64> = (0..n_grid)
        .into_par_iter()
        .map(|j| -> Result<f64, KspaceError> {
            let ky = node(j, k_max, h);
            let mut acc = 0.0;
            for i in 0..n_grid {
                let kx = node(i, k_max, h);
                acc += weight(i) * density(Momentum::new(kx, ky))?;
            }
            Ok(weight(j) * acc)
        })
        .collect::<Result<_, _>>()?;
    let integral = rows.iter().sum::<f64>() * h * h;

    // The trapezoid rule above covers the square through the outermost nodes.
    // Everything outside it is recovered from the boundary gauge integral:
    // the winding form is d((1 − cos θ) dφ), regular at the north pole, so
    // the outer region contributes −∮_ccw (1 − m̂_z) dφ.
    let half = k_max - 0.5 * h;
    let tail = -boundary_gauge_integral(params, half, 16 * n_grid)?;

    finish(ChernMethod::Quadrature, integral, tail, n_grid, k_max)
}

/// `∮ (1 − m̂_z) dφ` along the counter-clockwise square boundary, midpoint rule.
fn boundary_gauge_integral(params: &GapParams, half: f64, per_edge: usize) -> Result<f64, KspaceError> {
    let pts = boundary_loop(half, per_edge);
    let mut total = 0.0;
    let mut prev = m_hat(pts[0], params)?;
    for idx in 0..pts.len() {
        let next_k = pts[(idx + 1) % pts.len()];
        let next = m_hat(next_k, params)?;
        let mid_k = Momentum::new(0.5 * (pts[idx].kx + next_k.kx), 0.5 * (pts[idx].ky + next_k.ky));
        let mid = m_hat(mid_k, params)?;
        let mut dphi = next[1].atan2(next[0]) - prev[1].atan2(prev[0]);
        if dphi > PI {
            dphi -= 2.0 * PI;
        } else if dphi < -PI {
            dphi += 2.0 * PI;
        }
        total += (1.0 - mid[2]) * dphi;
        prev = next;
    }
    Ok(total)
}

/// Signed solid angle of the spherical triangle `(a, b, c)` of unit vectors.
pub fn triangle_solid_angle(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let numerator = dot(a, &cross(b, c));
    let denominator = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * numerator.atan2(denominator)
}

fn nearly_antipodal(a: &[f64; 3], b: &[f64; 3]) -> bool {
    let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    dot(&s, &s).sqrt() < ANTIPODAL_TOLERANCE
}

/// Chirality number as the exact degree of the triangulated texture.
pub fn chern_plaquette(params: &GapParams, k_max: f64, n_grid: usize) -> Result<ChernResult, ChiralityError> {
    check_preconditions(params, k_max, n_grid)?;
    let h = 2.0 * k_max / n_grid as f64;

    // Texture on all nodes, row-major with j the ky index.
    let field: Vec<[f64; 3]> = (0..n_grid * n_grid)
        .into_par_iter()
        .map(|idx| {
            let (j, i) = (idx / n_grid, idx % n_grid);
            m_hat(Momentum::new(node(i, k_max, h), node(j, k_max, h)), params)
        })
        .collect::<Result<_, _>>()?;
    let at = |i: usize, j: usize| &field[j * n_grid + i];

    let rows: Vec<f64> = (0..n_grid - 1)
        .into_par_iter()
        .map(|j| -> Result<f64, ChiralityError> {
            let mut acc = 0.0;
            for i in 0..n_grid - 1 {
                // Counter-clockwise corners.
                let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
                if nearly_antipodal(a, b)
                    || nearly_antipodal(b, c)
                    || nearly_antipodal(c, d)
                    || nearly_antipodal(d, a)
                    || nearly_antipodal(a, c)
                {
                    return Err(ChiralityError::DegeneratePlaquette { i, j });
                }
                acc += triangle_solid_angle(a, b, c) + triangle_solid_angle(a, c, d);
            }
            Ok(acc)
        })
        .collect::<Result<_, _>>()?;
    let integral: f64 = rows.iter().sum();

    // Close the surface with a fan from the north pole over the outer boundary
    // of the node lattice. The outer region is bounded clockwise, so each fan
    // triangle is (ẑ, b_{s+1}, b_s) for a counter-clockwise boundary walk.
    let north = [0.0, 0.0, 1.0];
    let mut ring: Vec<&[f64; 3]> = Vec::with_capacity(4 * (n_grid - 1));
    let last = n_grid - 1;
    ring.extend((0..last).map(|i| at(i, 0)));
    ring.extend((0..last).map(|j| at(last, j)));
    ring.extend((0..last).map(|i| at(last - i, last)));
    ring.extend((0..last).map(|j| at(0, last - j)));
    let mut tail = 0.0;
    for s in 0..ring.len() {
        let (b0, b1) = (ring[s], ring[(s + 1) % ring.len()]);
        if nearly_antipodal(&north, b0) {
            return Err(ChiralityError::DegeneratePlaquette { i: s, j: n_grid });
        }
        tail += triangle_solid_angle(&north, b1, b0);
    }

    finish(ChernMethod::Plaquette, integral, tail, n_grid, k_max)
}

/// Both methods at a common, escalating resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct Agreement {
    pub n_integer: i64,
    pub quadrature: ChernResult,
    pub plaquette: ChernResult,
}

/// Mesh sizes tried by [`cross_validate`].
pub const ESCALATION: [usize; 6] = [128, 256, 512, 1024, 2048, 4096];

/// Runs both methods on doubling meshes until both converge, then requires
/// the two integers to agree.
pub fn cross_validate(params: &GapParams) -> Result<Agreement, ChiralityError> {
    cross_validate_with(params, default_k_max(params), &ESCALATION)
}

pub fn cross_validate_with(params: &GapParams, k_max: f64, grids: &[usize]) -> Result<Agreement, ChiralityError> {
    let mut last_err = None;
    for &n in grids {
        let plaquette = match chern_plaquette(params, k_max, n) {
            Ok(r) => r,
            Err(e @ (ChiralityError::NotConverged { .. } | ChiralityError::DegeneratePlaquette { .. })) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let quadrature = match chern_quadrature(params, k_max, n) {
            Ok(r) => r,
            Err(e @ ChiralityError::NotConverged { .. }) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        if quadrature.n_integer != plaquette.n_integer {
            return Err(ChiralityError::MethodDisagreement {
                quadrature: quadrature.n_integer,
                plaquette: plaquette.n_integer,
            });
        }
        return Ok(Agreement {
            n_integer: plaquette.n_integer,
            quadrature,
            plaquette,
        });
    }
    Err(last_err.unwrap_or(ChiralityError::GridTooSmall(0)))
}
