//! The six scenario subcommands.

use std::f64::consts::PI;
use std::fmt::Write as _;

use chiral_qubit::chirality::{
    chern_plaquette, chern_quadrature, cross_validate_with, default_k_max, ChernResult, ChiralityError, ESCALATION,
};
use chiral_qubit::device::{estimate, DeviceError, MaterialParams};
use chiral_qubit::dynamics::{drive_evolve, evolve_damped, DensityMatrix, DynamicsError, QubitState, TwoLevelParams};
use chiral_qubit::register::{measurement_rng, FieldProfile, RegisterError};
use chiral_qubit::script::{self, ChainSetup, RunError};
use chiral_qubit::{Chirality, GapParams};

use crate::{CliError, ScenarioConfig};

/// Keys accepted by every subcommand.
const COMMON_KEYS: [&str; 2] = ["seed", "output_path"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Chern,
    Beat,
    Damp,
    Rabi,
    Chain,
    Device,
}

impl Subcommand {
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Subcommand::Chern => &["gap", "mu", "chi", "k_max", "n_grid", "method"],
            Subcommand::Beat => &["e0", "delta", "epsilon", "t_max", "dt"],
            Subcommand::Damp => &["e0", "delta", "epsilon", "gamma", "t_max", "dt"],
            Subcommand::Rabi => &["e0", "delta", "epsilon", "amp", "omega", "t_max", "dt"],
            Subcommand::Chain => &["script_path", "shots", "qubits", "field", "dt"],
            Subcommand::Device => &[
                "h_gauss",
                "gap_ev",
                "mass_ratio",
                "cell_volume_a3",
                "lambda_l_a",
                "film_thickness_a",
            ],
        }
    }

    /// Checks the config's keys, then runs.
    pub fn run(self, cfg: &ScenarioConfig) -> Result<String, CliError> {
        let allowed: Vec<&str> = self.keys().iter().copied().chain(COMMON_KEYS).collect();
        cfg.check_keys(&allowed)?;
        match self {
            Subcommand::Chern => run_chern(cfg),
            Subcommand::Beat => run_beat(cfg),
            Subcommand::Damp => run_damp(cfg),
            Subcommand::Rabi => run_rabi(cfg),
            Subcommand::Chain => run_chain(cfg),
            Subcommand::Device => run_device(cfg),
        }
    }
}

fn chirality_error(e: ChiralityError) -> CliError {
    match e {
        ChiralityError::GaplessTexture { .. } => CliError::Gapless(e.to_string()),
        ChiralityError::NotConverged { .. } => CliError::NotConverged(e.to_string()),
        ChiralityError::CutoffTooSmall { .. } | ChiralityError::GridTooSmall(_) | ChiralityError::Texture(_) => {
            CliError::Config(e.to_string())
        }
        _ => CliError::Runtime(e.to_string()),
    }
}

fn dynamics_error(e: DynamicsError) -> CliError {
    match e {
        DynamicsError::StepTooLarge { .. } => CliError::StepTooLarge(e.to_string()),
        DynamicsError::InvalidParams(_) => CliError::Config(e.to_string()),
        _ => CliError::Runtime(e.to_string()),
    }
}

fn signed(n: i64) -> String {
    if n > 0 {
        format!("+{n}")
    } else {
        n.to_string()
    }
}

fn chern_line(r: &ChernResult) -> String {
    format!(
        "method={} n_integer={} raw={} residual={:e} grid={} k_max={} cap_correction={}",
        r.method, r.n_integer, r.raw, r.residual, r.grid_size, r.k_max, r.cap_correction
    )
}

pub fn run_chern(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let delta = cfg.f64_or("gap", 1.0)?;
    let mu = cfg.f64_or("mu", 1.0)?;
    let chi = cfg.chirality_or("chi", Chirality::Plus)?;
    let params = GapParams::new(delta, mu, chi).map_err(|e| CliError::Config(e.to_string()))?;
    let k_max = cfg.f64_or("k_max", default_k_max(&params))?;
    let n_grid = cfg.usize_opt("n_grid")?;
    let method = cfg.raw("method").unwrap_or("cross");

    let mut out = String::new();
    match method {
        "plaquette" | "quadrature" => {
            let n = n_grid.unwrap_or(256);
            let r = if method == "plaquette" {
                chern_plaquette(&params, k_max, n)
            } else {
                chern_quadrature(&params, k_max, n)
            }
            .map_err(chirality_error)?;
            let _ = writeln!(out, "N = {}", signed(r.n_integer));
            let _ = writeln!(out, "{}", chern_line(&r));
        }
        "cross" => {
            let grids: Vec<usize> = match n_grid {
                Some(n) => vec![n],
                None => ESCALATION.to_vec(),
            };
            let a = cross_validate_with(&params, k_max, &grids).map_err(chirality_error)?;
            let _ = writeln!(out, "N = {}", signed(a.n_integer));
            let _ = writeln!(out, "{}", chern_line(&a.quadrature));
            let _ = writeln!(out, "{}", chern_line(&a.plaquette));
        }
        other => {
            return Err(CliError::Config(format!(
                "`method` must be cross, plaquette or quadrature, got `{other}`"
            )))
        }
    }
    Ok(out)
}

fn two_level(cfg: &ScenarioConfig, delta: f64, epsilon: f64) -> Result<TwoLevelParams, CliError> {
    let params = TwoLevelParams {
        e0: cfg.f64_or("e0", 0.0)?,
        delta: cfg.f64_or("delta", delta)?,
        epsilon: cfg.f64_or("epsilon", epsilon)?,
        gamma: cfg.f64_or("gamma", 0.0)?,
        ..Default::default()
    };
    params.validate().map_err(dynamics_error)?;
    Ok(params)
}

/// Default `dt` is `π/100`, shortened when a fast rate would otherwise
/// violate the step limit.
fn time_grid(cfg: &ScenarioConfig, rate: f64, default_t: f64) -> Result<(f64, f64), CliError> {
    let t_max = cfg.f64_or("t_max", default_t)?;
    let dt = match cfg.f64_opt("dt")? {
        Some(dt) => dt,
        None if rate > 0.0 => (PI / 100.0).min(0.05 / rate),
        None => PI / 100.0,
    };
    if !(t_max >= 0.0) {
        return Err(CliError::Config(format!("`t_max` must be >= 0, got {t_max}")));
    }
    if !(dt > 0.0) {
        return Err(CliError::Config(format!("`dt` must be > 0, got {dt}")));
    }
    Ok((t_max, dt))
}

fn pure_csv<'a>(rows: impl Iterator<Item = (f64, &'a QubitState)>) -> String {
    let mut out = String::from("t,p_diff,pop_plus,pop_minus\n");
    for (t, s) in rows {
        let _ = writeln!(out, "{},{},{},{}", t, s.p_diff(), s.pop_plus(), s.pop_minus());
    }
    out
}

pub fn run_beat(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let params = two_level(cfg, 0.5, 0.0)?;
    let (t_max, dt) = time_grid(cfg, params.half_splitting(), 2.0 * PI)?;
    let traj = drive_evolve(&QubitState::plus(), &params, t_max, dt).map_err(dynamics_error)?;
    Ok(pure_csv(traj.iter()))
}

pub fn run_damp(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let mut params = two_level(cfg, 0.5, 0.0)?;
    if cfg.raw("gamma").is_none() {
        params.gamma = 0.1;
    }
    let (t_max, dt) = time_grid(cfg, params.half_splitting().max(params.gamma), 2.0 * PI)?;
    let rho = DensityMatrix::from_pure(&QubitState::plus());
    let traj = evolve_damped(&rho, &params, t_max, dt).map_err(dynamics_error)?;
    let mut out = String::from("t,p_diff,pop_plus,pop_minus,purity\n");
    for (t, r) in traj.iter() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            t,
            r.p_diff(),
            r.pop_plus(),
            r.pop_minus(),
            r.purity()
        );
    }
    Ok(out)
}

pub fn run_rabi(cfg: &ScenarioConfig) -> Result<String, CliError> {
    // Pure bias by default, so the drive is fully transverse.
    let mut params = two_level(cfg, 0.0, 1.0)?;
    params.drive_amp = cfg.f64_or("amp", 0.05)?;
    params.drive_freq = cfg.f64_or("omega", params.resonance())?;
    params.validate().map_err(dynamics_error)?;
    // One full cycle of the resonant transverse coupling by default.
    let omega = params.half_splitting();
    let transverse = if omega > 0.0 {
        params.drive_amp * params.epsilon.abs() / omega
    } else {
        0.0
    };
    let default_t = if transverse > 0.0 {
        2.0 * PI / transverse
    } else {
        2.0 * PI
    };
    let (t_max, dt) = time_grid(cfg, omega + params.drive_amp, default_t)?;
    let traj = drive_evolve(&QubitState::plus(), &params, t_max, dt).map_err(dynamics_error)?;
    Ok(pure_csv(traj.iter()))
}

fn run_error(e: RunError) -> CliError {
    match e.register_error() {
        Some(RegisterError::LinkOff { .. }) => CliError::LinkOff(e.to_string()),
        Some(_) => CliError::Runtime(e.to_string()),
        None => CliError::Config(e.to_string()),
    }
}

pub fn run_chain(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let text = match cfg.path("script_path") {
        Some(path) => std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read script {}: {e}", path.display())))?,
        None => String::new(),
    };
    let parsed = script::parse(&text).map_err(|e| CliError::ScriptParse(e.to_string()))?;
    let seed = cfg.u64_opt("seed")?.unwrap_or(0);
    let shots = cfg.usize_opt("shots")?.unwrap_or(1);
    if shots == 0 {
        return Err(CliError::Config("`shots` must be >= 1".into()));
    }
    let mut setup = ChainSetup {
        qubits: cfg.usize_opt("qubits")?,
        ..Default::default()
    };
    if let Some(eps) = cfg.f64_list("field")? {
        setup.field = Some(FieldProfile::new(eps).map_err(|e| CliError::Config(e.to_string()))?);
    }
    if let Some(dt) = cfg.f64_opt("dt")? {
        if !(dt > 0.0) {
            return Err(CliError::Config(format!("`dt` must be > 0, got {dt}")));
        }
        setup.rf_dt = dt;
    }
    let mut rng = measurement_rng(seed);
    if shots == 1 {
        let record = script::run_once(&parsed, &setup, &mut rng).map_err(run_error)?;
        Ok(script::format_shot(&record, seed))
    } else {
        let hist = script::run_shots(&parsed, &setup, shots, &mut rng).map_err(run_error)?;
        Ok(script::format_histogram(&hist, &parsed, seed))
    }
}

fn device_error(e: DeviceError) -> CliError {
    match e {
        DeviceError::GeometryInfeasible { .. } => CliError::Runtime(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

pub fn run_device(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let d = MaterialParams::default();
    let params = MaterialParams {
        gap_ev: cfg.f64_or("gap_ev", d.gap_ev)?,
        mass_ratio: cfg.f64_or("mass_ratio", d.mass_ratio)?,
        cell_volume_a3: cfg.f64_or("cell_volume_a3", d.cell_volume_a3)?,
        lambda_l_a: cfg.f64_or("lambda_l_a", d.lambda_l_a)?,
        film_thickness_a: cfg.f64_or("film_thickness_a", d.film_thickness_a)?,
    };
    let h = cfg.f64_or("h_gauss", 1.0)?;
    let r = estimate(h, &params).map_err(device_error)?;
    let g = r.volume.geometry;
    let mut out = String::new();
    let _ = writeln!(out, "# field H = {} G", r.h_gauss);
    let _ = writeln!(out, "# splitting eps = {:e} eV", r.eps_ev);
    let _ = writeln!(out, "# pairs n_s = {}", r.n_pairs);
    let _ = writeln!(out, "# volume V = {:e} A^3", r.volume.volume_a3);
    let _ = writeln!(out, "# geometry = {} x {} x {} A", g.lx_a, g.ly_a, g.lz_a);
    let _ = writeln!(
        out,
        "# all dimensions below lambda_L = {} A: {}",
        params.lambda_l_a,
        if r.volume.within_lambda { "yes" } else { "no" }
    );
    let _ = writeln!(out, "h_gauss,eps_ev,n_pairs,volume_a3,lx_a,ly_a,lz_a,within_lambda");
    let _ = writeln!(
        out,
        "{},{:e},{},{:e},{},{},{},{}",
        r.h_gauss, r.eps_ev, r.n_pairs, r.volume.volume_a3, g.lx_a, g.ly_a, g.lz_a, r.volume.within_lambda
    );
    Ok(out)
}
