//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use chiral_qubit::chirality::{chern_plaquette, cross_validate};
use chiral_qubit::device::{estimate, MaterialParams};
use chiral_qubit::dynamics::{eigensystem, evolve_closed, evolve_damped, DensityMatrix, QubitState, TwoLevelParams};
use chiral_qubit::register::{measurement_rng, CouplingLink, FieldProfile, RegisterState};
use chiral_qubit::script::{self, ChainSetup};
use chiral_qubit::Chirality::{self, Minus, Plus};
use chiral_qubit::GapParams;
use num_complex::Complex64;
use rustfft::FftPlanner;
use sha2::{Digest, Sha256};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn quantization() -> Outcome {
    let p = GapParams::new(1.0, 1.0, Plus).map_err(|e| e.to_string())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let r = pool
        .install(|| chern_plaquette(&p, 8.0, 256))
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let msg = format!(
        "N = {}, residual = {:e}, {secs:.3} s single-threaded",
        r.n_integer, r.residual
    );
    check(r.n_integer == 1 && r.residual < 1e-6 && secs < 5.0, msg.clone(), msg)
}

fn phase_map() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut points = 0;
    for mu in [-2.0, -0.5, 0.5, 2.0] {
        for chi in [Plus, Minus] {
            for delta in [0.2, 1.0, 5.0] {
                points += 1;
                let expected = if mu > 0.0 { chi.sign() as i64 } else { 0 };
                let p = GapParams::new(delta, mu, chi).map_err(|e| e.to_string())?;
                match cross_validate(&p) {
                    Ok(a) if a.n_integer == expected => {}
                    Ok(a) => failures.push(format!("(Δ={delta}, μ={mu}, χ={chi}) gave {}", a.n_integer)),
                    Err(e) => failures.push(format!("(Δ={delta}, μ={mu}, χ={chi}): {e}")),
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        failures.is_empty() && secs < 60.0,
        format!("{points} points, both methods agree, {secs:.1} s"),
        format!("{} failures in {secs:.1} s: {}", failures.len(), failures.join("; ")),
    )
}

/// Index of the largest non-DC FFT bin.
fn peak_bin(samples: &[f64]) -> usize {
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> = samples
        .iter()
        .map(|&x| rustfft::num_complex::Complex::new(x - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    (1..buf.len() / 2)
        .max_by(|&a, &b| buf[a].norm().partial_cmp(&buf[b].norm()).unwrap())
        .unwrap_or(0)
}

fn beating() -> Outcome {
    let n = 1000;
    let mut worst: f64 = 0.0;
    let mut bins = Vec::new();
    for delta in [0.1, 0.5, 2.0] {
        let p = TwoLevelParams::closed(0.0, delta, 0.0);
        // Twenty beat periods.
        let t_total = 20.0 * PI / delta;
        let dt = t_total / n as f64;
        let samples: Vec<f64> = (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                let s = evolve_closed(&QubitState::plus(), &p, t);
                worst = worst.max((s.p_diff() - (2.0 * delta * t).cos()).abs());
                s.p_diff()
            })
            .collect();
        let found = peak_bin(&samples);
        let expected = 2.0 * delta * t_total / (2.0 * PI);
        bins.push((delta, found, expected));
    }
    let bins_ok = bins.iter().all(|&(_, f, e)| (f as f64 - e).abs() <= 1.0);
    let msg = format!("max |P − cos 2δt| = {worst:e}; FFT peak bins {bins:?}");
    check(worst < 1e-9 && bins_ok, msg.clone(), msg)
}

fn eigenstructure() -> Outcome {
    let mut worst: f64 = 0.0;
    for (e0, d, e) in [(0.0, 3.0, 4.0), (5.0, 1.0, 0.0), (-1.2, 0.4, -0.7), (2.0, 0.0, 1.5)] {
        let [g, x] = eigensystem(&TwoLevelParams::closed(e0, d, e));
        let omega = f64::hypot(d, e);
        worst = worst
            .max((g.energy - (e0 - omega)).abs())
            .max((x.energy - (e0 + omega)).abs());
    }
    let (e0, d) = (0.3, 0.8);
    let [g, _] = eigensystem(&TwoLevelParams::closed(e0, d, 0.0));
    let sym = QubitState::symmetric();
    worst = worst
        .max((g.energy - (e0 - d)).abs())
        .max((g.state.amp_minus - sym.amp_minus).norm())
        .max((g.state.amp_plus - sym.amp_plus).norm());
    let msg = format!("max deviation {worst:e}");
    check(worst <= 1e-12, msg.clone(), msg)
}

/// Sign changes of `p` before it settles below `floor` for good.
fn sign_changes(p: &[f64], floor: f64) -> usize {
    let cut = p.iter().rposition(|x| x.abs() >= floor).map_or(0, |i| i + 1);
    p[..cut].windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

fn overdamping() -> Outcome {
    let delta = 0.5;
    let rho = DensityMatrix::from_pure(&QubitState::plus());
    let run = |gamma: f64, t: f64, dt: f64| -> Result<Vec<f64>, String> {
        let p = TwoLevelParams {
            gamma,
            ..TwoLevelParams::closed(0.0, delta, 0.0)
        };
        let traj = evolve_damped(&rho, &p, t, dt).map_err(|e| e.to_string())?;
        Ok(traj.iter().map(|(_, r)| r.p_diff()).collect())
    };
    let strong = run(20.0 * delta, 300.0, 0.005)?;
    let weak = run(0.02 * delta, 100.0, 0.01)?;
    let decayed = strong.last().is_some_and(|x| x.abs() < 0.01);
    let (s, w) = (sign_changes(&strong, 0.01), sign_changes(&weak, 0.01));
    let msg = format!("γ/δ = 20: {s} sign changes (decays below 0.01: {decayed}); γ/δ = 0.02: {w} sign changes");
    check(s == 0 && decayed && w >= 10, msg.clone(), msg)
}

type M4 = [[Complex64; 4]; 4];

fn on_link() -> CouplingLink {
    CouplingLink::new(0, 1, 1.0).unwrap().switched(true)
}

fn dense(f: impl Fn(&RegisterState) -> RegisterState) -> M4 {
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for col in 0..4 {
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[col] = Complex64::new(1.0, 0.0);
        let out = f(&RegisterState::from_amplitudes(2, amps).unwrap());
        for (row, a) in out.amplitudes().iter().enumerate() {
            m[row][col] = *a;
        }
    }
    m
}

fn mul(a: &M4, b: &M4) -> M4 {
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

fn permutation(f: impl Fn(usize) -> usize) -> M4 {
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for idx in 0..4 {
        m[f(idx)][idx] = Complex64::new(1.0, 0.0);
    }
    m
}

/// `min_φ max |a − e^{iφ} b|`, with the phase fixed on b's largest entry.
fn phase_distance(a: &M4, b: &M4) -> f64 {
    let (mut bi, mut bj) = (0, 0);
    for i in 0..4 {
        for j in 0..4 {
            if b[i][j].norm() > b[bi][bj].norm() {
                (bi, bj) = (i, j);
            }
        }
    }
    let phase = a[bi][bj] / b[bi][bj];
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((a[i][j] - b[i][j] * phase).norm());
        }
    }
    worst
}

fn gate_algebra() -> Outcome {
    let link = on_link();
    let sqrt_swap = dense(|s| s.exchange_pulse(&link, FRAC_PI_2).unwrap());
    let swap = permutation(|idx| ((idx & 1) << 1) | (idx >> 1));
    let full = dense(|s| s.exchange_pulse(&link, PI).unwrap());
    let squared = mul(&sqrt_swap, &sqrt_swap);
    let mut exact: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            exact = exact.max((squared[i][j] - full[i][j]).norm());
        }
    }
    let swap_err = phase_distance(&squared, &swap).max(exact);
    let cnot = dense(|s| s.cnot_composed(&link, 0, 1).unwrap());
    let canonical = permutation(|idx| if idx & 1 == 1 { idx ^ 2 } else { idx });
    let cnot_err = phase_distance(&cnot, &canonical);
    let id = permutation(|idx| idx);
    let id_err = phase_distance(&mul(&cnot, &cnot), &id);
    let msg = format!("√SWAP² vs SWAP {swap_err:e}; CNOT vs canonical {cnot_err:e}; CNOT² vs I {id_err:e}");
    check(swap_err < 1e-10 && cnot_err < 1e-10 && id_err < 1e-9, msg.clone(), msg)
}

fn addressing() -> Outcome {
    let amp = 0.05;
    let profile = FieldProfile::new(vec![1.0, 1.5]).map_err(|e| e.to_string())?;
    let s = RegisterState::basis(&[Minus, Minus]).map_err(|e| e.to_string())?;
    let out = s
        .selective_rf_pulse(&profile, 0, amp, PI / amp, 0.01)
        .map_err(|e| e.to_string())?;
    let fidelity = out.prob_plus(0).map_err(|e| e.to_string())?;
    let spectator = out.prob_plus(1).map_err(|e| e.to_string())?;
    // Off-resonant flip bound A²/(A² + detuning²) for the spectator.
    let detuning: f64 = 2.0 * (1.5 - 1.0);
    let rwa = amp * amp / (amp * amp + detuning * detuning);
    let msg = format!("target flip {fidelity:.6}, spectator change {spectator:.2e} (RWA bound {rwa:.2e})");
    check(fidelity > 0.95 && spectator < 0.02, msg.clone(), msg)
}

fn statistics() -> Outcome {
    let shots = 10_000;
    let single = script::parse("RESET 0 +1\nGATE 0 H\nMEASURE 0\n").map_err(|e| e.to_string())?;
    let hist = script::run_shots(&single, &ChainSetup::default(), shots, &mut measurement_rng(2024))
        .map_err(|e| e.to_string())?;
    let f_plus = hist.frequency("+1");

    // Anticorrelated pair from half a swap, then X on qubit 1.
    let prep = "RESET 1 +1\nLINK 0 1 ON\nXCHG 0 1 pi/2\nLINK 0 1 OFF\nGATE 1 X\n";
    let bell = script::parse(&format!("{prep}MEASURE 0\nMEASURE 1\n")).map_err(|e| e.to_string())?;
    let hist =
        script::run_shots(&bell, &ChainSetup::default(), shots, &mut measurement_rng(99)).map_err(|e| e.to_string())?;
    let state = script::run_once(
        &script::parse(prep).map_err(|e| e.to_string())?,
        &ChainSetup::default(),
        &mut measurement_rng(0),
    )
    .map_err(|e| e.to_string())?
    .final_state;
    let born = state.probabilities();
    let mut worst_sigma: f64 = 0.0;
    for (idx, p) in born.iter().enumerate() {
        let key = |q: usize| {
            if (idx >> q) & 1 == 1 {
                Chirality::Plus
            } else {
                Chirality::Minus
            }
        };
        let label = format!("{},{}", key(0), key(1));
        let f = hist.frequency(&label);
        let sigma = (p * (1.0 - p) / shots as f64).sqrt().max(1.0 / shots as f64);
        worst_sigma = worst_sigma.max((f - p).abs() / sigma);
    }
    let correlated = hist.frequency("-1,-1") + hist.frequency("+1,+1");
    let msg =
        format!("P(+1) = {f_plus:.4}; Bell correlated fraction {correlated:.4}, worst deviation {worst_sigma:.2}σ");
    check(
        (f_plus - 0.5).abs() < 0.02 && worst_sigma < 4.0 && (correlated - 1.0).abs() < 1e-12,
        msg.clone(),
        msg,
    )
}

fn device_numbers() -> Outcome {
    let params = MaterialParams {
        gap_ev: 0.5e-3,
        mass_ratio: 4.0,
        cell_volume_a3: 100.0,
        film_thickness_a: 100.0,
        lambda_l_a: 2000.0,
    };
    let r = estimate(1.0, &params).map_err(|e| e.to_string())?;
    let g = r.volume.geometry;
    let v = r.volume.volume_a3;
    // ≈ 100 × 100 × 10 nm³ read as within a factor of ~3 per side.
    let shape = g.lx_a > 300.0 && g.lx_a < 3000.0 && g.ly_a > 300.0 && g.ly_a < 3000.0 && g.lz_a == 100.0;
    let ok = (1e-9..=2e-9).contains(&r.eps_ev)
        && (1e5..=1e7).contains(&(r.n_pairs as f64))
        && (1e7..=1e9).contains(&v)
        && shape
        && r.volume.within_lambda;
    let msg = format!(
        "ε = {:e} eV, n_s = {}, V = {v:e} Å³, {:.0} × {:.0} × {:.0} Å, below λ_L: {}",
        r.eps_ev, r.n_pairs, g.lx_a, g.ly_a, g.lz_a, r.volume.within_lambda
    );
    check(ok, msg.clone(), msg)
}

fn sha256_file(path: &Path) -> Result<String, String> {
    let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, body: &str| -> Result<std::path::PathBuf, String> {
        let p = dir.path().join(name);
        std::fs::write(&p, body).map_err(|e| e.to_string())?;
        Ok(p)
    };
    write(
        "bell.txt",
        "RESET 1 +1\nLINK 0 1 ON\nXCHG 0 1 pi/2\nLINK 0 1 OFF\nRF 0 0.05 10\nMEASURE 0\nMEASURE 1\n",
    )?;
    let cases = [
        ("chern", write("chern.cfg", "gap = 1\nmu = 1\nchi = +1\n")?),
        ("beat", write("beat.cfg", "delta = 0.5\nt_max = 6.283185307179586\n")?),
        (
            "damp",
            write("damp.cfg", "delta = 0.5\ngamma = 0.3\nt_max = 20\ndt = 0.01\n")?,
        ),
        (
            "rabi",
            write("rabi.cfg", "epsilon = 1\namp = 0.05\nt_max = 40\ndt = 0.01\n")?,
        ),
        ("chain", write("chain.cfg", "script_path = bell.txt\nqubits = 2\n")?),
        (
            "chain",
            write("shots.cfg", "script_path = bell.txt\nqubits = 2\nshots = 200\n")?,
        ),
        ("device", write("device.cfg", "h_gauss = 1\n")?),
    ];
    let exe = env!("CARGO_BIN_EXE_rqsim");
    let mut failures = Vec::new();
    for (i, (sub, cfg)) in cases.iter().enumerate() {
        let mut hashes = Vec::new();
        for rep in 0..5 {
            let out = dir.path().join(format!("out-{i}-{rep}.txt"));
            let status = Command::new(exe)
                .args([*sub, "--config"])
                .arg(cfg)
                .arg("--out")
                .arg(&out)
                .args(["--seed", "17"])
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                failures.push(format!("{sub} exited with {status}"));
                break;
            }
            hashes.push(sha256_file(&out)?);
        }
        if hashes.windows(2).any(|w| w[0] != w[1]) {
            failures.push(format!("{sub} ({}) differs across runs", cfg.display()));
        }
    }
    check(
        failures.is_empty(),
        format!("{} configs x 5 runs, identical SHA-256 per config", cases.len()),
        failures.join("; "),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("topological quantization", quantization),
        ("sign/phase map", phase_map),
        ("beating law", beating),
        ("eigenstructure", eigenstructure),
        ("overdamping", overdamping),
        ("gate algebra", gate_algebra),
        ("selective addressing", addressing),
        ("measurement statistics", statistics),
        ("device numbers", device_numbers),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
