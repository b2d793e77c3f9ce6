//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vscreg::harness::{run_sweep, SweepReport};
use vscreg::mdp::select_alpha_mdp;
use vscreg::penalties::bregman;
use vscreg::solver::{closed_form_quadratic, minimize_tikhonov};
use vscreg::vsc::vsc_constants_from_taus;
use vscreg::{
    DiscrepancyRadii64, IndexFunction64, LinearMap64, Penalty64, SearchSettings64, Signal64, SolverSettings64,
    VariationalProblem,
};
use vscreg_cli::load_config;

const SHIPPED: [&str; 3] = ["identity_quadratic", "convolution_tv", "convolution_l1"];

static WARNINGS: Mutex<Vec<String>> = Mutex::new(Vec::new());

struct Capture;

impl log::Log for Capture {
    fn enabled(&self, m: &log::Metadata) -> bool {
        m.level() <= log::Level::Warn
    }

    fn log(&self, r: &log::Record) {
        if self.enabled(r.metadata()) {
            WARNINGS.lock().unwrap().push(format!("{}: {}", r.target(), r.args()));
        }
    }

    fn flush(&self) {}
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"))
}

fn sweep(name: &str) -> SweepReport<f64> {
    let cfg = load_config(&config_path(name)).expect("shipped config parses");
    run_sweep(&cfg.sweep_config().expect("has sweep section")).expect("sweep runs")
}

fn signal(rng: &mut ChaCha8Rng, n: usize) -> Signal64 {
    Signal64::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> LinearMap64 {
    let m: Vec<Vec<f64>> = (0..rows).map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    LinearMap64::dense(&m).unwrap()
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn adjoint_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dense = random_dense(&mut rng, 32, 32);
    let rank = dense.to_dense().numerical_rank(1e-10);
    let ops = [
        ("identity", LinearMap64::identity(32)),
        ("dense", dense),
        ("convolution", LinearMap64::convolution(vec![0.1, 0.2, 0.4, 0.2, 0.1], 64).unwrap()),
    ];
    let mut worst = 0.0f64;
    for (_, op) in &ops {
        for _ in 0..100 {
            let x = signal(&mut rng, op.in_dim());
            let y = signal(&mut rng, op.out_dim());
            let txy = op.apply(&x).unwrap().dot(&y);
            let xtsy = x.dot(&op.apply_adjoint(&y).unwrap());
            worst = worst.max((txy - xtsy).abs() / (1.0 + txy.abs()));
        }
    }
    let elapsed = start.elapsed();
    ensure(
        rank == 32 && worst <= 1e-10 && elapsed < Duration::from_secs(1),
        format!("dense rank {rank}, worst defect {worst:.2e} (<= 1e-10), {elapsed:.2?} (< 1s)"),
    )
}

fn solver_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut unconverged = 0;
    for _ in 0..20 {
        let n = rng.random_range(4..=64);
        let op = random_dense(&mut rng, n, n);
        let data = signal(&mut rng, n);
        let alpha = 10f64.powf(rng.random_range(-2.0..0.0));
        let exact = closed_form_quadratic(&op, &data, alpha).unwrap();
        let problem = VariationalProblem::new(&op, &data, Penalty64::Quadratic, alpha).unwrap();
        let sol = minimize_tikhonov(&problem, &SolverSettings64::default(), None).unwrap();
        if !sol.converged {
            unconverged += 1;
        }
        worst = worst.max(sol.phi.distance(&exact) / exact.norm());
    }
    let elapsed = start.elapsed();
    ensure(
        worst <= 1e-6 && unconverged == 0 && elapsed < Duration::from_secs(10),
        format!("worst relative error {worst:.2e} (<= 1e-6), {unconverged} unconverged, {elapsed:.2?} (< 10s)"),
    )
}

fn mdp_window() -> Outcome {
    let op = LinearMap64::identity(2);
    let data = Signal64::new(vec![1.0, 0.0]).unwrap();
    let radii = DiscrepancyRadii64::new(1.5, 2.0, 0.1).unwrap();
    let solver = SolverSettings64::default();
    let res = select_alpha_mdp(&op, &data, Penalty64::Quadratic, &radii, &SearchSettings64::default(), &solver)
        .map_err(|e| e.to_string())?;
    let r = res.solution.residual_norm;
    let tol = solver.tol;
    ensure(
        (3.0 / 17.0..=0.25).contains(&res.alpha) && r >= 0.15 - tol && r <= 0.2 + tol,
        format!("alpha {:.6} in [3/17, 1/4], residual {r:.6} in [0.15, 0.2]", res.alpha),
    )
}

fn mdp_consequences(report: &SweepReport<f64>) -> Outcome {
    let (tl, tu) = (report.config.tau_lower, report.config.tau_upper);
    let mut worst = f64::INFINITY;
    for r in report.ok_records() {
        worst = worst.min((tu + 1.0) * r.delta - r.image_error);
        worst = worst.min(r.image_error - (tl - 1.0) * r.delta);
    }
    let n = report.ok_records().count();
    ensure(n == 6 && worst >= -1e-8, format!("{n} records, smallest slack {worst:.3e} (>= -1e-8)"))
}

fn alpha_lower_bound(report: &SweepReport<f64>) -> Outcome {
    let (tl, tu) = (report.config.tau_lower, report.config.tau_upper);
    let sigma = (tl - 1.0) / tu;
    let psi = report.fitted_psi.psi;
    let mut held = 0;
    let mut n = 0;
    let mut tightest = f64::INFINITY;
    for r in report.ok_records() {
        let bound = sigma / 4.0 * (tl - 1.0) * r.delta * r.delta / psi.eval(r.delta).unwrap();
        n += 1;
        if bound <= r.alpha {
            held += 1;
        }
        tightest = tightest.min(r.alpha / bound);
    }
    ensure(held == n && n > 0, format!("{held}/{n} records, smallest alpha/bound {tightest:.3}"))
}

fn jdiff_delta2(reports: &[(&str, SweepReport<f64>)]) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, report) in reports {
        let tu = report.config.tau_upper;
        let mut worst = f64::INFINITY;
        let mut passed = 0;
        let mut n = 0;
        for r in report.ok_records() {
            let slack = (1.0 + tu).powi(2) * r.delta * r.delta / r.alpha - (r.j_reg - r.j_true);
            worst = worst.min(slack);
            n += 1;
            if slack >= -1e-8 {
                passed += 1;
            }
        }
        ok &= passed == n && n == report.records.len();
        parts.push(format!("{name} {passed}/{n} (min slack {worst:.2e})"));
    }
    ensure(ok, parts.join(", "))
}

fn psi_relative(reports: &[(&str, SweepReport<f64>)]) -> Outcome {
    let flags = ["jdiff_psi", "bregman_forward", "bregman_reverse", "bregman_symmetric"];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, report) in reports {
        let records: Vec<_> = report.ok_records().collect();
        let mut counts = Vec::new();
        for flag in flags {
            let passed = records
                .iter()
                .filter(|r| r.checklist.checks().iter().any(|(n, c)| *n == flag && c.holds))
                .count();
            let tally = report.tallies.get(flag).expect("flag tallied");
            ok &= tally.passed == passed && tally.total == records.len();
            ok &= passed * 10 >= records.len() * 9;
            counts.push(format!("{flag} {passed}/{}", records.len()));
        }
        let sym_ok = records
            .iter()
            .all(|r| (r.bregman_sym - (r.bregman_fwd + r.bregman_rev)).abs() <= 1e-10);
        ok &= sym_ok;
        parts.push(format!("{name}: {}, sym = fwd + rev {}", counts.join(" "), if sym_ok { "all" } else { "not all" }));
    }
    ensure(ok, parts.join("; "))
}

fn rate_sanity(reports: &[(&str, SweepReport<f64>)]) -> Outcome {
    let identity = &reports[0].1;
    let slope = identity
        .rate_summary
        .image_error
        .map(|f| f.slope)
        .ok_or("no image-error fit")?;
    let mut ok = (slope - 1.0).abs() <= 0.1 && identity.ok_records().count() == 6;
    let warnings = WARNINGS.lock().unwrap().clone();
    let mut parts = vec![format!("image slope {slope:.3} (1 +- 0.1)")];
    for (name, report) in reports {
        let fp = &report.fitted_psi;
        let kappa = fp.psi.kappa();
        ok &= kappa > 0.0 && kappa <= 1.0;
        if fp.clamped {
            let raw = fp.raw_kappa.unwrap_or(f64::NAN);
            let logged = warnings.iter().any(|w| w.contains("clamped") && w.contains(&raw.to_string()));
            ok &= logged;
            parts.push(format!("{name} kappa {kappa} (raw {raw:.3}, clamp {})", if logged { "logged" } else { "NOT logged" }));
        } else {
            parts.push(format!("{name} kappa {kappa:.3}"));
        }
    }
    ensure(ok, parts.join(", "))
}

fn coefficient_algebra() -> Outcome {
    let mut worst = 0.0f64;
    let mut sigma_ok = true;
    for i in 1..=50 {
        let tl = 1.0 + 9.0 * i as f64 / 50.0;
        for j in 0..50 {
            let tu = tl + (20.0 - tl) * j as f64 / 49.0;
            let k = vsc_constants_from_taus(tl, tu).map_err(|e| e.to_string())?;
            sigma_ok &= k.sigma_tilde > 0.0 && k.sigma_tilde < 1.0;
            worst = worst.max((k.sigma_tilde * k.c - 1.0).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let psi = IndexFunction64::power(rng.random_range(0.01..10.0), rng.random_range(0.01..=1.0)).unwrap();
        let c = rng.random_range(1.0..=100.0);
        let t = 1.0 - rng.random_range(0.0..1.0);
        let lhs = psi.eval(c * t).unwrap();
        let rhs = c * psi.eval(t).unwrap();
        excess = excess.max((lhs - rhs) / rhs);
    }
    // products are compared to 1 up to one rounding of the product
    ensure(
        sigma_ok && worst <= f64::EPSILON && excess <= 4.0 * f64::EPSILON,
        format!("2500 radii pairs, max |sigma*C - 1| {worst:.1e}; 1000 pairs, max relative excess {excess:.1e}"),
    )
}

fn bregman_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let pens = [Penalty64::Quadratic, Penalty64::smoothed_tv(0.01).unwrap(), Penalty64::L1];
    let mut min_d = f64::INFINITY;
    let mut max_diag = 0.0f64;
    let mut quad = 0.0f64;
    for pen in &pens {
        for _ in 0..200 {
            let u = signal(&mut rng, 16).scale(3.0);
            let v = signal(&mut rng, 16).scale(3.0);
            let pv = pen.subgradient(&v);
            min_d = min_d.min(bregman(pen, &u, &v, &pv));
            max_diag = max_diag.max(bregman(pen, &v, &v, &pv).abs());
            if matches!(pen, Penalty64::Quadratic) {
                quad = quad.max((bregman(pen, &u, &v, &pv) - 0.5 * u.sub(&v).norm_squared()).abs());
            }
        }
    }
    let tv = pens[1];
    let mut fd_err = 0.0f64;
    let h = 1e-6;
    for _ in 0..50 {
        let u = signal(&mut rng, 16).scale(2.0);
        let g = tv.gradient(&u).unwrap();
        for i in 0..16 {
            let mut e = vec![0.0; 16];
            e[i] = 1.0;
            let e = Signal64::new(e).unwrap();
            let fd = (tv.eval(&u.axpby(1.0, &e, h)) - tv.eval(&u.axpby(1.0, &e, -h))) / (2.0 * h);
            fd_err = fd_err.max((fd - g.values()[i]).abs() / g.values()[i].abs().max(1.0));
        }
    }
    ensure(
        min_d >= -1e-12 && max_diag <= 1e-12 && quad <= 1e-12 && fd_err <= 1e-5,
        format!("min D {min_d:.1e}, max D(u,u) {max_diag:.1e}, quadratic gap {quad:.1e}, TV gradient error {fd_err:.1e}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let mut identical = 0;
    for name in SHIPPED {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{name}_{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_vscreg"))
                .args(["sweep", "--config"])
                .arg(config_path(name))
                .arg("--out-dir")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            if !matches!(status.status.code(), Some(0) | Some(4)) {
                return Err(format!("{name}: sweep exited with {:?}", status.status.code()));
            }
            let json = std::fs::read(out.join("report.json")).map_err(|e| e.to_string())?;
            let csv = std::fs::read(out.join("records.csv")).map_err(|e| e.to_string())?;
            outputs.push((json, csv));
        }
        if outputs[0] == outputs[1] {
            identical += 1;
        }
    }
    ensure(identical == SHIPPED.len(), format!("{identical}/{} configs byte-identical", SHIPPED.len()))
}

fn main() {
    log::set_logger(&Capture).expect("logger installed once");
    log::set_max_level(log::LevelFilter::Warn);

    let reports: Vec<(&str, SweepReport<f64>)> = SHIPPED.iter().map(|n| (*n, sweep(n))).collect();
    let identity = &reports[0].1;

    let results: Vec<(&str, Outcome)> = vec![
        ("adjoint identity", adjoint_identity()),
        ("solver matches closed form", solver_oracle()),
        ("discrepancy window", mdp_window()),
        ("discrepancy consequences", mdp_consequences(identity)),
        ("alpha lower bound", alpha_lower_bound(identity)),
        ("J-difference delta^2 bound", jdiff_delta2(&reports)),
        ("index-relative bounds", psi_relative(&reports)),
        ("rate sanity", rate_sanity(&reports)),
        ("coefficient algebra", coefficient_algebra()),
        ("Bregman axioms", bregman_axioms()),
        ("determinism", determinism()),
    ];

    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1)
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
