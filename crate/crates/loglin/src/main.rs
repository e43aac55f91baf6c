//! Command-line front end: simulate a scenario, synthesize its invariant
//! set, build flow pipes, or verify obstacle safety.  `--out` names a
//! directory; each subcommand writes a fixed set of files into it.  Set
//! `RUST_LOG` (e.g. `RUST_LOG=info`) for progress output.  Exit codes:
//! 0 on success (and a SAFE verdict), 2 on an UNSAFE verdict, 1 on any
//! error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::{Matrix2, Vector2};
use serde_json::json;

use loglin::flowpipe::PipeConfig;
use loglin::pipeline::{design_gain, synthesize, verify_scenario, Artifacts};
use loglin::scenario::{seeded_disturbance, Scenario};
use loglin::sim::{simulate, ClosedLoop, ControlLaw, Reference, SimConfig, Trace};
use loglin::svg::SvgScene;
use loglin::synth::{DistortionBound, Ellipsoid};

type P2 = Vector2<f64>;

#[derive(Parser)]
#[command(
    name = "loglin",
    version,
    about = "Exact log-linear tracking control on SE(2): simulation, invariant sets, flow pipes, obstacle safety"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for result files (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run the feedback without the distortion inversion.
    #[arg(long)]
    no_inversion: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the closed loop along the scenario plan.
    ///
    /// Writes `trace.csv`, `trajectories.svg`, `deviation.svg`.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Integration step in seconds.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
    /// Synthesize the invariant tracking-error ellipsoid, with and
    /// without the distortion inversion, and report the size ratio.
    ///
    /// Writes `invariant.json`, `invariant_views.svg`.
    Invariant {
        #[command(flatten)]
        common: Common,
    },
    /// Build the flow pipe along the plan.
    ///
    /// Writes `pipe.json`, `pipe.svg`.
    Flowpipe {
        #[command(flatten)]
        common: Common,
    },
    /// Check the flow pipe against the scenario obstacles.
    ///
    /// Writes `report.json`, `pipe.svg`.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.cmd {
        Cmd::Simulate { common, dt } => cmd_simulate(&common, dt),
        Cmd::Invariant { common } => cmd_invariant(&common),
        Cmd::Flowpipe { common } => cmd_flowpipe(&common),
        Cmd::Verify { common } => cmd_verify(&common),
    }
}

fn load(common: &Common) -> Result<(Scenario, ControlLaw), Box<dyn std::error::Error>> {
    let mut sc = Scenario::from_path(&common.scenario)?;
    if let Some(seed) = common.seed {
        sc.seed = seed;
    }
    let law = if common.no_inversion { ControlLaw::NoInversion } else { ControlLaw::Inversion };
    log::info!("loaded scenario '{}' ({:?})", sc.name, law);
    Ok((sc, law))
}

fn out_dir(common: &Common) -> std::io::Result<Option<PathBuf>> {
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)?;
        return Ok(Some(dir.clone()));
    }
    Ok(None)
}

fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from(
        "t,x,y,theta,ref_x,ref_y,ref_theta,zeta_x,zeta_y,zeta_theta,dev_exact,dev_naive,u_x,u_y,u_theta\n",
    );
    for i in 0..trace.t.len() {
        let (x, xr) = (&trace.pose[i], &trace.ref_pose[i]);
        let z = &trace.zeta_group[i];
        let u = &trace.control[i];
        let de = (trace.zeta_model[i] - z).norm();
        let dn = (trace.zeta_naive[i] - z).norm();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            trace.t[i],
            x.translation().x,
            x.translation().y,
            x.angle(),
            xr.translation().x,
            xr.translation().y,
            xr.angle(),
            z.x,
            z.y,
            z.z,
            de,
            dn,
            u.x,
            u.y,
            u.z,
        );
    }
    out
}

fn trajectories_svg(trace: &Trace, sc: &Scenario) -> SvgScene {
    let mut scene = SvgScene::new();
    for obs in &sc.obstacle_polygons() {
        scene.polygon(obs, "#7f8c8d", "#424949", 0.8);
    }
    let refs: Vec<P2> = trace.ref_pose.iter().map(|x| x.translation()).collect();
    let actual: Vec<P2> = trace.pose.iter().map(|x| x.translation()).collect();
    let (mut lo, mut hi) = (refs[0], refs[0]);
    for p in refs.iter().chain(&actual) {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let size = 0.03 * (hi - lo).norm().max(1e-9);
    scene.polyline(&refs, "#145a32", 2.5);
    scene.polyline(&actual, "#2980b9", 1.2);
    scene.text(P2::new(lo.x, hi.y + 2.0 * size), "reference (green) / tracked (blue)", size, "#333");
    scene
}

fn deviation_svg(trace: &Trace) -> SvgScene {
    // Deviations span many decades, so plot log10(d); the time axis is
    // stretched to keep the frame near a 3:2 aspect under uniform scaling.
    let floor = 1e-16;
    let t_span = trace.t.last().unwrap() - trace.t[0];
    let log_e: Vec<f64> = trace
        .zeta_model
        .iter()
        .zip(&trace.zeta_group)
        .map(|(zm, zg)| ((zm - zg).norm() + floor).log10())
        .collect();
    let log_n: Vec<f64> = trace
        .zeta_naive
        .iter()
        .zip(&trace.zeta_group)
        .map(|(zn, zg)| ((zn - zg).norm() + floor).log10())
        .collect();
    let y_lo = log_e.iter().chain(&log_n).cloned().fold(f64::INFINITY, f64::min).floor() - 1.0;
    let y_hi = log_e.iter().chain(&log_n).cloned().fold(f64::NEG_INFINITY, f64::max).ceil() + 1.0;
    let k = 1.5 * (y_hi - y_lo) / t_span.max(1e-9);
    let sx = |t: f64| (t - trace.t[0]) * k;

    let mut scene = SvgScene::new();
    let (x0, x1) = (sx(trace.t[0]), sx(*trace.t.last().unwrap()));
    scene.polyline(
        &[
            P2::new(x0, y_lo),
            P2::new(x1, y_lo),
            P2::new(x1, y_hi),
            P2::new(x0, y_hi),
            P2::new(x0, y_lo),
        ],
        "#555",
        1.0,
    );
    let size = 0.045 * (y_hi - y_lo);
    let mut dec = y_lo.ceil() as i64;
    while (dec as f64) < y_hi {
        if dec % 2 == 0 {
            let y = dec as f64;
            scene.polyline(&[P2::new(x0, y), P2::new(x1, y)], "#ddd", 0.6);
            scene.text(P2::new(x0 - 2.4 * size, y + 0.3 * size), &format!("1e{dec}"), size, "#555");
        }
        dec += 1;
    }
    let ticks = 5usize;
    for i in 0..=ticks {
        let t = trace.t[0] + t_span * i as f64 / ticks as f64;
        scene.polyline(&[P2::new(sx(t), y_lo), P2::new(sx(t), y_lo + 0.15)], "#555", 1.0);
        scene.text(P2::new(sx(t) - size, y_lo - size), &format!("{t:.0} s"), size, "#555");
    }
    let curve = |vals: &[f64]| -> Vec<P2> {
        trace.t.iter().zip(vals).map(|(&t, &v)| P2::new(sx(t), v)).collect()
    };
    scene.polyline(&curve(&log_e), "#2471a3", 1.8);
    scene.polyline(&curve(&log_n), "#c0392b", 1.8);
    scene.text(
        P2::new(x0, y_hi + 2.0 * size),
        "model deviation |zeta_model - zeta_group|: exact propagation (blue), naive -I (red)",
        size,
        "#333",
    );
    scene
}

fn cmd_simulate(common: &Common, dt: f64) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let (sc, law) = load(common)?;
    let plan = sc.plan()?;
    let lqr = design_gain(&sc)?;
    let disturbance = seeded_disturbance(sc.disturbance, sc.seed);
    let t_end = plan.end_time();
    let stride = ((t_end / dt) as usize / 4000).max(1);
    let cfg = SimConfig { dt, t_end, record_stride: stride, ..SimConfig::default() };
    let loop_ = ClosedLoop { reference: &plan, disturbance: &disturbance, gain: lqr.k, law };
    let trace = simulate(&loop_, &plan.pose(0.0), &cfg)?;

    println!(
        "simulated {:.1} s at dt = {dt:.0e}: max |zeta_model - zeta_group| = {:.3e} (naive -I: {:.3e}), max control dev = {:.3e}",
        t_end,
        trace.max_model_dev,
        trace.max_naive_dev,
        trace.max_abs_control.amax(),
    );
    if let Some(dir) = out_dir(common)? {
        std::fs::write(dir.join("trace.csv"), trace_csv(&trace))?;
        trajectories_svg(&trace, &sc).write_to(dir.join("trajectories.svg"), 900.0)?;
        deviation_svg(&trace).write_to(dir.join("deviation.svg"), 900.0)?;
        log::info!("trace.csv, trajectories.svg, deviation.svg written to {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn bound_json(bound: &DistortionBound) -> serde_json::Value {
    let p = &bound.ellipsoid.p;
    json!({
        "p": (0..3).map(|i| (0..3).map(|j| p[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "alpha": bound.alpha,
        "sigma": bound.sigma,
        "beta": bound.beta,
        "rho": bound.rho,
        "iterations": bound.iterations,
        "history": bound.history,
        "semi_axes": bound.ellipsoid.semi_axes(),
        "mean_semi_axis": bound.ellipsoid.mean_semi_axis(),
        "theta_extent": bound.ellipsoid.theta_extent(),
    })
}

/// Boundary of the shadow of `{zeta : zeta^T P zeta <= 1}` on coordinates
/// `(i, j)`: the ellipse whose squared matrix is the `(i, j)` submatrix of
/// `P^{-1}`.
fn shadow(ell: &Ellipsoid, i: usize, j: usize) -> Vec<P2> {
    let s = ell.p.try_inverse().expect("invariant ellipsoid matrix is nonsingular");
    let s2 = Matrix2::new(s[(i, i)], s[(i, j)], s[(j, i)], s[(j, j)]);
    let eig = nalgebra::SymmetricEigen::new(s2);
    let half = eig.eigenvectors
        * Matrix2::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();
    (0..=64)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / 64.0;
            half * P2::new(phi.cos(), phi.sin())
        })
        .collect()
}

fn invariant_views_svg(with: &Ellipsoid, without: Option<&Ellipsoid>) -> SvgScene {
    let mut scene = SvgScene::new();
    let panels = [(0usize, 1usize, "x - y"), (0, 2, "x - theta"), (1, 2, "y - theta")];
    let mut radius = 0.0f64;
    for &(i, j, _) in &panels {
        for ell in [Some(with), without].into_iter().flatten() {
            for p in shadow(ell, i, j) {
                radius = radius.max(p.norm());
            }
        }
    }
    let pitch = 2.6 * radius;
    for (k, &(i, j, label)) in panels.iter().enumerate() {
        let off = P2::new(pitch * k as f64, 0.0);
        if let Some(ell) = without {
            let pts: Vec<P2> = shadow(ell, i, j).iter().map(|p| p + off).collect();
            scene.polyline(&pts, "#e67e22", 2.0);
        }
        let pts: Vec<P2> = shadow(with, i, j).iter().map(|p| p + off).collect();
        scene.polyline(&pts, "#2471a3", 2.0);
        scene.text(off + P2::new(-0.4 * radius, -1.25 * radius), label, 0.12 * radius, "#333");
    }
    scene.text(
        P2::new(-0.4 * radius, 1.25 * radius),
        "invariant set: with inversion (blue), without (orange)",
        0.12 * radius,
        "#333",
    );
    scene
}

fn cmd_invariant(common: &Common) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let (sc, _) = load(common)?;
    let (lqr, with) = synthesize(&sc, false)?;
    let report = |tag: &str, b: &DistortionBound| {
        println!(
            "{tag}: {} fixed-point iterations, sigma = {:.4}, beta = {:.4}, mean semi-axis = {:.4}, heading extent = {:.4} rad",
            b.iterations,
            b.sigma,
            b.beta,
            b.ellipsoid.mean_semi_axis(),
            b.ellipsoid.theta_extent(),
        );
    };
    report("with inversion   ", &with);
    let without = match synthesize(&sc, true) {
        Ok((_, b)) => {
            report("without inversion", &b);
            println!(
                "mean semi-axis ratio (without / with) = {:.4}",
                b.ellipsoid.mean_semi_axis() / with.ellipsoid.mean_semi_axis(),
            );
            Ok(b)
        }
        Err(e) => {
            println!("without inversion: synthesis failed: {e}");
            Err(e.to_string())
        }
    };
    if let Some(dir) = out_dir(common)? {
        let doc = json!({
            "scenario": sc.name,
            "riccati_residual": lqr.residual,
            "with_inversion": bound_json(&with),
            "without_inversion": without.as_ref().ok().map(bound_json),
            "without_inversion_error": without.as_ref().err(),
            "mean_semi_axis_ratio": without
                .as_ref()
                .ok()
                .map(|b| b.ellipsoid.mean_semi_axis() / with.ellipsoid.mean_semi_axis()),
        });
        std::fs::write(dir.join("invariant.json"), serde_json::to_string_pretty(&doc)?)?;
        invariant_views_svg(&with.ellipsoid, without.as_ref().ok().map(|b| &b.ellipsoid))
            .write_to(dir.join("invariant_views.svg"), 1200.0)?;
        log::info!("invariant.json, invariant_views.svg written to {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn pipe_scene(artifacts: &Artifacts, sc: &Scenario) -> SvgScene {
    let mut scene = SvgScene::new();
    for w in &artifacts.pipe.windows {
        scene.polygon(&w.region, "#7fb3d5", "#2471a3", 0.25);
    }
    let hit_obs: Vec<usize> = artifacts.report.hits.iter().map(|h| h.obstacle).collect();
    for (i, obs) in sc.obstacle_polygons().iter().enumerate() {
        let fill = if hit_obs.contains(&i) { "#c0392b" } else { "#7f8c8d" };
        scene.polygon(obs, fill, "#424949", 0.8);
    }
    let (t0, t1) = (artifacts.plan.start_time(), artifacts.plan.end_time());
    let path: Vec<_> =
        (0..=400).map(|i| artifacts.plan.position(t0 + (t1 - t0) * i as f64 / 400.0)).collect();
    scene.polyline(&path, "#145a32", 2.0);
    scene
}

fn pipe_json(artifacts: &Artifacts, sc: &Scenario) -> serde_json::Value {
    json!({
        "scenario": sc.name,
        "sigma": artifacts.bound.sigma,
        "alpha": artifacts.bound.alpha,
        "rate_bounds": { "speed": artifacts.rates.speed, "turn": artifacts.rates.turn },
        "windows": artifacts.pipe.windows.iter().map(|w| json!({
            "t0": w.t0,
            "t1": w.t1,
            "heading": [w.heading.0, w.heading.1],
            "region": w.region.vertices().iter().map(|v| [v.x, v.y]).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn cmd_flowpipe(common: &Common) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let (sc, law) = load(common)?;
    let artifacts = verify_scenario(&sc, law == ControlLaw::NoInversion, &PipeConfig::default())?;
    println!(
        "flow pipe over [{:.1}, {:.1}] s: {} windows, footprint sigma = {:.4}",
        artifacts.plan.start_time(),
        artifacts.plan.end_time(),
        artifacts.pipe.windows.len(),
        artifacts.bound.sigma,
    );
    if let Some(dir) = out_dir(common)? {
        std::fs::write(
            dir.join("pipe.json"),
            serde_json::to_string_pretty(&pipe_json(&artifacts, &sc))?,
        )?;
        pipe_scene(&artifacts, &sc).write_to(dir.join("pipe.svg"), 900.0)?;
        log::info!("pipe.json, pipe.svg written to {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(common: &Common) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let (sc, law) = load(common)?;
    let artifacts = verify_scenario(&sc, law == ControlLaw::NoInversion, &PipeConfig::default())?;
    for hit in &artifacts.report.hits {
        let w = &artifacts.pipe.windows[hit.window];
        println!(
            "contact: window {} [{:.2}, {:.2}] s with obstacle {}",
            hit.window, w.t0, w.t1, hit.obstacle,
        );
    }
    if let Some(dir) = out_dir(common)? {
        let mut doc = pipe_json(&artifacts, &sc);
        doc["verdict"] = json!(format!("{:?}", artifacts.report.verdict).to_uppercase());
        doc["hits"] = json!(artifacts
            .report
            .hits
            .iter()
            .map(|h| json!({ "window": h.window, "obstacle": h.obstacle }))
            .collect::<Vec<_>>());
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&doc)?)?;
        pipe_scene(&artifacts, &sc).write_to(dir.join("pipe.svg"), 900.0)?;
        log::info!("report.json, pipe.svg written to {}", dir.display());
    }
    if artifacts.report.is_safe() {
        println!("SAFE: no window touches an obstacle");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("UNSAFE: {} window/obstacle contacts", artifacts.report.hits.len());
        Ok(ExitCode::from(2))
    }
}
