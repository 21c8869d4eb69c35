//! One function per subcommand.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use cutset_sync::dynamics::{
    detect_frequency_sync, simulate, solve_acyclic, solve_fixed_point, solve_newton, SimConfig,
    Trajectory,
};
use cutset_sync::figures::{figure_data, Figure};
use cutset_sync::graph::{DecompositionReport, GraphFile};
use cutset_sync::maf::{self, MafConfig, MafEstimate};
use cutset_sync::power::critical::{test_thresholds, CriticalConfig, CriticalRatioReport};
use cutset_sync::power::parse_case;
use cutset_sync::projection::{
    effective_resistance_check, minimal_angle_check, CutsetProjection, MinimalAngle,
    ProjectionNorms, SpectrumCheck,
};
use cutset_sync::sync_tests::{gamma_star, run_all, RunAllConfig, SyncReport};
use cutset_sync::torus::{classify, embed, Membership, PhaseState};
use cutset_sync::{Error, Graph, OscillatorSystem, PNorm};
use rayon::prelude::*;
use serde::Serialize;

use crate::io::{emit, num, read_json, to_csv, to_json, write_atomic, CliError};
use crate::{Cli, Command, Format, Global, Method};

type CliResult<T> = Result<T, CliError>;

pub fn run(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Analyze {
            graph,
            omega,
            gamma,
            p,
            alpha_starts,
            alpha_iters,
        } => analyze(g, graph, omega, gamma, p, *alpha_starts, *alpha_iters),
        Command::Project { graph, check } => project(g, graph, *check),
        Command::Embed { graph, theta, gamma } => embed_cmd(g, graph, theta, *gamma),
        Command::Alpha {
            graph,
            p,
            gamma,
            starts,
            iters,
            brute_force,
            resolution,
        } => alpha(g, graph, *p, *gamma, *starts, *iters, brute_force.then_some(*resolution)),
        Command::Simulate {
            graph,
            omega,
            dt,
            t_end,
            stride,
            theta0_file,
            emit_trajectory,
            window,
            tol,
        } => {
            let sys = load_system(graph, omega)?;
            let mut cfg = SimConfig::default_for(&sys);
            cfg.dt = dt.unwrap_or(cfg.dt);
            cfg.t_end = t_end.unwrap_or(cfg.t_end);
            cfg.stride = stride.unwrap_or(cfg.stride);
            let theta0 = match theta0_file {
                Some(path) => read_json::<Vec<f64>>(path)?,
                None => vec![0.0; sys.n()],
            };
            simulate_cmd(g, &sys, &theta0, &cfg, emit_trajectory.as_deref(), *window, *tol)
        }
        Command::Solve {
            graph,
            omega,
            method,
            gamma,
            p,
            max_iter,
            tol,
        } => solve(g, graph, omega, *method, *gamma, *p, *max_iter, *tol),
        Command::Sweep {
            case,
            bisect_tol,
            with_at1,
            starts,
        } => sweep(g, case, *bisect_tol, *with_at1, *starts),
        Command::Figures { which, points } => figures(g, which, *points),
    }
}

fn json_only(global: &Global, command: &str) -> CliResult<()> {
    match global.format {
        Some(Format::Csv) => Err(CliError::Usage(format!(
            "`{command}` has no CSV output; use --format json"
        ))),
        _ => Ok(()),
    }
}

pub fn load_graph(path: &Path) -> CliResult<Graph> {
    let file: GraphFile = read_json(path)?;
    Ok(Graph::try_from(file)?)
}

fn load_system(graph: &Path, omega: &Path) -> CliResult<OscillatorSystem> {
    let g = load_graph(graph)?;
    let omega: Vec<f64> = read_json(omega)?;
    Ok(OscillatorSystem::new(g, &omega)?)
}

fn analyze(
    global: &Global,
    graph: &Path,
    omega: &Path,
    gammas: &[f64],
    norms: &[PNorm],
    alpha_starts: Option<usize>,
    alpha_iters: usize,
) -> CliResult<()> {
    let sys = load_system(graph, omega)?;
    let mut norms = if norms.is_empty() {
        PNorm::ALL.to_vec()
    } else {
        norms.to_vec()
    };
    norms.dedup();
    let config = RunAllConfig {
        norms,
        alpha: alpha_starts.map(|starts| MafConfig {
            starts,
            iters: alpha_iters,
            seed: global.seed,
        }),
    };
    let report = run_all(&sys, gammas, &config)?;
    match global.format.unwrap_or(Format::Json) {
        Format::Json => emit(global, &to_json(&report)?),
        Format::Csv => emit(global, &report_csv(&report)?),
    }
}

fn report_csv(report: &SyncReport) -> CliResult<String> {
    let header = [
        "test", "norm", "gamma", "applicable", "rigorous", "strict", "lhs", "threshold", "passed",
        "margin", "gamma_domain",
    ];
    let rows: Vec<Vec<String>> = report
        .records
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                r.norm.map(|p| p.to_string()).unwrap_or_default(),
                num(r.gamma),
                r.applicable.to_string(),
                r.rigorous.to_string(),
                r.strict.to_string(),
                num(r.lhs),
                num(r.threshold),
                r.passed.map(|b| b.to_string()).unwrap_or_default(),
                num(r.margin),
                num(r.gamma_domain),
            ]
        })
        .collect();
    to_csv(&header, &rows)
}

#[derive(Serialize)]
struct ProjectChecks {
    /// Largest entrywise deviation from the effective-resistance formula.
    effective_resistance_deviation: f64,
    decomposition: DecompositionReport,
    /// `None` for trees, whose cycle space is trivial.
    minimal_angle: Option<MinimalAngle>,
}

#[derive(Serialize)]
struct ProjectOutput {
    n: usize,
    m: usize,
    matrix: Vec<Vec<f64>>,
    norms: ProjectionNorms,
    gamma_star: ProjectionNorms,
    spectrum: SpectrumCheck,
    checks: Option<ProjectChecks>,
}

fn project(global: &Global, graph: &Path, check: bool) -> CliResult<()> {
    json_only(global, "project")?;
    let g = load_graph(graph)?;
    let cp = CutsetProjection::new(&g)?;
    let norms = cp.norms();
    let mat = cp.matrix();
    let checks = if check {
        Some(ProjectChecks {
            effective_resistance_deviation: effective_resistance_check(&g)?,
            decomposition: g.verify_decomposition()?,
            minimal_angle: match minimal_angle_check(&g) {
                Ok(a) => Some(a),
                Err(Error::TrivialCycleSpace) => None,
                Err(e) => return Err(e.into()),
            },
        })
    } else {
        None
    };
    let out = ProjectOutput {
        n: g.n(),
        m: g.m(),
        matrix: (0..mat.nrows())
            .map(|i| mat.row(i).iter().copied().collect())
            .collect(),
        norms,
        gamma_star: ProjectionNorms {
            one: gamma_star(norms.one),
            two: gamma_star(norms.two),
            inf: gamma_star(norms.inf),
        },
        spectrum: cp.spectrum(),
        checks,
    };
    emit(global, &to_json(&out)?)
}

#[derive(Serialize)]
struct EmbedOutput {
    x: Vec<f64>,
    max_edge_difference: f64,
    gamma: Option<f64>,
    membership: Option<Membership>,
}

fn embed_cmd(global: &Global, graph: &Path, theta: &Path, gamma: Option<f64>) -> CliResult<()> {
    json_only(global, "embed")?;
    let g = load_graph(graph)?;
    let theta = PhaseState::new(read_json(theta)?);
    if theta.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: theta.len(),
        }
        .into());
    }
    let x = embed(&theta, &g)?;
    let membership = gamma.map(|gm| classify(&theta, &g, gm)).transpose()?;
    let out = EmbedOutput {
        max_edge_difference: x.max_edge_difference(&g),
        x: x.into(),
        gamma,
        membership,
    };
    emit(global, &to_json(&out)?)
}

#[derive(Serialize)]
struct AlphaOutput {
    #[serde(flatten)]
    estimate: MafEstimate,
    /// Grid minimum, when requested.
    brute_force: Option<f64>,
}

fn alpha(
    global: &Global,
    graph: &Path,
    p: PNorm,
    gamma: f64,
    starts: usize,
    iters: usize,
    resolution: Option<usize>,
) -> CliResult<()> {
    json_only(global, "alpha")?;
    let g = load_graph(graph)?;
    let cfg = MafConfig {
        starts,
        iters,
        seed: global.seed,
    };
    let estimate = maf::estimate_alpha(&g, p, gamma, &cfg)?;
    let brute_force = resolution
        .map(|r| maf::brute_force_alpha(&g, p, gamma, r))
        .transpose()?;
    emit(
        global,
        &to_json(&AlphaOutput {
            estimate,
            brute_force,
        })?,
    )
}

#[derive(Serialize)]
struct SimulateOutput {
    dt: f64,
    t_end: f64,
    samples: usize,
    window: f64,
    tol: f64,
    synced: bool,
    omega_syn: f64,
    final_theta: Vec<f64>,
    final_frequency: Vec<f64>,
}

fn simulate_cmd(
    global: &Global,
    sys: &OscillatorSystem,
    theta0: &[f64],
    cfg: &SimConfig,
    trajectory_path: Option<&Path>,
    window: Option<f64>,
    tol: f64,
) -> CliResult<()> {
    json_only(global, "simulate")?;
    let traj = simulate(sys, theta0, cfg)?;
    let window = window.unwrap_or(0.1 * traj.span());
    let (synced, omega_syn) = detect_frequency_sync(&traj, window, tol)?;
    if let Some(path) = trajectory_path {
        write_atomic(path, trajectory_csv(&traj)?.as_bytes())?;
        if !global.quiet {
            eprintln!("wrote {}", path.display());
        }
    }
    let out = SimulateOutput {
        dt: cfg.dt,
        t_end: cfg.t_end,
        samples: traj.times.len(),
        window,
        tol,
        synced,
        omega_syn,
        final_theta: traj.final_state().angles().to_vec(),
        final_frequency: traj.freq.last().cloned().unwrap_or_default(),
    };
    emit(global, &to_json(&out)?)
}

fn trajectory_csv(traj: &Trajectory) -> CliResult<String> {
    let n = traj.final_state().len();
    let names: Vec<String> = std::iter::once("t".to_string())
        .chain((0..n).map(|i| format!("theta_{i}")))
        .chain((0..n).map(|i| format!("freq_{i}")))
        .collect();
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = traj
        .times
        .iter()
        .zip(&traj.states)
        .zip(&traj.freq)
        .map(|((t, s), f)| {
            std::iter::once(*t)
                .chain(s.angles().iter().copied())
                .chain(f.iter().copied())
                .map(|v| num(Some(v)))
                .collect()
        })
        .collect();
    to_csv(&header, &rows)
}

#[allow(clippy::too_many_arguments)]
fn solve(
    global: &Global,
    graph: &Path,
    omega: &Path,
    method: Method,
    gamma: Option<f64>,
    p: PNorm,
    max_iter: usize,
    tol: f64,
) -> CliResult<()> {
    json_only(global, "solve")?;
    let sys = load_system(graph, omega)?;
    let need_gamma = |name: &str| {
        gamma.ok_or_else(|| CliError::Usage(format!("--method {name} requires --gamma")))
    };
    let result = match method {
        Method::Newton => solve_newton(&sys, &vec![0.0; sys.n()], max_iter, tol)?,
        Method::FixedPoint => solve_fixed_point(&sys, p, need_gamma("fixed-point")?, max_iter, tol)?,
        Method::Acyclic => solve_acyclic(&sys, gamma.unwrap_or(FRAC_PI_2))?,
    };
    emit(global, &to_json(&result)?)
}

fn load_case(path: &Path) -> CliResult<cutset_sync::power::PowerCase> {
    parse_case(path).map_err(|e| match e {
        Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
            CliError::MissingFile(path.to_path_buf())
        }
        other => CliError::Domain(other),
    })
}

fn sweep(
    global: &Global,
    cases: &[std::path::PathBuf],
    bisect_tol: f64,
    with_at1: bool,
    starts: usize,
) -> CliResult<()> {
    let parsed = cases.iter().map(|c| load_case(c)).collect::<CliResult<Vec<_>>>()?;
    let config = CriticalConfig {
        bisect_tol,
        ..CriticalConfig::default()
    };
    let alpha = with_at1.then_some(MafConfig {
        starts,
        seed: global.seed,
        ..MafConfig::default()
    });
    let reports = parsed
        .par_iter()
        .map(|case| test_thresholds(case, &config, alpha.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    if !global.quiet && global.output.is_some() {
        for r in &reports {
            eprintln!("{}: K_c = {}", r.case, num(r.k_c));
        }
    }
    match global.format.unwrap_or(Format::Json) {
        Format::Json => emit(global, &to_json(&reports)?),
        Format::Csv => emit(global, &sweep_csv(&reports, with_at1)?),
    }
}

fn sweep_csv(reports: &[CriticalRatioReport], with_at1: bool) -> CliResult<String> {
    let mut tests = vec!["T0", "T3", "AT0"];
    if with_at1 {
        tests.push("AT1");
    }
    let mut header = vec!["case", "n", "m", "k_c"];
    let ratio_names: Vec<String> = tests.iter().map(|t| format!("ratio_{t}")).collect();
    header.extend(ratio_names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.case.clone(), r.n.to_string(), r.m.to_string(), num(r.k_c)];
            row.extend(tests.iter().map(|t| num(r.ratio(t))));
            row
        })
        .collect();
    to_csv(&header, &rows)
}

fn figures(global: &Global, which: &str, points: usize) -> CliResult<()> {
    let fig: Figure = which.parse()?;
    let data = figure_data(fig, points)?;
    match global.format.unwrap_or(Format::Csv) {
        Format::Json => emit(global, &to_json(&data)?),
        Format::Csv => {
            let header: Vec<&str> = data.columns.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = data
                .rows
                .iter()
                .map(|r| r.iter().map(|v| num(Some(*v))).collect())
                .collect();
            emit(global, &to_csv(&header, &rows)?)
        }
    }
}
