//! pmech: run algebra/representation invariant checks, oscillator dynamics
//! and two-slit interference experiments over the three characters of the
//! Heisenberg group, writing deterministic CSV plus a manifest sidecar.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 configuration error,
//! 3 numeric instability.

mod checks;
mod config;
mod csvout;
mod hscalar_text;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use csvout::CsvWriter;
use pmech_core::{evolve_cubic, two_slit_curve, CoreError, PhaseField, UnitTag};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pmech", version, about = "Mechanics on the Heisenberg group: checks, dynamics, interference")]
struct Cli {
    /// Flat key=value configuration file ('#' comments allowed); flags
    /// override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Character: elliptic | parabolic | hyperbolic
    #[arg(long)]
    character: Option<String>,
    /// State kind: gaussian | rational | bump
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Position mean of the slits
    #[arg(long)]
    a: Option<f64>,
    /// Momentum separation: slits sit at (a, +-b)
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    bump_rq: Option<f64>,
    #[arg(long)]
    bump_rp: Option<f64>,
    /// Phase-space grid points per axis
    #[arg(long)]
    grid_n: Option<usize>,
    /// Phase-space box half-width
    #[arg(long)]
    grid_l: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    snap_every: Option<usize>,
    #[arg(long)]
    c_min: Option<f64>,
    #[arg(long)]
    c_max: Option<f64>,
    #[arg(long)]
    c_points: Option<usize>,
    /// Output CSV path (a .manifest sidecar is written next to it)
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the algebra, group, field and representation invariant suites.
    Check {
        /// Test-harness hook: inject a known fault to verify detection.
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Time-step the oscillator phase-space dynamics and write moment
    /// series.
    Dynamics {
        #[command(flatten)]
        overrides: Overrides,
        /// Also write the final field as CSV rows q,p,f.
        #[arg(long)]
        dump_final_field: Option<String>,
    },
    /// Two-slit interference curves over the detector grid.
    Interference {
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn apply_overrides(cfg: &mut RunConfig, ov: &Overrides) -> anyhow::Result<()> {
    if let Some(v) = &ov.character {
        cfg.set("character", v)?;
    }
    if let Some(v) = &ov.state {
        cfg.set("state", v)?;
    }
    macro_rules! num {
        ($field:ident) => {
            if let Some(v) = ov.$field {
                cfg.set(stringify!($field), &v.to_string())?;
            }
        };
    }
    num!(hbar);
    num!(m);
    num!(omega);
    num!(lambda);
    num!(a);
    num!(b);
    num!(bump_rq);
    num!(bump_rp);
    num!(grid_n);
    num!(grid_l);
    num!(t_final);
    num!(dt);
    num!(snap_every);
    num!(c_min);
    num!(c_max);
    num!(c_points);
    if let Some(v) = &ov.out {
        cfg.set("out", v)?;
    }
    Ok(())
}

fn load_config(path: &Option<PathBuf>, ov: &Overrides) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(p) = path {
        cfg.load_file(p)?;
    }
    apply_overrides(&mut cfg, ov)?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_check(fault: Option<&str>) -> ExitCode {
    let fault = match fault {
        None => None,
        Some(name) => match checks::parse_fault(name) {
            Some(f) => Some(f),
            None => {
                eprintln!("config error: unknown fault '{name}'");
                return ExitCode::from(2);
            }
        },
    };
    for report in checks::run_all(fault) {
        if report.passed {
            println!("ok      {} ({})", report.name, report.detail);
        } else {
            println!("FAILED  {} ({})", report.name, report.detail);
            println!("invariant failure: {}", report.name);
            return ExitCode::from(1);
        }
    }
    println!("all invariant suites passed");
    ExitCode::SUCCESS
}

fn field_moments(f: &PhaseField) -> (f64, f64, f64, f64, f64) {
    let da = f.grid.cell_area();
    let (mut mass, mut mq, mut mp, mut vq, mut vp) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..f.grid.nx {
        let q = f.grid.x(i);
        for j in 0..f.grid.ny {
            let p = f.grid.y(j);
            let w = f.data[[i, j]] * da;
            mass += w;
            mq += q * w;
            mp += p * w;
            vq += q * q * w;
            vp += p * p * w;
        }
    }
    (mass, mq / mass, mp / mass, vq / mass, vp / mass)
}

fn dump_field(f: &PhaseField, path: &str, cfg: &RunConfig) -> anyhow::Result<()> {
    let comment = format!(
        "pmech field snapshot at t={}, character={}",
        f.time,
        cfg.character.name()
    );
    let mut csv = CsvWriter::new(&comment, &["q", "p", "f"]);
    let mut rows = 0usize;
    for i in 0..f.grid.nx {
        for j in 0..f.grid.ny {
            csv.row(&[f.grid.x(i), f.grid.y(j), f.data[[i, j]]]);
            rows += 1;
        }
    }
    csv.write(path, &cfg.echo(), rows, &[])?;
    Ok(())
}

fn cmd_dynamics(cfg: &RunConfig, dump_final_field: Option<&str>) -> anyhow::Result<ExitCode> {
    let grid = pmech_core::Grid2::square(cfg.grid_l, cfg.grid_n)
        .map_err(|e| anyhow::anyhow!("grid: {e}"))?;
    let osc = cfg.osc();
    let width = (cfg.hbar / (cfg.omega * cfg.m)).sqrt();
    let f0 = PhaseField::gaussian(grid, cfg.a + 1.5 * width, 0.0, width);
    let steps = ((cfg.t_final / cfg.dt).round() as usize).max(1);
    let dt = cfg.t_final / steps as f64;
    let with_divergence = cfg.lambda != 0.0 && cfg.character != UnitTag::Parabolic;

    let mut header = vec![
        "t", "mass", "l2_norm", "mean_q", "mean_p", "var_q", "var_p", "period_error",
    ];
    if with_divergence {
        header.push("classical_divergence");
    }
    let comment = format!(
        "pmech dynamics, character={}, oscillator units (m={}, omega={}, hbar={}, lambda={})",
        cfg.character.name(),
        cfg.m,
        cfg.omega,
        cfg.lambda,
        cfg.hbar
    );
    let mut csv = CsvWriter::new(&comment, &header);

    let norm0 = f0.l2_norm();
    let mut rows = 0usize;
    let mut emit = |f: &PhaseField, twin: Option<&PhaseField>, csv: &mut CsvWriter| {
        let (mass, mq, mp, vq, vp) = field_moments(f);
        let mut row = vec![
            f.time,
            mass,
            f.l2_norm(),
            mq,
            mp,
            vq,
            vp,
            f.l2_diff(&f0) / norm0,
        ];
        if let Some(t) = twin {
            row.push(f.l2_diff(t) / norm0);
        }
        csv.row(&row);
        rows += 1;
    };

    let mut f = f0.clone();
    let mut twin = if with_divergence { Some(f0.clone()) } else { None };
    emit(&f, twin.as_ref(), &mut csv);
    let mut done = 0usize;
    while done < steps {
        let chunk = cfg.snap_every.min(steps - done);
        let t_chunk = chunk as f64 * dt;
        f = match evolve_cubic(cfg.character, &osc, &f, cfg.hbar, t_chunk, dt) {
            Ok(next) => next,
            Err(CoreError::Instability { t, growth }) => {
                eprintln!(
                    "numeric instability at t = {:.6}: growth {growth:.3e}; try a smaller dt",
                    f.time + t
                );
                return Ok(ExitCode::from(3));
            }
            Err(e) => return Err(e.into()),
        };
        if let Some(tw) = twin.as_mut() {
            *tw = evolve_cubic(UnitTag::Parabolic, &osc, tw, cfg.hbar, t_chunk, dt)
                .map_err(|e| anyhow::anyhow!("parabolic twin: {e}"))?;
        }
        done += chunk;
        emit(&f, twin.as_ref(), &mut csv);
    }

    csv.write(&cfg.out, &cfg.echo(), rows, &[("steps".into(), steps.to_string())])?;
    if let Some(path) = dump_final_field {
        dump_field(&f, path, cfg)?;
        println!("wrote field snapshot {path}");
    }
    println!("wrote {} ({} rows) and {}.manifest", cfg.out, rows, cfg.out);
    Ok(ExitCode::SUCCESS)
}

fn cmd_interference(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let params = pmech_core::CharacterParams::new(cfg.character, cfg.hbar);
    let (v1, v2) = cfg.slit_states();
    let cs = cfg.c_grid();
    let curve = two_slit_curve(&v1, &v2, cfg.character, &params, &cs)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let a = curve.a_coefficient();

    let comment = format!(
        "pmech interference, character={}, state={}, oscillator units (m={}, omega={}, hbar={}), slits at ({}, +-{})",
        cfg.character.name(),
        cfg.state.name(),
        cfg.m,
        cfg.omega,
        cfg.hbar,
        cfg.a,
        cfg.b
    );
    let mut csv = CsvWriter::new(&comment, &["c", "p_sum", "p_full", "a_coeff", "p_dual"]);
    for i in 0..cs.len() {
        csv.row(&[cs[i], curve.p_sum[i], curve.p_full[i], a[i], curve.p_dual[i]]);
    }

    csv.write(&cfg.out, &cfg.echo(), cs.len(), &[])?;
    println!("wrote {} ({} rows) and {}.manifest", cfg.out, cs.len(), cfg.out);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Check { inject_fault } => cmd_check(inject_fault.as_deref()),
        Command::Dynamics { overrides, dump_final_field } => match load_config(&cli.config, overrides) {
            Ok(cfg) => match cmd_dynamics(&cfg, dump_final_field.as_deref()) {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            },
            Err(e) => {
                eprintln!("config error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Interference { overrides } => match load_config(&cli.config, overrides) {
            Ok(cfg) => match cmd_interference(&cfg) {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            },
            Err(e) => {
                eprintln!("config error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
