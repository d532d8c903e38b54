use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use torus_core::connection::{solve_d, verify, VerifyConfig, ZeroSearch};
use torus_core::dulac::{measure, PerturbedSaddle, SaddleSpec};
use torus_core::field::{FieldParams, Vec2};
use torus_core::flow::{Branch, StopSpec, TorusFlow};
use torus_core::portrait::{self, PortraitOptions};
use torus_core::rotation::{
    e_phi_equiv, rotation_number, rotation_number_checked, Decision, EquivVerdict, MeridianReturn,
    RigidRotation,
};
use torus_core::singularity::{find_zeros, order_saddles};
use torus_core::synthetic::{build, decomposition, equivalence_oracle};

use crate::config::{header, RunConfig, OUT_DIR_ENV};
use crate::{Command, DulacField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    CheckFailed,
}

type Header = Vec<(String, String)>;

fn kv_text(header: &Header) -> String {
    header.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

fn csv_comment(header: &Header) -> String {
    header.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
}

fn write_to(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

/// Writes to `--out` / the output directory, or stdout.
fn emit(cfg: &RunConfig, default_name: &str, content: &str) -> Result<()> {
    match cfg.output_path(default_name) {
        Some(path) => {
            if cfg.out.is_none() {
                if let Some(dir) = path.parent() {
                    fs::create_dir_all(dir)
                        .with_context(|| format!("creating {OUT_DIR_ENV} directory {}", dir.display()))?;
                }
            }
            write_to(&path, content)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn search(cfg: &RunConfig) -> ZeroSearch {
    ZeroSearch {
        mesh_n: cfg.mesh_n,
        tol: cfg.tol,
    }
}

/// `(phi, b, c, d)` with `d` solved on the connection surface when not given.
fn params(cfg: &RunConfig) -> Result<(FieldParams, bool)> {
    match cfg.d {
        Some(d) => Ok((FieldParams::new(cfg.phi, cfg.b, cfg.c, d), false)),
        None => {
            let sol = solve_d(cfg.phi, cfg.b, cfg.c, cfg.connection_tol, search(cfg))
                .map_err(|e| anyhow!("solving for d = D({}, {}, {}): {e}", cfg.phi, cfg.b, cfg.c))?;
            Ok((sol.params(), true))
        }
    }
}

fn params_entries(p: &FieldParams, solved: bool) -> Vec<(&'static str, String)> {
    vec![
        ("field.phi", format!("{:?}", p.phi)),
        ("field.b", format!("{:?}", p.b)),
        ("field.c", format!("{:?}", p.c)),
        ("field.d", format!("{:?}", p.d)),
        ("field.d_solved", solved.to_string()),
    ]
}

pub fn run(command: &Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Verify { csv } => cmd_verify(cfg, csv.as_deref()),
        Command::Portrait { pixels } => cmd_portrait(cfg, *pixels),
        Command::Sweep => cmd_sweep(cfg),
        Command::Equiv { rho1, rho2, rotation } => cmd_equiv(cfg, *rho1, *rho2, *rotation),
        Command::Rotation { alpha, iters, x0 } => cmd_rotation(cfg, *alpha, *iters, *x0),
        Command::Dulac {
            lambda1,
            lambda2,
            field,
            mu,
            coupling,
            saddle,
            h,
            x_min,
            x_max,
            samples,
        } => cmd_dulac(
            cfg,
            DulacArgs {
                lambda1: *lambda1,
                lambda2: *lambda2,
                field: *field,
                mu: *mu,
                coupling: *coupling,
                saddle: *saddle,
                h: *h,
                x_min: *x_min,
                x_max: *x_max,
                samples: *samples,
            },
        ),
        Command::SyntheticEquiv {
            rho1,
            phi1,
            rho2,
            phi2,
        } => cmd_synthetic_equiv(cfg, (*rho1, *phi1), (*rho2, *phi2)),
        Command::Trace {
            x0,
            y0,
            time,
            backward,
            saddle,
            branch,
        } => cmd_trace(cfg, Vec2::new(*x0, *y0), *time, *backward, *saddle, branch),
    }
}

fn cmd_verify(cfg: &RunConfig, csv: Option<&Path>) -> Result<Outcome> {
    let vcfg = VerifyConfig {
        phi: cfg.phi,
        b: cfg.b,
        c_range: cfg.c_range,
        d_range: cfg.d_range,
        grid_n: cfg.grid_n,
        search: search(cfg),
        connection_tol: cfg.connection_tol,
        ..VerifyConfig::default()
    };
    let report = verify(&vcfg);
    let head = header("verify", cfg, &[]);
    emit(cfg, "verify.txt", &report.render(&head))?;
    if let Some(path) = csv {
        write_to(path, &(csv_comment(&head) + &report.rows_csv()))?;
    }
    Ok(if report.passed() {
        Outcome::Pass
    } else {
        Outcome::CheckFailed
    })
}

fn cmd_portrait(cfg: &RunConfig, pixels: u32) -> Result<Outcome> {
    let (p, solved) = params(cfg)?;
    let opts = PortraitOptions {
        mesh_n: cfg.mesh_n,
        tol: cfg.tol,
        pixels,
        ..PortraitOptions::default()
    };
    let extra = params_entries(&p, solved);
    let portrait = portrait::compute(p, &opts).map_err(|e| anyhow!("portrait: {e}"))?;
    let lines: Vec<String> = header("portrait", cfg, &extra)
        .into_iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    emit(cfg, "portrait.svg", &portrait::render_svg(&portrait, &lines, pixels))?;
    Ok(Outcome::Pass)
}

fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let n = cfg.grid_n;
    let mut body = String::from("c,d_star,rho,derivative\n");
    let mut failed = false;
    for i in 0..n {
        let c = if n == 1 {
            cfg.c_range.0
        } else {
            cfg.c_range.0 + (cfg.c_range.1 - cfg.c_range.0) * i as f64 / (n - 1) as f64
        };
        match solve_d(cfg.phi, cfg.b, c, cfg.connection_tol, search(cfg)) {
            Ok(s) => {
                let _ = writeln!(body, "{c:.10},{:.10},{:.10},{:.10}", s.d_star, s.rho, s.d_delta_dd);
            }
            Err(e) => {
                failed = true;
                eprintln!("c = {c}: {e}");
                let _ = writeln!(body, "{c:.10},nan,nan,nan");
            }
        }
    }
    let head = header("sweep", cfg, &[]);
    emit(cfg, "sweep.csv", &(csv_comment(&head) + &body))?;
    Ok(if failed { Outcome::CheckFailed } else { Outcome::Pass })
}

fn verdict_lines(v: &EquivVerdict) -> String {
    let mut s = String::new();
    let (verdict, witness) = match v.decision {
        Decision::Equivalent(n) => ("equivalent".to_string(), n.to_string()),
        Decision::NotEquivalentUpTo(n) => (format!("not_equivalent_up_to({n})"), "none".into()),
        Decision::NotEquivalent => ("not_equivalent".to_string(), "none".into()),
    };
    let _ = writeln!(s, "verdict={verdict}");
    let _ = writeln!(s, "witness={witness}");
    let _ = writeln!(s, "residual={:e}", v.residual);
    let _ = writeln!(s, "search_horizon={}", v.horizon);
    let _ = writeln!(s, "search_eps={:e}", v.eps);
    s
}

fn cmd_equiv(cfg: &RunConfig, rho1: f64, rho2: f64, phi: f64) -> Result<Outcome> {
    let extra = [
        ("rho1", format!("{rho1:?}")),
        ("rho2", format!("{rho2:?}")),
        ("equiv_phi", format!("{phi:?}")),
    ];
    let v = e_phi_equiv(rho1, rho2, phi, cfg.horizon, cfg.eps);
    let text = kv_text(&header("equiv", cfg, &extra)) + &verdict_lines(&v);
    emit(cfg, "equiv.txt", &text)?;
    Ok(Outcome::Pass)
}

fn cmd_rotation(cfg: &RunConfig, alpha: Option<f64>, iters: usize, x0: f64) -> Result<Outcome> {
    let mut extra = vec![
        ("iters", iters.to_string()),
        ("x0", format!("{x0:?}")),
    ];
    let est = match alpha {
        Some(a) => {
            extra.push(("map", format!("rigid({a:?})")));
            rotation_number(&RigidRotation(a), x0, iters)?
        }
        None => {
            let (p, solved) = params(cfg)?;
            extra.push(("map", "meridian_return".into()));
            extra.extend(params_entries(&p, solved));
            let flow = TorusFlow::compute(p, cfg.mesh_n, cfg.tol)?;
            rotation_number_checked(&MeridianReturn(&flow), x0, iters, 16)
                .map_err(|e| anyhow!("meridian return map: {e}"))?
        }
    };
    let mut text = kv_text(&header("rotation", cfg, &extra));
    let _ = writeln!(text, "rotation_number={:.15}", est.value);
    let _ = writeln!(text, "error_bound={:e}", est.error_bound);
    let _ = writeln!(text, "convergent={}/{}", est.convergent.0, est.convergent.1);
    let _ = writeln!(text, "iterations={}", est.iterations);
    emit(cfg, "rotation.txt", &text)?;
    Ok(Outcome::Pass)
}

pub struct DulacArgs {
    lambda1: f64,
    lambda2: f64,
    field: DulacField,
    mu: f64,
    coupling: f64,
    saddle: usize,
    h: Option<f64>,
    x_min: f64,
    x_max: Option<f64>,
    samples: usize,
}

fn cmd_dulac(cfg: &RunConfig, a: DulacArgs) -> Result<Outcome> {
    let mut extra: Vec<(&str, String)> = Vec::new();
    let (spec, h, x_max) = match a.field {
        DulacField::Linear => {
            extra.push(("model", format!("linear({:?},{:?})", a.lambda1, a.lambda2)));
            let h = a.h.unwrap_or(1.0);
            let spec = SaddleSpec::Linear {
                stable: a.lambda1,
                unstable: a.lambda2,
            };
            (spec, h, a.x_max.unwrap_or(h / 10.0))
        }
        DulacField::Perturbed => {
            extra.push(("model", format!("perturbed({:?},{:?})", a.mu, a.coupling)));
            let spec = SaddleSpec::Perturbed(PerturbedSaddle {
                mu: a.mu,
                coupling: a.coupling,
            });
            (spec, a.h.unwrap_or(1.0), a.x_max.unwrap_or(1e-3))
        }
        DulacField::Torus => {
            let (p, solved) = params(cfg)?;
            extra.push(("model", format!("torus_saddle({})", a.saddle)));
            extra.extend(params_entries(&p, solved));
            let triple = order_saddles(&find_zeros(&p, cfg.mesh_n, cfg.tol)?)?;
            let saddle = *triple
                .as_array()
                .get(a.saddle.wrapping_sub(1))
                .ok_or_else(|| anyhow!("--saddle must be 1, 2 or 3"))?;
            let spec = SaddleSpec::Hamiltonian { params: p, saddle };
            (spec, a.h.unwrap_or(0.1), a.x_max.unwrap_or(1e-2))
        }
    };
    extra.push(("h", format!("{h:?}")));
    extra.push(("x_range", format!("{:?},{:?}", a.x_min, x_max)));
    extra.push(("samples", a.samples.to_string()));
    let fit = measure(&spec, h, a.x_min, x_max, a.samples)?;
    let samples = torus_core::dulac::dulac_samples(
        &spec,
        h,
        &torus_core::dulac::log_spaced(a.x_min, x_max, a.samples),
    )?;
    let mut head = header("dulac", cfg, &extra);
    head.push((
        "mu_true".into(),
        fit.mu_true.map(|m| format!("{m:.12}")).unwrap_or_else(|| "none".into()),
    ));
    head.push(("mu_hat".into(), format!("{:.12}", fit.mu_hat)));
    head.push(("c_hat".into(), format!("{:.12}", fit.c_hat)));
    head.push(("residual".into(), format!("{:e}", fit.residual)));
    let mut body = String::from("x,y,fit_y\n");
    for (x, y) in samples {
        let _ = writeln!(body, "{x:.12e},{y:.12e},{:.12e}", fit.c_hat * x.powf(fit.mu_hat));
    }
    emit(cfg, "dulac.csv", &(csv_comment(&head) + &body))?;
    Ok(Outcome::Pass)
}

fn cmd_synthetic_equiv(cfg: &RunConfig, first: (f64, f64), second: (f64, f64)) -> Result<Outcome> {
    let extra = [
        ("field1", format!("{:?},{:?}", first.0, first.1)),
        ("field2", format!("{:?},{:?}", second.0, second.1)),
    ];
    let f1 = build(first.0, first.1)?;
    let f2 = build(second.0, second.1)?;
    let v = equivalence_oracle(&f1, &f2, cfg.horizon, cfg.eps)?;
    let mut text = kv_text(&header("synthetic-equiv", cfg, &extra)) + &verdict_lines(&v);
    if let Some(n) = v.witness() {
        // rho2 = rho1 + n phi: the arcs start from whichever field sits behind
        let (base, k) = if n >= 0 { (f1.rho, n) } else { (f2.rho, -n) };
        let ahead = (base + k as f64 * f1.phi).rem_euclid(1.0);
        let dec = decomposition(ahead, base, f1.phi, k)?;
        let _ = writeln!(text, "decomposition.eps={:e}", dec.eps);
        text.push('\n');
        text.push_str(&dec.to_csv());
    }
    emit(cfg, "synthetic-equiv.txt", &text)?;
    Ok(Outcome::Pass)
}

fn parse_branch(name: &str) -> Result<Branch> {
    Branch::ALL
        .into_iter()
        .find(|b| b.name() == name)
        .ok_or_else(|| {
            let names: Vec<&str> = Branch::ALL.iter().map(|b| b.name()).collect();
            anyhow!("unknown branch '{name}', expected one of {}", names.join(", "))
        })
}

fn cmd_trace(
    cfg: &RunConfig,
    start: Vec2,
    time: f64,
    backward: bool,
    saddle: Option<usize>,
    branch: &str,
) -> Result<Outcome> {
    if !(time > 0.0) {
        bail!("--time must be positive");
    }
    let (p, solved) = params(cfg)?;
    let mut extra = params_entries(&p, solved);
    let mut flow = TorusFlow::compute(p, cfg.mesh_n, cfg.tol)?;
    flow.opts.t_max = time;
    let traj = match saddle {
        Some(k) => {
            let triple = order_saddles(&flow.zeros)?;
            let s = *triple
                .as_array()
                .get(k.wrapping_sub(1))
                .ok_or_else(|| anyhow!("--saddle must be 1, 2 or 3"))?;
            let b = parse_branch(branch)?;
            extra.push(("separatrix", format!("s{k}:{}", b.name())));
            flow.trace_separatrix(&s, b, 0)?.trajectory
        }
        None => {
            extra.push(("start", format!("{:?},{:?}", start.x, start.y)));
            extra.push(("backward", backward.to_string()));
            let dir = if backward { -1.0 } else { 1.0 };
            flow.integrate(start, dir, &StopSpec::until(time))?
        }
    };
    extra.push(("time", format!("{time:?}")));
    let mut head = header("trace", cfg, &extra);
    head.push((
        "max_level_drift".into(),
        traj.max_level_drift.map(|d| format!("{d:e}")).unwrap_or_default(),
    ));
    head.push(("terminal".into(), format!("{:?}", traj.terminal)));
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    let body = String::from_utf8(buf).expect("csv is ascii");
    emit(cfg, "trace.csv", &(csv_comment(&head) + &body))?;
    Ok(Outcome::Pass)
}

