//! Subcommand implementations. Each returns a [`Table`] plus an exit code
//! through [`CliOutcome`]; `main` handles writing and process exit.

use std::path::Path;

use agewake_core::analytic::{self, IdlingKind};
use agewake_core::config::SystemConfig;
use agewake_core::error::Error as CoreError;
use agewake_core::game;
use agewake_core::optimize::{self, FreshnessMetric, P1Options, P3SolutionType};
use agewake_core::sim::{simulate, Horizon, SimParams};
use anyhow::{bail, Result};

use crate::output::{Cell, Table};
use crate::params::{GameParams, LcfsParams, OptimizeParams};
use crate::pool::ordered_map;
use crate::sweep::{apply_system_field, with_mean, Sweep};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Exit code for a core-library error.
pub fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Infeasible(_)
        | CoreError::NoFeasibleN
        | CoreError::NoEquilibrium
        | CoreError::InfeasibleParameters(_) => EXIT_INFEASIBLE,
        _ => EXIT_CONFIG,
    }
}

fn core<T>(r: Result<T, CoreError>) -> Result<T, (i32, anyhow::Error)> {
    r.map_err(|e| (core_exit_code(&e), anyhow::anyhow!("{e}")))
}

pub struct SimControls {
    pub seed: u64,
    pub cycles: u64,
    pub warmup: u64,
}

pub fn eval(cfg: &SystemConfig) -> Result<Table, (i32, anyhow::Error)> {
    let report = core(analytic::evaluate(cfg))?;
    let mut t = Table::new(
        "eval",
        vec!["source_index", "lambda", "theta", "paoi", "aoi", "energy_rate", "method"],
    );
    for (i, m) in report.per_source.iter().enumerate() {
        t.push(vec![
            Cell::Int(i as i64),
            Cell::Float(cfg.sources[i].rate),
            Cell::Float(m.theta),
            Cell::Float(m.paoi),
            Cell::Float(m.aoi),
            Cell::Float(report.energy_rate),
            Cell::Text("analytic".into()),
        ]);
    }
    Ok(t)
}

pub fn run_simulate(cfg: &SystemConfig, sc: &SimControls) -> Result<Table, (i32, anyhow::Error)> {
    let params = SimParams {
        config: cfg.clone(),
        horizon: Horizon::Cycles(sc.warmup + sc.cycles),
        seed: sc.seed,
        warmup_cycles: sc.warmup,
    };
    let sim = core(simulate(&params))?;
    let mut t = Table::new(
        "simulate",
        vec![
            "source_index",
            "lambda",
            "theta",
            "theta_se",
            "paoi",
            "paoi_ci",
            "aoi",
            "aoi_ci",
            "energy_rate",
            "energy_ci",
            "cycles",
            "method",
        ],
    );
    for (i, m) in sim.report.per_source.iter().enumerate() {
        t.push(vec![
            Cell::Int(i as i64),
            Cell::Float(cfg.sources[i].rate),
            Cell::Float(m.theta),
            Cell::Float(sim.sleep_frequency_se[i]),
            Cell::Float(m.paoi),
            Cell::Float(m.paoi_ci.unwrap_or(f64::NAN)),
            Cell::Float(m.aoi),
            Cell::Float(m.aoi_ci.unwrap_or(f64::NAN)),
            Cell::Float(sim.report.energy_rate),
            Cell::Float(sim.report.energy_ci.unwrap_or(f64::NAN)),
            Cell::Int(sim.cycles as i64),
            Cell::Text("simulated".into()),
        ]);
    }
    Ok(t)
}

/// Analytic vs simulated side by side; exit 4 when any |z| exceeds 3.
pub fn verify(cfg: &SystemConfig, sc: &SimControls) -> Result<(Table, bool), (i32, anyhow::Error)> {
    let params = SimParams {
        config: cfg.clone(),
        horizon: Horizon::Cycles(sc.warmup + sc.cycles),
        seed: sc.seed,
        warmup_cycles: sc.warmup,
    };
    let sim = core(simulate(&params))?;
    let mut t = Table::new(
        "verify",
        vec!["metric", "source_index", "analytic", "simulated", "se", "z", "pass"],
    );
    let mut all_ok = true;
    let mut push = |metric: &str, idx: Option<usize>, a: f64, s: f64, se: f64| {
        let z = (a - s).abs() / se.max(1e-300);
        let ok = (a - s).abs() <= 3.0 * se + 1e-9 * a.abs().max(1.0);
        all_ok &= ok;
        t.push(vec![
            Cell::Text(metric.into()),
            Cell::Text(idx.map_or("-".into(), |i| i.to_string())),
            Cell::Float(a),
            Cell::Float(s),
            Cell::Float(se),
            Cell::Float(z),
            Cell::Bool(ok),
        ]);
    };
    push(
        "energy_rate",
        None,
        core(analytic::energy_rate(cfg))?,
        sim.report.energy_rate,
        sim.se.energy,
    );
    for i in 0..cfg.num_sources() {
        push(
            "paoi",
            Some(i),
            core(analytic::paoi(cfg, i))?,
            sim.report.per_source[i].paoi,
            sim.se.paoi[i],
        );
        push(
            "aoi",
            Some(i),
            core(analytic::aoi(cfg, i))?,
            sim.report.per_source[i].aoi,
            sim.se.aoi[i],
        );
        push(
            "theta",
            Some(i),
            core(analytic::sleep_probability(cfg, i))?,
            sim.sleep_frequency[i],
            sim.sleep_frequency_se[i],
        );
    }
    Ok((t, all_ok))
}

/// Matched-theta comparison of HT/BS/CS over a theta grid.
pub fn compare_schemes(
    cfg: &SystemConfig,
    sweeps: &[Sweep],
    jobs: usize,
) -> Result<Table, (i32, anyhow::Error)> {
    let grid: Vec<f64> = match sweeps {
        [] => (0..=10).map(|i| i as f64 / 10.0).collect(),
        [s] if s.field == "theta" => s.values.clone(),
        _ => {
            return Err((
                EXIT_CONFIG,
                anyhow::anyhow!("compare-schemes accepts a single 'theta' sweep"),
            ))
        }
    };
    let k = cfg.num_sources();
    let points: Vec<f64> = grid;
    let rows = ordered_map(points, jobs, |&theta| {
        let th = vec![theta; k];
        let mut out = Vec::new();
        for (kind, name) in [
            (IdlingKind::Ht, "ht"),
            (IdlingKind::Bs, "bs"),
            (IdlingKind::Cs, "cs"),
        ] {
            let matched = analytic::with_matched_idling(cfg, kind, &th)
                .and_then(|c| analytic::evaluate(&c).map(|r| (c, r)));
            match matched {
                Ok((c, report)) => {
                    for (i, m) in report.per_source.iter().enumerate() {
                        out.push(Ok(vec![
                            Cell::Float(theta),
                            Cell::Text(name.into()),
                            Cell::Int(i as i64),
                            Cell::Float(c.sources[i].rate),
                            Cell::Float(m.aoi),
                            Cell::Float(m.paoi),
                            Cell::Float(report.energy_rate),
                        ]));
                    }
                }
                Err(e) => out.push(Err(e)),
            }
        }
        out
    });
    let mut t = Table::new(
        "compare-schemes",
        vec!["theta", "scheme", "source_index", "lambda", "aoi", "paoi", "energy_rate"],
    );
    for row in rows.into_iter().flatten() {
        t.push(row.map_err(|e| (core_exit_code(&e), anyhow::anyhow!("{e}")))?);
    }
    Ok(t)
}

/// Metric surfaces over one or two swept fields (e.g. n and b).
pub fn tradeoff(
    cfg: &SystemConfig,
    sweeps: &[Sweep],
    jobs: usize,
) -> Result<Table, (i32, anyhow::Error)> {
    if sweeps.is_empty() || sweeps.len() > 2 {
        return Err((
            EXIT_CONFIG,
            anyhow::anyhow!("tradeoff needs one or two --sweep axes"),
        ));
    }
    let mut points: Vec<Vec<(String, f64)>> = vec![Vec::new()];
    for s in sweeps {
        let mut next = Vec::new();
        for p in &points {
            for &v in &s.values {
                let mut q = p.clone();
                q.push((s.field.clone(), v));
                next.push(q);
            }
        }
        points = next;
    }
    let rows = ordered_map(points, jobs, |assign| {
        let mut c = cfg.clone();
        for (field, v) in assign {
            if let Err(e) = apply_system_field(&mut c, field, *v) {
                return vec![Err((EXIT_CONFIG, e))];
            }
        }
        match analytic::evaluate(&c) {
            Ok(report) => (0..c.num_sources())
                .map(|i| {
                    let mut row: Vec<Cell> =
                        assign.iter().map(|(_, v)| Cell::Float(*v)).collect();
                    row.extend([
                        Cell::Int(i as i64),
                        Cell::Float(report.per_source[i].theta),
                        Cell::Float(report.per_source[i].paoi),
                        Cell::Float(report.per_source[i].aoi),
                        Cell::Float(report.energy_rate),
                    ]);
                    Ok(row)
                })
                .collect(),
            Err(e) => vec![Err((core_exit_code(&e), anyhow::anyhow!("{e}")))],
        }
    });
    let mut columns: Vec<String> = sweeps.iter().map(|s| s.field.clone()).collect();
    columns.extend(
        ["source_index", "theta", "paoi", "aoi", "energy_rate"].map(String::from),
    );
    let mut t = Table::new("tradeoff", columns);
    for row in rows.into_iter().flatten() {
        t.push(row?);
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OptimizeMode {
    P3,
    P1Paoi,
    P1Aoi,
}

fn p3_type_name(t: P3SolutionType) -> &'static str {
    match t {
        P3SolutionType::Type1 => "type1",
        P3SolutionType::Type2 => "type2",
        P3SolutionType::Type3 => "type3",
        P3SolutionType::Infeasible => "infeasible",
    }
}

fn apply_optimize_field(p: &mut OptimizeParams, field: &str, value: f64) -> Result<()> {
    match field {
        "setup_mean" => p.setup = with_mean(&p.setup, value)?,
        "power.busy" => p.power.busy = value,
        "power.idle" => p.power.idle = value,
        "power.sleep" => p.power.sleep = value,
        "power.setup" => p.power.setup = value,
        "power.detect" => p.power.detect = value,
        "tau" => p.tau.iter_mut().for_each(|t| *t = value),
        "lambda" => {
            let total: f64 = p.sources.iter().map(|s| s.rate).sum();
            let f = value / total;
            p.sources.iter_mut().for_each(|s| s.rate *= f);
        }
        other => bail!("unknown optimize sweep field '{other}'"),
    }
    Ok(())
}

pub fn optimize(
    path: &Path,
    mode: OptimizeMode,
    n_cap: Option<u32>,
    sweeps: &[Sweep],
    jobs: usize,
) -> Result<(Table, i32), (i32, anyhow::Error)> {
    let base = OptimizeParams::load(path).map_err(|e| (EXIT_CONFIG, e))?;
    match mode {
        OptimizeMode::P3 => {
            if base.sources.len() != 1 {
                return Err((
                    EXIT_CONFIG,
                    anyhow::anyhow!("the closed-form mode handles a single source"),
                ));
            }
            if sweeps.len() > 2 {
                return Err((EXIT_CONFIG, anyhow::anyhow!("at most two sweep axes")));
            }
            let mut points: Vec<Vec<(String, f64)>> = vec![Vec::new()];
            for s in sweeps {
                let mut next = Vec::new();
                for p in &points {
                    for &v in &s.values {
                        let mut q = p.clone();
                        q.push((s.field.clone(), v));
                        next.push(q);
                    }
                }
                points = next;
            }
            let rows = ordered_map(points, jobs, |assign| -> Result<Vec<Cell>, (i32, anyhow::Error)> {
                let mut p = OptimizeParams::load(path).map_err(|e| (EXIT_CONFIG, e))?;
                for (field, v) in assign {
                    apply_optimize_field(&mut p, field, *v).map_err(|e| (EXIT_CONFIG, e))?;
                }
                let sol = core(optimize::solve_p3(
                    p.sources[0].rate,
                    &p.sources[0].service,
                    &p.setup,
                    &p.power,
                    p.tau[0],
                ))?;
                let mut row: Vec<Cell> = assign.iter().map(|(_, v)| Cell::Float(*v)).collect();
                row.extend([
                    Cell::Text(p3_type_name(sol.solution_type).into()),
                    Cell::Float(sol.theta),
                    Cell::Float(sol.n),
                    Cell::Float(sol.energy),
                    Cell::Bool(sol.asymptotic),
                ]);
                Ok(row)
            });
            let mut columns: Vec<String> = sweeps.iter().map(|s| s.field.clone()).collect();
            columns.extend(
                ["solution_type", "theta", "n", "energy", "asymptotic"].map(String::from),
            );
            let mut t = Table::new("optimize-p3", columns);
            let mut any_asymptotic = false;
            let mut any_feasible = false;
            for row in rows {
                let row = row?;
                if let Cell::Bool(a) = row[row.len() - 1] {
                    any_asymptotic |= a;
                }
                if let Cell::Text(ty) = &row[sweeps.len()] {
                    any_feasible |= ty != "infeasible";
                }
                t.push(row);
            }
            if any_asymptotic {
                eprintln!(
                    "note: some optima are asymptotic (sleep length unbounded, sleep \
                     probability tending to zero); they are reported as limits and are \
                     impractical to operate"
                );
            }
            let code = if any_feasible { 0 } else { EXIT_INFEASIBLE };
            Ok((t, code))
        }
        OptimizeMode::P1Paoi | OptimizeMode::P1Aoi => {
            if !sweeps.is_empty() {
                return Err((
                    EXIT_CONFIG,
                    anyhow::anyhow!("the enumerated mode emits its own per-N table; drop --sweep"),
                ));
            }
            let metric = if mode == OptimizeMode::P1Paoi {
                FreshnessMetric::Paoi
            } else {
                FreshnessMetric::Aoi
            };
            let opts = P1Options { n_cap: n_cap.unwrap_or(base.n_cap), metric };
            let sol = core(optimize::solve_p1(
                &base.sources,
                &base.setup,
                &base.power,
                &base.tau,
                &opts,
            ))?;
            let k = base.sources.len();
            let mut columns: Vec<String> =
                ["n", "feasible", "best", "energy"].map(String::from).to_vec();
            for i in 0..k {
                columns.push(format!("theta_{i}"));
            }
            for i in 0..k {
                columns.push(format!("b_{i}"));
            }
            let mut t = Table::new("optimize-p1", columns);
            for row in &sol.rows {
                let mut cells = vec![
                    Cell::Int(row.n as i64),
                    Cell::Bool(row.feasible),
                    Cell::Bool(row.feasible && row.n == sol.n),
                    Cell::Float(row.energy),
                ];
                for i in 0..k {
                    cells.push(Cell::Float(row.theta.get(i).copied().unwrap_or(f64::NAN)));
                }
                for i in 0..k {
                    cells.push(Cell::Float(row.b.get(i).copied().unwrap_or(f64::NAN)));
                }
                t.push(cells);
            }
            if sol.optimum_at_cap {
                eprintln!(
                    "note: the optimum sits at the enumeration cap (N = {}); the true \
                     optimum may lie beyond it",
                    sol.n
                );
            }
            Ok((t, 0))
        }
    }
}

/// Minimal energy under a PAoI cap for the LCFS stack and the single-buffer
/// server, over an optional lambda sweep.
pub fn lcfs_compare(
    path: &Path,
    sweeps: &[Sweep],
    jobs: usize,
) -> Result<(Table, i32), (i32, anyhow::Error)> {
    let base = LcfsParams::load(path).map_err(|e| (EXIT_CONFIG, e))?;
    let lambdas: Vec<f64> = match sweeps {
        [] => vec![base.lambda],
        [s] if s.field == "lambda" => s.values.clone(),
        _ => {
            return Err((
                EXIT_CONFIG,
                anyhow::anyhow!("lcfs-compare accepts a single 'lambda' sweep"),
            ))
        }
    };
    let rows = ordered_map(lambdas, jobs, |&lambda| -> Option<Vec<Cell>> {
        if lambda * base.service.mean() >= 1.0 {
            return None; // LCFS unstable here
        }
        let sb = optimize::solve_p3(lambda, &base.service, &base.setup, &base.power, base.tau)
            .ok()?;
        // exhaustive grid for the LCFS side
        let mut best: Option<(f64, u32, f64)> = None;
        for n in 1..=base.n_cap {
            for step in 0..=200 {
                let theta = step as f64 / 200.0;
                let paoi =
                    analytic::lcfs_paoi(lambda, &base.service, &base.setup, theta, n).ok()?;
                if paoi <= base.tau {
                    let e = analytic::lcfs_energy(
                        lambda,
                        &base.service,
                        &base.setup,
                        theta,
                        n,
                        &base.power,
                    )
                    .ok()?;
                    if best.is_none_or(|(be, _, _)| e < be) {
                        best = Some((e, n, theta));
                    }
                }
            }
        }
        let (lcfs_e, lcfs_n, lcfs_theta) = best?;
        Some(vec![
            Cell::Float(lambda),
            Cell::Float(sb.energy),
            Cell::Text(p3_type_name(sb.solution_type).into()),
            Cell::Bool(sb.asymptotic),
            Cell::Float(lcfs_e),
            Cell::Int(lcfs_n as i64),
            Cell::Float(lcfs_theta),
        ])
    });
    let mut t = Table::new(
        "lcfs-compare",
        vec![
            "lambda",
            "single_buffer_energy",
            "single_buffer_type",
            "single_buffer_asymptotic",
            "lcfs_energy",
            "lcfs_n",
            "lcfs_theta",
        ],
    );
    let mut emitted = 0;
    for row in rows.into_iter().flatten() {
        t.push(row);
        emitted += 1;
    }
    let code = if emitted == 0 { EXIT_INFEASIBLE } else { 0 };
    Ok((t, code))
}

pub fn run_game(path: &Path) -> Result<Table, (i32, anyhow::Error)> {
    let spec = GameParams::load(path).map_err(|e| (EXIT_CONFIG, e))?;
    let sol = core(game::algorithm1(&spec))?;
    let k = spec.services.len();
    let mut columns: Vec<String> =
        ["n", "feasible", "best", "energy", "max_residual"].map(String::from).to_vec();
    for i in 0..k {
        columns.push(format!("rate_{i}"));
    }
    for i in 0..k {
        columns.push(format!("cost_{i}"));
    }
    let mut t = Table::new("game", columns);
    for row in &sol.table {
        let mut cells = vec![
            Cell::Int(row.n as i64),
            Cell::Bool(row.feasible),
            Cell::Bool(row.feasible && row.n == sol.best.n),
            Cell::Float(row.energy),
            Cell::Float(row.max_residual),
        ];
        for i in 0..k {
            cells.push(Cell::Float(row.rates.get(i).copied().unwrap_or(f64::NAN)));
        }
        for i in 0..k {
            cells.push(Cell::Float(row.costs.get(i).copied().unwrap_or(f64::NAN)));
        }
        t.push(cells);
    }
    Ok(t)
}

pub fn load_config(path: &Path) -> Result<SystemConfig, (i32, anyhow::Error)> {
    crate::params::load_system_config(path).map_err(|e| (EXIT_CONFIG, e))
}

pub fn context_config(e: anyhow::Error) -> (i32, anyhow::Error) {
    (EXIT_CONFIG, e.context("configuration error"))
}
