//! Command implementations. Each returns `Err(Failure)` carrying the exit code.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use pouw_core::{
    best_response_dynamics, decentralization_coefficient, decomposition_report, evaluate_schedule,
    numeric_best_response, optimal_schedule, solve_general, uniform_schedule,
    EquilibriumSolution64, Error, Scenario64, SolverConfig64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numfmt::{full, short};
use crate::report::{write_solution_csv, write_sweep_csv};
use crate::scenario_file::{read_scenario, ScenarioFile};
use crate::svg::{line_chart, Series};
use crate::sweep::{run_sweep, SweepParam, SweepSpec};
use crate::{Cli, Command, GlobalOpts, EXIT_BOUND, EXIT_INPUT, EXIT_SOLVER, EXIT_VERIFY};

/// Deviation allowed between the solver and each oracle check in `verify`.
pub const VERIFY_TOL: f64 = 1e-6;
pub const VERIFY_STARTS: usize = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self::new(EXIT_INPUT, message)
    }

    fn solver(e: &Error) -> Self {
        Self::new(EXIT_SOLVER, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(format!("i/o: {e}"))
    }
}

type CmdResult = Result<(), Failure>;

pub fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let g = &cli.global;
    if g.svg.is_some() && !matches!(cli.command, Command::Sweep { .. }) {
        writeln!(err, "warning: --svg is only used by `sweep`")?;
    }
    match &cli.command {
        Command::Solve { scenario } => cmd_solve(g, scenario, out),
        Command::Verify { scenario } => cmd_verify(g, scenario, out),
        Command::Schedule {
            alpha,
            budget,
            blocks,
            rho,
        } => cmd_schedule(g, *alpha, *budget, *blocks, *rho, out),
        Command::Decentralization { scenario } => cmd_decentralization(g, scenario, out),
        Command::Sweep {
            scenario,
            param,
            values,
            from,
            to,
            steps,
        } => {
            let parameter: SweepParam = param.parse().map_err(Failure::input)?;
            let spec = match (from, to, steps) {
                (Some(f), Some(t), Some(s)) => SweepSpec::grid(parameter, *f, *t, *s),
                _ => SweepSpec::list(parameter, values.clone()),
            }
            .map_err(Failure::input)?;
            cmd_sweep(g, scenario, &spec, out)
        }
    }
}

pub fn solver_config(g: &GlobalOpts) -> Result<SolverConfig64, Failure> {
    let mut cfg = SolverConfig64::default();
    if let Some(v) = g.h_max {
        cfg.h_max = v;
    }
    if let Some(v) = g.fp_tol {
        cfg.fp_tol = v;
    }
    if let Some(v) = g.foc_tol {
        cfg.foc_tol = v;
    }
    if let Some(v) = g.max_iters {
        cfg.max_iters = v;
    }
    cfg.validate().map_err(|e| Failure::input(e.to_string()))?;
    Ok(cfg)
}

fn load(path: &Path) -> Result<ScenarioFile, Failure> {
    read_scenario(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn base(g: &GlobalOpts, file: &ScenarioFile) -> f64 {
    g.base.unwrap_or(file.entropy_base).0
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", path.display())))
}

/// Right-aligned plain-text table.
fn print_table(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| -> String {
        cells
            .zip(&widths)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    writeln!(out, "{}", line(&mut header.iter().copied()))?;
    for row in rows {
        writeln!(out, "{}", line(&mut row.iter().map(String::as_str)))?;
    }
    Ok(())
}

fn solution_table(
    out: &mut dyn Write,
    scenario: &Scenario64,
    solution: &EquilibriumSolution64,
) -> io::Result<()> {
    let shares = solution.shares();
    let rows: Vec<Vec<String>> = scenario
        .miners()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            vec![
                m.id().to_owned(),
                short(m.alpha()),
                short(m.beta()),
                short(solution.hash_rates[i]),
                short(shares[i]),
                short(solution.utilities[i]),
                short(solution.residuals[i]),
            ]
        })
        .collect();
    print_table(
        out,
        &[
            "id",
            "alpha",
            "beta",
            "hash_rate",
            "share",
            "utility",
            "foc_residual",
        ],
        &rows,
    )
}

fn solve(file: &ScenarioFile, cfg: &SolverConfig64) -> Result<EquilibriumSolution64, Failure> {
    solve_general(&file.scenario, cfg).map_err(|e| Failure::solver(&e))
}

pub fn cmd_solve(g: &GlobalOpts, path: &Path, out: &mut dyn Write) -> CmdResult {
    let file = load(path)?;
    let cfg = solver_config(g)?;
    let base = base(g, &file);
    let solution = solve(&file, &cfg)?;
    let d = decentralization_coefficient(&solution.hash_rates, base)
        .map_err(|e| Failure::solver(&e))?;

    solution_table(out, &file.scenario, &solution)?;
    writeln!(out)?;
    writeln!(out, "total hash rate H  {}", short(solution.total_hash))?;
    writeln!(out, "decentralization   {}", short(d))?;
    writeln!(
        out,
        "method             {} ({} iterations)",
        solution.solver.method.as_str(),
        solution.solver.iterations
    )?;

    if let Some(p) = &g.out {
        let mut w = create(p)?;
        write_solution_csv(&mut w, &file.scenario, &solution, d)?;
        w.flush()?;
    }
    Ok(())
}

/// One oracle comparison performed by `verify`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub kind: &'static str,
    pub start: Option<usize>,
    pub miner: String,
    pub expected: f64,
    pub observed: f64,
    pub deviation: f64,
    pub note: Option<String>,
}

/// Multiplicative jitter `10^U(-1, 1)` around the equilibrium.
pub fn random_starts(solution: &[f64], seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            solution
                .iter()
                .map(|&h| {
                    let h = if h > 0.0 { h } else { 1.0 };
                    h * 10f64.powf(rng.gen_range(-1.0..1.0))
                })
                .collect()
        })
        .collect()
}

pub fn verify_checks(
    scenario: &Scenario64,
    solution: &EquilibriumSolution64,
    cfg: &SolverConfig64,
    seed: u64,
) -> Vec<Check> {
    let mut checks = Vec::new();
    for (i, m) in scenario.miners().iter().enumerate() {
        let h = solution.hash_rates[i];
        let others = solution.total_hash - h;
        let (observed, note) = match numeric_best_response(m, others, scenario.reward(), cfg) {
            Ok(br) => (br.h_star, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        checks.push(Check {
            kind: "best_response",
            start: None,
            miner: m.id().to_owned(),
            expected: h,
            observed,
            deviation: (observed - h).abs(),
            note,
        });
    }

    for (s, start) in random_starts(&solution.hash_rates, seed, VERIFY_STARTS)
        .iter()
        .enumerate()
    {
        let (profile, note) = match best_response_dynamics(scenario, start, cfg) {
            Ok(run) => (run.solution.hash_rates, None),
            Err(f) => {
                let last = f.trajectory.last().cloned();
                let profile = last.unwrap_or_else(|| vec![f64::NAN; scenario.len()]);
                (profile, Some(f.error.to_string()))
            }
        };
        for (i, m) in scenario.miners().iter().enumerate() {
            let expected = solution.hash_rates[i];
            checks.push(Check {
                kind: "dynamics",
                start: Some(s),
                miner: m.id().to_owned(),
                expected,
                observed: profile[i],
                deviation: (profile[i] - expected).abs(),
                note: note.clone(),
            });
        }
    }
    checks
}

fn passes(c: &Check) -> bool {
    c.note.is_none() && c.deviation <= VERIFY_TOL
}

pub fn cmd_verify(g: &GlobalOpts, path: &Path, out: &mut dyn Write) -> CmdResult {
    let file = load(path)?;
    let cfg = solver_config(g)?;
    let solution = solve(&file, &cfg)?;
    let checks = verify_checks(&file.scenario, &solution, &cfg, g.seed);

    writeln!(
        out,
        "solved with {} ({} iterations), H = {}",
        solution.solver.method.as_str(),
        solution.solver.iterations,
        short(solution.total_hash)
    )?;
    writeln!(out, "dynamics: {VERIFY_STARTS} starts from seed {}", g.seed)?;
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.kind.to_owned(),
                c.start.map(|s| s.to_string()).unwrap_or_else(|| "-".into()),
                c.miner.clone(),
                short(c.expected),
                short(c.observed),
                short(c.deviation),
                if passes(c) { "ok" } else { "FAIL" }.to_owned(),
            ]
        })
        .collect();
    print_table(
        out,
        &[
            "check",
            "start",
            "miner",
            "expected",
            "observed",
            "deviation",
            "status",
        ],
        &rows,
    )?;

    let max_dev = checks.iter().map(|c| c.deviation).fold(0.0f64, |a, d| {
        if d.is_nan() {
            f64::INFINITY
        } else {
            a.max(d)
        }
    });
    writeln!(out)?;
    writeln!(out, "max deviation      {}", short(max_dev))?;

    if let Some(p) = &g.out {
        let mut w = csv::WriterBuilder::new()
            .flexible(true)
            .from_writer(create(p)?);
        let e = |e: csv::Error| Failure::input(e.to_string());
        w.write_record([
            "check",
            "start",
            "miner_id",
            "expected",
            "observed",
            "deviation",
            "note",
        ])
        .map_err(e)?;
        for c in &checks {
            w.write_record([
                c.kind.to_owned(),
                c.start.map(|s| s.to_string()).unwrap_or_default(),
                c.miner.clone(),
                full(c.expected),
                full(c.observed),
                full(c.deviation),
                c.note.clone().unwrap_or_default(),
            ])
            .map_err(e)?;
        }
        w.write_record(["# seed", &g.seed.to_string()]).map_err(e)?;
        w.write_record(["# max_deviation", &full(max_dev)])
            .map_err(e)?;
        w.flush()?;
    }

    let failed: Vec<&Check> = checks.iter().filter(|c| !passes(c)).collect();
    if failed.is_empty() {
        writeln!(out, "all checks within {}", short(VERIFY_TOL))?;
        return Ok(());
    }
    let list = failed
        .iter()
        .map(|c| {
            let mut s = format!("{} {}", c.kind, c.miner);
            if let Some(k) = c.start {
                s.push_str(&format!(" (start {k})"));
            }
            s.push_str(&format!(": deviation {}", short(c.deviation)));
            if let Some(n) = &c.note {
                s.push_str(&format!(" [{n}]"));
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ");
    Err(Failure::new(
        EXIT_VERIFY,
        format!(
            "{} of {} checks exceed {}: {list}",
            failed.len(),
            checks.len(),
            short(VERIFY_TOL)
        ),
    ))
}

fn fmt_alloc(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| short(x)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn cmd_schedule(
    g: &GlobalOpts,
    alpha: f64,
    budget: f64,
    blocks: usize,
    rho: f64,
    out: &mut dyn Write,
) -> CmdResult {
    let bad = |e: Error| Failure::input(e.to_string());
    let best = optimal_schedule(alpha, budget, blocks, rho).map_err(bad)?;
    let split = uniform_schedule(budget, blocks).map_err(bad)?;
    let best_eval = evaluate_schedule(alpha, &best, rho).map_err(bad)?;
    let split_eval = evaluate_schedule(alpha, &split, rho).map_err(bad)?;
    let gain = (best_eval.total_utility - split_eval.total_utility).max(0.0);

    writeln!(out, "optimal schedule   {}", fmt_alloc(best.allocation()))?;
    writeln!(out, "uniform schedule   {}", fmt_alloc(split.allocation()))?;
    writeln!(out, "optimal total      {}", short(best_eval.total_utility))?;
    writeln!(
        out,
        "uniform total      {}",
        short(split_eval.total_utility)
    )?;
    writeln!(out, "concentration gain {}", short(gain))?;

    if let Some(p) = &g.out {
        let mut w = csv::WriterBuilder::new()
            .flexible(true)
            .from_writer(create(p)?);
        let e = |e: csv::Error| Failure::input(e.to_string());
        w.write_record([
            "block",
            "optimal_coupons",
            "optimal_utility",
            "uniform_coupons",
            "uniform_utility",
        ])
        .map_err(e)?;
        for k in 0..blocks {
            w.write_record([
                k.to_string(),
                full(best.allocation()[k]),
                full(best_eval.per_block_utility[k]),
                full(split.allocation()[k]),
                full(split_eval.per_block_utility[k]),
            ])
            .map_err(e)?;
        }
        w.write_record(["# optimal_total", &full(best_eval.total_utility)])
            .map_err(e)?;
        w.write_record(["# uniform_total", &full(split_eval.total_utility)])
            .map_err(e)?;
        w.write_record(["# gain", &full(gain)]).map_err(e)?;
        w.flush()?;
    }
    Ok(())
}

pub fn cmd_decentralization(g: &GlobalOpts, path: &Path, out: &mut dyn Write) -> CmdResult {
    let file = load(path)?;
    let cfg = solver_config(g)?;
    if file.scenario.reward().linear_rho().is_none() {
        return Err(Failure::input(Error::NotLinearReward.to_string()));
    }
    let base = base(g, &file);
    let solution = solve(&file, &cfg)?;
    let report = decomposition_report(&file.scenario, &solution, base).map_err(|e| match e {
        Error::MixtureMismatch { .. } => Failure::new(EXIT_BOUND, e.to_string()),
        _ => Failure::solver(&e),
    })?;

    let coupon = report
        .coupon_component
        .map(short)
        .unwrap_or_else(|| "undefined (no coupons)".into());
    writeln!(out, "base               {}", short(base))?;
    writeln!(out, "coefficient        {}", short(report.coefficient))?;
    writeln!(out, "coupon component   {coupon}")?;
    writeln!(out, "cost component     {}", short(report.cost_component))?;
    writeln!(out, "lambda             {}", short(report.lambda))?;
    writeln!(out, "lower bound        {}", short(report.lower_bound))?;
    writeln!(out, "bound satisfied    {}", report.bound_satisfied)?;

    if let Some(p) = &g.out {
        let mut w = csv::Writer::from_writer(create(p)?);
        let e = |e: csv::Error| Failure::input(e.to_string());
        w.write_record(["quantity", "value"]).map_err(e)?;
        let rows = [
            ("base", full(base)),
            ("coefficient", full(report.coefficient)),
            (
                "coupon_component",
                report.coupon_component.map(full).unwrap_or_default(),
            ),
            ("cost_component", full(report.cost_component)),
            ("lambda", full(report.lambda)),
            ("lower_bound", full(report.lower_bound)),
            ("bound_satisfied", report.bound_satisfied.to_string()),
        ];
        for (k, v) in rows {
            w.write_record([k, v.as_str()]).map_err(e)?;
        }
        w.flush()?;
    }

    if !report.bound_satisfied {
        return Err(Failure::new(
            EXIT_BOUND,
            format!(
                "coefficient {} is below the lower bound {}",
                full(report.coefficient),
                full(report.lower_bound)
            ),
        ));
    }
    Ok(())
}

pub fn cmd_sweep(g: &GlobalOpts, path: &Path, spec: &SweepSpec, out: &mut dyn Write) -> CmdResult {
    let file = load(path)?;
    let cfg = solver_config(g)?;
    spec.validate(&file.scenario).map_err(Failure::input)?;
    let rows = run_sweep(&file.scenario, spec, &cfg, base(g, &file));

    match &g.out {
        Some(p) => {
            let mut w = create(p)?;
            write_sweep_csv(&mut w, &spec.parameter, &rows)?;
            w.flush()?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| match &r.outcome {
                    Ok(s) => vec![
                        short(r.value),
                        short(s.solution.total_hash),
                        short(s.decentralization),
                        "ok".into(),
                    ],
                    Err(msg) => vec![short(r.value), "-".into(), "-".into(), msg.clone()],
                })
                .collect();
            let name = spec.parameter.to_string();
            print_table(
                out,
                &[&name, "total_hash", "decentralization", "status"],
                &table,
            )?;
        }
        None => write_sweep_csv(&mut *out, &spec.parameter, &rows)?,
    }

    if let Some(p) = &g.svg {
        let xs: Vec<f64> = rows.iter().map(|r| r.value).collect();
        let mut series: Vec<Series> = file
            .scenario
            .miners()
            .iter()
            .enumerate()
            .map(|(i, m)| Series {
                name: m.id().to_owned(),
                values: rows
                    .iter()
                    .map(|r| match &r.outcome {
                        Ok(s) => s.solution.hash_rates[i],
                        Err(_) => f64::NAN,
                    })
                    .collect(),
            })
            .collect();
        series.push(Series {
            name: "H".into(),
            values: rows
                .iter()
                .map(|r| match &r.outcome {
                    Ok(s) => s.solution.total_hash,
                    Err(_) => f64::NAN,
                })
                .collect(),
        });
        let name = spec.parameter.to_string();
        let chart = line_chart(
            &format!("Equilibrium hash rates vs {name}"),
            &name,
            "hash rate",
            &xs,
            &series,
        );
        std::fs::write(p, chart)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display())))?;
    }

    if rows.iter().all(|r| r.outcome.is_err()) {
        return Err(Failure::new(
            EXIT_SOLVER,
            format!("all {} sweep values failed to solve", rows.len()),
        ));
    }
    Ok(())
}
