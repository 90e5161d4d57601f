//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Reference values come from formulas written out
//! here independently of the library.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pouw_cli::report::read_solution_csv;
use pouw_cli::scenario_file::read_scenario;
use pouw_core::{
    best_response_dynamics, concentration_gain, decomposition_report, equilibrium_utility_linear,
    evaluate_schedule, numeric_best_response, optimal_schedule, solve_general, solve_linear,
    uniform_schedule, CouponSchedule, MinerParams, RewardKind, RewardSpec, Scenario, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

#[derive(Clone, Copy, Debug)]
enum Reward {
    Linear(f64),
    Constant(f64),
    Power(f64, f64),
}

impl Reward {
    fn value(self, h: f64) -> f64 {
        match self {
            Reward::Linear(rho) => rho * h,
            Reward::Constant(r0) => r0,
            Reward::Power(a, g) => a * h.powf(g),
        }
    }

    fn slope(self, h: f64) -> f64 {
        match self {
            Reward::Linear(rho) => rho,
            Reward::Constant(_) => 0.0,
            Reward::Power(a, g) => a * g * h.powf(g - 1.0),
        }
    }

    fn spec(self) -> RewardSpec<f64> {
        match self {
            Reward::Linear(rho) => RewardSpec::linear(rho),
            Reward::Constant(r0) => RewardSpec::constant(r0),
            Reward::Power(a, g) => RewardSpec::power(a, g),
        }
        .unwrap()
    }

    fn of(spec: &RewardSpec<f64>) -> Self {
        match spec.kind() {
            RewardKind::Linear { rho } => Reward::Linear(rho),
            RewardKind::Constant { r0 } => Reward::Constant(r0),
            RewardKind::Power { a, gamma } => Reward::Power(a, gamma),
        }
    }
}

fn direct_utility(alpha: f64, beta: f64, h: f64, others: f64, r: Reward) -> f64 {
    let total = h + others;
    let share = if total > 0.0 { h / total } else { 0.0 };
    share * r.value(total) - (0.5 * alpha * h * h - alpha * beta * h)
}

/// d/dh of the utility above, written out by hand.
fn foc(alpha: f64, beta: f64, h: f64, others: f64, r: Reward) -> f64 {
    let total = h + others;
    others * r.value(total) / (total * total) + h / total * r.slope(total) - alpha * (h - beta)
}

/// Best reply to an aggregate `total` from the first-order condition at fixed H.
fn reply(alpha: f64, beta: f64, total: f64, r: Reward) -> f64 {
    let (rv, rd) = (r.value(total), r.slope(total));
    (alpha * beta * total * total + total * rv) / (alpha * total * total + rv - total * rd)
}

struct Draw {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    reward: Reward,
}

impl Draw {
    fn scenario(&self) -> Scenario<f64> {
        let miners = self
            .alpha
            .iter()
            .zip(&self.beta)
            .enumerate()
            .map(|(i, (&a, &b))| MinerParams::new(format!("m{i}"), a, b).unwrap())
            .collect();
        Scenario::new(miners, self.reward.spec()).unwrap()
    }
}

fn draw(rng: &mut ChaCha8Rng, reward: Reward) -> Draw {
    let n = rng.gen_range(2..=10);
    Draw {
        alpha: (0..n).map(|_| rng.gen_range(0.1..=10.0)).collect(),
        beta: (0..n).map(|_| rng.gen_range(0.0..=10.0)).collect(),
        reward,
    }
}

fn linear(rng: &mut ChaCha8Rng) -> Reward {
    Reward::Linear(rng.gen_range(0.1..=5.0))
}

fn nonlinear(rng: &mut ChaCha8Rng, k: usize) -> Reward {
    if k.is_multiple_of(2) {
        Reward::Constant(rng.gen_range(0.1..=5.0))
    } else {
        Reward::Power(rng.gen_range(0.1..=5.0), rng.gen_range(0.0..=1.0))
    }
}

struct Participation {
    solved: usize,
    idle: Vec<String>,
}

impl Participation {
    fn record(&mut self, label: String, h: &[f64]) {
        self.solved += 1;
        if h.iter().any(|&x| x.is_nan() || x <= 0.0) {
            self.idle.push(label);
        }
    }
}

fn criterion_1(part: &mut Participation) -> Outcome {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let started = Instant::now();
    let (mut worst_closed, mut worst_numeric) = (0.0f64, 0.0f64);
    for k in 0..1000 {
        let rho = linear(&mut rng);
        let d = draw(&mut rng, rho);
        let Reward::Linear(rho) = d.reward else {
            unreachable!()
        };
        let sc = d.scenario();
        let sol = solve_linear(&sc, &cfg).map_err(|e| format!("scenario {k}: {e}"))?;
        part.record(format!("c1/{k}"), &sol.hash_rates);
        for i in 0..sc.len() {
            let want = d.beta[i] + rho / d.alpha[i];
            let h = sol.hash_rates[i];
            let ulps = (h - want).abs() / (f64::EPSILON * want);
            worst_closed = worst_closed.max(ulps);
            let br = numeric_best_response(&sc.miners()[i], sol.total_hash - h, sc.reward(), &cfg)
                .map_err(|e| format!("scenario {k} miner {i}: {e}"))?;
            worst_numeric = worst_numeric.max((br.h_star - h).abs());
        }
    }
    let elapsed = started.elapsed();
    let detail = format!(
        "closed form off by {worst_closed:.1} ulp, numeric best response off by {worst_numeric:.2e}, {:.2}s",
        elapsed.as_secs_f64()
    );
    if worst_closed <= 1.0 && worst_numeric <= 1e-6 && elapsed < Duration::from_secs(10) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_2(part: &mut Participation) -> Outcome {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut worst_foc, mut worst_agg) = (0.0f64, 0.0f64);
    for k in 0..500 {
        let reward = nonlinear(&mut rng, k);
        let d = draw(&mut rng, reward);
        let sc = d.scenario();
        let sol = solve_general(&sc, &cfg).map_err(|e| format!("scenario {k}: {e}"))?;
        part.record(format!("c2/{k}"), &sol.hash_rates);
        let total: f64 = sol.hash_rates.iter().sum();
        for i in 0..sc.len() {
            let h = sol.hash_rates[i];
            worst_foc = worst_foc.max(foc(d.alpha[i], d.beta[i], h, total - h, reward).abs());
        }
        let implied: f64 = (0..sc.len())
            .map(|i| reply(d.alpha[i], d.beta[i], total, reward))
            .sum();
        worst_agg = worst_agg.max((implied - total).abs() / total);
    }

    let mut worst_sym = 0.0f64;
    for k in 0..100 {
        let n = rng.gen_range(2..=10);
        let alpha = rng.gen_range(0.1..=10.0);
        let r0 = rng.gen_range(0.1..=5.0);
        let d = Draw {
            alpha: vec![alpha; n],
            beta: vec![0.0; n],
            reward: Reward::Constant(r0),
        };
        let sol = solve_general(&d.scenario(), &cfg).map_err(|e| format!("symmetric {k}: {e}"))?;
        part.record(format!("c2/sym{k}"), &sol.hash_rates);
        let want = ((n as f64 - 1.0) * r0 / alpha).sqrt();
        worst_sym = worst_sym.max((sol.total_hash - want).abs());
    }

    let detail = format!(
        "max FOC residual {worst_foc:.2e}, max aggregate residual {worst_agg:.2e}·H, symmetric H off by {worst_sym:.2e}"
    );
    if worst_foc <= 1e-8 && worst_agg <= 1e-10 && worst_sym <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_3() -> Outcome {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let reward = match k % 3 {
            0 => linear(&mut rng),
            _ => nonlinear(&mut rng, k),
        };
        let sc = draw(&mut rng, reward).scenario();
        let exact = solve_general(&sc, &cfg).map_err(|e| format!("scenario {k}: {e}"))?;
        for s in 0..5 {
            let start: Vec<f64> = exact
                .hash_rates
                .iter()
                .map(|&h| h * 10f64.powf(rng.gen_range(-1.0..1.0)))
                .collect();
            let run = best_response_dynamics(&sc, &start, &cfg)
                .map_err(|f| format!("scenario {k} start {s}: {}", f.error))?;
            for (a, b) in run.solution.hash_rates.iter().zip(&exact.hash_rates) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let detail = format!("max coordinate gap {worst:.2e} over 500 runs");
    if worst <= 1e-5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let alpha = rng.gen_range(0.1..=10.0);
        let beta = rng.gen_range(0.0..=10.0);
        let rho = rng.gen_range(0.1..=5.0);
        let others = rng.gen_range(0.01..=100.0);
        let m = MinerParams::new("m", alpha, beta).unwrap();
        let lib = equilibrium_utility_linear(&m, rho).map_err(|e| e.to_string())?;
        let h = beta + rho / alpha;
        let direct = direct_utility(alpha, beta, h, others, Reward::Linear(rho));
        worst = worst.max((lib - direct).abs() / direct.abs());
    }
    let unit = equilibrium_utility_linear(&MinerParams::new("m", 1.0, 0.0).unwrap(), 1.0)
        .map_err(|e| e.to_string())?;
    let detail = format!("max relative gap {worst:.2e}, u(α=1, β=0, ρ=1) = {unit}");
    if worst <= 1e-10 && unit == 0.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_5() -> Outcome {
    let err = |e: pouw_core::Error| e.to_string();
    let split = evaluate_schedule(
        1.0,
        &CouponSchedule::new(vec![1.0, 1.0], 2.0).map_err(err)?,
        1.0,
    )
    .map_err(err)?
    .total_utility;
    let concentrated = evaluate_schedule(
        1.0,
        &CouponSchedule::new(vec![0.0, 2.0], 2.0).map_err(err)?,
        1.0,
    )
    .map_err(err)?
    .total_utility;
    // Two blocks at n = 2, ρ = 1: 2·(n/2 + ρ)²/2 split, (n + ρ)²/2 + ρ²/2 concentrated.
    let (n, rho) = (2.0f64, 1.0f64);
    let split_ref = 2.0 * (n / 2.0 + rho).powi(2) / 2.0;
    let conc_ref = (n + rho).powi(2) / 2.0 + rho * rho / 2.0;

    let corner = optimal_schedule(1.0, 2.0, 2, 1.0).map_err(err)?;
    let nonzero = corner.allocation().iter().filter(|&&x| x != 0.0).count();

    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_gain = 0.0f64;
    for _ in 0..1000 {
        let alpha = rng.gen_range(0.1..=10.0);
        let rho = rng.gen_range(0.1..=5.0);
        let budget = rng.gen_range(0.0..=20.0);
        let gain: f64 = concentration_gain(alpha, budget, 2, rho).map_err(err)?;
        // Corner minus split; the ρ terms cancel.
        let want = alpha * budget * budget / 4.0;
        let uni: f64 = evaluate_schedule(alpha, &uniform_schedule(budget, 2).map_err(err)?, rho)
            .map_err(err)?
            .total_utility;
        worst_gain = worst_gain.max((gain - want).abs() / uni.max(1.0));
    }
    let mut unit_gain = 0.0f64;
    for _ in 0..1000 {
        let budget = rng.gen_range(0.0..=20.0);
        let rho = rng.gen_range(0.1..=5.0);
        let gain: f64 = concentration_gain(1.0, budget, 2, rho).map_err(err)?;
        let want = budget * budget / 4.0;
        unit_gain = unit_gain.max((gain - want).abs() / want.max(1.0));
    }

    let detail = format!(
        "split {split}, concentrated {concentrated}, corner {:?}, gain vs budget²/4 off by {unit_gain:.1e} (α = 1) and {worst_gain:.1e} (α·budget²/4, random α)",
        corner.allocation()
    );
    if split == 4.0
        && concentrated == 5.0
        && split == split_ref
        && concentrated == conc_ref
        && nonzero == 1
        && unit_gain <= 1e-12
        && worst_gain <= 1e-12
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn shannon(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.ln()
        })
        .sum()
}

fn criterion_6() -> Outcome {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_slack = f64::INFINITY;
    let mut worst_oracle = 0.0f64;
    let mut worst_equality = 0.0f64;
    for k in 0..1000 {
        let reward = linear(&mut rng);
        let mut d = draw(&mut rng, reward);
        let Reward::Linear(rho) = reward else {
            unreachable!()
        };
        let aligned = k % 4 == 0;
        if aligned {
            let c = rng.gen_range(0.01..=10.0);
            d.beta = d.alpha.iter().map(|a| c / a).collect();
        }
        let sc = d.scenario();
        let sol = solve_linear(&sc, &cfg).map_err(|e| format!("scenario {k}: {e}"))?;
        let rep = decomposition_report(&sc, &sol, std::f64::consts::E)
            .map_err(|e| format!("scenario {k}: {e}"))?;
        worst_slack = worst_slack.min(rep.coefficient - rep.lower_bound);

        let h: Vec<f64> = (0..sc.len())
            .map(|i| d.beta[i] + rho / d.alpha[i])
            .collect();
        let cost: Vec<f64> = d.alpha.iter().map(|a| rho / a).collect();
        let lambda = d.beta.iter().sum::<f64>() / h.iter().sum::<f64>();
        let coupon = if lambda > 0.0 { shannon(&d.beta) } else { 0.0 };
        let bound = lambda * coupon + (1.0 - lambda) * shannon(&cost);
        worst_oracle = worst_oracle
            .max((rep.coefficient - shannon(&h)).abs())
            .max((rep.lower_bound - bound).abs());
        if aligned {
            worst_equality = worst_equality.max((rep.coefficient - rep.lower_bound).abs());
        }
    }
    let detail = format!(
        "min D − bound {worst_slack:.2e}, equality gap {worst_equality:.2e}, oracle gap {worst_oracle:.2e}"
    );
    if worst_slack >= -1e-12 && worst_equality <= 1e-12 && worst_oracle <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7(part: &Participation) -> Outcome {
    let detail = format!(
        "{} equilibria, {} with an idle miner",
        part.solved,
        part.idle.len()
    );
    if part.idle.is_empty() && part.solved > 0 {
        Ok(detail)
    } else {
        Err(format!("{detail}: {:?}", part.idle))
    }
}

fn criterion_8() -> Outcome {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden.toml");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_pouw"))
            .arg("solve")
            .arg(&golden)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?
            .status;
        if !status.success() {
            return Err(format!("solve exited with {status}"));
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let first = run("first.csv")?;
    let second = run("second.csv")?;

    let file = read_scenario(&golden).map_err(|e| e.to_string())?;
    let reward = Reward::of(file.scenario.reward());
    let rows = read_solution_csv(std::str::from_utf8(&first).map_err(|e| e.to_string())?)?;
    let total: f64 = rows.iter().map(|r| r.hash_rate).sum();
    let fresh =
        solve_general(&file.scenario, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (i, r) in rows.iter().enumerate() {
        let u = direct_utility(r.alpha, r.beta, r.hash_rate, total - r.hash_rate, reward);
        worst = worst
            .max((u - r.utility).abs() / r.utility.abs().max(1.0))
            .max((r.hash_rate - fresh.hash_rates[i]).abs());
    }
    let identical = first == second;
    let detail = format!(
        "{} rows, recomputation gap {worst:.2e}, byte-identical: {identical}",
        rows.len()
    );
    if identical && worst <= 1e-9 && rows.len() == file.scenario.len() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let mut part = Participation {
        solved: 0,
        idle: Vec::new(),
    };
    let results = [
        ("1 closed-form linear equilibrium", criterion_1(&mut part)),
        ("2 fixed-point consistency", criterion_2(&mut part)),
        ("3 uniqueness under dynamics", criterion_3()),
        ("4 linear equilibrium utility", criterion_4()),
        ("5 coupon concentration", criterion_5()),
        ("6 decentralization bound", criterion_6()),
        ("7 participation", criterion_7(&part)),
        ("8 CLI round trip", criterion_8()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
