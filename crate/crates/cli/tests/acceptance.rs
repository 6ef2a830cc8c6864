//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cachealloc::analytic::{
    backhaul_success, hit_ratio_exact, usp_exact, wireless_exponent, wireless_success,
};
use cachealloc::model::{CellSpec, PopularityModel, RadioParams};
use cachealloc::optimizer::{
    allocate, allocate_bruteforce, min_cache_bisection, uniform_allocate, AllocationProblem,
};
use cachealloc::simulator::{simulate_backhaul, simulate_usp, simulate_wireless, SimConfig};
use cachealloc_cli::config::SimulationConfig;
use cachealloc_cli::ScenarioConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: cachealloc::Error) -> String {
    e.to_string()
}

fn enumerate_backhaul(users: u32, slots: u32, h: f64) -> f64 {
    let others = users - 1;
    (0u32..1 << others)
        .map(|pattern| {
            let m = pattern.count_ones();
            let p = h.powi((others - m) as i32) * (1.0 - h).powi(m as i32);
            p * (slots as f64 / (m + 1) as f64).min(1.0)
        })
        .sum()
}

fn backhaul_enumeration() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for users in 1..=10u32 {
        for slots in 0..=users {
            for k in 0..=10 {
                let h = k as f64 / 10.0;
                let analytic = backhaul_success(users, slots, h).map_err(err)?;
                let exact = enumerate_backhaul(users, slots, h);
                let d = (analytic - exact).abs();
                ensure(d <= 1e-12, || {
                    format!("U={users} B={slots} h={h}: {analytic} vs {exact}")
                })?;
                worst = worst.max(d);
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases, max |diff| {worst:.1e}"))
}

fn wireless_quadrature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let radio = RadioParams::new(
            rng.random_range(5.0..500.0),
            2.0,
            rng.random_range(-130.0..-60.0),
            rng.random_range(1e6..1e8),
            rng.random_range(0.01..20.0),
            rng.random_range(1e5..1e7),
        )
        .map_err(err)?;
        let users = rng.random_range(1..=40);
        let k = wireless_exponent(&radio, users).map_err(err)? * radio.radius_m().powi(2);
        let closed = if k == 0.0 { 1.0 } else { -(-k).exp_m1() / k };
        let quad = wireless_success(&radio, users).map_err(err)?;
        let rel = if closed == quad {
            0.0
        } else {
            (quad - closed).abs() / closed.abs()
        };
        ensure(rel <= 1e-8, || {
            format!("{radio:?} U={users}: {quad} vs {closed}")
        })?;
        worst = worst.max(rel);
    }
    let radio = RadioParams::small_cell();
    let mut zs = Vec::new();
    for (i, users) in [5u32, 15, 30].into_iter().enumerate() {
        let analytic = wireless_success(&radio, users).map_err(err)?;
        let sim = SimConfig::new(1_000_000, 100 + i as u64).map_err(err)?;
        let est = simulate_wireless(&radio, users, sim).map_err(err)?;
        let z = est.z_score(analytic);
        ensure(z.abs() <= 3.0, || {
            format!(
                "U={users}: analytic {analytic}, simulated {} (z {z:.2})",
                est.mean
            )
        })?;
        zs.push(format!("{z:.2}"));
    }
    Ok(format!(
        "alpha=2 max rel {worst:.1e}; simulation z = [{}]",
        zs.join(", ")
    ))
}

fn usp_end_to_end() -> Outcome {
    let pop = PopularityModel::new(1000, 0.56).map_err(err)?;
    let radio = RadioParams::small_cell();
    let mut worst: f64 = 0.0;
    let mut k = 0u64;
    for &s in &[0usize, 50, 200, 600] {
        for &mbps in &[0.0, 4.0, 10.0, 20.0] {
            let cell = CellSpec::new(radio, 15, mbps * 1e6, s).map_err(err)?;
            let analytic = usp_exact(&cell, &pop).map_err(err)?.p_user;
            let sim = SimConfig::new(100_000, 500 + k).map_err(err)?;
            k += 1;
            let est = simulate_usp(&cell, &pop, sim).map_err(err)?;
            let z = est.z_score(analytic);
            ensure(z.abs() <= 3.0, || {
                format!(
                    "s={s} cB={mbps} Mbps: analytic {analytic}, simulated {} (z {z:.2})",
                    est.mean
                )
            })?;
            worst = worst.max(z.abs());
        }
    }
    Ok(format!("16 grid points, max |z| {worst:.2}"))
}

fn random_problem(
    rng: &mut ChaCha8Rng,
    max_cells: usize,
    max_files: usize,
    max_budget: usize,
) -> AllocationProblem {
    let cells_n = rng.random_range(1..=max_cells);
    let files = rng.random_range(1..=max_files);
    let pop = PopularityModel::new(files, rng.random_range(0.0..2.0)).unwrap();
    let cells = (0..cells_n)
        .map(|_| {
            let radio = RadioParams::new(
                rng.random_range(10.0..60.0),
                rng.random_range(2.5..4.5),
                -102.0,
                10e6,
                1.0,
                2e6,
            )
            .unwrap();
            let users = rng.random_range(1..=30);
            let backhaul = 2e6 * rng.random_range(0..=30) as f64;
            CellSpec::new(radio, users, backhaul, 0).unwrap()
        })
        .collect();
    let budget = rng.random_range(0..=max_budget);
    AllocationProblem::new(cells, pop, budget, 1e-6).unwrap()
}

fn allocator_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7_331);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let problem = random_problem(&mut rng, 3, 20, 30);
        let fast = allocate(&problem).map_err(err)?;
        let brute = allocate_bruteforce(&problem).map_err(err)?;
        let d = (fast.achieved_rho - brute.achieved_rho).abs();
        ensure(d <= 1e-6, || {
            format!(
                "instance {i}: allocate {:?} rho {} vs brute force {:?} rho {}",
                fast.cache_files, fast.achieved_rho, brute.cache_files, brute.achieved_rho
            )
        })?;
        worst = worst.max(d);
    }
    Ok(format!("50 instances, max |rho diff| {worst:.1e}"))
}

fn min_caches(
    radio: &RadioParams,
    users: u32,
    pop: &PopularityModel,
    theta: f64,
    slots: u32,
) -> Result<Vec<usize>, String> {
    (0..=slots)
        .map(|b| {
            let cell =
                CellSpec::new(*radio, users, b as f64 * radio.rate_target_bps(), 0).map_err(err)?;
            min_cache_bisection(&cell, pop, theta)
                .map_err(err)?
                .ok_or_else(|| format!("theta {theta} infeasible at B={b}"))
        })
        .collect()
}

fn tradeoff_shape() -> Outcome {
    let pop = PopularityModel::new(1000, 0.56).map_err(err)?;
    let radio = RadioParams::small_cell();
    let mut notes = Vec::new();
    for theta in [0.5, 0.6, 0.7, 0.8, 0.9] {
        let s = min_caches(&radio, 15, &pop, theta, 14)?;
        ensure(s.windows(2).all(|w| w[1] <= w[0]), || {
            format!("theta {theta}: not nonincreasing {s:?}")
        })?;
        let drops: Vec<f64> = s.windows(2).map(|w| (w[0] - w[1]) as f64).collect();
        let half = drops.len() / 2;
        let low = drops[..half].iter().sum::<f64>() / half as f64;
        let high = drops[half..].iter().sum::<f64>() / (drops.len() - half) as f64;
        ensure(low > high, || {
            format!("theta {theta}: low-backhaul drop {low} <= high-backhaul drop {high}")
        })?;
        notes.push(format!("{theta}: {low:.1}/{high:.1}"));
    }
    Ok(format!(
        "nonincreasing; mean drop per slot low/high B = {}",
        notes.join(", ")
    ))
}

fn scaling() -> Outcome {
    let radio = RadioParams::small_cell();
    let mut notes = Vec::new();
    for (gamma, lo, hi) in [(0.6, 1.7, 2.3), (1.5, 0.95, 1.1)] {
        let s: Vec<usize> = [500, 1000, 2000]
            .iter()
            .map(|&f| {
                let pop = PopularityModel::new(f, gamma).map_err(err)?;
                Ok(min_caches(&radio, 15, &pop, 0.8, 0)?[0])
            })
            .collect::<Result<_, String>>()?;
        for w in s.windows(2) {
            let r = w[1] as f64 / w[0] as f64;
            ensure((lo..=hi).contains(&r), || {
                format!("gamma {gamma}: sizes {s:?}, ratio {r:.3} outside [{lo}, {hi}]")
            })?;
        }
        notes.push(format!("gamma {gamma}: {s:?}"));
    }
    Ok(notes.join("; "))
}

fn six_cells(gamma: f64) -> AllocationProblem {
    let radio = RadioParams::small_cell();
    let cells = [0.0, 2.0, 6.0, 10.0, 20.0, 28.0]
        .iter()
        .map(|mbps| CellSpec::new(radio, 15, mbps * 1e6, 0).unwrap())
        .collect();
    AllocationProblem::new(cells, PopularityModel::new(1000, gamma).unwrap(), 0, 1e-4).unwrap()
}

fn allocation_claims() -> Outcome {
    let budgets: Vec<usize> = (0..=60).map(|i| 100 * i).collect();
    let mut gaps = Vec::new();
    let mut notes = Vec::new();
    for gamma in [0.6, 1.2] {
        let base = six_cells(gamma);
        let mut max_gap = f64::NEG_INFINITY;
        for &b in &budgets {
            let p = base.with_budget(b);
            let opt = allocate(&p).map_err(err)?;
            let uni = uniform_allocate(&p).map_err(err)?;
            ensure(opt.achieved_rho >= uni.achieved_rho, || {
                format!(
                    "gamma {gamma} budget {b}: optimal {} < uniform {}",
                    opt.achieved_rho, uni.achieved_rho
                )
            })?;
            max_gap = max_gap.max(opt.achieved_rho - uni.achieved_rho);
        }
        let full = allocate(&base.with_budget(6 * 1000)).map_err(err)?;
        ensure(full.saturated, || format!("gamma {gamma}: never saturates"))?;
        let point = full.total_used;
        let at_point = allocate(&base.with_budget(point)).map_err(err)?;
        let beyond: Vec<usize> = budgets.iter().copied().filter(|&b| b >= point).collect();
        ensure(beyond.len() >= 2, || {
            format!("gamma {gamma}: saturation {point} leaves no budgets to compare")
        })?;
        for &b in &beyond {
            let r = allocate(&base.with_budget(b)).map_err(err)?;
            ensure(r.cache_files == at_point.cache_files, || {
                format!(
                    "gamma {gamma}: budget {b} allocation {:?} differs from {:?}",
                    r.cache_files, at_point.cache_files
                )
            })?;
        }
        gaps.push(max_gap);
        notes.push(format!(
            "gamma {gamma}: max gap {max_gap:.4}, saturation at {point}"
        ));
    }
    ensure(gaps[0] > 0.01, || {
        format!("gamma 0.6 max gap {} <= 0.01", gaps[0])
    })?;
    ensure(gaps[0] > gaps[1], || {
        format!("gap gamma 0.6 {} <= gap gamma 1.2 {}", gaps[0], gaps[1])
    })?;
    Ok(notes.join("; "))
}

const SLACK: f64 = 1e-12;

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(424_242);
    for i in 0..200 {
        let files = rng.random_range(1..=300);
        let pop = PopularityModel::new(files, rng.random_range(0.0..2.0)).map_err(err)?;
        let radio = RadioParams::new(
            rng.random_range(10.0..100.0),
            rng.random_range(2.0..4.5),
            rng.random_range(-110.0..-90.0),
            10e6,
            1.0,
            rng.random_range(5e5..4e6),
        )
        .map_err(err)?;
        let users = rng.random_range(1..=40);
        let slots = rng.random_range(0..=users);
        let p_at = |s: usize, b: u32| -> Result<f64, String> {
            let cell =
                CellSpec::new(radio, users, b as f64 * radio.rate_target_bps(), s).map_err(err)?;
            Ok(usp_exact(&cell, &pop).map_err(err)?.p_user)
        };
        let mut prev_p = f64::NEG_INFINITY;
        let mut prev_h = f64::NEG_INFINITY;
        for s in 0..=files {
            let p = p_at(s, slots)?;
            let h = hit_ratio_exact(&pop, s).map_err(err)?;
            ensure(p >= prev_p - SLACK && h >= prev_h - SLACK, || {
                format!("instance {i}: USP or hit ratio decreases at s={s}")
            })?;
            prev_p = p;
            prev_h = h;
        }
        let s = rng.random_range(0..=files);
        let mut prev = f64::NEG_INFINITY;
        for b in 0..=users + 1 {
            let p = p_at(s, b)?;
            ensure(p >= prev - SLACK, || {
                format!("instance {i}: USP decreases at B={b}")
            })?;
            prev = p;
        }
        let problem = random_problem(&mut rng, 3, 40, 0);
        let total = problem.cells().len() * problem.popularity().library_size();
        let step = (total / 20).max(1);
        let mut prev = f64::NEG_INFINITY;
        for budget in (0..=total + step).step_by(step) {
            let r = allocate(&problem.with_budget(budget)).map_err(err)?;
            ensure(r.achieved_rho >= prev - SLACK, || {
                format!("instance {i}: rho decreases at budget {budget}")
            })?;
            prev = r.achieved_rho;
        }
    }
    Ok(format!(
        "200 instances: USP in s and B, hit ratio in s, rho in budget (slack {SLACK:.0e})"
    ))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

fn validate_bytes(config: &ScenarioConfig, threads: usize) -> Result<Vec<u8>, String> {
    in_pool(threads, || {
        let mut out = Vec::new();
        cachealloc_cli::commands::cmd_validate(config, &mut out).map_err(|e| e.to_string())?;
        Ok(out)
    })
}

fn determinism() -> Outcome {
    let config = ScenarioConfig {
        simulation: SimulationConfig {
            trials: 50_000,
            seed: 2_718,
        },
        ..ScenarioConfig::default()
    };
    let one = validate_bytes(&config, 1)?;
    let many = validate_bytes(&config, 4)?;
    ensure(one == many, || {
        "validate output differs across workers".into()
    })?;

    let pop = PopularityModel::new(1000, 0.56).map_err(err)?;
    let cell = CellSpec::new(RadioParams::small_cell(), 15, 6e6, 150).map_err(err)?;
    let sim = SimConfig::new(200_003, 99).map_err(err)?;
    let run_all = || {
        (
            simulate_wireless(cell.radio(), 15, sim).unwrap(),
            simulate_backhaul(15, 3, 0.4, sim).unwrap(),
            simulate_usp(&cell, &pop, sim).unwrap(),
        )
    };
    let a = in_pool(1, run_all);
    let b = in_pool(4, run_all);
    ensure(a == b, || format!("simulator differs: {a:?} vs {b:?}"))?;
    Ok(format!(
        "validate table {} bytes identical; 3 simulators identical on 1 and 4 workers",
        one.len()
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "backhaul contention sum equals exhaustive enumeration",
            limit: Some(Duration::from_secs(5)),
            check: backhaul_enumeration,
        },
        Criterion {
            id: 2,
            name: "wireless quadrature vs alpha=2 closed form and simulation",
            limit: Some(Duration::from_secs(30)),
            check: wireless_quadrature,
        },
        Criterion {
            id: 3,
            name: "exact USP vs simulation on a 4x4 cache/backhaul grid",
            limit: Some(Duration::from_secs(60)),
            check: usp_end_to_end,
        },
        Criterion {
            id: 4,
            name: "allocator matches brute force",
            limit: Some(Duration::from_secs(60)),
            check: allocator_optimality,
        },
        Criterion {
            id: 5,
            name: "cache/backhaul tradeoff shape",
            limit: None,
            check: tradeoff_shape,
        },
        Criterion {
            id: 6,
            name: "minimum cache scaling with library size",
            limit: None,
            check: scaling,
        },
        Criterion {
            id: 7,
            name: "six-cell optimal vs uniform allocation",
            limit: None,
            check: allocation_claims,
        },
        Criterion {
            id: 8,
            name: "monotonicity suite",
            limit: None,
            check: monotonicity,
        },
        Criterion {
            id: 9,
            name: "determinism across worker counts",
            limit: None,
            check: determinism,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!(
                "took {:.2} s, limit {} s",
                elapsed.as_secs_f64(),
                limit.as_secs()
            )),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} criterion {}: {} ({detail}; {:.2} s)",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
