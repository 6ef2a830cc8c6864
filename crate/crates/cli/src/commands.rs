//! The five experiment commands. Each writes one CSV table and returns a
//! [`Report`] describing what was produced.

use std::io::Write;

use cachealloc::analytic::{
    backhaul_success, hit_ratio_approx, hit_ratio_exact, min_cache_closed_form, usp_approx,
    usp_exact, wireless_success,
};
use cachealloc::model::{CellSpec, PopularityModel, RadioParams, TrialEstimate};
use cachealloc::optimizer::{allocate, min_cache_bisection, uniform_allocate, AllocationProblem};
use cachealloc::simulator::{simulate_backhaul, simulate_usp, simulate_wireless, SimConfig};
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::CliError;

/// Written in place of a number when no cache size meets the threshold.
pub const INFEASIBLE: &str = "infeasible";

/// Validation rows with `|z|` above this fail the run.
pub const Z_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepAxis {
    /// Library size, one series per configured Zipf exponent.
    Files,
    /// Zipf exponent at the configured library size.
    Gamma,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: usize,
    pub infeasible_rows: usize,
    pub failed_rows: usize,
    pub summary: Vec<String>,
}

impl Report {
    /// 4 on a failed validation, 3 when every row is infeasible, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.failed_rows > 0 {
            4
        } else if self.rows > 0 && self.infeasible_rows == self.rows {
            3
        } else {
            0
        }
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn cache_cell(s: Option<usize>) -> String {
    s.map_or_else(|| INFEASIBLE.to_string(), |s| s.to_string())
}

fn cache_cell_f(s: Option<f64>) -> String {
    s.map_or_else(|| INFEASIBLE.to_string(), num)
}

/// Per-cell exact and approximate USP at the configured cache sizes.
pub fn cmd_usp<W: Write>(config: &ScenarioConfig, out: W) -> Result<Report, CliError> {
    let pop = config.popularity()?;
    let cells = config.cells()?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "cell",
        "users",
        "backhaul_mbps",
        "slots",
        "cache_files",
        "p_wireless",
        "hit_ratio",
        "p_backhaul",
        "p_network",
        "p_user",
        "hit_ratio_approx",
        "p_user_approx",
    ])?;
    let mut report = Report::default();
    let mut worst = f64::INFINITY;
    for (i, cell) in cells.iter().enumerate() {
        let b = usp_exact(cell, &pop)?;
        let h_approx = hit_ratio_approx(&pop, cell.cache_files())?;
        let approx = usp_approx(cell, &pop)?;
        worst = worst.min(b.p_user);
        w.write_record([
            i.to_string(),
            cell.users().to_string(),
            num(cell.backhaul_bps() / 1e6),
            cell.slots().to_string(),
            cell.cache_files().to_string(),
            num(b.p_wireless),
            num(b.hit_ratio),
            num(b.p_backhaul),
            num(b.p_network),
            num(b.p_user),
            num(h_approx),
            num(approx),
        ])?;
        report.rows += 1;
    }
    w.flush()?;
    report
        .summary
        .push(format!("usp: {} cells, min p_user {worst}", report.rows));
    Ok(report)
}

struct MinCacheRow {
    p_wireless: f64,
    slots: u32,
    exact: Option<usize>,
    closed_form: Option<f64>,
}

fn min_cache_row(
    radio: &RadioParams,
    users: u32,
    backhaul_mbps: f64,
    pop: &PopularityModel,
    theta: f64,
) -> Result<MinCacheRow, CliError> {
    let cell = CellSpec::new(*radio, users, backhaul_mbps * 1e6, 0)?;
    let p_wireless = wireless_success(radio, users)?;
    let exact = min_cache_bisection(&cell, pop, theta)?;
    let closed_form = if p_wireless > 0.0 {
        min_cache_closed_form(theta, p_wireless, cell.slots(), users, pop)?.files()
    } else if theta == 0.0 {
        Some(0.0)
    } else {
        None
    };
    Ok(MinCacheRow {
        p_wireless,
        slots: cell.slots(),
        exact,
        closed_form,
    })
}

/// Minimum cache size over the (threshold, backhaul) grid, sorted by
/// threshold and then backhaul.
pub fn cmd_tradeoff<W: Write>(config: &ScenarioConfig, out: W) -> Result<Report, CliError> {
    let pop = config.popularity()?;
    let radio = config.radio()?;
    let t = &config.tradeoff;
    let grid: Vec<(f64, f64)> = t
        .thetas
        .iter()
        .flat_map(|&theta| t.backhaul_mbps.iter().map(move |&b| (theta, b)))
        .collect();
    let rows: Vec<MinCacheRow> = grid
        .par_iter()
        .map(|&(theta, mbps)| min_cache_row(&radio, t.users, mbps, &pop, theta))
        .collect::<Result<_, _>>()?;

    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "theta",
        "backhaul_mbps",
        "slots",
        "p_wireless",
        "min_cache_exact",
        "min_cache_closed_form",
    ])?;
    let mut report = Report::default();
    for (&(theta, mbps), row) in grid.iter().zip(&rows) {
        w.write_record([
            num(theta),
            num(mbps),
            row.slots.to_string(),
            num(row.p_wireless),
            cache_cell(row.exact),
            cache_cell_f(row.closed_form),
        ])?;
        report.rows += 1;
        report.infeasible_rows += row.exact.is_none() as usize;
    }
    w.flush()?;
    report.summary.push(format!(
        "tradeoff: {} points, {} infeasible",
        report.rows, report.infeasible_rows
    ));
    Ok(report)
}

/// Minimum cache size against library size or Zipf exponent.
pub fn cmd_sweep<W: Write>(
    config: &ScenarioConfig,
    axis: SweepAxis,
    out: W,
) -> Result<Report, CliError> {
    let radio = config.radio()?;
    let s = &config.sweep;
    let grid: Vec<(f64, usize)> = match axis {
        SweepAxis::Files => s
            .zipf_exps
            .iter()
            .flat_map(|&g| s.library_sizes.iter().map(move |&f| (g, f)))
            .collect(),
        SweepAxis::Gamma => s
            .gammas
            .iter()
            .map(|&g| (g, config.popularity.library_size))
            .collect(),
    };
    let rows: Vec<MinCacheRow> = grid
        .par_iter()
        .map(|&(g, f)| {
            let pop = PopularityModel::new(f, g)?;
            min_cache_row(&radio, s.users, s.backhaul_mbps, &pop, s.theta)
        })
        .collect::<Result<_, _>>()?;

    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "zipf_exp",
        "library_size",
        "theta",
        "backhaul_mbps",
        "min_cache_exact",
        "min_cache_closed_form",
    ])?;
    let mut report = Report::default();
    for (&(g, f), row) in grid.iter().zip(&rows) {
        w.write_record([
            num(g),
            f.to_string(),
            num(s.theta),
            num(s.backhaul_mbps),
            cache_cell(row.exact),
            cache_cell_f(row.closed_form),
        ])?;
        report.rows += 1;
        report.infeasible_rows += row.exact.is_none() as usize;
    }
    w.flush()?;
    report.summary.push(format!(
        "sweep: {} points, {} infeasible",
        report.rows, report.infeasible_rows
    ));
    Ok(report)
}

/// Optimal and uniform allocations of every configured budget.
pub fn cmd_allocate<W: Write>(config: &ScenarioConfig, out: W) -> Result<Report, CliError> {
    let pop = config.popularity()?;
    let cells = config.cells()?;
    let base = AllocationProblem::new(cells, pop, 0, config.epsilon)?;
    let results = config
        .allocate
        .budgets
        .par_iter()
        .map(|&budget| {
            let problem = base.with_budget(budget);
            Ok((allocate(&problem)?, uniform_allocate(&problem)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["budget", "scheme", "min_usp", "total_used", "saturated"]
        .map(String::from)
        .to_vec();
    header.extend((1..=base.cells().len()).map(|j| format!("s_{j}")));
    w.write_record(&header)?;
    let mut report = Report::default();
    let mut gap = (f64::NEG_INFINITY, 0);
    for (&budget, (optimal, uniform)) in config.allocate.budgets.iter().zip(&results) {
        for (scheme, r) in [("optimal", optimal), ("uniform", uniform)] {
            let mut record = vec![
                budget.to_string(),
                scheme.to_string(),
                num(r.achieved_rho),
                r.total_used.to_string(),
                r.saturated.to_string(),
            ];
            record.extend(r.cache_files.iter().map(|s| s.to_string()));
            w.write_record(&record)?;
            report.rows += 1;
        }
        let g = optimal.achieved_rho - uniform.achieved_rho;
        if g > gap.0 {
            gap = (g, budget);
        }
    }
    w.flush()?;
    if !results.is_empty() {
        report.summary.push(format!(
            "allocate: {} budgets, max optimal-uniform gap {} at budget {}",
            results.len(),
            gap.0,
            gap.1
        ));
    }
    Ok(report)
}

/// Standard error and z-score of `est` against `expected`.
///
/// When every trial agreed the empirical standard error is zero, so the
/// binomial standard error under `expected` is used instead.
pub fn validation_z(est: &TrialEstimate, expected: f64) -> (f64, f64) {
    let se = if est.std_err > 0.0 {
        est.std_err
    } else {
        (expected * (1.0 - expected) / est.trials as f64).sqrt()
    };
    let diff = est.mean - expected;
    let z = if diff == 0.0 {
        0.0
    } else if se > 0.0 {
        diff / se
    } else {
        diff.signum() * f64::INFINITY
    };
    (se, z)
}

/// Analytic values against the Monte Carlo simulator for every cell, plus a
/// two-user contention reference row.
pub fn cmd_validate<W: Write>(config: &ScenarioConfig, out: W) -> Result<Report, CliError> {
    let pop = config.popularity()?;
    let cells = config.cells()?;
    let trials = config.simulation.trials;
    let seed = config.simulation.seed;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "quantity",
        "cell",
        "users",
        "slots",
        "cache_files",
        "analytic",
        "empirical",
        "std_err",
        "z",
        "trials",
        "seed",
    ])?;
    let mut report = Report::default();
    let mut worst: f64 = 0.0;
    let mut row = |w: &mut csv::Writer<W>,
                   quantity: &str,
                   cell: String,
                   (users, slots, cache): (u32, u32, usize),
                   analytic: f64,
                   est: TrialEstimate|
     -> Result<(), CliError> {
        let (se, z) = validation_z(&est, analytic);
        w.write_record([
            quantity.to_string(),
            cell,
            users.to_string(),
            slots.to_string(),
            cache.to_string(),
            num(analytic),
            num(est.mean),
            num(se),
            num(z),
            est.trials.to_string(),
            est.seed.to_string(),
        ])?;
        report.rows += 1;
        report.failed_rows += (z.abs() > Z_LIMIT) as usize;
        worst = worst.max(z.abs());
        Ok(())
    };

    let mut k = 0u64;
    let mut next_sim = || {
        let sim = SimConfig::new(trials, seed.wrapping_add(k));
        k += 1;
        sim
    };
    for (i, cell) in cells.iter().enumerate() {
        let shape = (cell.users(), cell.slots(), cell.cache_files());
        let b = usp_exact(cell, &pop)?;
        let est = simulate_wireless(cell.radio(), cell.users(), next_sim()?)?;
        row(&mut w, "wireless", i.to_string(), shape, b.p_wireless, est)?;
        let h = hit_ratio_exact(&pop, cell.cache_files())?;
        let est = simulate_backhaul(cell.users(), cell.slots(), h, next_sim()?)?;
        row(&mut w, "backhaul", i.to_string(), shape, b.p_backhaul, est)?;
        let est = simulate_usp(cell, &pop, next_sim()?)?;
        row(&mut w, "usp", i.to_string(), shape, b.p_user, est)?;
    }
    let reference = backhaul_success(2, 1, 0.5)?;
    let est = simulate_backhaul(2, 1, 0.5, next_sim()?)?;
    row(
        &mut w,
        "backhaul",
        "reference".into(),
        (2, 1, 0),
        reference,
        est,
    )?;
    w.flush()?;
    report.summary.push(format!(
        "validate: {} rows, {} with |z| > {Z_LIMIT}, max |z| {worst}",
        report.rows, report.failed_rows
    ));
    Ok(report)
}
