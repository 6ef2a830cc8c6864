//! Cache-size optimization.
//!
//! * [`min_cache_bisection`]: smallest cache meeting a USP threshold in one
//!   cell (exploits monotonicity of the USP in the cache size).
//! * [`allocate`]: max-min USP allocation of a shared cache budget by
//!   bisection on the common USP level, followed by an exact refinement
//!   pass so the result is the discrete optimum rather than a value within
//!   the bisection tolerance.
//! * [`allocate_bruteforce`]: exhaustive reference for small instances.
//! * [`uniform_allocate`]: equal split baseline.

use std::cell::Cell;

use crate::analytic::{usp_with_wireless, wireless_success, UspBreakdown};
use crate::model::{AllocationResult, CellSpec, PopularityModel, SearchStats};
use crate::{Error, Result};

/// Largest search space [`allocate_bruteforce`] will enumerate.
pub const BRUTEFORCE_LIMIT: u64 = 10_000_000;

pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Multi-cell cache budget allocation instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    cells: Vec<CellSpec>,
    pop: PopularityModel,
    budget_files: usize,
    epsilon: f64,
}

impl AllocationProblem {
    /// The cells' own `cache_files` are ignored.
    pub fn new(
        cells: Vec<CellSpec>,
        pop: PopularityModel,
        budget_files: usize,
        epsilon: f64,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::invalid("cells", "at least one cell is required"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid(
                "epsilon",
                format!("must lie in (0, 1), got {epsilon}"),
            ));
        }
        Ok(Self {
            cells,
            pop,
            budget_files,
            epsilon,
        })
    }

    pub fn cells(&self) -> &[CellSpec] {
        &self.cells
    }

    pub fn popularity(&self) -> &PopularityModel {
        &self.pop
    }

    pub fn budget_files(&self) -> usize {
        self.budget_files
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_budget(&self, budget_files: usize) -> Self {
        Self {
            budget_files,
            ..self.clone()
        }
    }
}

/// One cell's USP as a function of its cache size, with the wireless term
/// evaluated once. Counts evaluations.
#[derive(Debug)]
pub struct CellEvaluator<'a> {
    cell: CellSpec,
    pop: &'a PopularityModel,
    p_wireless: f64,
    evaluations: Cell<usize>,
}

impl<'a> CellEvaluator<'a> {
    pub fn new(cell: &CellSpec, pop: &'a PopularityModel) -> Result<Self> {
        Ok(Self {
            cell: *cell,
            pop,
            p_wireless: wireless_success(cell.radio(), cell.users())?,
            evaluations: Cell::new(0),
        })
    }

    pub fn p_wireless(&self) -> f64 {
        self.p_wireless
    }

    pub fn library_size(&self) -> usize {
        self.pop.library_size()
    }

    pub fn breakdown(&self, cache_files: usize) -> Result<UspBreakdown> {
        self.evaluations.set(self.evaluations.get() + 1);
        usp_with_wireless(
            &self.cell.with_cache(cache_files),
            self.pop,
            self.p_wireless,
        )
    }

    pub fn p_user(&self, cache_files: usize) -> Result<f64> {
        Ok(self.breakdown(cache_files)?.p_user)
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.get()
    }

    /// Smallest `s` in `[from, F]` whose USP satisfies `accept`, assuming
    /// acceptance is monotone in `s`. Returns the size and its USP.
    ///
    /// Checks `F` first (a full cache has network support 1, so its USP is
    /// exactly `P^W` and costs no evaluation), then `from`, then bisects
    /// between them.
    fn first_accepted(
        &self,
        from: usize,
        accept: impl Fn(f64) -> bool,
    ) -> Result<Option<(usize, f64)>> {
        let f = self.library_size();
        let top = self.p_wireless;
        if !accept(top) {
            return Ok(None);
        }
        if from >= f {
            return Ok(Some((f, top)));
        }
        let bottom = self.p_user(from)?;
        if accept(bottom) {
            return Ok(Some((from, bottom)));
        }
        // Invariant: `lo` rejected, `hi` accepted.
        let (mut lo, mut hi, mut hi_value) = (from, f, top);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let value = self.p_user(mid)?;
            if accept(value) {
                hi = mid;
                hi_value = value;
            } else {
                lo = mid;
            }
        }
        Ok(Some((hi, hi_value)))
    }

    /// Smallest cache reaching USP `theta`, searching upward from `from`.
    fn min_cache_from(&self, from: usize, theta: f64) -> Result<Option<(usize, f64)>> {
        if theta <= 0.0 {
            return Ok(Some((from, f64::NAN)));
        }
        if theta > self.p_wireless {
            return Ok(None);
        }
        self.first_accepted(from, |p| p >= theta)
    }
}

/// Smallest cache size `s` in `[0, F]` with exact USP at least `theta`, or
/// `None` when even a full cache falls short (`theta > P^W`).
///
/// Uses at most `ceil(log2(F + 1)) + 2` USP evaluations.
pub fn min_cache_bisection(
    cell: &CellSpec,
    pop: &PopularityModel,
    theta: f64,
) -> Result<Option<usize>> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid(
            "theta",
            format!("must lie in [0, 1], got {theta}"),
        ));
    }
    let eval = CellEvaluator::new(cell, pop)?;
    Ok(eval.min_cache_from(0, theta)?.map(|(s, _)| s))
}

/// Max-min USP allocation of the cache budget.
///
/// Bisects the common USP level `rho` on `[0, 1]`: at each midpoint every
/// cell's minimum cache is found, and the level is feasible when every cell
/// can reach it and the caches fit the budget. The bisection stops once the
/// bracket is narrower than `epsilon`. The allocation found for the best
/// feasible level is then refined exactly: while the budget allows, every
/// cell sitting at the current minimum USP is raised to its next strictly
/// larger USP. The result is the componentwise-smallest allocation attaining
/// the optimal min-USP; unused budget is left unallocated.
pub fn allocate(problem: &AllocationProblem) -> Result<AllocationResult> {
    let pop = &problem.pop;
    let budget = problem.budget_files;
    let evals = problem
        .cells
        .iter()
        .map(|c| CellEvaluator::new(c, pop))
        .collect::<Result<Vec<_>>>()?;
    let n = evals.len();

    let mut stats = SearchStats::default();
    let (mut low, mut up) = (0.0f64, 1.0f64);
    let mut best = vec![0usize; n];
    let mut candidate = vec![0usize; n];
    while up - low >= problem.epsilon {
        let mid = 0.5 * (low + up);
        stats.bisection_steps += 1;
        let mut total = 0usize;
        let mut feasible = true;
        for (j, eval) in evals.iter().enumerate() {
            // USP is monotone, so the level-`low` cache is a lower bound.
            match eval.min_cache_from(best[j], mid)? {
                Some((s, _)) if total + s <= budget => {
                    candidate[j] = s;
                    total += s;
                }
                _ => {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible {
            low = mid;
            best.copy_from_slice(&candidate);
        } else {
            up = mid;
        }
    }
    stats.bisection_evaluations = evals.iter().map(CellEvaluator::evaluations).sum();

    let mut values = best
        .iter()
        .zip(&evals)
        .map(|(&s, e)| e.p_user(s))
        .collect::<Result<Vec<_>>>()?;
    loop {
        let rho = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut next = best.clone();
        let mut next_values = values.clone();
        let mut improvable = true;
        for j in 0..n {
            if values[j] > rho {
                continue;
            }
            match evals[j].first_accepted(best[j], |p| p > rho)? {
                Some((s, p)) => {
                    next[j] = s;
                    next_values[j] = p;
                }
                None => {
                    improvable = false;
                    break;
                }
            }
        }
        if !improvable || next.iter().sum::<usize>() > budget {
            break;
        }
        best = next;
        values = next_values;
    }
    stats.refinement_evaluations =
        evals.iter().map(CellEvaluator::evaluations).sum::<usize>() - stats.bisection_evaluations;

    finish(&evals, best, stats)
}

/// Exhaustive search over every allocation with total at most the budget.
///
/// Maximizes the minimum USP; ties go to the smallest total cache, then to
/// the lexicographically smallest allocation.
pub fn allocate_bruteforce(problem: &AllocationProblem) -> Result<AllocationResult> {
    let pop = &problem.pop;
    let f = pop.library_size();
    let candidates = (f as f64 + 1.0).powi(problem.cells.len() as i32);
    if candidates > BRUTEFORCE_LIMIT as f64 {
        return Err(Error::SearchSpaceTooLarge {
            candidates,
            limit: BRUTEFORCE_LIMIT,
        });
    }
    let evals = problem
        .cells
        .iter()
        .map(|c| CellEvaluator::new(c, pop))
        .collect::<Result<Vec<_>>>()?;
    let tables = evals
        .iter()
        .map(|e| (0..=f).map(|s| e.p_user(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    struct Best {
        rho: f64,
        total: usize,
        alloc: Vec<usize>,
    }
    fn visit(
        tables: &[Vec<f64>],
        budget: usize,
        current: &mut Vec<usize>,
        rho: f64,
        total: usize,
        best: &mut Option<Best>,
    ) {
        let j = current.len();
        if j == tables.len() {
            let better = match best {
                None => true,
                Some(b) => {
                    rho > b.rho
                        || (rho == b.rho
                            && (total < b.total || (total == b.total && *current < b.alloc)))
                }
            };
            if better {
                *best = Some(Best {
                    rho,
                    total,
                    alloc: current.clone(),
                });
            }
            return;
        }
        for (s, &p) in tables[j].iter().enumerate() {
            if total + s > budget {
                break;
            }
            current.push(s);
            visit(tables, budget, current, rho.min(p), total + s, best);
            current.pop();
        }
    }

    let mut best = None;
    visit(
        &tables,
        problem.budget_files,
        &mut Vec::with_capacity(tables.len()),
        f64::INFINITY,
        0,
        &mut best,
    );
    let best = best.expect("the all-zero allocation is always a candidate");
    finish(&evals, best.alloc, SearchStats::default())
}

/// Every cell gets `floor(C0 / N_b)` files (capped at the library size).
pub fn uniform_allocate(problem: &AllocationProblem) -> Result<AllocationResult> {
    let pop = &problem.pop;
    let share = (problem.budget_files / problem.cells.len()).min(pop.library_size());
    let evals = problem
        .cells
        .iter()
        .map(|c| CellEvaluator::new(c, pop))
        .collect::<Result<Vec<_>>>()?;
    finish(&evals, vec![share; evals.len()], SearchStats::default())
}

fn finish(
    evals: &[CellEvaluator<'_>],
    cache_files: Vec<usize>,
    stats: SearchStats,
) -> Result<AllocationResult> {
    let mut achieved_rho = f64::INFINITY;
    let mut saturated = true;
    for (e, &s) in evals.iter().zip(&cache_files) {
        let b = usp_with_wireless(&e.cell.with_cache(s), e.pop, e.p_wireless)?;
        achieved_rho = achieved_rho.min(b.p_user);
        saturated &= b.p_network >= 1.0;
    }
    Ok(AllocationResult {
        total_used: cache_files.iter().sum(),
        cache_files,
        achieved_rho,
        saturated,
        stats,
    })
}
