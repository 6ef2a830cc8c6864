use crate::model::PopularityModel;
use crate::{Error, Result};

/// Request probability of the file with popularity rank `rank` (1-based).
pub fn zipf_pmf(pop: &PopularityModel, rank: usize) -> Result<f64> {
    if rank == 0 || rank > pop.library_size() {
        return Err(Error::invalid(
            "rank",
            format!("must lie in [1, {}], got {rank}", pop.library_size()),
        ));
    }
    Ok(pop.weight(rank) / pop.normalizer())
}

/// Probability that a request hits a cache holding the `s` most popular files.
pub fn hit_ratio_exact(pop: &PopularityModel, s: usize) -> Result<f64> {
    check_cache_size(pop, s)?;
    if s == pop.library_size() {
        return Ok(1.0);
    }
    Ok(pop.partial_sum(s) / pop.normalizer())
}

/// Integral approximation of the hit ratio,
/// `(s^(1-g) - 1) / (F^(1-g) - 1)`, with `ln s / ln F` at `g = 1`.
///
/// The integral form assigns no mass below rank 1, so `s <= 1` maps to 0.
pub fn hit_ratio_approx(pop: &PopularityModel, s: usize) -> Result<f64> {
    check_cache_size(pop, s)?;
    let f = pop.library_size();
    if s == f {
        return Ok(1.0);
    }
    if s <= 1 {
        return Ok(0.0);
    }
    let a = 1.0 - pop.zipf_exp();
    let (ln_s, ln_f) = ((s as f64).ln(), (f as f64).ln());
    let h = if a == 0.0 {
        ln_s / ln_f
    } else {
        // expm1 keeps the ratio accurate as the exponent approaches 1.
        (a * ln_s).exp_m1() / (a * ln_f).exp_m1()
    };
    Ok(h.clamp(0.0, 1.0))
}

fn check_cache_size(pop: &PopularityModel, s: usize) -> Result<()> {
    if s > pop.library_size() {
        return Err(Error::invalid(
            "cache_files",
            format!("{s} exceeds the library size {}", pop.library_size()),
        ));
    }
    Ok(())
}
