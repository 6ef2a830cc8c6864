//! Seeded Monte Carlo oracle for the analytic success probabilities.
//!
//! Each trial draws from its own ChaCha8 stream selected by the trial index,
//! so an estimate depends only on `(inputs, seed, trials)`. Trials are
//! counted in fixed blocks on the rayon pool and success counts are summed,
//! which makes the result identical for any number of worker threads.
//!
//! The generators follow the system model directly: uniform placement in the
//! disk, unit-mean exponential channel power, Zipf requests, and contention
//! resolved by drawing the backhaul winners uniformly without replacement.
//! Nothing here calls into the analytic formulas.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Zipf};
use rayon::prelude::*;

use crate::model::{CellSpec, PopularityModel, RadioParams, TrialEstimate};
use crate::{Error, Result};

const BLOCK: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        Ok(Self { trials, seed })
    }
}

/// Runs `trial` for every index in parallel and wraps the success count.
fn run<F>(sim: SimConfig, trial: F) -> Result<TrialEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    if sim.trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let base = ChaCha8Rng::seed_from_u64(sim.seed);
    let blocks = sim.trials.div_ceil(BLOCK);
    let successes: u64 = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let start = block * BLOCK;
            let end = (start + BLOCK).min(sim.trials);
            let mut hits = 0u64;
            for i in start..end {
                let mut rng = base.clone();
                rng.set_stream(i);
                hits += trial(&mut rng) as u64;
            }
            hits
        })
        .sum();
    Ok(TrialEstimate::from_successes(
        successes, sim.trials, sim.seed,
    ))
}

/// Distance from the base station of a user placed uniformly in the disk
/// (density `2x / R^2`, drawn by inverting its CDF).
pub fn sample_distance<R: Rng>(rng: &mut R, radius_m: f64) -> f64 {
    radius_m * rng.random::<f64>().sqrt()
}

/// Unit-mean exponential channel power (Rayleigh amplitude).
pub fn sample_channel<R: Rng>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

fn wireless_trial<R: Rng>(rng: &mut R, radio: &RadioParams, users: u32) -> bool {
    let x = sample_distance(rng, radio.radius_m());
    let g = sample_channel(rng);
    radio.downlink_rate(users, x, g) >= radio.rate_target_bps()
}

/// The target user and `rivals` other users contend for `slots` backhaul
/// slots; winners are a uniform subset. True when the target (index 0) wins.
fn contend<R: Rng>(rng: &mut R, rivals: usize, slots: u32) -> bool {
    let contenders = rivals + 1;
    let winners = (slots as usize).min(contenders);
    index::sample(rng, contenders, winners)
        .iter()
        .any(|i| i == 0)
}

fn check_users(users: u32) -> Result<()> {
    if users == 0 {
        return Err(Error::invalid("users", "must be at least 1"));
    }
    Ok(())
}

/// Empirical probability that the downlink rate reaches the rate target.
pub fn simulate_wireless(radio: &RadioParams, users: u32, sim: SimConfig) -> Result<TrialEstimate> {
    check_users(users)?;
    run(sim, |rng| wireless_trial(rng, radio, users))
}

/// Empirical backhaul grant probability for a user whose request missed,
/// when each other user misses independently with probability `1 - h`.
pub fn simulate_backhaul(
    users: u32,
    slots: u32,
    hit_ratio: f64,
    sim: SimConfig,
) -> Result<TrialEstimate> {
    check_users(users)?;
    if !(0.0..=1.0).contains(&hit_ratio) {
        return Err(Error::invalid(
            "hit_ratio",
            format!("must lie in [0, 1], got {hit_ratio}"),
        ));
    }
    let miss = 1.0 - hit_ratio;
    run(sim, |rng| {
        let rivals = (1..users).filter(|_| rng.random_bool(miss)).count();
        contend(rng, rivals, slots)
    })
}

/// Empirical user success probability of `cell` at its cache size.
///
/// Per trial the target user is placed and faded, requests a Zipf-ranked
/// file, and on a cache miss competes with every other user whose own Zipf
/// request also missed.
pub fn simulate_usp(
    cell: &CellSpec,
    pop: &PopularityModel,
    sim: SimConfig,
) -> Result<TrialEstimate> {
    cell.check_cache(pop)?;
    let zipf = Zipf::new(pop.library_size() as f64, pop.zipf_exp())
        .map_err(|e| Error::invalid("popularity", e.to_string()))?;
    let cached = cell.cache_files() as f64;
    let radio = cell.radio();
    let users = cell.users();
    run(sim, |rng| {
        let wireless = wireless_trial(rng, radio, users);
        let hit = zipf.sample(rng) <= cached;
        let supported = hit || {
            let rivals = (1..users).filter(|_| zipf.sample(rng) > cached).count();
            contend(rng, rivals, cell.slots())
        };
        wireless && supported
    })
}
