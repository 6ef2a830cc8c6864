//! Domain types shared by the analytic, optimizer and simulator modules.
//!
//! Everything here is an immutable value object. Physical inputs are kept in
//! SI units (noise is configured in dBm and converted once); caches and
//! backhaul links are expressed in normalized integer units: whole files and
//! rate-`r0` slots.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> Result<f64> {
    if !dbm.is_finite() {
        return Err(Error::invalid(
            "power_dbm",
            format!("must be finite, got {dbm}"),
        ));
    }
    Ok(10f64.powf((dbm - 30.0) / 10.0))
}

/// Number of users a backhaul of `capacity_bps` can serve simultaneously at
/// rate `rate_target_bps`, i.e. `floor(c_B / r0)`.
pub fn normalized_backhaul(capacity_bps: f64, rate_target_bps: f64) -> Result<u32> {
    if !rate_target_bps.is_finite() || rate_target_bps <= 0.0 {
        return Err(Error::invalid(
            "rate_target_bps",
            format!("must be positive and finite, got {rate_target_bps}"),
        ));
    }
    if !capacity_bps.is_finite() || capacity_bps < 0.0 {
        return Err(Error::invalid(
            "backhaul_bps",
            format!("must be nonnegative and finite, got {capacity_bps}"),
        ));
    }
    let slots = (capacity_bps / rate_target_bps).floor();
    if slots > u32::MAX as f64 {
        return Err(Error::invalid("backhaul_bps", "too many backhaul slots"));
    }
    Ok(slots as u32)
}

/// Number of whole files of `file_length_bits` that fit in `cache_bits`.
pub fn normalized_cache(cache_bits: f64, file_length_bits: f64) -> Result<usize> {
    if !file_length_bits.is_finite() || file_length_bits <= 0.0 {
        return Err(Error::invalid(
            "file_length_bits",
            format!("must be positive and finite, got {file_length_bits}"),
        ));
    }
    if !cache_bits.is_finite() || cache_bits < 0.0 {
        return Err(Error::invalid(
            "cache_bits",
            format!("must be nonnegative and finite, got {cache_bits}"),
        ));
    }
    Ok((cache_bits / file_length_bits).floor() as usize)
}

/// Physical-layer constants of a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    radius_m: f64,
    pathloss_exp: f64,
    noise_dbm: f64,
    noise_w: f64,
    bandwidth_hz: f64,
    tx_power_w: f64,
    rate_target_bps: f64,
}

impl RadioParams {
    pub fn new(
        radius_m: f64,
        pathloss_exp: f64,
        noise_dbm: f64,
        bandwidth_hz: f64,
        tx_power_w: f64,
        rate_target_bps: f64,
    ) -> Result<Self> {
        positive("radius_m", radius_m)?;
        if !pathloss_exp.is_finite() || pathloss_exp < 2.0 {
            return Err(Error::invalid(
                "pathloss_exp",
                format!("must be >= 2, got {pathloss_exp}"),
            ));
        }
        positive("bandwidth_hz", bandwidth_hz)?;
        positive("tx_power_w", tx_power_w)?;
        positive("rate_target_bps", rate_target_bps)?;
        let noise_w = dbm_to_watts(noise_dbm)?;
        if !noise_w.is_finite() || noise_w <= 0.0 {
            return Err(Error::invalid(
                "noise_dbm",
                format!("noise power {noise_dbm} dBm is not representable in watts"),
            ));
        }
        Ok(Self {
            radius_m,
            pathloss_exp,
            noise_dbm,
            noise_w,
            bandwidth_hz,
            tx_power_w,
            rate_target_bps,
        })
    }

    /// Small-cell defaults: 20 m radius, path-loss exponent 4, -102 dBm noise,
    /// 10 MHz bandwidth, 1 W transmit power and a 2 Mbps playback rate.
    pub fn small_cell() -> Self {
        Self::new(20.0, 4.0, -102.0, 10e6, 1.0, 2e6).expect("default radio parameters are valid")
    }

    pub fn radius_m(&self) -> f64 {
        self.radius_m
    }

    pub fn pathloss_exp(&self) -> f64 {
        self.pathloss_exp
    }

    pub fn noise_dbm(&self) -> f64 {
        self.noise_dbm
    }

    pub fn noise_watts(&self) -> f64 {
        self.noise_w
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn tx_power_w(&self) -> f64 {
        self.tx_power_w
    }

    pub fn rate_target_bps(&self) -> f64 {
        self.rate_target_bps
    }

    /// Downlink rate of a user at distance `distance_m` with channel power
    /// `gain` when the bandwidth is shared equally among `users`.
    ///
    /// The noise term is the configured noise power scaled by the per-user
    /// bandwidth share `B0 / U`.
    pub fn downlink_rate(&self, users: u32, distance_m: f64, gain: f64) -> f64 {
        let share = self.bandwidth_hz / users as f64;
        let snr =
            self.tx_power_w * gain * distance_m.powf(-self.pathloss_exp) / (share * self.noise_w);
        share * snr.ln_1p() / std::f64::consts::LN_2
    }
}

impl Default for RadioParams {
    fn default() -> Self {
        Self::small_cell()
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

/// Zipf popularity law over a library of `F` equally sized files.
///
/// File `f` (1-based rank) is requested with probability proportional to
/// `f^-zipf_exp`. The unnormalized prefix sums are computed once at
/// construction so hit ratios cost a single lookup.
#[derive(Clone)]
pub struct PopularityModel {
    library_size: usize,
    zipf_exp: f64,
    // prefix[s] = sum_{f=1..s} f^-zipf_exp, prefix[0] = 0.
    prefix: Arc<[f64]>,
}

impl PopularityModel {
    pub fn new(library_size: usize, zipf_exp: f64) -> Result<Self> {
        if library_size == 0 {
            return Err(Error::invalid("library_size", "must be at least 1"));
        }
        if !zipf_exp.is_finite() || zipf_exp < 0.0 {
            return Err(Error::invalid(
                "zipf_exp",
                format!("must be nonnegative and finite, got {zipf_exp}"),
            ));
        }
        let mut prefix = Vec::with_capacity(library_size + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for rank in 1..=library_size {
            acc += (rank as f64).powf(-zipf_exp);
            prefix.push(acc);
        }
        Ok(Self {
            library_size,
            zipf_exp,
            prefix: prefix.into(),
        })
    }

    pub fn library_size(&self) -> usize {
        self.library_size
    }

    pub fn zipf_exp(&self) -> f64 {
        self.zipf_exp
    }

    /// Normalizing constant `sum_{g=1..F} g^-zipf_exp`.
    pub fn normalizer(&self) -> f64 {
        self.prefix[self.library_size]
    }

    pub(crate) fn weight(&self, rank: usize) -> f64 {
        (rank as f64).powf(-self.zipf_exp)
    }

    pub(crate) fn partial_sum(&self, s: usize) -> f64 {
        self.prefix[s]
    }
}

impl fmt::Debug for PopularityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PopularityModel")
            .field("library_size", &self.library_size)
            .field("zipf_exp", &self.zipf_exp)
            .finish()
    }
}

impl PartialEq for PopularityModel {
    fn eq(&self, other: &Self) -> bool {
        self.library_size == other.library_size && self.zipf_exp == other.zipf_exp
    }
}

/// One cell: radio, user population, backhaul link and the cache it holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    radio: RadioParams,
    users: u32,
    backhaul_bps: f64,
    slots: u32,
    cache_files: usize,
}

impl CellSpec {
    pub fn new(
        radio: RadioParams,
        users: u32,
        backhaul_bps: f64,
        cache_files: usize,
    ) -> Result<Self> {
        if users == 0 {
            return Err(Error::invalid("users", "must be at least 1"));
        }
        let slots = normalized_backhaul(backhaul_bps, radio.rate_target_bps())?;
        Ok(Self {
            radio,
            users,
            backhaul_bps,
            slots,
            cache_files,
        })
    }

    pub fn radio(&self) -> &RadioParams {
        &self.radio
    }

    pub fn users(&self) -> u32 {
        self.users
    }

    pub fn backhaul_bps(&self) -> f64 {
        self.backhaul_bps
    }

    /// Normalized backhaul capacity `B = floor(c_B / r0)`.
    pub fn slots(&self) -> u32 {
        self.slots
    }

    pub fn cache_files(&self) -> usize {
        self.cache_files
    }

    pub fn with_cache(mut self, cache_files: usize) -> Self {
        self.cache_files = cache_files;
        self
    }

    pub(crate) fn check_cache(&self, pop: &PopularityModel) -> Result<()> {
        if self.cache_files > pop.library_size() {
            return Err(Error::invalid(
                "cache_files",
                format!(
                    "{} exceeds the library size {}",
                    self.cache_files,
                    pop.library_size()
                ),
            ));
        }
        Ok(())
    }
}

/// Outcome of a multi-cell cache budget allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Files cached at each cell, in input order.
    pub cache_files: Vec<usize>,
    /// Minimum exact USP over cells at `cache_files`.
    pub achieved_rho: f64,
    pub total_used: usize,
    /// Every cell has network support probability 1, so more budget is useless.
    pub saturated: bool,
    pub stats: SearchStats,
}

/// Work counters reported by the allocators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub bisection_steps: usize,
    pub bisection_evaluations: usize,
    pub refinement_evaluations: usize,
}

/// Monte Carlo estimate of a Bernoulli success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub trials: u64,
    pub seed: u64,
}

impl TrialEstimate {
    pub fn from_successes(successes: u64, trials: u64, seed: u64) -> Self {
        assert!(trials > 0, "estimate needs at least one trial");
        let mean = successes as f64 / trials as f64;
        let std_err = (mean * (1.0 - mean) / trials as f64).sqrt();
        Self {
            mean,
            std_err,
            trials,
            seed,
        }
    }

    /// Standardized deviation of this estimate from `expected`.
    ///
    /// Zero when the estimate is exact and matches; infinite when the
    /// estimate has no spread but disagrees.
    pub fn z_score(&self, expected: f64) -> f64 {
        let diff = self.mean - expected;
        if self.std_err > 0.0 {
            diff / self.std_err
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}
