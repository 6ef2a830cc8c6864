use crate::{Error, Result};

/// Probability that a user whose request misses the cache is granted one of
/// `slots` backhaul slots, when each of the other `users - 1` users misses
/// independently with probability `1 - hit_ratio` and slots go to a uniform
/// random subset of the contenders:
///
/// `sum_{m=0}^{U-1} C(U-1, m) h^(U-1-m) (1-h)^m min(1, B / (m+1))`.
///
/// Binomial weights are generated by the ratio recurrence outward from the
/// mode and normalized by their own sum, so no factorial or power of `h`
/// is ever formed and large `U` neither overflows nor underflows the mass
/// that matters.
pub fn backhaul_success(users: u32, slots: u32, hit_ratio: f64) -> Result<f64> {
    if users == 0 {
        return Err(Error::invalid("users", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&hit_ratio) {
        return Err(Error::invalid(
            "hit_ratio",
            format!("must lie in [0, 1], got {hit_ratio}"),
        ));
    }
    if slots >= users {
        return Ok(1.0);
    }
    if slots == 0 {
        return Ok(0.0);
    }
    let b = slots as f64;
    let share = |m: usize| (b / (m as f64 + 1.0)).min(1.0);
    let n = (users - 1) as usize;
    if hit_ratio == 1.0 {
        return Ok(share(0));
    }
    if hit_ratio == 0.0 {
        return Ok(share(n));
    }

    let miss = 1.0 - hit_ratio;
    let odds = miss / hit_ratio;
    let mode = (((n + 1) as f64 * miss).floor() as usize).min(n);

    let mut mass = 1.0;
    let mut weighted = share(mode);

    let mut term = 1.0;
    for m in mode..n {
        term *= (n - m) as f64 / (m + 1) as f64 * odds;
        if term == 0.0 {
            break;
        }
        mass += term;
        weighted += term * share(m + 1);
    }
    let mut term = 1.0;
    for m in (1..=mode).rev() {
        term *= m as f64 / (n - m + 1) as f64 / odds;
        if term == 0.0 {
            break;
        }
        mass += term;
        weighted += term * share(m - 1);
    }
    Ok((weighted / mass).clamp(0.0, 1.0))
}
