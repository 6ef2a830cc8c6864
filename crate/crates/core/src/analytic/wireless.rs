use super::quadrature::{integrate_with_breaks, Tolerance};
use crate::model::RadioParams;
use crate::{Error, Result};

/// Outage exponent `c = B0 sigma^2 (2^(r0 U / B0) - 1) / (Pt U)`.
///
/// A user at distance `x` meets the rate target with probability
/// `exp(-c x^alpha)` under unit-mean exponential channel power.
pub fn wireless_exponent(radio: &RadioParams, users: u32) -> Result<f64> {
    if users == 0 {
        return Err(Error::invalid("users", "must be at least 1"));
    }
    let u = users as f64;
    let b0 = radio.bandwidth_hz();
    let snr_threshold = (std::f64::consts::LN_2 * radio.rate_target_bps() * u / b0).exp_m1();
    Ok(b0 * radio.noise_watts() * snr_threshold / (radio.tx_power_w() * u))
}

/// Probability that a uniformly placed user's downlink rate reaches `r0`:
/// `(2 / R^2) * int_0^R exp(-c x^alpha) x dx`.
///
/// Integrated on the unit disk radius `t = x / R`, where the exponent becomes
/// `k t^alpha` with `k = c R^alpha`.
pub fn wireless_success(radio: &RadioParams, users: u32) -> Result<f64> {
    let c = wireless_exponent(radio, users)?;
    let alpha = radio.pathloss_exp();
    let k = c * radio.radius_m().powf(alpha);
    if k == 0.0 {
        return Ok(1.0);
    }
    if k.is_infinite() {
        return Ok(0.0);
    }
    // The integrand lives on the scale t ~ k^(-1/alpha); seed the partition
    // there so a strongly attenuated cell is not integrated as zero.
    let scale = k.powf(-1.0 / alpha);
    let breaks = [scale, 4.0 * scale, 16.0 * scale, 64.0 * scale];
    let integral = integrate_with_breaks(
        |t: f64| 2.0 * t * (-k * t.powf(alpha)).exp(),
        0.0,
        1.0,
        &breaks,
        Tolerance::default(),
    )?;
    Ok(integral.value.clamp(0.0, 1.0))
}
