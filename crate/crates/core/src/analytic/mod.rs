//! Exact and closed-form success probabilities.
//!
//! The exact path composes the Zipf hit ratio, the wireless success integral
//! and the backhaul contention sum into the user success probability (USP).
//! The approximate path replaces the hit ratio by its integral form and relaxes
//! the contention term to `B / U`, which makes the minimum cache size
//! invertible in closed form.

mod backhaul;
mod popularity;
pub mod quadrature;
mod usp;
mod wireless;

pub use backhaul::backhaul_success;
pub use popularity::{hit_ratio_approx, hit_ratio_exact, zipf_pmf};
pub use usp::{
    closed_form_usp, min_cache_closed_form, network_support, usp_approx, usp_exact,
    usp_with_wireless, ClosedFormCache, UspBreakdown,
};
pub use wireless::{wireless_exponent, wireless_success};
