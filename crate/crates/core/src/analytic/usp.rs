use super::{backhaul_success, hit_ratio_approx, hit_ratio_exact, wireless_success};
use crate::model::{CellSpec, PopularityModel};
use crate::{Error, Result};

/// Components of the user success probability of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UspBreakdown {
    pub p_wireless: f64,
    pub p_backhaul: f64,
    pub hit_ratio: f64,
    pub p_network: f64,
    pub p_user: f64,
}

/// `h + (1 - h) * P^B`: the request is cached or the backhaul carries it.
pub fn network_support(hit_ratio: f64, p_backhaul: f64) -> Result<f64> {
    probability("hit_ratio", hit_ratio)?;
    probability("p_backhaul", p_backhaul)?;
    Ok(hit_ratio + (1.0 - hit_ratio) * p_backhaul)
}

/// Exact USP of `cell` at its configured cache size.
pub fn usp_exact(cell: &CellSpec, pop: &PopularityModel) -> Result<UspBreakdown> {
    let p_wireless = wireless_success(cell.radio(), cell.users())?;
    usp_with_wireless(cell, pop, p_wireless)
}

/// [`usp_exact`] with a precomputed wireless success probability.
///
/// The wireless term does not depend on the cache, so searches over cache
/// sizes evaluate the integral once per cell and reuse it here.
pub fn usp_with_wireless(
    cell: &CellSpec,
    pop: &PopularityModel,
    p_wireless: f64,
) -> Result<UspBreakdown> {
    cell.check_cache(pop)?;
    probability("p_wireless", p_wireless)?;
    let hit_ratio = hit_ratio_exact(pop, cell.cache_files())?;
    let p_backhaul = backhaul_success(cell.users(), cell.slots(), hit_ratio)?;
    let p_network = network_support(hit_ratio, p_backhaul)?;
    Ok(UspBreakdown {
        p_wireless,
        p_backhaul,
        hit_ratio,
        p_network,
        p_user: p_wireless * p_network,
    })
}

/// Closed-form USP `P^W * min(1, h_approx(s) + B / U)`.
///
/// Drops the `h^U` term and the per-contender cap of the contention sum, so it
/// tends to sit above [`usp_exact`] once the integral hit ratio is accurate.
pub fn usp_approx(cell: &CellSpec, pop: &PopularityModel) -> Result<f64> {
    cell.check_cache(pop)?;
    let p_wireless = wireless_success(cell.radio(), cell.users())?;
    let h = hit_ratio_approx(pop, cell.cache_files())?;
    Ok(closed_form_usp(p_wireless, h, cell.slots(), cell.users()))
}

/// `P^W * min(1, h + B / U)`, clamped to `[0, 1]`.
pub fn closed_form_usp(p_wireless: f64, hit_ratio: f64, slots: u32, users: u32) -> f64 {
    let support = (hit_ratio + slots as f64 / users as f64).min(1.0);
    (p_wireless * support).clamp(0.0, 1.0)
}

/// Result of inverting the closed-form USP for a target threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormCache {
    /// Approximate minimum cache in files, within `[0, F]`. `unit_exponent`
    /// marks results of the logarithmic form used at a Zipf exponent of 1.
    Files { files: f64, unit_exponent: bool },
    /// The threshold exceeds the wireless success probability; no cache helps.
    Infeasible,
}

impl ClosedFormCache {
    pub fn files(&self) -> Option<f64> {
        match *self {
            ClosedFormCache::Files { files, .. } => Some(files),
            ClosedFormCache::Infeasible => None,
        }
    }
}

/// Approximate minimum cache size reaching USP `theta`:
/// `[(theta/P^W - B/U)(F^(1-g) - 1) + 1]^(1/(1-g))`, or `F^(theta/P^W - B/U)`
/// at `g = 1`.
pub fn min_cache_closed_form(
    theta: f64,
    p_wireless: f64,
    slots: u32,
    users: u32,
    pop: &PopularityModel,
) -> Result<ClosedFormCache> {
    probability("theta", theta)?;
    if !(p_wireless > 0.0 && p_wireless <= 1.0) {
        return Err(Error::invalid(
            "p_wireless",
            format!("must lie in (0, 1], got {p_wireless}"),
        ));
    }
    if users == 0 {
        return Err(Error::invalid("users", "must be at least 1"));
    }
    if theta > p_wireless {
        return Ok(ClosedFormCache::Infeasible);
    }
    let a = 1.0 - pop.zipf_exp();
    let unit_exponent = a == 0.0;
    let f = pop.library_size() as f64;
    let needed = theta / p_wireless - slots as f64 / users as f64;
    if needed <= 0.0 {
        return Ok(ClosedFormCache::Files {
            files: 0.0,
            unit_exponent,
        });
    }
    let ln_f = f.ln();
    let files = if unit_exponent {
        (needed * ln_f).exp()
    } else {
        // [needed (F^a - 1) + 1]^(1/a) evaluated as exp(ln1p(needed * expm1(a ln F)) / a).
        ((needed * (a * ln_f).exp_m1()).ln_1p() / a).exp()
    };
    let files = if files.is_nan() {
        f
    } else {
        files.clamp(0.0, f)
    };
    Ok(ClosedFormCache::Files {
        files,
        unit_exponent,
    })
}

fn probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in [0, 1], got {p}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RadioParams;

    fn cell(users: u32, backhaul_bps: f64, cache: usize) -> CellSpec {
        CellSpec::new(RadioParams::small_cell(), users, backhaul_bps, cache).unwrap()
    }

    #[test]
    fn network_support_values() {
        assert_eq!(network_support(1.0, 0.2).unwrap(), 1.0);
        assert_eq!(network_support(0.0, 0.37).unwrap(), 0.37);
        assert!((network_support(0.5, 0.75).unwrap() - 0.875).abs() < 1e-15);
        assert!(network_support(1.5, 0.0).is_err());
    }

    #[test]
    fn full_cache_reduces_to_wireless() {
        let pop = PopularityModel::new(1000, 0.56).unwrap();
        let b = usp_exact(&cell(15, 0.0, 1000), &pop).unwrap();
        assert_eq!(b.p_network, 1.0);
        assert_eq!(b.p_user, b.p_wireless);
    }

    #[test]
    fn ample_backhaul_reduces_to_wireless() {
        let pop = PopularityModel::new(1000, 0.56).unwrap();
        for s in [0, 10, 500] {
            let b = usp_exact(&cell(15, 30e6, s), &pop).unwrap();
            assert_eq!(b.p_user, b.p_wireless);
        }
    }

    #[test]
    fn breakdown_is_consistent() {
        let pop = PopularityModel::new(1000, 0.56).unwrap();
        let b = usp_exact(&cell(15, 10e6, 100), &pop).unwrap();
        assert!((b.p_network - (b.hit_ratio + (1.0 - b.hit_ratio) * b.p_backhaul)).abs() < 1e-12);
        assert!((b.p_user - b.p_wireless * b.p_network).abs() < 1e-12);
        for p in [
            b.p_wireless,
            b.p_backhaul,
            b.hit_ratio,
            b.p_network,
            b.p_user,
        ] {
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn cache_beyond_library_rejected() {
        let pop = PopularityModel::new(10, 0.56).unwrap();
        assert!(usp_exact(&cell(15, 0.0, 11), &pop).is_err());
        assert!(usp_approx(&cell(15, 0.0, 11), &pop).is_err());
    }

    #[test]
    fn approx_clamps_and_saturates() {
        let pop = PopularityModel::new(100, 0.5).unwrap();
        let pw = wireless_success(&RadioParams::small_cell(), 10).unwrap();
        assert_eq!(usp_approx(&cell(10, 30e6, 3), &pop).unwrap(), pw);
        assert_eq!(usp_approx(&cell(10, 0.0, 100), &pop).unwrap(), pw);
        // h_approx(25) = 4/9 and B/U = 0.2.
        let got = usp_approx(&cell(10, 4e6, 25), &pop).unwrap();
        assert!((got - pw * (4.0 / 9.0 + 0.2)).abs() < 1e-14);
    }

    #[test]
    fn approx_direct_evaluation() {
        let pop = PopularityModel::new(100, 0.5).unwrap();
        let h = hit_ratio_approx(&pop, 25).unwrap();
        assert!((closed_form_usp(0.9, h, 2, 10) - 0.58).abs() < 1e-14);
        assert_eq!(closed_form_usp(0.9, h, 10, 10), 0.9);
    }

    #[test]
    fn closed_form_zero_when_backhaul_suffices() {
        let pop = PopularityModel::new(1000, 0.56).unwrap();
        let r = min_cache_closed_form(0.3, 0.9, 5, 15, &pop).unwrap();
        assert_eq!(r.files(), Some(0.0));
        let r = min_cache_closed_form(0.9 * 5.0 / 15.0, 0.9, 5, 15, &pop).unwrap();
        assert_eq!(r.files(), Some(0.0));
    }

    #[test]
    fn closed_form_inverts_integral_hit_ratio() {
        let pop = PopularityModel::new(100, 0.5).unwrap();
        let r = min_cache_closed_form(4.0 / 9.0, 1.0, 0, 10, &pop).unwrap();
        assert!((r.files().unwrap() - 25.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_infeasible_above_wireless() {
        let pop = PopularityModel::new(100, 0.5).unwrap();
        assert_eq!(
            min_cache_closed_form(0.95, 0.9, 0, 10, &pop).unwrap(),
            ClosedFormCache::Infeasible
        );
        assert!(min_cache_closed_form(0.5, 0.0, 0, 10, &pop).is_err());
    }

    #[test]
    fn closed_form_unit_exponent() {
        let pop = PopularityModel::new(1000, 1.0).unwrap();
        match min_cache_closed_form(0.5, 1.0, 0, 10, &pop).unwrap() {
            ClosedFormCache::Files {
                files,
                unit_exponent,
            } => {
                assert!(unit_exponent);
                assert!((files - 1000f64.sqrt()).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn closed_form_concentrated_popularity_ignores_library_size() {
        let at = |f: usize, theta: f64| {
            let pop = PopularityModel::new(f, 1.5).unwrap();
            min_cache_closed_form(theta, 1.0, 0, 15, &pop)
                .unwrap()
                .files()
                .unwrap()
        };
        let (s1, s2) = (at(10_000, 0.5), at(20_000, 0.5));
        assert!((s2 / s1 - 1.0).abs() < 0.01, "{s1} vs {s2}");
        // Limit (1 - theta/P^W + B/U)^(1/(1-g)) as F grows.
        assert!((at(10_000_000, 0.5) - 0.5f64.powf(-2.0)).abs() / 4.0 < 1e-3);
        // Sensitivity to F decays as F grows.
        let mut prev = f64::INFINITY;
        for f in [1_000, 10_000, 100_000, 1_000_000] {
            let rel = (at(2 * f, 0.8) / at(f, 0.8) - 1.0).abs();
            assert!(rel < prev);
            prev = rel;
        }
    }

    #[test]
    fn closed_form_inversion_property() {
        for g in [0.0, 0.3, 0.56, 0.9, 1.0, 1.2, 1.5, 2.0] {
            let pop = PopularityModel::new(1000, g).unwrap();
            for theta in [0.1, 0.3, 0.5, 0.7, 0.85] {
                for slots in [0, 2, 5] {
                    let pw = 0.9;
                    let files = min_cache_closed_form(theta, pw, slots, 15, &pop)
                        .unwrap()
                        .files()
                        .unwrap();
                    let s = files.ceil() as usize;
                    if s <= 1 || s >= 1000 {
                        continue;
                    }
                    let h = hit_ratio_approx(&pop, s).unwrap();
                    assert!(
                        h + slots as f64 / 15.0 >= theta / pw - 1e-9,
                        "g={g} theta={theta}"
                    );
                }
            }
        }
    }
}
