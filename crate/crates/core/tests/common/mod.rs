//! Property checks shared by the proptest suite and the acceptance run.
#![allow(dead_code)]

use entflux::analysis::critical_noise;
use entflux::link::{
    accidental_rate_general, accidental_rate_single, ebr_dimensioned, ebr_dimensionless,
    fidelity_dimensioned, fidelity_dimensionless, LinkMetrics, LinkSpec, UserEndpoint,
};
use entflux::optimizer::{
    brute_force_optimize, ga_optimize, BruteForceOptions, FluxMode, GaConfig, NetworkSpec,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 10_000;

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Detector figures spanning the regimes of interest.
pub fn detector() -> impl Strategy<Value = (f64, f64)> {
    (-4.0f64..0.0, 0.0f64..5.0).prop_map(|(le, ld)| (10f64.powf(le), 10f64.powf(ld) - 1.0))
}

/// `(y1, y2)` strictly inside the entangleable region.
pub fn entangleable_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..0.6, 0.0f64..0.95, any::<bool>()).prop_map(|(y1, s, swap)| {
        let y2 = s * critical_noise(y1).unwrap();
        if swap {
            (y2, y1)
        } else {
            (y1, y2)
        }
    })
}

pub fn noise_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..0.5, 0.0f64..0.5)
}

pub fn network(ys: &[(f64, f64)], channels: usize, f_min: f64) -> NetworkSpec {
    let tau = 1e-9;
    let links = ys
        .iter()
        .enumerate()
        .map(|(i, &(y1, y2))| LinkSpec::from_noise(&format!("N{i}"), y1, y2, tau).unwrap())
        .collect();
    NetworkSpec::new(links, channels, tau, f_min, FluxMode::Uniform).unwrap()
}

/// Rate-level route against the closed dimensionless forms.
pub fn dimensional_consistency(
    (eta1, d1): (f64, f64),
    (eta2, d2): (f64, f64),
    log_tau: f64,
    log_x: f64,
) -> Result<(), TestCaseError> {
    let tau = 10f64.powf(log_tau);
    let mu = 10f64.powf(log_x) / tau;
    let a = UserEndpoint::new("a", eta1, d1).unwrap();
    let b = UserEndpoint::new("b", eta2, d2).unwrap();
    let link = LinkSpec::new("ab", a.clone(), b.clone()).unwrap();
    let m = LinkMetrics::evaluate(&link, mu, tau).unwrap();
    let f = fidelity_dimensioned(mu, &a, &b, tau);
    let (y1, y2) = link.noise_params(tau);
    prop_assert!(rel_close(
        f,
        fidelity_dimensionless(tau * mu, y1, y2),
        1e-12
    ));
    prop_assert!(
        rel_close(f, m.fidelity.unwrap(), 1e-12),
        "{f} vs {:?}",
        m.fidelity
    );
    let r = ebr_dimensioned(mu, &a, &b, tau);
    prop_assert!(rel_close(
        r,
        eta1 * eta2 / tau * ebr_dimensionless(tau * mu, y1, y2),
        1e-12
    ));
    // Near the separability edge log2(2F) loses relative precision.
    if f > 0.5 + 1e-6 {
        prop_assert!(rel_close(r, m.ebr, 1e-10), "{r} vs {}", m.ebr);
    }
    Ok(())
}

pub fn swap_symmetry((y1, y2): (f64, f64), x: f64) -> Result<(), TestCaseError> {
    prop_assert_eq!(
        fidelity_dimensionless(x, y1, y2),
        fidelity_dimensionless(x, y2, y1)
    );
    prop_assert_eq!(ebr_dimensionless(x, y1, y2), ebr_dimensionless(x, y2, y1));
    Ok(())
}

/// Several channels of one link: the per-channel sum form equals the
/// single-link polynomial.
pub fn singleton_rates(
    (eta1, d1): (f64, f64),
    (eta2, d2): (f64, f64),
    channel_fluxes: &[f64],
) -> Result<(), TestCaseError> {
    let tau = 1e-9;
    let a = UserEndpoint::new("a", eta1, d1).unwrap();
    let b = UserEndpoint::new("b", eta2, d2).unwrap();
    let general = accidental_rate_general(&a, &b, channel_fluxes, channel_fluxes, tau).unwrap();
    let single = accidental_rate_single(&a, &b, channel_fluxes.iter().sum(), tau).unwrap();
    prop_assert!(rel_close(general, single, 1e-12), "{general} vs {single}");
    Ok(())
}

pub fn brute_monotone_in_k(ys: &[(f64, f64)], k: usize, f_min: f64) -> Result<(), TestCaseError> {
    let opts = BruteForceOptions::default();
    let at_k = brute_force_optimize(&network(ys, k, f_min), &opts).unwrap();
    let at_2k = brute_force_optimize(&network(ys, 2 * k, f_min), &opts).unwrap();
    prop_assert!(
        at_k.fitness() <= at_2k.fitness() + 1e-12,
        "K={k}: {} > {}",
        at_k.fitness(),
        at_2k.fitness()
    );
    Ok(())
}

pub fn small_ga(seed: u64) -> GaConfig {
    GaConfig {
        population_size: 16,
        stall_generations: 8,
        elite_count: 2,
        max_generations: 40,
        rng_seed: seed,
        independent_runs: 1,
        ..GaConfig::default()
    }
}

pub fn elitist_trace(
    ys: &[(f64, f64)],
    k: usize,
    f_min: f64,
    seed: u64,
) -> Result<(), TestCaseError> {
    let res = ga_optimize(&network(ys, k, f_min), &small_ga(seed)).unwrap();
    for w in res.trace.windows(2) {
        prop_assert!(w[1].best >= w[0].best, "{:?}", w);
    }
    prop_assert_eq!(res.trace.last().unwrap().best, res.fitness());
    Ok(())
}

pub fn small_instance() -> impl Strategy<Value = (Vec<(f64, f64)>, usize, f64)> {
    (
        prop::collection::vec(entangleable_pair(), 1..=3),
        1usize..=3,
        prop_oneof![Just(0.0), 0.5f64..0.8],
    )
}
