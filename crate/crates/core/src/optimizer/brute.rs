//! Exhaustive reference optimizer for small uniform-flux instances.
//!
//! With equal per-channel flux only the channel count of each link matters,
//! so the search enumerates compositions of `K` into `L` link counts plus a
//! reserve. For each composition the total flux is optimized by scalar
//! search, split at every flux where some link crosses its fidelity threshold
//! or its EBR zeros. Between those breakpoints every link term is either a
//! constant or a concave EBR, so the per-piece search is reliable.

use rayon::prelude::*;

use crate::analysis::{count_allocations, ebr_roots, fidelity_interval};
use crate::search::grid_then_golden;

use super::fitness::{FitnessModel, FitnessReport};
use super::network::{uniform_fluxes, Allocation, FluxMode, NetworkSpec};
use super::OptimizeError;

/// Largest number of compositions the oracle will enumerate.
pub const MAX_COMPOSITIONS: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceOptions {
    /// Upper bound on total flux, pairs/s; `None` uses the GA default.
    pub flux_upper: Option<f64>,
    /// Grid nodes per piece before golden refinement.
    pub grid_points: usize,
    /// Relative flux tolerance of the refinement.
    pub rel_tol: f64,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            flux_upper: None,
            grid_points: 12,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub allocation: Allocation,
    pub report: FitnessReport,
    pub compositions: u128,
}

impl BruteForceResult {
    pub fn fitness(&self) -> f64 {
        self.report.fitness
    }
}

struct Candidate {
    fitness: f64,
    counts: Vec<usize>,
    mu_tot: f64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        self.fitness > other.fitness
    }
}

struct Oracle<'a> {
    model: &'a FitnessModel,
    options: &'a BruteForceOptions,
    mu_hi: f64,
}

impl Oracle<'_> {
    fn score(&self, counts: &[usize], mu_tot: f64, scratch: &mut [f64]) -> f64 {
        let net = self.model.network();
        uniform_fluxes(counts, net.tau() * mu_tot, net.channels(), scratch);
        self.model.score_fluxes(scratch)
    }

    /// Total fluxes at which some link's score changes form.
    fn breakpoints(&self, counts: &[usize]) -> Vec<f64> {
        let net = self.model.network();
        let k = net.channels() as f64;
        let mut points = vec![0.0, self.mu_hi];
        for (&c, t) in counts.iter().zip(self.model.targets()) {
            if c == 0 {
                continue;
            }
            // x_l = c X / K  =>  mu_tot = x_l K / (c tau)
            let to_mu = |x: f64| x * k / (c as f64 * net.tau());
            if let Some((lo, hi)) = fidelity_interval(t.y1, t.y2, net.f_min()) {
                points.push(to_mu(lo));
                points.push(to_mu(hi));
            }
            if let Ok((lo, hi)) = ebr_roots(t.y1, t.y2) {
                points.push(to_mu(lo));
                points.push(to_mu(hi));
            }
        }
        points.retain(|p| p.is_finite() && *p >= 0.0 && *p <= self.mu_hi);
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }

    fn best_for(&self, counts: &[usize], scratch: &mut [f64]) -> Candidate {
        let mut best = Candidate {
            fitness: f64::NEG_INFINITY,
            counts: counts.to_vec(),
            mu_tot: 0.0,
        };
        if counts.iter().all(|&c| c == 0) {
            best.fitness = self.score(counts, 0.0, scratch);
            return best;
        }
        let points = self.breakpoints(counts);
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let xtol = (b.abs() * self.options.rel_tol).max(f64::MIN_POSITIVE);
            let m = grid_then_golden(
                |mu| self.score(counts, mu, scratch),
                a,
                b,
                self.options.grid_points,
                xtol,
            );
            if m.value > best.fitness {
                best.fitness = m.value;
                best.mu_tot = m.x;
            }
        }
        best
    }

    /// Best candidate over all completions of `prefix` with `remaining`
    /// channels left for the later links.
    fn search(
        &self,
        prefix: &mut Vec<usize>,
        remaining: usize,
        scratch: &mut [f64],
        count: &mut u128,
    ) -> Candidate {
        let links = self.model.network().link_count();
        if prefix.len() == links {
            *count += 1;
            return self.best_for(prefix, scratch);
        }
        let mut best: Option<Candidate> = None;
        for c in 0..=remaining {
            prefix.push(c);
            let cand = self.search(prefix, remaining - c, scratch, count);
            prefix.pop();
            if best.as_ref().is_none_or(|b| cand.better_than(b)) {
                best = Some(cand);
            }
        }
        best.expect("at least one completion")
    }
}

/// Global optimum over all channel-count compositions with the total flux
/// tuned per composition. Requires uniform per-channel flux.
pub fn brute_force_optimize(
    net: &NetworkSpec,
    options: &BruteForceOptions,
) -> Result<BruteForceResult, OptimizeError> {
    if net.flux_mode() != &FluxMode::Uniform {
        return Err(OptimizeError::InvalidNetwork(
            "exhaustive search needs uniform channel flux".into(),
        ));
    }
    let k = net.channels();
    let links = net.link_count();
    let total = count_allocations(k as u64, links as u64, true)?;
    if total > MAX_COMPOSITIONS {
        return Err(OptimizeError::TooLarge {
            compositions: total,
            cap: MAX_COMPOSITIONS,
        });
    }
    let model = FitnessModel::new(net);
    let mu_hi = options
        .flux_upper
        .unwrap_or_else(|| model.default_flux_bound() / net.tau());
    let oracle = Oracle {
        model: &model,
        options,
        mu_hi,
    };

    // Split on the first link's count; the rest recurses sequentially.
    let branches: Vec<(Candidate, u128)> = (0..=k)
        .into_par_iter()
        .map(|first| {
            let mut scratch = vec![0.0; links];
            let mut prefix = vec![first];
            let mut count = 0;
            let cand = oracle.search(&mut prefix, k - first, &mut scratch, &mut count);
            (cand, count)
        })
        .collect();

    let compositions = branches.iter().map(|b| b.1).sum();
    let best = branches
        .into_iter()
        .map(|b| b.0)
        .reduce(|a, b| if b.better_than(&a) { b } else { a })
        .expect("k >= 1");
    let allocation = Allocation::from_counts(&best.counts, k, best.mu_tot);
    let report = model.evaluate(&allocation)?;
    Ok(BruteForceResult {
        allocation,
        report,
        compositions,
    })
}
