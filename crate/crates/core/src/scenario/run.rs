use rayon::prelude::*;

use crate::link::{check_validity, fidelity_dimensionless, ValidityCheck, DEFAULT_CLICK_THRESHOLD};
use crate::optimizer::{best_of_runs, ideal_fitness, GaResult, IdealFitness, OptimizeError};

use super::spec::{LinkParams, ScenarioSpec};
use super::ScenarioError;

/// Operating point of one link in a champion allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPoint {
    pub channels: usize,
    /// Dimensionless link flux `x_l`.
    pub x: f64,
    /// `None` when the link has no channels.
    pub fidelity: Option<f64>,
    pub ebr_normalized: f64,
    pub beta: f64,
}

/// Best-of-runs outcome at one channel count.
#[derive(Debug, Clone)]
pub struct ChannelResult {
    pub channels: usize,
    pub runs: Vec<GaResult>,
    pub champion: usize,
    /// `(f_inf - f) / f_inf` in percent, when `f_inf > 0`.
    pub deviation_pct: Option<f64>,
    pub counts: Vec<usize>,
    pub reserve: usize,
    pub points: Vec<LinkPoint>,
    /// Click-probability checks at both users of every allocated link.
    /// Links given only by noise parameters are checked with unit
    /// efficiency, which bounds the true probability from above.
    pub validity: Vec<ValidityCheck>,
}

impl ChannelResult {
    pub fn champion(&self) -> &GaResult {
        &self.runs[self.champion]
    }

    pub fn fitness(&self) -> f64 {
        self.champion().fitness()
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ValidityCheck> {
        self.validity.iter().filter(|v| !v.passes())
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub spec: ScenarioSpec,
    pub seed: u64,
    /// `None` when some link cannot reach the fidelity threshold.
    pub ideal: Option<IdealFitness>,
    pub per_k: Vec<ChannelResult>,
}

impl ScenarioResult {
    pub fn f_inf(&self) -> Option<f64> {
        self.ideal.as_ref().map(|i| i.total)
    }
}

fn channel_result(
    spec: &ScenarioSpec,
    k: usize,
    f_inf: Option<f64>,
) -> Result<ChannelResult, ScenarioError> {
    let net = spec.network(k)?;
    let best = best_of_runs(&net, &spec.ga_config())?;
    let champ = best.champion();
    let links = net.link_count();
    let counts = champ.allocation.counts(links);
    let reserve = champ.allocation.reserve_count();
    let report = &champ.report;
    let points = (0..links)
        .map(|l| {
            let x = report.fluxes[l];
            let (y1, y2) = net.noise()[l];
            let r_max = crate::analysis::ebr_max(y1, y2).1;
            LinkPoint {
                channels: counts[l],
                x,
                fidelity: (counts[l] > 0).then(|| fidelity_dimensionless(x, y1, y2)),
                ebr_normalized: crate::link::ebr_dimensionless(x, y1, y2) / r_max,
                beta: report.betas[l],
            }
        })
        .collect();
    let tau = net.tau();
    let mut validity = Vec::new();
    for (l, link) in net.links().iter().enumerate() {
        if counts[l] == 0 {
            continue;
        }
        let mu_bar = report.fluxes[l] / tau;
        for user in [&link.user_a, &link.user_b] {
            validity.push(check_validity(user, mu_bar, tau, DEFAULT_CLICK_THRESHOLD));
        }
    }
    let f = champ.fitness();
    let deviation_pct = f_inf.filter(|v| *v > 0.0).map(|v| (v - f) / v * 100.0);
    Ok(ChannelResult {
        channels: k,
        champion: best.champion,
        runs: best.runs,
        deviation_pct,
        counts,
        reserve,
        points,
        validity,
    })
}

/// Runs best-of-runs GA at every channel count of the spec. Channel counts
/// are processed in parallel; results depend only on the seed.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioResult, ScenarioError> {
    spec.validate()?;
    let net = spec.network(spec.k_list[0])?;
    let ideal = match ideal_fitness(&net) {
        Ok(ideal) => Some(ideal),
        Err(OptimizeError::InfeasibleLinks(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let f_inf = ideal.as_ref().map(|i| i.total);
    let per_k = spec
        .k_list
        .par_iter()
        .map(|&k| channel_result(spec, k, f_inf))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScenarioResult {
        spec: spec.clone(),
        seed: spec.ga_config().rng_seed,
        ideal,
        per_k,
    })
}

/// True when every link of the spec was given by detector figures.
pub(crate) fn all_detector_links(spec: &ScenarioSpec) -> bool {
    spec.links
        .iter()
        .all(|l| matches!(l.params, LinkParams::Detectors { .. }))
}
