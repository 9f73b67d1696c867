use crate::analysis::{constrained_optimal_flux, ebr_max, AnalysisError};
use crate::link::{ebr_dimensionless, fidelity_dimensionless, LinkMetrics};

use super::network::{fill_link_fluxes, Allocation, NetworkSpec};
use super::OptimizeError;

/// Score of a link that misses the fidelity threshold.
pub const PENALTY: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkStatus {
    Feasible,
    BelowThreshold,
    /// No channels: fidelity undefined, contributes zero.
    Unallocated,
}

/// Per-link optimum data the fitness needs on every evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkTarget {
    pub y1: f64,
    pub y2: f64,
    /// Unconstrained EBR peak, the normalizer of each link's score.
    pub r_max: f64,
    pub x_r: f64,
    /// Constrained optimum flux, `None` when the threshold is unreachable.
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitnessReport {
    pub fitness: f64,
    pub betas: Vec<f64>,
    pub status: Vec<LinkStatus>,
    pub fluxes: Vec<f64>,
    pub metrics: Vec<LinkMetrics>,
}

/// Network fitness: the sum over links of normalized EBR, or -1 for any
/// link below the fidelity threshold.
#[derive(Debug, Clone)]
pub struct FitnessModel {
    net: NetworkSpec,
    targets: Vec<LinkTarget>,
}

impl FitnessModel {
    pub fn new(net: &NetworkSpec) -> Self {
        let targets = net
            .noise()
            .iter()
            .map(|&(y1, y2)| {
                let (x_r, r_max) = ebr_max(y1, y2);
                LinkTarget {
                    y1,
                    y2,
                    r_max,
                    // NetworkSpec rejects links without an EBR peak.
                    x_r: x_r.expect("entangleable link"),
                    phi: constrained_optimal_flux(y1, y2, net.f_min())
                        .ok()
                        .map(|p| p.0),
                }
            })
            .collect();
        Self {
            net: net.clone(),
            targets,
        }
    }

    pub fn network(&self) -> &NetworkSpec {
        &self.net
    }

    pub fn targets(&self) -> &[LinkTarget] {
        &self.targets
    }

    /// Score contribution of one link at dimensionless flux `x`.
    pub fn beta(&self, link: usize, x: f64) -> (f64, LinkStatus) {
        if x <= 0.0 {
            return (0.0, LinkStatus::Unallocated);
        }
        let t = &self.targets[link];
        if fidelity_dimensionless(x, t.y1, t.y2) >= self.net.f_min() {
            (
                ebr_dimensionless(x, t.y1, t.y2) / t.r_max,
                LinkStatus::Feasible,
            )
        } else {
            (PENALTY, LinkStatus::BelowThreshold)
        }
    }

    /// Fitness from precomputed link fluxes.
    pub fn score_fluxes(&self, fluxes: &[f64]) -> f64 {
        fluxes
            .iter()
            .enumerate()
            .map(|(l, &x)| self.beta(l, x).0)
            .sum()
    }

    /// Fitness of a raw gene, reusing `scratch` for the link fluxes.
    pub fn score(&self, alpha: &[u16], mu_tot: f64, scratch: &mut [f64]) -> f64 {
        fill_link_fluxes(alpha, mu_tot, &self.net, scratch);
        self.score_fluxes(scratch)
    }

    pub fn evaluate(&self, alloc: &Allocation) -> Result<FitnessReport, OptimizeError> {
        alloc.validate(&self.net)?;
        let mut fluxes = vec![0.0; self.net.link_count()];
        fill_link_fluxes(&alloc.alpha, alloc.mu_tot, &self.net, &mut fluxes);
        let (betas, status): (Vec<f64>, Vec<LinkStatus>) = fluxes
            .iter()
            .enumerate()
            .map(|(l, &x)| self.beta(l, x))
            .unzip();
        let tau = self.net.tau();
        let metrics = self
            .net
            .links()
            .iter()
            .zip(&fluxes)
            .map(|(link, &x)| LinkMetrics::evaluate(link, x / tau, tau))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FitnessReport {
            fitness: betas.iter().sum(),
            betas,
            status,
            fluxes,
            metrics,
        })
    }

    /// Default upper bound on the total dimensionless flux:
    /// `4 K max_l(phi_l or x_R,l)`.
    pub fn default_flux_bound(&self) -> f64 {
        let peak = self
            .targets
            .iter()
            .map(|t| t.phi.unwrap_or(t.x_r))
            .fold(0.0, f64::max);
        4.0 * self.net.channels() as f64 * peak
    }
}

/// Convenience wrapper around [`FitnessModel::evaluate`].
pub fn fitness(alloc: &Allocation, net: &NetworkSpec) -> Result<FitnessReport, OptimizeError> {
    FitnessModel::new(net).evaluate(alloc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealFitness {
    pub total: f64,
    /// `(phi_l, beta_l)` per link.
    pub links: Vec<(f64, f64)>,
}

/// Best fitness reachable with unlimited channels and flux: every link sits
/// at its constrained optimum.
pub fn ideal_fitness(net: &NetworkSpec) -> Result<IdealFitness, OptimizeError> {
    let mut links = Vec::with_capacity(net.link_count());
    let mut infeasible = Vec::new();
    for (link, &(y1, y2)) in net.links().iter().zip(net.noise()) {
        match constrained_optimal_flux(y1, y2, net.f_min()) {
            Ok((phi, r)) => links.push((phi, r / ebr_max(y1, y2).1)),
            Err(AnalysisError::Infeasible { .. }) => infeasible.push(link.name.clone()),
            Err(e) => return Err(e.into()),
        }
    }
    if !infeasible.is_empty() {
        return Err(OptimizeError::InfeasibleLinks(infeasible));
    }
    Ok(IdealFitness {
        total: links.iter().map(|l| l.1).sum(),
        links,
    })
}
