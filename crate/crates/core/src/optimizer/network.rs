use std::collections::HashSet;

use crate::analysis::entanglement_possible;
use crate::link::LinkSpec;

use super::OptimizeError;

/// How the total source flux is spread over the channels.
#[derive(Debug, Clone, PartialEq)]
pub enum FluxMode {
    /// `mu_k = mu_tot / K`
    Uniform,
    /// `mu_k = mu_tot * w_k / sum(w)`
    PerChannel(Vec<f64>),
}

/// One-to-one links sharing `K` channel pairs from a single source.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    links: Vec<LinkSpec>,
    channels: usize,
    tau: f64,
    f_min: f64,
    flux_mode: FluxMode,
    noise: Vec<(f64, f64)>,
}

impl NetworkSpec {
    pub fn new(
        links: Vec<LinkSpec>,
        channels: usize,
        tau: f64,
        f_min: f64,
        flux_mode: FluxMode,
    ) -> Result<Self, OptimizeError> {
        if links.is_empty() {
            return Err(OptimizeError::InvalidNetwork("no links".into()));
        }
        if channels == 0 {
            return Err(OptimizeError::InvalidNetwork("no channels".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(OptimizeError::InvalidNetwork(format!(
                "coincidence window {tau} must be positive"
            )));
        }
        if !(0.0..=1.0).contains(&f_min) {
            return Err(OptimizeError::InvalidNetwork(format!(
                "fidelity threshold {f_min} outside [0, 1]"
            )));
        }
        if links.len() > u16::MAX as usize {
            return Err(OptimizeError::InvalidNetwork("too many links".into()));
        }
        let mut seen = HashSet::new();
        for link in &links {
            for user in [&link.user_a, &link.user_b] {
                if !seen.insert(user.label.as_str()) {
                    return Err(OptimizeError::InvalidNetwork(format!(
                        "user {:?} appears in more than one link",
                        user.label
                    )));
                }
            }
        }
        if let FluxMode::PerChannel(weights) = &flux_mode {
            if weights.len() != channels {
                return Err(OptimizeError::InvalidNetwork(format!(
                    "{} channel weights for {channels} channels",
                    weights.len()
                )));
            }
            if weights.iter().any(|w| !w.is_finite() || *w < 0.0)
                || weights.iter().sum::<f64>() <= 0.0
            {
                return Err(OptimizeError::InvalidNetwork(
                    "channel weights must be non-negative with a positive sum".into(),
                ));
            }
        }
        let noise: Vec<(f64, f64)> = links.iter().map(|l| l.noise_params(tau)).collect();
        for (link, &(y1, y2)) in links.iter().zip(&noise) {
            if !entanglement_possible(y1, y2) {
                return Err(OptimizeError::Unentangleable(link.name.clone()));
            }
        }
        Ok(Self {
            links,
            channels,
            tau,
            f_min,
            flux_mode,
            noise,
        })
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// `K`
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn flux_mode(&self) -> &FluxMode {
        &self.flux_mode
    }

    /// `(y1, y2)` per link.
    pub fn noise(&self) -> &[(f64, f64)] {
        &self.noise
    }

    /// Same network with a different channel count; per-channel weights are
    /// dropped in favour of uniform flux.
    pub fn with_channels(&self, channels: usize) -> Result<Self, OptimizeError> {
        let flux_mode = match &self.flux_mode {
            FluxMode::PerChannel(w) if w.len() == channels => self.flux_mode.clone(),
            _ => FluxMode::Uniform,
        };
        Self::new(
            self.links.clone(),
            channels,
            self.tau,
            self.f_min,
            flux_mode,
        )
    }
}

/// Channel-to-link assignment plus total source flux.
///
/// `alpha[k] == 0` sends channel `k` to the reserve; `alpha[k] == l` assigns it
/// to link `l` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub alpha: Vec<u16>,
    /// Total biphoton flux at the source, pairs/s.
    pub mu_tot: f64,
}

impl Allocation {
    pub fn new(alpha: Vec<u16>, mu_tot: f64) -> Self {
        Self { alpha, mu_tot }
    }

    /// Assigns the first `counts[0]` channels to link 1, the next `counts[1]`
    /// to link 2 and so on; leftover channels go to the reserve.
    pub fn from_counts(counts: &[usize], channels: usize, mu_tot: f64) -> Self {
        let mut alpha = Vec::with_capacity(channels);
        for (l, &c) in counts.iter().enumerate() {
            alpha.extend(std::iter::repeat_n((l + 1) as u16, c));
        }
        alpha.resize(channels, 0);
        Self { alpha, mu_tot }
    }

    pub fn validate(&self, net: &NetworkSpec) -> Result<(), OptimizeError> {
        if self.alpha.len() != net.channels() {
            return Err(OptimizeError::InvalidAllocation(format!(
                "allocation has {} entries for {} channels",
                self.alpha.len(),
                net.channels()
            )));
        }
        if let Some(&bad) = self.alpha.iter().find(|&&a| a as usize > net.link_count()) {
            return Err(OptimizeError::InvalidAllocation(format!(
                "entry {bad} exceeds link count {}",
                net.link_count()
            )));
        }
        if !self.mu_tot.is_finite() || self.mu_tot < 0.0 {
            return Err(OptimizeError::InvalidAllocation(format!(
                "total flux {} is negative or not finite",
                self.mu_tot
            )));
        }
        Ok(())
    }

    /// Channels per link (index 0 is link 1); the reserve is omitted.
    pub fn counts(&self, links: usize) -> Vec<usize> {
        let mut counts = vec![0; links];
        for &a in &self.alpha {
            if a > 0 {
                counts[a as usize - 1] += 1;
            }
        }
        counts
    }

    pub fn reserve_count(&self) -> usize {
        self.alpha.iter().filter(|&&a| a == 0).count()
    }

    /// Channel indices of link `l` (1-based), or of the reserve for `l = 0`.
    pub fn channel_set(&self, l: u16) -> Vec<usize> {
        self.alpha
            .iter()
            .enumerate()
            .filter_map(|(k, &a)| (a == l).then_some(k))
            .collect()
    }
}

/// Dimensionless flux `x_l = tau * mu_bar_l` of every link. Reserve flux
/// reaches no link.
pub fn link_fluxes(alloc: &Allocation, net: &NetworkSpec) -> Result<Vec<f64>, OptimizeError> {
    alloc.validate(net)?;
    let mut out = vec![0.0; net.link_count()];
    fill_link_fluxes(&alloc.alpha, alloc.mu_tot, net, &mut out);
    Ok(out)
}

pub(crate) fn fill_link_fluxes(alpha: &[u16], mu_tot: f64, net: &NetworkSpec, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    let x_tot = net.tau() * mu_tot;
    match net.flux_mode() {
        FluxMode::Uniform => {
            let mut counts = vec![0usize; out.len()];
            for &a in alpha {
                if a > 0 {
                    counts[a as usize - 1] += 1;
                }
            }
            uniform_fluxes(&counts, x_tot, net.channels(), out);
        }
        FluxMode::PerChannel(weights) => {
            let total: f64 = weights.iter().sum();
            for (&a, &w) in alpha.iter().zip(weights) {
                if a > 0 {
                    out[a as usize - 1] += x_tot * w / total;
                }
            }
        }
    }
}

pub(crate) fn uniform_fluxes(counts: &[usize], x_tot: f64, channels: usize, out: &mut [f64]) {
    let k = channels as f64;
    for (x, &c) in out.iter_mut().zip(counts) {
        *x = (c as f64 * x_tot) / k;
    }
}
