//! Coincidence statistics and state quality for a single entanglement link.
//!
//! A link joins two users, each with two threshold detectors of system
//! efficiency `eta` and dark-count rate `d`. Given the biphoton flux routed to
//! the link (and to any other links the users share), the model yields the
//! accidental and correlated coincidence rates, the Werner visibility, and
//! from those the fidelity and entangled bit rate (EBR).
//!
//! The dimensionless forms use `x = tau * mu` (pairs per coincidence window)
//! and `y = tau * d / eta` per user.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::{bell_psi_minus, PureState4};

/// Default ceiling on the single-detector click probability per window.
pub const DEFAULT_CLICK_THRESHOLD: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("user {label:?}: efficiency {eta} outside (0, 1]")]
    BadEfficiency { label: String, eta: f64 },
    #[error("user {label:?}: dark-count rate {dark_rate} is negative or not finite")]
    BadDarkRate { label: String, dark_rate: f64 },
    #[error("coincidence window {0} must be positive and finite")]
    BadWindow(f64),
    #[error("flux {0} is negative or not finite")]
    BadFlux(f64),
    #[error("visibility undefined: no coincidences (A + C = 0)")]
    UndefinedVisibility,
    #[error("noise parameter {0} is negative or not finite")]
    BadNoise(f64),
    #[error("link joins user {0:?} to itself")]
    SelfLink(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserEndpoint {
    pub label: String,
    /// System efficiency including all optical losses.
    pub eta: f64,
    /// Dark counts per second, including stray light.
    pub dark_rate: f64,
}

impl UserEndpoint {
    pub fn new(label: impl Into<String>, eta: f64, dark_rate: f64) -> Result<Self, ModelError> {
        let label = label.into();
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(ModelError::BadEfficiency { label, eta });
        }
        if !dark_rate.is_finite() || dark_rate < 0.0 {
            return Err(ModelError::BadDarkRate { label, dark_rate });
        }
        Ok(Self {
            label,
            eta,
            dark_rate,
        })
    }

    /// A unit-efficiency user whose dark rate reproduces noise parameter `y`
    /// at coincidence window `tau`.
    pub fn from_noise(label: impl Into<String>, y: f64, tau: f64) -> Result<Self, ModelError> {
        check_window(tau)?;
        if !y.is_finite() || y < 0.0 {
            return Err(ModelError::BadNoise(y));
        }
        Self::new(label, 1.0, y / tau)
    }
}

/// Dimensionless noise parameter `y = tau * d / eta`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseParam(f64);

impl NoiseParam {
    pub fn new(y: f64) -> Result<Self, ModelError> {
        if !y.is_finite() || y < 0.0 {
            return Err(ModelError::BadNoise(y));
        }
        Ok(Self(y))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// One-to-one entanglement link between two distinct users.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub name: String,
    pub user_a: UserEndpoint,
    pub user_b: UserEndpoint,
    pub target: PureState4,
}

impl LinkSpec {
    pub fn new(
        name: impl Into<String>,
        user_a: UserEndpoint,
        user_b: UserEndpoint,
    ) -> Result<Self, ModelError> {
        if user_a.label == user_b.label {
            return Err(ModelError::SelfLink(user_a.label));
        }
        Ok(Self {
            name: name.into(),
            user_a,
            user_b,
            target: bell_psi_minus(),
        })
    }

    /// Link between two unit-efficiency users labelled `<name>.a` and
    /// `<name>.b` with the given noise parameters.
    pub fn from_noise(name: &str, y1: f64, y2: f64, tau: f64) -> Result<Self, ModelError> {
        Self::new(
            name,
            UserEndpoint::from_noise(format!("{name}.a"), y1, tau)?,
            UserEndpoint::from_noise(format!("{name}.b"), y2, tau)?,
        )
    }

    pub fn noise_params(&self, tau: f64) -> (f64, f64) {
        (
            noise_param(&self.user_a, tau).value(),
            noise_param(&self.user_b, tau).value(),
        )
    }
}

fn check_window(tau: f64) -> Result<(), ModelError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(ModelError::BadWindow(tau));
    }
    Ok(())
}

fn check_flux(mu: f64) -> Result<(), ModelError> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(ModelError::BadFlux(mu));
    }
    Ok(())
}

/// Accidental coincidence rate summed over the four detector pairings.
///
/// `fluxes_a` and `fluxes_b` hold the source flux of every link touching the
/// respective user, since all of them contribute singles at that user.
pub fn accidental_rate_general(
    user_a: &UserEndpoint,
    user_b: &UserEndpoint,
    fluxes_a: &[f64],
    fluxes_b: &[f64],
    tau: f64,
) -> Result<f64, ModelError> {
    check_window(tau)?;
    for &mu in fluxes_a.iter().chain(fluxes_b) {
        check_flux(mu)?;
    }
    let singles_a = user_a.eta / 2.0 * fluxes_a.iter().sum::<f64>() + user_a.dark_rate;
    let singles_b = user_b.eta / 2.0 * fluxes_b.iter().sum::<f64>() + user_b.dark_rate;
    Ok(4.0 * tau * singles_a * singles_b)
}

/// Accidental rate when each user belongs to this link only, written as a
/// polynomial in the link flux.
pub fn accidental_rate_single(
    user_a: &UserEndpoint,
    user_b: &UserEndpoint,
    link_flux: f64,
    tau: f64,
) -> Result<f64, ModelError> {
    check_window(tau)?;
    check_flux(link_flux)?;
    let (e1, e2, d1, d2) = (user_a.eta, user_b.eta, user_a.dark_rate, user_b.dark_rate);
    let mu = link_flux;
    Ok(4.0 * tau * (e1 * e2 / 4.0 * mu * mu + (e1 * d2 / 2.0 + e2 * d1 / 2.0) * mu + d1 * d2))
}

/// Coincidences from photons of the same pair.
pub fn correlated_rate(user_a: &UserEndpoint, user_b: &UserEndpoint, link_flux: f64) -> f64 {
    user_a.eta * user_b.eta * link_flux
}

/// `C / (A + C)`
pub fn visibility(accidental: f64, correlated: f64) -> Result<f64, ModelError> {
    let total = accidental + correlated;
    if total <= 0.0 {
        return Err(ModelError::UndefinedVisibility);
    }
    Ok((correlated / total).clamp(0.0, 1.0))
}

pub fn noise_param(user: &UserEndpoint, tau: f64) -> NoiseParam {
    NoiseParam(tau * user.dark_rate / user.eta)
}

/// `x^2 + (2 y1 + 2 y2 + 1) x + 4 y1 y2`: the total coincidence rate
/// `A + C` in units of `eta1 eta2 / tau`.
pub fn coincidence_polynomial(x: f64, y1: f64, y2: f64) -> f64 {
    x * x + (2.0 * y1 + 2.0 * y2 + 1.0) * x + 4.0 * y1 * y2
}

/// Werner fidelity as a function of dimensionless flux.
///
/// At `x = 0` with a noiseless user the expression is `0/0`; the right-hand
/// limit is returned.
pub fn fidelity_dimensionless(x: f64, y1: f64, y2: f64) -> f64 {
    if x == 0.0 {
        if y1 * y2 > 0.0 {
            return 0.25;
        }
        return 0.25 * (1.0 + 3.0 / (2.0 * y1 + 2.0 * y2 + 1.0));
    }
    0.25 * (1.0 + 3.0 * x / coincidence_polynomial(x, y1, y2))
}

/// Dimensionless EBR `(A + C) log2(2F)` scaled by `tau / (eta1 eta2)`; zero
/// wherever the state is separable.
pub fn ebr_dimensionless(x: f64, y1: f64, y2: f64) -> f64 {
    let f = fidelity_dimensionless(x, y1, y2);
    if f <= 0.5 {
        return 0.0;
    }
    coincidence_polynomial(x, y1, y2) * (2.0 * f).log2()
}

/// Fidelity at source flux `mu_bar` (pairs/s).
pub fn fidelity_dimensioned(
    mu_bar: f64,
    user_a: &UserEndpoint,
    user_b: &UserEndpoint,
    tau: f64,
) -> f64 {
    fidelity_dimensionless(
        tau * mu_bar,
        noise_param(user_a, tau).value(),
        noise_param(user_b, tau).value(),
    )
}

/// EBR in ebits/s at source flux `mu_bar`.
pub fn ebr_dimensioned(mu_bar: f64, user_a: &UserEndpoint, user_b: &UserEndpoint, tau: f64) -> f64 {
    let scale = user_a.eta * user_b.eta / tau;
    scale
        * ebr_dimensionless(
            tau * mu_bar,
            noise_param(user_a, tau).value(),
            noise_param(user_b, tau).value(),
        )
}

/// Outcome of the low-click-probability check for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityCheck {
    pub label: String,
    /// Mean single-detector clicks per coincidence window.
    pub click_probability: f64,
    pub threshold: f64,
}

impl ValidityCheck {
    pub fn passes(&self) -> bool {
        self.click_probability < self.threshold
    }

    /// Distance below the threshold; negative when warning.
    pub fn margin(&self) -> f64 {
        self.threshold - self.click_probability
    }
}

/// The product-of-singles accidental formula needs
/// `tau (eta/2 * sum mu + d) << 1` at every user.
pub fn check_validity(
    user: &UserEndpoint,
    total_flux_at_user: f64,
    tau: f64,
    threshold: f64,
) -> ValidityCheck {
    ValidityCheck {
        label: user.label.clone(),
        click_probability: tau * (user.eta / 2.0 * total_flux_at_user + user.dark_rate),
        threshold,
    }
}

/// Rates and figures of merit of one link at a given flux.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetrics {
    pub accidental_rate: f64,
    pub correlated_rate: f64,
    /// `None` when nothing is detected at all.
    pub visibility: Option<f64>,
    pub dimensionless_flux: f64,
    /// `None` when the link carries no flux.
    pub fidelity: Option<f64>,
    pub ebr: f64,
}

impl LinkMetrics {
    /// Metrics for a link whose users see only this link's flux.
    pub fn evaluate(link: &LinkSpec, mu_bar: f64, tau: f64) -> Result<Self, ModelError> {
        Self::evaluate_shared(link, mu_bar, &[mu_bar], &[mu_bar], tau)
    }

    /// Metrics when the users also receive flux from other links.
    pub fn evaluate_shared(
        link: &LinkSpec,
        mu_bar: f64,
        fluxes_a: &[f64],
        fluxes_b: &[f64],
        tau: f64,
    ) -> Result<Self, ModelError> {
        check_flux(mu_bar)?;
        let a = accidental_rate_general(&link.user_a, &link.user_b, fluxes_a, fluxes_b, tau)?;
        let c = correlated_rate(&link.user_a, &link.user_b, mu_bar);
        let vis = visibility(a, c).ok();
        let x = tau * mu_bar;
        let fidelity = (mu_bar > 0.0).then(|| 0.25 * (1.0 + 3.0 * vis.unwrap_or(0.0)));
        let ebr = match fidelity {
            Some(f) if f > 0.5 => (a + c) * (2.0 * f).log2(),
            _ => 0.0,
        };
        Ok(Self {
            accidental_rate: a,
            correlated_rate: c,
            visibility: vis,
            dimensionless_flux: x,
            fidelity,
            ebr,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn user(eta: f64, d: f64) -> UserEndpoint {
        UserEndpoint::new("u", eta, d).unwrap()
    }

    fn pair(e1: f64, d1: f64, e2: f64, d2: f64) -> (UserEndpoint, UserEndpoint) {
        (
            UserEndpoint::new("a", e1, d1).unwrap(),
            UserEndpoint::new("b", e2, d2).unwrap(),
        )
    }

    #[test]
    fn accidentals_general() {
        let (a, b) = pair(0.5, 0.0, 0.5, 0.0);
        assert_eq!(
            accidental_rate_general(&a, &b, &[0.0], &[0.0], 1e-9).unwrap(),
            0.0
        );
        let (a, b) = pair(1.0, 0.0, 1.0, 0.0);
        assert_relative_eq!(
            accidental_rate_general(&a, &b, &[1e6], &[1e6], 1e-9).unwrap(),
            1000.0,
            max_relative = 1e-12
        );
        let (a, b) = pair(0.5, 100.0, 0.5, 100.0);
        assert_relative_eq!(
            accidental_rate_general(&a, &b, &[0.0], &[0.0], 1e-9).unwrap(),
            4e-5,
            max_relative = 1e-12
        );
        assert!(accidental_rate_general(&a, &b, &[-1.0], &[0.0], 1e-9).is_err());
        assert!(accidental_rate_general(&a, &b, &[1.0], &[0.0], 0.0).is_err());
    }

    #[test]
    fn accidentals_single() {
        let (a, b) = pair(0.3, 50.0, 0.7, 20.0);
        assert_relative_eq!(
            accidental_rate_single(&a, &b, 0.0, 1e-9).unwrap(),
            4e-9 * 50.0 * 20.0,
            max_relative = 1e-12
        );
        let (a, b) = pair(0.3, 0.0, 0.7, 0.0);
        assert_relative_eq!(
            accidental_rate_single(&a, &b, 2e6, 1e-9).unwrap(),
            1e-9 * 0.21 * 4e12,
            max_relative = 1e-12
        );
        let (a, b) = pair(1.0, 1000.0, 1.0, 1000.0);
        assert_relative_eq!(
            accidental_rate_single(&a, &b, 1e6, 1e-9).unwrap(),
            1.004004e3,
            max_relative = 1e-12
        );
        assert!(accidental_rate_single(&a, &b, f64::NAN, 1e-9).is_err());
    }

    #[test]
    fn correlated_and_visibility() {
        let (a, b) = pair(1.0, 0.0, 1.0, 0.0);
        assert_eq!(correlated_rate(&a, &b, 0.0), 0.0);
        assert_eq!(correlated_rate(&a, &b, 5e5), 5e5);
        let (a, b) = pair(0.012, 0.0, 2.1e-4, 0.0);
        assert_relative_eq!(correlated_rate(&a, &b, 1e9), 2520.0, max_relative = 1e-12);

        assert_eq!(visibility(0.0, 4.0).unwrap(), 1.0);
        assert_eq!(visibility(2.0, 2.0).unwrap(), 0.5);
        assert_eq!(visibility(3.0, 1.0).unwrap(), 0.25);
        assert_eq!(visibility(0.0, 0.0), Err(ModelError::UndefinedVisibility));
    }

    #[test]
    fn noise_parameters() {
        assert_eq!(noise_param(&user(0.5, 0.0), 1e-9).value(), 0.0);
        assert_relative_eq!(
            noise_param(&user(0.012, 100.0), 1e-9).value(),
            8.33e-6,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            noise_param(&user(2.1e-4, 3500.0), 1e-9).value(),
            1.67e-2,
            max_relative = 2e-3
        );
        let u = UserEndpoint::from_noise("n", 0.125, 1e-9).unwrap();
        assert_relative_eq!(noise_param(&u, 1e-9).value(), 0.125, max_relative = 1e-15);
    }

    #[test]
    fn endpoint_validation() {
        assert!(UserEndpoint::new("x", 0.0, 1.0).is_err());
        assert!(UserEndpoint::new("x", 1.5, 1.0).is_err());
        assert!(UserEndpoint::new("x", 0.5, -1.0).is_err());
        assert!(UserEndpoint::new("x", 0.5, f64::INFINITY).is_err());
        assert!(NoiseParam::new(-0.1).is_err());
        let u = user(0.5, 1.0);
        assert!(matches!(
            LinkSpec::new("l", u.clone(), u),
            Err(ModelError::SelfLink(_))
        ));
    }

    #[test]
    fn dimensionless_fidelity_values() {
        assert_eq!(fidelity_dimensionless(0.0, 0.04, 0.007), 0.25);
        assert_eq!(fidelity_dimensionless(0.0, 0.0, 0.0), 1.0);
        assert_relative_eq!(
            fidelity_dimensionless(0.0, 0.0, 0.125),
            0.25 * (1.0 + 3.0 / 1.25)
        );
        assert_relative_eq!(fidelity_dimensionless(1.0, 0.0, 0.0), 0.625);
        let xf = 2.0 * (0.15f64 * 0.025).sqrt();
        assert_abs_diff_eq!(
            fidelity_dimensionless(xf, 0.15, 0.025),
            0.72,
            epsilon = 0.005
        );
        assert_abs_diff_eq!(fidelity_dimensionless(1e6, 0.1, 0.2), 0.25, epsilon = 1e-4);
    }

    #[test]
    fn dimensionless_ebr_values() {
        assert_eq!(ebr_dimensionless(0.0, 0.04, 0.007), 0.0);
        // F(2; 0, 0) = 1/2 exactly.
        assert_eq!(ebr_dimensionless(2.0, 0.0, 0.0), 0.0);
        assert_relative_eq!(
            ebr_dimensionless(1.0, 0.0, 0.0),
            2.0 * 1.25f64.log2(),
            max_relative = 1e-14
        );
        assert_abs_diff_eq!(ebr_dimensionless(1.0, 0.0, 0.0), 0.6439, epsilon = 1e-4);
        assert_eq!(ebr_dimensionless(5.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn dimensioned_matches_dimensionless() {
        let (a, b) = pair(1.0, 0.0, 1.0, 0.0);
        assert_eq!(
            fidelity_dimensioned(0.0, &user(0.5, 10.0), &user(0.5, 10.0), 1e-9),
            0.25
        );
        assert_relative_eq!(
            fidelity_dimensioned(1e9, &a, &b, 1e-9),
            0.625,
            max_relative = 1e-12
        );
        assert_eq!(ebr_dimensioned(0.0, &a, &b, 1e-9), 0.0);

        let (a, b) = pair(1.0, 0.02, 1.0, 0.05);
        assert_relative_eq!(
            ebr_dimensioned(1.0, &a, &b, 1.0),
            ebr_dimensionless(1.0, 0.02, 0.05),
            max_relative = 1e-12
        );
    }

    #[test]
    fn experimental_link_fidelity_stays_high() {
        let (a, b) = pair(1.2e-2, 100.0, 2.1e-4, 3500.0);
        // Pump range of the deployed experiment keeps x in the 1e-3 .. 1e-2 decade.
        for mu in [2e6, 1e7, 3e7] {
            let f = fidelity_dimensioned(mu, &a, &b, 1e-9);
            assert!(f > 0.95, "F({mu}) = {f}");
        }
    }

    #[test]
    fn rate_route_matches_closed_form() {
        let (a, b) = pair(0.3, 400.0, 0.6, 900.0);
        let tau = 1e-9;
        let link = LinkSpec::new("ab", a.clone(), b.clone()).unwrap();
        for mu in [1e5, 1e7, 3e8, 2e9] {
            let m = LinkMetrics::evaluate(&link, mu, tau).unwrap();
            assert_relative_eq!(
                m.fidelity.unwrap(),
                fidelity_dimensioned(mu, &a, &b, tau),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                m.ebr,
                ebr_dimensioned(mu, &a, &b, tau),
                max_relative = 1e-10,
                epsilon = 1e-12
            );
        }
        let zero = LinkMetrics::evaluate(&link, 0.0, tau).unwrap();
        assert_eq!(zero.fidelity, None);
        assert_eq!(zero.ebr, 0.0);
    }

    #[test]
    fn validity_thresholds() {
        let c = check_validity(&user(0.5, 0.0), 0.0, 1e-9, DEFAULT_CLICK_THRESHOLD);
        assert_eq!(c.click_probability, 0.0);
        assert!(c.passes());
        let c = check_validity(&user(1.0, 0.0), 2e8, 1e-9, DEFAULT_CLICK_THRESHOLD);
        assert_relative_eq!(c.click_probability, 0.1, max_relative = 1e-12);
        assert!(!c.passes());
        let c = check_validity(&user(1.0, 100.0), 1e6, 1e-9, DEFAULT_CLICK_THRESHOLD);
        assert_relative_eq!(c.click_probability, 5.001e-4, max_relative = 1e-12);
        assert!(c.passes());
        assert!(c.margin() > 0.09);
    }
}
