//! Optimal operating points of a single link in noise-parameter space.
//!
//! Fidelity peaks in closed form at `x_F = 2 sqrt(y1 y2)`. The EBR has no
//! closed-form optimum; it is positive only between the two fluxes where the
//! fidelity crosses 1/2 and is concave there, so a bracketed golden-section
//! search locates it.

use thiserror::Error;

use crate::link::{ebr_dimensionless, fidelity_dimensionless};
use crate::search::golden_section_max;

/// Absolute flux tolerance of the EBR maximization.
pub const EBR_XTOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no entanglement possible for y1 = {y1}, y2 = {y2}")]
    NoEntanglement { y1: f64, y2: f64 },
    #[error("fidelity threshold {f_min} exceeds the best reachable fidelity {f_max}")]
    Infeasible { f_min: f64, f_max: f64 },
    #[error("fidelity threshold {0} outside [0, 1]")]
    BadThreshold(f64),
    #[error("allocation count for K = {k}, L = {l} overflows 128 bits")]
    CountOverflow { k: u64, l: u64 },
    #[error("K and L must both be at least 1")]
    EmptyCount,
}

/// Peak fidelity and EBR of a link, with the EBR zero crossings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkOptima {
    pub x_f: f64,
    pub f_max: f64,
    /// `None` when the link can never be entangled.
    pub x_r: Option<f64>,
    pub r_max: f64,
    pub roots: Option<(f64, f64)>,
}

impl LinkOptima {
    pub fn new(y1: f64, y2: f64) -> Self {
        let (x_f, f_max) = fidelity_max(y1, y2);
        let (x_r, r_max) = ebr_max(y1, y2);
        let roots = entanglement_possible(y1, y2)
            .then(|| ebr_roots(y1, y2).ok())
            .flatten();
        Self {
            x_f,
            f_max,
            x_r,
            r_max,
            roots,
        }
    }
}

/// Location and value of the fidelity maximum.
pub fn fidelity_max(y1: f64, y2: f64) -> (f64, f64) {
    let g = (y1 * y2).sqrt();
    (
        2.0 * g,
        0.25 * (1.0 + 3.0 / (4.0 * g + 2.0 * (y1 + y2) + 1.0)),
    )
}

/// `(y1 - y2)^2 - 2 (y1 + y2) + 1`
pub fn boundary_discriminant(y1: f64, y2: f64) -> f64 {
    (y1 - y2).powi(2) - 2.0 * (y1 + y2) + 1.0
}

/// Whether some flux gives an entangled (log-negativity > 0) link.
///
/// The discriminant factors as `((u+v)^2 - 1)((u-v)^2 - 1)` with
/// `u = sqrt(y1)`, `v = sqrt(y2)`; on the branch with `y1 + y2 > 1` both
/// crossings are negative, so that branch is excluded.
pub fn entanglement_possible(y1: f64, y2: f64) -> bool {
    boundary_discriminant(y1, y2) > 0.0 && y1 + y2 < 1.0
}

/// Largest `y2` that still permits entanglement when paired with `y1`.
pub fn critical_noise(y1: f64) -> Option<f64> {
    (y1 < 1.0).then(|| (1.0 - y1.sqrt()).powi(2))
}

/// The two fluxes where fidelity equals 1/2.
pub fn ebr_roots(y1: f64, y2: f64) -> Result<(f64, f64), AnalysisError> {
    let disc = boundary_discriminant(y1, y2);
    if disc < 0.0 {
        return Err(AnalysisError::NoEntanglement { y1, y2 });
    }
    let s = disc.sqrt();
    let mid = 1.0 - y1 - y2;
    Ok((mid - s, mid + s))
}

/// Location and value of the EBR maximum; `(None, 0)` without entanglement.
pub fn ebr_max(y1: f64, y2: f64) -> (Option<f64>, f64) {
    if !entanglement_possible(y1, y2) {
        return (None, 0.0);
    }
    let (lo, hi) = ebr_roots(y1, y2).expect("discriminant checked");
    let m = golden_section_max(|x| ebr_dimensionless(x, y1, y2), lo.max(0.0), hi, EBR_XTOL);
    (Some(m.x), m.value)
}

/// Fluxes bounding `{x >= 0 : F(x) >= level}`, or `None` if the set is empty.
/// The upper bound is infinite when `level <= 1/4`.
pub fn fidelity_interval(y1: f64, y2: f64, level: f64) -> Option<(f64, f64)> {
    let c = 4.0 * level - 1.0;
    if c <= 0.0 {
        return Some((0.0, f64::INFINITY));
    }
    let (_, f_max) = fidelity_max(y1, y2);
    if level > f_max {
        return None;
    }
    // F(x) = level  <=>  c x^2 + (c b - 3) x + 4 c y1 y2 = 0
    let b = 2.0 * y1 + 2.0 * y2 + 1.0;
    let qb = c * b - 3.0;
    let qc = 4.0 * c * y1 * y2;
    let disc = (qb * qb - 4.0 * c * qc).max(0.0);
    // qb < 0 on the feasible side, so -qb + sqrt(disc) has no cancellation.
    let hi = (-qb + disc.sqrt()) / (2.0 * c);
    let lo = if hi > 0.0 { qc / (c * hi) } else { 0.0 };
    Some((lo.max(0.0), hi))
}

/// Flux maximizing the EBR subject to `F(x) >= f_min`, and the EBR there.
pub fn constrained_optimal_flux(y1: f64, y2: f64, f_min: f64) -> Result<(f64, f64), AnalysisError> {
    if !(0.0..=1.0).contains(&f_min) {
        return Err(AnalysisError::BadThreshold(f_min));
    }
    let (_, f_max) = fidelity_max(y1, y2);
    if f_max < f_min {
        return Err(AnalysisError::Infeasible { f_min, f_max });
    }
    let (x_r, r_max) = ebr_max(y1, y2);
    let x_r = x_r.ok_or(AnalysisError::NoEntanglement { y1, y2 })?;
    if fidelity_dimensionless(x_r, y1, y2) >= f_min {
        return Ok((x_r, r_max));
    }
    // EBR rises up to x_R and fidelity falls beyond x_F < x_R, so the best
    // feasible flux is the upper edge of the fidelity level set.
    let (_, hi) =
        fidelity_interval(y1, y2, f_min).ok_or(AnalysisError::Infeasible { f_min, f_max })?;
    Ok((hi, ebr_dimensionless(hi, y1, y2)))
}

/// Size of the allocation space: `(L+1)^K` for distinguishable channels,
/// `C(K+L, L)` when only per-link channel counts matter.
pub fn count_allocations(k: u64, l: u64, uniform_flux: bool) -> Result<u128, AnalysisError> {
    if k == 0 || l == 0 {
        return Err(AnalysisError::EmptyCount);
    }
    let overflow = AnalysisError::CountOverflow { k, l };
    if !uniform_flux {
        let exp = u32::try_from(k).map_err(|_| overflow.clone())?;
        return (l as u128 + 1).checked_pow(exp).ok_or(overflow);
    }
    binomial(k + l, l.min(k)).ok_or(overflow)
}

pub(crate) fn binomial(n: u64, r: u64) -> Option<u128> {
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 1..=r as u128 {
        // acc * (n - r + i) is always divisible by i at this point.
        acc = acc.checked_mul(n as u128 - r as u128 + i)? / i;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn fidelity_max_reference_points() {
        assert_eq!(fidelity_max(0.0, 0.0), (0.0, 1.0));
        assert_abs_diff_eq!(fidelity_max(0.11, 0.019).1, 0.77, epsilon = 0.005);
        let (x, f) = fidelity_max(0.0, 0.125);
        assert_eq!(x, 0.0);
        assert_abs_diff_eq!(f, 0.85, epsilon = 0.005);
    }

    #[test]
    fn boundary_cases() {
        assert!(entanglement_possible(0.0, 0.0));
        assert!(entanglement_possible(0.8, 0.011));
        assert!(!entanglement_possible(0.8, 0.012));
        for y in [0.0, 0.1, 0.2, 0.249] {
            assert!(entanglement_possible(y, y));
        }
        for y in [0.25, 0.3, 0.6] {
            assert!(!entanglement_possible(y, y));
        }
        // Positive discriminant but both crossings at negative flux.
        assert!(boundary_discriminant(2.0, 0.0) > 0.0);
        assert!(!entanglement_possible(2.0, 0.0));
        assert_abs_diff_eq!(critical_noise(0.8).unwrap(), 0.011146, epsilon = 1e-6);
        assert_eq!(critical_noise(1.0), None);
    }

    #[test]
    fn roots_are_half_fidelity_points() {
        assert_eq!(ebr_roots(0.0, 0.0).unwrap(), (0.0, 2.0));
        assert_eq!(fidelity_dimensionless(2.0, 0.0, 0.0), 0.5);
        let (lo, hi) = ebr_roots(0.04, 0.007).unwrap();
        assert!(lo > 0.0 && hi > lo);
        assert_abs_diff_eq!(
            fidelity_dimensionless(lo, 0.04, 0.007),
            0.5,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            fidelity_dimensionless(hi, 0.04, 0.007),
            0.5,
            epsilon = 1e-10
        );
        assert!(matches!(
            ebr_roots(0.3, 0.3),
            Err(AnalysisError::NoEntanglement { .. })
        ));
        // Tangency: y1 = y2 = 1/4 gives a double root at 1/2.
        assert_eq!(ebr_roots(0.25, 0.25).unwrap(), (0.5, 0.5));
        assert!(!entanglement_possible(0.25, 0.25));
    }

    #[test]
    fn noiseless_ebr_peak() {
        let (x, r) = ebr_max(0.0, 0.0);
        assert_abs_diff_eq!(r, 0.6475, epsilon = 5e-5);
        assert_abs_diff_eq!(x.unwrap(), 1.0733, epsilon = 1e-3);
        assert_eq!(ebr_max(0.3, 0.3), (None, 0.0));
    }

    #[test]
    fn ebr_peak_matches_dense_grid() {
        for (y1, y2) in [(0.0, 0.0), (0.04, 0.007), (0.15, 0.025), (0.0, 0.2979)] {
            let (_, hi) = ebr_roots(y1, y2).unwrap();
            let n = 1_000_000;
            let grid = (0..=n)
                .map(|i| ebr_dimensionless(hi * i as f64 / n as f64, y1, y2))
                .fold(0.0, f64::max);
            let (_, r) = ebr_max(y1, y2);
            assert!(r >= grid - 1e-12, "{y1} {y2}: {r} < {grid}");
            assert_abs_diff_eq!(r, grid, epsilon = 1e-8);
        }
    }

    #[test]
    fn constrained_flux() {
        let (phi, r) = constrained_optimal_flux(0.0, 0.0, 0.0).unwrap();
        let (x_r, r_max) = ebr_max(0.0, 0.0);
        assert_eq!((phi, r), (x_r.unwrap(), r_max));

        // (x + 4) / (4 (x + 1)) = 0.7  =>  x = 2/3
        let (phi, _) = constrained_optimal_flux(0.0, 0.0, 0.7).unwrap();
        assert_relative_eq!(phi, 2.0 / 3.0, max_relative = 1e-12);

        let (phi, r) = constrained_optimal_flux(0.15, 0.025, 0.7).unwrap();
        assert_abs_diff_eq!(
            fidelity_dimensionless(phi, 0.15, 0.025),
            0.7,
            epsilon = 1e-10
        );
        assert_eq!(r, ebr_dimensionless(phi, 0.15, 0.025));

        assert!(matches!(
            constrained_optimal_flux(0.15, 0.025, 0.75),
            Err(AnalysisError::Infeasible { .. })
        ));
        assert!(constrained_optimal_flux(0.0, 0.0, 1.5).is_err());
    }

    #[test]
    fn fidelity_interval_edges() {
        let (lo, hi) = fidelity_interval(0.04, 0.007, 0.8).unwrap();
        assert_abs_diff_eq!(
            fidelity_dimensionless(lo, 0.04, 0.007),
            0.8,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            fidelity_dimensionless(hi, 0.04, 0.007),
            0.8,
            epsilon = 1e-12
        );
        assert_eq!(fidelity_interval(0.1, 0.1, 0.2), Some((0.0, f64::INFINITY)));
        assert_eq!(fidelity_interval(0.15, 0.025, 0.9), None);
        let (lo, _) = fidelity_interval(0.0, 0.1, 0.6).unwrap();
        assert_eq!(lo, 0.0);
    }

    #[test]
    fn allocation_counts() {
        assert_eq!(count_allocations(5, 5, false).unwrap(), 7776);
        assert_eq!(count_allocations(5, 5, true).unwrap(), 252);
        assert_eq!(count_allocations(1, 1, false).unwrap(), 2);
        assert_eq!(count_allocations(1, 1, true).unwrap(), 2);
        assert_eq!(
            count_allocations(96, 12, true).unwrap(),
            binomial(108, 12).unwrap()
        );
        assert!(matches!(
            count_allocations(96, 12, false),
            Err(AnalysisError::CountOverflow { .. })
        ));
        assert!(count_allocations(0, 3, true).is_err());
    }

    #[test]
    fn link_optima_bundle() {
        let o = LinkOptima::new(0.04, 0.007);
        assert!(o.x_r.unwrap() > o.x_f);
        let (lo, hi) = o.roots.unwrap();
        assert!(lo < o.x_r.unwrap() && o.x_r.unwrap() < hi);
        let none = LinkOptima::new(0.5, 0.5);
        assert_eq!(none.x_r, None);
        assert_eq!(none.roots, None);
        assert_eq!(none.r_max, 0.0);
    }
}
