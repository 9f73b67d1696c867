mod common;

use common::*;
use entflux::analysis::{
    constrained_optimal_flux, critical_noise, ebr_max, ebr_roots, entanglement_possible,
    fidelity_max, LinkOptima,
};
use entflux::link::{
    accidental_rate_single, correlated_rate, ebr_dimensionless, fidelity_dimensioned,
    fidelity_dimensionless, visibility, UserEndpoint,
};
use entflux::optimizer::{fitness, ideal_fitness, Allocation, FitnessModel, LinkStatus};
use entflux::state::{bell_psi_minus, fidelity, log_negativity, werner_state, DensityMatrix4};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn dimensioned_matches_dimensionless(a in detector(), b in detector(), lt in -10.0f64..-7.0, lx in -4.0f64..1.5) {
        dimensional_consistency(a, b, lt, lx)?;
    }

    #[test]
    fn swapping_users_changes_nothing(ys in noise_pair(), x in 0.0f64..5.0) {
        swap_symmetry(ys, x)?;
    }

    #[test]
    fn channel_sum_matches_single_link(a in detector(), b in detector(), mus in prop::collection::vec(0.0f64..1e8, 1..8)) {
        singleton_rates(a, b, &mus)?;
    }

    #[test]
    fn werner_chain(a in detector(), b in detector(), lx in -4.0f64..1.0) {
        let tau = 1e-9;
        let mu = 10f64.powf(lx) / tau;
        let ua = UserEndpoint::new("a", a.0, a.1).unwrap();
        let ub = UserEndpoint::new("b", b.0, b.1).unwrap();
        let acc = accidental_rate_single(&ua, &ub, mu, tau).unwrap();
        let lambda = visibility(acc, correlated_rate(&ua, &ub, mu)).unwrap();
        let target = bell_psi_minus();
        let f = fidelity(&werner_state(lambda, &target).unwrap(), &target);
        prop_assert!((f - fidelity_dimensioned(mu, &ua, &ub, tau)).abs() < 1e-10);
    }

    #[test]
    fn werner_log_negativity(lambda in 0.0f64..=1.0) {
        let f = (1.0 + 3.0 * lambda) / 4.0;
        let ln = log_negativity(&werner_state(lambda, &bell_psi_minus()).unwrap());
        prop_assert!((ln - (2.0 * f).log2().max(0.0)).abs() < 1e-10);
        if f <= 0.5 {
            prop_assert_eq!(ln, 0.0);
        }
    }

    #[test]
    fn fidelity_is_linear(l1 in 0.0f64..=1.0, l2 in 0.0f64..=1.0, a in 0.0f64..=1.0) {
        let t = bell_psi_minus();
        let s1 = werner_state(l1, &t).unwrap();
        let s2 = DensityMatrix4::maximally_mixed().mix(&werner_state(l2, &t).unwrap(), 0.3);
        let mixed = s1.mix(&s2, a);
        let expect = a * fidelity(&s1, &t) + (1.0 - a) * fidelity(&s2, &t);
        prop_assert!((fidelity(&mixed, &t) - expect).abs() < 1e-12);
    }

    #[test]
    fn fidelity_rises_then_falls(y1 in 1e-4f64..0.5, y2 in 1e-4f64..0.5) {
        let (x_f, _) = fidelity_max(y1, y2);
        let grid = |lo: f64, hi: f64| (0..=64).map(move |i| lo + (hi - lo) * i as f64 / 64.0);
        let up: Vec<f64> = grid(0.0, x_f).map(|x| fidelity_dimensionless(x, y1, y2)).collect();
        prop_assert!(up.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        let down: Vec<f64> = grid(x_f, x_f + 10.0).map(|x| fidelity_dimensionless(x, y1, y2)).collect();
        prop_assert!(down.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        prop_assert!((fidelity_dimensionless(1e6, y1, y2) - 0.25).abs() < 1e-4);
    }

    #[test]
    fn closed_form_fidelity_peak(ys in noise_pair()) {
        let (y1, y2) = ys;
        let (x_f, f_max) = fidelity_max(y1, y2);
        // Log-spaced grid around the peak plus the peak's neighbours.
        let mut best = fidelity_dimensionless(0.0, y1, y2);
        for i in 0..=4000 {
            let x = 10f64.powf(-8.0 + 9.0 * i as f64 / 4000.0);
            best = best.max(fidelity_dimensionless(x, y1, y2));
        }
        for d in [-1e-6, 0.0, 1e-6] {
            best = best.max(fidelity_dimensionless((x_f + d).max(0.0), y1, y2));
        }
        prop_assert!((f_max - best).abs() < 1e-6, "{f_max} vs {best}");
        prop_assert!(f_max >= best - 1e-12);
        if entanglement_possible(y1, y2) {
            let o = LinkOptima::new(y1, y2);
            let x_r = o.x_r.unwrap();
            let (lo, hi) = ebr_roots(y1, y2).unwrap();
            prop_assert!(lo < x_r && x_r < hi);
            prop_assert!(fidelity_dimensionless(x_r, y1, y2) > 0.5);
        }
    }

    #[test]
    fn peaks_shrink_with_noise(ys in entangleable_pair(), t in 0.05f64..0.9, grow_first in any::<bool>()) {
        let (y1, y2) = ys;
        // Move along a ray that stays inside the entangleable region.
        let (n1, n2) = if grow_first {
            let lim = critical_noise(y2).unwrap();
            (y1 + t * (lim - y1).max(0.0) * 0.5, y2)
        } else {
            let lim = critical_noise(y1).unwrap();
            (y1, y2 + t * (lim - y2).max(0.0) * 0.5)
        };
        prop_assume!(entanglement_possible(n1, n2) && (n1, n2) != (y1, y2));
        let (x0, r0) = ebr_max(y1, y2);
        let (x1, r1) = ebr_max(n1, n2);
        prop_assert!(r1 <= r0 + 1e-12);
        prop_assert!(x1.unwrap() <= x0.unwrap() + 1e-7);
    }

    #[test]
    fn constrained_flux_is_optimal(ys in entangleable_pair(), u in 0.0f64..1.0, seed in any::<u64>()) {
        let (y1, y2) = ys;
        let f_min = 0.25 + u * (fidelity_max(y1, y2).1 - 0.25);
        let (phi, r_phi) = constrained_optimal_flux(y1, y2, f_min).unwrap();
        prop_assert!(fidelity_dimensionless(phi, y1, y2) >= f_min - 1e-12);
        let hi = ebr_roots(y1, y2).unwrap().1 * 1.5;
        let mut state = seed | 1;
        for _ in 0..1000 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let x = hi * (state >> 11) as f64 / (1u64 << 53) as f64;
            if fidelity_dimensionless(x, y1, y2) >= f_min {
                prop_assert!(ebr_dimensionless(x, y1, y2) <= r_phi * (1.0 + 1e-9) + 1e-15);
            }
        }
    }

    #[test]
    fn fitness_bounded_by_ideal(
        (ys, k, f_min) in small_instance(),
        genes in prop::collection::vec(0u16..4, 6),
        lmu in 7.0f64..10.5,
    ) {
        let net = network(&ys, k * 2, f_min);
        let alpha: Vec<u16> = genes[..k * 2].iter().map(|g| g % (ys.len() as u16 + 1)).collect();
        let alloc = Allocation::new(alpha, 10f64.powf(lmu));
        let report = fitness(&alloc, &net).unwrap();
        prop_assert!(report.betas.iter().all(|b| *b <= 1.0 + 1e-12));
        for (s, b) in report.status.iter().zip(&report.betas) {
            if *s == LinkStatus::Unallocated {
                prop_assert_eq!(*b, 0.0);
            }
        }
        if let Ok(ideal) = ideal_fitness(&net) {
            prop_assert!(report.fitness <= ideal.total + 1e-9);
        }
        prop_assert_eq!(alloc.counts(ys.len()).iter().sum::<usize>() + alloc.reserve_count(), k * 2);
        let mut scratch = vec![0.0; ys.len()];
        let fast = FitnessModel::new(&net).score(&alloc.alpha, alloc.mu_tot, &mut scratch);
        prop_assert_eq!(fast, report.fitness);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn more_channels_never_hurt((ys, k, f_min) in small_instance()) {
        brute_monotone_in_k(&ys, k, f_min)?;
    }

    #[test]
    fn elitism_keeps_best((ys, k, f_min) in small_instance(), seed in any::<u64>()) {
        elitist_trace(&ys, k * 2, f_min, seed)?;
    }
}
