//! Bounded scalar maximization.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `xtol`.
///
/// The endpoints are compared against the interior optimum so a monotone `f`
/// returns the better endpoint.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(lo <= hi && xtol > 0.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > xtol {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if iterations > 10_000 {
            break;
        }
    }
    let (mut x, mut value) = if fc >= fd { (c, fc) } else { (d, fd) };
    for end in [lo, hi] {
        let fe = f(end);
        if fe > value {
            x = end;
            value = fe;
        }
    }
    Maximum {
        x,
        value,
        iterations,
    }
}

/// Samples `f` on a uniform grid of `points` nodes over `[lo, hi]`, then
/// refines around the best node with golden-section search. Tolerates
/// several local maxima as long as they are separated by more than one grid
/// step.
pub fn grid_then_golden<F>(mut f: F, lo: f64, hi: f64, points: usize, xtol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(points >= 2);
    if hi <= lo {
        let value = f(lo);
        return Maximum {
            x: lo,
            value,
            iterations: 0,
        };
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..points {
        let v = f(lo + step * i as f64);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let refined = golden_section_max(&mut f, a, b, xtol);
    if refined.value >= best_v {
        refined
    } else {
        Maximum {
            x: lo + step * best_i as f64,
            value: best_v,
            iterations: refined.iterations,
        }
    }
}
