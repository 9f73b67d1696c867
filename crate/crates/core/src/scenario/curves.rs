use std::io::Write;

use crate::analysis::ebr_max;
use crate::link::{ebr_dimensionless, fidelity_dimensionless};

use super::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub fidelity: f64,
    pub ebr: f64,
    /// Zero when the link has no positive EBR anywhere.
    pub ebr_normalized: f64,
}

/// Samples fidelity and EBR at `samples` evenly spaced fluxes in `[x_lo, x_hi]`.
pub fn emit_curves(
    y1: f64,
    y2: f64,
    x_lo: f64,
    x_hi: f64,
    samples: usize,
) -> Result<Vec<CurvePoint>, ScenarioError> {
    let invalid = |field: &str, message: String| ScenarioError::Invalid {
        field: field.into(),
        message,
    };
    if samples < 2 {
        return Err(invalid(
            "samples",
            format!("need at least 2, got {samples}"),
        ));
    }
    if !(x_lo >= 0.0 && x_hi > x_lo && x_hi.is_finite()) {
        return Err(invalid(
            "x_range",
            format!("[{x_lo}, {x_hi}] is not a flux range"),
        ));
    }
    for (f, y) in [("y1", y1), ("y2", y2)] {
        if !(y >= 0.0 && y.is_finite()) {
            return Err(invalid(
                f,
                format!("noise parameter {y} must be non-negative"),
            ));
        }
    }
    let r_max = ebr_max(y1, y2).1;
    let step = (x_hi - x_lo) / (samples - 1) as f64;
    Ok((0..samples)
        .map(|i| {
            let x = if i + 1 == samples {
                x_hi
            } else {
                x_lo + step * i as f64
            };
            let ebr = ebr_dimensionless(x, y1, y2);
            CurvePoint {
                x,
                fidelity: fidelity_dimensionless(x, y1, y2),
                ebr,
                ebr_normalized: if r_max > 0.0 { ebr / r_max } else { 0.0 },
            }
        })
        .collect())
}

pub fn write_curves_csv<W: Write>(out: W, points: &[CurvePoint]) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "fidelity", "ebr", "ebr_normalized"])?;
    for p in points {
        w.write_record([p.x, p.fidelity, p.ebr, p.ebr_normalized].map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}
