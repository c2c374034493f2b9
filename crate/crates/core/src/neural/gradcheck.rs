//! Central finite-difference check of analytic gradients.

use super::loss::{Loss, Targets};
use super::net::{Inputs, Model};
use crate::error::Result;

/// Denominator floor for the relative error, so parameters with vanishing
/// gradients are compared absolutely.
pub const REL_ERROR_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub n_params: usize,
    pub max_rel_error: f64,
    /// (parameter slice, index, analytic, numeric) at the worst parameter.
    pub worst: (usize, usize, f64, f64),
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compares every parameter's analytic gradient with `(L(θ+h) - L(θ-h)) / 2h`.
pub fn check_gradients(
    model: &Model,
    x: Inputs<'_>,
    targets: &Targets<'_>,
    loss: Loss,
    positive_weight: f64,
    h: f64,
) -> Result<GradCheckReport> {
    let (_, grads) = model.loss_and_grad(x, targets, loss, positive_weight)?;
    let mut probe = model.clone();
    let mut report = GradCheckReport { n_params: model.n_params(), max_rel_error: 0.0, worst: (0, 0, 0.0, 0.0) };
    for (s, g) in grads.iter().enumerate() {
        for (i, &analytic) in g.iter().enumerate() {
            let orig = probe.param_slices()[s][i];
            probe.param_slices_mut()[s][i] = orig + h;
            let up = probe.loss(x, targets, loss, positive_weight)?;
            probe.param_slices_mut()[s][i] = orig - h;
            let down = probe.loss(x, targets, loss, positive_weight)?;
            probe.param_slices_mut()[s][i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let err = relative_error(analytic, numeric);
            if err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = (s, i, analytic, numeric);
            }
        }
    }
    Ok(report)
}
