//! Training losses, each paired with the output activation it expects.

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::net::{Activation, ForwardCache};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Binary cross-entropy with positive terms scaled by the positive weight.
    /// Requires a single sigmoid output.
    WeightedBce,
    /// `|ŷ - y|`; requires a single output.
    AbsoluteError,
    /// Requires a softmax output.
    CrossEntropy,
}

#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Binary(&'a [f64]),
    Real(&'a [f64]),
    Class(&'a [usize]),
}

impl Targets<'_> {
    pub fn len(&self) -> usize {
        match self {
            Targets::Binary(v) | Targets::Real(v) => v.len(),
            Targets::Class(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Weighted BCE of a single prediction given as a probability.
pub fn weighted_bce_term(y: f64, p: f64, positive_weight: f64) -> f64 {
    let pos = if y > 0.0 { -positive_weight * y * p.ln() } else { 0.0 };
    let neg = if y < 1.0 { -(1.0 - y) * (1.0 - p).ln() } else { 0.0 };
    pos + neg
}

/// Mean loss over the batch and its gradient w.r.t. the last pre-activation.
pub(crate) fn loss_and_output_grad(
    loss: Loss,
    activation: Activation,
    cache: &ForwardCache,
    targets: &Targets<'_>,
    positive_weight: f64,
) -> Result<(f64, Matrix)> {
    let out = cache.output();
    let z = &cache.logits;
    let n = out.rows;
    if targets.len() != n {
        return Err(Error::Shape(format!("{} targets for {n} rows", targets.len())));
    }
    if n == 0 {
        return Err(Error::Shape("empty batch".into()));
    }
    let inv_n = 1.0 / n as f64;
    let mut dz = Matrix::zeros(n, out.cols);
    let mut total = 0.0;
    match (loss, targets) {
        (Loss::WeightedBce, Targets::Binary(y)) => {
            if activation != Activation::Sigmoid || out.cols != 1 {
                return Err(Error::Config("weighted BCE needs a single sigmoid output".into()));
            }
            for i in 0..n {
                let yi = y[i];
                if !(0.0..=1.0).contains(&yi) {
                    return Err(Error::Label(format!("binary target {yi} outside [0, 1]")));
                }
                let zi = z.data[i];
                // -w·y·ln σ(z) - (1-y)·ln(1-σ(z)) = w·y·softplus(-z) + (1-y)·softplus(z)
                total += positive_weight * yi * softplus(-zi) + (1.0 - yi) * softplus(zi);
                let p = out.data[i];
                dz.data[i] = (positive_weight * yi * (p - 1.0) + (1.0 - yi) * p) * inv_n;
            }
        }
        (Loss::AbsoluteError, Targets::Real(y)) => {
            if out.cols != 1 || activation == Activation::Softmax {
                return Err(Error::Config("absolute error needs a single non-softmax output".into()));
            }
            for i in 0..n {
                let yi = y[i];
                if !yi.is_finite() {
                    return Err(Error::Label(format!("non-finite regression target {yi}")));
                }
                let diff = out.data[i] - yi;
                total += diff.abs();
                let g = if diff > 0.0 {
                    inv_n
                } else if diff < 0.0 {
                    -inv_n
                } else {
                    0.0
                };
                let a = out.data[i];
                dz.data[i] = match activation {
                    Activation::Relu => {
                        if a > 0.0 {
                            g
                        } else {
                            0.0
                        }
                    }
                    Activation::Sigmoid => g * a * (1.0 - a),
                    _ => g,
                };
            }
        }
        (Loss::CrossEntropy, Targets::Class(y)) => {
            if activation != Activation::Softmax {
                return Err(Error::Config("cross-entropy needs a softmax output".into()));
            }
            for i in 0..n {
                let c = y[i];
                if c >= out.cols {
                    return Err(Error::Label(format!("class {c} out of range for {} outputs", out.cols)));
                }
                // log-softmax from logits for stability
                let zr = z.row(i);
                let max = zr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse = max + zr.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
                total += lse - zr[c];
                let d = dz.row_mut(i);
                d.copy_from_slice(out.row(i));
                d[c] -= 1.0;
                d.iter_mut().for_each(|v| *v *= inv_n);
            }
        }
        _ => return Err(Error::Label(format!("targets do not match loss {loss:?}"))),
    }
    Ok((total * inv_n, dz))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bce_terms() {
        assert_eq!(weighted_bce_term(1.0, 1.0, 20.0), 0.0);
        let t = weighted_bce_term(1.0, 0.5, 20.0);
        assert!((t - 20.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!((weighted_bce_term(0.0, 0.5, 20.0) - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(softplus(-1000.0), 0.0);
        assert_eq!(softplus(1000.0), 1000.0);
    }
}
