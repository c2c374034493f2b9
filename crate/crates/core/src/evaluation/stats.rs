//! Paired two-sided t-test and Holm–Šidák step-down adjustment.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub n: usize,
    pub mean_diff: f64,
    /// Statistic for `a - b`.
    pub t: f64,
    pub p: f64,
}

/// Two-sided paired t-test on `a[i] - b[i]`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return Err(Error::Pairing(format!("{} vs {} paired values", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Pairing("a paired t-test needs at least two pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let (t, p) = if sd == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(mean), 0.0)
        }
    } else {
        let t = mean / (sd / (n as f64).sqrt());
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("df is positive");
        (t, (2.0 * dist.sf(t.abs())).min(1.0))
    };
    Ok(PairedTTest { n, mean_diff: mean, t, p })
}

/// Holm–Šidák adjusted p-values, returned in input order. With raw values
/// sorted ascending, `adj_i = 1 - (1 - p_i)^(k - i)` for zero-based `i`,
/// made monotone by a running maximum and capped at 1.
pub fn holm_sidak(p: &[f64]) -> Vec<f64> {
    let k = p.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| p[i].total_cmp(&p[j]).then(i.cmp(&j)));
    let mut out = vec![0.0; k];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let m = (k - rank) as f64;
        let adj = if k - rank == 1 { p[i] } else { -(m * (-p[i]).ln_1p()).exp_m1() };
        running = running.max(adj).min(1.0);
        out[i] = running;
    }
    out
}

/// "*" at p ≤ 0.05, "." at p ≤ 0.10.
pub fn significance_marker(p: f64) -> &'static str {
    if p <= 0.05 {
        "*"
    } else if p <= 0.10 {
        "."
    } else {
        ""
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_values() {
        let r = paired_t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
    }

    #[test]
    fn family_of_one_is_unadjusted() {
        assert_eq!(holm_sidak(&[0.0123]), vec![0.0123]);
    }

    #[test]
    fn adjusted_not_below_raw_and_monotone() {
        let raw = [0.04, 0.001, 0.3, 0.02];
        let adj = holm_sidak(&raw);
        for (r, a) in raw.iter().zip(&adj) {
            assert!(a >= r);
        }
        let mut pairs: Vec<_> = raw.iter().zip(&adj).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(y.0));
        assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn markers() {
        assert_eq!(significance_marker(0.05), "*");
        assert_eq!(significance_marker(0.1), ".");
        assert_eq!(significance_marker(0.11), "");
    }
}
