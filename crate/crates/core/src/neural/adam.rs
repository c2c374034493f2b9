//! Adam with bias correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moment estimates, one vector per parameter slice.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(config: AdamConfig, sizes: &[usize]) -> Self {
        Self {
            config,
            step: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// Applies one update in place. Gradients are validated before any parameter changes.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[Vec<f64>]) -> Result<()> {
        if params.len() != self.m.len()
            || grads.len() != self.m.len()
            || params.iter().zip(&self.m).any(|(p, m)| p.len() != m.len())
            || grads.iter().zip(&self.m).any(|(g, m)| g.len() != m.len())
        {
            return Err(Error::Shape("optimizer state does not match parameters".into()));
        }
        if grads.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::Numeric("non-finite gradient".into()));
        }
        self.step += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = AdamState::new(AdamConfig::default(), &[2]);
        let mut p = vec![1.5, -2.0];
        s.step(&mut [&mut p], &[vec![0.0, 0.0]]).unwrap();
        assert_eq!(p, vec![1.5, -2.0]);
    }

    #[test]
    fn unit_gradient_first_step() {
        let mut s = AdamState::new(AdamConfig::default(), &[1]);
        let mut p = vec![0.0];
        s.step(&mut [&mut p], &[vec![1.0]]).unwrap();
        // m̂ = 1, v̂ = 1, so Δ = -lr / (1 + eps).
        assert!((p[0] + 1e-3 / (1.0 + 1e-8)).abs() < 1e-18);
    }

    #[test]
    fn two_step_trace() {
        // Hand trace with g1 = 2, g2 = -1 from p = 1:
        // step 1: m = 0.2, v = 0.004; m̂ = 2, v̂ = 4; p = 1 - 1e-3·2/(2 + 1e-8)
        // step 2: m = 0.18 - 0.1 = 0.08, v = 0.003996 + 0.001 = 0.004996;
        //         m̂ = 0.08/0.19, v̂ = 0.004996/0.001999
        let mut s = AdamState::new(AdamConfig::default(), &[1]);
        let mut p = vec![1.0];
        s.step(&mut [&mut p], &[vec![2.0]]).unwrap();
        let p1 = 1.0 - 1e-3 * 2.0 / (2.0 + 1e-8);
        assert!((p[0] - p1).abs() < 1e-15);
        s.step(&mut [&mut p], &[vec![-1.0]]).unwrap();
        let m_hat: f64 = 0.08 / (1.0 - 0.81);
        let v_hat: f64 = 0.004996 / (1.0 - 0.998001);
        let p2 = p1 - 1e-3 * m_hat / (v_hat.sqrt() + 1e-8);
        assert!((p[0] - p2).abs() < 1e-12, "{} vs {}", p[0], p2);
    }

    #[test]
    fn rejects_non_finite() {
        let mut s = AdamState::new(AdamConfig::default(), &[1]);
        let mut p = vec![0.0];
        assert!(matches!(s.step(&mut [&mut p], &[vec![f64::NAN]]), Err(Error::Numeric(_))));
        assert_eq!(p, vec![0.0]);
    }
}
