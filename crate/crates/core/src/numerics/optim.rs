use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OptimizerConfig {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_adam_eps")]
        eps: f64,
    },
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_adam_eps() -> f64 {
    1e-8
}

impl OptimizerConfig {
    pub fn sgd(lr: f64) -> Self {
        OptimizerConfig::Sgd { lr }
    }

    pub fn adam(lr: f64) -> Self {
        OptimizerConfig::Adam {
            lr,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_adam_eps(),
        }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            OptimizerConfig::Sgd { lr } | OptimizerConfig::Adam { lr, .. } => lr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Moments {
    m: Matrix,
    v: Matrix,
}

/// Gradient-descent state for an ordered set of parameter tensors.
///
/// Adam moments are kept per tensor and can be resized column-wise so they
/// follow a layer whose width changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    config: OptimizerConfig,
    step: u64,
    moments: Vec<Moments>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, shapes: &[(usize, usize)]) -> Self {
        let moments = match config {
            OptimizerConfig::Sgd { .. } => Vec::new(),
            OptimizerConfig::Adam { .. } => shapes
                .iter()
                .map(|&(r, c)| Moments {
                    m: Matrix::zeros(r, c),
                    v: Matrix::zeros(r, c),
                })
                .collect(),
        };
        Self {
            config,
            step: 0,
            moments,
        }
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Shapes of the moment accumulators (empty for SGD).
    pub fn state_shapes(&self) -> Vec<(usize, usize)> {
        self.moments.iter().map(|m| m.m.shape()).collect()
    }

    pub fn step(&mut self, params: &mut [&mut Matrix], grads: &[&Matrix]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::dim(
                "optimizer_step",
                format!("{} params", params.len()),
                format!("{} grads", grads.len()),
            ));
        }
        for (p, g) in params.iter().zip(grads) {
            if p.shape() != g.shape() {
                return Err(Error::dim("optimizer_step", p.shape_str(), g.shape_str()));
            }
        }
        self.step += 1;
        match self.config {
            OptimizerConfig::Sgd { lr } => {
                for (p, g) in params.iter_mut().zip(grads) {
                    for (pv, gv) in p.data_mut().iter_mut().zip(g.data()) {
                        *pv -= lr * gv;
                    }
                }
            }
            OptimizerConfig::Adam {
                lr,
                beta1,
                beta2,
                eps,
            } => {
                if self.moments.len() != params.len() {
                    return Err(Error::dim(
                        "optimizer_step",
                        format!("{} moment slots", self.moments.len()),
                        format!("{} params", params.len()),
                    ));
                }
                let t = self.step as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for ((p, g), mom) in params.iter_mut().zip(grads).zip(self.moments.iter_mut()) {
                    if mom.m.shape() != p.shape() {
                        return Err(Error::dim("optimizer_step", mom.m.shape_str(), p.shape_str()));
                    }
                    let m = mom.m.data_mut();
                    let v = mom.v.data_mut();
                    for (i, (pv, &gv)) in p.data_mut().iter_mut().zip(g.data()).enumerate() {
                        m[i] = beta1 * m[i] + (1.0 - beta1) * gv;
                        v[i] = beta2 * v[i] + (1.0 - beta2) * gv * gv;
                        let m_hat = m[i] / c1;
                        let v_hat = v[i] / c2;
                        *pv -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }

    /// Extends the accumulators of tensor `slot` by one zero column.
    pub fn push_column(&mut self, slot: usize) -> Result<()> {
        if let Some(mom) = self.moments.get_mut(slot) {
            let zeros = vec![0.0; mom.m.rows()];
            mom.m.push_column(&zeros)?;
            mom.v.push_column(&zeros)?;
        }
        Ok(())
    }

    /// Drops column `col` from the accumulators of tensor `slot`.
    pub fn remove_column(&mut self, slot: usize, col: usize) -> Result<()> {
        if let Some(mom) = self.moments.get_mut(slot) {
            mom.m.remove_column(col)?;
            mom.v.remove_column(col)?;
        }
        Ok(())
    }
}

/// One update of `params` from `grads`.
pub fn optimizer_step(params: &mut [&mut Matrix], grads: &[&Matrix], opt: &mut Optimizer) -> Result<()> {
    opt.step(params, grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Matrix {
        Matrix::row_vector(&[v])
    }

    #[test]
    fn sgd_step() {
        let mut p = scalar(1.0);
        let mut opt = Optimizer::new(OptimizerConfig::sgd(0.1), &[(1, 1)]);
        optimizer_step(&mut [&mut p], &[&scalar(2.0)], &mut opt).unwrap();
        assert!((p.get(0, 0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_keeps_params() {
        for cfg in [OptimizerConfig::sgd(0.5), OptimizerConfig::adam(0.5)] {
            let mut p = Matrix::row_vector(&[1.5, -2.0]);
            let mut opt = Optimizer::new(cfg, &[(1, 2)]);
            opt.step(&mut [&mut p], &[&Matrix::zeros(1, 2)]).unwrap();
            assert_eq!(p.data(), &[1.5, -2.0]);
        }
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        // t=1: m̂ = g, v̂ = g², so Δ = -lr·g/(|g| + ε)
        let mut p = scalar(0.0);
        let mut opt = Optimizer::new(OptimizerConfig::adam(1e-3), &[(1, 1)]);
        opt.step(&mut [&mut p], &[&scalar(1.0)]).unwrap();
        let expected = -1e-3 * 1.0 / (1.0 + 1e-8);
        assert!((p.get(0, 0) - expected).abs() < 1e-15);
        assert!((p.get(0, 0) + 1e-3).abs() < 1e-10);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut p = Matrix::zeros(2, 2);
        let mut opt = Optimizer::new(OptimizerConfig::sgd(0.1), &[(2, 2)]);
        let err = opt.step(&mut [&mut p], &[&Matrix::zeros(2, 3)]).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn moments_follow_column_resizes() {
        let mut opt = Optimizer::new(OptimizerConfig::adam(1e-2), &[(3, 2), (1, 2)]);
        opt.push_column(0).unwrap();
        opt.push_column(1).unwrap();
        assert_eq!(opt.state_shapes(), vec![(3, 3), (1, 3)]);
        opt.remove_column(0, 1).unwrap();
        opt.remove_column(1, 1).unwrap();
        assert_eq!(opt.state_shapes(), vec![(3, 2), (1, 2)]);
    }
}
