use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{activate, xavier_uniform, Activation, Matrix, Optimizer, OptimizerConfig, SeededRng};

/// Weights of a one-hidden-layer Q-value approximator. The output layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QParams {
    pub w1: Matrix,
    pub b1: Matrix,
    pub w2: Matrix,
    pub b2: Matrix,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QGradients {
    pub w1: Matrix,
    pub b1: Matrix,
    pub w2: Matrix,
    pub b2: Matrix,
}

impl QParams {
    pub fn new(input_dim: usize, hidden: usize, actions: usize, activation: Activation, rng: &mut SeededRng) -> Result<Self> {
        if input_dim == 0 || hidden == 0 || actions == 0 {
            return Err(Error::Input(format!(
                "q-network needs positive sizes, got {input_dim}-{hidden}-{actions}"
            )));
        }
        Ok(Self {
            w1: Matrix::from_vec(input_dim, hidden, xavier_uniform(input_dim * hidden, input_dim, hidden, rng)?)?,
            b1: Matrix::zeros(1, hidden),
            w2: Matrix::from_vec(hidden, actions, xavier_uniform(hidden * actions, hidden, actions, rng)?)?,
            b2: Matrix::zeros(1, actions),
            activation,
        })
    }

    pub fn zeros(input_dim: usize, hidden: usize, actions: usize, activation: Activation) -> Self {
        Self {
            w1: Matrix::zeros(input_dim, hidden),
            b1: Matrix::zeros(1, hidden),
            w2: Matrix::zeros(hidden, actions),
            b2: Matrix::zeros(1, actions),
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn hidden(&self) -> usize {
        self.w1.cols()
    }

    pub fn actions(&self) -> usize {
        self.w2.cols()
    }

    fn check_input(&self, states: &Matrix) -> Result<()> {
        if states.cols() != self.input_dim() {
            return Err(Error::dim(
                "q_values",
                states.shape_str(),
                format!("input width {}", self.input_dim()),
            ));
        }
        Ok(())
    }

    /// `(hidden activations, Q-values)` for a batch of states.
    pub fn forward(&self, states: &Matrix) -> Result<(Matrix, Matrix)> {
        self.check_input(states)?;
        let mut z = states.matmul(&self.w1)?;
        z.add_row(&self.b1)?;
        let h = activate(&z, self.activation);
        let mut q = h.matmul(&self.w2)?;
        q.add_row(&self.b2)?;
        Ok((h, q))
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        let (_, q) = self.forward(&Matrix::row_vector(state))?;
        Ok(q.into_vec())
    }

    /// Mean squared error between `Q(s_i, a_i)` and `targets_i`, with its gradient.
    pub fn loss_and_gradients(&self, states: &Matrix, actions: &[usize], targets: &[f64]) -> Result<(f64, QGradients)> {
        let n = states.rows();
        if n == 0 {
            return Err(Error::Input("empty training batch".into()));
        }
        if actions.len() != n || targets.len() != n {
            return Err(Error::dim(
                "loss_and_gradients",
                format!("{n} states"),
                format!("{} actions / {} targets", actions.len(), targets.len()),
            ));
        }
        let (h, q) = self.forward(states)?;
        let na = self.actions();
        let mut d_q = Matrix::zeros(n, na);
        let mut loss = 0.0;
        for (i, (&a, &y)) in actions.iter().zip(targets).enumerate() {
            if a >= na {
                return Err(Error::Input(format!("action {a} out of range for {na} actions")));
            }
            let err = q.get(i, a) - y;
            loss += err * err;
            d_q.set(i, a, 2.0 * err / n as f64);
        }
        loss /= n as f64;

        let g_w2 = h.matmul_tn(&d_q)?;
        let g_b2 = d_q.sum_rows();
        let mut d_h = d_q.matmul_nt(&self.w2)?;
        for (dv, &hv) in d_h.data_mut().iter_mut().zip(h.data()) {
            *dv *= self.activation.derivative_from_output(hv);
        }
        let g_w1 = states.matmul_tn(&d_h)?;
        let g_b1 = d_h.sum_rows();
        Ok((
            loss,
            QGradients {
                w1: g_w1,
                b1: g_b1,
                w2: g_w2,
                b2: g_b2,
            },
        ))
    }

    pub fn is_finite(&self) -> bool {
        self.w1.is_finite() && self.b1.is_finite() && self.w2.is_finite() && self.b2.is_finite()
    }
}

/// Trainable Q-network: parameters plus optimizer state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    params: QParams,
    optimizer: Optimizer,
}

impl QNetwork {
    pub fn new(
        input_dim: usize,
        hidden: usize,
        actions: usize,
        activation: Activation,
        optimizer: OptimizerConfig,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        Ok(Self::from_params(QParams::new(input_dim, hidden, actions, activation, rng)?, optimizer))
    }

    pub fn from_params(params: QParams, optimizer: OptimizerConfig) -> Self {
        let shapes = [params.w1.shape(), params.b1.shape(), params.w2.shape(), params.b2.shape()];
        Self {
            optimizer: Optimizer::new(optimizer, &shapes),
            params,
        }
    }

    pub fn params(&self) -> &QParams {
        &self.params
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.params.q_values(state)
    }

    pub fn apply_gradients(&mut self, g: &QGradients) -> Result<()> {
        let p = &mut self.params;
        self.optimizer
            .step(&mut [&mut p.w1, &mut p.b1, &mut p.w2, &mut p.b2], &[&g.w1, &g.b1, &g.w2, &g.b2])
    }
}

/// Frozen copy of the Q-network parameters used for bootstrap targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetNetwork {
    params: QParams,
}

impl TargetNetwork {
    pub fn from_network(net: &QNetwork) -> Self {
        Self {
            params: net.params.clone(),
        }
    }

    pub fn params(&self) -> &QParams {
        &self.params
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.params.q_values(state)
    }

    /// Overwrites the frozen parameters with a deep copy of `net`'s.
    pub fn sync(&mut self, net: &QNetwork) {
        self.params.clone_from(&net.params);
    }
}

/// Functional form of [`TargetNetwork::sync`].
pub fn sync_target(net: &QNetwork, target: &mut TargetNetwork) {
    target.sync(net);
}
