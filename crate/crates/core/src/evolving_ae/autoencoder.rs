use serde::{Deserialize, Serialize};

use super::tracker::RegulatoryTracker;
use crate::error::{Error, Result};
use crate::numerics::{
    activate, affine, probit_expectation_sigmoid, probit_expectation_tanh, xavier_uniform, xavier_uniform_row,
    Activation, Matrix, Optimizer, OptimizerConfig, SeededRng,
};

const SLOT_W: usize = 0;
const SLOT_A: usize = 1;

/// Gradients of the reconstruction loss, shaped like `(W, a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AeGradients {
    pub w: Matrix,
    pub a: Matrix,
    pub b: Matrix,
}

/// Single-hidden-layer autoencoder with tied weights and a resizable
/// hidden layer.
///
/// Encoder: `L = g(X·W + a)`. Decoder: `X̂ = g(L·Wᵀ + b)`. `W` is `d×r`, each
/// hidden unit owns one column of `W` and one entry of `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolvingAutoencoder {
    w: Matrix,
    a: Matrix,
    b: Matrix,
    activation: Activation,
    optimizer: Optimizer,
}

impl EvolvingAutoencoder {
    /// Xavier-initialised weights, zero biases.
    pub fn new(
        input_dim: usize,
        width: usize,
        activation: Activation,
        optimizer: OptimizerConfig,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if input_dim == 0 || width == 0 {
            return Err(Error::Input(format!(
                "autoencoder needs positive dimensions, got d={input_dim}, r={width}"
            )));
        }
        let w = Matrix::from_vec(input_dim, width, xavier_uniform(input_dim * width, input_dim, width, rng)?)?;
        Self::from_parts(w, Matrix::zeros(1, width), Matrix::zeros(1, input_dim), activation, optimizer)
    }

    pub fn from_parts(
        w: Matrix,
        a: Matrix,
        b: Matrix,
        activation: Activation,
        optimizer: OptimizerConfig,
    ) -> Result<Self> {
        let (d, r) = w.shape();
        if d == 0 || r == 0 {
            return Err(Error::Input(format!("empty weight matrix {}", w.shape_str())));
        }
        a.ensure_shape(1, r, "hidden bias")?;
        b.ensure_shape(1, d, "output bias")?;
        let optimizer = Optimizer::new(optimizer, &[(d, r), (1, r), (1, d)]);
        Ok(Self {
            w,
            a,
            b,
            activation,
            optimizer,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn width(&self) -> usize {
        self.w.cols()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Matrix {
        &self.w
    }

    pub fn hidden_bias(&self) -> &Matrix {
        &self.a
    }

    pub fn output_bias(&self) -> &Matrix {
        &self.b
    }

    pub fn optimizer(&self) -> &Optimizer {
        &self.optimizer
    }

    /// Shapes of W, a, b and every optimizer accumulator agree with `(d, r)`.
    pub fn is_consistent(&self) -> bool {
        let (d, r) = self.w.shape();
        let shapes_ok = r >= 1 && self.a.shape() == (1, r) && self.b.shape() == (1, d);
        let opt = self.optimizer.state_shapes();
        let opt_ok = opt.is_empty() || opt == vec![(d, r), (1, r), (1, d)];
        shapes_ok && opt_ok && self.w.is_finite() && self.a.is_finite() && self.b.is_finite()
    }

    fn check_width(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim() {
            return Err(Error::dim(
                "autoencoder input",
                x.shape_str(),
                format!("width {}", self.input_dim()),
            ));
        }
        Ok(())
    }

    /// Latent code for one row or a batch of rows.
    pub fn encode(&self, x: &Matrix) -> Result<Matrix> {
        self.check_width(x)?;
        Ok(activate(&affine(x, &self.w, &self.a)?, self.activation))
    }

    fn decode(&self, latent: &Matrix) -> Result<Matrix> {
        let mut z = latent.matmul_nt(&self.w)?;
        z.add_row(&self.b)?;
        Ok(activate(&z, self.activation))
    }

    /// `(latent, reconstruction)`.
    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, Matrix)> {
        let latent = self.encode(x)?;
        let recon = self.decode(&latent)?;
        Ok((latent, recon))
    }

    /// Per-node mean and variance of the pre-activation `F = X·W + a`,
    /// propagated from per-feature input statistics under independence.
    pub fn preactivation_stats(&self, tracker: &RegulatoryTracker) -> Result<(Matrix, Matrix)> {
        let (mean_x, var_x) = tracker.input_moments()?;
        if mean_x.len() != self.input_dim() {
            return Err(Error::dim(
                "preactivation_stats",
                format!("tracker width {}", mean_x.len()),
                format!("input width {}", self.input_dim()),
            ));
        }
        let (d, r) = self.w.shape();
        let mut mu = self.a.clone();
        let mut var = Matrix::zeros(1, r);
        for i in 0..d {
            for (j, &w) in self.w.row(i).iter().enumerate() {
                mu.data_mut()[j] += mean_x[i] * w;
                var.data_mut()[j] += var_x[i] * w * w;
            }
        }
        Ok((mu, var))
    }

    /// `E[L]` per hidden node through the probit closed form.
    pub fn expected_latent(&self, mu: &Matrix, var: &Matrix) -> Result<Matrix> {
        if mu.shape() != var.shape() {
            return Err(Error::dim("expected_latent", mu.shape_str(), var.shape_str()));
        }
        let f = match self.activation {
            Activation::Tanh => probit_expectation_tanh,
            Activation::Sigmoid => probit_expectation_sigmoid,
            Activation::Relu => return Err(Error::UnsupportedActivation("relu")),
        };
        let data = mu
            .data()
            .iter()
            .zip(var.data())
            .map(|(&m, &v)| f(m, v))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_vec(mu.rows(), mu.cols(), data)
    }

    /// `(E[X̂], E[X̂²])` from the expected latent, using `E[L²] ≈ E[L]²`.
    pub fn expected_outputs(&self, expected_latent: &Matrix) -> Result<(Matrix, Matrix)> {
        if expected_latent.cols() != self.width() {
            return Err(Error::dim(
                "expected_outputs",
                expected_latent.shape_str(),
                format!("width {}", self.width()),
            ));
        }
        let ex = self.decode(expected_latent)?;
        let ex2 = self.decode(&expected_latent.map(|v| v * v))?;
        Ok((ex, ex2))
    }

    /// Appends one hidden unit with Xavier-uniform incoming weights and bias.
    ///
    /// Existing columns of `W` and entries of `a` are untouched. The tracker's
    /// bias minima are reset and its grow flag raised.
    pub fn grow_node(&mut self, tracker: &mut RegulatoryTracker, rng: &mut SeededRng) -> Result<()> {
        let d = self.input_dim();
        let new_width = self.width() + 1;
        let column = xavier_uniform_row(d, new_width, rng)?;
        let bias = xavier_uniform(1, d, new_width, rng)?;
        self.w.push_column(&column)?;
        self.a.push_column(&bias)?;
        self.optimizer.push_column(SLOT_W)?;
        self.optimizer.push_column(SLOT_A)?;
        tracker.on_grow();
        Ok(())
    }

    /// Removes the hidden unit with the smallest `E[L]` and returns its index.
    pub fn prune_node(&mut self, tracker: &mut RegulatoryTracker) -> Result<usize> {
        if self.width() <= 1 {
            return Err(Error::State("cannot prune the last hidden unit".into()));
        }
        let (mu, var) = self.preactivation_stats(tracker)?;
        let expected = self.expected_latent(&mu, &var)?;
        let idx = argmin(expected.data());
        self.remove_unit(idx)?;
        tracker.on_prune();
        Ok(idx)
    }

    pub(crate) fn remove_unit(&mut self, idx: usize) -> Result<()> {
        self.w.remove_column(idx)?;
        self.a.remove_column(idx)?;
        self.optimizer.remove_column(SLOT_W, idx)?;
        self.optimizer.remove_column(SLOT_A, idx)?;
        Ok(())
    }

    /// Mean squared reconstruction error over every element of the batch.
    pub fn loss(&self, batch: &Matrix) -> Result<f64> {
        let (_, recon) = self.forward(batch)?;
        let n = (batch.rows() * batch.cols()) as f64;
        Ok(recon.data().iter().zip(batch.data()).map(|(r, x)| (r - x).powi(2)).sum::<f64>() / n)
    }

    /// Loss and its gradient. `W` receives both the encoder and decoder terms.
    pub fn gradients(&self, batch: &Matrix) -> Result<(f64, AeGradients)> {
        if batch.rows() == 0 {
            return Err(Error::Input("empty reconstruction batch".into()));
        }
        let (latent, recon) = self.forward(batch)?;
        let n = (batch.rows() * batch.cols()) as f64;
        let g = self.activation;
        let mut loss = 0.0;
        let mut d_out = recon.clone();
        for (dv, (&r, &x)) in d_out.data_mut().iter_mut().zip(recon.data().iter().zip(batch.data())) {
            let e = r - x;
            loss += e * e;
            *dv = 2.0 * e / n * g.derivative_from_output(r);
        }
        loss /= n;

        let grad_b = d_out.sum_rows();
        let grad_w_dec = d_out.matmul_tn(&latent)?;
        let mut d_hidden = d_out.matmul(&self.w)?;
        for (dv, &l) in d_hidden.data_mut().iter_mut().zip(latent.data()) {
            *dv *= g.derivative_from_output(l);
        }
        let grad_a = d_hidden.sum_rows();
        let grad_w = batch.matmul_tn(&d_hidden)?.zip_map(&grad_w_dec, |e, dcd| e + dcd)?;
        Ok((
            loss,
            AeGradients {
                w: grad_w,
                a: grad_a,
                b: grad_b,
            },
        ))
    }

    /// One optimizer step on the batch; returns the loss before the update.
    pub fn reconstruction_step(&mut self, batch: &Matrix) -> Result<f64> {
        let (loss, grads) = self.gradients(batch)?;
        self.optimizer
            .step(&mut [&mut self.w, &mut self.a, &mut self.b], &[&grads.w, &grads.a, &grads.b])?;
        Ok(loss)
    }
}

/// Index of the smallest value; ties go to the lowest index.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}
