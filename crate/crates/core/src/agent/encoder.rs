use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolving_ae::EvolvingAutoencoder;
use crate::numerics::{Activation, Matrix};

/// Affine per-feature map from `[lo, hi]` onto a target interval, clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub bounds: Vec<(f64, f64)>,
    pub target: (f64, f64),
}

impl Normalizer {
    pub fn new(bounds: Vec<(f64, f64)>, target: (f64, f64)) -> Result<Self> {
        if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| hi.partial_cmp(lo) != Some(Ordering::Greater) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::Config(format!("normalization bound [{lo}, {hi}] is empty or not finite")));
        }
        if target.1.partial_cmp(&target.0) != Some(Ordering::Greater) {
            return Err(Error::Config(format!("target range {:?} is empty", target)));
        }
        Ok(Self { bounds, target })
    }

    /// `[-b, b]` per feature.
    pub fn symmetric(bounds: &[f64], target: (f64, f64)) -> Result<Self> {
        Self::new(bounds.iter().map(|&b| (-b, b)).collect(), target)
    }

    /// Bounds mapped onto the open output interval of `activation`.
    pub fn for_activation(bounds: Vec<(f64, f64)>, activation: Activation) -> Result<Self> {
        Self::new(bounds, activation.output_range())
    }

    pub fn width(&self) -> usize {
        self.bounds.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.bounds.len() {
            return Err(Error::dim("normalize", format!("len {}", x.len()), format!("len {}", self.bounds.len())));
        }
        let (a, b) = self.target;
        Ok(x.iter()
            .zip(&self.bounds)
            .map(|(&v, &(lo, hi))| {
                let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
                a + t * (b - a)
            })
            .collect())
    }
}

/// What the Q-network sees when an encoder is present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// Encoder output only.
    #[default]
    Latent,
    /// Normalized raw observation followed by the encoder output.
    RawAndLatent,
}

/// Frozen observation pipeline: normalize, then encode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEncoder {
    normalizer: Normalizer,
    ae: EvolvingAutoencoder,
    mode: InputMode,
}

impl StateEncoder {
    pub fn new(normalizer: Normalizer, ae: EvolvingAutoencoder, mode: InputMode) -> Result<Self> {
        if normalizer.width() != ae.input_dim() {
            return Err(Error::dim(
                "state encoder",
                format!("normalizer width {}", normalizer.width()),
                format!("encoder input {}", ae.input_dim()),
            ));
        }
        Ok(Self { normalizer, ae, mode })
    }

    pub fn autoencoder(&self) -> &EvolvingAutoencoder {
        &self.ae
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn mode(&self) -> InputMode {
        self.mode
    }

    pub fn input_dim(&self) -> usize {
        self.ae.input_dim()
    }

    /// Width of the vector handed to the Q-network.
    pub fn output_dim(&self) -> usize {
        match self.mode {
            InputMode::Latent => self.ae.width(),
            InputMode::RawAndLatent => self.ae.input_dim() + self.ae.width(),
        }
    }

    /// Encoder activations for one raw observation.
    pub fn latent(&self, raw: &[f64]) -> Result<Vec<f64>> {
        let x = self.normalizer.apply(raw)?;
        Ok(self.ae.encode(&Matrix::row_vector(&x))?.into_vec())
    }

    pub fn encode(&self, raw: &[f64]) -> Result<Vec<f64>> {
        let x = self.normalizer.apply(raw)?;
        let z = self.ae.encode(&Matrix::row_vector(&x))?.into_vec();
        Ok(match self.mode {
            InputMode::Latent => z,
            InputMode::RawAndLatent => {
                let mut v = x;
                v.extend(z);
                v
            }
        })
    }
}
