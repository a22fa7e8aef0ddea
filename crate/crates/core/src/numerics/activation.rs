use serde::{Deserialize, Serialize};

use super::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
    Relu,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
        }
    }

    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `y = g(z)`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Output range `(lo, hi)` used when scaling inputs for reconstruction.
    pub fn output_range(self) -> (f64, f64) {
        match self {
            Activation::Tanh => (-1.0, 1.0),
            Activation::Sigmoid | Activation::Relu => (0.0, 1.0),
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            other => Err(format!("unknown activation `{other}`")),
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn activate(z: &Matrix, kind: Activation) -> Matrix {
    z.map(|v| kind.apply(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points() {
        assert_eq!(Activation::Tanh.apply(0.0), 0.0);
        assert_eq!(Activation::Sigmoid.apply(0.0), 0.5);
        assert_eq!(Activation::Relu.apply(-2.0), 0.0);
    }

    #[test]
    fn tanh_sigmoid_identity() {
        for z in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let lhs = f64::tanh(z);
            let rhs = 2.0 * sigmoid(2.0 * z) - 1.0;
            assert!((lhs - rhs).abs() < 1e-12, "z={z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn ranges() {
        let z = Matrix::row_vector(&[-50.0, -1.0, 0.3, 40.0]);
        assert!(activate(&z, Activation::Tanh).data().iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(activate(&z, Activation::Sigmoid).data().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(activate(&z, Activation::Relu).data().iter().all(|v| *v >= 0.0));
    }
}
