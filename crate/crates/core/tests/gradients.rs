//! Central finite-difference checks of the hand-written backprop.

mod common;

use common::{fd_autoencoder, fd_qnetwork, random_matrix};
use saqn::evolving_ae::EvolvingAutoencoder;
use saqn::numerics::{Activation, OptimizerConfig, SeededRng};

#[test]
fn autoencoder_d4_r3_tanh() {
    fd_autoencoder(4, 3, 5, Activation::Tanh, 1).unwrap();
}

#[test]
fn autoencoder_gradients_across_sizes() {
    let mut seed = 10;
    for act in [Activation::Tanh, Activation::Sigmoid, Activation::Relu] {
        for (d, r, n) in [(1, 1, 1), (6, 4, 8), (3, 4, 2), (6, 1, 7)] {
            fd_autoencoder(d, r, n, act, seed).unwrap();
            seed += 1;
        }
    }
}

#[test]
fn tied_weights_collect_both_terms() {
    // A gradient built from the decoder path alone must disagree with the
    // full one, otherwise the finite-difference check could not catch a
    // missing encoder term.
    let mut rng = SeededRng::new(3);
    let (d, r) = (4, 3);
    let w = random_matrix(d, r, 0.8, &mut rng);
    let a = random_matrix(1, r, 0.3, &mut rng);
    let b = random_matrix(1, d, 0.0, &mut rng);
    let x = random_matrix(4, d, 1.0, &mut rng);
    let ae = EvolvingAutoencoder::from_parts(w, a, b, Activation::Tanh, OptimizerConfig::sgd(0.01)).unwrap();
    let (latent, recon) = ae.forward(&x).unwrap();
    let n = (x.rows() * x.cols()) as f64;
    let d_out = recon
        .zip_map(&x, |r, xv| 2.0 * (r - xv) / n * (1.0 - r * r))
        .unwrap();
    let decoder_only = d_out.matmul_tn(&latent).unwrap();
    let (_, full) = ae.gradients(&x).unwrap();
    let gap: f64 = full.w.data().iter().zip(decoder_only.data()).map(|(f, o)| (f - o).abs()).sum();
    assert!(gap > 1e-3, "encoder contribution to W is missing (gap {gap:e})");
}

#[test]
fn q_network_gradients() {
    fd_qnetwork(4, 8, 2, 6, Activation::Tanh, 20).unwrap();
    fd_qnetwork(6, 5, 7, 8, Activation::Sigmoid, 21).unwrap();
    fd_qnetwork(2, 3, 3, 1, Activation::Relu, 22).unwrap();
    fd_qnetwork(3, 16, 2, 4, Activation::Tanh, 23).unwrap();
}
