//! Grow/prune behaviour on synthetic streams, plus bookkeeping properties.

mod common;

use proptest::prelude::*;

use common::{regime_shift_grows, stationary_prunes};
use saqn::evolving_ae::{pretrain, regulate_sample, EvolvingAutoencoder, PretrainConfig, RegulatoryTracker};
use saqn::numerics::{Activation, Matrix, OptimizerConfig, SeededRng};

#[test]
fn regime_shift_triggers_growth() {
    for seed in 0..5 {
        regime_shift_grows(seed).unwrap();
    }
}

#[test]
fn stationary_stream_prunes_inflated_width() {
    for seed in 0..5 {
        stationary_prunes(seed).unwrap();
    }
}

#[derive(Debug, Clone)]
enum Op {
    Grow,
    Prune,
    Train(u64),
    Regulate(u64),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        Just(Op::Grow),
        Just(Op::Prune),
        any::<u64>().prop_map(Op::Train),
        any::<u64>().prop_map(Op::Regulate),
    ]
}

fn row(seed: u64, d: usize) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

fn assert_consistent(ae: &EvolvingAutoencoder) {
    let (d, r) = (ae.input_dim(), ae.width());
    assert!(r >= 1);
    assert!(ae.is_consistent());
    assert_eq!(ae.weights().shape(), (d, r));
    assert_eq!(ae.hidden_bias().shape(), (1, r));
    assert_eq!(ae.output_bias().shape(), (1, d));
    let shapes = ae.optimizer().state_shapes();
    // plain SGD carries no per-parameter state
    assert!(shapes.is_empty() || shapes == vec![(d, r), (1, r), (1, d)], "optimizer state {shapes:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bookkeeping_survives_any_interleaving(
        d in 1usize..6,
        r0 in 1usize..5,
        adam in any::<bool>(),
        ops in proptest::collection::vec(op(), 1..60),
    ) {
        let opt = if adam { OptimizerConfig::adam(0.01) } else { OptimizerConfig::sgd(0.05) };
        let mut rng = SeededRng::new(d as u64 * 31 + r0 as u64);
        let mut ae = EvolvingAutoencoder::new(d, r0, Activation::Tanh, opt, &mut rng).unwrap();
        let mut tracker = RegulatoryTracker::new(d);
        for s in 0..3 {
            tracker.observe_input(&row(s, d)).unwrap();
        }
        let cfg = PretrainConfig { warmup_samples: 2, ..PretrainConfig::default() };

        for op in ops {
            match op {
                Op::Grow => {
                    let before = ae.weights().clone();
                    let a_before = ae.hidden_bias().clone();
                    ae.grow_node(&mut tracker, &mut rng).unwrap();
                    // existing columns are untouched
                    for c in 0..before.cols() {
                        prop_assert_eq!(ae.weights().column(c), before.column(c));
                        prop_assert_eq!(ae.hidden_bias().get(0, c), a_before.get(0, c));
                    }
                }
                Op::Prune => {
                    if ae.width() == 1 {
                        prop_assert!(ae.prune_node(&mut tracker).is_err());
                    } else {
                        let (mu, var) = ae.preactivation_stats(&tracker).unwrap();
                        let el = ae.expected_latent(&mu, &var).unwrap();
                        let mut expect = 0;
                        for (i, &v) in el.data().iter().enumerate() {
                            if v < el.data()[expect] {
                                expect = i;
                            }
                        }
                        let before = ae.weights().clone();
                        let removed = ae.prune_node(&mut tracker).unwrap();
                        prop_assert_eq!(removed, expect);
                        let kept: Vec<usize> = (0..before.cols()).filter(|&c| c != removed).collect();
                        for (new_c, &old_c) in kept.iter().enumerate() {
                            prop_assert_eq!(ae.weights().column(new_c), before.column(old_c));
                        }
                    }
                }
                Op::Train(s) => {
                    let x = Matrix::from_rows(&[row(s, d), row(s ^ 1, d)]).unwrap();
                    let loss = ae.reconstruction_step(&x).unwrap();
                    prop_assert!(loss.is_finite() && loss >= 0.0);
                }
                Op::Regulate(s) => {
                    let o = regulate_sample(&mut ae, &mut tracker, &row(s, d), &cfg, &mut rng).unwrap();
                    prop_assert!(o.bias_sq >= 0.0 && o.variance >= 0.0);
                    prop_assert!(o.d1 > 1.0 && o.d1 <= 2.3);
                    prop_assert!(o.d2 > 0.7 && o.d2 <= 2.0);
                    // a step that grew never also prunes
                    prop_assert!(!(o.grew && o.pruned.is_some()));
                }
            }
            assert_consistent(&ae);
        }
    }

    #[test]
    fn pretrain_log_matches_final_width(
        seed in 0u64..1000,
        r0 in 1usize..6,
        n in 20usize..120,
    ) {
        let mut rng = SeededRng::new(seed);
        let memory: Vec<Vec<f64>> = (0..n).map(|i| row(seed * 1000 + i as u64, 4)).collect();
        let mut ae = EvolvingAutoencoder::new(4, r0, Activation::Tanh, OptimizerConfig::adam(0.01), &mut rng).unwrap();
        let cfg = PretrainConfig { max_steps: 30, batch_size: 4, ..PretrainConfig::default() };
        let log = pretrain(&mut ae, &memory, &cfg, &mut rng).unwrap();
        let grows = log.grow_steps().count() as i64;
        let prunes = log.prune_steps().count() as i64;
        prop_assert_eq!(r0 as i64 + grows - prunes, ae.width() as i64);
        prop_assert_eq!(log.final_width(), Some(ae.width()));
        prop_assert_eq!(log.losses().len(), 30);
        assert_consistent(&ae);
    }
}
