//! Checks shared by the focused test files and the acceptance suite. Each
//! returns `Err` with a description instead of panicking, so the acceptance
//! suite can report every criterion.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use saqn::agent::QParams;
use saqn::env::{bfs_shortest_path, CartPole, CartPoleParams, CartPoleState, Environment, GridParams, GridState, GridWorld, Heading};
use saqn::evolving_ae::{pretrain, EvolvingAutoencoder, PretrainConfig};
use saqn::numerics::{Activation, Matrix, OptimizerConfig, SeededRng};

pub type Check<T = ()> = Result<T, String>;

pub fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---- finite differences ----

const FD_STEP: f64 = 1e-5;
const FD_REL: f64 = 1e-4;

pub fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut SeededRng) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.uniform(-scale, scale)).collect()).unwrap()
}

/// Perturbs every entry of one parameter and compares against the analytic
/// gradient. Returns the worst relative error seen.
fn fd_check(name: &str, param: &Matrix, grad: &Matrix, mut loss_with: impl FnMut(&Matrix) -> f64) -> Check<f64> {
    ensure(param.shape() == grad.shape(), || format!("{name}: gradient shape {:?}", grad.shape()))?;
    let mut worst: f64 = 0.0;
    for i in 0..param.data().len() {
        let mut plus = param.clone();
        plus.data_mut()[i] += FD_STEP;
        let mut minus = param.clone();
        minus.data_mut()[i] -= FD_STEP;
        let numeric = (loss_with(&plus) - loss_with(&minus)) / (2.0 * FD_STEP);
        let analytic = grad.data()[i];
        let scale = analytic.abs().max(numeric.abs());
        let err = (analytic - numeric).abs();
        // entries that are ~0 on both sides are compared absolutely
        if err > FD_REL * scale + 1e-9 {
            return Err(format!("{name}[{i}]: analytic {analytic:e} vs numeric {numeric:e}"));
        }
        if scale > 1e-6 {
            worst = worst.max(err / scale);
        }
    }
    Ok(worst)
}

pub fn fd_autoencoder(d: usize, r: usize, n: usize, act: Activation, seed: u64) -> Check<f64> {
    let mut rng = SeededRng::new(seed);
    let w = random_matrix(d, r, 0.8, &mut rng);
    let a = random_matrix(1, r, 0.3, &mut rng);
    let b = random_matrix(1, d, 0.3, &mut rng);
    let lo = if act == Activation::Sigmoid { 0.0 } else { -1.0 };
    let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.uniform(lo, 1.0)).collect()).unwrap();
    let build = |w: &Matrix, a: &Matrix, b: &Matrix| {
        EvolvingAutoencoder::from_parts(w.clone(), a.clone(), b.clone(), act, OptimizerConfig::sgd(0.01)).unwrap()
    };
    let (_, g) = build(&w, &a, &b).gradients(&x).map_err(|e| e.to_string())?;
    let e1 = fd_check("W", &w, &g.w, |p| build(p, &a, &b).loss(&x).unwrap())?;
    let e2 = fd_check("a", &a, &g.a, |p| build(&w, p, &b).loss(&x).unwrap())?;
    let e3 = fd_check("b", &b, &g.b, |p| build(&w, &a, p).loss(&x).unwrap())?;
    Ok(e1.max(e2).max(e3))
}

pub fn fd_qnetwork(input: usize, hidden: usize, actions: usize, n: usize, act: Activation, seed: u64) -> Check<f64> {
    let mut rng = SeededRng::new(seed);
    let mut p = QParams::new(input, hidden, actions, act, &mut rng).unwrap();
    p.b1 = random_matrix(1, hidden, 0.2, &mut rng);
    p.b2 = random_matrix(1, actions, 0.2, &mut rng);
    let states = random_matrix(n, input, 1.5, &mut rng);
    let acts: Vec<usize> = (0..n).map(|_| rng.below(actions)).collect();
    let targets: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
    let (_, g) = p.loss_and_gradients(&states, &acts, &targets).map_err(|e| e.to_string())?;
    let loss = |q: &QParams| q.loss_and_gradients(&states, &acts, &targets).unwrap().0;
    let mut worst: f64 = 0.0;
    worst = worst.max(fd_check("w1", &p.w1, &g.w1, |m| loss(&QParams { w1: m.clone(), ..p.clone() }))?);
    worst = worst.max(fd_check("b1", &p.b1, &g.b1, |m| loss(&QParams { b1: m.clone(), ..p.clone() }))?);
    worst = worst.max(fd_check("w2", &p.w2, &g.w2, |m| loss(&QParams { w2: m.clone(), ..p.clone() }))?);
    worst = worst.max(fd_check("b2", &p.b2, &g.b2, |m| loss(&QParams { b2: m.clone(), ..p.clone() }))?);
    Ok(worst)
}

/// Every AE and QN toy case used by the gradient gate.
pub fn fd_all_cases() -> Check<f64> {
    let mut worst: f64 = 0.0;
    let mut seed = 10;
    for act in [Activation::Tanh, Activation::Sigmoid, Activation::Relu] {
        for (d, r, n) in [(4, 3, 5), (1, 1, 1), (6, 4, 8), (3, 4, 2), (6, 1, 7)] {
            worst = worst.max(fd_autoencoder(d, r, n, act, seed).map_err(|e| format!("AE d={d} r={r} {act:?}: {e}"))?);
            seed += 1;
        }
    }
    for (i, h, a, n, act) in [
        (4, 8, 2, 6, Activation::Tanh),
        (6, 5, 7, 8, Activation::Sigmoid),
        (2, 3, 3, 1, Activation::Relu),
        (3, 16, 2, 4, Activation::Tanh),
    ] {
        worst = worst.max(fd_qnetwork(i, h, a, n, act, seed).map_err(|e| format!("QN {i}-{h}-{a}: {e}"))?);
        seed += 1;
    }
    Ok(worst)
}

// ---- synthetic streams ----

pub const SHIFT: usize = 2500;

pub fn chacha(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Samples around `centre` with i.i.d. Gaussian noise, clamped to [−1, 1].
pub fn regime(centre: &[f64], noise: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let normal = Normal::new(0.0, noise).unwrap();
    (0..n)
        .map(|_| centre.iter().map(|c| (c + normal.sample(rng)).clamp(-1.0, 1.0)).collect())
        .collect()
}

pub fn one_sample_per_step(max_steps: usize) -> PretrainConfig {
    PretrainConfig {
        max_steps,
        batch_size: 1,
        ..PretrainConfig::default()
    }
}

/// Grow steps on a stream whose mean jumps at step [`SHIFT`]. Errs if none
/// lands within 500 steps after the jump.
pub fn regime_shift_grows(seed: u64) -> Check<Vec<usize>> {
    let mut rng = chacha(seed);
    let mut stream = regime(&[0.6, 0.6, 0.6, 0.0, 0.0, 0.0], 0.05, SHIFT, &mut rng);
    stream.extend(regime(&[0.0, 0.0, -0.6, -0.6, 0.6, -0.6], 0.05, SHIFT, &mut rng));
    let mut srng = SeededRng::new(seed);
    let mut ae = EvolvingAutoencoder::new(6, 1, Activation::Tanh, OptimizerConfig::sgd(0.01), &mut srng).unwrap();
    let log = pretrain(&mut ae, &stream, &one_sample_per_step(2 * SHIFT), &mut srng).map_err(|e| e.to_string())?;
    let grows: Vec<usize> = log.grow_steps().collect();
    ensure(grows.iter().any(|&s| (SHIFT..SHIFT + 500).contains(&s)), || {
        format!("seed {seed}: no grow within 500 steps of the shift, grows at {grows:?}")
    })?;
    Ok(grows)
}

/// Prune steps on a stationary low-noise stream starting from 16 units.
pub fn stationary_prunes(seed: u64) -> Check<Vec<usize>> {
    let mut rng = chacha(100 + seed);
    let stream = regime(&[0.3, -0.2, 0.5, 0.1, -0.4, 0.2], 0.01, 5000, &mut rng);
    let mut srng = SeededRng::new(seed);
    let mut ae = EvolvingAutoencoder::new(6, 16, Activation::Tanh, OptimizerConfig::sgd(0.01), &mut srng).unwrap();
    let log = pretrain(&mut ae, &stream, &one_sample_per_step(5000), &mut srng).map_err(|e| e.to_string())?;
    let prunes: Vec<usize> = log.prune_steps().collect();
    ensure(!prunes.is_empty(), || format!("seed {seed}: no prune in 5000 steps"))?;
    Ok(prunes)
}

// ---- environment oracles ----

/// Reference Euler step written out from the equations of motion.
pub fn reference_cartpole_step(s: [f64; 4], push_right: bool) -> [f64; 4] {
    let (g, mc, mp, l, tau) = (9.8, 1.0, 0.1, 0.5, 0.02);
    let f = if push_right { 10.0 } else { -10.0 };
    let [x, xd, th, thd] = s;
    let num = g * th.sin() + th.cos() * ((-f - mp * l * thd * thd * th.sin()) / (mc + mp));
    let den = l * (4.0 / 3.0 - mp * th.cos().powi(2) / (mc + mp));
    let thdd = num / den;
    let xdd = (f + mp * l * (thd * thd * th.sin() - thdd * th.cos())) / (mc + mp);
    [x + tau * xd, xd + tau * xdd, th + tau * thd, thd + tau * thdd]
}

/// Largest deviation from the reference integrator over 50 random rollouts.
pub fn cartpole_max_deviation() -> Check<f64> {
    let mut rng = SeededRng::new(42);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let mut env = CartPole::new(CartPoleParams::default());
        let s0 = CartPoleState {
            x: rng.uniform(-1.0, 1.0),
            x_dot: rng.uniform(-1.0, 1.0),
            theta: rng.uniform(-0.2, 0.2),
            theta_dot: rng.uniform(-1.0, 1.0),
        };
        env.set_state(s0);
        let mut reference = [s0.x, s0.x_dot, s0.theta, s0.theta_dot];
        for k in 0..30 {
            if env.is_done() {
                break;
            }
            let right = (trial + k) % 3 != 0;
            let step = env.step(right as usize).map_err(|e| e.to_string())?;
            reference = reference_cartpole_step(reference, right);
            for (got, want) in step.observation.iter().zip(reference) {
                worst = worst.max((got - want).abs());
            }
            let out = reference[0].abs() > 2.4 || reference[2].abs() > 15f64.to_radians();
            ensure(step.terminal() == out, || format!("trial {trial} step {k}: termination mismatch"))?;
        }
    }
    Ok(worst)
}

/// Shortest number of actions to the goal, found by exploring the
/// environment's own transition function.
pub fn oracle_distance(start: GridState) -> usize {
    let mut env = GridWorld::new(GridParams::default());
    let mut dist = HashMap::from([((start.agent, start.heading as usize), 0usize)]);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&(s.agent, s.heading as usize)];
        if s.agent == s.goal {
            return d;
        }
        for a in 0..7 {
            env.set_state(s);
            env.step(a).unwrap();
            let next = env.state();
            dist.entry((next.agent, next.heading as usize)).or_insert_with(|| {
                queue.push_back(next);
                d + 1
            });
        }
    }
    panic!("goal unreachable");
}

/// Replays the planner's shortest path from several starts and checks both
/// its length and the episode reward against the search oracle.
pub fn grid_oracle_check() -> Check<usize> {
    let params = GridParams::default();
    let mut rng = SeededRng::new(3);
    let mut starts = vec![(params.start, params.start_heading)];
    while starts.len() < 40 {
        let pos = (1 + rng.below(14), 1 + rng.below(14));
        if pos != params.goal {
            starts.push((pos, Heading::from_index(rng.below(4))));
        }
    }
    for &(agent, heading) in &starts {
        let state = GridState {
            size: params.size,
            agent,
            heading,
            goal: params.goal,
        };
        let path = bfs_shortest_path(&state).ok_or("planner found no path")?;
        let oracle = oracle_distance(state);
        ensure(path.len() == oracle, || format!("start {agent:?}: path {} vs oracle {oracle}", path.len()))?;

        let mut env = GridWorld::new(params);
        env.set_state(state);
        let mut total = 0.0;
        for (i, a) in path.iter().enumerate() {
            let step = env.step(*a as usize).map_err(|e| e.to_string())?;
            total += step.reward;
            ensure(step.done == (i + 1 == path.len()), || format!("start {agent:?}: early end at {i}"))?;
        }
        let expected = params.goal_reward - params.step_penalty * oracle as f64;
        ensure((total - expected).abs() < 1e-12, || format!("start {agent:?}: reward {total} vs {expected}"))?;
    }
    Ok(starts.len())
}
