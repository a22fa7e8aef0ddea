use super::{EnvStep, Environment};
use crate::error::{Error, Result};
use crate::numerics::SeededRng;

/// Symmetric per-feature bounds `(x, ẋ, θ, θ̇)` used to scale observations
/// into the autoencoder's range.
pub const CARTPOLE_OBS_BOUNDS: [f64; 4] = [2.4, 3.0, 0.2617993877991494, 3.5];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPoleParams {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    pub half_length: f64,
    pub force: f64,
    pub tau: f64,
    pub theta_threshold: f64,
    pub x_threshold: f64,
    pub max_steps: usize,
}

impl Default for CartPoleParams {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            half_length: 0.5,
            force: 10.0,
            tau: 0.02,
            theta_threshold: 15.0f64.to_radians(),
            x_threshold: 2.4,
            max_steps: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub fn to_vec(self) -> Vec<f64> {
        vec![self.x, self.x_dot, self.theta, self.theta_dot]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CartPoleAction {
    Left = 0,
    Right = 1,
}

/// Cart-pole balancing with explicit Euler integration.
#[derive(Debug, Clone)]
pub struct CartPole {
    params: CartPoleParams,
    state: CartPoleState,
    steps: usize,
    done: bool,
}

impl CartPole {
    pub fn new(params: CartPoleParams) -> Self {
        Self {
            params,
            state: CartPoleState::default(),
            steps: 0,
            done: false,
        }
    }

    pub fn params(&self) -> &CartPoleParams {
        &self.params
    }

    pub fn state(&self) -> CartPoleState {
        self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Places the system in `state`; the episode is over if it is already
    /// outside the limits.
    pub fn set_state(&mut self, state: CartPoleState) {
        self.state = state;
        self.steps = 0;
        self.done = self.out_of_bounds();
    }

    fn out_of_bounds(&self) -> bool {
        self.state.theta.abs() > self.params.theta_threshold || self.state.x.abs() > self.params.x_threshold
    }

    /// Initial state with every component uniform in `[-0.05, 0.05]`.
    pub fn reset_state(&mut self, rng: &mut SeededRng) -> CartPoleState {
        let mut draw = || rng.uniform(-0.05, 0.05);
        let state = CartPoleState {
            x: draw(),
            x_dot: draw(),
            theta: draw(),
            theta_dot: draw(),
        };
        self.set_state(state);
        state
    }

    /// Advances one step under an arbitrary horizontal force.
    pub fn step_with_force(&mut self, force: f64) -> Result<EnvStep> {
        if self.done {
            return Err(Error::State("cart-pole episode is over; reset first".into()));
        }
        let p = &self.params;
        let s = self.state;
        let total_mass = p.cart_mass + p.pole_mass;
        let pole_mass_length = p.pole_mass * p.half_length;
        let (sin, cos) = s.theta.sin_cos();

        let temp = (force + pole_mass_length * s.theta_dot * s.theta_dot * sin) / total_mass;
        let theta_acc =
            (p.gravity * sin - cos * temp) / (p.half_length * (4.0 / 3.0 - p.pole_mass * cos * cos / total_mass));
        let x_acc = temp - pole_mass_length * theta_acc * cos / total_mass;

        self.state = CartPoleState {
            x: s.x + p.tau * s.x_dot,
            x_dot: s.x_dot + p.tau * x_acc,
            theta: s.theta + p.tau * s.theta_dot,
            theta_dot: s.theta_dot + p.tau * theta_acc,
        };
        self.steps += 1;
        let failed = self.out_of_bounds();
        let capped = self.steps >= self.params.max_steps;
        self.done = failed || capped;
        Ok(EnvStep {
            observation: self.state.to_vec(),
            reward: 1.0,
            done: self.done,
            truncated: capped && !failed,
        })
    }
}

impl Environment for CartPole {
    fn observation_dim(&self) -> usize {
        4
    }

    fn action_count(&self) -> usize {
        2
    }

    fn reset(&mut self, rng: &mut SeededRng) -> Vec<f64> {
        self.reset_state(rng).to_vec()
    }

    fn step(&mut self, action: usize) -> Result<EnvStep> {
        let force = match action {
            0 => -self.params.force,
            1 => self.params.force,
            other => return Err(Error::Input(format!("cart-pole action must be 0 or 1, got {other}"))),
        };
        self.step_with_force(force)
    }

    fn observation(&self) -> Vec<f64> {
        self.state.to_vec()
    }

    fn is_done(&self) -> bool {
        self.done
    }
}
