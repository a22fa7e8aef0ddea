use std::io::Write;

use crate::agent::StateEncoder;
use crate::env::EnvKind;
use crate::error::{Error, Result};

const CARTPOLE_THETA_LIMIT: f64 = 0.2617993877991494; // 15°

/// Category of a raw cart-pole observation by pole angle.
pub fn cartpole_label(obs: &[f64]) -> &'static str {
    let theta = obs[2];
    if theta < -CARTPOLE_THETA_LIMIT {
        "left-exceed"
    } else if theta > CARTPOLE_THETA_LIMIT {
        "right-exceed"
    } else {
        "in-bounds"
    }
}

/// Category of a raw grid observation by what the agent can see.
pub fn grid_label(obs: &[f64]) -> &'static str {
    const GOAL_TYPE: f64 = 0.8;
    const WALL_TYPE: f64 = 0.2;
    // view cell (3, 5): directly in front of the agent
    const AHEAD: usize = (3 * 7 + 5) * 3;
    if obs.chunks(3).any(|c| (c[0] - GOAL_TYPE).abs() < 1e-9) {
        "goal-in-view"
    } else if (obs[AHEAD] - WALL_TYPE).abs() < 1e-9 {
        "wall-ahead"
    } else {
        "open"
    }
}

pub fn state_label(env: EnvKind, obs: &[f64]) -> &'static str {
    match env {
        EnvKind::Cartpole => cartpole_label(obs),
        EnvKind::Grid => grid_label(obs),
    }
}

/// Writes `label,z_1..z_r`, one row per raw state.
pub fn dump_latents<W: Write>(encoder: &StateEncoder, env: EnvKind, states: &[Vec<f64>], mut out: W) -> Result<()> {
    let io = |e| Error::io("<latent csv>", e);
    let r = encoder.autoencoder().width();
    let header: Vec<String> = std::iter::once("label".to_string())
        .chain((1..=r).map(|i| format!("z_{i}")))
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for s in states {
        let z = encoder.latent(s)?;
        let mut line = state_label(env, s).to_string();
        for v in z {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}
