mod common;

use common::{cartpole_max_deviation, grid_oracle_check};
use saqn::env::{bfs_shortest_path, Environment, GridParams, GridWorld};
use saqn::numerics::SeededRng;

#[test]
fn cartpole_matches_reference_integration() {
    let worst = cartpole_max_deviation().unwrap();
    assert!(worst < 1e-9, "max deviation {worst:e}");
}

#[test]
fn grid_shortest_path_reward_matches_oracle() {
    grid_oracle_check().unwrap();
}

#[test]
fn default_start_optimal_return() {
    let mut env = GridWorld::new(GridParams::default());
    env.reset(&mut SeededRng::new(0));
    let path = bfs_shortest_path(&env.state()).unwrap();
    let total: f64 = path.iter().map(|a| env.step(*a as usize).unwrap().reward).sum();
    // 26 moves plus one turn, each costing 0.1, then +10
    assert!((total - 7.3).abs() < 1e-12);
}
