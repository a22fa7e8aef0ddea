use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{EnvStep, Environment};
use crate::error::{Error, Result};
use crate::numerics::SeededRng;

pub const VIEW_SIZE: usize = 7;
pub const GRID_OBS_DIM: usize = VIEW_SIZE * VIEW_SIZE * 3;

// cell encodings (object, colour, state)
const EMPTY: [u8; 3] = [1, 0, 0];
const WALL: [u8; 3] = [2, 5, 0];
const GOAL: [u8; 3] = [8, 1, 0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heading {
    East = 0,
    South = 1,
    West = 2,
    North = 3,
}

impl Heading {
    /// Heading for `i mod 4`, clockwise from east.
    pub fn from_index(i: usize) -> Self {
        match i % 4 {
            0 => Heading::East,
            1 => Heading::South,
            2 => Heading::West,
            _ => Heading::North,
        }
    }

    pub fn left(self) -> Self {
        Self::from_index(self as usize + 3)
    }

    pub fn right(self) -> Self {
        Self::from_index(self as usize + 1)
    }

    /// Unit step `(dx, dy)`; `y` grows southwards.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
            Heading::North => (0, -1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    TurnLeft = 0,
    TurnRight = 1,
    Forward = 2,
    Pickup = 3,
    Drop = 4,
    Toggle = 5,
    Done = 6,
}

impl GridAction {
    pub const COUNT: usize = 7;

    pub fn from_index(i: usize) -> Result<Self> {
        Ok(match i {
            0 => GridAction::TurnLeft,
            1 => GridAction::TurnRight,
            2 => GridAction::Forward,
            3 => GridAction::Pickup,
            4 => GridAction::Drop,
            5 => GridAction::Toggle,
            6 => GridAction::Done,
            other => return Err(Error::Input(format!("grid action must be in 0..7, got {other}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridParams {
    pub size: usize,
    pub start: (usize, usize),
    pub start_heading: Heading,
    pub goal: (usize, usize),
    pub max_steps: usize,
    pub goal_reward: f64,
    pub step_penalty: f64,
    pub random_start: bool,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            size: 16,
            start: (1, 1),
            start_heading: Heading::East,
            goal: (14, 14),
            max_steps: 256,
            goal_reward: 10.0,
            step_penalty: 0.1,
            random_start: false,
        }
    }
}

/// Snapshot of the room: walls on the outer ring, one goal cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridState {
    pub size: usize,
    pub agent: (usize, usize),
    pub heading: Heading,
    pub goal: (usize, usize),
}

impl GridState {
    fn in_grid(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.size && (y as usize) < self.size
    }

    fn is_wall(&self, x: i64, y: i64) -> bool {
        !self.in_grid(x, y) || x == 0 || y == 0 || x as usize == self.size - 1 || y as usize == self.size - 1
    }

    fn cell_code(&self, x: i64, y: i64) -> [u8; 3] {
        if self.is_wall(x, y) {
            WALL
        } else if (x as usize, y as usize) == self.goal {
            GOAL
        } else {
            EMPTY
        }
    }

    fn front(&self) -> (i64, i64) {
        let (dx, dy) = self.heading.delta();
        (self.agent.0 as i64 + dx, self.agent.1 as i64 + dy)
    }

    /// 7×7×3 egocentric view, flattened as `[view_x][view_y][channel]`.
    ///
    /// The agent sits at view cell `(3, 6)` looking towards `view_y = 0`.
    /// Cells beyond the grid read as wall. Codes are divided by 10.
    pub fn observe(&self) -> Vec<f64> {
        let (fx, fy) = self.heading.delta();
        let (rx, ry) = self.heading.right().delta();
        let mut obs = Vec::with_capacity(GRID_OBS_DIM);
        for vx in 0..VIEW_SIZE as i64 {
            for vy in 0..VIEW_SIZE as i64 {
                let forward = (VIEW_SIZE as i64 - 1) - vy;
                let lateral = vx - (VIEW_SIZE as i64 / 2);
                let wx = self.agent.0 as i64 + forward * fx + lateral * rx;
                let wy = self.agent.1 as i64 + forward * fy + lateral * ry;
                obs.extend(self.cell_code(wx, wy).iter().map(|&c| c as f64 / 10.0));
            }
        }
        obs
    }
}

/// Empty walled room; reach the goal cell.
#[derive(Debug, Clone)]
pub struct GridWorld {
    params: GridParams,
    state: GridState,
    steps: usize,
    done: bool,
}

impl GridWorld {
    pub fn new(params: GridParams) -> Self {
        let state = GridState {
            size: params.size,
            agent: params.start,
            heading: params.start_heading,
            goal: params.goal,
        };
        Self {
            params,
            state,
            steps: 0,
            done: false,
        }
    }

    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn state(&self) -> GridState {
        self.state
    }

    pub fn set_state(&mut self, state: GridState) {
        self.state = state;
        self.steps = 0;
        self.done = state.agent == state.goal;
    }
}

impl Environment for GridWorld {
    fn observation_dim(&self) -> usize {
        GRID_OBS_DIM
    }

    fn action_count(&self) -> usize {
        GridAction::COUNT
    }

    fn reset(&mut self, rng: &mut SeededRng) -> Vec<f64> {
        let p = &self.params;
        let (agent, heading) = if p.random_start {
            let inner = p.size - 2;
            loop {
                let pos = (1 + rng.below(inner), 1 + rng.below(inner));
                if pos != p.goal {
                    break (pos, Heading::from_index(rng.below(4)));
                }
            }
        } else {
            (p.start, p.start_heading)
        };
        self.set_state(GridState {
            size: p.size,
            agent,
            heading,
            goal: p.goal,
        });
        self.state.observe()
    }

    fn step(&mut self, action: usize) -> Result<EnvStep> {
        let action = GridAction::from_index(action)?;
        if self.done {
            return Err(Error::State("grid episode is over; reset first".into()));
        }
        let mut reward = -self.params.step_penalty;
        match action {
            GridAction::TurnLeft => self.state.heading = self.state.heading.left(),
            GridAction::TurnRight => self.state.heading = self.state.heading.right(),
            GridAction::Forward => {
                let (x, y) = self.state.front();
                if !self.state.is_wall(x, y) {
                    self.state.agent = (x as usize, y as usize);
                }
            }
            // nothing in the room to interact with
            GridAction::Pickup | GridAction::Drop | GridAction::Toggle | GridAction::Done => {}
        }
        self.steps += 1;
        let reached = self.state.agent == self.state.goal;
        if reached {
            reward += self.params.goal_reward;
        }
        let capped = self.steps >= self.params.max_steps;
        self.done = reached || capped;
        Ok(EnvStep {
            observation: self.state.observe(),
            reward,
            done: self.done,
            truncated: capped && !reached,
        })
    }

    fn observation(&self) -> Vec<f64> {
        self.state.observe()
    }

    fn is_done(&self) -> bool {
        self.done
    }
}

/// Shortest turn/forward action sequence from `state` to its goal, by
/// breadth-first search over `(x, y, heading)`.
pub fn bfs_shortest_path(state: &GridState) -> Option<Vec<GridAction>> {
    let n = state.size;
    let key = |x: usize, y: usize, h: Heading| (y * n + x) * 4 + h as usize;
    let mut prev: Vec<Option<(usize, GridAction)>> = vec![None; n * n * 4];
    let mut seen = vec![false; n * n * 4];
    let start = key(state.agent.0, state.agent.1, state.heading);
    seen[start] = true;
    let mut queue = VecDeque::from([(state.agent, state.heading)]);
    while let Some(((x, y), h)) = queue.pop_front() {
        let here = key(x, y, h);
        if (x, y) == state.goal {
            let mut path = Vec::new();
            let mut k = here;
            while let Some((p, a)) = prev[k] {
                path.push(a);
                k = p;
            }
            path.reverse();
            return Some(path);
        }
        let probe = GridState {
            agent: (x, y),
            heading: h,
            ..*state
        };
        let (fx, fy) = probe.front();
        let mut moves = vec![((x, y), h.left(), GridAction::TurnLeft), ((x, y), h.right(), GridAction::TurnRight)];
        if !probe.is_wall(fx, fy) {
            moves.push(((fx as usize, fy as usize), h, GridAction::Forward));
        }
        for (pos, nh, a) in moves {
            let k = key(pos.0, pos.1, nh);
            if !seen[k] {
                seen[k] = true;
                prev[k] = Some((here, a));
                queue.push_back((pos, nh));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fresh() -> GridWorld {
        let mut g = GridWorld::new(GridParams::default());
        g.reset(&mut SeededRng::new(0));
        g
    }

    #[test]
    fn forward_into_wall_stays_put() {
        let mut g = fresh();
        g.set_state(GridState {
            agent: (1, 1),
            heading: Heading::North,
            ..g.state()
        });
        let s = g.step(GridAction::Forward as usize).unwrap();
        assert_eq!(g.state().agent, (1, 1));
        assert!((s.reward + 0.1).abs() < 1e-15);
        assert!(!s.done);
    }

    #[test]
    fn stepping_onto_goal() {
        let mut g = fresh();
        g.set_state(GridState {
            agent: (13, 14),
            heading: Heading::East,
            ..g.state()
        });
        let s = g.step(GridAction::Forward as usize).unwrap();
        assert!((s.reward - 9.9).abs() < 1e-12);
        assert!(s.done && !s.truncated);
        assert!(g.step(0).is_err());
    }

    #[test]
    fn interaction_actions_are_noops() {
        let mut g = fresh();
        let before = g.state();
        for a in 3..7 {
            let s = g.step(a).unwrap();
            assert_eq!(g.state(), before);
            assert!((s.reward + 0.1).abs() < 1e-15);
        }
        assert!(matches!(g.step(7), Err(Error::Input(_))));
    }

    #[test]
    fn step_cap_truncates() {
        let mut g = GridWorld::new(GridParams {
            max_steps: 5,
            ..Default::default()
        });
        g.reset(&mut SeededRng::new(0));
        let mut last = None;
        for _ in 0..5 {
            last = Some(g.step(GridAction::TurnLeft as usize).unwrap());
        }
        let last = last.unwrap();
        assert!(last.done && last.truncated);
    }

    #[test]
    fn observation_shape_and_range() {
        let mut g = fresh();
        for a in [2, 2, 1, 2, 0, 2, 2, 2] {
            let obs = g.step(a).unwrap().observation;
            assert_eq!(obs.len(), 147);
            assert!(obs.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn view_centre_column_looks_ahead() {
        let g = fresh();
        let obs = g.state().observe();
        let cell = |vx: usize, vy: usize| {
            let i = (vx * VIEW_SIZE + vy) * 3;
            [obs[i], obs[i + 1], obs[i + 2]]
        };
        // agent cell itself is empty floor
        assert_eq!(cell(3, 6), [0.1, 0.0, 0.0]);
        // facing east from (1,1): the cell to the left (north) is the outer wall
        assert_eq!(cell(2, 6), [0.2, 0.5, 0.0]);
        // straight ahead is open floor
        assert_eq!(cell(3, 0), [0.1, 0.0, 0.0]);
    }

    #[test]
    fn rotation_changes_view_translation_preserves_it() {
        let base = GridState {
            size: 16,
            agent: (6, 6),
            heading: Heading::East,
            goal: (8, 7),
        };
        let turned = GridState {
            heading: Heading::South,
            ..base
        };
        assert_ne!(base.observe(), turned.observe());
        let shifted = GridState {
            agent: (7, 7),
            goal: (9, 8),
            ..base
        };
        assert_eq!(base.observe(), shifted.observe());
    }

    #[test]
    fn goal_visible_when_ahead() {
        let s = GridState {
            size: 16,
            agent: (5, 5),
            heading: Heading::East,
            goal: (8, 5),
        };
        let obs = s.observe();
        // three cells ahead on the centre column: view (3, 3)
        let i = (3 * VIEW_SIZE + 3) * 3;
        assert_eq!(&obs[i..i + 3], &[0.8, 0.1, 0.0]);
    }

    #[test]
    fn shortest_path_from_default_start() {
        let g = fresh();
        let path = bfs_shortest_path(&g.state()).unwrap();
        assert_eq!(path.len(), 27);
    }

    #[test]
    fn goal_reachable_from_every_start() {
        let p = GridParams::default();
        for x in 1..15 {
            for y in 1..15 {
                for h in 0..4 {
                    let s = GridState {
                        size: 16,
                        agent: (x, y),
                        heading: Heading::from_index(h),
                        goal: p.goal,
                    };
                    assert!(bfs_shortest_path(&s).is_some());
                }
            }
        }
    }

    #[test]
    fn random_start_reset_is_seeded() {
        let params = GridParams {
            random_start: true,
            ..Default::default()
        };
        let mut a = GridWorld::new(params);
        let mut b = GridWorld::new(params);
        assert_eq!(a.reset(&mut SeededRng::new(4)), b.reset(&mut SeededRng::new(4)));
        assert_eq!(a.state(), b.state());
        assert_ne!(a.state().agent, params.goal);
    }
}
