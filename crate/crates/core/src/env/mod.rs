//! The multi-agent environment: one agent per allied unit.
//!
//! Actions are `noop`, `stop`, `move` north/east/south/west and one `target`
//! action per enemy slot. Choosing an unavailable action is an error, and the
//! episode's state is left untouched when that happens.

mod layout;
mod reward;

use std::sync::Arc;

use thiserror::Error;

use crate::engine::{Command, EngineConfig, GameState, StepEvents, Unit};
use crate::geometry::Vec2;
use crate::scenario::{Faction, Scenario, ScenarioError};

pub use layout::{
    Layout, FIXED_ACTIONS, MOVE_EAST, MOVE_NORTH, MOVE_SOUTH, MOVE_WEST, NOOP, STOP,
};
pub use reward::{compute_reward, RewardConfig};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("agent {agent} chose unavailable action {action}")]
    UnavailableAction { agent: usize, action: usize },
    #[error("expected {expected} actions, got {found}")]
    WrongActionCount { expected: usize, found: usize },
    #[error("the episode is over; call reset")]
    EpisodeFinished,
    #[error("{allies} allies cannot all be addressed by a healer through {enemies} target slots")]
    HealerSlotOverflow { allies: usize, enemies: usize },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvConfig {
    pub sight_range: f64,
    /// Center-to-center distance within which target actions are available.
    pub targeting_range: f64,
    /// Length of a move action, in grid units.
    pub move_distance: f64,
    pub reward: RewardConfig,
    pub engine: EngineConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            sight_range: 9.0,
            targeting_range: 6.0,
            move_distance: 2.0,
            reward: RewardConfig::default(),
            engine: EngineConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnvInfo {
    pub n_agents: usize,
    pub n_enemies: usize,
    pub n_actions: usize,
    pub obs_shape: usize,
    pub state_shape: usize,
    pub episode_limit: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepInfo {
    pub battle_won: bool,
    /// The episode hit its step limit without a winner.
    pub timeout: bool,
    pub dead_allies: usize,
    pub dead_enemies: usize,
    pub episode_steps: u32,
    pub events: StepEvents,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub reward: f64,
    pub terminated: bool,
    pub info: StepInfo,
}

const DIRECTIONS: [Vec2; 4] = [
    Vec2 { x: 0.0, y: 1.0 },
    Vec2 { x: 1.0, y: 0.0 },
    Vec2 { x: 0.0, y: -1.0 },
    Vec2 { x: -1.0, y: 0.0 },
];

#[derive(Clone, Debug)]
pub struct Env {
    state: GameState,
    config: EnvConfig,
    layout: Layout,
    last_actions: Vec<usize>,
    episode_steps: u32,
    finished: bool,
    reward_denominator: f64,
}

impl Env {
    pub fn new(scenario: Scenario, seed: u64) -> Result<Env, EnvError> {
        Env::with_config(scenario, EnvConfig::default(), seed)
    }

    /// A shipped scenario name or a path to a scenario file.
    pub fn load(name_or_path: &str, seed: u64) -> Result<Env, EnvError> {
        Env::new(Scenario::load(name_or_path)?, seed)
    }

    pub fn with_config(scenario: Scenario, config: EnvConfig, seed: u64) -> Result<Env, EnvError> {
        let layout = Layout::new(&scenario);
        let ally_healer = scenario
            .groups
            .iter()
            .filter(|g| g.faction == Faction::Ally)
            .flat_map(|g| g.units.iter())
            .any(|(r, _)| scenario.unit_type(r).is_healer());
        if ally_healer && layout.n_allies > layout.n_enemies {
            return Err(EnvError::HealerSlotOverflow {
                allies: layout.n_allies,
                enemies: layout.n_enemies,
            });
        }
        let state = GameState::new(Arc::new(scenario), config.engine, seed)?;
        let reward_denominator = config.reward.denominator(state.enemies());
        Ok(Env {
            state,
            config,
            layout,
            last_actions: vec![NOOP; layout.n_allies],
            episode_steps: 0,
            finished: false,
            reward_denominator,
        })
    }

    /// Starts a new episode; returns the observations and the state.
    pub fn reset(&mut self, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<f64>), EnvError> {
        self.state.reset(seed)?;
        self.last_actions.fill(NOOP);
        self.episode_steps = 0;
        self.finished = false;
        Ok((self.get_obs(), self.get_state()))
    }

    pub fn game_state(&self) -> &GameState {
        &self.state
    }

    /// For setting up situations by hand; see [`GameState::units_mut`].
    pub fn game_state_mut(&mut self) -> &mut GameState {
        &mut self.state
    }

    pub fn scenario(&self) -> &Scenario {
        self.state.scenario()
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn reward_denominator(&self) -> f64 {
        self.reward_denominator
    }

    pub fn episode_steps(&self) -> u32 {
        self.episode_steps
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn set_recording(&mut self, on: bool) {
        self.state.set_recording(on);
    }

    pub fn get_env_info(&self) -> EnvInfo {
        EnvInfo {
            n_agents: self.layout.n_allies,
            n_enemies: self.layout.n_enemies,
            n_actions: self.layout.n_actions,
            obs_shape: self.layout.obs_size(),
            state_shape: self.layout.state_size(),
            episode_limit: self.scenario().episode_limit,
        }
    }

    /// Applies one action per agent and advances one env step.
    ///
    /// Every action is validated against the current masks before anything
    /// changes.
    pub fn step(&mut self, actions: &[usize]) -> Result<Transition, EnvError> {
        if self.finished {
            return Err(EnvError::EpisodeFinished);
        }
        if actions.len() != self.layout.n_allies {
            return Err(EnvError::WrongActionCount {
                expected: self.layout.n_allies,
                found: actions.len(),
            });
        }
        let mut commands = Vec::with_capacity(actions.len());
        for (agent, &action) in actions.iter().enumerate() {
            if !self.is_available(agent, action) {
                return Err(EnvError::UnavailableAction { agent, action });
            }
            commands.push(self.decode(agent, action));
        }

        let events = self.state.env_step(&commands);
        self.last_actions.copy_from_slice(actions);
        self.episode_steps += 1;

        let units = self.state.units();
        let allies_alive = self.state.alive_count(Faction::Ally);
        let enemies_alive = self.state.alive_count(Faction::Enemy);
        let won = enemies_alive == 0 && allies_alive > 0;
        let dealt = events.damage_to(units, Faction::Enemy);
        let kills = events.deaths_of(units, Faction::Enemy);
        let reward = compute_reward(dealt, kills, won, self.reward_denominator, &self.config.reward);

        let over = enemies_alive == 0 || allies_alive == 0;
        let timeout = !over && self.episode_steps >= self.scenario().episode_limit;
        self.finished = over || timeout;
        Ok(Transition {
            reward,
            terminated: self.finished,
            info: StepInfo {
                battle_won: won,
                timeout,
                dead_allies: self.layout.n_allies - allies_alive,
                dead_enemies: self.layout.n_enemies - enemies_alive,
                episode_steps: self.episode_steps,
                events,
            },
        })
    }

    fn agent(&self, agent: usize) -> &Unit {
        &self.state.allies()[agent]
    }

    /// The unit behind target slot `k` for `agent`: an ally for healers,
    /// an enemy otherwise.
    fn slot_unit(&self, agent: usize, k: usize) -> &Unit {
        if self.agent(agent).is_healer() {
            &self.state.allies()[k]
        } else {
            &self.state.enemies()[k]
        }
    }

    fn decode(&self, agent: usize, action: usize) -> Command {
        let unit = self.agent(agent);
        match action {
            NOOP => Command::Noop,
            STOP => Command::Stop,
            MOVE_NORTH..=MOVE_WEST => Command::Move {
                point: self.move_destination(unit, action),
            },
            _ => Command::Target {
                unit: self.slot_unit(agent, action - FIXED_ACTIONS).id,
            },
        }
    }

    fn move_destination(&self, unit: &Unit, action: usize) -> Vec2 {
        unit.position + DIRECTIONS[action - MOVE_NORTH] * self.config.move_distance
    }

    fn can_move(&self, unit: &Unit, action: usize) -> bool {
        self.scenario()
            .terrain
            .is_walkable_at(self.move_destination(unit, action))
    }

    fn can_target(&self, agent: usize, k: usize) -> bool {
        if k >= self.layout.n_enemies {
            return false;
        }
        let unit = self.agent(agent);
        if unit.is_healer() && k >= self.layout.n_allies {
            return false;
        }
        let target = self.slot_unit(agent, k);
        let valid = if unit.is_healer() {
            target.id != unit.id && !target.is_healer()
        } else {
            unit.unit_type.can_target(target.unit_type.plane)
        };
        valid
            && target.alive
            && unit.position.distance(target.position) <= self.config.targeting_range
    }

    fn is_available(&self, agent: usize, action: usize) -> bool {
        let unit = self.agent(agent);
        if !unit.alive {
            return action == NOOP;
        }
        match action {
            NOOP => false,
            STOP => true,
            MOVE_NORTH..=MOVE_WEST => self.can_move(unit, action),
            _ => self.can_target(agent, action - FIXED_ACTIONS),
        }
    }

    pub fn get_avail_agent_actions(&self, agent: usize) -> Vec<bool> {
        (0..self.layout.n_actions)
            .map(|a| self.is_available(agent, a))
            .collect()
    }

    pub fn get_avail_actions(&self) -> Vec<Vec<bool>> {
        (0..self.layout.n_allies)
            .map(|a| self.get_avail_agent_actions(a))
            .collect()
    }

    pub fn get_obs(&self) -> Vec<Vec<f64>> {
        (0..self.layout.n_allies).map(|a| self.get_obs_agent(a)).collect()
    }

    pub fn get_obs_agent(&self, agent: usize) -> Vec<f64> {
        let layout = &self.layout;
        let mut obs = vec![0.0; layout.obs_size()];
        let me = self.agent(agent);
        if !me.alive {
            return obs;
        }
        let sight = self.config.sight_range;
        let visible = |u: &Unit| u.alive && me.position.distance(u.position) <= sight;

        for (i, action) in (MOVE_NORTH..=MOVE_WEST).enumerate() {
            obs[i] = self.can_move(me, action) as u8 as f64;
        }

        for (k, e) in self.state.enemies().iter().enumerate() {
            if !visible(e) {
                continue;
            }
            let o = layout.obs_enemy_offset(k);
            let attackable = !me.is_healer() && self.can_target(agent, k);
            obs[o] = attackable as u8 as f64;
            self.write_relative(&mut obs[o + 1..], me, e);
            self.write_unit(&mut obs[o + 4..], e, layout.enemy_shields);
        }

        let others = self.state.allies().iter().filter(|a| a.id != me.id);
        for (slot, a) in others.enumerate() {
            if !visible(a) {
                continue;
            }
            let o = layout.obs_ally_offset(slot);
            obs[o] = 1.0;
            self.write_relative(&mut obs[o + 1..], me, a);
            self.write_unit(&mut obs[o + 4..], a, layout.ally_shields);
        }

        let o = layout.obs_own_offset();
        self.write_unit(&mut obs[o..], me, layout.ally_shields);
        obs
    }

    /// Distance, relative x and relative y, each over the sight range.
    fn write_relative(&self, out: &mut [f64], me: &Unit, other: &Unit) {
        let sight = self.config.sight_range;
        let d = other.position - me.position;
        out[0] = d.length() / sight;
        out[1] = d.x / sight;
        out[2] = d.y / sight;
    }

    /// Health, optional shield and the type one-hot.
    fn write_unit(&self, out: &mut [f64], u: &Unit, shields: bool) {
        out[0] = u.health / u.unit_type.hp;
        self.write_extras(&mut out[1..], u, shields);
    }

    pub fn get_state(&self) -> Vec<f64> {
        let layout = &self.layout;
        let mut state = vec![0.0; layout.state_size()];
        let scenario = self.scenario();
        let half = Vec2::new(scenario.width as f64 / 2.0, scenario.height as f64 / 2.0);
        let centred = |u: &Unit| {
            let p = u.position - half;
            ((p.x / half.x).clamp(-1.0, 1.0), (p.y / half.y).clamp(-1.0, 1.0))
        };

        for (k, a) in self.state.allies().iter().enumerate() {
            if !a.alive {
                continue;
            }
            let o = layout.state_ally_offset(k);
            let (x, y) = centred(a);
            state[o] = a.health / a.unit_type.hp;
            state[o + 1] = ratio(a.cooldown, a.unit_type.cooldown);
            state[o + 2] = x;
            state[o + 3] = y;
            self.write_extras(&mut state[o + 4..], a, layout.ally_shields);
        }
        for (k, e) in self.state.enemies().iter().enumerate() {
            if !e.alive {
                continue;
            }
            let o = layout.state_enemy_offset(k);
            let (x, y) = centred(e);
            state[o] = e.health / e.unit_type.hp;
            state[o + 1] = x;
            state[o + 2] = y;
            self.write_extras(&mut state[o + 3..], e, layout.enemy_shields);
        }
        for (k, &action) in self.last_actions.iter().enumerate() {
            state[layout.state_action_offset(k) + action] = 1.0;
        }
        state
    }

    /// Optional shield followed by the type one-hot.
    fn write_extras(&self, out: &mut [f64], u: &Unit, shields: bool) {
        let mut n = 0;
        if shields {
            out[0] = ratio(u.shield, u.max_shield);
            n = 1;
        }
        if let Some(id) = u.type_id {
            out[n + id] = 1.0;
        }
    }
}

fn ratio(value: f64, max: f64) -> f64 {
    if max > 0.0 {
        value / max
    } else {
        0.0
    }
}
