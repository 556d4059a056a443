//! The fixed-timestep battle simulation.
//!
//! One env step assigns the agents' commands and then runs eight game steps
//! of 1/16 s. Every game step runs four phases, each finished by all units
//! before the next begins:
//!
//! 1. target cleanup: drop targets the command no longer allows;
//! 2. velocity preparation: pick targets, declare attacks, choose a preferred velocity;
//! 3. velocity adjustment: collision avoidance turns preferences into velocities;
//! 4. execution, in a freshly shuffled order: move, tick cooldowns, regenerate, strike.
//!
//! Enemies keep a single standing order for the whole episode: attack-move
//! to the scenario's attack point.

mod combat;
pub mod replay;
mod unit;

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::collision::{Crowd, CrowdConfig, Disc, ObstacleSet};
use crate::geometry::Vec2;
use crate::scenario::{place_groups, Faction, Result, Scenario};

pub use combat::{
    apply_attack, apply_heal, execute_targeter, DamageRecord, Strike, HEAL_ENERGY_COST, HEAL_RATE,
};
pub use replay::{read_records, write_record, Frame, Header, Record, UnitInfo, UnitRecord};
pub use unit::{Command, Unit};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    pub game_steps_per_env_step: u32,
    /// Seconds per game step.
    pub dt: f64,
    /// Collision-avoidance horizon in seconds.
    pub tau: f64,
    /// Seconds without damage before shields start to recover.
    pub shield_regen_delay: f64,
    /// Shield points per second.
    pub shield_regen_rate: f64,
    /// Energy points per second.
    pub energy_regen_rate: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            game_steps_per_env_step: 8,
            dt: 1.0 / 16.0,
            tau: 1.0,
            shield_regen_delay: 10.0,
            shield_regen_rate: 2.0,
            energy_regen_rate: 0.5625,
        }
    }
}

/// What happened during one env step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepEvents {
    /// Every hit, in execution order.
    pub ledger: Vec<DamageRecord>,
    /// Units that died, in order of death.
    pub deaths: Vec<usize>,
    /// Total health restored by healers.
    pub healed: f64,
    pub game_steps: u32,
    /// One frame per game step when recording is on.
    pub frames: Vec<Frame>,
}

impl StepEvents {
    pub fn damage_to(&self, units: &[Unit], faction: Faction) -> f64 {
        self.ledger
            .iter()
            .filter(|r| units[r.target].faction == faction)
            .map(|r| r.shield_damage + r.health_damage)
            .sum()
    }

    pub fn deaths_of(&self, units: &[Unit], faction: Faction) -> usize {
        self.deaths.iter().filter(|&&id| units[id].faction == faction).count()
    }
}

#[derive(Clone, Debug)]
pub struct GameState {
    scenario: Arc<Scenario>,
    config: EngineConfig,
    units: Vec<Unit>,
    n_allies: usize,
    crowd: Crowd,
    rng: ChaCha8Rng,
    seed: u64,
    step_counter: u64,
    damage_ledger: Vec<DamageRecord>,
    recording: bool,
}

impl PartialEq for GameState {
    fn eq(&self, other: &Self) -> bool {
        self.units == other.units
            && self.step_counter == other.step_counter
            && self.rng == other.rng
            && self.damage_ledger == other.damage_ledger
            && self.config == other.config
    }
}

/// The target choice and movement intent of one unit for one game step.
struct Intent {
    target: Option<usize>,
    preferred: Vec2,
    attacking: bool,
    max_speed: f64,
}

impl GameState {
    pub fn new(scenario: Arc<Scenario>, config: EngineConfig, seed: u64) -> Result<GameState> {
        let obstacles = ObstacleSet::from_rects(
            &scenario.obstacles,
            Some((scenario.width as f64, scenario.height as f64)),
        );
        let crowd = Crowd::new(
            CrowdConfig {
                tau: config.tau,
                dt: config.dt,
            },
            obstacles,
        );
        let mut state = GameState {
            scenario,
            config,
            units: Vec::new(),
            n_allies: 0,
            crowd,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            step_counter: 0,
            damage_ledger: Vec::new(),
            recording: false,
        };
        state.reset(seed)?;
        Ok(state)
    }

    /// Starts a fresh episode on the same scenario.
    pub fn reset(&mut self, seed: u64) -> Result<()> {
        let scenario = &self.scenario;
        let placements = place_groups(scenario)?;
        let mut units = Vec::with_capacity(placements.len());
        for faction in [Faction::Ally, Faction::Enemy] {
            for (team_id, p) in placements.iter().filter(|p| p.faction == faction).enumerate() {
                let kind = Arc::new(scenario.unit_type(&p.unit_type).clone());
                let mut unit = Unit::new(
                    units.len(),
                    team_id,
                    faction,
                    &p.unit_type,
                    kind,
                    scenario.has_shields(faction),
                    p.position,
                );
                unit.type_id = scenario.type_id(&p.unit_type);
                unit.command = match faction {
                    Faction::Ally => Command::Stop,
                    Faction::Enemy => Command::AttackMove {
                        point: scenario.attack_point,
                    },
                };
                units.push(unit);
            }
        }
        self.n_allies = scenario.num_allied_units;
        self.crowd.remove_all();
        for u in &units {
            let disc = Disc::new(u.id, u.position, u.radius(), u.max_speed, u.unit_type.plane);
            self.crowd.add_disc(disc).expect("ids are unique");
        }
        self.units = units;
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.seed = seed;
        self.step_counter = 0;
        self.damage_ledger.clear();
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    /// Direct access for setting up situations by hand. Positions and
    /// velocities reach the collision state on the next game step; use
    /// [`GameState::kill_unit`] rather than clearing `alive`.
    pub fn units_mut(&mut self) -> &mut [Unit] {
        &mut self.units
    }

    /// Removes a unit from play as if it had been killed.
    pub fn kill_unit(&mut self, id: usize) {
        if self.units[id].alive {
            self.units[id].kill();
            let _ = self.crowd.remove_disc(id);
        }
    }

    pub fn allies(&self) -> &[Unit] {
        &self.units[..self.n_allies]
    }

    pub fn enemies(&self) -> &[Unit] {
        &self.units[self.n_allies..]
    }

    /// Game steps simulated since reset.
    pub fn step_counter(&self) -> u64 {
        self.step_counter
    }

    /// Hits dealt during the current env step.
    pub fn damage_ledger(&self) -> &[DamageRecord] {
        &self.damage_ledger
    }

    pub fn crowd(&self) -> &Crowd {
        &self.crowd
    }

    /// Collect a [`Frame`] per game step into [`StepEvents::frames`].
    pub fn set_recording(&mut self, on: bool) {
        self.recording = on;
    }

    pub fn alive_count(&self, faction: Faction) -> usize {
        self.units.iter().filter(|u| u.alive && u.faction == faction).count()
    }

    /// True once either side has no units left.
    pub fn is_over(&self) -> bool {
        self.alive_count(Faction::Ally) == 0 || self.alive_count(Faction::Enemy) == 0
    }

    /// Assigns one command per ally (dead allies ignore theirs) and runs the
    /// game steps of one env step, stopping early if a side is wiped out.
    pub fn env_step(&mut self, commands: &[Command]) -> StepEvents {
        assert_eq!(commands.len(), self.n_allies, "one command per ally");
        for (unit, command) in self.units.iter_mut().zip(commands) {
            if unit.alive {
                unit.command = *command;
            }
        }
        self.damage_ledger.clear();
        let mut events = StepEvents::default();
        for _ in 0..self.config.game_steps_per_env_step {
            if self.is_over() {
                break;
            }
            self.game_step(&mut events);
        }
        events.ledger = self.damage_ledger.clone();
        events
    }

    /// Runs a single game step.
    pub fn game_step(&mut self, events: &mut StepEvents) {
        let ledger_start = self.damage_ledger.len();
        for u in self.units.iter_mut().filter(|u| u.alive) {
            u.attackers_last_step = std::mem::take(&mut u.attackers_this_step);
            u.was_attacking = u.attacking;
            u.attacking = false;
        }
        self.phase_target_cleanup();
        self.phase_velocity_preparation();
        self.phase_velocity_adjustment();
        self.phase_execute(events);
        self.step_counter += 1;
        events.game_steps += 1;
        if self.recording {
            events.frames.push(Frame {
                step: self.step_counter,
                units: self.unit_records(),
                ledger: self.damage_ledger[ledger_start..].to_vec(),
            });
        }
    }

    pub fn phase_target_cleanup(&mut self) {
        let kept: Vec<Option<usize>> = self
            .units
            .iter()
            .map(|u| {
                if !u.alive {
                    return None;
                }
                match u.command {
                    Command::Noop | Command::Stop | Command::Move { .. } => None,
                    Command::Target { unit } => self.units[unit].alive.then_some(unit),
                    Command::AttackMove { .. } => u.target.filter(|&t| {
                        let target = &self.units[t];
                        target.alive
                            && (u.attackers_last_step.contains(&t) || u.in_attack_range(target))
                    }),
                }
            })
            .collect();
        for (u, target) in self.units.iter_mut().zip(kept) {
            u.target = target;
        }
    }

    pub fn phase_velocity_preparation(&mut self) {
        let intents: Vec<Option<Intent>> = (0..self.units.len())
            .map(|i| self.units[i].alive.then(|| self.intent(i)))
            .collect();
        for (u, intent) in self.units.iter_mut().zip(intents) {
            if let Some(intent) = intent {
                u.target = intent.target;
                u.preferred_velocity = intent.preferred;
                u.attacking = intent.attacking;
                u.max_speed = intent.max_speed;
            }
        }
    }

    pub fn phase_velocity_adjustment(&mut self) {
        for u in self.units.iter().filter(|u| u.alive) {
            let disc = self.crowd.disc_mut(u.id).expect("living units are in the crowd");
            disc.position = u.position;
            disc.velocity = u.velocity;
            disc.max_speed = u.max_speed;
            disc.prefer(u.preferred_velocity);
        }
        for (id, velocity) in self.crowd.step_velocities() {
            self.units[id].velocity = velocity;
        }
    }

    pub fn phase_execute(&mut self, events: &mut StepEvents) {
        let dt = self.config.dt;
        let step = self.step_counter;
        let mut order: Vec<usize> = self.units.iter().filter(|u| u.alive).map(|u| u.id).collect();
        order.shuffle(&mut self.rng);

        for i in order {
            let u = &mut self.units[i];
            if !u.alive {
                continue;
            }
            u.position += u.velocity * dt;
            u.cooldown = (u.cooldown - dt).max(0.0);
            let kind = u.unit_type.clone();
            u.health = (u.health + kind.hp_regen * dt).min(kind.hp);
            u.energy = (u.energy + self.config.energy_regen_rate * dt).min(kind.energy);
            let rested = u
                .last_damaged_at
                .is_none_or(|t| (step - t) as f64 * dt >= self.config.shield_regen_delay);
            if rested {
                u.shield = (u.shield + self.config.shield_regen_rate * dt).min(u.max_shield);
            }

            let engaged = match u.command {
                Command::Target { .. } | Command::AttackMove { .. } => u.target,
                _ => None,
            };
            let Some(target) = engaged else { continue };
            if !u.attacking || u.cooldown > 0.0 {
                continue;
            }
            if !self.units[target].alive {
                // Killed earlier in this pass: nothing to hit, no cooldown spent.
                continue;
            }
            let strike = execute_targeter(&mut self.units, i, target, step, dt);
            if self.units[i].alive {
                self.units[i].cooldown = kind.cooldown;
            }
            for &dead in &strike.deaths {
                // Already gone if it died earlier in this step.
                let _ = self.crowd.remove_disc(dead);
            }
            self.damage_ledger.extend_from_slice(&strike.records);
            events.deaths.extend_from_slice(&strike.deaths);
            events.healed += strike.healed;
        }
    }

    fn intent(&self, i: usize) -> Intent {
        let u = &self.units[i];
        let idle = Intent {
            target: None,
            preferred: Vec2::ZERO,
            attacking: false,
            max_speed: u.unit_type.speed,
        };
        match u.command {
            Command::Noop | Command::Stop => idle,
            Command::Move { point } => Intent {
                preferred: self.toward(u, point, u.unit_type.speed),
                ..idle
            },
            Command::Target { .. } => match u.target {
                Some(t) => self.engage(u, t, u.unit_type.speed),
                None => idle,
            },
            Command::AttackMove { point } => {
                let (target, speed) = if u.is_healer() {
                    (self.heal_target(u), self.slowest_ally_speed(u))
                } else {
                    (self.attack_target(u), u.unit_type.speed)
                };
                match target {
                    Some(t) => self.engage(u, t, speed),
                    None => Intent {
                        preferred: self.toward(u, point, speed),
                        max_speed: speed,
                        ..idle
                    },
                }
            }
        }
    }

    /// Straight-line velocity to `point`, slowing so as not to overshoot it.
    fn toward(&self, u: &Unit, point: Vec2, speed: f64) -> Vec2 {
        let offset = point - u.position;
        let distance = offset.length();
        if distance == 0.0 {
            Vec2::ZERO
        } else if distance < speed * self.config.dt {
            offset / self.config.dt
        } else {
            offset * (speed / distance)
        }
    }

    fn engage(&self, u: &Unit, t: usize, speed: f64) -> Intent {
        let target = &self.units[t];
        if u.in_attack_range(target) {
            Intent {
                target: Some(t),
                preferred: Vec2::ZERO,
                attacking: true,
                max_speed: speed,
            }
        } else {
            Intent {
                target: Some(t),
                preferred: self.toward(u, target.position, speed),
                attacking: false,
                max_speed: speed,
            }
        }
    }

    fn in_scan_range(u: &Unit, other: &Unit) -> bool {
        u.gap(other) <= u.unit_type.minimum_scan_range
    }

    /// Damage-dealer target selection; enemy healers are priority targets.
    fn attack_target(&self, u: &Unit) -> Option<usize> {
        let mut best: Option<(bool, f64, usize)> = None;
        for c in &self.units {
            if !c.alive
                || c.faction == u.faction
                || !u.unit_type.can_target(c.unit_type.plane)
                || !Self::in_scan_range(u, c)
            {
                continue;
            }
            let key = (c.is_healer(), u.gap(c), c.id);
            let better = match best {
                None => true,
                Some((priority, gap, _)) => key.0 && !priority || (key.0 == priority && key.1 < gap),
            };
            if better {
                best = Some(key);
            }
        }
        match (u.target, best) {
            (Some(t), Some((true, _, id))) if !self.units[t].is_healer() => Some(id),
            (Some(t), _) => Some(t),
            (None, found) => found.map(|(_, _, id)| id),
        }
    }

    /// Lowest-health allied non-healer that is hurt or fighting.
    fn heal_target(&self, u: &Unit) -> Option<usize> {
        let mut best: Option<(f64, f64, usize)> = None;
        for c in &self.units {
            if !c.alive
                || c.id == u.id
                || c.faction != u.faction
                || c.is_healer()
                || !(c.is_damaged() || c.was_attacking)
                || !Self::in_scan_range(u, c)
            {
                continue;
            }
            let key = (c.health, u.gap(c), c.id);
            let better = match best {
                None => true,
                Some((health, gap, _)) => key.0 < health || (key.0 == health && key.1 < gap),
            };
            if better {
                best = Some(key);
            }
        }
        best.map(|(_, _, id)| id)
    }

    fn slowest_ally_speed(&self, u: &Unit) -> f64 {
        self.units
            .iter()
            .filter(|c| c.alive && c.faction == u.faction && Self::in_scan_range(u, c))
            .map(|c| c.unit_type.speed)
            .fold(u.unit_type.speed, f64::min)
    }

    pub fn unit_records(&self) -> Vec<UnitRecord> {
        self.units
            .iter()
            .map(|u| UnitRecord {
                id: u.id,
                x: u.position.x,
                y: u.position.y,
                health: u.health,
                shield: u.shield,
                energy: u.energy,
                cooldown: u.cooldown,
                alive: u.alive,
            })
            .collect()
    }

    pub fn replay_header(&self) -> Header {
        let s = &self.scenario;
        Header {
            scenario: s.name.clone(),
            seed: self.seed,
            width: s.width,
            height: s.height,
            obstacles: s
                .obstacles
                .iter()
                .map(|r| [r.min.x, r.min.y, r.width(), r.height()])
                .collect(),
            units: self
                .units
                .iter()
                .map(|u| UnitInfo {
                    id: u.id,
                    faction: u.faction.name().to_owned(),
                    unit_type: u.type_name.clone(),
                    radius: u.radius(),
                    max_health: u.unit_type.hp,
                    max_shield: u.max_shield,
                })
                .collect(),
        }
    }
}
