use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::scenario::{Faction, UnitType};

/// The standing order a unit follows each game step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Command {
    Noop,
    Stop,
    /// Walk straight to a point and hold there.
    Move { point: Vec2 },
    /// Engage one unit, by global id. Healers target allies.
    Target { unit: usize },
    /// March to a point, engaging whatever is met on the way.
    AttackMove { point: Vec2 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Unit {
    /// Global id; allies come first.
    pub id: usize,
    /// Index within the faction.
    pub team_id: usize,
    pub faction: Faction,
    /// Unit-type reference as written in the scenario.
    pub type_name: String,
    pub unit_type: Arc<UnitType>,
    /// Observation type id, when the scenario distinguishes types.
    pub type_id: Option<usize>,
    pub position: Vec2,
    pub velocity: Vec2,
    pub preferred_velocity: Vec2,
    pub health: f64,
    pub shield: f64,
    /// Zero unless the faction has shields.
    pub max_shield: f64,
    pub energy: f64,
    /// Seconds until the next volley.
    pub cooldown: f64,
    pub command: Command,
    pub target: Option<usize>,
    /// Declared during velocity preparation, consumed during execution.
    pub attacking: bool,
    /// The declaration of the previous game step.
    pub was_attacking: bool,
    pub last_damaged_at: Option<u64>,
    pub attackers_last_step: Vec<usize>,
    pub attackers_this_step: Vec<usize>,
    pub alive: bool,
    /// Speed cap for this game step; healers may lower it.
    pub max_speed: f64,
}

impl Unit {
    pub fn new(
        id: usize,
        team_id: usize,
        faction: Faction,
        type_name: &str,
        unit_type: Arc<UnitType>,
        has_shields: bool,
        position: Vec2,
    ) -> Unit {
        let max_shield = if has_shields { unit_type.shield } else { 0.0 };
        Unit {
            id,
            team_id,
            faction,
            type_name: type_name.to_owned(),
            type_id: None,
            position,
            velocity: Vec2::ZERO,
            preferred_velocity: Vec2::ZERO,
            health: unit_type.hp,
            shield: max_shield,
            max_shield,
            energy: unit_type.initial_energy,
            cooldown: 0.0,
            command: Command::Stop,
            target: None,
            attacking: false,
            was_attacking: false,
            last_damaged_at: None,
            attackers_last_step: Vec::new(),
            attackers_this_step: Vec::new(),
            alive: true,
            max_speed: unit_type.speed,
            unit_type,
        }
    }

    pub fn radius(&self) -> f64 {
        self.unit_type.radius()
    }

    pub fn is_healer(&self) -> bool {
        self.unit_type.is_healer()
    }

    /// Boundary-to-boundary distance.
    pub fn gap(&self, other: &Unit) -> f64 {
        self.position.distance(other.position) - self.radius() - other.radius()
    }

    pub fn in_attack_range(&self, other: &Unit) -> bool {
        self.gap(other) <= self.unit_type.attack_range.value()
    }

    pub fn is_damaged(&self) -> bool {
        self.health < self.unit_type.hp
    }

    pub(crate) fn kill(&mut self) {
        self.alive = false;
        self.health = 0.0;
        self.shield = 0.0;
        self.velocity = Vec2::ZERO;
        self.preferred_velocity = Vec2::ZERO;
        self.command = Command::Noop;
        self.target = None;
        self.attacking = false;
    }
}
