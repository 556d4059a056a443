use crate::scenario::{Faction, Scenario};

/// Number of actions before the per-unit target actions.
pub const FIXED_ACTIONS: usize = 6;
pub const NOOP: usize = 0;
pub const STOP: usize = 1;
pub const MOVE_NORTH: usize = 2;
pub const MOVE_EAST: usize = 3;
pub const MOVE_SOUTH: usize = 4;
pub const MOVE_WEST: usize = 5;

/// Vector sizes derived from a scenario. They never change during an episode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n_allies: usize,
    pub n_enemies: usize,
    pub n_actions: usize,
    pub num_unit_types: usize,
    pub ally_shields: bool,
    pub enemy_shields: bool,
}

impl Layout {
    pub fn new(scenario: &Scenario) -> Layout {
        let n_enemies = scenario.num_units(Faction::Enemy);
        Layout {
            n_allies: scenario.num_units(Faction::Ally),
            n_enemies,
            n_actions: FIXED_ACTIONS + n_enemies,
            num_unit_types: scenario.num_unit_types,
            ally_shields: scenario.ally_has_shields,
            enemy_shields: scenario.enemy_has_shields,
        }
    }

    /// Movement bits at the start of each observation.
    pub fn move_feats(&self) -> usize {
        4
    }

    /// Attackable, distance, relative x and y, health, shield?, type one-hot.
    pub fn obs_enemy_feats(&self) -> usize {
        5 + self.enemy_shields as usize + self.num_unit_types
    }

    /// Visible, distance, relative x and y, health, shield?, type one-hot.
    pub fn obs_ally_feats(&self) -> usize {
        5 + self.ally_shields as usize + self.num_unit_types
    }

    /// Health, shield?, type one-hot.
    pub fn obs_own_feats(&self) -> usize {
        1 + self.ally_shields as usize + self.num_unit_types
    }

    pub fn obs_size(&self) -> usize {
        self.move_feats()
            + self.n_enemies * self.obs_enemy_feats()
            + (self.n_allies - 1) * self.obs_ally_feats()
            + self.obs_own_feats()
    }

    /// Health, cooldown, x, y, shield?, type one-hot.
    pub fn state_ally_feats(&self) -> usize {
        4 + self.ally_shields as usize + self.num_unit_types
    }

    /// Health, x, y, shield?, type one-hot.
    pub fn state_enemy_feats(&self) -> usize {
        3 + self.enemy_shields as usize + self.num_unit_types
    }

    pub fn state_size(&self) -> usize {
        self.n_allies * self.state_ally_feats()
            + self.n_enemies * self.state_enemy_feats()
            + self.n_allies * self.n_actions
    }

    pub fn obs_enemy_offset(&self, enemy: usize) -> usize {
        self.move_feats() + enemy * self.obs_enemy_feats()
    }

    /// Offset of the `slot`-th other ally (allies in team order, self skipped).
    pub fn obs_ally_offset(&self, slot: usize) -> usize {
        self.obs_enemy_offset(self.n_enemies) + slot * self.obs_ally_feats()
    }

    pub fn obs_own_offset(&self) -> usize {
        self.obs_ally_offset(self.n_allies - 1)
    }

    pub fn state_ally_offset(&self, ally: usize) -> usize {
        ally * self.state_ally_feats()
    }

    pub fn state_enemy_offset(&self, enemy: usize) -> usize {
        self.n_allies * self.state_ally_feats() + enemy * self.state_enemy_feats()
    }

    pub fn state_action_offset(&self, ally: usize) -> usize {
        self.state_enemy_offset(self.n_enemies) + ally * self.n_actions
    }
}
