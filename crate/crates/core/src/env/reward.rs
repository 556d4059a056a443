use crate::engine::Unit;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardConfig {
    pub kill_bonus: f64,
    pub win_bonus: f64,
    /// Total return of a clean sweep.
    pub scale: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            kill_bonus: 10.0,
            win_bonus: 200.0,
            scale: 20.0,
        }
    }
}

impl RewardConfig {
    /// Everything a perfect episode can earn: all enemy health and shields,
    /// a kill bonus per enemy and the win bonus.
    pub fn denominator(&self, enemies: &[Unit]) -> f64 {
        let pools: f64 = enemies.iter().map(|e| e.unit_type.hp + e.max_shield).sum();
        pools + self.kill_bonus * enemies.len() as f64 + self.win_bonus
    }
}

/// Reward for one env step.
///
/// `dealt` is the health and shield the enemies lost to attacks; healing they
/// receive is ignored, so the reward is never negative.
pub fn compute_reward(dealt: f64, kills: usize, won: bool, denominator: f64, config: &RewardConfig) -> f64 {
    let earned = dealt + config.kill_bonus * kills as f64 + if won { config.win_bonus } else { 0.0 };
    earned / denominator * config.scale
}
