//! Random-policy rollouts: timing, memory and return statistics, plus
//! replay dumps of single episodes.
//!
//! Episode `e` of a run seeded with `s` resets the environment with
//! `s + e` and samples actions from its own ChaCha8 stream, so results do
//! not depend on how episodes are spread over threads.

use std::io::{self, Write};
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{write_record, Record};
use crate::env::{Env, EnvError};
use crate::scenario::Scenario;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("episodes must be at least 1")]
    NoEpisodes,
    #[error("threads must be at least 1")]
    NoThreads,
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Uniform sampling among the available actions of each agent.
#[derive(Clone, Debug)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> RandomPolicy {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Keep policy draws apart from the engine's shuffle stream.
        rng.set_stream(1);
        RandomPolicy { rng }
    }

    pub fn choose(&mut self, mask: &[bool]) -> usize {
        let legal: Vec<usize> = (0..mask.len()).filter(|&a| mask[a]).collect();
        *legal.choose(&mut self.rng).expect("every agent has an available action")
    }

    pub fn actions(&mut self, masks: &[Vec<bool>]) -> Vec<usize> {
        masks.iter().map(|m| self.choose(m)).collect()
    }
}

/// Outcome of one random episode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Episode {
    pub seed: u64,
    pub steps: u32,
    pub episode_return: f64,
    pub won: bool,
    /// Wall time of each env step, in seconds. Skipped when serializing.
    #[serde(skip)]
    pub step_secs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub scenario: String,
    pub episodes: usize,
    pub seed: u64,
    pub total_steps: u64,
    pub mean_step_secs: f64,
    pub median_step_secs: f64,
    pub p95_step_secs: f64,
    /// Process-wide resident high-water mark; `None` where the platform
    /// does not expose it.
    pub peak_rss_bytes: Option<u64>,
    pub mean_return: f64,
    pub win_rate: f64,
    pub returns: Vec<f64>,
    pub wins: Vec<bool>,
}

/// Plays one episode. The timed span covers `step` plus fetching the
/// observations, state and masks the next decision needs; sampling the
/// random actions is outside it.
pub fn run_episode(env: &mut Env, seed: u64) -> Result<Episode, EnvError> {
    env.reset(seed)?;
    let mut policy = RandomPolicy::new(seed);
    let mut masks = env.get_avail_actions();
    let mut episode = Episode {
        seed,
        steps: 0,
        episode_return: 0.0,
        won: false,
        step_secs: Vec::new(),
    };
    loop {
        let actions = policy.actions(&masks);
        let start = Instant::now();
        let t = env.step(&actions)?;
        let obs = env.get_obs();
        let state = env.get_state();
        masks = env.get_avail_actions();
        episode.step_secs.push(start.elapsed().as_secs_f64());
        std::hint::black_box((obs, state));

        episode.steps += 1;
        episode.episode_return += t.reward;
        if t.terminated {
            episode.won = t.info.battle_won;
            return Ok(episode);
        }
    }
}

pub fn run_random(scenario: &Scenario, episodes: usize, seed: u64) -> Result<BenchReport, BenchError> {
    run_random_parallel(scenario, episodes, seed, 1)
}

/// Like [`run_random`], with episodes split round-robin over `threads`
/// independent environments.
pub fn run_random_parallel(
    scenario: &Scenario,
    episodes: usize,
    seed: u64,
    threads: usize,
) -> Result<BenchReport, BenchError> {
    if episodes == 0 {
        return Err(BenchError::NoEpisodes);
    }
    if threads == 0 {
        return Err(BenchError::NoThreads);
    }
    let threads = threads.min(episodes);
    let run_share = |t: usize| -> Result<Vec<Episode>, EnvError> {
        let mut env = Env::new(scenario.clone(), seed)?;
        (t..episodes)
            .step_by(threads)
            .map(|e| run_episode(&mut env, seed.wrapping_add(e as u64)))
            .collect()
    };
    let mut results: Vec<Episode> = if threads == 1 {
        run_share(0)?
    } else {
        let shares = std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads).map(|t| s.spawn(move || run_share(t))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("bench thread panicked"))
                .collect::<Vec<_>>()
        });
        let mut all = Vec::with_capacity(episodes);
        for share in shares {
            all.extend(share?);
        }
        all
    };
    results.sort_by_key(|e| e.seed.wrapping_sub(seed));
    Ok(summarize(&scenario.name, seed, &results))
}

fn summarize(name: &str, seed: u64, episodes: &[Episode]) -> BenchReport {
    let mut secs: Vec<f64> = episodes.iter().flat_map(|e| e.step_secs.iter().copied()).collect();
    secs.sort_by(f64::total_cmp);
    let n = episodes.len() as f64;
    BenchReport {
        scenario: name.to_owned(),
        episodes: episodes.len(),
        seed,
        total_steps: secs.len() as u64,
        mean_step_secs: secs.iter().sum::<f64>() / secs.len() as f64,
        median_step_secs: percentile(&secs, 0.5),
        p95_step_secs: percentile(&secs, 0.95),
        peak_rss_bytes: peak_rss_bytes(),
        mean_return: episodes.iter().map(|e| e.episode_return).sum::<f64>() / n,
        win_rate: episodes.iter().filter(|e| e.won).count() as f64 / n,
        returns: episodes.iter().map(|e| e.episode_return).collect(),
        wins: episodes.iter().map(|e| e.won).collect(),
    }
}

/// Nearest-rank percentile of sorted data.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Peak resident set size of this process (`VmHWM`), Linux only.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// What a replay dump produced.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplaySummary {
    pub env_steps: u32,
    pub game_steps: u64,
    pub episode_return: f64,
    pub won: bool,
}

/// Plays one random episode with `seed` and writes its replay: the header,
/// then per env step an `actions` record followed by the game-step frames.
pub fn dump_replay(scenario: &Scenario, seed: u64, out: &mut impl Write) -> Result<ReplaySummary, BenchError> {
    let mut env = Env::new(scenario.clone(), seed)?;
    env.set_recording(true);
    let mut policy = RandomPolicy::new(seed);
    write_record(out, &Record::Header(env.game_state().replay_header()))?;
    let mut summary = ReplaySummary {
        env_steps: 0,
        game_steps: 0,
        episode_return: 0.0,
        won: false,
    };
    loop {
        let actions = policy.actions(&env.get_avail_actions());
        let t = env.step(&actions)?;
        write_record(
            out,
            &Record::Actions {
                env_step: summary.env_steps as u64,
                actions,
            },
        )?;
        for frame in t.info.events.frames {
            write_record(out, &Record::Step(frame))?;
        }
        summary.env_steps += 1;
        summary.episode_return += t.reward;
        if t.terminated {
            summary.game_steps = env.game_state().step_counter();
            summary.won = t.info.battle_won;
            out.flush()?;
            return Ok(summary);
        }
    }
}

/// Re-simulates a replay from its header seed and recorded actions and
/// returns the records that run produces.
pub fn resimulate(scenario: &Scenario, records: &[Record]) -> Result<Vec<Record>, EnvError> {
    let Some(Record::Header(header)) = records.first() else {
        return Ok(Vec::new());
    };
    let mut env = Env::new(scenario.clone(), header.seed)?;
    env.set_recording(true);
    let mut out = vec![Record::Header(env.game_state().replay_header())];
    for record in records {
        if let Record::Actions { env_step, actions } = record {
            let t = env.step(actions)?;
            out.push(Record::Actions {
                env_step: *env_step,
                actions: actions.clone(),
            });
            out.extend(t.info.events.frames.into_iter().map(Record::Step));
        }
    }
    Ok(out)
}
