use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};
use skirmish::bench::{dump_replay, run_random_parallel, BenchError, BenchReport};
use skirmish::render::render_replay_file;
use skirmish::scenario::Scenario;

#[derive(Parser)]
#[command(name = "skirmish", version, about = "Benchmark, replay and render skirmish scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Time random-policy episodes.
    Bench {
        /// Shipped scenario name or path to a scenario file.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 20)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Independent environments on separate threads.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Write the replay of one random episode.
    Replay {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render replay frames to SVG.
    Render {
        #[arg(long)]
        replay: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        every_n: u64,
    },
}

fn usage_error(message: &str) -> ExitCode {
    let _ = Cli::command().error(ErrorKind::ValueValidation, message).print();
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Bench { episodes: 0, .. } => usage_error("--episodes must be at least 1"),
        Cmd::Bench { parallel: 0, .. } => usage_error("--parallel must be at least 1"),
        Cmd::Render { every_n: 0, .. } => usage_error("--every-n must be at least 1"),
        command => match run(command) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}

fn run(command: Cmd) -> Result<(), Box<dyn std::error::Error>> {
    match command {
        Cmd::Bench {
            scenario,
            episodes,
            seed,
            json,
            parallel,
        } => {
            let scenario = Scenario::load(&scenario)?;
            let report = run_random_parallel(&scenario, episodes, seed, parallel)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print_table(&report);
            }
        }
        Cmd::Replay { scenario, seed, out } => {
            let scenario = Scenario::load(&scenario)?;
            let mut file = BufWriter::new(File::create(&out)?);
            let summary = dump_replay(&scenario, seed, &mut file).map_err(|e| match e {
                BenchError::Io(io) => format!("{}: {io}", out.display()).into(),
                other => Box::<dyn std::error::Error>::from(other),
            })?;
            file.flush()?;
            eprintln!(
                "wrote {} ({} env steps, {} game steps, return {:.3}, {})",
                out.display(),
                summary.env_steps,
                summary.game_steps,
                summary.episode_return,
                if summary.won { "won" } else { "not won" }
            );
        }
        Cmd::Render { replay, out, every_n } => {
            let files = render_replay_file(&replay, &out, every_n)?;
            eprintln!("wrote {} frames to {}", files.len(), out.display());
        }
    }
    Ok(())
}

fn print_table(r: &BenchReport) {
    let ms = |s: f64| s * 1e3;
    println!("scenario        {}", r.scenario);
    println!("episodes        {}", r.episodes);
    println!("seed            {}", r.seed);
    println!("env steps       {}", r.total_steps);
    println!("mean ms/step    {:.4}", ms(r.mean_step_secs));
    println!("median ms/step  {:.4}", ms(r.median_step_secs));
    println!("p95 ms/step     {:.4}", ms(r.p95_step_secs));
    match r.peak_rss_bytes {
        Some(b) => println!("peak RSS        {:.1} MB", b as f64 / 1e6),
        None => println!("peak RSS        n/a"),
    }
    println!("mean return     {:.4}", r.mean_return);
    println!("win rate        {:.3}", r.win_rate);
}
