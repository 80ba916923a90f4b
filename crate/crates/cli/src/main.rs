mod commands;
mod input;
mod output;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use output::{CommandResult, Output, Status};
use serde_json::json;
use treeshift_core::Signature;

#[derive(Parser, Debug)]
#[command(
    name = "treeshift",
    version,
    about = "Shift spaces over free groups and free monoids"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Signature for inputs that do not carry one, e.g. group:2 or monoid:3.
    #[arg(long, global = true, default_value = "group:2")]
    pub sig: Signature,
    /// Print one JSON document (the default).
    #[arg(long, global = true, conflicts_with = "human")]
    pub json: bool,
    /// Print `key: value` lines instead of JSON.
    #[arg(long, global = true)]
    pub human: bool,
    /// Seed for randomized fixtures.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest ball, in words, any command may build.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Ascii,
    Dot,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleChoice {
    Sft,
    SftAsymptotic,
    None,
}

#[derive(Subcommand, Debug)]
pub enum WordOp {
    /// Free reduction of a letter sequence.
    Reduce {
        letters: String,
    },
    Concat {
        u: String,
        v: String,
    },
    Invert {
        u: String,
    },
    IsPrefix {
        u: String,
        v: String,
    },
    /// First `k` letters of an eventually periodic word written `head(cycle)`.
    Prefix {
        word: String,
        k: usize,
    },
}

/// Points, resolution and comparison depth shared by the deciders.
#[derive(Args, Debug)]
pub struct PointArgs {
    /// Point set: a path, inline JSON or example:NAME[:VARIANT].
    #[arg(long)]
    pub points: String,
    /// Resolution written 2^-k.
    #[arg(long)]
    pub epsilon: String,
    /// Comparison depth D, at least k + 1.
    #[arg(long)]
    pub depth: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Word arithmetic.
    Words {
        #[command(subcommand)]
        op: WordOp,
    },
    /// The ball of words of length below n.
    Ball {
        #[arg(long)]
        n: usize,
        /// Print only the number of words.
        #[arg(long)]
        count: bool,
    },
    /// The central block of a configuration.
    Block {
        #[arg(long)]
        config: String,
        #[arg(long)]
        depth: usize,
    },
    /// Admissibility of a block or configuration, or a search for a non-SFT
    /// obstruction in the hollow-ball family.
    CheckSft {
        #[arg(long, required_unless_present = "hollow")]
        system: Option<String>,
        #[arg(long, conflicts_with = "block")]
        config: Option<String>,
        #[arg(long)]
        block: Option<String>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Look for a hollow-ball block above depth N none of whose
        /// sub-blocks is forbidden.
        #[arg(long)]
        hollow: Option<usize>,
    },
    /// Admissible blocks of a system.
    Enumerate {
        #[arg(long)]
        system: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        count: bool,
    },
    /// Step defects of a pseudo-orbit.
    ValidateOrbit {
        #[arg(long)]
        orbit: String,
        #[arg(long)]
        delta: String,
        #[arg(long)]
        depth: usize,
    },
    /// A point of an SFT shadowing a pseudo-orbit within 2^-k.
    Shadow {
        #[arg(long)]
        orbit: String,
        #[arg(long)]
        system: String,
        #[arg(long)]
        resolution: String,
    },
    /// The readout of an asymptotic pseudo-orbit and its shell guarantees.
    ShadowAsymptotic {
        #[arg(long)]
        orbit: String,
        #[arg(long)]
        system: String,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
    /// The labeled graph of steps within the resolution.
    Edges {
        #[command(flatten)]
        args: PointArgs,
        #[arg(long)]
        dot: bool,
    },
    /// Chain transitivity by reduced words.
    Ict {
        #[command(flatten)]
        args: PointArgs,
    },
    /// Constrained chain transitivity: fixed first and last letters per point.
    Cict {
        #[command(flatten)]
        args: PointArgs,
    },
    /// Tree transitivity: a pseudo-orbit visiting every point.
    Ibt {
        #[command(flatten)]
        args: PointArgs,
        #[arg(long, default_value_t = 4)]
        radius: usize,
    },
    /// Tree transitivity with an i,j-final witness.
    IbtStar {
        #[command(flatten)]
        args: PointArgs,
        #[arg(long, default_value_t = 4)]
        radius: usize,
    },
    /// Tree transitivity with the root point revisited.
    IbtCirc {
        #[command(flatten)]
        args: PointArgs,
        #[arg(long, default_value_t = 4)]
        radius: usize,
    },
    /// A limit-set approximation, optionally with a stabilization scan and an
    /// invariance check.
    Limit {
        #[arg(long, value_parser = ["omega", "omega-w", "omega-fw"])]
        kind: String,
        #[arg(long)]
        config: String,
        /// A finite word, or `head(cycle)` for an eventually periodic one.
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        inner: usize,
        #[arg(long)]
        outer: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        scan: bool,
        /// Check invariance on Σ^D; needs depth at least D + 1.
        #[arg(long)]
        invariance: Option<usize>,
    },
    /// Hausdorff distance between two point sets.
    Hausdorff {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        depth: usize,
    },
    /// A point whose limit set along a constructed word approximates a set.
    Realize {
        #[arg(long, value_parser = ["cict", "ibt-star", "ibt-circ", "shadowed"])]
        mode: String,
        #[arg(long)]
        points: String,
        /// Required unless an oracle supplies the system.
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        resolution: String,
        /// Construction used in shadowed mode.
        #[arg(long, value_parser = ["cict", "ibt-star", "ibt-circ"], default_value = "cict")]
        construction: String,
        #[arg(long, value_enum, default_value = "sft")]
        oracle: OracleChoice,
        /// Stage resolution exponent for shadowed mode, at least the modulus.
        #[arg(long)]
        chain_scale: Option<u32>,
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Named fixtures: list, print or verify them.
    Example {
        /// One of the gallery names, `random-monoid` or `list`.
        name: String,
        #[arg(long, value_parser = ["literal", "corrected"])]
        direction: Option<String>,
        #[arg(long)]
        verify: bool,
    },
    /// Renders a central block or an edge graph.
    Render {
        #[arg(long, conflicts_with = "points")]
        config: Option<String>,
        #[arg(long, required_unless_present = "config")]
        points: Option<String>,
        #[arg(long)]
        depth: usize,
        /// Edge-graph resolution written 2^-k.
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long, value_enum, default_value = "ascii")]
        format: Format,
    },
}

/// Writes to stdout, ignoring a reader that has gone away.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(cap) = cli.global.cap {
        treeshift_core::words::set_ball_cap(cap);
    }
    match commands::run(&cli) {
        Ok(Output::Text(text)) => {
            emit(&text);
            ExitCode::SUCCESS
        }
        Ok(Output::Result(r)) => {
            if cli.global.human {
                emit(&r.to_human());
            } else {
                emit(&format!("{}\n", r.to_json()));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let r = CommandResult {
                status: Status::Error,
                payload: json!({ "error": format!("{e:#}") }),
                log: Vec::new(),
            };
            if !cli.global.human {
                emit(&format!("{}\n", r.to_json()));
            }
            ExitCode::FAILURE
        }
    }
}
