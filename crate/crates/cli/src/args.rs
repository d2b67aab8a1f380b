use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsync::Word;

#[derive(Debug, Parser)]
#[command(name = "qsync", version, about = "Synchronizing words for qutrit channels A and B_n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the Kraus factors of A and B_n.
    Channels {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Test whether a word synchronizes.
    SyncCheck {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Letters over {A, B}, applied left to right.
        #[arg(long, value_parser = parse_word)]
        word: Word,
        #[arg(long, default_value_t = 1e-9, value_parser = parse_tol)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Find the shortest synchronizing word up to a length.
    Search {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=24))]
        max_len: u64,
        #[arg(long, default_value_t = 1e-9, value_parser = parse_tol)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Smallest n for which no word of length at most l synchronizes.
    Bound {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        l: u64,
        /// Must satisfy 0 < epsilon < 1/2.
        #[arg(long, value_parser = parse_epsilon)]
        epsilon: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Enumerate all words up to length l and check the distance floor.
    Certify {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, value_parser = clap::value_parser!(u64).range(0..=20))]
        l: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Breadth-first exploration of states reachable from |e1><e1|.
    Explore {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, value_parser = clap::value_parser!(u64).range(0..=20))]
        depth: u64,
        #[arg(long, default_value_t = 1e-9, value_parser = parse_grid)]
        grid: f64,
        /// Omit self-loops from DOT output.
        #[arg(long)]
        no_self_loops: bool,
        /// Label near-rational DOT nodes with the smallest integer multiple.
        #[arg(long)]
        integer_labels: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run all randomized inequality checks.
    Verify {
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Word for the decomposition check (default A B^n A).
        #[arg(long, value_parser = parse_nonempty_word)]
        word: Option<Word>,
        #[arg(long, default_value_t = 32)]
        s_max: usize,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 20250101)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to a file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Suppress the summary line on standard error.
    #[arg(long)]
    pub quiet: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Channels { .. } => "channels",
            Command::SyncCheck { .. } => "sync-check",
            Command::Search { .. } => "search",
            Command::Bound { .. } => "bound",
            Command::Certify { .. } => "certify",
            Command::Explore { .. } => "explore",
            Command::Verify { .. } => "verify",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Channels { out, .. }
            | Command::SyncCheck { out, .. }
            | Command::Search { out, .. }
            | Command::Bound { out, .. }
            | Command::Certify { out, .. }
            | Command::Explore { out, .. }
            | Command::Verify { out, .. } => out,
        }
    }
}

fn parse_word(s: &str) -> Result<Word, String> {
    s.parse().map_err(|e: qsync::Error| e.to_string())
}

fn parse_nonempty_word(s: &str) -> Result<Word, String> {
    let w = parse_word(s)?;
    if w.is_empty() {
        return Err("word must be nonempty".into());
    }
    Ok(w)
}

fn parse_in(s: &str, ok: impl Fn(f64) -> bool, range: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if ok(x) {
        Ok(x)
    } else {
        Err(format!("must lie in {range}"))
    }
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    parse_in(s, |x| x > 0.0 && x < 0.5, "(0, 0.5)")
}

fn parse_tol(s: &str) -> Result<f64, String> {
    parse_in(s, |x| x > 0.0 && x <= 0.1, "(0, 0.1]")
}

fn parse_grid(s: &str) -> Result<f64, String> {
    parse_in(s, |x| (1e-12..=1e-6).contains(&x), "[1e-12, 1e-6]")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("qsync").chain(args.iter().copied()))
    }

    #[test]
    fn parses_examples() {
        match parse(&["sync-check", "--n", "1", "--word", "ABA"]).unwrap().command {
            Command::SyncCheck { n, word, tol, .. } => {
                assert_eq!(n, 1);
                assert_eq!(word.to_string(), "ABA");
                assert_eq!(tol, 1e-9);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse(&["bound", "--l", "4", "--epsilon", "0.4"]).unwrap().command,
            Command::Bound { l: 4, .. }
        ));
        let word = match parse(&["sync-check", "--n", "2", "--word", "abba"]).unwrap().command {
            Command::SyncCheck { word, .. } => word,
            _ => unreachable!(),
        };
        assert_eq!(word.to_string(), "ABBA");
    }

    #[test]
    fn rejects_bad_input() {
        let err = parse(&["bound", "--l", "4", "--epsilon", "0.6"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--epsilon"));

        for args in [
            &["search", "--n", "1", "--max-len", "25"][..],
            &["sync-check", "--n", "0", "--word", "A"],
            &["sync-check", "--n", "1", "--word", "AXB"],
            &["explore", "--n", "2", "--depth", "21"],
            &["verify", "--bogus"],
            &["channels"],
        ] {
            assert_eq!(parse(args).unwrap_err().exit_code(), 2, "{args:?}");
        }
    }
}
