//! The `dialogue-revise` command: parse, enumerate, score, arbitrate, emit.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, ValueEnum};
use thiserror::Error;

use crate::arbitration::{self, Arbitration, ArbitrationPlan};
use crate::plan::{ConstraintSetting, Polarity};
use crate::realizer::{self, Lexicon, LexiconError, RealizeError};
use crate::rrl::{self, RrlError};
use crate::search::{self, SearchError, DEFAULT_MEMBER_CEILING};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CEILING: i32 = 3;
pub const EXIT_LEXICON: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolarityArg {
    Max,
    Min,
}

impl From<PolarityArg> for Polarity {
    fn from(p: PolarityArg) -> Self {
        match p {
            PolarityArg::Max => Polarity::Max,
            PolarityArg::Min => Polarity::Min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlanArg {
    Nash,
    Sum,
    Pareto,
    SeqInsertFirst,
    SeqAggrFirst,
}

impl From<PlanArg> for ArbitrationPlan {
    fn from(p: PlanArg) -> Self {
        match p {
            PlanArg::Nash => ArbitrationPlan::Nash,
            PlanArg::Sum => ArbitrationPlan::Sum,
            PlanArg::Pareto => ArbitrationPlan::ParetoAll,
            PlanArg::SeqInsertFirst => ArbitrationPlan::SequentialInsertFirst,
            PlanArg::SeqAggrFirst => ArbitrationPlan::SequentialAggrFirst,
        }
    }
}

/// Revise a dialogue plan under TURN/EMPH constraints and pick the best
/// reachable plan.
#[derive(Debug, Parser)]
#[command(name = "dialogue-revise", version)]
pub struct Cli {
    /// Input plan in RRL-subset format (.rrl.xml).
    pub input: PathBuf,
    /// Polarity of the TURN constraint.
    #[arg(long, value_enum, default_value = "max")]
    pub turn: PolarityArg,
    /// Polarity of the EMPH constraint.
    #[arg(long, value_enum, default_value = "max")]
    pub emph: PolarityArg,
    /// Arbitration plan.
    #[arg(long, value_enum, default_value = "nash")]
    pub plan: PlanArg,
    /// Where to write the winning plan (a directory for `--plan pareto`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the score report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Where to write the transcript; requires --lexicon.
    #[arg(long, requires = "lexicon")]
    pub transcript: Option<PathBuf>,
    /// Lexicon for realization. Without --transcript the transcript goes
    /// to stdout.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Abort enumeration beyond this many plans.
    #[arg(long, default_value_t = DEFAULT_MEMBER_CEILING as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub ceiling: u64,
    /// Dump the plan-space edge graph to stderr.
    #[arg(long)]
    pub dump_space: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_path: PathBuf,
    pub setting: ConstraintSetting,
    pub plan: ArbitrationPlan,
    pub output_plan_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub transcript_path: Option<PathBuf>,
    pub lexicon_path: Option<PathBuf>,
    pub member_ceiling: usize,
    pub dump_space: bool,
}

impl RunConfig {
    pub fn new(input_path: impl Into<PathBuf>, setting: ConstraintSetting) -> Self {
        Self {
            input_path: input_path.into(),
            setting,
            plan: ArbitrationPlan::Nash,
            output_plan_path: None,
            report_path: None,
            transcript_path: None,
            lexicon_path: None,
            member_ceiling: DEFAULT_MEMBER_CEILING,
            dump_space: false,
        }
    }
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        Self {
            input_path: cli.input,
            setting: ConstraintSetting::new(cli.turn.into(), cli.emph.into()),
            plan: cli.plan.into(),
            output_plan_path: cli.out,
            report_path: cli.report,
            transcript_path: cli.transcript,
            lexicon_path: cli.lexicon,
            member_ceiling: usize::try_from(cli.ceiling).unwrap_or(usize::MAX),
            dump_space: cli.dump_space,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: RrlError },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("{path}: {source}")]
    ReadLexicon { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Lexicon { path: PathBuf, source: LexiconError },
    #[error(transparent)]
    Realize(#[from] RealizeError),
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("cannot serialize winner: {0}")]
    Serialize(RrlError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } => EXIT_PARSE,
            CliError::Search(SearchError::CeilingExceeded { .. }) => EXIT_CEILING,
            CliError::ReadLexicon { .. } | CliError::Lexicon { .. } | CliError::Realize(_) => {
                EXIT_LEXICON
            }
            CliError::Search(_) | CliError::Write { .. } | CliError::Serialize(_) => EXIT_IO,
        }
    }
}

/// What a run produced, for the caller to print.
#[derive(Debug)]
pub struct Summary {
    pub arbitration: Arbitration,
    pub members: usize,
    /// Transcript text when a lexicon was given but no transcript path.
    pub transcript: Option<String>,
}

impl Summary {
    /// Winner key and scores, one line per reported winner.
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        let a = &self.arbitration;
        writeln!(
            w,
            "members {}\tsetting turn={} emph={}\tplan {}",
            self.members, a.scored.setting.turn, a.scored.setting.emph, a.plan
        )?;
        let indices: Vec<usize> = match a.plan {
            ArbitrationPlan::ParetoAll => a.selection.winners.clone(),
            _ => vec![a.selection.first],
        };
        for i in indices {
            let s = &a.scored.scores[i];
            writeln!(
                w,
                "winner {}\traw_turns={}\traw_emph={}\ts_t={:.4}\ts_e={:.4}",
                a.scored.keys[i], s.raw_turns, s.raw_emph, s.s_t, s.s_e
            )?;
        }
        if let Some(t) = &self.transcript {
            w.write_all(t.as_bytes())?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_owned(),
        source,
    })
}

pub fn run(config: &RunConfig) -> Result<Summary, CliError> {
    let input = fs::read(&config.input_path).map_err(|source| CliError::Read {
        path: config.input_path.clone(),
        source,
    })?;
    let start = rrl::parse(&input).map_err(|source| CliError::Parse {
        path: config.input_path.clone(),
        source,
    })?;

    // Load the lexicon up front so a bad lexicon fails before the search.
    let lexicon = match &config.lexicon_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::ReadLexicon {
                path: path.clone(),
                source,
            })?;
            Some(Lexicon::parse(&text).map_err(|source| CliError::Lexicon {
                path: path.clone(),
                source,
            })?)
        }
        None => None,
    };

    let space = search::enumerate_closure(&start, config.member_ceiling)?;
    if config.dump_space {
        space
            .write_edges(io::stderr().lock())
            .map_err(|source| CliError::Write {
                path: PathBuf::from("<stderr>"),
                source,
            })?;
    }
    let arbitration = arbitration::arbitrate(&space, config.setting, config.plan);

    let winner = &space.members[arbitration.first_key()];
    if let Some(out) = &config.output_plan_path {
        if config.plan == ArbitrationPlan::ParetoAll {
            fs::create_dir_all(out).map_err(|source| CliError::Write {
                path: out.clone(),
                source,
            })?;
            for (n, key) in arbitration.winner_keys().enumerate() {
                let bytes = rrl::serialize(&space.members[key]).map_err(CliError::Serialize)?;
                write_file(&out.join(format!("front_{n}.rrl.xml")), &bytes)?;
            }
        } else {
            let bytes = rrl::serialize(winner).map_err(CliError::Serialize)?;
            write_file(out, &bytes)?;
        }
    }
    if let Some(path) = &config.report_path {
        let mut report = Vec::new();
        arbitration
            .write_report(&mut report)
            .expect("writing to memory cannot fail");
        write_file(path, &report)?;
    }

    let mut transcript = None;
    if let Some(lexicon) = &lexicon {
        let text = realizer::realize(winner, lexicon)?.to_string();
        match &config.transcript_path {
            Some(path) => write_file(path, text.as_bytes())?,
            None => transcript = Some(text),
        }
    }

    Ok(Summary {
        members: space.len(),
        arbitration,
        transcript,
    })
}

/// Parse `args`, run, print, and return the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            eprint!("{rendered}");
            if !rendered.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return EXIT_USAGE;
        }
    };
    match run(&cli.into()) {
        Ok(summary) => match summary.write_to(io::stdout().lock()) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_IO
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
