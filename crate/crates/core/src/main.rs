use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use foldrun::automata::{parse_text, to_dot, to_text, Automaton};
use foldrun::guesser::{guess_dfao, guess_synchronized, DEFAULT_CHECK_LEN, DEFAULT_DEPTH};
use foldrun::logic::{run_script, Environment};
use foldrun::sequences::{
    read_bfile, table, write_bfile, write_csv, write_table_csv, SequenceName,
};
use foldrun::verify::{self, Bounds, Candidates, GUESS_BOUND, GUESS_CUTOFF, GUESS_SAMPLES};

#[derive(Parser)]
#[command(
    name = "foldrun",
    version,
    about = "Paperfolding run sequences and an lsd base-2 automata toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the first terms of a sequence
    Gen {
        name: SequenceName,
        count: usize,
        #[arg(long, value_enum, default_value_t = Format::Bfile)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the table of all sequences as CSV
    Table {
        #[arg(long, default_value_t = 1)]
        start: usize,
        #[arg(long, default_value_t = 15)]
        end: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a script; exits 0 iff every eval is TRUE
    Eval {
        script: PathBuf,
        /// Preload an automaton file as NAME=PATH (repeatable)
        #[arg(long = "with", value_name = "NAME=PATH")]
        with: Vec<String>,
        /// Do not preload the paperfolding DFAO Q
        #[arg(long)]
        no_q: bool,
    },
    /// Guess an automaton from a b-file
    Guess {
        #[command(subcommand)]
        kind: GuessCmd,
    },
    /// Run verification suites
    Verify {
        #[command(subcommand)]
        suite: VerifyCmd,
    },
    /// Write an automaton or a sequence
    Export {
        #[command(subcommand)]
        what: ExportCmd,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Bfile,
    Csv,
}

#[derive(Args)]
struct Input {
    /// b-file with consecutive indices
    #[arg(long)]
    input: PathBuf,
    /// Value used for index 0 when the b-file starts at 1
    #[arg(long, default_value_t = 0)]
    zero: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GuessCmd {
    /// DFAO from the 2-kernel
    Dfao {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long = "check-len", default_value_t = DEFAULT_CHECK_LEN)]
        check_len: usize,
        #[arg(long, default_value_t = 256)]
        bound: usize,
    },
    /// Synchronized automaton for n -> x(n)
    Sync {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = GUESS_CUTOFF)]
        cutoff: usize,
        #[arg(long, default_value_t = GUESS_BOUND)]
        bound: usize,
    },
}

#[derive(Args)]
struct PipelineArgs {
    /// Use an automaton file instead of guessing: ep=PATH, e=PATH or g=PATH
    #[arg(long = "with", value_name = "NAME=PATH")]
    with: Vec<String>,
    /// Samples used when guessing
    #[arg(long, default_value_t = GUESS_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = GUESS_CUTOFF)]
    cutoff: usize,
    #[arg(long, default_value_t = GUESS_BOUND)]
    bound: usize,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Every suite, oracle and mutation check
    All {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Bound for automaton-versus-sequence checks
        #[arg(long, default_value_t = 1_000_000)]
        limit: usize,
        /// Bound for pure sequence identities
        #[arg(long, default_value_t = 10_000_000)]
        seq_limit: usize,
        /// Also write JSON lines here
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check a run-end candidate against a DFAO
    Ends {
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        subject: PathBuf,
        /// Claimed value at n=1
        #[arg(long, default_value_t = 1)]
        first_end: u64,
        /// Skip n=0 in the boundary check
        #[arg(long)]
        guard: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExportCmd {
    /// Graphviz rendering of a pipeline automaton
    Dot {
        name: String,
        #[arg(long)]
        show_dead: bool,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Text format of a pipeline automaton
    Aut {
        name: String,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// b-file of a sequence
    Bfile {
        name: SequenceName,
        #[arg(long)]
        limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with its exit code.
enum Failure {
    /// Exit 1.
    Logical,
    /// Exit 2.
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Logical) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn output(path: &Option<PathBuf>, text: &[u8]) -> Outcome {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => io::stdout().write_all(text)?,
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_automaton(path: &Path) -> Result<Automaton, Failure> {
    parse_text(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn split_binding(spec: &str) -> Result<(&str, &str), Failure> {
    spec.split_once('=')
        .filter(|(n, p)| !n.is_empty() && !p.is_empty())
        .ok_or_else(|| Failure::Usage(format!("expected NAME=PATH, got '{spec}'")))
}

fn read_samples(input: &Input) -> Result<Vec<i64>, Failure> {
    let file = fs::File::open(&input.input)
        .map_err(|e| Failure::Usage(format!("{}: {e}", input.input.display())))?;
    let pairs = read_bfile(BufReader::new(file))?;
    let mut values = Vec::with_capacity(pairs.len() + 1);
    match pairs.first() {
        Some((0, _)) => {}
        Some((1, _)) => values.push(input.zero),
        Some((i, _)) => {
            return Err(Failure::Usage(format!(
                "b-file starts at index {i}; expected 0 or 1"
            )))
        }
        None => return Err(Failure::Usage("empty b-file".into())),
    }
    values.extend(pairs.into_iter().map(|(_, v)| v));
    Ok(values)
}

fn candidates(args: &PipelineArgs) -> Result<Candidates, Failure> {
    let mut c = Candidates::guess(args.samples, args.cutoff, args.bound)?;
    for spec in &args.with {
        let (name, path) = split_binding(spec)?;
        let Automaton::Dfa(m) = load_automaton(Path::new(path))? else {
            return Err(Failure::Usage(format!(
                "{path}: expected a relation, found a DFAO"
            )));
        };
        match name {
            "ep" => c.ep = m,
            "e" => c.e = m,
            "g" => c.g = m,
            other => {
                return Err(Failure::Usage(format!(
                    "--with accepts ep, e or g, not {other}"
                )))
            }
        }
    }
    Ok(c)
}

fn pipeline_automaton(name: &str, args: &PipelineArgs) -> Result<Automaton, Failure> {
    let p = verify::Pipeline::run(&candidates(args)?)?;
    if let Some(m) = p.env.dfao(name) {
        return Ok(Automaton::Dfao(m.clone()));
    }
    if let Some(m) = p.env.relation(name) {
        return Ok(Automaton::Dfa(m.clone()));
    }
    let mut known: Vec<&str> = p.env.dfao_names().chain(p.env.relation_names()).collect();
    known.sort();
    Err(Failure::Usage(format!(
        "unknown automaton {name}; known: {}",
        known.join(" ")
    )))
}

fn report(r: &verify::Report, json: &Option<PathBuf>) -> Outcome {
    print!("{}", r.human());
    if let Some(p) = json {
        output(&Some(p.clone()), r.json_lines().as_bytes())?;
    }
    if r.passed() {
        Ok(())
    } else {
        Err(Failure::Logical)
    }
}

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Gen {
            name,
            count,
            format,
            out,
        } => {
            if count == 0 {
                return Err(Failure::Usage("count must be at least 1".into()));
            }
            let values = name.generate(count)?;
            let mut buf = Vec::new();
            match format {
                Format::Bfile => write_bfile(&mut buf, 1, values)?,
                Format::Csv => write_csv(&mut buf, name.as_str(), 1, values)?,
            }
            output(&out, &buf)
        }
        Cmd::Table { start, end, out } => {
            let rows = table(start, end)?;
            let mut buf = Vec::new();
            write_table_csv(&mut buf, &rows)?;
            output(&out, &buf)
        }
        Cmd::Eval { script, with, no_q } => {
            let text = read(&script)?;
            let mut env = if no_q {
                Environment::new()
            } else {
                Environment::with_paperfolding()
            };
            for spec in &with {
                let (name, path) = split_binding(spec)?;
                env.insert(name, load_automaton(Path::new(path))?)?;
            }
            let r = run_script(&text, &mut env)?;
            for c in &r.commands {
                let mut line = format!("{} {}", c.keyword, c.name);
                if let Some(v) = c.result {
                    line.push_str(if v { " TRUE" } else { " FALSE" });
                }
                line.push_str(&format!(" states={}/{}", c.states.total, c.states.live));
                if let Some(w) = &c.witness {
                    let w: Vec<String> = w.iter().map(|(v, x)| format!("{v}={x}")).collect();
                    line.push_str(&format!(" {}", w.join(",")));
                }
                println!("{line}");
                if let Some(warn) = &c.warning {
                    eprintln!("warning: {warn}");
                }
            }
            if r.all_true() {
                Ok(())
            } else {
                Err(Failure::Logical)
            }
        }
        Cmd::Guess { kind } => match kind {
            GuessCmd::Dfao {
                input,
                depth,
                check_len,
                bound,
            } => {
                let samples = read_samples(&input)?;
                let m = guess_dfao(&samples, depth, check_len, bound)?;
                eprintln!("{} states", m.num_states());
                output(&input.out, to_text(&Automaton::Dfao(m)).as_bytes())
            }
            GuessCmd::Sync {
                input,
                cutoff,
                bound,
            } => {
                let samples = read_samples(&input)?;
                let values = samples
                    .into_iter()
                    .map(|v| {
                        u64::try_from(v).map_err(|_| Failure::Usage(format!("negative value {v}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let m = guess_synchronized(&values, cutoff, bound)?;
                let c = m.state_counts();
                eprintln!("{} states ({} without the dead state)", c.total, c.live);
                output(&input.out, to_text(&Automaton::Dfa(m)).as_bytes())
            }
        },
        Cmd::Verify { suite } => match suite {
            VerifyCmd::All {
                pipeline,
                limit,
                seq_limit,
                json,
            } => {
                let c = candidates(&pipeline)?;
                let r = verify::verify_all(
                    &c,
                    Bounds {
                        automata: limit,
                        sequences: seq_limit,
                    },
                )?;
                report(&r, &json)
            }
            VerifyCmd::Ends {
                candidate,
                subject,
                first_end,
                guard,
                json,
            } => {
                let Automaton::Dfa(cand) = load_automaton(&candidate)? else {
                    return Err(Failure::Usage("candidate must be a relation".into()));
                };
                let Automaton::Dfao(subj) = load_automaton(&subject)? else {
                    return Err(Failure::Usage("subject must be a DFAO".into()));
                };
                let r = verify::verify_run_ends(&cand, &subj, first_end, guard)?;
                report(&r, &json)
            }
        },
        Cmd::Export { what } => match what {
            ExportCmd::Dot {
                name,
                show_dead,
                pipeline,
                out,
            } => {
                let a = pipeline_automaton(&name, &pipeline)?;
                output(&out, to_dot(&a, &name, show_dead).as_bytes())
            }
            ExportCmd::Aut {
                name,
                pipeline,
                out,
            } => {
                let a = pipeline_automaton(&name, &pipeline)?;
                output(&out, to_text(&a).as_bytes())
            }
            ExportCmd::Bfile { name, limit, out } => {
                if limit == 0 {
                    return Err(Failure::Usage("limit must be at least 1".into()));
                }
                let mut buf = Vec::new();
                write_bfile(&mut buf, 1, name.generate(limit)?)?;
                output(&out, &buf)
            }
        },
    }
}
