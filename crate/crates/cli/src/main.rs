use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use apsys::grid::{canonicalize, parse_grid, render_ascii, Symbol};
use apsys::lang::{accepts, collect_outputs, enumerate_label_language, Acceptance, Bounds, Word};
use apsys::membrane::{
    format_steps, is_halting, parse_steps, replay, run_random, successors, Outcome, Trace,
};
use apsys::oracle::{example_language, grammar_language, StringGrammar};
use apsys::translate::{
    cf_to_aps, eliminate_self_recursion, parse_cfg, parse_reg_grammar, parse_tm, reg_to_aps,
    tm_to_aps,
};
use apsys::{load_system_file, print_system, PSystem};

#[derive(Parser)]
#[command(
    name = "apsys",
    version,
    about = "Labelled 8-directional array P systems"
)]
struct Cli {
    /// Worker threads for enumeration (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct BoundArgs {
    #[arg(long, default_value_t = 10)]
    max_label_len: usize,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    #[arg(long, default_value_t = 10_000)]
    max_cells: usize,
    #[arg(long, default_value_t = 1_000)]
    max_arrays: usize,
    #[arg(long, default_value_t = 2_000_000)]
    max_states: usize,
}

impl From<BoundArgs> for Bounds {
    fn from(b: BoundArgs) -> Self {
        Bounds {
            max_label_len: b.max_label_len,
            max_steps: b.max_steps,
            max_cells_per_array: b.max_cells,
            max_total_arrays: b.max_arrays,
            max_states: b.max_states,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Follow one random computation, or replay a recorded one.
    Run {
        system: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Replay the steps in this trace file instead of choosing randomly.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// List the label words of accepted computations within the bounds.
    Enumerate {
        system: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Decide one word. Exit status 0 = yes, 1 = no, 2 = unknown.
    Accepts {
        system: PathBuf,
        word: String,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Render the output arrays of accepted computations.
    Outputs {
        system: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Render a grid file canonically, or a system's initial configuration.
    Render { file: PathBuf },
    /// Compile a grammar or Turing machine into a system file.
    Translate {
        #[command(flatten)]
        source: Source,
        /// Ordered input alphabet for --tm, comma separated.
        #[arg(long, value_delimiter = ',')]
        alphabet: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare a system's label language with an independent oracle.
    Verify {
        #[command(flatten)]
        source: VerifySource,
        /// System file to check against --example.
        #[arg(long)]
        system: Option<PathBuf>,
        /// Longest word compared.
        #[arg(long, default_value_t = 6)]
        k: usize,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    reg: Option<PathBuf>,
    #[arg(long)]
    cfg: Option<PathBuf>,
    #[arg(long)]
    tm: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct VerifySource {
    #[arg(long)]
    reg: Option<PathBuf>,
    #[arg(long)]
    cfg: Option<PathBuf>,
    /// One of pi1, pi2, pi5; needs --system.
    #[arg(long)]
    example: Option<String>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path) -> Result<PSystem> {
    load_system_file(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn print_trace(t: &Trace) {
    println!(
        "# outcome={} steps={} word={}",
        t.outcome,
        t.steps.len(),
        t.word()
    );
    print!("{}", format_steps(&t.steps));
    // Commented so the whole output can be fed back to `run --replay`.
    for line in t.final_config.to_string().lines() {
        println!("# {line}");
    }
}

fn translate(source: &Source, alphabet: &[String]) -> Result<PSystem> {
    if let Some(p) = &source.reg {
        let g = parse_reg_grammar(&read(p)?).with_context(|| p.display().to_string())?;
        return Ok(reg_to_aps(&eliminate_self_recursion(&g))?);
    }
    if let Some(p) = &source.cfg {
        let g = parse_cfg(&read(p)?).with_context(|| p.display().to_string())?;
        return Ok(cf_to_aps(&g)?);
    }
    let p = source.tm.as_ref().expect("clap enforces one source");
    let t = parse_tm(&read(p)?).with_context(|| p.display().to_string())?;
    if alphabet.is_empty() {
        bail!("--tm needs --alphabet, e.g. --alphabet a,b");
    }
    let h = alphabet
        .iter()
        .map(|s| Symbol::new(s).map_err(|e| anyhow::anyhow!("alphabet symbol {s:?}: {e}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(tm_to_aps(&t, &h)?)
}

fn verify(source: &VerifySource, system: Option<&Path>, k: usize) -> Result<ExitCode> {
    let (s, expected): (PSystem, BTreeSet<Word>) = if let Some(name) = &source.example {
        let Some(path) = system else {
            bail!("--example needs --system")
        };
        (load(path)?, example_language(name, k)?)
    } else {
        let src = Source {
            reg: source.reg.clone(),
            cfg: source.cfg.clone(),
            tm: None,
        };
        let g: StringGrammar = match (&source.reg, &source.cfg) {
            (Some(p), _) => (&parse_reg_grammar(&read(p)?)?).into(),
            (None, Some(p)) => (&parse_cfg(&read(p)?)?).into(),
            (None, None) => bail!("verify needs --reg, --cfg or --example"),
        };
        (translate(&src, &[])?, grammar_language(&g, k))
    };
    let got = enumerate_label_language(&s, &Bounds::with_label_len(k));
    let missing: Vec<_> = expected.difference(&got.words).collect();
    let extra: Vec<_> = got.words.difference(&expected).collect();
    for w in &missing {
        println!("missing {w}");
    }
    for w in &extra {
        println!("extra {w}");
    }
    let ok = missing.is_empty() && extra.is_empty() && got.exhaustive;
    println!(
        "{} k={k} words={} exhaustive={}",
        if ok { "MATCH" } else { "MISMATCH" },
        got.words.len(),
        got.exhaustive
    );
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .context("cannot configure worker pool")?;
    }
    match cli.cmd {
        Cmd::Run {
            system,
            seed,
            max_steps,
            replay: trace_file,
        } => {
            let s = load(&system)?;
            match trace_file {
                None => print_trace(&run_random(&s, seed, max_steps)),
                Some(p) => {
                    let steps = parse_steps(&read(&p)?)?;
                    let initial = s.initial_configuration();
                    let t = Trace {
                        final_config: initial.clone(),
                        initial,
                        steps,
                        outcome: Outcome::BudgetExhausted,
                    };
                    let end = replay(&s, &t)?;
                    let outcome = if is_halting(&s, &end) {
                        Outcome::Halted
                    } else if successors(&s, &end).is_empty() {
                        Outcome::DeadEnd
                    } else {
                        Outcome::BudgetExhausted
                    };
                    print_trace(&Trace {
                        final_config: end,
                        outcome,
                        ..t
                    });
                }
            }
        }
        Cmd::Enumerate { system, bounds } => {
            let s = load(&system)?;
            print!("{}", enumerate_label_language(&s, &bounds.into()).report());
        }
        Cmd::Accepts {
            system,
            word,
            bounds,
        } => {
            let s = load(&system)?;
            let w = Word::parse(&word).map_err(|e| anyhow::anyhow!("word {word:?}: {e}"))?;
            let a = accepts(&s, &w, &bounds.into());
            println!("{a}");
            return Ok(ExitCode::from(match a {
                Acceptance::Yes => 0,
                Acceptance::No => 1,
                Acceptance::Unknown => 2,
            }));
        }
        Cmd::Outputs { system, bounds } => {
            let s = load(&system)?;
            let outs = collect_outputs(&s, &bounds.into());
            let mut sorted: Vec<_> = outs.iter().collect();
            sorted.sort_by_key(|a| (a.len(), (*a).clone()));
            for (i, a) in sorted.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                println!("{}", render_ascii(a));
            }
        }
        Cmd::Render { file } => {
            if file.extension().is_some_and(|e| e == "aps") {
                print!("{}", load(&file)?.initial_configuration());
            } else {
                let a = parse_grid(&read(&file)?)
                    .map_err(|e| anyhow::anyhow!("{}: {e}", file.display()))?;
                println!("{}", render_ascii(&canonicalize(&a)));
            }
        }
        Cmd::Translate {
            source,
            alphabet,
            output,
        } => {
            let text = print_system(&translate(&source, &alphabet)?);
            match output {
                Some(p) => {
                    fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?
                }
                None => print!("{text}"),
            }
        }
        Cmd::Verify { source, system, k } => return verify(&source, system.as_deref(), k),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
