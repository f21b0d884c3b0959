use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use treeltl::automata::{automaton_from_json, automaton_to_json, ConstraintAutomaton};
use treeltl::engine::{
    certificate_from_json, certificate_to_json, check_certificate, is_empty_with, EngineError, EngineOptions,
    EngineStats,
};
use treeltl::logic::{
    mc_with, parse_formula_file, problem_automaton, sat_with, Branching, Formula, LogicError, Outcome,
};
use treeltl::oracle::{bounded_emptiness, SearchBounds};
use treeltl::order_types::type_ceiling;
use treeltl::tree::{ConstantSet, Rational};

#[derive(Parser)]
#[command(name = "treeltl", version, about = "Constraint LTL over order trees")]
struct Cli {
    /// Worker threads for the loop search (1 = sequential).
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Satisfiability of a formula file.
    Sat {
        formula: PathBuf,
        /// Branching degree: a number ≥ 2 or `inf`.
        #[arg(long, default_value = "inf", value_parser = parse_branching)]
        k: Branching,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Whether some word accepted by the automaton satisfies the formula.
    Mc {
        automaton: PathBuf,
        formula: PathBuf,
        #[arg(long, default_value = "inf", value_parser = parse_branching)]
        k: Branching,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Emptiness of an automaton.
    Empty {
        automaton: PathBuf,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Checks a certificate. With a formula file as input (or `--formula`
    /// next to an automaton) the certificate refers to the automaton built
    /// by `sat` (or `mc`) with the same `--k`.
    Certify {
        input: PathBuf,
        cert: PathBuf,
        #[arg(long)]
        formula: Option<PathBuf>,
        #[arg(long, default_value = "inf", value_parser = parse_branching)]
        k: Branching,
    },
    /// Bounded explicit search for an accepting lasso.
    OracleEmpty {
        automaton: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        #[arg(long, default_value = "1,2,3")]
        labels: String,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, default_value_t = 10_000)]
        max_configs: usize,
    },
    /// Parses an automaton (JSON) or formula file and prints it back.
    Parse { file: PathBuf },
}

fn parse_branching(s: &str) -> Result<Branching, String> {
    match s {
        "inf" | "infinity" | "∞" => Ok(Branching::Infinite),
        _ => match s.parse::<u32>() {
            Ok(k) if k >= 2 => Ok(Branching::Finite(k)),
            _ => Err(format!("expected an integer ≥ 2 or `inf`, got `{s}`")),
        },
    }
}

enum Failure {
    Input(String),
    Resource(String),
    Internal(String),
}

impl Failure {
    fn input(e: impl Display) -> Failure {
        Failure::Input(e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Failure {
        if e.is_resource_limit() {
            Failure::Resource(e.to_string())
        } else if matches!(e, EngineError::Internal(_)) {
            Failure::Internal(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<LogicError> for Failure {
    fn from(e: LogicError) -> Failure {
        match e {
            LogicError::Engine(e) => e.into(),
            LogicError::Internal(_) => Failure::Internal(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_automaton(path: &Path) -> Result<ConstraintAutomaton, Failure> {
    automaton_from_json(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_formula(path: &Path) -> Result<(Formula, ConstantSet), Failure> {
    parse_formula_file(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn is_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

fn print_stats(s: &EngineStats) {
    println!("single_types={}", s.single_types);
    println!("reach_nodes={}", s.reach_nodes);
    println!("loop_candidates={}", s.loop_candidates);
    println!("pair_nodes={}", s.pair_nodes);
    println!("placements={}", s.placements);
    println!("stretch_steps={}", s.stretch_steps);
    println!("type_ceiling={}", type_ceiling());
    println!("millis={}", s.millis);
}

fn report(out: &Outcome, yes: &str, no: &str, cert: Option<&Path>) -> Result<(), Failure> {
    println!("{}", if out.satisfiable { yes } else { no });
    if let (Some(path), Some(c)) = (cert, &out.certificate) {
        write(path, &certificate_to_json(&out.automaton, c))?;
        println!("certificate={}", path.display());
    }
    println!("states={}", out.automaton.states.len());
    println!("transitions={}", out.automaton.transitions.len());
    print_stats(&out.stats);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let opts = EngineOptions { parallel: cli.parallel > 1 };
    match cli.command {
        Command::Sat { formula, k, cert } => {
            let (f, c) = load_formula(&formula)?;
            let out = sat_with(&f, k, &c, opts)?;
            report(&out, "SAT", "UNSAT", cert.as_deref())
        }
        Command::Mc { automaton, formula, k, cert } => {
            let a = load_automaton(&automaton)?;
            let (f, c) = load_formula(&formula)?;
            let out = mc_with(&a, &f, k, &c, opts)?;
            report(&out, "SAT", "UNSAT", cert.as_deref())
        }
        Command::Empty { automaton, cert } => {
            let a = load_automaton(&automaton)?;
            let v = is_empty_with(&a, opts)?;
            println!("{}", if v.nonempty { "NONEMPTY" } else { "EMPTY" });
            if let (Some(path), Some(c)) = (cert, &v.certificate) {
                write(&path, &certificate_to_json(&a, c))?;
                println!("certificate={}", path.display());
            }
            print_stats(&v.stats);
            Ok(())
        }
        Command::Certify { input, cert, formula, k } => {
            let text = read(&input)?;
            let a = match (is_json(&text), formula) {
                (true, None) => automaton_from_json(&text).map_err(Failure::input)?,
                (true, Some(fp)) => {
                    let base = automaton_from_json(&text).map_err(Failure::input)?;
                    let (f, c) = load_formula(&fp)?;
                    problem_automaton(Some(&base), &f, k, &c)?
                }
                (false, None) => {
                    let (f, c) = parse_formula_file(&text).map_err(Failure::input)?;
                    problem_automaton(None, &f, k, &c)?
                }
                (false, Some(_)) => return Err(Failure::Input("--formula needs an automaton input".into())),
            };
            let verdict = certificate_from_json(&a, &read(&cert)?).and_then(|c| check_certificate(&a, &c));
            match verdict {
                Ok(()) => println!("VALID-CERT"),
                Err(reason) => {
                    println!("INVALID-CERT");
                    println!("reason={reason}");
                }
            }
            Ok(())
        }
        Command::OracleEmpty { automaton, max_len, labels, steps, max_configs } => {
            let a = load_automaton(&automaton)?;
            let labels = labels
                .split(',')
                .map(|l| l.trim().parse::<Rational>().map_err(Failure::input))
                .collect::<Result<Vec<_>, _>>()?;
            let bounds = SearchBounds { max_word_length: max_len, labels, max_steps: steps, max_configs };
            match bounded_emptiness(&a, &bounds) {
                Some(c) => {
                    println!("NONEMPTY");
                    println!("prefix_length={}", c.prefix_run.len());
                    println!("loop_length={}", c.loop_run.len());
                }
                // Only the explored fragment is known to be lasso-free.
                None => {
                    println!("EMPTY");
                    println!("bounded=true");
                }
            }
            Ok(())
        }
        Command::Parse { file } => {
            let text = read(&file)?;
            if is_json(&text) {
                let a = automaton_from_json(&text).map_err(Failure::input)?;
                println!("AUTOMATON");
                print!("{}", automaton_to_json(&a));
            } else {
                let (f, c) = parse_formula_file(&text).map_err(Failure::input)?;
                println!("FORMULA");
                println!("{}", f.display(&c));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.parallel.max(1);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(m)) => {
            eprintln!("resource limit: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(1)
        }
    }
}
