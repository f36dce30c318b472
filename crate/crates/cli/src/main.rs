use clap::{Parser, Subcommand};
use level3_cli::commands::{
    cmd_compose, cmd_equiv, cmd_eval, cmd_groebner, cmd_lower, cmd_run_pda,
};
use level3_cli::syntax::parse_order;
use level3_cli::{bundled, CliResult, Options, Output};
use std::io::{ErrorKind, Write};
use std::process::ExitCode;

/// Evaluate, lower and compare level-3 sequences and higher-order pushdown
/// machines. FILE is a path or the name of a bundled example.
#[derive(Parser)]
#[command(name = "level3", version)]
struct Cli {
    /// Step budget for machine runs and regular systems.
    #[arg(long, global = true, default_value_t = level3::kpda::DEFAULT_FUEL)]
    fuel: u64,

    /// Gröbner budget scale; 1000 is the default.
    #[arg(long, global = true)]
    budget: Option<usize>,

    /// Monomial order: lex, grevlex or elim:K.
    #[arg(long, global = true)]
    order: Option<String>,

    /// Use the literal variant of a bundled example where one exists.
    #[arg(long, global = true)]
    paper_literal: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a target on a word (or on a^n for one-letter inputs).
    Eval {
        file: String,
        target: String,
        input: String,
        /// Print the length of a word-valued result.
        #[arg(long)]
        as_length: bool,
        /// Print the homomorphism of a compositional index.
        #[arg(long)]
        hom: bool,
    },
    /// Decide whether two targets agree on every word.
    Equiv {
        file_a: String,
        target_a: String,
        file_b: String,
        target_b: String,
    },
    /// Print a lowered form of a target as a system file.
    Lower {
        file: String,
        target: String,
        /// Target kind: linrep, cat, hdt0l, chain or poly.
        #[arg(long)]
        to: Option<String>,
    },
    /// Staged evaluation of a level-3 mapping.
    Compose {
        file: String,
        target: String,
        input: String,
        #[arg(long)]
        as_length: bool,
    },
    /// Run a pushdown machine on a word.
    RunPda {
        file: String,
        target: String,
        input: String,
        /// Print every configuration.
        #[arg(long)]
        trace: bool,
    },
    /// Print a reduced Gröbner basis, or test membership.
    Groebner {
        file: String,
        target: String,
        #[arg(long)]
        member: Option<String>,
    },
    /// List the bundled examples.
    Examples,
}

fn run(cli: Cli) -> CliResult<Output> {
    let opts = Options {
        fuel: cli.fuel,
        budget: cli.budget,
        order: cli
            .order
            .as_deref()
            .map(|o| parse_order(0, o))
            .transpose()?,
        paper_literal: cli.paper_literal,
    };
    match cli.command {
        Command::Eval {
            file,
            target,
            input,
            as_length,
            hom,
        } => cmd_eval(&file, &target, &input, as_length, hom, &opts),
        Command::Equiv {
            file_a,
            target_a,
            file_b,
            target_b,
        } => cmd_equiv(&file_a, &target_a, &file_b, &target_b, &opts),
        Command::Lower { file, target, to } => cmd_lower(&file, &target, to.as_deref(), &opts),
        Command::Compose {
            file,
            target,
            input,
            as_length,
        } => cmd_compose(&file, &target, &input, as_length, &opts),
        Command::RunPda {
            file,
            target,
            input,
            trace,
        } => cmd_run_pda(&file, &target, &input, trace, &opts),
        Command::Groebner {
            file,
            target,
            member,
        } => cmd_groebner(&file, &target, member.as_deref(), &opts),
        Command::Examples => Ok(Output {
            text: bundled::names().collect::<Vec<_>>().join("\n"),
            negative: false,
        }),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", out.text) {
                Err(e) if e.kind() != ErrorKind::BrokenPipe => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                _ => ExitCode::from(if out.negative { 1 } else { 0 }),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
