use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ttwb_cli::cert::{emit, Certificate};
use ttwb_cli::commands::{run, BudgetOverrides, Command, SubgroupArgs, SubgroupVerb};
use ttwb_cli::input::parse_input;
use ttwb_cli::replay::replay;

#[derive(Parser)]
#[command(name = "ttwb", version, about = "Relative train track workbench")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Stratum height for stratum commands (default: highest EG stratum).
    #[arg(long, global = true)]
    height: Option<usize>,
    #[arg(long, global = true)]
    iterate_bound: Option<usize>,
    #[arg(long, global = true)]
    length_bound: Option<usize>,
    #[arg(long, global = true)]
    period_bound: Option<usize>,
    /// Depth of attracting bases and ray prefixes.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Work with the k-th power of the map.
    #[arg(long, global = true, default_value_t = 1)]
    power: usize,
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    #[arg(long, global = true)]
    text: bool,
}

#[derive(Subcommand)]
enum Cmd {
    Validate {
        file: PathBuf,
    },
    Strata {
        file: PathBuf,
    },
    CheckRtt {
        file: PathBuf,
    },
    CheckCt {
        file: PathBuf,
    },
    Inp {
        file: PathBuf,
    },
    Geometric {
        file: PathBuf,
    },
    Model {
        file: PathBuf,
    },
    Peripheral {
        file: PathBuf,
    },
    Tiles {
        file: PathBuf,
    },
    Attract {
        file: PathBuf,
    },
    Rays {
        file: PathBuf,
        /// Seed direction, e.g. `e` or `~a` (default: all principal directions).
        #[arg(long)]
        edge: Option<String>,
    },
    Subgroup {
        #[command(subcommand)]
        verb: Verb,
    },
    /// Replays the witnesses of a certificate against its input.
    Verify {
        file: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
}

#[derive(Args)]
struct Groups {
    file: PathBuf,
    /// Generators separated by `;`, based where the first one starts.
    #[arg(long)]
    gens: Vec<String>,
    /// Edge names spanning a subgraph.
    #[arg(long)]
    subgraph: Vec<String>,
    /// A conjugacy class, as a closed word.
    #[arg(long)]
    class: Option<String>,
}

#[derive(Subcommand)]
enum Verb {
    Fold(Groups),
    Carries(Groups),
    Intersect(Groups),
    Malnormal(Groups),
    Meet(Groups),
}

fn text_report(cert: &Certificate) -> String {
    let mut out = format!("{} [{}]\n", cert.command, &cert.input_digest[..12]);
    for w in &cert.warnings {
        out.push_str(&format!("warning: line {w}\n"));
    }
    for v in &cert.verdicts {
        let note = if v.note.is_empty() {
            String::new()
        } else {
            format!(" ({})", v.note)
        };
        out.push_str(&format!(
            "{:>12}  {}{note}\n",
            v.status.to_string(),
            v.check
        ));
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let flags = BudgetOverrides {
        iterate_bound: g.iterate_bound,
        length_bound: g.length_bound,
        period_bound: g.period_bound,
        depth: g.depth,
    };
    let env = match std::env::var("TTWB_BUDGET") {
        Ok(s) => match BudgetOverrides::parse(&s) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("TTWB_BUDGET: {e}");
                return ExitCode::from(2);
            }
        },
        Err(_) => BudgetOverrides::default(),
    };
    let overrides = env.overlay(flags);

    let (file, command, certificate) = match cli.command {
        Cmd::Validate { file } => (file, Some(Command::Validate), None),
        Cmd::Strata { file } => (file, Some(Command::Strata), None),
        Cmd::CheckRtt { file } => (file, Some(Command::CheckRtt), None),
        Cmd::CheckCt { file } => (file, Some(Command::CheckCt), None),
        Cmd::Inp { file } => (file, Some(Command::Inp { height: g.height }), None),
        Cmd::Geometric { file } => (file, Some(Command::Geometric { height: g.height }), None),
        Cmd::Model { file } => (file, Some(Command::Model { height: g.height }), None),
        Cmd::Peripheral { file } => (file, Some(Command::Peripheral { height: g.height }), None),
        Cmd::Tiles { file } => (file, Some(Command::Tiles { height: g.height }), None),
        Cmd::Attract { file } => (file, Some(Command::Attract { height: g.height }), None),
        Cmd::Rays { file, edge } => (file, Some(Command::Rays { edge }), None),
        Cmd::Subgroup { verb } => {
            let (verb, a) = match verb {
                Verb::Fold(a) => (SubgroupVerb::Fold, a),
                Verb::Carries(a) => (SubgroupVerb::Carries, a),
                Verb::Intersect(a) => (SubgroupVerb::Intersect, a),
                Verb::Malnormal(a) => (SubgroupVerb::Malnormal, a),
                Verb::Meet(a) => (SubgroupVerb::Meet, a),
            };
            let args = SubgroupArgs {
                gens: a.gens,
                subgraphs: a.subgraph,
                class: a.class,
            };
            (a.file, Some(Command::Subgroup { verb, args }), None)
        }
        Cmd::Verify { file, certificate } => (file, None, Some(certificate)),
    };

    let text = match std::fs::read_to_string(&file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            return ExitCode::from(2);
        }
    };
    let input = match parse_input(&text) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("{}:{e}", file.display());
            return ExitCode::from(2);
        }
    };
    for w in &input.warnings {
        eprintln!("{}:{w}", file.display());
    }
    let budgets = overrides.resolve(&input.graph);
    let cert = match (command, certificate) {
        (Some(c), _) => {
            let power = g.power.max(1);
            let input = input.power(power);
            run(&c, &input, power, budgets)
        }
        (None, Some(path)) => {
            let parsed = std::fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|s| serde_json::from_str::<Certificate>(&s).map_err(|e| e.to_string()));
            match parsed {
                Ok(c) => replay(&input, &c, budgets),
                Err(e) => {
                    eprintln!("{}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
        }
        (None, None) => unreachable!("every subcommand names a command or a certificate"),
    };
    if g.text {
        print!("{}", text_report(&cert));
    } else {
        print!("{}", emit(&cert));
    }
    ExitCode::from(cert.exit_code() as u8)
}
