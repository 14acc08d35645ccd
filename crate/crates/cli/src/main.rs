use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use corrbi::bicat::{coherence_sample, compose_covariant, identity_coherence};
use corrbi::corr::{corr_multiplicity, is_hilbert_bimodule, katsura_ideal, tensor};
use corrbi::cstar::FdCStarAlgebra;
use corrbi::instance::{arrow_reports, parse_graph, Instance};
use corrbi::pimsner::bratteli;
use corrbi::report::{all_passed, reports_to_json, Report};

#[derive(Parser)]
#[command(name = "corrbi", version, about = "Exact checks for finite-dimensional correspondences and their Cuntz-Pimsner core stages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Load an instance and run every structural validation.
    Validate { file: PathBuf },
    /// Tensor two named correspondences.
    Tensor {
        file: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Katsura ideal of a named correspondence.
    Katsura {
        file: PathBuf,
        #[arg(long)]
        corr: String,
    },
    /// Whether a named correspondence is a Hilbert bimodule.
    Bimodule {
        file: PathBuf,
        #[arg(long)]
        corr: String,
    },
    /// Compose two named arrows.
    Compose {
        file: PathBuf,
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// Pentagon and triangle on seeded random chains.
    Coherence {
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use identity correspondences only.
        #[arg(long)]
        identity: bool,
        /// Corrupt the associator (negative control).
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Core stages and the Bratteli diagram of a graph.
    Core {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Reflector round trips for the arrows and 2-arrows of an instance.
    Reflect {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 2)]
        level: usize,
        /// Corrupt u# before transforming back (negative control).
        #[arg(long, hide = true)]
        corrupt: bool,
    },
}

enum Failure {
    Input(String),
}

type Outcome = Result<(String, bool), Failure>;

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &PathBuf) -> Result<Instance, Failure> {
    Instance::parse(&read(path)?).map_err(|e| Failure::Input(e.to_string()))
}

fn emit(reports: Vec<Report>) -> Outcome {
    let ok = all_passed(&reports);
    Ok((reports_to_json(&reports), ok))
}

fn named<'a, T>(map: &'a std::collections::BTreeMap<String, T>, kind: &str, name: &str) -> Result<&'a T, Failure> {
    map.get(name).ok_or_else(|| Failure::Input(format!("no valid {kind} named `{name}`")))
}

fn blocks_of(a: &FdCStarAlgebra) -> Vec<usize> {
    a.blocks().to_vec()
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Validate { file } => emit(load(&file)?.validate()),
        Command::Tensor { file, left, right } => {
            let inst = load(&file)?;
            let e = named(&inst.correspondences, "correspondence", &left)?;
            let f = named(&inst.correspondences, "correspondence", &right)?;
            let t = tensor(e, f).map_err(|err| Failure::Input(err.to_string()))?;
            let m = corr_multiplicity(&t.product);
            let expected = corr_multiplicity(e).compose(&corr_multiplicity(f));
            let check = format!("tensor {left} {right}");
            let mut reports = vec![Report::pass(
                format!("{check}: product"),
                format!("dimension {}, module multiplicities {:?}, source blocks {:?}", t.product.dim(), t.product.module().mult(), blocks_of(t.product.source())),
            )];
            if m == expected {
                reports.push(Report::pass(format!("{check}: multiplicity"), format!("{:?}", m.0)));
            } else {
                reports.push(Report::fail(format!("{check}: multiplicity"), "not the product of the factors", Some(format!("{:?} vs {:?}", m.0, expected.0))));
            }
            emit(reports)
        }
        Command::Katsura { file, corr } => {
            let inst = load(&file)?;
            let e = named(&inst.correspondences, "correspondence", &corr)?;
            let i = katsura_ideal(e);
            emit(vec![Report::pass(format!("katsura {corr}"), format!("blocks {:?}", i.blocks().iter().collect::<Vec<_>>()))])
        }
        Command::Bimodule { file, corr } => {
            let inst = load(&file)?;
            let e = named(&inst.correspondences, "correspondence", &corr)?;
            let r = match is_hilbert_bimodule(e) {
                Some(h) => Report::pass(format!("bimodule {corr}"), format!("left action restricts to an isomorphism on blocks {:?}", h.ideal.blocks().iter().collect::<Vec<_>>())),
                None => Report::fail(format!("bimodule {corr}"), "left action is not injective onto the compacts on the Katsura ideal", Some(format!("multiplicity {:?}", e.multiplicity().0))),
            };
            emit(vec![r])
        }
        Command::Compose { file, first, second } => {
            let inst = load(&file)?;
            let a = named(&inst.arrows, "arrow", &first)?;
            let b = named(&inst.arrows, "arrow", &second)?;
            let c = compose_covariant(a, b).map_err(|e| Failure::Input(e.to_string()))?;
            let name = format!("{first} then {second}");
            let mut reports = arrow_reports(&name, &c);
            reports.push(Report::pass(format!("arrow {name}: correspondence"), format!("multiplicity {:?}", c.corr.multiplicity().0)));
            emit(reports)
        }
        Command::Coherence { samples, seed, identity, corrupt } => {
            if samples == 0 {
                return Err(Failure::Input("--samples must be at least 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut reports = Vec::new();
            for k in 0..samples {
                let pair = if identity {
                    identity_coherence(&FdCStarAlgebra::new(vec![1 + k % 3]).expect("positive block"))
                } else {
                    coherence_sample(&mut rng, corrupt)
                };
                let (p, t) = pair.map_err(|e| Failure::Input(e.to_string()))?;
                let prefix = format!("sample {k:03}");
                reports.push(Report::from_coherence(&prefix, &p));
                reports.push(Report::from_coherence(&prefix, &t));
            }
            emit(reports)
        }
        Command::Core { graph, level, format } => {
            let g = parse_graph(&read(&graph)?).map_err(|e| Failure::Input(e.to_string()))?;
            let d = bratteli(&g, level).map_err(|e| Failure::Input(e.to_string()))?;
            let text = match format {
                Format::Dot => d.to_dot(),
                Format::Json => serde_json::to_string_pretty(&d).expect("diagram serializes"),
            };
            Ok((text, true))
        }
        Command::Reflect { instance, level, corrupt } => {
            let inst = load(&instance)?;
            emit(inst.reflect(level, corrupt))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((text, ok)) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| e.to_string()),
                None => {
                    let mut out = std::io::stdout().lock();
                    match writeln!(out, "{text}") {
                        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
                        _ => Ok(()),
                    }
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
