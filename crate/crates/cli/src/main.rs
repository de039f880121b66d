//! `octodecomp`: build, verify and search `(8; p, q)`-decompositions.
//!
//! Exit status: 0 success or valid, 1 invalid certificate or infeasible
//! request, 2 unsupported case or undecided search, 3 usage or parse error.
//! Data goes to standard output, diagnostics to standard error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use octodecomp::engine::{self, check_feasible, Constructible, Family, Instance, Request};
use octodecomp::oracle::{enumerate_feasible, search_graph, CoverOutcome, SearchBudget};
use octodecomp::{build_family, certify, verify, Catalog, Certificate, Error};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_UNSUPPORTED: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "octodecomp", version, about = "Decompositions of product graphs into 8-paths and 8-cycles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct InstanceArgs {
    /// Product family: tensor or wreath.
    #[arg(long)]
    family: Family,
    #[arg(short)]
    m: u32,
    #[arg(short)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    lambda: u32,
}

impl InstanceArgs {
    fn instance(&self) -> Instance {
        Instance::new(self.family, self.m, self.n, self.lambda)
    }
}

#[derive(Args)]
struct BudgetArgs {
    /// Largest edge count the search accepts.
    #[arg(long, default_value_t = 48)]
    max_edges: usize,
    /// Search node limit per (p, q).
    #[arg(long, default_value_t = 200_000_000)]
    budget_nodes: u64,
    /// Wall-clock limit per (p, q), in seconds.
    #[arg(long)]
    budget_seconds: Option<f64>,
    /// Neighbour-order shuffle seed; 0 keeps the natural order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify a decomposition, then print the certificate.
    Build {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(short)]
        p: usize,
        #[arg(short)]
        q: usize,
        /// Write the certificate here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the plan trace to standard error.
        #[arg(long)]
        trace: bool,
    },
    /// Verify a certificate file (`-` or no argument reads standard input).
    Verify { file: Option<PathBuf> },
    /// Report the necessary conditions, parity floor and constructibility.
    Feasible {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Exact search on a small target.
    Oracle(OracleArgs),
    /// Inspect the block catalog.
    Blocks {
        #[command(subcommand)]
        command: BlocksCommand,
    },
}

#[derive(Args)]
struct OracleArgs {
    /// Search a catalog block's graph.
    #[arg(long, conflicts_with = "family")]
    block: Option<String>,
    #[arg(long, requires_all = ["m", "n"])]
    family: Option<Family>,
    #[arg(short)]
    m: Option<u32>,
    #[arg(short)]
    n: Option<u32>,
    #[arg(long, default_value_t = 1)]
    lambda: u32,
    #[arg(short, requires = "q")]
    p: Option<usize>,
    #[arg(short, requires = "p")]
    q: Option<usize>,
    /// Try every split of the parts into paths and cycles.
    #[arg(long, conflicts_with_all = ["p", "q"])]
    enumerate: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Subcommand)]
enum BlocksCommand {
    /// Rebuild and verify every feasible pair of every block.
    Check {
        #[arg(long)]
        id: Option<String>,
    },
    /// List blocks with their feasible pairs.
    List,
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::UnsupportedCase(_) | Error::UnsupportedInstance(_) | Error::SchemeMismatch { .. } => EXIT_UNSUPPORTED,
        Error::Parse { .. } | Error::InvalidRequest(_) | Error::InvalidDescriptor(_) | Error::UnknownBlock(_) | Error::Io(_) => {
            EXIT_USAGE
        }
        _ => EXIT_INVALID,
    }
}

fn fail(e: Error) -> u8 {
    eprintln!("error: {e}");
    exit_for(&e)
}

fn emit(bytes: &[u8], out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => io::stdout().write_all(bytes).map_err(|e| Error::Io(e.to_string())),
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec(value).expect("reports serialize");
    s.push(b'\n');
    s
}

fn cmd_build(catalog: &Catalog, args: InstanceArgs, p: usize, q: usize, out: Option<PathBuf>, trace: bool) -> u8 {
    let instance = args.instance();
    if trace {
        match engine::plan(&instance, catalog) {
            Ok(plan) => plan.trace.iter().for_each(|t| eprintln!("trace: {t}")),
            Err(e) => return fail(e),
        }
    }
    let cert = match engine::build(&Request { instance, p, q }, catalog) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    match emit(&certify::serialize(&cert), out.as_ref()) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(e),
    }
}

fn cmd_verify(file: Option<PathBuf>) -> u8 {
    let bytes = match file.as_ref().filter(|p| p.as_os_str() != "-") {
        Some(path) => match fs::read(path) {
            Ok(b) => b,
            Err(e) => return fail(Error::Io(format!("{}: {e}", path.display()))),
        },
        None => {
            let mut b = Vec::new();
            if let Err(e) = io::stdin().read_to_end(&mut b) {
                return fail(Error::Io(e.to_string()));
            }
            b
        }
    };
    let cert = match certify::deserialize(&bytes) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let report = verify(&cert);
    eprint!("{report}");
    if let Err(e) = emit(&json_line(&report), None) {
        return fail(e);
    }
    if report.valid {
        EXIT_OK
    } else {
        EXIT_INVALID
    }
}

fn cmd_feasible(catalog: &Catalog, args: InstanceArgs) -> u8 {
    let instance = args.instance();
    if instance.m < 2 || instance.n < 2 || instance.lambda == 0 {
        return fail(Error::InvalidRequest("m and n must be at least 2 and lambda at least 1".into()));
    }
    let report = check_feasible(&instance, catalog);
    eprintln!("{instance}: {} edges, {} parts", report.edges, report.parts);
    eprintln!("necessary conditions: {}", report.necessary_detail);
    eprintln!("parity floor: p >= {}", report.parity_floor);
    let code = match &report.constructible {
        Constructible::Supported { p_values } => {
            eprintln!("constructible p: {}", engine::format_ranges(p_values));
            EXIT_OK
        }
        Constructible::UnsupportedCase { reason } => {
            eprintln!("unsupported: {reason}");
            EXIT_UNSUPPORTED
        }
        Constructible::Infeasible { reason } => {
            eprintln!("infeasible: {reason}");
            EXIT_INVALID
        }
    };
    match emit(&json_line(&report), None) {
        Ok(()) => code,
        Err(e) => fail(e),
    }
}

fn cmd_oracle(catalog: &Catalog, args: OracleArgs) -> u8 {
    let budget = SearchBudget {
        max_edges: args.budget.max_edges,
        node_limit: args.budget.budget_nodes,
        time_limit: args.budget.budget_seconds.map(Duration::from_secs_f64),
        seed: args.budget.seed,
    };
    let (descriptor, lambda, graph) = match (&args.block, args.family) {
        (Some(id), _) => match catalog.get(id) {
            Ok(b) => (b.graph.clone(), b.lambda, b.target().clone()),
            Err(e) => return fail(e),
        },
        (None, Some(family)) => {
            let instance = Instance::new(family, args.m.unwrap_or(0), args.n.unwrap_or(0), args.lambda);
            if instance.m < 2 || instance.n < 2 || instance.lambda == 0 {
                return fail(Error::InvalidRequest("m and n must be at least 2 and lambda at least 1".into()));
            }
            match build_family(&instance.target()) {
                Ok(g) => (instance.target(), instance.lambda, g.scaled(instance.lambda)),
                Err(e) => return fail(e),
            }
        }
        (None, None) => return fail(Error::InvalidRequest("give --block or --family".into())),
    };
    if args.enumerate {
        return match enumerate_feasible(&graph, &budget) {
            Ok((found, complete)) => {
                let pairs: Vec<(usize, usize)> = found.into_iter().collect();
                let out = serde_json::json!({ "complete": complete, "feasible": pairs });
                if !complete {
                    eprintln!("search budget ran out for some pairs; the set may be incomplete");
                }
                match emit(&json_line(&out), None) {
                    Ok(()) if complete => EXIT_OK,
                    Ok(()) => EXIT_UNSUPPORTED,
                    Err(e) => fail(e),
                }
            }
            Err(e) => fail(e),
        };
    }
    let (Some(p), Some(q)) = (args.p, args.q) else {
        return fail(Error::InvalidRequest("give -p and -q, or --enumerate".into()));
    };
    match search_graph(&graph, p, q, &budget) {
        Ok(CoverOutcome::Found(walks)) => {
            let cert = Certificate::new(descriptor, lambda, walks);
            match emit(&certify::serialize(&cert), None) {
                Ok(()) => EXIT_OK,
                Err(e) => fail(e),
            }
        }
        Ok(CoverOutcome::ExhaustedNone) => {
            eprintln!("no ({p}, {q}) decomposition exists");
            EXIT_INVALID
        }
        Ok(CoverOutcome::BudgetExceeded) => {
            eprintln!("search budget exceeded before a decision");
            EXIT_UNSUPPORTED
        }
        Err(e) => fail(e),
    }
}

fn cmd_blocks(catalog: &Catalog, command: BlocksCommand) -> u8 {
    match command {
        BlocksCommand::List => {
            let mut out = Vec::new();
            for b in catalog.blocks() {
                let pairs: Vec<(usize, usize)> = b.feasible().into_iter().collect();
                out.extend(json_line(&serde_json::json!({
                    "id": b.id,
                    "graph": b.source,
                    "lambda": b.lambda,
                    "parts": b.part_count(),
                    "feasible": pairs,
                })));
            }
            match emit(&out, None) {
                Ok(()) => EXIT_OK,
                Err(e) => fail(e),
            }
        }
        BlocksCommand::Check { id } => {
            let ids: Vec<String> = match id {
                Some(id) => vec![id],
                None => catalog.list_blocks().into_iter().map(String::from).collect(),
            };
            let mut failed = false;
            let mut total = 0;
            let mut out = Vec::new();
            for id in ids {
                let check = match catalog.check_block(&id) {
                    Ok(c) => c,
                    Err(e) => return fail(e),
                };
                total += check.certificates;
                for f in &check.failures {
                    eprintln!("{id}: {f}");
                }
                failed |= !check.failures.is_empty();
                out.extend(json_line(&serde_json::json!({
                    "id": check.id,
                    "certificates": check.certificates,
                    "valid": check.failures.is_empty(),
                    "feasible": check.feasible,
                })));
            }
            eprintln!("{total} certificates checked");
            if let Err(e) = emit(&out, None) {
                return fail(e);
            }
            if failed {
                EXIT_INVALID
            } else {
                EXIT_OK
            }
        }
    }
}

fn run() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Command::Verify { file } = cli.command {
        return cmd_verify(file);
    }
    let catalog = match Catalog::from_env() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    match cli.command {
        Command::Build { instance, p, q, out, trace } => cmd_build(&catalog, instance, p, q, out, trace),
        Command::Verify { .. } => unreachable!(),
        Command::Feasible { instance } => cmd_feasible(&catalog, instance),
        Command::Oracle(args) => cmd_oracle(&catalog, args),
        Command::Blocks { command } => cmd_blocks(&catalog, command),
    }
}

fn main() -> ExitCode {
    ExitCode::from(run())
}
