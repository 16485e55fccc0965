use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

/// Revealed-preference tests, certificates, maximin preferences and demand
/// bounds for finite consumer data.
///
/// Input files are CSV with header `p1..pL,x1..xL`, one observation per row.
#[derive(Debug, Parser)]
#[command(name = "weakrp", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Tolerance for every weak/strict comparison.
    #[arg(long, global = true, default_value_t = weakrp::DEFAULT_TOL)]
    pub tol: f64,
    /// Seed for randomized audits.
    #[arg(long, global = true, default_value_t = weakrp::selfcheck::DEFAULT_SEED)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// JSON output (the default).
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// CSV output, where the report has a tabular form.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Exit with status 2 when the data violate the axiom a command needs.
    #[arg(long, global = true)]
    pub strict_exit: bool,
    /// Cap on enumerated price sign patterns (`3^T`).
    #[arg(long, global = true, default_value_t = 3u64.pow(12))]
    pub max_patterns: u64,
    /// Cap on candidate assignments visited by the binary search.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub max_nodes: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the data against one or all axioms.
    Test {
        input: PathBuf,
        #[arg(long, default_value = "all")]
        axiom: AxiomArg,
    },
    /// Certifying numbers and their residuals.
    Numbers {
        input: PathBuf,
        #[arg(long)]
        system: NumberSystem,
        /// `ε` of the strict construction; defaults to 1e-6 times the
        /// largest expenditure.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Maximin preference `r(x, y)`.
    Prefer {
        input: PathBuf,
        #[arg(long, value_parser = parse_vector)]
        x: Vector,
        #[arg(long, value_parser = parse_vector)]
        y: Vector,
        /// Use the strict family (requires WARP).
        #[arg(long)]
        strict: bool,
    },
    /// Membership of `y` in a recoverability bound around `x`.
    Bounds {
        input: PathBuf,
        #[arg(long, value_parser = parse_vector)]
        x: Vector,
        #[arg(long, value_parser = parse_vector, required_unless_present = "grid")]
        y: Option<Vector>,
        #[arg(long)]
        set: Option<SetArg>,
        /// Axiom defining the supporting sets of `rp` and `nrw`.
        #[arg(long, default_value = "wgarp")]
        axiom: AxiomArg,
        /// Sweep an `n` per axis grid of candidates and emit a CSV point cloud.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// W-demand membership and bounding box at a new price.
    Counterfactual {
        input: PathBuf,
        #[arg(long, value_parser = parse_vector)]
        price: Vector,
        #[arg(long, value_parser = parse_vector)]
        bundle: Option<Vector>,
        /// Budget at the new price; defaults to the cost of `--bundle`, or 1.
        #[arg(long)]
        wealth: Option<f64>,
        /// Grid resolution of the box audit.
        #[arg(long = "box")]
        box_resolution: Option<usize>,
    },
    /// Quasilinear numbers, utility, preference and constant multipliers.
    Quasilinear {
        input: PathBuf,
        #[arg(long)]
        op: QlOp,
        #[arg(long, value_parser = parse_vector)]
        z: Option<Vector>,
        #[arg(long, value_parser = parse_vector)]
        x: Option<Vector>,
        #[arg(long, value_parser = parse_vector)]
        y: Option<Vector>,
    },
    /// Run the acceptance criteria.
    Selfcheck {
        /// Run a single criterion (1 to 9).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
        criterion: Option<u8>,
    },
}

pub type Vector = Vec<f64>;

fn parse_vector(s: &str) -> Result<Vector, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxiomArg {
    All,
    Warp,
    Wgarp,
    Sarp,
    Garp,
    Lod,
    Slod,
}

impl AxiomArg {
    pub fn axioms(self) -> Vec<weakrp::axioms::Axiom> {
        use weakrp::axioms::Axiom;
        match self {
            AxiomArg::All => Axiom::ALL.to_vec(),
            AxiomArg::Warp => vec![Axiom::Warp],
            AxiomArg::Wgarp => vec![Axiom::Wgarp],
            AxiomArg::Sarp => vec![Axiom::Sarp],
            AxiomArg::Garp => vec![Axiom::Garp],
            AxiomArg::Lod => vec![Axiom::LawOfDemand],
            AxiomArg::Slod => vec![Axiom::StrongLaw],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NumberSystem {
    Afriat,
    Strict,
    Varian,
    Pairwise,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetArg {
    Rp,
    Nrw,
    Rpw,
    Nrww,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QlOp {
    Numbers,
    Utility,
    Prefer,
    Theoremd,
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILED: u8 = 1;
    pub const VIOLATION: u8 = 2;
    pub const CAP: u8 = 3;
    pub const USAGE: u8 = 64;
    pub const SOFTWARE: u8 = 70;
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("WEAKRP_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("WEAKRP_THREADS: not a count: {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("usage error: {e}");
        return ExitCode::from(exit::USAGE);
    }
    let out = commands::run(&cfg);
    if let Some(msg) = &out.diagnostic {
        eprintln!("{msg}");
    }
    if let Some(text) = &out.text {
        let written = match &cfg.common.output {
            Some(path) => std::fs::write(path, text),
            None => std::io::stdout().lock().write_all(text.as_bytes()),
        };
        if let Err(e) = written {
            eprintln!("cannot write report: {e}");
            return ExitCode::from(exit::SOFTWARE);
        }
    }
    ExitCode::from(out.code)
}
