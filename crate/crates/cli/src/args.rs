use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "trisect-kit", version, about = "Trisection, relative trisection and bridge trisection diagrams")]
pub struct Cli {
    /// Search budget (states explored per recognition search).
    #[arg(long, global = true, default_value_t = 2000)]
    pub budget: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Report)]
    pub format: OutputFormat,
    /// Write the primary output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tie-breaking seed; searches are deterministic, so this is recorded only.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Structured JSON report.
    Report,
    /// One-line human-readable summary.
    Summary,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate any diagram file according to its kind.
    Validate { file: PathBuf },
    /// Parameters, H₁, π₁ and χ of the described manifold.
    Invariants { file: PathBuf },
    /// Induced diagram on the orientation double cover.
    Cover { file: PathBuf },
    /// Connected sum with the genus-one S⁴ diagram in the given sector.
    Stabilize {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        sector: usize,
    },
    /// Connected sum of two diagrams.
    ConnectSum { first: PathBuf, second: PathBuf },
    /// Glue two relative diagrams along their boundaries.
    Glue {
        first: PathBuf,
        second: PathBuf,
        /// Circle identification `i:j[:offset[:r]]`; default matches circle i with i.
        #[arg(long = "match")]
        matching: Vec<String>,
    },
    /// Monodromy of the open book on the boundary of a relative diagram.
    Monodromy { file: PathBuf },
    /// Page of the boundary open book of a relative diagram.
    Page { file: PathBuf },
    /// Validate a shadow diagram.
    BridgeValidate { file: PathBuf },
    /// χ and component count of the surface of a shadow diagram.
    BridgeInvariants { file: PathBuf },
    /// Perturb a shadow diagram at a crossing of a shadow arc with an edge.
    Perturb {
        file: PathBuf,
        /// Family of the arc being cut: alpha, beta or gamma.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0)]
        arc: usize,
        #[arg(long, default_value_t = 0)]
        crossing: usize,
    },
    /// Undo a perturbation at two adjacent marks.
    Deperturb {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        marks: Vec<usize>,
    },
    /// Replay a move script (attached to the file, or given separately).
    ApplyMoves {
        file: PathBuf,
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Render a diagram as SVG.
    Render { file: PathBuf },
}
