//! Command line front end: summarize complexes, run filters against their
//! classical references, report realized projectors, and estimate costs.
//!
//! Every subcommand emits one JSON document (to `--out` or stdout) and exits
//! zero exactly when all checks it performs pass.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hodgeq_core::encoding::EncodingKind;
use hodgeq_core::homology::Component;

mod commands;

#[derive(Parser)]
#[command(name = "hodgeq", version, about = "Topological signal processing on clique complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Encoding {
    Direct,
    Compact,
}

impl From<Encoding> for EncodingKind {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::Direct => EncodingKind::Direct,
            Encoding::Compact => EncodingKind::Compact,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ComponentArg {
    #[value(name = "G")]
    Gradient,
    #[value(name = "C")]
    Curl,
    #[value(name = "H")]
    Harmonic,
    #[value(name = "lower")]
    Lower,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize the clique complex of a graph: simplex counts and Betti numbers
    Complex {
        /// Graph file: first line the vertex count, then one edge per line
        #[arg(long)]
        graph: PathBuf,
        /// Largest simplex dimension to enumerate
        #[arg(long, default_value_t = 2)]
        k_max: usize,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filter a simplicial signal and compare with the classical reference
    Filter {
        #[arg(long)]
        graph: PathBuf,
        /// Signal file: JSON list of {"simplex": [vertices], "value": float}
        #[arg(long)]
        signal: PathBuf,
        /// Dimension the signal lives on
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Encoding::Direct)]
        encoding: Encoding,
        /// Filter spec file, or a builtin: identity | gradient-proj |
        /// curl-proj | harmonic-proj | lower-proj
        #[arg(long)]
        spec: String,
        /// Spectral-gap parameter, required by the projector builtins
        #[arg(long)]
        kappa: Option<f64>,
        /// Target accuracy, required by the projector builtins
        #[arg(long)]
        eps: Option<f64>,
        /// Largest allowed l2 distance between the simulated and classical
        /// unit outputs of a spec-file or identity run
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Apply the filter classically and skip the circuit simulation
        #[arg(long)]
        classical_only: bool,
    },
    /// Realize a Hodge projector through the engine and bound its error
    Project {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Encoding::Direct)]
        encoding: Encoding,
        /// G = gradient, C = curl, H = harmonic, lower = minimum-norm potential map
        #[arg(long, value_enum)]
        component: ComponentArg,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate query counts, ancillas, and depth classes for one instance
    Resources {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Encoding::Direct)]
        encoding: Encoding,
        /// Degree of the lower-Laplacian series
        #[arg(long, default_value_t = 0)]
        d_lower: usize,
        /// Degree of the upper-Laplacian series
        #[arg(long, default_value_t = 0)]
        d_upper: usize,
        /// Harmonic response of the costed filter
        #[arg(long, default_value_t = 0.0)]
        h0: f64,
        /// Also cost a subcomponent projection at this gap parameter
        #[arg(long)]
        kappa: Option<f64>,
        /// Accuracy for the costed projection
        #[arg(long)]
        eps: Option<f64>,
        /// Cost the parallel-edge-check membership variant
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Complex { graph, k_max, out } => commands::cmd_complex(&graph, k_max, &out),
        Command::Filter {
            graph,
            signal,
            k,
            encoding,
            spec,
            kappa,
            eps,
            tol,
            out,
            classical_only,
        } => commands::cmd_filter(commands::FilterArgs {
            graph,
            signal,
            k,
            kind: encoding.into(),
            spec,
            kappa,
            eps,
            tol,
            out,
            classical_only,
        }),
        Command::Project { graph, k, encoding, component, kappa, eps, out } => {
            let target = match component {
                ComponentArg::Gradient => commands::ProjectTarget::Subspace(Component::Gradient),
                ComponentArg::Curl => commands::ProjectTarget::Subspace(Component::Curl),
                ComponentArg::Harmonic => commands::ProjectTarget::Subspace(Component::Harmonic),
                ComponentArg::Lower => commands::ProjectTarget::PotentialMap,
            };
            commands::cmd_project(&graph, k, encoding.into(), target, kappa, eps, &out)
        }
        Command::Resources {
            graph,
            k,
            encoding,
            d_lower,
            d_upper,
            h0,
            kappa,
            eps,
            parallel,
            out,
        } => commands::cmd_resources(
            &graph, k, encoding.into(), d_lower, d_upper, h0, kappa, eps, parallel, &out,
        ),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
