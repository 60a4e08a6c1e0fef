mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Rigidity and symmetry analysis of frameworks.
///
/// Exit status: 0 when every evaluated necessary condition holds, 1 when one
/// fails (the input is not isostatic), 2 on input or usage errors.
#[derive(Debug, Parser)]
#[command(name = "framesym", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, value_enum, default_value = "text", global = true)]
    pub format: Format,

    /// Relative rank tolerance.
    #[arg(long, default_value_t = 1e-8, global = true)]
    pub tol: f64,

    /// Fail unless the input is isostatic.
    #[arg(long, global = true)]
    pub require_isostatic: bool,

    /// Run every applicable counting rule.
    #[arg(long, global = true)]
    pub audit: bool,

    /// JSON list of vertex-id lists to audit as subframeworks.
    #[arg(long, global = true, conflicts_with = "enumerate")]
    pub subgraphs: Option<PathBuf>,

    /// Audit every proper connected induced subframework up to this size.
    #[arg(long, global = true, value_name = "MAX_VERTICES")]
    pub enumerate: Option<usize>,

    /// JSON vertex partition for the derived body framework audit.
    #[arg(long, global = true)]
    pub partition: Option<PathBuf>,

    /// Include mechanism basis vectors in the report.
    #[arg(long, global = true)]
    pub emit_flexes: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank, flexes and stresses of a bar-joint framework.
    Analyze { input: PathBuf },
    /// Spatial symmetry group and symmetry-equation residuals.
    Symmetry { input: PathBuf },
    /// Character table with per-element balance.
    Characters { input: PathBuf },
    /// Necessary conditions for isostaticity.
    Audit { input: PathBuf },
    /// Point-line constraint system.
    Pointline { input: PathBuf },
    /// Pin-jointed body framework.
    Body { input: PathBuf },
    /// Periodic framework on a fixed lattice.
    Periodic { input: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => {
            let failed = report.failed();
            let text = match cli.format {
                Format::Json => report.render_json(),
                Format::Text => report.render_text(),
            };
            print!("{text}");
            ExitCode::from(u8::from(failed))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
