use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tcpstab::multibottleneck::CoeffVariant;
use tcpstab::Variant;
use tcpstab_cli::{configure_jobs, execute, CliError, Command, Format, Options, Scenario};

#[derive(Parser)]
#[command(name = "tcpstab", version, about = "Fluid-model stability lab for TCP window dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, global = true, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long = "coeff-variant", global = true, value_enum)]
    coeff_variant: Option<CoeffArg>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Equilibrium window and loss probability.
    Equilibrium,
    /// Scalar verdicts and rightmost root, or the two-bottleneck analysis.
    Stability,
    /// Region labels over an (alpha, B) grid.
    Chart,
    /// Integrate the nonlinear delay equations.
    Simulate,
    /// Classify simulations over a parameter sweep.
    Bifurcation,
    /// Case I / Case II analysis of the two-bottleneck topology.
    Multibottleneck,
    /// Finite-buffer queue occupancy distribution.
    QueueDist,
    /// B = C RTT / sqrt(N).
    BufferRule,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Plain,
    #[value(name = "ack_weighted")]
    AckWeighted,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoeffArg {
    Extended,
    Appendix,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let command = match cli.command {
        Cmd::Equilibrium => Command::Equilibrium,
        Cmd::Stability => Command::Stability,
        Cmd::Chart => Command::Chart,
        Cmd::Simulate => Command::Simulate,
        Cmd::Bifurcation => Command::Bifurcation,
        Cmd::Multibottleneck => Command::Multibottleneck,
        Cmd::QueueDist => Command::QueueDist,
        Cmd::BufferRule => Command::BufferRule,
    };
    let path = cli.scenario.ok_or_else(|| CliError::Input("--scenario <path> is required".into()))?;
    let scenario = Scenario::load(&path)?;
    let opts = Options {
        variant: cli.variant.map(|v| match v {
            VariantArg::Plain => Variant::Plain,
            VariantArg::AckWeighted => Variant::AckWeighted,
        }),
        coeff_variant: cli.coeff_variant.map(|v| match v {
            CoeffArg::Extended => CoeffVariant::Extended,
            CoeffArg::Appendix => CoeffVariant::Appendix,
        }),
        format: cli.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
        exec: configure_jobs(cli.jobs)?,
    };
    let text = execute(command, &scenario, &opts)?;
    match cli.out {
        Some(p) => std::fs::write(&p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("tcpstab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(4),
    }
}
