//! Batch front end: verification campaigns, single measures on state files,
//! channel capacities, and the lattice bounds. All output is deterministic
//! for a fixed configuration; reports embed their full config.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 inequality
//! violations detected by a campaign.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use ckw_core::campaign::{run_campaign, CampaignConfig, CampaignKind};
use ckw_core::channels::{chi2_bruteforce, chi2_closed};
use ckw_core::io::{self};
use ckw_core::measures::{
    concurrence_two_qubit, linear_entropy, tangle_roof_upper, tangle_two_qubit,
};
use ckw_core::monogamy::{lattice_concurrence_bound, mean_field_gap_bound};

#[derive(Parser)]
#[command(
    name = "ckw",
    version,
    about = "Tangle, one-way correlation and qubit-channel capacity numerics with monogamy verification campaigns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification campaign and write a JSON report.
    Verify(VerifyArgs),
    /// Compute a single measure from a state file.
    Measure(MeasureArgs),
    /// Channel capacities and representations from a channel file.
    Channel(ChannelArgs),
    /// Lattice concurrence bound and mean-field gap bound.
    Bound(BoundArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// One of: ckw, tau-le-i2, chi2-agreement, koashi-winter,
    /// inductive-step, sigma-max, saturation.
    #[arg(long)]
    campaign: CampaignKind,
    /// Number of qubits (meaning depends on the campaign).
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Violation tolerance; defaults to the campaign-specific value.
    #[arg(long)]
    tol: Option<f64>,
    /// Roof-optimizer restarts where applicable.
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Report path; witness states are dumped next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureKind {
    Tangle,
    Concurrence,
    I2arrow,
    S2,
    TangleRoof,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(value_enum)]
    kind: MeasureKind,
    /// JSON state file.
    input: PathBuf,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Convergence tolerance for the roof optimizer.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Emit a JSON object with ensemble detail where available.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelCmdKind {
    Chi2,
    Chi2Brute,
    Bloch,
}

#[derive(Args)]
struct ChannelArgs {
    #[arg(value_enum)]
    kind: ChannelCmdKind,
    /// JSON channel file ({"kraus": ...} or {"bloch": {"L", "l"}}).
    #[arg(long)]
    channel: PathBuf,
    /// Single-qubit JSON state file (required for chi2 and chi2-brute).
    #[arg(long)]
    state: Option<PathBuf>,
    /// Sphere directions for the brute-force ensemble search.
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    /// Refinement iterations after the grid pass.
    #[arg(long, default_value_t = 60)]
    refine: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BoundArgs {
    /// Lattice coordination number.
    #[arg(long)]
    d: usize,
    /// Magnetization in [-1, 1].
    #[arg(long)]
    m: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Measure(args) => cmd_measure(args).map(|()| 0),
        Command::Channel(args) => cmd_channel(args).map(|()| 0),
        Command::Bound(args) => cmd_bound(args).map(|()| 0),
    }
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<u8> {
    let mut config = CampaignConfig::new(args.campaign);
    if let Some(q) = args.qubits {
        config.qubits = q;
    }
    config.samples = args.samples;
    config.seed = args.seed;
    if let Some(t) = args.tol {
        config.tolerance = t;
    }
    config.restarts = args.restarts;
    config.threads = args.threads;
    config.out = args.out;

    let report = run_campaign(&config)?;
    println!(
        "{}: samples {} violations {} min_residual {:e}",
        report.campaign, report.samples, report.violations, report.min_residual
    );
    if let Some(out) = &config.out {
        println!("report: {}", out.display());
    }
    Ok(if report.violations == 0 { 0 } else { 2 })
}

fn load_two_qubit(input: &PathBuf) -> anyhow::Result<ckw_core::states::DensityOperator> {
    let rho = io::read_state(input)?.to_density();
    if rho.dims().as_slice() != [2, 2] {
        bail!("wrong dims: expected [2, 2], got {:?}", rho.dims().as_slice());
    }
    Ok(rho)
}

fn ensemble_json(members: &[(f64, ckw_core::states::PureState)]) -> Vec<serde_json::Value> {
    members
        .iter()
        .map(|(p, psi)| {
            serde_json::json!({
                "p": p,
                "state": serde_json::from_str::<serde_json::Value>(&io::pure_to_json(psi))
                    .expect("writer output is valid JSON"),
            })
        })
        .collect()
}

fn cmd_measure(args: MeasureArgs) -> anyhow::Result<()> {
    let loaded = io::read_state(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    match args.kind {
        MeasureKind::S2 => {
            let rho = loaded.to_density();
            println!("{}", linear_entropy(&rho)?);
        }
        MeasureKind::Concurrence => {
            println!("{}", concurrence_two_qubit(&load_two_qubit(&args.input)?)?);
        }
        MeasureKind::Tangle => {
            println!("{}", tangle_two_qubit(&load_two_qubit(&args.input)?)?);
        }
        MeasureKind::I2arrow => {
            println!("{}", ckw_core::channels::i2_arrow(&load_two_qubit(&args.input)?)?);
        }
        MeasureKind::TangleRoof => {
            let rho = loaded.to_density();
            if rho.dims().len() != 2 || rho.dims().dim(0) != 2 {
                bail!(
                    "wrong dims: tangle-roof expects [2, D] dims, got {:?}",
                    rho.dims().as_slice()
                );
            }
            let roof = tangle_roof_upper(&rho, args.restarts, None, args.tol, args.seed)?;
            if args.json {
                let doc = serde_json::json!({
                    "value": roof.value,
                    "converged": roof.converged,
                    "restarts_used": roof.restarts_used,
                    "ensemble": ensemble_json(roof.ensemble.members()),
                });
                println!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                println!("{}", roof.value);
            }
        }
    }
    Ok(())
}

fn cmd_channel(args: ChannelArgs) -> anyhow::Result<()> {
    let channel = io::read_channel(&args.channel)
        .with_context(|| format!("reading {}", args.channel.display()))?;
    let load_qubit = |path: &Option<PathBuf>| -> anyhow::Result<ckw_core::states::DensityOperator> {
        let path = path.as_ref().ok_or_else(|| anyhow!("--state is required for this command"))?;
        let rho = io::read_state(path)?.to_density();
        if rho.dim() != 2 {
            bail!("wrong dims: expected a single qubit, got dimension {}", rho.dim());
        }
        Ok(rho)
    };
    match args.kind {
        ChannelCmdKind::Chi2 => {
            println!("{}", chi2_closed(&channel, &load_qubit(&args.state)?)?);
        }
        ChannelCmdKind::Chi2Brute => {
            let (value, ensemble) =
                chi2_bruteforce(&channel, &load_qubit(&args.state)?, args.grid, args.refine)?;
            if args.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "value": value,
                        "ensemble": ensemble_json(ensemble.members()),
                    }))?
                );
            } else {
                println!("{value}");
                for (p, psi) in ensemble.members() {
                    let amps: Vec<String> = psi
                        .amplitudes()
                        .iter()
                        .map(|z| format!("[{},{}]", z.re, z.im))
                        .collect();
                    println!("p={} state=[{}]", p, amps.join(","));
                }
            }
        }
        ChannelCmdKind::Bloch => {
            if args.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "L": channel.bloch_linear(),
                        "l": channel.bloch_shift(),
                    }))?
                );
            } else {
                for row in channel.bloch_linear() {
                    println!("L: {} {} {}", row[0], row[1], row[2]);
                }
                let l = channel.bloch_shift();
                println!("l: {} {} {}", l[0], l[1], l[2]);
            }
        }
    }
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> anyhow::Result<()> {
    let bound = lattice_concurrence_bound(args.d, args.m)?;
    let gap = mean_field_gap_bound(args.d, args.m)?;
    println!("{bound} {gap}");
    Ok(())
}
