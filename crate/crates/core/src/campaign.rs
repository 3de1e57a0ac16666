//! Batch verification campaigns: deterministic seeded sampling, per-sample
//! residual evaluation, ordered aggregation into a MonogamyReport, and
//! witness dumps for any sample that lands below tolerance.
//!
//! Per-sample seeds are campaign seed + sample index, so any single sample
//! reproduces in isolation. Parallel runs fold in sample order and yield
//! byte-identical reports.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{chi2_bruteforce, chi2_closed, random_channel};
use crate::error::{Error, Result};
use crate::io;
use crate::monogamy::{
    ckw_residual, inductive_step_check, koashi_winter_residual, sigma_max_vs_concurrence,
    tau_le_i2,
};
use crate::qlinalg::DimsVector;
use crate::states::{
    compress_tail, random_mixed, random_pure, saturating_state, w_state, DensityOperator,
    PureState,
};

/// Two-sided agreement tolerance for the chi2 closed form vs its oracle.
pub const CHI2_AGREEMENT_TOL: f64 = 1e-6;
/// Upper-side round-off allowance for the Koashi-Winter residual.
pub const KW_UPPER_TOL: f64 = 1e-9;
/// Focus-tangle deviation allowed for the maximally entangled saturating state.
pub const SATURATION_FOCUS_TOL: f64 = 1e-12;
/// Grid and refinement depth used by the chi2 oracle inside campaigns.
pub const CHI2_GRID: usize = 4096;
pub const CHI2_REFINE: usize = 60;

/// Seed offset separating the state stream from the channel stream in the
/// chi2 campaign (golden-ratio increment).
const STATE_STREAM_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignKind {
    Ckw,
    TauLeI2,
    Chi2Agreement,
    KoashiWinter,
    InductiveStep,
    SigmaMax,
    Saturation,
}

impl CampaignKind {
    pub const ALL: [CampaignKind; 7] = [
        CampaignKind::Ckw,
        CampaignKind::TauLeI2,
        CampaignKind::Chi2Agreement,
        CampaignKind::KoashiWinter,
        CampaignKind::InductiveStep,
        CampaignKind::SigmaMax,
        CampaignKind::Saturation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CampaignKind::Ckw => "ckw",
            CampaignKind::TauLeI2 => "tau-le-i2",
            CampaignKind::Chi2Agreement => "chi2-agreement",
            CampaignKind::KoashiWinter => "koashi-winter",
            CampaignKind::InductiveStep => "inductive-step",
            CampaignKind::SigmaMax => "sigma-max",
            CampaignKind::Saturation => "saturation",
        }
    }

    /// Campaign-appropriate violation tolerance: inequality campaigns run at
    /// round-off scale, optimizer-backed ones absorb convergence slack.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            CampaignKind::KoashiWinter => 1e-4,
            CampaignKind::InductiveStep => 1e-6,
            _ => 1e-9,
        }
    }

    pub fn default_qubits(&self) -> usize {
        match self {
            CampaignKind::Ckw => 4,
            CampaignKind::TauLeI2 | CampaignKind::SigmaMax => 2,
            CampaignKind::Chi2Agreement => 1,
            CampaignKind::KoashiWinter | CampaignKind::InductiveStep => 4,
            CampaignKind::Saturation => 5,
        }
    }
}

impl fmt::Display for CampaignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CampaignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CampaignKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown campaign '{s}'")))
    }
}

/// Everything a campaign run needs; echoed verbatim into the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub campaign: CampaignKind,
    pub qubits: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub restarts: usize,
    pub out: Option<PathBuf>,
    pub threads: usize,
}

impl CampaignConfig {
    pub fn new(campaign: CampaignKind) -> Self {
        Self {
            campaign,
            qubits: campaign.default_qubits(),
            samples: 1000,
            seed: 1,
            tolerance: campaign.default_tolerance(),
            restarts: 20,
            out: None,
            threads: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be > 0".into()));
        }
        if self.restarts < 1 {
            return Err(Error::Config("restarts must be >= 1".into()));
        }
        if self.threads < 1 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        let q = self.qubits;
        let ok = match self.campaign {
            CampaignKind::Ckw => (2..=10).contains(&q),
            CampaignKind::TauLeI2 | CampaignKind::SigmaMax => q == 2,
            CampaignKind::Chi2Agreement => q == 1,
            CampaignKind::KoashiWinter => (3..=4).contains(&q),
            CampaignKind::InductiveStep => (3..=10).contains(&q),
            CampaignKind::Saturation => (3..=10).contains(&q),
        };
        if !ok {
            return Err(Error::Config(format!(
                "campaign {} does not support qubits = {q}",
                self.campaign
            )));
        }
        Ok(())
    }
}

/// Campaign summary with full reproducibility metadata. Rerunning the same
/// config reproduces the report bit-for-bit except `wall_time_s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonogamyReport {
    pub campaign: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub min_residual: f64,
    pub violations: usize,
    pub witnesses: Vec<String>,
    pub wall_time_s: f64,
    pub version: String,
    pub config: CampaignConfig,
}

/// State dumped to disk when a sample violates its tolerance.
#[derive(Debug, Clone)]
enum WitnessState {
    Pure(PureState),
    Mixed(DensityOperator),
}

#[derive(Debug, Clone)]
struct SampleOutcome {
    seed: u64,
    /// The tightest residual this sample produced.
    min_residual: f64,
    violations: usize,
    witness: Option<WitnessState>,
}

fn eval_ckw(config: &CampaignConfig, index: u64) -> Result<SampleOutcome> {
    let seed = config.seed.wrapping_add(index);
    let psi = random_pure(&DimsVector::qubits(config.qubits), seed)?;
    let foci: Vec<usize> =
        if config.qubits <= 4 { (0..config.qubits).collect() } else { vec![0] };
    let mut min_residual = f64::INFINITY;
    for focus in foci {
        let sample = ckw_residual(&psi, focus)?;
        min_residual = min_residual.min(sample.residual);
    }
    let violated = min_residual < -config.tolerance;
    Ok(SampleOutcome {
        seed,
        min_residual,
        violations: usize::from(violated),
        witness: violated.then_some(WitnessState::Pure(psi)),
    })
}

fn eval_tau_le_i2(config: &CampaignConfig, index: u64) -> Result<SampleOutcome> {
    let seed = config.seed.wrapping_add(index);
    let rank = 1 + (index as usize % 4);
    let rho = random_mixed(4, rank, seed)?.with_dims(&[2, 2])?;
    let sample = tau_le_i2(&rho)?;
    let violated = sample.residual < -config.tolerance;
    Ok(SampleOutcome {
        seed,
        min_residual: sample.residual,
        violations: usize::from(violated),
        witness: violated.then_some(WitnessState::Mixed(rho)),
    })
}

fn eval_chi2(config: &CampaignConfig, index: u64) -> Result<SampleOutcome> {
    let seed = config.seed.wrapping_add(index);
    let channel = random_channel(seed);
    let rho = random_mixed(2, 2, seed.wrapping_add(STATE_STREAM_OFFSET))?;
    let closed = chi2_closed(&channel, &rho)?;
    let (brute, _) = chi2_bruteforce(&channel, &rho, CHI2_GRID, CHI2_REFINE)?;
    let residual = closed - brute;
    // The oracle may never exceed the closed form, and must agree with it
    // at a converged grid.
    let violations =
        usize::from(residual < -config.tolerance) + usize::from(residual > CHI2_AGREEMENT_TOL);
    Ok(SampleOutcome {
        seed,
        min_residual: residual,
        violations,
        witness: (violations > 0).then_some(WitnessState::Mixed(rho)),
    })
}

fn eval_koashi_winter(config: &CampaignConfig, index: u64) -> Result<SampleOutcome> {
    let seed = config.seed.wrapping_add(index);
    let d_c = 1 << (config.qubits - 2);
    let psi = random_pure(&DimsVector::new(&[2, 2, d_c])?, seed)?;
    let residual = koashi_winter_residual(&psi, config.restarts, seed)?;
    let violations =
        usize::from(residual < -config.tolerance) + usize::from(residual > KW_UPPER_TOL);
    Ok(SampleOutcome {
        seed,
        min_residual: residual,
        violations,
        witness: (violations > 0).then_some(WitnessState::Pure(psi)),
    })
}

fn eval_inductive(config: &CampaignConfig, index: u64) -> Result<SampleOutcome> {
    let seed = config.seed.wrapping_add(index);
    let tail = 1 << (config.qubits - 2);
    let psi = random_pure(&DimsVector::qubits(config.qubits), seed)?
        .regroup(&[2, 2, tail])?;
    let compressed = compress_tail(&psi)?;
    let sample = inductive_step_check(&compressed.density(), config.restarts, seed)?;
    let violated = sample.residual < -config.tolerance;
    Ok(SampleOutcome {
        seed,
        min_residual: sample.residual,
        violations: usize::from(violated),
        witness: violated.then_some(WitnessState::Pure(compressed)),
    })
}

fn eval_sigma_max(config: &CampaignConfig, index: u64) -> Result<SampleOutcome> {
    let seed = config.seed.wrapping_add(index);
    let rho = random_mixed(4, 4, seed)?.with_dims(&[2, 2])?;
    let sample = sigma_max_vs_concurrence(&rho)?;
    let violated = sample.residual < -config.tolerance;
    Ok(SampleOutcome {
        seed,
        min_residual: sample.residual,
        violations: usize::from(violated),
        witness: violated.then_some(WitnessState::Mixed(rho)),
    })
}

/// Saturation checks are deterministic: the W state must saturate at every
/// focus, and the maximally entangled saturating state must reach focus
/// tangle 1 while saturating too.
fn saturation_outcomes(config: &CampaignConfig) -> Result<Vec<SampleOutcome>> {
    let n = config.qubits;
    let mut outcomes = Vec::new();

    let w = w_state(n)?;
    for focus in 0..n {
        let sample = ckw_residual(&w, focus)?;
        let violated = sample.residual.abs() > config.tolerance;
        outcomes.push(SampleOutcome {
            seed: focus as u64,
            min_residual: sample.residual,
            violations: usize::from(violated),
            witness: violated.then_some(WitnessState::Pure(w.clone())),
        });
    }

    let sat = saturating_state(n - 1)?;
    let sample = ckw_residual(&sat, 0)?;
    let focus_gap = (sample.lhs - 1.0).abs();
    let violations = usize::from(sample.residual.abs() > config.tolerance)
        + usize::from(focus_gap > SATURATION_FOCUS_TOL);
    outcomes.push(SampleOutcome {
        seed: n as u64,
        min_residual: sample.residual,
        violations,
        witness: (violations > 0).then_some(WitnessState::Pure(sat)),
    });
    Ok(outcomes)
}

fn write_witness(out: &Path, seed: u64, witness: &WitnessState) -> Result<String> {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let name = format!("{stem}.witness-{seed}.json");
    let path = out.with_file_name(&name);
    match witness {
        WitnessState::Pure(psi) => io::write_pure(&path, psi)?,
        WitnessState::Mixed(rho) => io::write_mixed(&path, rho)?,
    }
    Ok(path.to_string_lossy().into_owned())
}

/// Run a verification campaign and aggregate the outcome deterministically.
/// Violating samples are dumped as witness state files next to the report
/// when an output path is configured.
pub fn run_campaign(config: &CampaignConfig) -> Result<MonogamyReport> {
    config.validate()?;
    let start = Instant::now();

    let eval: fn(&CampaignConfig, u64) -> Result<SampleOutcome> = match config.campaign {
        CampaignKind::Ckw => eval_ckw,
        CampaignKind::TauLeI2 => eval_tau_le_i2,
        CampaignKind::Chi2Agreement => eval_chi2,
        CampaignKind::KoashiWinter => eval_koashi_winter,
        CampaignKind::InductiveStep => eval_inductive,
        CampaignKind::SigmaMax => eval_sigma_max,
        CampaignKind::Saturation => |c: &CampaignConfig, _| {
            unreachable!("saturation handled separately: {:?} {}", c.campaign, 0)
        },
    };

    let outcomes: Vec<SampleOutcome> = if config.campaign == CampaignKind::Saturation {
        saturation_outcomes(config)?
    } else if config.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..config.samples as u64)
                .into_par_iter()
                .map(|i| eval(config, i))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        (0..config.samples as u64)
            .map(|i| eval(config, i))
            .collect::<Result<Vec<_>>>()?
    };

    // Deterministic fold in sample order.
    let mut min_residual = f64::INFINITY;
    let mut violations = 0usize;
    let mut witnesses = Vec::new();
    for outcome in &outcomes {
        min_residual = min_residual.min(outcome.min_residual);
        violations += outcome.violations;
        if let Some(w) = &outcome.witness {
            if let Some(out) = &config.out {
                witnesses.push(write_witness(out, outcome.seed, w)?);
            } else {
                witnesses.push(format!("sample-seed:{}", outcome.seed));
            }
        }
    }

    let report = MonogamyReport {
        campaign: config.campaign.name().to_owned(),
        n: config.qubits,
        samples: outcomes.len(),
        seed: config.seed,
        tolerance: config.tolerance,
        min_residual,
        violations,
        witnesses,
        wall_time_s: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: config.clone(),
    };

    if let Some(out) = &config.out {
        std::fs::write(out, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(report)
}
