//! `zecap` — zero-error feedback capacity toolkit for state-dependent
//! channels.
//!
//! Subcommands: `check` (positivity conditions), `capacity` (formula
//! evaluation), `codec` (plan / run / verify the single-bit codecs),
//! `oracle` (brute-force feasibility), `bins` (covering bins). Exit codes
//! encode tool health only — 2 for unusable input, 1 for internal failure,
//! 0 otherwise; mathematical verdicts are data.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use zecap_core::bins::build_covering_bins;
use zecap_core::capacity::{self, SolverOptions};
use zecap_core::channel::{self, CostSpec, SupportChannel};
use zecap_core::codec;
use zecap_core::conditions::{self, SearchLimits, Verdict};
use zecap_core::error::Error;
use zecap_core::ktype::JointKType;
use zecap_core::oracle;

#[derive(Parser)]
#[command(
    name = "zecap",
    about = "Zero-error feedback capacity of state-dependent channels",
    version
)]
struct Cli {
    /// Write the machine-readable run report to this path.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Seed for every randomized component.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Absolute tolerance in bits for the iterative optimizers.
    #[arg(long, global = true, default_value_t = 1e-3)]
    tol: f64,
    /// Node budget for the search-based commands.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the positivity/feasibility condition checkers.
    Check {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, value_enum, default_value_t = CheckMode::All)]
        mode: CheckMode,
        /// State-cost budget for the state-constrained check.
        #[arg(long)]
        lambda_budget: Option<f64>,
    },
    /// Evaluate a capacity formula.
    Capacity {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, value_enum)]
        formula: FormulaArg,
        /// Input-cost budget (cc-inputs, or constrained shannon/ahlswede).
        #[arg(long)]
        gamma_budget: Option<f64>,
        /// State-cost budget (cc-states).
        #[arg(long)]
        lambda_budget: Option<f64>,
        /// Outer grid resolution.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Run the nested optimizer even where a closed form applies.
        #[arg(long)]
        force_optimizer: bool,
    },
    /// Plan, run, or verify the single-bit codec.
    Codec {
        #[command(subcommand)]
        action: CodecAction,
    },
    /// Brute-force zero-error feasibility at small block lengths.
    Oracle {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Block length.
        #[arg(long)]
        n: usize,
        /// Message count.
        #[arg(long, default_value_t = 2)]
        messages: usize,
        #[arg(long, value_enum, default_value_t = OracleMode::Acausal)]
        mode: OracleMode,
        /// Write the feasible encoder decision tree to this path.
        #[arg(long)]
        dump_strategy: Option<PathBuf>,
    },
    /// Build covering bins for a joint k-type.
    Bins {
        /// Expected block length; must match the type file's counts.
        #[arg(long)]
        k: Option<usize>,
        /// Path to a JSON joint-type file: {"na": int, "nb": int,
        /// "counts": [[..], ..]} with counts summing to k.
        #[arg(long)]
        type_file: PathBuf,
        /// Covering slack in bits.
        #[arg(long)]
        eps: f64,
        /// Redraw attempts before reporting failure.
        #[arg(long, default_value_t = 50)]
        retries: u32,
        /// Write the bins to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel document path or builtin name (gp-table1, gp-table2,
    /// stuck-at-one, mod3, tri-2x2x3, identity-k).
    channel: String,
    /// Keep only these states (comma-separated indices), re-packed.
    #[arg(long, value_delimiter = ',')]
    keep_states: Option<Vec<usize>>,
    /// Override the per-input cost vector.
    #[arg(long, value_delimiter = ',')]
    input_cost: Option<Vec<f64>>,
    /// Override the per-state cost vector.
    #[arg(long, value_delimiter = ',')]
    state_cost: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckMode {
    Acausal,
    Causal,
    Nofb,
    States,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaArg {
    Shannon,
    Ahlswede,
    Causal,
    StrictlyCausal,
    Acausal,
    Deterministic,
    RateState,
    CcInputs,
    CcStates,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMode {
    Acausal,
    Causal,
    StrictlyCausal,
    Nofb,
}

#[derive(Subcommand)]
enum CodecAction {
    /// Print the codec plan.
    Plan {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Plan the no-feedback codec (searches for a certificate).
        #[arg(long)]
        no_feedback: bool,
        /// Caller-chosen phase-2 length; picks the smallest fitting n1.
        #[arg(long)]
        n2: Option<usize>,
    },
    /// Replay one transcript.
    Run {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 0)]
        bit: usize,
        /// Comma-separated state sequence; random when omitted.
        #[arg(long, value_delimiter = ',')]
        states: Option<Vec<usize>>,
        #[arg(long)]
        no_feedback: bool,
    },
    /// Walk output paths and assert the zero-error property.
    Verify {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        exhaustive: bool,
        /// Sampled state-sequence count (used when not exhaustive).
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        no_feedback: bool,
    },
}

/// Machine-readable run record. The payload is a pure function of the
/// inputs and seed; wall time lives outside it.
#[derive(Serialize)]
struct RunReport {
    command: String,
    channel_fingerprint: Option<String>,
    seed: u64,
    payload: serde_json::Value,
    wall_ms: u128,
}

fn main() -> ExitCode {
    // Die quietly when a pipe reader closes early instead of panicking on
    // the next print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli) {
        Ok((fingerprint, payload)) => {
            if let Some(path) = &cli.json {
                let report = RunReport {
                    command: std::env::args().collect::<Vec<_>>().join(" "),
                    channel_fingerprint: fingerprint,
                    seed: cli.seed,
                    payload,
                    wall_ms: started.elapsed().as_millis(),
                };
                match serde_json::to_string_pretty(&report)
                    .map_err(anyhow::Error::from)
                    .and_then(|s| std::fs::write(path, s).map_err(anyhow::Error::from))
                {
                    Ok(()) => {}
                    Err(e) => {
                        eprintln!("error: cannot write report: {e}");
                        return ExitCode::from(1);
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            // Unusable input exits 2; everything else is an internal failure.
            let is_usage = e.downcast_ref::<UsageError>().is_some();
            ExitCode::from(if is_usage { 2 } else { 1 })
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn load_channel(args: &ChannelArgs) -> anyhow::Result<SupportChannel> {
    let mut ch = if std::path::Path::new(&args.channel).exists() {
        let text = std::fs::read_to_string(&args.channel)
            .with_context(|| format!("reading {}", args.channel))
            .map_err(|e| usage(format!("{e:#}")))?;
        channel::parse_channel(&text).map_err(|e| usage(format!("{e}")))?
    } else {
        channel::builtin(&args.channel).map_err(|e| {
            usage(format!(
                "`{}` is neither a readable file nor a builtin: {e}",
                args.channel
            ))
        })?
    };
    if let Some(keep) = &args.keep_states {
        ch = channel::restrict_states(&ch, keep).map_err(|e| usage(e.to_string()))?;
    }
    if let Some(cost) = &args.input_cost {
        ch.set_input_cost(cost.clone())
            .map_err(|e| usage(e.to_string()))?;
    }
    if let Some(cost) = &args.state_cost {
        ch.set_state_cost(cost.clone())
            .map_err(|e| usage(e.to_string()))?;
    }
    Ok(ch)
}

fn print_verdict(v: &Verdict) {
    println!(
        "{}: {}{}",
        v.condition.as_str(),
        if v.holds { "YES" } else { "NO" },
        verdict_detail(v)
    );
}

fn verdict_detail(v: &Verdict) -> String {
    use zecap_core::conditions::{Counterexample, Witness};
    match (&v.witness, &v.counterexample) {
        (_, Some(Counterexample::StatePair { s, s_prime })) => {
            format!(" (s={s}, s'={s_prime})")
        }
        (_, Some(Counterexample::OutputTrap { s, y })) => format!(" (s={s}, y={y})"),
        (_, Some(Counterexample::CostedStatePair { s, s_prime, .. })) => {
            format!(" (s={s}, s'={s_prime})")
        }
        (Some(Witness::Certificate(c)), _) => format!(" (kappa={}, lambda={})", c.kappa, c.lambda),
        (Some(Witness::Partition { y0, y1, .. }), _) => format!(" (Y0={y0:?}, Y1={y1:?})"),
        _ => String::new(),
    }
}

fn solver_options(cli: &Cli, grid: usize, force: bool) -> SolverOptions {
    SolverOptions {
        tol: cli.tol,
        grid_resolution: grid,
        seed: cli.seed,
        force_optimizer: force,
        ..Default::default()
    }
}

fn run(cli: &Cli) -> anyhow::Result<(Option<String>, serde_json::Value)> {
    match &cli.command {
        Command::Check {
            channel: chargs,
            mode,
            lambda_budget,
        } => {
            let ch = load_channel(chargs)?;
            let mut verdicts: Vec<Verdict> = Vec::new();
            let mut budget_exhausted = false;
            if matches!(mode, CheckMode::Acausal | CheckMode::All) {
                verdicts.push(conditions::check_acausal_positive(&ch));
                verdicts.push(conditions::check_phase1_feasible(&ch));
            }
            if matches!(mode, CheckMode::Causal | CheckMode::All) {
                verdicts.push(conditions::check_causal_positive(&ch)?);
            }
            if matches!(mode, CheckMode::Nofb | CheckMode::All) {
                verdicts.push(conditions::check_nofb_sufficient_zero(&ch));
                let limits = SearchLimits {
                    node_budget: cli.budget.unwrap_or(10_000_000),
                    ..Default::default()
                };
                match conditions::search_nofb_positive_certificate(&ch, &limits) {
                    Ok(v) => verdicts.push(v),
                    Err(Error::BudgetExhausted { .. }) => budget_exhausted = true,
                    Err(e) => return Err(e.into()),
                }
            }
            if matches!(mode, CheckMode::States | CheckMode::All) {
                if let Some(budget) = lambda_budget {
                    let lambda = ch
                        .state_cost()
                        .ok_or_else(|| usage("state-constrained check needs --state-cost"))?
                        .to_vec();
                    verdicts.push(conditions::check_ccstates_necessary(
                        &ch,
                        &CostSpec::state(lambda, *budget),
                    )?);
                } else if matches!(mode, CheckMode::States) {
                    return Err(usage("--mode states needs --lambda-budget"));
                }
            }
            println!("channel: {}", ch.name());
            for v in &verdicts {
                print_verdict(v);
            }
            if budget_exhausted {
                println!("bl:suffCondCapWithoutFBPositive: UNKNOWN (budget exhausted)");
            }
            Ok((
                Some(channel::fingerprint(&ch)),
                json!({ "verdicts": verdicts, "budget_exhausted": budget_exhausted }),
            ))
        }
        Command::Capacity {
            channel: chargs,
            formula,
            gamma_budget,
            lambda_budget,
            grid,
            force_optimizer,
        } => {
            let ch = load_channel(chargs)?;
            let opts = solver_options(cli, *grid, *force_optimizer);
            let input_spec = |budget: &Option<f64>| -> anyhow::Result<CostSpec> {
                let gamma = ch
                    .input_cost()
                    .ok_or_else(|| usage("this formula needs --input-cost"))?;
                let b = budget.ok_or_else(|| usage("this formula needs --gamma-budget"))?;
                Ok(CostSpec::input(gamma.to_vec(), b))
            };
            let result = match formula {
                FormulaArg::Shannon => {
                    let stateless = ch.as_stateless().map_err(|e| usage(e.to_string()))?;
                    match gamma_budget {
                        None => capacity::shannon_fb_capacity(&stateless)?,
                        Some(_) => capacity::shannon_fb_capacity_constrained(
                            &stateless,
                            &input_spec(gamma_budget)?,
                        )?,
                    }
                }
                FormulaArg::Ahlswede => {
                    let stateless = ch.as_stateless().map_err(|e| usage(e.to_string()))?;
                    let spec = match gamma_budget {
                        None => None,
                        Some(_) => Some(input_spec(gamma_budget)?),
                    };
                    capacity::ahlswede_capacity(&stateless, spec.as_ref(), &opts)?
                }
                FormulaArg::Causal => capacity::causal_fb_capacity(&ch, &opts)?,
                FormulaArg::StrictlyCausal => capacity::strictly_causal_capacity(&ch)?,
                FormulaArg::Acausal => capacity::acausal_fb_capacity(&ch, &opts)?,
                FormulaArg::Deterministic => capacity::deterministic_acausal_capacity(&ch)?,
                FormulaArg::RateState => capacity::rate_and_state_capacity(&ch, &opts)?,
                FormulaArg::CcInputs => {
                    capacity::ccinputs_capacity(&ch, &input_spec(gamma_budget)?, &opts)?
                }
                FormulaArg::CcStates => {
                    let lambda = ch
                        .state_cost()
                        .ok_or_else(|| usage("cc-states needs --state-cost"))?;
                    let b =
                        lambda_budget.ok_or_else(|| usage("cc-states needs --lambda-budget"))?;
                    capacity::ccstates_capacity(&ch, &CostSpec::state(lambda.to_vec(), b), &opts)?
                }
            };
            println!("channel:   {}", ch.name());
            println!("value:     {:.6} bits", result.value);
            println!("positive:  {}", result.positive_flag);
            println!("capacity:  {:.6} bits", result.capacity());
            println!("gap est.:  {:.2e}", result.gap_estimate);
            if !result.positive_flag && result.value > 0.0 {
                println!(
                    "warning: the positivity condition fails; the value above is only \
                     the formula RHS and the zero-error capacity is 0"
                );
            }
            Ok((
                Some(channel::fingerprint(&ch)),
                serde_json::to_value(&result)?,
            ))
        }
        Command::Codec { action } => run_codec(cli, action),
        Command::Oracle {
            channel: chargs,
            n,
            messages,
            mode,
            dump_strategy,
        } => {
            let ch = load_channel(chargs)?;
            let limits = oracle::OracleLimits {
                node_budget: cli.budget.unwrap_or(100_000_000),
                ..Default::default()
            };
            let result = match mode {
                OracleMode::Nofb => oracle::nofb_zero_error_feasible(&ch, *n, *messages, &limits)?,
                OracleMode::Acausal => oracle::fb_zero_error_feasible(
                    &ch,
                    *n,
                    *messages,
                    oracle::SiMode::Acausal,
                    &limits,
                )?,
                OracleMode::Causal => oracle::fb_zero_error_feasible(
                    &ch,
                    *n,
                    *messages,
                    oracle::SiMode::Causal,
                    &limits,
                )?,
                OracleMode::StrictlyCausal => oracle::fb_zero_error_feasible(
                    &ch,
                    *n,
                    *messages,
                    oracle::SiMode::StrictlyCausal,
                    &limits,
                )?,
            };
            println!("channel: {}", ch.name());
            println!(
                "verdict: {}",
                match result.verdict {
                    oracle::OracleVerdict::Feasible => "feasible",
                    oracle::OracleVerdict::Infeasible => "infeasible",
                    oracle::OracleVerdict::Unknown => "unknown",
                }
            );
            println!(
                "nodes: {}  memo hits: {}  budget exhausted: {}",
                result.stats.nodes, result.stats.memo_hits, result.stats.budget_exhausted
            );
            if let (Some(path), Some(strategy)) = (dump_strategy, &result.strategy) {
                std::fs::write(path, serde_json::to_string_pretty(strategy)?)?;
                println!("strategy written to {}", path.display());
            }
            Ok((
                Some(channel::fingerprint(&ch)),
                serde_json::to_value(&result)?,
            ))
        }
        Command::Bins {
            k,
            type_file,
            eps,
            retries,
            out,
        } => {
            let text = std::fs::read_to_string(type_file)
                .with_context(|| format!("reading {}", type_file.display()))
                .map_err(|e| usage(format!("{e:#}")))?;
            let doc: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| usage(format!("malformed type file: {e}")))?;
            let na = doc["na"]
                .as_u64()
                .ok_or_else(|| usage("type file needs `na`"))? as usize;
            let nb = doc["nb"]
                .as_u64()
                .ok_or_else(|| usage("type file needs `nb`"))? as usize;
            let rows = doc["counts"]
                .as_array()
                .ok_or_else(|| usage("type file needs `counts`"))?;
            let mut counts = Vec::with_capacity(na * nb);
            for row in rows {
                for v in row
                    .as_array()
                    .ok_or_else(|| usage("counts must be a 2D array"))?
                {
                    counts
                        .push(v.as_u64().ok_or_else(|| usage("counts must be integers"))? as usize);
                }
            }
            let joint =
                JointKType::new(na, nb, counts).map_err(|e| usage(format!("invalid type: {e}")))?;
            if let Some(k) = k {
                if joint.k != *k {
                    return Err(usage(format!(
                        "--k {} disagrees with the type file's block length {}",
                        k, joint.k
                    )));
                }
            }
            match build_covering_bins(&joint, *eps, cli.seed, *retries) {
                Ok(family) => {
                    println!(
                        "theta: {}  bins: {:?}  retries: {}",
                        family.theta,
                        family.sizes(),
                        family.retries
                    );
                    if let Some(path) = out {
                        std::fs::write(path, serde_json::to_string_pretty(&family)?)?;
                        println!("bins written to {}", path.display());
                    }
                    Ok((None, serde_json::to_value(&family)?))
                }
                Err(Error::CoveringNotFound { retries }) => {
                    // A legitimate outcome at small k, not a tool failure.
                    println!("no covering family found after {retries} retries");
                    Ok((None, json!({ "covering_found": false, "retries": retries })))
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn run_codec(
    cli: &Cli,
    action: &CodecAction,
) -> anyhow::Result<(Option<String>, serde_json::Value)> {
    let plan_for = |ch: &SupportChannel,
                    no_feedback: bool,
                    n2: Option<usize>|
     -> anyhow::Result<codec::BitCodecPlan> {
        if no_feedback {
            let limits = SearchLimits {
                node_budget: cli.budget.unwrap_or(10_000_000),
                ..Default::default()
            };
            let verdict = conditions::search_nofb_positive_certificate(ch, &limits)?;
            match verdict.witness {
                Some(conditions::Witness::Certificate(cert)) => {
                    Ok(codec::plan_bit_codec_nofb(ch, &cert)?)
                }
                _ => Err(anyhow!(
                    "no positivity certificate found; the no-feedback codec needs one"
                )),
            }
        } else {
            let sizing = match n2 {
                Some(n2) => codec::PlanSizing::MinimalN1 { n2 },
                None => codec::PlanSizing::Standard,
            };
            Ok(codec::plan_bit_codec_fb(ch, sizing)?)
        }
    };
    match action {
        CodecAction::Plan {
            channel: chargs,
            no_feedback,
            n2,
        } => {
            let ch = load_channel(chargs)?;
            match plan_for(&ch, *no_feedback, *n2) {
                Ok(plan) => {
                    println!("channel: {}", ch.name());
                    println!(
                        "n1={} n2={} nbit={} chunks={}",
                        plan.n1, plan.n2, plan.nbit, plan.chunks
                    );
                    Ok((
                        Some(channel::fingerprint(&ch)),
                        serde_json::to_value(&plan)?,
                    ))
                }
                Err(e) => {
                    // A failed positivity condition is data: report cleanly.
                    if let Some(Error::NotPositive { s, s_prime }) = e.downcast_ref::<Error>() {
                        println!("channel: {}", ch.name());
                        println!("no plan: channel fails eq:positive at (s={s}, s'={s_prime})");
                        return Ok((
                            Some(channel::fingerprint(&ch)),
                            json!({ "plan": null, "fails": "eq:positive",
                                    "s": s, "s_prime": s_prime }),
                        ));
                    }
                    Err(e)
                }
            }
        }
        CodecAction::Run {
            channel: chargs,
            bit,
            states,
            no_feedback,
        } => {
            let ch = load_channel(chargs)?;
            let plan = plan_for(&ch, *no_feedback, None)?;
            let states: Vec<usize> = match states {
                Some(s) => s.clone(),
                None => {
                    let mut rng = zecap_core::rng::SplitMix64::new(cli.seed);
                    (0..plan.nbit)
                        .map(|_| rng.below(ch.ns() as u64) as usize)
                        .collect()
                }
            };
            let t = codec::run_transcript(&ch, &plan, *bit, &states, cli.seed)?;
            println!("bit:     {}", t.bit);
            println!("states:  {:?}", t.states);
            println!("inputs:  {:?}", t.inputs);
            println!("outputs: {:?}", t.outputs);
            println!("decoded: {}", t.decoded);
            Ok((Some(channel::fingerprint(&ch)), serde_json::to_value(&t)?))
        }
        CodecAction::Verify {
            channel: chargs,
            exhaustive,
            samples,
            no_feedback,
        } => {
            let ch = load_channel(chargs)?;
            let plan = plan_for(&ch, *no_feedback, None)?;
            let mode = if *exhaustive {
                codec::VerifyMode::Exhaustive
            } else {
                codec::VerifyMode::Sampled {
                    count: *samples,
                    seed: cli.seed,
                }
            };
            let report = codec::verify_bit_codec(&ch, &plan, mode)?;
            println!("channel:      {}", ch.name());
            println!("sequences:    {}", report.sequences);
            println!("paths:        {}", report.paths);
            println!("violations:   {}", report.violations);
            println!("max survivor: {}", report.max_survivor);
            for check in &report.bound_checks {
                println!(
                    "  {:<24} checked {:<10} violations {}",
                    check.name, check.checked, check.violations
                );
            }
            Ok((
                Some(channel::fingerprint(&ch)),
                serde_json::to_value(&report)?,
            ))
        }
    }
}
