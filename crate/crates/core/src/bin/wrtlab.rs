use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use wrtlab::acceptance::{print_report, run_acceptance_suite, AcceptanceLevel};
use wrtlab::experiment::{run_experiment, ExperimentConfig, ModelKind, StatKind};
use wrtlab::limits::{self, GgpSpec, LimitChainSpec};
use wrtlab::rng::{master_rng, replicate_rng};
use wrtlab::sequences::SequenceSpec;
use wrtlab::stats;
use wrtlab::trees;
use wrtlab::urns;
use wrtlab::{oracle, pagraph};

#[derive(Parser)]
#[command(
    name = "wrtlab",
    about = "Growth, statistics and verification for weighted recursive and preferential-attachment trees",
    version
)]
struct Cli {
    /// Master seed; replicate streams are derived from it.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output path for the primary artifact of the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Grow one tree and write its parent list.
    Grow(GrowArgs),
    /// Tree statistics over replicate runs.
    Stats(StatsArgs),
    /// Urn processes: time-dependent, immigration, or nested tree growth.
    Urn(UrnArgs),
    /// Moments and samplers of the limiting laws.
    Limits(LimitsArgs),
    /// Exact verification certificates.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// (m, alpha) preferential-attachment multigraph runs.
    Pagraph(PagraphArgs),
    /// Run the acceptance suite.
    Accept(AcceptArgs),
}

#[derive(Args)]
struct GrowArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Sequence spec JSON, e.g. {"kind":"power","gamma":1.0,"c":1.0}.
    #[arg(long)]
    seq: String,
    #[arg(long)]
    n: usize,
    /// Also write the parent-choice trace to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Wrt,
    Pat,
}

#[derive(Args)]
struct StatsArgs {
    /// Full experiment config JSON file; overrides the other flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    seq: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, value_enum)]
    stat: Option<StatArg>,
    /// Transform argument for the laplace statistic.
    #[arg(long)]
    z: Option<f64>,
    /// Exponent for profile predictions (derived from the spec if omitted).
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatArg {
    Profile,
    Height,
    Laplace,
    Measures,
    Mrca,
    Degrees,
}

impl From<StatArg> for StatKind {
    fn from(s: StatArg) -> StatKind {
        match s {
            StatArg::Profile => StatKind::Profile,
            StatArg::Height => StatKind::Height,
            StatArg::Laplace => StatKind::Laplace,
            StatArg::Measures => StatKind::Measures,
            StatArg::Mrca => StatKind::Mrca,
            StatArg::Degrees => StatKind::Degrees,
        }
    }
}

#[derive(Args)]
struct UrnArgs {
    #[arg(long, value_enum)]
    kind: UrnKind,
    /// Parameter JSON; see README for the fields of each kind.
    #[arg(long)]
    params: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    replicates: u64,
    /// Emit every k-th step of each trajectory (0 = final state only).
    #[arg(long, default_value_t = 0)]
    every: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UrnKind {
    Timedep,
    Immigration,
    NestedPat,
}

#[derive(Args)]
struct LimitsArgs {
    #[arg(long, value_enum)]
    law: LawArg,
    /// Parameter JSON; see README for the fields of each law.
    #[arg(long)]
    params: String,
    /// Monte-Carlo sample count for sampled laws.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Highest moment order to report.
    #[arg(long, default_value_t = 3)]
    max_moment: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LawArg {
    Beta,
    Ml,
    Mlmc,
    Ggp,
    Ipggp,
    Chain,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Exact certificate that the attachment law equals the Beta-product
    /// mixture over all traces.
    Theorem1 {
        /// Fitness spec JSON (constant_fitness or periodic_fitness).
        #[arg(long)]
        fitness: String,
        #[arg(long)]
        n: usize,
    },
    /// Exact certificate for the (m, alpha) graph / tree coupling.
    PagraphCoupling {
        #[arg(long, value_delimiter = ',')]
        seed_degrees: Vec<u32>,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct PagraphArgs {
    #[arg(long, value_delimiter = ',')]
    seed_degrees: Vec<u32>,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    /// Print the scaled-degree report instead of writing edges.
    #[arg(long, default_value_t = false)]
    report: bool,
}

#[derive(Args)]
struct AcceptArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
    level: LevelArg,
    /// Override every criterion seed (the default is the pinned reference
    /// run).
    #[arg(long)]
    accept_seed: Option<u64>,
    /// Run a single criterion by id.
    #[arg(long)]
    criterion: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

fn out_writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn parse_seq(text: &str) -> Result<SequenceSpec> {
    serde_json::from_str(text).context("parsing sequence spec JSON")
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring worker pool")?;
    }
    match &cli.command {
        Command::Grow(args) => grow(&cli, args),
        Command::Stats(args) => run_stats(&cli, args),
        Command::Urn(args) => run_urn(&cli, args),
        Command::Limits(args) => run_limits(&cli, args),
        Command::Verify(cmd) => verify(&cli, cmd),
        Command::Pagraph(args) => run_pagraph(&cli, args),
        Command::Accept(args) => accept(&cli, args),
    }
}

fn grow(cli: &Cli, args: &GrowArgs) -> Result<()> {
    let spec = parse_seq(&args.seq)?;
    let mut rng = master_rng(cli.seed);
    let (tree, trace) = match args.model {
        ModelArg::Wrt => {
            let w = spec.build_weights(args.n)?;
            trees::grow_wrt(&w, args.n, &mut rng)?
        }
        ModelArg::Pat => {
            let f = spec.build_fitness(args.n)?;
            trees::grow_pat(&f, args.n, &mut rng)?
        }
    };
    let mut out = out_writer(&cli.out)?;
    match cli.format {
        Format::Csv => tree.write_parent_csv(&mut out)?,
        Format::Json => {
            let parents: Vec<usize> = (1..=tree.len())
                .map(|i| tree.parent(i).map(|p| p.unwrap_or(0)))
                .collect::<wrtlab::Result<_>>()?;
            serde_json::to_writer(&mut out, &serde_json::json!({ "parent": parents }))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if let Some(path) = &args.trace {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        trace.write_csv(&mut f)?;
        f.flush()?;
    }
    Ok(())
}

fn run_stats(cli: &Cli, args: &StatsArgs) -> Result<()> {
    let config: ExperimentConfig = if let Some(path) = &args.config {
        serde_json::from_reader(std::fs::File::open(path)?)
            .context("parsing experiment config")?
    } else {
        let (Some(model), Some(seq), Some(n), Some(stat)) =
            (args.model, args.seq.as_ref(), args.n, args.stat)
        else {
            bail!("either --config or all of --model/--seq/--n/--stat are required");
        };
        ExperimentConfig {
            model: match model {
                ModelArg::Wrt => ModelKind::Wrt,
                ModelArg::Pat => ModelKind::Pat,
            },
            seq: parse_seq(seq)?,
            ns: vec![n],
            replicates: args.replicates,
            seed: cli.seed,
            statistics: vec![stat.into()],
            z: args.z,
            gamma: args.gamma,
            out: None,
            tolerances: vec![],
        }
    };

    // the profile statistic has a pinned CSV shape: k,count,prediction
    if args.config.is_none() && args.stat == Some(StatArg::Profile) {
        let gamma = args
            .gamma
            .or_else(|| config.seq.gamma())
            .context("profile prediction needs --gamma or a spec with a known exponent")?;
        let summary = run_experiment(&config)?;
        let n = config.ns[0];
        let mut rows: BTreeMap<usize, f64> = BTreeMap::new();
        for e in &summary.entries {
            if let Some(k) = e.key.strip_prefix('k') {
                rows.insert(k.parse()?, e.mean);
            }
        }
        let mut out = out_writer(&cli.out)?;
        writeln!(out, "k,count,prediction")?;
        for (k, count) in rows {
            writeln!(
                out,
                "{},{},{}",
                k,
                count,
                stats::gaussian_profile_prediction(n, gamma, k)
            )?;
        }
        out.flush()?;
        return Ok(());
    }

    let mut config = config;
    if config.out.is_none() {
        config.out = cli.out.clone();
    }
    let summary = run_experiment(&config)?;
    serde_json::to_writer_pretty(std::io::stdout().lock(), &summary)?;
    println!();
    if !summary.pass {
        std::process::exit(1);
    }
    Ok(())
}

fn run_urn(cli: &Cli, args: &UrnArgs) -> Result<()> {
    #[derive(serde::Deserialize)]
    struct TimedepParams {
        a: f64,
        b: f64,
        #[serde(default = "one")]
        start_k: u64,
        #[serde(default = "onef")]
        s: f64,
    }
    fn one() -> u64 {
        1
    }
    fn onef() -> f64 {
        1.0
    }

    let mut out = out_writer(&cli.out)?;
    writeln!(out, "replicate,n,red,total")?;
    for r in 0..args.replicates {
        let mut rng = replicate_rng(cli.seed, r);
        let traj = match args.kind {
            UrnKind::Timedep => {
                let p: TimedepParams = serde_json::from_str(&args.params)?;
                let steps = vec![p.s; args.n];
                urns::run_time_dependent_urn(p.a, p.b, p.start_k, &steps, &mut rng)?
            }
            UrnKind::Immigration => {
                let spec = parse_seq(&args.params)?;
                let f = spec.build_fitness(args.n)?;
                urns::run_immigration_urn(&f, args.n, &mut rng)?
            }
            UrnKind::NestedPat => {
                let spec = parse_seq(&args.params)?;
                let f = spec.build_fitness(args.n)?;
                let (tree, _) = urns::grow_pat_via_urns(
                    &f,
                    args.n,
                    &mut rng,
                    urns::UrnGrowthMode::Exchangeable,
                )?;
                // root urn of the grown tree: red mass a_1 + deg(u_1)
                let red = f.a(1) + tree.out_degree(1) as f64;
                let total = f.cum_a(args.n) + args.n as f64 - 1.0;
                writeln!(out, "{},{},{},{}", r, args.n, red, total)?;
                continue;
            }
        };
        if args.every == 0 {
            let last = traj.times.len() - 1;
            writeln!(
                out,
                "{},{},{},{}",
                r, traj.times[last], traj.red[last], traj.total[last]
            )?;
        } else {
            for i in (0..traj.times.len()).step_by(args.every) {
                writeln!(
                    out,
                    "{},{},{},{}",
                    r, traj.times[i], traj.red[i], traj.total[i]
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn run_limits(cli: &Cli, args: &LimitsArgs) -> Result<()> {
    #[derive(serde::Deserialize)]
    struct BetaParams {
        a: f64,
        b: f64,
    }
    #[derive(serde::Deserialize)]
    struct MlParams {
        alpha: f64,
        theta: f64,
    }
    #[derive(serde::Deserialize)]
    struct MlmcParams {
        alpha: f64,
        theta: f64,
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_truncation")]
        truncation: usize,
    }
    #[derive(serde::Deserialize)]
    struct GgpParams {
        z: f64,
        r: f64,
        #[serde(default = "default_k")]
        k: usize,
    }
    #[derive(serde::Deserialize)]
    struct IpggpParams {
        a: f64,
        pattern: Vec<u32>,
        #[serde(default = "default_k")]
        k: usize,
    }
    #[derive(serde::Deserialize)]
    struct ChainParams {
        #[serde(flatten)]
        seq: SequenceSpec,
        c: Option<f64>,
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_truncation")]
        truncation: usize,
    }
    fn default_k() -> usize {
        1
    }
    fn default_truncation() -> usize {
        10_000
    }

    let mut rng = master_rng(cli.seed);
    let mut moments: BTreeMap<String, f64> = BTreeMap::new();
    match args.law {
        LawArg::Beta => {
            let p: BetaParams = serde_json::from_str(&args.params)?;
            for q in 0..=args.max_moment {
                moments.insert(q.to_string(), limits::beta_moment(p.a, p.b, q)?);
            }
        }
        LawArg::Ml => {
            let p: MlParams = serde_json::from_str(&args.params)?;
            for q in 0..=args.max_moment {
                moments.insert(q.to_string(), limits::ml_moment(p.alpha, p.theta, q)?);
            }
        }
        LawArg::Mlmc => {
            let p: MlmcParams = serde_json::from_str(&args.params)?;
            let mut acc = vec![0.0f64; args.max_moment as usize + 1];
            for _ in 0..args.samples {
                let s = limits::sample_mlmc(p.alpha, p.theta, p.k, p.truncation, &mut rng)?;
                let v = s.chain[p.k - 1];
                for (q, slot) in acc.iter_mut().enumerate() {
                    *slot += v.powi(q as i32);
                }
            }
            for (q, slot) in acc.iter().enumerate() {
                moments.insert(q.to_string(), slot / args.samples as f64);
            }
        }
        LawArg::Ggp => {
            let p: GgpParams = serde_json::from_str(&args.params)?;
            let spec = GgpSpec { z: p.z, r: p.r };
            let mut acc = vec![0.0f64; args.max_moment as usize + 1];
            for _ in 0..args.samples {
                let g = limits::sample_ggp(spec, p.k, &mut rng)?;
                for (q, slot) in acc.iter_mut().enumerate() {
                    *slot += g[p.k - 1].powi(q as i32);
                }
            }
            for (q, slot) in acc.iter().enumerate() {
                moments.insert(q.to_string(), slot / args.samples as f64);
            }
        }
        LawArg::Ipggp => {
            let p: IpggpParams = serde_json::from_str(&args.params)?;
            let mut acc = vec![0.0f64; args.max_moment as usize + 1];
            for _ in 0..args.samples {
                let g = limits::sample_ipggp(p.a, &p.pattern, p.k, &mut rng)?;
                for (q, slot) in acc.iter_mut().enumerate() {
                    *slot += g[p.k - 1].powi(q as i32);
                }
            }
            for (q, slot) in acc.iter().enumerate() {
                moments.insert(q.to_string(), slot / args.samples as f64);
            }
        }
        LawArg::Chain => {
            let p: ChainParams = serde_json::from_str(&args.params)?;
            let c = p
                .c
                .or_else(|| p.seq.mean_fitness())
                .context("chain law needs c or a fitness spec with known mean")?;
            let fitness = p.seq.build_fitness(p.truncation.max(p.k + 1))?;
            let spec = LimitChainSpec::for_fitness(&fitness, c);
            for q in 0..=args.max_moment {
                moments.insert(
                    q.to_string(),
                    limits::limit_chain_moment(&spec, p.k, q, p.truncation)?,
                );
            }
        }
    }
    let mut out = out_writer(&cli.out)?;
    serde_json::to_writer_pretty(&mut out, &moments)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn verify(cli: &Cli, cmd: &VerifyCommand) -> Result<()> {
    let pass = match cmd {
        VerifyCommand::Theorem1 { fitness, n } => {
            let spec = parse_seq(fitness)?;
            let f = spec.build_fitness((*n).max(2))?;
            let report = oracle::certify_theorem1(&f, *n)?;
            let mut out = out_writer(&cli.out)?;
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            out.flush()?;
            report.pass
        }
        VerifyCommand::PagraphCoupling {
            seed_degrees,
            m,
            alpha,
            n,
        } => {
            let report = pagraph::certify_pagraph_coupling(seed_degrees, *m, *alpha, *n)?;
            let mut out = out_writer(&cli.out)?;
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            out.flush()?;
            report.pass
        }
    };
    if !pass {
        std::process::exit(1);
    }
    Ok(())
}

fn run_pagraph(cli: &Cli, args: &PagraphArgs) -> Result<()> {
    if args.report {
        let report = pagraph::coupled_degree_limits(
            &args.seed_degrees,
            args.m,
            args.alpha,
            args.n,
            args.replicates,
            10,
            cli.seed,
        )?;
        let mut out = out_writer(&cli.out)?;
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
        out.flush()?;
        return Ok(());
    }
    let mut rng = master_rng(cli.seed);
    let g = pagraph::grow_pa_graph(&args.seed_degrees, args.m, args.alpha, args.n, &mut rng)?;
    let mut out = out_writer(&cli.out)?;
    g.write_edge_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn accept(cli: &Cli, args: &AcceptArgs) -> Result<()> {
    let level = match args.level {
        LevelArg::Fast => AcceptanceLevel::Fast,
        LevelArg::Full => AcceptanceLevel::Full,
    };
    if let Some(id) = args.criterion {
        let report = wrtlab::acceptance::run_criterion(id, level, args.accept_seed)
            .with_context(|| format!("no criterion with id {id}"))?;
        serde_json::to_writer_pretty(std::io::stdout().lock(), &report)?;
        println!();
        if !report.pass {
            std::process::exit(1);
        }
        return Ok(());
    }
    let report = run_acceptance_suite(level, args.accept_seed);
    print_report(&report, &mut std::io::stderr().lock())?;
    if let Some(path) = &cli.out {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(&mut f, &report)?;
        writeln!(f)?;
        f.flush()?;
    }
    if !report.pass {
        std::process::exit(1);
    }
    Ok(())
}
