use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use river_put::bench::{run_bench, write_csv, BenchConfig, Dispersion, DEFAULT_MAX_ATTEMPTS};
use river_put::oracle::DEFAULT_UNIVERSE_LIMIT;
use river_put::synth::{generate_where, mallows_sample, phi_from_norm_phi};
use river_put::{
    fun_diagram, parse_profile, parse_soc, verify_certificate, Error, MallowsConfig, MarginGraph, Rule, RuleOptions,
    Tiebreaker,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "river-put",
    version,
    about = "River winners under parallel-universe tiebreaking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the winner set of a rule.
    Winners(WinnersArgs),
    /// Build and replay the winning certificate of one alternative.
    Certificate(CertificateArgs),
    /// Emit the fused-universe diagram.
    Diagram(DiagramArgs),
    /// Sample Mallows profiles.
    Generate(GenerateArgs),
    /// Time rules over a grid of generated elections and write CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// Profile file; `.soc` files are read as PrefLib complete orders.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Margin graph JSON.
    #[arg(long)]
    margin_graph: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TextOrJson {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DotOrJson {
    Dot,
    Json,
}

#[derive(Args)]
struct WinnersArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_parser = parse_rule)]
    rule: Rule,
    /// One `x>y` edge per line, required by river and ranked-pairs.
    #[arg(long)]
    tiebreaker: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: TextOrJson,
    #[arg(long, default_value_t = DEFAULT_UNIVERSE_LIMIT)]
    universe_limit: u64,
}

#[derive(Args)]
struct CertificateArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    alternative: String,
}

#[derive(Args)]
struct DiagramArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "json")]
    format: DotOrJson,
}

#[derive(Args)]
#[group(multiple = false)]
struct DispersionArgs {
    /// Raw Mallows dispersion in (0, 1]; defaults to 1 (uniform).
    #[arg(long)]
    phi: Option<f64>,
    /// Normalized dispersion in (0, 1], converted per number of alternatives.
    #[arg(long)]
    norm_phi: Option<f64>,
}

impl DispersionArgs {
    fn dispersion(&self) -> Dispersion {
        match (self.phi, self.norm_phi) {
            (_, Some(norm)) => Dispersion::NormPhi(norm),
            (phi, None) => Dispersion::Phi(phi.unwrap_or(1.0)),
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    alternatives: usize,
    #[arg(long)]
    voters: usize,
    #[command(flatten)]
    dispersion: DispersionArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of profiles; more than one requires `--out` to name a directory.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Resample until there is no Condorcet winner.
    #[arg(long)]
    no_condorcet: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
    max_attempts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', value_parser = parse_rule, required = true)]
    rules: Vec<Rule>,
    #[arg(long, value_delimiter = ',', required = true)]
    alternatives: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    voters: Vec<usize>,
    /// Instances per (alternatives, voters) cell.
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[command(flatten)]
    dispersion: DispersionArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seconds allowed per polynomial-time run.
    #[arg(long, default_value_t = 5.0)]
    timeout: f64,
    /// Seconds allowed per brute-force run.
    #[arg(long, default_value_t = 60.0)]
    brute_timeout: f64,
    #[arg(long, default_value_t = DEFAULT_UNIVERSE_LIMIT)]
    universe_limit: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
    max_attempts: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_rule(s: &str) -> Result<Rule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_graph(input: &Input) -> anyhow::Result<MarginGraph> {
    if let Some(path) = &input.margin_graph {
        let text = read(path)?;
        return MarginGraph::parse_json(&text).with_context(|| format!("reading {}", path.display()));
    }
    let path = input.profile.as_ref().expect("clap enforces one input");
    let text = read(path)?;
    let profile = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("soc")) {
        parse_soc(&text)
    } else {
        parse_profile(&text)
    };
    Ok(profile
        .with_context(|| format!("reading {}", path.display()))?
        .margins())
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn winners(args: &WinnersArgs) -> anyhow::Result<ExitCode> {
    let g = load_graph(&args.input)?;
    let tiebreaker = match &args.tiebreaker {
        Some(path) => Some(Tiebreaker::parse(&g, &read(path)?).with_context(|| format!("reading {}", path.display()))?),
        None if args.rule.needs_tiebreaker() => {
            bail!(Error::InvalidConfig(format!(
                "rule `{}` requires --tiebreaker FILE",
                args.rule
            )))
        }
        None => None,
    };
    let opts = RuleOptions {
        tiebreaker: tiebreaker.as_ref(),
        universe_limit: args.universe_limit,
        deadline: None,
    };
    let names: Vec<&str> = args.rule.winners(&g, &opts)?.into_iter().map(|a| g.name(a)).collect();
    match args.format {
        TextOrJson::Text => println!("{}", names.join(" ")),
        TextOrJson::Json => {
            let report = json!({ "rule": args.rule.name(), "alternatives": g.m(), "winners": names });
            println!("{report}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn certificate(args: &CertificateArgs) -> anyhow::Result<ExitCode> {
    let g = load_graph(&args.input)?;
    let Some(a) = g.id_of(&args.alternative) else {
        bail!("unknown alternative `{}`", args.alternative);
    };
    let c = verify_certificate(&g, a)?;
    println!("{}", serde_json::to_string(&c.to_json(&g))?);
    Ok(if c.verified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn diagram(args: &DiagramArgs) -> anyhow::Result<ExitCode> {
    let g = load_graph(&args.input)?;
    let d = fun_diagram(&g)?;
    match args.format {
        DotOrJson::Dot => print!("{}", d.to_dot(&g)),
        DotOrJson::Json => println!("{}", serde_json::to_string(&d.to_json(&g))?),
    }
    Ok(ExitCode::SUCCESS)
}

fn generate(args: &GenerateArgs) -> anyhow::Result<ExitCode> {
    let phi = match args.dispersion.dispersion() {
        Dispersion::Phi(phi) => phi,
        Dispersion::NormPhi(norm) => phi_from_norm_phi(args.alternatives, norm)?,
    };
    if args.count == 0 {
        bail!(Error::InvalidConfig("--count must be at least 1".into()));
    }
    if args.count > 1 {
        let Some(dir) = &args.out else {
            bail!(Error::InvalidConfig("--count above 1 needs --out DIR".into()));
        };
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let mut seed = args.seed;
    for i in 0..args.count {
        let cfg = MallowsConfig::new(args.alternatives, args.voters, phi, seed);
        let (profile, used) = if args.no_condorcet {
            generate_where(&cfg, args.max_attempts, |g| g.condorcet_winner().is_none())?
        } else {
            (mallows_sample(&cfg)?, seed)
        };
        seed = used.wrapping_add(1);
        let target = match &args.out {
            Some(dir) if args.count > 1 => Some(dir.join(format!("profile_{i:03}.prof"))),
            other => other.clone(),
        };
        emit(target.as_deref(), &profile.to_text())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(args: &BenchArgs) -> anyhow::Result<ExitCode> {
    let seconds = |s: f64, flag: &str| {
        Duration::try_from_secs_f64(s)
            .map_err(|_| Error::InvalidConfig(format!("{flag} must be a non-negative number")))
    };
    let cfg = BenchConfig {
        rules: args.rules.clone(),
        alternatives: args.alternatives.clone(),
        voters: args.voters.clone(),
        instances: args.count,
        dispersion: args.dispersion.dispersion(),
        seed: args.seed,
        poly_timeout: seconds(args.timeout, "--timeout")?,
        brute_timeout: seconds(args.brute_timeout, "--brute-timeout")?,
        universe_limit: args.universe_limit,
        max_attempts: args.max_attempts,
        jobs: args.jobs,
    };
    for &m in &cfg.alternatives {
        let phi = cfg.dispersion.phi_for(m)?;
        for &n in &cfg.voters {
            MallowsConfig::new(m, n, phi, 0).validate()?;
        }
    }
    let records = run_bench(&cfg)?;
    let mut csv = Vec::new();
    write_csv(&mut csv, &records)?;
    emit(args.out.as_deref(), std::str::from_utf8(&csv)?)?;
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonStrictMarginGraph) => 3,
        Some(Error::UniverseLimitExceeded { .. } | Error::TimedOut) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Winners(a) => winners(a),
        Command::Certificate(a) => certificate(a),
        Command::Diagram(a) => diagram(a),
        Command::Generate(a) => generate(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
