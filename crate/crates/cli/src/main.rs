use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use baldwin_lab::experiments::{self, ConfigFile, ExperimentId, ExperimentSpec, Overrides};
use baldwin_lab::genotype::{InitDistribution, MutationKind};
use baldwin_lab::TrajectorySchedule;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "baldwin-lab", version, about = "Bias-shift and Baldwin-effect experiments")]
struct Cli {
    /// Worker threads for fitness evaluation. Results do not depend on it.
    #[arg(long, global = true, env = "BALDWIN_LAB_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSVs, a summary and a manifest.
    Run(RunArgs),
    /// Print an analytic table.
    Tables(TablesArgs),
    /// Re-run an experiment and compare its summary with a baseline file.
    Verify(VerifyArgs),
}

#[derive(Args, Default)]
struct RunOptions {
    /// exp1..exp6, hn, harvey, pure-learning, pure-instinct
    #[arg(long)]
    experiment: Option<ExperimentId>,
    /// Comma-separated noise levels.
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    generations: Option<u32>,
    #[arg(long)]
    pop: Option<usize>,
    /// evolved | fixed:S | ramp:START:END:N | pure-learning | pure-instinct
    #[arg(long)]
    schedule: Option<TrajectorySchedule>,
    #[arg(long)]
    crossover: Option<f64>,
    #[arg(long)]
    mutation: Option<f64>,
    #[arg(long, value_enum)]
    mutation_kind: Option<MutationArg>,
    /// uniform | skewed-strong
    #[arg(long)]
    init: Option<InitDistribution>,
    /// Flat `key = value` file; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    Flip,
    Resample,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    opts: RunOptions,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    opts: RunOptions,
    #[arg(long)]
    baseline: PathBuf,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, value_parser = ["1", "5", "7", "8"])]
    which: String,
    /// Bias strength for tables 7 and 8.
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    /// Noise level for tables 7 and 8.
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    /// Generations of the evolved runs behind table 5.
    #[arg(long)]
    generations: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunOptions {
    fn resolve(self) -> Result<(ExperimentSpec, ConfigFile)> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                experiments::parse_config(&text)?
            }
            None => ConfigFile::default(),
        };
        let Some(id) = self.experiment.or(file.experiment) else {
            bail!("--experiment is required (or `experiment = ...` in the config file)");
        };
        let flags = Overrides {
            noise: self.noise,
            seed: self.seed,
            generations: self.generations,
            population: self.pop,
            schedule: self.schedule,
            crossover_rate: self.crossover,
            mutation_rate: self.mutation,
            mutation_kind: self.mutation_kind.map(|k| match k {
                MutationArg::Flip => MutationKind::Flip,
                MutationArg::Resample => MutationKind::Resample,
            }),
            init: self.init,
        };
        let overrides = flags.or(file.overrides.clone());
        Ok((ExperimentSpec::with_overrides(id, overrides), file))
    }
}

fn install_pool(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(args: RunArgs, threads: Option<usize>) -> Result<ExitCode> {
    let (spec, file) = args.opts.resolve()?;
    install_pool(threads.or(file.threads))?;
    let out = args.out.or(file.out).unwrap_or_else(|| PathBuf::from("results"));
    let output = experiments::run_experiment(&spec, &out)?;
    for path in &output.manifest.outputs {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", output.manifest.summary.display());
    print!("{}", experiments::summary_csv(&output.results));
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs, threads: Option<usize>) -> Result<ExitCode> {
    let (spec, file) = args.opts.resolve()?;
    install_pool(threads.or(file.threads))?;
    let report = experiments::verify(&spec, Path::new(&args.baseline))?;
    for check in &report.checks {
        println!("{check}");
    }
    if report.passed() {
        println!("verify {}: PASS", spec.id);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verify {}: FAIL", spec.id);
        Ok(ExitCode::from(1))
    }
}

fn tables(args: TablesArgs, threads: Option<usize>) -> Result<ExitCode> {
    let text = match args.which.as_str() {
        "1" => experiments::table1(),
        "5" => {
            install_pool(threads)?;
            let overrides = Overrides { generations: args.generations, seed: args.seed, ..Default::default() };
            let runs = experiments::run_configs(&ExperimentSpec::with_overrides(ExperimentId::Exp1, overrides))?;
            experiments::table5(&runs)
        }
        _ => experiments::table78(args.s, args.p)?,
    };
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a, cli.threads),
        Command::Verify(a) => verify(a, cli.threads),
        Command::Tables(a) => tables(a, cli.threads),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
