//! Canonical experiments, their output files, and baseline verification.
//!
//! Each [`ExperimentId`] maps to one configuration template. Resolving an
//! [`ExperimentSpec`] expands that template over the requested noise levels
//! (HN runs have no noise and resolve to a single configuration) and applies
//! any overrides. Running writes one CSV time series per configuration, a
//! summary CSV with the table columns, and a JSON manifest.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::appendix;
use crate::concept;
use crate::error::{Error, Result};
use crate::ga::{self, GaConfig, GenerationStats, GenomeKind, RunResult, RunSummary};
use crate::genotype::{InitDistribution, MutationKind, GENE_COUNT};
use crate::trajectory::TrajectorySchedule;

pub const DEFAULT_NOISE_LEVELS: [f64; 3] = [0.001, 0.005, 0.01];
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Exp1,
    Exp2,
    Exp3,
    Exp4,
    Exp5,
    Exp6,
    Hn,
    Harvey,
    PureLearning,
    PureInstinct,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::Exp1,
        ExperimentId::Exp2,
        ExperimentId::Exp3,
        ExperimentId::Exp4,
        ExperimentId::Exp5,
        ExperimentId::Exp6,
        ExperimentId::Hn,
        ExperimentId::Harvey,
        ExperimentId::PureLearning,
        ExperimentId::PureInstinct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Exp1 => "exp1",
            ExperimentId::Exp2 => "exp2",
            ExperimentId::Exp3 => "exp3",
            ExperimentId::Exp4 => "exp4",
            ExperimentId::Exp5 => "exp5",
            ExperimentId::Exp6 => "exp6",
            ExperimentId::Hn => "hn",
            ExperimentId::Harvey => "harvey",
            ExperimentId::PureLearning => "pure-learning",
            ExperimentId::PureInstinct => "pure-instinct",
        }
    }

    pub fn is_hn(self) -> bool {
        matches!(self, ExperimentId::Hn | ExperimentId::Harvey)
    }

    /// The configuration template, before noise level and overrides.
    pub fn template(self) -> GaConfig {
        let base = GaConfig::default();
        let forced = |schedule| GaConfig {
            genome_kind: GenomeKind::DirectionOnly,
            schedule,
            ..base.clone()
        };
        let fixed = |s| forced(TrajectorySchedule::Fixed { strength: s });
        match self {
            ExperimentId::Exp1 => base,
            ExperimentId::Exp2 => GaConfig { init: InitDistribution::SkewedStrong, ..base },
            ExperimentId::Exp3 => fixed(0.75),
            ExperimentId::Exp4 => fixed(0.5),
            ExperimentId::Exp5 => fixed(0.25),
            ExperimentId::Exp6 => forced(TrajectorySchedule::Ramp { start: 0.0, end: 1.0, generations: 5000 }),
            ExperimentId::Hn => GaConfig { genome_kind: GenomeKind::Hn, generations: 50, noise_p: 0.0, ..base },
            ExperimentId::Harvey => GaConfig { genome_kind: GenomeKind::Hn, noise_p: 0.0, ..base },
            ExperimentId::PureLearning => forced(TrajectorySchedule::PureLearning),
            ExperimentId::PureInstinct => forced(TrajectorySchedule::PureInstinct),
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = ExperimentId::ALL.iter().map(|i| i.name()).collect();
                Error::Usage(format!("unknown experiment {s:?}; expected one of {}", known.join(", ")))
            })
    }
}

/// Optional replacements for template fields.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub noise: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub generations: Option<u32>,
    pub population: Option<usize>,
    pub schedule: Option<TrajectorySchedule>,
    pub crossover_rate: Option<f64>,
    pub mutation_rate: Option<f64>,
    pub mutation_kind: Option<MutationKind>,
    pub init: Option<InitDistribution>,
}

impl Overrides {
    /// Fill unset fields from `fallback`.
    pub fn or(self, fallback: Overrides) -> Overrides {
        Overrides {
            noise: self.noise.or(fallback.noise),
            seed: self.seed.or(fallback.seed),
            generations: self.generations.or(fallback.generations),
            population: self.population.or(fallback.population),
            schedule: self.schedule.or(fallback.schedule),
            crossover_rate: self.crossover_rate.or(fallback.crossover_rate),
            mutation_rate: self.mutation_rate.or(fallback.mutation_rate),
            mutation_kind: self.mutation_kind.or(fallback.mutation_kind),
            init: self.init.or(fallback.init),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub overrides: Overrides,
}

impl ExperimentSpec {
    pub fn new(id: ExperimentId) -> Self {
        ExperimentSpec { id, overrides: Overrides::default() }
    }

    pub fn with_overrides(id: ExperimentId, overrides: Overrides) -> Self {
        ExperimentSpec { id, overrides }
    }
}

/// Expand a spec into validated configurations, one per noise level.
pub fn resolve(spec: &ExperimentSpec) -> Result<Vec<GaConfig>> {
    let o = &spec.overrides;
    let mut template = spec.id.template();
    template.master_seed = o.seed.unwrap_or(DEFAULT_SEED);
    if let Some(g) = o.generations {
        template.generations = g;
    }
    if let Some(n) = o.population {
        template.population_size = n;
    }
    if let Some(r) = o.crossover_rate {
        template.crossover_rate = r;
    }
    if let Some(r) = o.mutation_rate {
        template.mutation_rate = r;
    }
    if let Some(k) = o.mutation_kind {
        template.mutation_kind = k;
    }
    if let Some(init) = o.init {
        template.init = init;
    }
    if let Some(schedule) = o.schedule {
        if spec.id.is_hn() {
            if !schedule.is_evolved() {
                return Err(Error::Usage(format!("{} runs take no strength schedule", spec.id)));
            }
        } else {
            // A forced schedule removes the strength genes.
            template.genome_kind = if schedule.is_evolved() { GenomeKind::Full } else { GenomeKind::DirectionOnly };
            template.schedule = schedule;
        }
    }

    let noise_levels: Vec<f64> = if spec.id.is_hn() {
        vec![0.0]
    } else {
        o.noise.clone().unwrap_or_else(|| DEFAULT_NOISE_LEVELS.to_vec())
    };
    if noise_levels.is_empty() {
        return Err(Error::Usage("at least one noise level is required".into()));
    }
    noise_levels
        .into_iter()
        .map(|p| {
            let config = GaConfig { noise_p: p, ..template.clone() };
            config.validate().map_err(|e| Error::Usage(e.to_string()))?;
            Ok(config)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Formatting

/// Decimal rendering with `sig` significant digits.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn num(x: f64) -> String {
    format_sig(x, 6)
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "NA".into(), |v| v.to_string())
}

pub const BIAS_CSV_HEADER: &str = "generation,avg_fitness,avg_bias_strength,avg_bias_correctness";
pub const HN_CSV_HEADER: &str = "generation,freq_zero,freq_one,freq_question,avg_fitness";

/// Per-generation time series. HN runs use the allele-frequency schema.
pub fn stats_csv(stats: &[GenerationStats], kind: GenomeKind) -> String {
    let mut out = String::new();
    if kind == GenomeKind::Hn {
        out.push_str(HN_CSV_HEADER);
        out.push('\n');
        for s in stats {
            let f = s.allele_freqs.unwrap_or_default();
            out.push_str(&format!("{},{},{},{},{}\n", s.generation, num(f[0]), num(f[1]), num(f[2]), num(s.avg_fitness)));
        }
    } else {
        out.push_str(BIAS_CSV_HEADER);
        out.push('\n');
        for s in stats {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.generation,
                num(s.avg_fitness),
                num(s.avg_bias_strength),
                num(s.avg_bias_correctness)
            ));
        }
    }
    out
}

/// Columns of the summary file, in order.
pub const SUMMARY_COLUMNS: [&str; 14] = [
    "noise",
    "first_above_0",
    "first_above_0_5",
    "generations_between",
    "final_fitness",
    "final_bias_strength",
    "final_bias_correctness",
    "initial_bias_strength",
    "strength_at_first_above_0",
    "strength_at_first_above_0_5",
    "final_freq_zero",
    "final_freq_one",
    "final_freq_question",
    "final_window",
];

fn summary_values(noise: f64, s: &RunSummary) -> Vec<String> {
    let freq = |k: usize| opt(s.final_allele_freqs.map(|f| num(f[k])));
    vec![
        noise.to_string(),
        opt(s.first_above_zero),
        opt(s.first_above_half),
        opt(s.generations_between),
        num(s.final_fitness),
        num(s.final_bias_strength),
        num(s.final_bias_correctness),
        num(s.initial_bias_strength),
        opt(s.strength_at_first_above_zero.map(num)),
        opt(s.strength_at_first_above_half.map(num)),
        freq(0),
        freq(1),
        freq(2),
        s.final_window.to_string(),
    ]
}

/// Summary table with one row per run.
pub fn summary_csv(results: &[RunResult]) -> String {
    let mut out = SUMMARY_COLUMNS.join(",");
    out.push('\n');
    for r in results {
        out.push_str(&summary_values(r.config.noise_p, &r.summary).join(","));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Running

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: ExperimentSpec,
    pub configs: Vec<GaConfig>,
    pub master_seeds: Vec<u64>,
    pub outputs: Vec<PathBuf>,
    pub summary: PathBuf,
    pub version: String,
    pub duration_secs: f64,
}

pub struct ExperimentOutput {
    pub manifest: RunManifest,
    pub results: Vec<RunResult>,
}

pub fn csv_file_name(id: ExperimentId, noise: f64) -> String {
    if id.is_hn() {
        format!("{id}.csv")
    } else {
        format!("{id}_p{noise}.csv")
    }
}

/// Run every configuration of `spec` without writing anything.
pub fn run_configs(spec: &ExperimentSpec) -> Result<Vec<RunResult>> {
    resolve(spec)?.iter().map(ga::run).collect()
}

/// Run `spec`, writing CSVs, the summary and the manifest into `out_dir`.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<ExperimentOutput> {
    let configs = resolve(spec)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let started = Instant::now();
    let mut results = Vec::with_capacity(configs.len());
    let mut outputs = Vec::with_capacity(configs.len());
    for config in &configs {
        let result = ga::run(config)?;
        let path = out_dir.join(csv_file_name(spec.id, config.noise_p));
        write_file(&path, &stats_csv(&result.stats, config.genome_kind))?;
        outputs.push(path);
        results.push(result);
    }
    let summary = out_dir.join(format!("{}_summary.csv", spec.id));
    write_file(&summary, &summary_csv(&results))?;
    let manifest = RunManifest {
        spec: spec.clone(),
        master_seeds: configs.iter().map(|c| c.master_seed).collect(),
        configs,
        outputs,
        summary,
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_secs: started.elapsed().as_secs_f64(),
    };
    let manifest_path = out_dir.join(format!("{}_manifest.json", spec.id));
    write_file(&manifest_path, &serde_json::to_string_pretty(&manifest)?)?;
    Ok(ExperimentOutput { manifest, results })
}

/// Re-run the spec recorded in a manifest.
pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Verification

/// Parsed summary baseline. Cells are `None` for `NA`, `*` or empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Baseline {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    /// Per-column absolute tolerance from a `tolerance` row, if present.
    pub tolerance: Option<Vec<Option<f64>>>,
}

impl Baseline {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("baseline is empty".into()))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        if columns.first().map(String::as_str) != Some("noise") {
            return Err(Error::Parse("baseline must start with a noise column".into()));
        }
        if let Some(c) = columns.iter().find(|c| !SUMMARY_COLUMNS.contains(&c.as_str())) {
            return Err(Error::Parse(format!("unknown baseline column {c:?}")));
        }
        let cell = |s: &str| -> Result<Option<f64>> {
            match s.trim() {
                "" | "NA" | "*" => Ok(None),
                v => v.parse().map(Some).map_err(|_| Error::Parse(format!("bad number {v:?}"))),
            }
        };
        let mut rows = Vec::new();
        let mut tolerance = None;
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(Error::Parse(format!(
                    "expected {} fields, got {}: {line}",
                    columns.len(),
                    fields.len()
                )));
            }
            if fields[0].trim() == "tolerance" {
                tolerance = Some(std::iter::once(Ok(None)).chain(fields[1..].iter().map(|f| cell(f))).collect::<Result<_>>()?);
            } else {
                rows.push(fields.iter().map(|f| cell(f)).collect::<Result<_>>()?);
            }
        }
        Ok(Baseline { columns, rows, tolerance })
    }

    pub fn read(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::Usage(format!("baseline {} does not exist", path.display())));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricCheck {
    pub noise: f64,
    pub metric: String,
    pub expected: Option<f64>,
    pub actual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl fmt::Display for MetricCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), num);
        write!(
            f,
            "{} p={} {}: expected {} got {} (tol {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.noise,
            self.metric,
            show(self.expected),
            show(self.actual),
            num(self.tolerance)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<MetricCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

/// Compare run summaries against a baseline. Without a tolerance row values
/// must agree to the 6 significant digits the summary file carries.
pub fn compare(results: &[RunResult], baseline: &Baseline) -> VerifyReport {
    let mut checks = Vec::new();
    for row in &baseline.rows {
        let Some(noise) = row[0] else { continue };
        let run = results.iter().find(|r| (r.config.noise_p - noise).abs() < 1e-12);
        let actual_row: Option<Vec<Option<f64>>> = run.map(|r| {
            summary_values(r.config.noise_p, &r.summary)
                .iter()
                .map(|v| v.parse().ok())
                .collect()
        });
        for (k, column) in baseline.columns.iter().enumerate().skip(1) {
            let expected = row[k];
            let declared = baseline.tolerance.as_ref().map(|t| t[k]);
            if declared == Some(None) {
                continue;
            }
            let idx = SUMMARY_COLUMNS.iter().position(|c| c == column).expect("validated column");
            let actual = actual_row.as_ref().and_then(|r| r[idx]);
            let tolerance = declared.flatten().unwrap_or_else(|| expected.map_or(0.0, |e| 1e-5 * e.abs() + 1e-9));
            let pass = match (expected, actual) {
                (Some(e), Some(a)) => (e - a).abs() <= tolerance,
                (None, None) => run.is_some(),
                _ => false,
            };
            checks.push(MetricCheck { noise, metric: column.clone(), expected, actual, tolerance, pass });
        }
    }
    VerifyReport { checks }
}

/// Recompute `spec` and compare with the baseline at `path`.
pub fn verify(spec: &ExperimentSpec, baseline_path: &Path) -> Result<VerifyReport> {
    let baseline = Baseline::read(baseline_path)?;
    let mut spec = spec.clone();
    if spec.overrides.noise.is_none() && !spec.id.is_hn() {
        spec.overrides.noise = Some(baseline.rows.iter().filter_map(|r| r[0]).collect());
    }
    let results = run_configs(&spec)?;
    Ok(compare(&results, &baseline))
}

// ---------------------------------------------------------------------------
// Analytic tables

fn fixed2(x: f64) -> String {
    format!("{x:.2}")
}

/// Pure learning against pure correct instinct at the default noise levels.
pub fn table1() -> String {
    let mut out = String::from(
        "noise,learning_p_perfect,learning_perfect_score,learning_expected_fitness,\
         instinct_p_perfect,instinct_perfect_score,instinct_expected_fitness\n",
    );
    for p in DEFAULT_NOISE_LEVELS {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p,
            fixed2(concept::perfect_probability_pure_learning(p)),
            fixed2(concept::perfect_score(p)),
            fixed2(concept::expected_fitness_pure_learning(p)),
            fixed2(concept::perfect_probability_pure_instinct_correct(p)),
            fixed2(concept::perfect_score(p)),
            fixed2(concept::expected_fitness_pure_instinct_correct(p)),
        ));
    }
    out
}

/// Expected fitness of a random pure-instinct genotype: a uniformly random
/// direction vector matches the test labels with probability `2^-32`.
pub fn expected_fitness_random_instinct(p: f64) -> f64 {
    (-(GENE_COUNT as f64)).exp2() * concept::perfect_score(p)
}

/// Pure instinct, pure learning and the evolved baseline side by side. The
/// evolved column comes from the supplied runs (one per noise level).
pub fn table5(baldwin: &[RunResult]) -> String {
    let mut out = String::from("noise,pure_instinct,pure_learning,baldwin_baseline\n");
    for r in baldwin {
        let p = r.config.noise_p;
        out.push_str(&format!(
            "{},{},{},{}\n",
            p,
            fixed2(expected_fitness_random_instinct(p)),
            fixed2(concept::expected_fitness_pure_learning(p)),
            fixed2(r.summary.final_fitness)
        ));
    }
    out
}

/// Statistical bias and variance of one guess for every (direction, target).
pub fn table78(s: f64, p: f64) -> Result<String> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Usage(format!("strength must be in [0, 1], got {s}")));
    }
    concept::check_noise(p).map_err(|e| Error::Usage(e.to_string()))?;
    let mut out = String::from("d,t,statistical_bias,bias_correctness,bias_strength,variance,squared_error\n");
    for (d, t) in [(false, false), (false, true), (true, false), (true, true)] {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            u8::from(d),
            u8::from(t),
            num(appendix::statistical_bias_table(d, t, s, p)),
            u8::from(d == t),
            num(s),
            num(appendix::variance_table(d, t, s, p)),
            num(appendix::squared_error(d, t, s, p)),
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Config files

/// Parse a flat `key = value` file whose keys mirror the CLI flags
/// (`experiment`, `noise`, `seed`, `generations`, `pop`, `schedule`,
/// `crossover`, `mutation`, `mutation-kind`, `init`, `out`, `threads`).
/// `#` starts a comment.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut cfg = ConfigFile::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        let bad = || Error::Parse(format!("line {}: invalid value {value:?} for {key}", lineno + 1));
        let o = &mut cfg.overrides;
        match key.as_str() {
            "experiment" => cfg.experiment = Some(value.parse()?),
            "noise" => {
                o.noise = Some(value.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?)
            }
            "seed" => o.seed = Some(value.parse().map_err(|_| bad())?),
            "generations" => o.generations = Some(value.parse().map_err(|_| bad())?),
            "pop" | "population" => o.population = Some(value.parse().map_err(|_| bad())?),
            "schedule" => o.schedule = Some(value.parse()?),
            "crossover" | "crossover-rate" => o.crossover_rate = Some(value.parse().map_err(|_| bad())?),
            "mutation" | "mutation-rate" => o.mutation_rate = Some(value.parse().map_err(|_| bad())?),
            "mutation-kind" => {
                o.mutation_kind = Some(match value {
                    "flip" => MutationKind::Flip,
                    "resample" => MutationKind::Resample,
                    _ => return Err(bad()),
                })
            }
            "init" => o.init = Some(value.parse()?),
            "out" => cfg.out = Some(PathBuf::from(value)),
            "threads" => cfg.threads = Some(value.parse().map_err(|_| bad())?),
            _ => return Err(Error::Parse(format!("line {}: unknown key {key:?}", lineno + 1))),
        }
    }
    Ok(cfg)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub experiment: Option<ExperimentId>,
    pub overrides: Overrides,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}
