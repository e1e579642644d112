//! Parameter sweeps, run records and record verification.
//!
//! A sweep is the Cartesian product of trajectory prefix sizes, λ values,
//! algorithms, `k`, `ℓ`, `ε` and seeds. Instances are built once per
//! (prefix, λ) pair. Rows come back in that nesting order no matter how the cells
//! were scheduled.
//!
//! Configuration files are plain `key = value` lines; `#` starts a comment and
//! list values are comma separated.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{run_baseline, BaselineKind};
use crate::domain::{InfluenceInstance, Selection, SlotId, TagId, TimeInterval};
use crate::error::{Error, Result};
use crate::exec;
use crate::influence::aggregated_influence;
use crate::ingest::{
    assemble_instance, generate_raw, instance_digest, load_billboards, load_probabilities, load_tags,
    load_trajectories, ExplicitProb, IngestConfig, ProbMode, RawDataset, SyntheticSpec,
};
use crate::solvers::{
    exhaustive_search_capped, orthant_greedy, stochastic_greedy, GreedyMode, SolveResult, StochasticParams,
    DEFAULT_EXHAUSTIVE_CAP,
};

/// Column order of the sweep CSV.
pub const SWEEP_HEADER: [&str; 10] = [
    "run_id",
    "algorithm",
    "k",
    "l",
    "epsilon",
    "lambda_m",
    "seed",
    "influence",
    "eval_count",
    "wall_time_ms",
];

/// Relative tolerance used by [`verify_record`].
pub const VERIFY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Exhaustive,
    GreedyIncremental,
    GreedyLazy,
    GreedyStochastic,
    Baseline(BaselineKind),
}

impl Algorithm {
    /// Whether runs with different seeds can differ.
    pub fn uses_seed(self) -> bool {
        match self {
            Algorithm::GreedyStochastic => true,
            Algorithm::Baseline(kind) => kind.is_randomized(),
            _ => false,
        }
    }

    pub fn uses_epsilon(self) -> bool {
        self == Algorithm::GreedyStochastic
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Exhaustive => f.write_str("exhaustive"),
            Algorithm::GreedyIncremental => f.write_str("greedy-incremental"),
            Algorithm::GreedyLazy => f.write_str("greedy-lazy"),
            Algorithm::GreedyStochastic => f.write_str("greedy-stochastic"),
            Algorithm::Baseline(kind) => write!(f, "baseline:{kind}"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "exhaustive" => Ok(Algorithm::Exhaustive),
            "greedy-incremental" => Ok(Algorithm::GreedyIncremental),
            "greedy-lazy" => Ok(Algorithm::GreedyLazy),
            "greedy-stochastic" => Ok(Algorithm::GreedyStochastic),
            lower => match lower.strip_prefix("baseline:") {
                Some(kind) => Ok(Algorithm::Baseline(kind.parse()?)),
                None => Err(Error::InvalidParameter(format!("unknown algorithm `{s}`"))),
            },
        }
    }
}

impl Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameters of one solver run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub k: usize,
    pub l: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub cap: u128,
}

impl RunParams {
    pub fn new(k: usize, l: usize) -> Self {
        RunParams {
            k,
            l,
            epsilon: 0.1,
            seed: 0,
            cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

/// Dispatches to the solver named by `algorithm`.
pub fn solve(instance: &InfluenceInstance, algorithm: Algorithm, p: &RunParams) -> Result<SolveResult> {
    match algorithm {
        Algorithm::Exhaustive => exhaustive_search_capped(instance, p.k, p.l, p.cap),
        Algorithm::GreedyIncremental => orthant_greedy(instance, p.k, p.l, GreedyMode::Incremental),
        Algorithm::GreedyLazy => orthant_greedy(instance, p.k, p.l, GreedyMode::Lazy),
        Algorithm::GreedyStochastic => {
            stochastic_greedy(instance, p.k, p.l, &StochasticParams::new(p.epsilon, p.seed))
        }
        Algorithm::Baseline(kind) => run_baseline(instance, kind, p.k, p.l, p.seed),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub algorithm: Algorithm,
    pub k: usize,
    pub l: usize,
    pub epsilon: f64,
    pub lambda_m: f64,
    pub seed: u64,
    pub influence: f64,
    pub eval_count: u64,
    pub wall_time_ms: u64,
    pub selected_slots: Vec<u32>,
    pub selected_tags: Vec<u32>,
    pub instance_digest: String,
}

impl RunRecord {
    pub fn new(
        run_id: String,
        algorithm: Algorithm,
        params: &RunParams,
        instance: &InfluenceInstance,
        result: &SolveResult,
        instance_digest: String,
    ) -> Self {
        RunRecord {
            run_id,
            algorithm,
            k: params.k,
            l: params.l,
            epsilon: params.epsilon,
            lambda_m: instance.meta().lambda_m,
            seed: params.seed,
            influence: result.value,
            eval_count: result.eval_count,
            wall_time_ms: result.wall_time_ms,
            selected_slots: result.selection.slots.iter().map(|s| s.0).collect(),
            selected_tags: result.selection.tags.iter().map(|c| c.0).collect(),
            instance_digest,
        }
    }

    pub fn selection(&self) -> Selection {
        Selection::new(
            self.selected_slots.iter().map(|&s| SlotId(s)).collect(),
            self.selected_tags.iter().map(|&c| TagId(c)).collect(),
        )
    }
}

/// Result of checking one record against its instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOutcome {
    pub run_id: String,
    pub recorded: f64,
    pub recomputed: Option<f64>,
    pub delta: Option<f64>,
    pub problems: Vec<String>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Recomputes `Φ` for a record's selection and checks budgets, ids and digest.
pub fn verify_record(instance: &InfluenceInstance, digest: &str, record: &RunRecord) -> VerifyOutcome {
    let mut problems = Vec::new();
    if record.selected_slots.len() != record.k {
        problems.push(format!(
            "budget violation: {} slots selected, k = {}",
            record.selected_slots.len(),
            record.k
        ));
    }
    if record.selected_tags.len() != record.l {
        problems.push(format!(
            "budget violation: {} tags selected, l = {}",
            record.selected_tags.len(),
            record.l
        ));
    }
    if record.instance_digest != digest {
        problems.push(format!(
            "instance digest {} does not match {}",
            record.instance_digest, digest
        ));
    }
    let mut recomputed = None;
    let mut delta = None;
    match aggregated_influence(instance, &record.selection()) {
        Ok(value) => {
            let d = record.influence - value;
            recomputed = Some(value);
            delta = Some(d);
            if !(d.abs() <= VERIFY_TOLERANCE * value.abs().max(1.0)) {
                problems.push(format!(
                    "influence mismatch: recorded {} recomputed {} delta {:e}",
                    record.influence, value, d
                ));
            }
        }
        Err(e) => problems.push(format!("invalid selection: {e}")),
    }
    VerifyOutcome {
        run_id: record.run_id.clone(),
        recorded: record.influence,
        recomputed,
        delta,
        problems,
    }
}

/// Reads line-delimited JSON records; blank lines are skipped.
pub fn read_records(text: &str) -> Result<Vec<RunRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| Error::parse("<records>", i as u64 + 1, e.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    Synthetic(SyntheticSpec),
    Files {
        trajectories: PathBuf,
        billboards: PathBuf,
        tags: PathBuf,
        probs: Option<PathBuf>,
        horizon: TimeInterval,
        delta: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: InstanceSource,
    pub algorithms: Vec<Algorithm>,
    pub k: Vec<usize>,
    pub l: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub lambda_m: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Tuple-prefix lengths; empty means the whole trajectory list.
    pub trajectory_sizes: Vec<usize>,
    pub cap: u128,
    /// Run sweep cells concurrently. Wall times get noisier.
    pub parallel_cells: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut algorithms = vec![
            Algorithm::GreedyIncremental,
            Algorithm::GreedyLazy,
            Algorithm::GreedyStochastic,
        ];
        algorithms.extend(BaselineKind::ALL.map(Algorithm::Baseline));
        ExperimentConfig {
            source: InstanceSource::Synthetic(SyntheticSpec::default()),
            algorithms,
            k: vec![25, 50, 100, 150, 200],
            l: vec![10, 20, 30, 40, 50],
            epsilon: vec![0.01, 0.05, 0.1, 0.15, 0.2],
            lambda_m: vec![25.0, 50.0, 75.0, 100.0, 125.0],
            seeds: vec![0],
            trajectory_sizes: Vec::new(),
            cap: DEFAULT_EXHAUSTIVE_CAP,
            parallel_cells: false,
        }
    }
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse()
                .map_err(|_| Error::InvalidParameter(format!("bad value `{v}` for `{key}`")))
        })
        .collect()
}

fn one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad value `{value}` for `{key}`")))
}

impl ExperimentConfig {
    /// Parses a configuration. Relative file paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut spec = SyntheticSpec::default();
        let mut source = String::from("synthetic");
        let mut files: BTreeMap<&str, PathBuf> = BTreeMap::new();
        let mut horizon = (None, None);
        let mut delta = None;

        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse("<config>", i as u64 + 1, "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "source" => source = value.to_ascii_lowercase(),
                "users" => spec.n_users = one(key, value)?,
                "billboards" => spec.n_billboards = one(key, value)?,
                "tags" => spec.n_tags = one(key, value)?,
                "tuples" => spec.n_tuples = one(key, value)?,
                "instance_seed" => spec.seed = one(key, value)?,
                "tag_skew" => spec.tag_skew = one(key, value)?,
                "t1" => horizon.0 = Some(one(key, value)?),
                "t2" => horizon.1 = Some(one(key, value)?),
                "delta" => delta = Some(one(key, value)?),
                "trajectories_file" => {
                    files.insert("trajectories", base.join(value));
                }
                "billboards_file" => {
                    files.insert("billboards", base.join(value));
                }
                "tags_file" => {
                    files.insert("tags", base.join(value));
                }
                "probs_file" => {
                    files.insert("probs", base.join(value));
                }
                "algorithms" => cfg.algorithms = list(key, value)?,
                "k" => cfg.k = list(key, value)?,
                "l" => cfg.l = list(key, value)?,
                "epsilon" => cfg.epsilon = list(key, value)?,
                "lambda" | "lambda_m" => cfg.lambda_m = list(key, value)?,
                "seeds" => cfg.seeds = list(key, value)?,
                "trajectory_sizes" => cfg.trajectory_sizes = list(key, value)?,
                "cap" => cfg.cap = one(key, value)?,
                "parallel_cells" => cfg.parallel_cells = one(key, value)?,
                _ => {
                    return Err(Error::parse(
                        "<config>",
                        i as u64 + 1,
                        format!("unknown key `{key}`"),
                    ))
                }
            }
        }

        if let Some(t1) = horizon.0 {
            spec.horizon.start = t1;
        }
        if let Some(t2) = horizon.1 {
            spec.horizon.end = t2;
        }
        if let Some(d) = delta {
            spec.slot_duration = d;
        }
        cfg.source = match source.as_str() {
            "synthetic" => InstanceSource::Synthetic(spec.clone()),
            "files" => {
                let mut take = |name: &str| {
                    files
                        .remove(name)
                        .ok_or_else(|| Error::InvalidParameter(format!("`{name}_file` is required for file sources")))
                };
                InstanceSource::Files {
                    trajectories: take("trajectories")?,
                    billboards: take("billboards")?,
                    tags: take("tags")?,
                    probs: files.remove("probs"),
                    horizon: spec.horizon,
                    delta: spec.slot_duration,
                }
            }
            other => return Err(Error::InvalidParameter(format!("unknown source `{other}`"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.algorithms.is_empty()
            || self.k.is_empty()
            || self.l.is_empty()
            || self.epsilon.is_empty()
            || self.lambda_m.is_empty()
            || self.seeds.is_empty()
        {
            return bad("every sweep axis needs at least one value");
        }
        if self.k.contains(&0) || self.l.contains(&0) {
            return bad("budgets must be positive");
        }
        if self.epsilon.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return bad("epsilon values must lie in (0, 1)");
        }
        if self.lambda_m.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return bad("lambda values must be positive");
        }
        if let InstanceSource::Synthetic(spec) = &self.source {
            spec.validate()?;
        }
        Ok(())
    }

    /// Raw records the sweep draws its instances from.
    pub fn load_raw(&self) -> Result<(RawDataset, Option<Vec<ExplicitProb>>)> {
        match &self.source {
            InstanceSource::Synthetic(spec) => Ok((generate_raw(spec)?, None)),
            InstanceSource::Files {
                trajectories,
                billboards,
                tags,
                probs,
                ..
            } => {
                let raw = RawDataset::from_parts(
                    load_trajectories(trajectories)?,
                    load_billboards(billboards)?,
                    load_tags(tags)?,
                );
                let probs = probs.as_ref().map(load_probabilities).transpose()?;
                Ok((raw, probs))
            }
        }
    }

    fn ingest_config(&self, lambda_m: f64, explicit: bool) -> IngestConfig {
        match &self.source {
            InstanceSource::Synthetic(spec) => IngestConfig {
                lambda_m,
                ..spec.ingest_config()
            },
            InstanceSource::Files { horizon, delta, .. } => IngestConfig {
                horizon: *horizon,
                slot_duration: *delta,
                lambda_m,
                prob_mode: if explicit {
                    ProbMode::ExplicitFile
                } else {
                    ProbMode::PanelSizeBase
                },
            },
        }
    }
}

/// One sweep cell before seeds are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub trajectory_size: Option<usize>,
    pub lambda_m: f64,
    pub algorithm: Algorithm,
    pub k: usize,
    pub l: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: Cell,
    pub seed: u64,
    pub run_id: String,
    pub outcome: std::result::Result<RunRecord, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
}

impl SweepOutput {
    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.rows.iter().filter_map(|r| r.outcome.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &str)> {
        self.rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(|e| (r.run_id.as_str(), e.as_str())))
    }
}

pub fn run_id(cell: &Cell, seed: u64) -> String {
    let size = cell
        .trajectory_size
        .map_or_else(|| "all".to_string(), |n| n.to_string());
    format!(
        "{}/k{}/l{}/e{}/lam{}/n{}/s{}",
        cell.algorithm, cell.k, cell.l, cell.epsilon, cell.lambda_m, size, seed
    )
}

struct Built {
    instance: InfluenceInstance,
    digest: String,
}

/// Runs every cell of `config`.
///
/// A cell whose instance cannot be built or whose solver fails becomes a failed
/// row; the sweep itself only errors when the raw data cannot be loaded.
/// Runs that cannot depend on `ε` or the seed are solved once and shared
/// between the rows that differ only in those axes.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    let (raw, explicit) = config.load_raw()?;
    let sizes: Vec<Option<usize>> = if config.trajectory_sizes.is_empty() {
        vec![None]
    } else {
        config.trajectory_sizes.iter().map(|&n| Some(n)).collect()
    };

    let mut instances: HashMap<(Option<usize>, u64), std::result::Result<Built, String>> = HashMap::new();
    for &size in &sizes {
        for &lambda in &config.lambda_m {
            instances.entry((size, lambda.to_bits())).or_insert_with(|| {
                let data = match size {
                    Some(n) => raw.with_tuple_prefix(n),
                    None => raw.clone(),
                };
                let ingest = config.ingest_config(lambda, explicit.is_some());
                assemble_instance(&data, &ingest, explicit.as_deref())
                    .and_then(|instance| {
                        let digest = instance_digest(&instance)?;
                        Ok(Built { instance, digest })
                    })
                    .map_err(|e| e.to_string())
            });
        }
    }

    let mut rows = Vec::new();
    for &trajectory_size in &sizes {
        for &lambda_m in &config.lambda_m {
            for &algorithm in &config.algorithms {
                for &k in &config.k {
                    for &l in &config.l {
                        for &epsilon in &config.epsilon {
                            let cell = Cell {
                                trajectory_size,
                                lambda_m,
                                algorithm,
                                k,
                                l,
                                epsilon,
                            };
                            for &seed in &config.seeds {
                                rows.push((cell, seed));
                            }
                        }
                    }
                }
            }
        }
    }

    // rows that share a solve key differ only in axes the algorithm ignores
    let solve_key = |cell: &Cell, seed: u64| {
        let eps = if cell.algorithm.uses_epsilon() { cell.epsilon } else { config.epsilon[0] };
        let seed = if cell.algorithm.uses_seed() { seed } else { config.seeds[0] };
        (cell.trajectory_size, cell.lambda_m.to_bits(), cell.algorithm, cell.k, cell.l, eps.to_bits(), seed)
    };
    let mut unique: Vec<(Cell, u64)> = Vec::new();
    let mut slot_of = HashMap::new();
    let mut job_of_row = Vec::with_capacity(rows.len());
    for &(cell, seed) in &rows {
        let key = solve_key(&cell, seed);
        let job = *slot_of.entry(key).or_insert_with(|| {
            unique.push((cell, seed));
            unique.len() - 1
        });
        job_of_row.push(job);
    }

    let run_job = |&(cell, seed): &(Cell, u64)| -> std::result::Result<(SolveResult, RunParams), String> {
        let built = instances[&(cell.trajectory_size, cell.lambda_m.to_bits())]
            .as_ref()
            .map_err(Clone::clone)?;
        let params = RunParams {
            k: cell.k,
            l: cell.l,
            epsilon: cell.epsilon,
            seed,
            cap: config.cap,
        };
        solve(&built.instance, cell.algorithm, &params)
            .map(|r| (r, params))
            .map_err(|e| e.to_string())
    };
    let results: Vec<_> = if config.parallel_cells {
        exec::map(&unique, run_job)
    } else {
        unique.iter().map(run_job).collect()
    };

    let rows = rows
        .into_iter()
        .zip(job_of_row)
        .map(|((cell, seed), job)| {
            let id = run_id(&cell, seed);
            let outcome = results[job].clone().map(|(result, shared)| {
                let built = instances[&(cell.trajectory_size, cell.lambda_m.to_bits())]
                    .as_ref()
                    .expect("solved cells have an instance");
                let params = RunParams {
                    epsilon: cell.epsilon,
                    seed,
                    ..shared
                };
                RunRecord::new(id.clone(), cell.algorithm, &params, &built.instance, &result, built.digest.clone())
            });
            SweepRow {
                cell,
                seed,
                run_id: id,
                outcome,
            }
        })
        .collect();
    Ok(SweepOutput { rows })
}

/// Writes the sweep CSV. Failed rows keep their parameters and leave the
/// measurement columns empty.
pub fn write_sweep_csv<W: Write>(w: W, output: &SweepOutput) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for row in &output.rows {
        let c = &row.cell;
        let (influence, evals, wall) = match &row.outcome {
            Ok(r) => (r.influence.to_string(), r.eval_count.to_string(), r.wall_time_ms.to_string()),
            Err(_) => (String::new(), String::new(), String::new()),
        };
        out.write_record([
            row.run_id.clone(),
            c.algorithm.to_string(),
            c.k.to_string(),
            c.l.to_string(),
            c.epsilon.to_string(),
            c.lambda_m.to_string(),
            row.seed.to_string(),
            influence,
            evals,
            wall,
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes one JSON record per line.
pub fn write_records_jsonl<W: Write>(mut w: W, records: impl IntoIterator<Item = impl std::borrow::Borrow<RunRecord>>) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r.borrow())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub algorithm: Algorithm,
    pub trajectory_size: Option<usize>,
    pub lambda_m: f64,
    pub k: usize,
    pub l: usize,
    pub epsilon: f64,
    pub runs: usize,
    pub failed: usize,
    pub mean_influence: Option<f64>,
    pub mean_eval_count: Option<f64>,
    pub mean_wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRun {
    pub run_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub cells: Vec<CellSummary>,
    pub failures: Vec<FailedRun>,
}

/// Per-cell means over seeds, in row order.
pub fn summarize(output: &SweepOutput) -> SweepSummary {
    let mut cells: Vec<CellSummary> = Vec::new();
    let mut sums: Vec<(f64, f64, f64)> = Vec::new();
    for row in &output.rows {
        let c = &row.cell;
        let same = |s: &CellSummary| {
            s.algorithm == c.algorithm
                && s.trajectory_size == c.trajectory_size
                && s.lambda_m == c.lambda_m
                && s.k == c.k
                && s.l == c.l
                && s.epsilon == c.epsilon
        };
        if !cells.last().is_some_and(same) {
            cells.push(CellSummary {
                algorithm: c.algorithm,
                trajectory_size: c.trajectory_size,
                lambda_m: c.lambda_m,
                k: c.k,
                l: c.l,
                epsilon: c.epsilon,
                runs: 0,
                failed: 0,
                mean_influence: None,
                mean_eval_count: None,
                mean_wall_time_ms: None,
            });
            sums.push((0.0, 0.0, 0.0));
        }
        let cell = cells.last_mut().expect("pushed above");
        let sum = sums.last_mut().expect("pushed above");
        match &row.outcome {
            Ok(r) => {
                cell.runs += 1;
                sum.0 += r.influence;
                sum.1 += r.eval_count as f64;
                sum.2 += r.wall_time_ms as f64;
            }
            Err(_) => cell.failed += 1,
        }
    }
    for (cell, sum) in cells.iter_mut().zip(sums) {
        if cell.runs > 0 {
            let n = cell.runs as f64;
            cell.mean_influence = Some(sum.0 / n);
            cell.mean_eval_count = Some(sum.1 / n);
            cell.mean_wall_time_ms = Some(sum.2 / n);
        }
    }
    SweepSummary {
        cells,
        failures: output
            .failures()
            .map(|(id, e)| FailedRun {
                run_id: id.to_string(),
                error: e.to_string(),
            })
            .collect(),
    }
}
