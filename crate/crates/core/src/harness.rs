//! Experiment configuration and Monte Carlo runs.
//!
//! A run covers every `(d, p)` point of the configuration. Each point is split
//! into trials of at most `blocks_per_trial` blocks; a trial is a fresh stream
//! of `blocks * d` noisy rounds followed by a flush. Trial seeds depend only on
//! the master seed, `d`, `p` and the trial index, and results are aggregated in
//! trial order, so outputs do not depend on the worker count.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accounting::{
    block_timesteps, fit_scaling, logical_error_rate, Estimate, ScalingFit, ScalingPoint,
};
use crate::baseline::ForwardUf;
use crate::error::{HarnessError, SnowflakeError};
use crate::graph::{build_template, EdgeRef, Family, LayerTemplate};
use crate::noise::{NoiseConfig, SyndromeStream};
use crate::snowflake::{min_buffer_height, TraceEvent, Window};
use crate::stream::{run_trial, SnowflakeDecoder, TrialResult};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Snowflake,
    ForwardUf,
}

impl DecoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DecoderKind::Snowflake => "snowflake",
            DecoderKind::ForwardUf => "forward-uf",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecoderKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "snowflake" => Ok(DecoderKind::Snowflake),
            "forward-uf" | "forward" | "uf" => Ok(DecoderKind::ForwardUf),
            other => Err(HarnessError::Config(format!("unknown decoder `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub decoder: DecoderKind,
    pub family: Family,
    pub distances: Vec<usize>,
    pub noise_levels: Vec<f64>,
    /// Blocks of `d` rounds per `(d, p)` point.
    pub blocks: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Blocks simulated in one trial.
    pub blocks_per_trial: usize,
    /// Merging timesteps allowed per decoding cycle; default 10x window nodes.
    pub merging_cap: Option<u64>,
    /// Longest residual component, in rounds, before a trial is flagged;
    /// default `4d`.
    pub history_horizon: Option<usize>,
    /// Run the quiescence checks after every decoding cycle.
    pub check_invariants: bool,
    /// Test-only: shrink the Snowflake buffer one sheet below the minimum.
    #[serde(skip)]
    pub undersized_window: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            decoder: DecoderKind::Snowflake,
            family: Family::SurfaceCircuitStyle,
            distances: vec![3, 5, 7],
            noise_levels: vec![1e-3],
            blocks: 10_000,
            seed: 0,
            workers: 0,
            out_dir: PathBuf::from("out"),
            blocks_per_trial: 100,
            merging_cap: None,
            history_horizon: None,
            check_invariants: false,
            undersized_window: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.distances.is_empty() {
            return bad("no distances given".into());
        }
        if let Some(d) = self.distances.iter().find(|&&d| d < 2) {
            return bad(format!("distance {d} is below 2"));
        }
        if self.noise_levels.is_empty() {
            return bad("no noise levels given".into());
        }
        if let Some(p) = self.noise_levels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("noise level {p} is outside [0, 1]"));
        }
        if self.blocks == 0 {
            return bad("blocks must be at least 1".into());
        }
        if self.blocks_per_trial == 0 {
            return bad("blocks_per_trial must be at least 1".into());
        }
        if self.merging_cap == Some(0) {
            return bad("merging_cap must be positive".into());
        }
        Ok(())
    }

    fn horizon(&self, d: usize) -> i64 {
        self.history_horizon.unwrap_or(4 * d) as i64
    }
}

/// Seed of one trial, a function of the master seed, the point and the trial
/// index only.
pub fn trial_seed(master: u64, d: usize, p: f64, trial: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    [d as u64, p.to_bits(), trial as u64].iter().fold(mix(master), |acc, &w| mix(acc ^ mix(w)))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialDiagnostics {
    /// Finalized detectors left with residual syndrome.
    pub syndrome_violations: usize,
    /// Defects found in the commit region at drop time.
    pub commit_region_defects: u64,
    pub invariant_violations: u64,
    pub first_violation: Option<String>,
    pub max_component_span: i64,
    pub horizon_exceeded: bool,
    pub flush_rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub d: usize,
    pub p: f64,
    pub trial: usize,
    pub seed: u64,
    pub first_block: usize,
    pub blocks: usize,
    pub block_counts: Vec<u64>,
    pub block_timesteps: Vec<u64>,
    /// Reason the trial was excluded, if it was.
    pub tainted: Option<String>,
    pub diagnostics: TrialDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub family: Family,
    pub d: usize,
    pub p: f64,
    /// Blocks contributing to the statistics.
    pub blocks: usize,
    pub logical_bitflips: u64,
    pub rate: Option<Estimate>,
    pub timesteps: Option<Estimate>,
    pub tainted_trials: usize,
    pub syndrome_violations: usize,
    pub commit_region_defects: u64,
    pub invariant_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub p: f64,
    pub points: usize,
    pub fit: Option<ScalingFit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    Accuracy,
    Runtime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: RunKind,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub summaries: Vec<PointSummary>,
    pub slopes: Vec<SlopeRow>,
    pub wall_clock_seconds: f64,
}

/// Machine-readable record of a run, sufficient to regenerate its CSVs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub kind: RunKind,
    pub config: ExperimentConfig,
    pub trials: Vec<ManifestTrial>,
    pub wall_clock_seconds: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestTrial {
    pub d: usize,
    pub p: f64,
    pub trial: usize,
    pub seed: u64,
    pub first_block: usize,
    pub blocks: usize,
    pub tainted: Option<String>,
    pub diagnostics: TrialDiagnostics,
}

impl RunReport {
    pub fn tainted(&self) -> bool {
        self.trials.iter().any(|t| t.tainted.is_some())
    }

    pub fn summary(&self, d: usize, p: f64) -> Option<&PointSummary> {
        self.summaries.iter().find(|s| s.d == d && s.p == p)
    }

    pub fn manifest(&self) -> RunManifest {
        RunManifest {
            artifact_version: ARTIFACT_VERSION.to_string(),
            kind: self.kind,
            config: self.config.clone(),
            trials: self
                .trials
                .iter()
                .map(|t| ManifestTrial {
                    d: t.d,
                    p: t.p,
                    trial: t.trial,
                    seed: t.seed,
                    first_block: t.first_block,
                    blocks: t.blocks,
                    tainted: t.tainted.clone(),
                    diagnostics: t.diagnostics.clone(),
                })
                .collect(),
            wall_clock_seconds: self.wall_clock_seconds,
            status: if self.tainted() { "tainted" } else { "complete" }.to_string(),
        }
    }

    /// One row per block: `family,d,p,seed,block,m,timesteps`.
    pub fn write_block_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["family", "d", "p", "seed", "block", "m", "timesteps"])?;
        for t in self.trials.iter().filter(|t| t.tainted.is_none()) {
            for (i, m) in t.block_counts.iter().enumerate() {
                let ts = t.block_timesteps.get(i).map(u64::to_string).unwrap_or_default();
                w.write_record([
                    self.config.family.as_str().to_string(),
                    t.d.to_string(),
                    t.p.to_string(),
                    t.seed.to_string(),
                    (t.first_block + i).to_string(),
                    m.to_string(),
                    ts,
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// One row per `(family, d, p)`.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SUMMARY_HEADER)?;
        let opt = |e: Option<Estimate>, f: fn(&Estimate) -> f64| e.as_ref().map(|e| f(e).to_string()).unwrap_or_default();
        for s in &self.summaries {
            w.write_record([
                self.config.decoder.as_str().to_string(),
                s.family.as_str().to_string(),
                s.d.to_string(),
                s.p.to_string(),
                s.blocks.to_string(),
                s.logical_bitflips.to_string(),
                opt(s.rate, |e| e.mean),
                opt(s.rate, |e| e.stderr),
                opt(s.timesteps, |e| e.mean),
                opt(s.timesteps, |e| e.stderr),
                s.tainted_trials.to_string(),
                s.syndrome_violations.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Scaling exponent of timesteps per block against `d`, one row per `p`.
    pub fn write_slopes_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["p", "points", "slope", "slope_se", "intercept", "error"])?;
        for s in &self.slopes {
            let f = |g: fn(&ScalingFit) -> f64| s.fit.as_ref().map(|x| g(x).to_string()).unwrap_or_default();
            w.write_record([
                s.p.to_string(),
                s.points.to_string(),
                f(|x| x.slope),
                f(|x| x.slope_stderr),
                f(|x| x.intercept),
                s.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Write the CSVs and the manifest into `dir`; returns the paths written.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        std::fs::create_dir_all(dir)?;
        let prefix = match self.kind {
            RunKind::Accuracy => "accuracy",
            RunKind::Runtime => "runtime",
        };
        let mut written = Vec::new();
        let mut file = |name: String| -> Result<std::io::BufWriter<std::fs::File>, HarnessError> {
            let path = dir.join(name);
            let f = std::fs::File::create(&path)?;
            written.push(path);
            Ok(std::io::BufWriter::new(f))
        };
        self.write_block_csv(file(format!("{prefix}_blocks.csv"))?)?;
        self.write_summary_csv(file(format!("{prefix}_summary.csv"))?)?;
        if self.kind == RunKind::Runtime {
            self.write_slopes_csv(file(format!("{prefix}_slopes.csv"))?)?;
        }
        let mut m = file(format!("{prefix}_manifest.json"))?;
        serde_json::to_writer_pretty(&mut m, &self.manifest())
            .map_err(|e| HarnessError::Io(e.into()))?;
        m.flush()?;
        Ok(written)
    }
}

pub const SUMMARY_HEADER: [&str; 12] = [
    "decoder",
    "family",
    "d",
    "p",
    "blocks",
    "m",
    "f_hat",
    "f_se",
    "timesteps_mean",
    "timesteps_se",
    "tainted_trials",
    "syndrome_violations",
];

struct TrialJob {
    d: usize,
    p: f64,
    trial: usize,
    first_block: usize,
    blocks: usize,
    template: Arc<LayerTemplate>,
}

fn is_taint(e: &SnowflakeError) -> bool {
    matches!(e, SnowflakeError::MergingCap { .. } | SnowflakeError::FlushIncomplete { .. })
}

fn snowflake_decoder(cfg: &ExperimentConfig, template: &LayerTemplate) -> Result<SnowflakeDecoder, SnowflakeError> {
    let d = template.distance;
    let buffer = min_buffer_height(d) - usize::from(cfg.undersized_window);
    let mut window = Window::with_height(template.clone(), 1 + buffer)?;
    if let Some(cap) = cfg.merging_cap {
        window.set_merging_cap(cap);
    }
    let dec = SnowflakeDecoder::new(window);
    Ok(if cfg.check_invariants { dec.with_invariant_checks() } else { dec })
}

fn run_job(cfg: &ExperimentConfig, job: &TrialJob) -> Result<TrialRecord, HarnessError> {
    let seed = trial_seed(cfg.seed, job.d, job.p, job.trial);
    let noise = NoiseConfig::new(job.p, seed)?;
    let mut diagnostics = TrialDiagnostics::default();
    let outcome: Result<TrialResult, SnowflakeError> = match cfg.decoder {
        DecoderKind::Snowflake => {
            let mut dec = snowflake_decoder(cfg, &job.template)?;
            let r = run_trial(&mut dec, &job.template, noise, job.blocks);
            let stats = dec.window().stats();
            diagnostics.commit_region_defects = stats.commit_region_defects;
            diagnostics.invariant_violations = dec.report().invariant_violations;
            diagnostics.first_violation = dec.report().first_violation.clone();
            r
        }
        DecoderKind::ForwardUf => {
            let mut dec = ForwardUf::new(Arc::clone(&job.template));
            run_trial(&mut dec, &job.template, noise, job.blocks)
        }
    };
    let mut record = TrialRecord {
        d: job.d,
        p: job.p,
        trial: job.trial,
        seed,
        first_block: job.first_block,
        blocks: job.blocks,
        block_counts: Vec::new(),
        block_timesteps: Vec::new(),
        tainted: None,
        diagnostics,
    };
    match outcome {
        Ok(r) => {
            record.block_timesteps = block_timesteps(&r.cycle_timesteps, job.d);
            record.block_counts = r.block_counts;
            record.diagnostics.syndrome_violations = r.syndrome_violations;
            record.diagnostics.max_component_span = r.max_component_span;
            record.diagnostics.horizon_exceeded = r.max_component_span > cfg.horizon(job.d);
            record.diagnostics.flush_rounds = r.flush_rounds;
        }
        Err(e) if is_taint(&e) => record.tainted = Some(e.to_string()),
        Err(e) => return Err(e.into()),
    }
    Ok(record)
}

fn summarize(family: Family, d: usize, p: f64, trials: &[TrialRecord]) -> PointSummary {
    let good: Vec<&TrialRecord> = trials.iter().filter(|t| t.tainted.is_none()).collect();
    let counts: Vec<u64> = good.iter().flat_map(|t| t.block_counts.iter().copied()).collect();
    let times: Vec<f64> = good.iter().flat_map(|t| t.block_timesteps.iter().map(|&x| x as f64)).collect();
    PointSummary {
        family,
        d,
        p,
        blocks: counts.len(),
        logical_bitflips: counts.iter().sum(),
        rate: logical_error_rate(&counts).ok(),
        timesteps: Estimate::from_samples(&times),
        tainted_trials: trials.len() - good.len(),
        syndrome_violations: trials.iter().map(|t| t.diagnostics.syndrome_violations).sum(),
        commit_region_defects: trials.iter().map(|t| t.diagnostics.commit_region_defects).sum(),
        invariant_violations: trials.iter().map(|t| t.diagnostics.invariant_violations).sum(),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))
}

fn run(cfg: &ExperimentConfig, kind: RunKind) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut jobs = Vec::new();
    for &d in &cfg.distances {
        let template = Arc::new(build_template(cfg.family, d)?);
        for &p in &cfg.noise_levels {
            let mut first = 0;
            let mut trial = 0;
            while first < cfg.blocks {
                let blocks = cfg.blocks_per_trial.min(cfg.blocks - first);
                jobs.push(TrialJob { d, p, trial, first_block: first, blocks, template: Arc::clone(&template) });
                first += blocks;
                trial += 1;
            }
        }
    }
    let trials: Vec<TrialRecord> = pool(cfg.workers)?
        .install(|| jobs.par_iter().map(|j| run_job(cfg, j)).collect::<Result<_, _>>())?;
    let mut summaries = Vec::new();
    for &d in &cfg.distances {
        for &p in &cfg.noise_levels {
            let point: Vec<TrialRecord> = trials.iter().filter(|t| t.d == d && t.p == p).cloned().collect();
            summaries.push(summarize(cfg.family, d, p, &point));
        }
    }
    let slopes = if kind == RunKind::Runtime { slope_table(cfg, &summaries) } else { Vec::new() };
    Ok(RunReport {
        kind,
        config: cfg.clone(),
        trials,
        summaries,
        slopes,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

fn slope_table(cfg: &ExperimentConfig, summaries: &[PointSummary]) -> Vec<SlopeRow> {
    cfg.noise_levels
        .iter()
        .map(|&p| {
            let points: Vec<ScalingPoint> = summaries
                .iter()
                .filter(|s| s.p == p)
                .filter_map(|s| s.timesteps.map(|t| ScalingPoint { d: s.d as f64, mean: t.mean, stderr: t.stderr }))
                .collect();
            match fit_scaling(&points) {
                Ok(fit) => SlopeRow { p, points: points.len(), fit: Some(fit), error: None },
                Err(e) => SlopeRow { p, points: points.len(), fit: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}

/// Logical error rate per `(d, p)` point.
pub fn run_accuracy(cfg: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    run(cfg, RunKind::Accuracy)
}

/// Snowflake timesteps per block of `d` rounds, with a scaling fit per `p`.
pub fn run_runtime(cfg: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    if cfg.decoder != DecoderKind::Snowflake {
        return Err(HarnessError::Config("runtime runs need the snowflake decoder".into()));
    }
    run(cfg, RunKind::Runtime)
}

/// Everything one traced Snowflake run produces.
#[derive(Debug, Clone)]
pub struct TraceReport {
    pub events: Vec<TraceEvent>,
    /// Committed corrections as `(absolute round, edge)` pairs.
    pub committed: Vec<(i64, EdgeRef)>,
    pub cycle_timesteps: Vec<u64>,
}

/// Run `rounds` noisy rounds through a traced Snowflake window.
pub fn run_trace(family: Family, d: usize, p: f64, seed: u64, rounds: usize) -> Result<TraceReport, HarnessError> {
    let template = build_template(family, d)?;
    let noise = NoiseConfig::new(p, seed)?;
    let mut window = Window::new(template.clone());
    window.enable_trace();
    let mut stream = SyndromeStream::new(&template, noise);
    let mut report = TraceReport { events: Vec::new(), committed: Vec::new(), cycle_timesteps: Vec::new() };
    for _ in 0..rounds {
        let round = stream.next_noisy();
        let out = window.run_decoding_cycle(&round.top_defects)?;
        report.committed.extend(out.committed.into_iter().map(|e| (round.sample.round, e)));
        report.cycle_timesteps.push(out.timesteps);
    }
    report.events = window.take_trace();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(decoder: DecoderKind) -> ExperimentConfig {
        ExperimentConfig {
            decoder,
            family: Family::RepetitionPhenomenological,
            distances: vec![3, 5],
            noise_levels: vec![0.0, 0.03],
            blocks: 30,
            blocks_per_trial: 7,
            seed: 11,
            workers: 2,
            ..ExperimentConfig::default()
        }
    }

    fn csv_bytes(r: &RunReport) -> (Vec<u8>, Vec<u8>) {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        r.write_block_csv(&mut a).unwrap();
        r.write_summary_csv(&mut b).unwrap();
        (a, b)
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let mut c = ExperimentConfig { distances: vec![1], ..Default::default() };
        assert!(c.validate().is_err());
        c.distances = vec![3];
        c.noise_levels = vec![1.5];
        assert!(c.validate().is_err());
        c.noise_levels = vec![0.1];
        c.blocks = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_from_toml() {
        let c = ExperimentConfig::from_toml(
            "decoder = \"forward-uf\"\nfamily = \"surface-phenom\"\ndistances = [3, 5]\nnoise_levels = [0.001]\nblocks = 5\n",
        )
        .unwrap();
        assert_eq!(c.decoder, DecoderKind::ForwardUf);
        assert_eq!(c.family, Family::SurfacePhenomenological);
        assert_eq!(c.blocks, 5);
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("blocks = 0").is_err());
    }

    #[test]
    fn seeds_differ_per_trial_and_point() {
        let a = trial_seed(1, 3, 0.01, 0);
        assert_ne!(a, trial_seed(1, 3, 0.01, 1));
        assert_ne!(a, trial_seed(1, 5, 0.01, 0));
        assert_ne!(a, trial_seed(1, 3, 0.02, 0));
        assert_ne!(a, trial_seed(2, 3, 0.01, 0));
        assert_eq!(a, trial_seed(1, 3, 0.01, 0));
    }

    #[test]
    fn zero_noise_gives_zero_rate() {
        for decoder in [DecoderKind::Snowflake, DecoderKind::ForwardUf] {
            let r = run_accuracy(&small(decoder)).unwrap();
            for d in [3, 5] {
                let s = r.summary(d, 0.0).unwrap();
                assert_eq!(s.blocks, 30);
                assert_eq!(s.rate.unwrap().mean, 0.0);
            }
            assert!(!r.tainted());
            assert!(r.summaries.iter().all(|s| s.syndrome_violations == 0));
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut cfg = small(DecoderKind::Snowflake);
        let one = run_accuracy(&ExperimentConfig { workers: 1, ..cfg.clone() }).unwrap();
        cfg.workers = 4;
        let four = run_accuracy(&cfg).unwrap();
        assert_eq!(csv_bytes(&one), csv_bytes(&four));
    }

    #[test]
    fn block_rows_and_timesteps() {
        let r = run_runtime(&small(DecoderKind::Snowflake)).unwrap();
        let (blocks, _) = csv_bytes(&r);
        let text = String::from_utf8(blocks).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 2 * 30);
        // p = 0: every cycle costs 3 timesteps
        assert_eq!(r.summary(5, 0.0).unwrap().timesteps.unwrap().mean, 15.0);
        assert_eq!(r.slopes.len(), 2);
        assert!(r.slopes[0].fit.is_none());
        assert!(run_runtime(&small(DecoderKind::ForwardUf)).is_err());
    }

    #[test]
    fn merging_cap_taints() {
        let cfg = ExperimentConfig { merging_cap: Some(1), noise_levels: vec![0.05], ..small(DecoderKind::Snowflake) };
        let r = run_accuracy(&cfg).unwrap();
        assert!(r.tainted());
        assert_eq!(r.manifest().status, "tainted");
        assert!(r.summaries.iter().all(|s| s.tainted_trials > 0));
    }

    #[test]
    fn trace_has_committed_stream() {
        let t = run_trace(Family::RepetitionPhenomenological, 3, 0.05, 2, 40).unwrap();
        assert_eq!(t.cycle_timesteps.len(), 40);
        assert!(!t.events.is_empty());
        assert!(t.committed.windows(2).all(|w| w[0].0 <= w[1].0));
    }
}
