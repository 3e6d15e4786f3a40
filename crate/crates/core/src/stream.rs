//! Driving a streaming decoder through one Monte Carlo trial.

use std::sync::Arc;

use crate::accounting::{CorrectionLedger, ResidualHistory};
use crate::baseline::ForwardUf;
use crate::error::SnowflakeError;
use crate::graph::{EdgeRef, LayerTemplate};
use crate::noise::{NoiseConfig, StreamRound, SyndromeStream};
use crate::snowflake::invariants::{check_quiescent, Violation};
use crate::snowflake::Window;

/// What a decoder reports after ingesting one round.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoundOutcome {
    pub committed: Vec<EdgeRef>,
    /// Emulated timesteps, for decoders that model them.
    pub timesteps: Option<u64>,
}

pub trait StreamDecoder {
    fn ingest(&mut self, round: &StreamRound) -> Result<RoundOutcome, SnowflakeError>;

    /// Whether, after `quiet_rounds` error-free rounds, every remaining
    /// correction can be committed.
    fn drained(&self, quiet_rounds: usize) -> bool;

    /// Commit everything still tentative.
    fn finish(&mut self) -> Vec<EdgeRef>;

    /// Quiet rounds allowed before giving up on draining.
    fn flush_limit(&self) -> usize;
}

/// Counters gathered by the optional Snowflake self-checks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub cycles_checked: u64,
    pub invariant_violations: u64,
    pub first_violation: Option<String>,
}

pub struct SnowflakeDecoder {
    window: Window,
    check_invariants: bool,
    report: CheckReport,
}

impl SnowflakeDecoder {
    pub fn new(window: Window) -> Self {
        SnowflakeDecoder { window, check_invariants: false, report: CheckReport::default() }
    }

    /// Run the quiescence checks after every decoding cycle.
    pub fn with_invariant_checks(mut self) -> Self {
        self.check_invariants = true;
        self
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn report(&self) -> &CheckReport {
        &self.report
    }

    fn record(&mut self, violations: Vec<Violation>) {
        self.report.cycles_checked += 1;
        if let Some(first) = violations.first() {
            self.report.first_violation.get_or_insert_with(|| {
                format!("cycle {}: {first}", self.window.stats().cycles)
            });
        }
        self.report.invariant_violations += violations.len() as u64;
    }
}

impl StreamDecoder for SnowflakeDecoder {
    fn ingest(&mut self, round: &StreamRound) -> Result<RoundOutcome, SnowflakeError> {
        let outcome = self.window.run_decoding_cycle(&round.top_defects)?;
        if self.check_invariants {
            let v = check_quiescent(&self.window);
            self.record(v);
        }
        Ok(RoundOutcome { committed: outcome.committed, timesteps: Some(outcome.timesteps) })
    }

    fn drained(&self, quiet_rounds: usize) -> bool {
        quiet_rounds >= self.window.geometry().height && self.window.defect_count() == 0
    }

    fn finish(&mut self) -> Vec<EdgeRef> {
        self.window.commit_all()
    }

    fn flush_limit(&self) -> usize {
        20 * self.window.geometry().height
    }
}

impl StreamDecoder for ForwardUf {
    fn ingest(&mut self, round: &StreamRound) -> Result<RoundOutcome, SnowflakeError> {
        Ok(RoundOutcome { committed: self.push_sheet(&round.top_defects), timesteps: None })
    }

    fn drained(&self, quiet_rounds: usize) -> bool {
        quiet_rounds >= 1
    }

    fn finish(&mut self) -> Vec<EdgeRef> {
        ForwardUf::finish(self)
    }

    fn flush_limit(&self) -> usize {
        1
    }
}

/// Everything one trial produces.
#[derive(Debug, Clone, Default)]
pub struct TrialResult {
    /// Logical bitflips per block of `d` noisy rounds.
    pub block_counts: Vec<u64>,
    /// Decoding-cycle timesteps per noisy round (empty for decoders without
    /// a timestep model).
    pub cycle_timesteps: Vec<u64>,
    pub ledger: CorrectionLedger,
    /// Finalized detectors left with residual syndrome.
    pub syndrome_violations: usize,
    /// Widest residual component, in sheets.
    pub max_component_span: i64,
    pub flush_rounds: usize,
}

/// Stream `blocks * d` noisy rounds into `decoder`, then quiet rounds until it
/// drains, and account the residual.
pub fn run_trial<D: StreamDecoder>(
    decoder: &mut D,
    template: &Arc<LayerTemplate>,
    noise: NoiseConfig,
    blocks: usize,
) -> Result<TrialResult, SnowflakeError> {
    let d = template.distance;
    let mut stream = SyndromeStream::new(template, noise);
    let mut residual = ResidualHistory::new();
    let mut result = TrialResult::default();
    for _ in 0..blocks * d {
        let round = stream.next_noisy();
        residual.toggle_all(round.sample.edges());
        let out = decoder.ingest(&round)?;
        residual.toggle_all(out.committed.iter().copied());
        result.ledger.record(round.sample.round, &out.committed);
        if let Some(t) = out.timesteps {
            result.cycle_timesteps.push(t);
        }
    }
    let limit = decoder.flush_limit();
    let mut quiet = 0;
    while !decoder.drained(quiet) {
        if quiet >= limit {
            return Err(SnowflakeError::FlushIncomplete { rounds: quiet });
        }
        let round = stream.next_quiet();
        let out = decoder.ingest(&round)?;
        residual.toggle_all(out.committed.iter().copied());
        result.ledger.record(round.sample.round, &out.committed);
        quiet += 1;
    }
    let last = stream.round() - 1;
    let rest = decoder.finish();
    residual.toggle_all(rest.iter().copied());
    result.ledger.record(last, &rest);
    residual.finalize_before(stream.round());
    result.flush_rounds = quiet;
    result.syndrome_violations = residual.syndrome_violations(template).len();
    result.max_component_span = residual.components(template).iter().map(|c| c.span()).max().unwrap_or(0);
    result.block_counts = residual.block_counts(template, d, blocks);
    Ok(result)
}
