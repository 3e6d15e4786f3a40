//! Seeded per-round edge bitflips and the defects they produce.
//!
//! Round `r` samples the edges of layer `r`: the edges inside sheet `r` and
//! the edges from sheet `r` up to sheet `r + 1`. Each draw comes from a
//! ChaCha stream keyed by `(seed, r)` and consumed in template edge order, so
//! any round can be regenerated on its own.

use std::collections::HashMap;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::NoiseError;
use crate::graph::{EdgeRef, LayerTemplate, NodeRef};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub p: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn new(p: f64, seed: u64) -> Result<Self, NoiseError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(NoiseError::InvalidProbability(p));
        }
        Ok(NoiseConfig { p, seed })
    }
}

/// Flipped edges of one newly added layer, as template edge indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoundSample {
    pub round: i64,
    pub flipped: Vec<usize>,
}

impl RoundSample {
    pub fn quiet(round: i64) -> Self {
        RoundSample { round, flipped: Vec::new() }
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        self.flipped.iter().map(move |&e| EdgeRef::new(self.round, e))
    }
}

/// Flip each layer edge independently with probability `p`.
pub fn sample_round(template: &LayerTemplate, config: &NoiseConfig, round: i64) -> RoundSample {
    let mut flipped = Vec::new();
    if config.p > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(round as u64);
        for edge in 0..template.edges.len() {
            if rng.gen::<f64>() < config.p {
                flipped.push(edge);
            }
        }
    }
    RoundSample { round, flipped }
}

/// Detectors with sheet in `sheets` touching an odd number of `flips`.
pub fn defects_from_flips<I>(template: &LayerTemplate, flips: I, sheets: Range<i64>) -> Vec<NodeRef>
where
    I: IntoIterator<Item = EdgeRef>,
{
    let mut parity: HashMap<NodeRef, bool> = HashMap::new();
    for edge in flips {
        let (a, b) = template.endpoints(edge);
        for n in [a, b] {
            *parity.entry(n).or_default() ^= true;
        }
    }
    let mut defects: Vec<NodeRef> = parity
        .into_iter()
        .filter(|&(n, odd)| odd && sheets.contains(&n.sheet) && template.is_detector(n))
        .map(|(n, _)| n)
        .collect();
    defects.sort();
    defects
}

/// Streaming view of the noise: each call adds one layer and reports the raw
/// detector bits of the new top sheet (measurement differences).
#[derive(Debug, Clone)]
pub struct SyndromeStream<'a> {
    template: &'a LayerTemplate,
    config: NoiseConfig,
    next_round: i64,
    previous: RoundSample,
}

/// One round as seen by a stream decoder.
#[derive(Debug, Clone)]
pub struct StreamRound {
    pub sample: RoundSample,
    /// Raw defect bit per template node of the new sheet (always false for
    /// boundary nodes).
    pub top_defects: Vec<bool>,
}

impl<'a> SyndromeStream<'a> {
    pub fn new(template: &'a LayerTemplate, config: NoiseConfig) -> Self {
        SyndromeStream { template, config, next_round: 0, previous: RoundSample::quiet(-1) }
    }

    pub fn round(&self) -> i64 {
        self.next_round
    }

    /// Sample the next noisy round.
    pub fn next_noisy(&mut self) -> StreamRound {
        let sample = sample_round(self.template, &self.config, self.next_round);
        self.advance(sample)
    }

    /// Add an error-free round (used to flush the decoder at the end of a run).
    pub fn next_quiet(&mut self) -> StreamRound {
        self.advance(RoundSample::quiet(self.next_round))
    }

    fn advance(&mut self, sample: RoundSample) -> StreamRound {
        let sheet = sample.round;
        let mut top = vec![false; self.template.sheet_size()];
        for edge in self.previous.edges().chain(sample.edges()) {
            let (a, b) = self.template.endpoints(edge);
            for n in [a, b] {
                if n.sheet == sheet {
                    top[n.node as usize] ^= true;
                }
            }
        }
        for (bit, node) in top.iter_mut().zip(&self.template.nodes) {
            *bit &= node.is_detector();
        }
        self.previous = sample.clone();
        self.next_round += 1;
        StreamRound { sample, top_defects: top }
    }
}
