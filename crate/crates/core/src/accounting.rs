//! Residual-error bookkeeping and the reported metrics.
//!
//! The residual is the symmetric difference of the true bitflips and the
//! committed corrections. Logical bitflips are counted exactly, offline, as
//! residual components that join the west and east boundaries an odd number
//! of times.

use std::collections::{HashMap, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::dsu::DisjointSets;
use crate::error::AccountingError;
use crate::graph::{EdgeRef, LayerTemplate, NodeRef, Side};

/// Append-only Pauli frame: every committed correction with the round whose
/// decoding cycle committed it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorrectionLedger {
    entries: Vec<(i64, EdgeRef)>,
}

impl CorrectionLedger {
    pub fn record(&mut self, round: i64, edges: &[EdgeRef]) {
        self.entries.extend(edges.iter().map(|&e| (round, e)));
    }

    pub fn entries(&self) -> &[(i64, EdgeRef)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Residual edges (errors XOR corrections) over the finalized spacetime.
#[derive(Debug, Clone, Default)]
pub struct ResidualHistory {
    edges: HashSet<EdgeRef>,
    finalized_before: i64,
}

impl ResidualHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn toggle(&mut self, edge: EdgeRef) {
        if !self.edges.remove(&edge) {
            self.edges.insert(edge);
        }
    }

    pub fn toggle_all<I: IntoIterator<Item = EdgeRef>>(&mut self, edges: I) {
        for e in edges {
            self.toggle(e);
        }
    }

    /// Declare every sheet below `sheet` final (no further corrections).
    pub fn finalize_before(&mut self, sheet: i64) {
        self.finalized_before = self.finalized_before.max(sheet);
    }

    pub fn finalized_before(&self) -> i64 {
        self.finalized_before
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        self.edges.iter().copied()
    }

    /// Finalized detectors touching an odd number of residual edges.
    pub fn syndrome_violations(&self, template: &LayerTemplate) -> Vec<NodeRef> {
        let mut parity: HashMap<NodeRef, bool> = HashMap::new();
        for &e in &self.edges {
            let (a, b) = template.endpoints(e);
            for n in [a, b] {
                *parity.entry(n).or_default() ^= true;
            }
        }
        let mut bad: Vec<NodeRef> = parity
            .into_iter()
            .filter(|&(n, odd)| odd && template.is_detector(n) && n.sheet < self.finalized_before)
            .map(|(n, _)| n)
            .collect();
        bad.sort();
        bad
    }

    /// Connected components of the residual, in order of lowest sheet.
    pub fn components(&self, template: &LayerTemplate) -> Vec<ResidualComponent> {
        let mut index: HashMap<NodeRef, usize> = HashMap::new();
        let mut sets = DisjointSets::new(0);
        let mut id = |n: NodeRef, sets: &mut DisjointSets| *index.entry(n).or_insert_with(|| sets.push());
        let mut edges: Vec<EdgeRef> = self.edges.iter().copied().collect();
        edges.sort();
        let mut ends = Vec::with_capacity(edges.len());
        for &e in &edges {
            let (a, b) = template.endpoints(e);
            let (ia, ib) = (id(a, &mut sets), id(b, &mut sets));
            sets.union(ia, ib);
            ends.push((a, ia, b));
        }
        let mut by_root: HashMap<usize, ResidualComponent> = HashMap::new();
        for &(a, ia, b) in &ends {
            let root = sets.find(ia);
            let c = by_root.entry(root).or_insert(ResidualComponent {
                lowest: i64::MAX,
                highest: i64::MIN,
                edges: 0,
                logical: false,
            });
            c.lowest = c.lowest.min(a.sheet).min(b.sheet);
            c.highest = c.highest.max(a.sheet).max(b.sheet);
            c.edges += 1;
            for n in [a, b] {
                if template.nodes[n.node as usize].side() == Some(Side::West) {
                    c.logical ^= true;
                }
            }
        }
        let mut out: Vec<ResidualComponent> = by_root.into_values().collect();
        out.sort_by_key(|c| (c.lowest, c.highest, c.edges, c.logical));
        out
    }

    /// Lowest sheet of every residual component that carries a logical
    /// bitflip (odd incidence with the west boundary).
    pub fn logical_components(&self, template: &LayerTemplate) -> Vec<i64> {
        self.components(template).into_iter().filter(|c| c.logical).map(|c| c.lowest).collect()
    }

    /// Logical bitflips among components whose lowest sheet lies in `rounds`.
    pub fn count_logical_bitflips(
        &self,
        template: &LayerTemplate,
        rounds: Range<i64>,
    ) -> Result<u64, AccountingError> {
        if rounds.end > self.finalized_before {
            return Err(AccountingError::NotFinalized {
                requested: rounds.end,
                finalized: self.finalized_before,
            });
        }
        Ok(self
            .logical_components(template)
            .into_iter()
            .filter(|s| rounds.contains(s))
            .count() as u64)
    }

    /// Logical bitflips per block of `d` rounds for `blocks` blocks. Components
    /// starting before round 0 count toward the first block and those starting
    /// after the last block toward the last.
    pub fn block_counts(&self, template: &LayerTemplate, d: usize, blocks: usize) -> Vec<u64> {
        let mut counts = vec![0u64; blocks];
        if blocks == 0 {
            return counts;
        }
        for sheet in self.logical_components(template) {
            let b = sheet.max(0) as usize / d;
            counts[b.min(blocks - 1)] += 1;
        }
        counts
    }

    /// Parity of residual edges crossing the cut between template nodes with
    /// `x <= cut_x` and `x > cut_x`.
    pub fn cut_crossing_parity(&self, template: &LayerTemplate, cut_x: i32) -> bool {
        self.edges.iter().fold(false, |acc, &e| {
            let t = &template.edges[e.edge as usize];
            let (xa, xb) = (template.nodes[t.a].x, template.nodes[t.b].x);
            acc ^ ((xa <= cut_x) != (xb <= cut_x))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidualComponent {
    pub lowest: i64,
    pub highest: i64,
    pub edges: usize,
    pub logical: bool,
}

impl ResidualComponent {
    /// Number of sheets the component spans.
    pub fn span(&self) -> i64 {
        self.highest - self.lowest + 1
    }
}

/// A mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    /// Sample mean and standard error of the mean.
    pub fn from_samples(values: &[f64]) -> Option<Estimate> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Estimate { mean, stderr, samples: n })
    }
}

/// Logical error rate: logical bitflips per block of `d` rounds, with the
/// standard error over per-block counts.
pub fn logical_error_rate(block_counts: &[u64]) -> Result<Estimate, AccountingError> {
    let values: Vec<f64> = block_counts.iter().map(|&c| c as f64).collect();
    Estimate::from_samples(&values).ok_or(AccountingError::NoBlocks)
}

/// `m / n` with the Poisson standard error `sqrt(m) / n`.
pub fn logical_error_rate_from_total(m: u64, n: u64) -> Result<Estimate, AccountingError> {
    if n == 0 {
        return Err(AccountingError::NoBlocks);
    }
    let nf = n as f64;
    Ok(Estimate { mean: m as f64 / nf, stderr: (m as f64).sqrt() / nf, samples: n as usize })
}

/// Timesteps summed over consecutive blocks of `d` cycles. A trailing partial
/// block is ignored.
pub fn block_timesteps(cycle_timesteps: &[u64], d: usize) -> Vec<u64> {
    cycle_timesteps.chunks_exact(d).map(|c| c.iter().sum()).collect()
}

/// Mean timesteps per `d` rounds with its standard error over blocks.
pub fn timesteps_per_d_rounds(cycle_timesteps: &[u64], d: usize) -> Option<Estimate> {
    let blocks: Vec<f64> = block_timesteps(cycle_timesteps, d).into_iter().map(|b| b as f64).collect();
    Estimate::from_samples(&blocks)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub d: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
}

/// Weighted least squares fit of `ln(mean)` against `ln(d)`.
///
/// Each point is weighted by the inverse variance of `ln(mean)`, i.e.
/// `(mean / stderr)^2`. If any point has zero standard error all points get
/// equal weight. The slope standard error is scaled by the reduced weighted
/// residual sum of squares.
pub fn fit_scaling(points: &[ScalingPoint]) -> Result<ScalingFit, AccountingError> {
    if points.len() < 3 {
        return Err(AccountingError::TooFewPoints { needed: 3, got: points.len() });
    }
    if points.iter().any(|p| p.d <= 0.0 || p.mean <= 0.0) {
        return Err(AccountingError::Degenerate("non-positive d or mean"));
    }
    let equal = points.iter().any(|p| p.stderr <= 0.0);
    let rows: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| {
            let w = if equal { 1.0 } else { (p.mean / p.stderr).powi(2) };
            (p.d.ln(), p.mean.ln(), w)
        })
        .collect();
    let sw: f64 = rows.iter().map(|r| r.2).sum();
    let mx = rows.iter().map(|r| r.2 * r.0).sum::<f64>() / sw;
    let my = rows.iter().map(|r| r.2 * r.1).sum::<f64>() / sw;
    let sxx: f64 = rows.iter().map(|r| r.2 * (r.0 - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * sw {
        return Err(AccountingError::Degenerate("all points share one distance"));
    }
    let sxy: f64 = rows.iter().map(|r| r.2 * (r.0 - mx) * (r.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = rows.iter().map(|r| r.2 * (r.1 - intercept - slope * r.0).powi(2)).sum();
    let dof = (rows.len() - 2) as f64;
    let slope_stderr = (rss / dof / sxx).sqrt();
    Ok(ScalingFit { slope, slope_stderr, intercept })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_template, Family};

    fn rep(d: usize) -> LayerTemplate {
        build_template(Family::RepetitionPhenomenological, d).unwrap()
    }

    /// Intra edges of one repetition sheet spanning west to east.
    fn spanning_chain(t: &LayerTemplate, sheet: i64) -> Vec<EdgeRef> {
        t.intra_edges().map(|(k, _)| EdgeRef::new(sheet, k)).collect()
    }

    #[test]
    fn straight_chain_counts_once() {
        let t = rep(3);
        let mut r = ResidualHistory::new();
        r.toggle_all(spanning_chain(&t, 2));
        r.finalize_before(10);
        assert!(r.syndrome_violations(&t).is_empty());
        assert_eq!(r.count_logical_bitflips(&t, 0..10).unwrap(), 1);
    }

    #[test]
    fn closed_loop_counts_zero() {
        let t = rep(5);
        let mut r = ResidualHistory::new();
        // square: (1,0)-(2,0), (1,1)-(2,1), up edges at x=1 and x=2
        let up: Vec<usize> = t.up_edges().map(|(k, _)| k).collect();
        r.toggle_all([EdgeRef::new(0, 1), EdgeRef::new(1, 1), EdgeRef::new(0, up[0]), EdgeRef::new(0, up[1])]);
        r.finalize_before(5);
        assert!(r.syndrome_violations(&t).is_empty());
        assert_eq!(r.count_logical_bitflips(&t, 0..5).unwrap(), 0);
    }

    #[test]
    fn two_chains_at_different_times() {
        let t = rep(3);
        let mut r = ResidualHistory::new();
        r.toggle_all(spanning_chain(&t, 1));
        r.toggle_all(spanning_chain(&t, 4));
        r.finalize_before(6);
        assert_eq!(r.count_logical_bitflips(&t, 0..6).unwrap(), 2);
        assert_eq!(r.block_counts(&t, 3, 2), vec![1, 1]);
        assert!(!r.cut_crossing_parity(&t, 1));
    }

    #[test]
    fn counting_unfinalized_rounds_is_an_error() {
        let t = rep(3);
        let mut r = ResidualHistory::new();
        r.finalize_before(4);
        assert!(matches!(
            r.count_logical_bitflips(&t, 0..6),
            Err(AccountingError::NotFinalized { requested: 6, finalized: 4 })
        ));
    }

    #[test]
    fn syndrome_violation_detected() {
        let t = rep(5);
        let mut r = ResidualHistory::new();
        r.toggle(EdgeRef::new(0, 2));
        r.finalize_before(1);
        assert_eq!(r.syndrome_violations(&t), vec![NodeRef::new(0, 2), NodeRef::new(0, 3)]);
        r.toggle(EdgeRef::new(0, 2));
        assert!(r.is_empty());
    }

    #[test]
    fn error_rate_arithmetic() {
        let zero = logical_error_rate(&vec![0; 100]).unwrap();
        assert_eq!((zero.mean, zero.stderr), (0.0, 0.0));
        assert_eq!(logical_error_rate_from_total(5, 1000).unwrap().mean, 0.005);
        let e = logical_error_rate(&[0, 1, 0, 2]).unwrap();
        assert!((e.mean - 0.75).abs() < 1e-12);
        // sample variance 2.75 / 3, stderr sqrt(var / 4)
        assert!((e.stderr - (2.75f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
        assert!(logical_error_rate(&[]).is_err());
        assert!(logical_error_rate_from_total(1, 0).is_err());
    }

    #[test]
    fn timesteps_per_block() {
        let e = timesteps_per_d_rounds(&[3; 10], 5).unwrap();
        assert_eq!((e.mean, e.stderr), (15.0, 0.0));
        let e = timesteps_per_d_rounds(&[4, 6, 7, 7], 2).unwrap();
        assert_eq!(e.mean, 12.0);
        assert_eq!(block_timesteps(&[1, 2, 3, 4, 5], 2), vec![3, 7]);
    }

    #[test]
    fn exact_power_law_and_constant() {
        let pts: Vec<ScalingPoint> = [5.0, 9.0, 13.0]
            .iter()
            .map(|&d| ScalingPoint { d, mean: 3.0 * d * d, stderr: 0.0 })
            .collect();
        let fit = fit_scaling(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        let flat: Vec<ScalingPoint> =
            [3.0, 5.0, 7.0].iter().map(|&d| ScalingPoint { d, mean: 4.0, stderr: 0.1 }).collect();
        assert!(fit_scaling(&flat).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn weights_favour_precise_points() {
        // the noisy outlier at d = 9 barely moves the fit
        let pts = [
            ScalingPoint { d: 5.0, mean: 25.0, stderr: 0.01 },
            ScalingPoint { d: 7.0, mean: 49.0, stderr: 0.01 },
            ScalingPoint { d: 9.0, mean: 200.0, stderr: 1000.0 },
            ScalingPoint { d: 11.0, mean: 121.0, stderr: 0.01 },
        ];
        let fit = fit_scaling(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-3, "{fit:?}");
    }

    #[test]
    fn degenerate_fits_rejected() {
        let same = [ScalingPoint { d: 5.0, mean: 1.0, stderr: 0.1 }; 3];
        assert!(matches!(fit_scaling(&same), Err(AccountingError::Degenerate(_))));
        assert!(matches!(fit_scaling(&same[..2]), Err(AccountingError::TooFewPoints { .. })));
    }
}
