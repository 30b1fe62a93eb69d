//! Transfer entropy between two discretized series.
//!
//! With history length one on both sides, the transfer entropy from a
//! source `x` to a target `y` at lag `L` is
//!
//! ```text
//! TE(x -> y) = sum over (y_t, y_{t-L}, x_{t-L}) of
//!              p(y_t, y_{t-L}, x_{t-L}) * log2[ p(y_t | y_{t-L}, x_{t-L}) / p(y_t | y_{t-L}) ]
//! ```
//!
//! estimated by plugging in relative frequencies of the observed triples.
//! Real-valued series are first mapped to symbols by equal-width binning.

mod analysis;
mod surrogate;

pub use analysis::{
    bidirectional_te, windowed_te, BidirectionalTe, DayWindow, EmotionSeries, RangeScope,
    Significance, TeOptions, TeResult, WindowedTe,
};
pub use surrogate::{permutation_significance, PValues, MIN_SURROGATES};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 3;

/// Negative results closer to zero than this are rounding noise.
pub const NEGATIVE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangePolicy {
    /// Bin over `[min, max]` of the series being discretized.
    #[default]
    PerSeriesMinMax,
    Fixed {
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub n_bins: usize,
    #[serde(default)]
    pub range: RangePolicy,
}

impl Default for BinningSpec {
    fn default() -> Self {
        BinningSpec {
            n_bins: DEFAULT_BINS,
            range: RangePolicy::PerSeriesMinMax,
        }
    }
}

impl BinningSpec {
    pub fn new(n_bins: usize) -> Self {
        BinningSpec {
            n_bins,
            range: RangePolicy::PerSeriesMinMax,
        }
    }

    pub fn fixed(n_bins: usize, lo: f64, hi: f64) -> Self {
        BinningSpec {
            n_bins,
            range: RangePolicy::Fixed { lo, hi },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::Config(format!(
                "n_bins must be at least 2, got {}",
                self.n_bins
            )));
        }
        if let RangePolicy::Fixed { lo, hi } = self.range {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::Config(format!(
                    "fixed range needs lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Bin labels in `[0, n_bins)`, index-aligned with the source series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSeries {
    pub symbols: Vec<usize>,
    pub n_bins: usize,
}

impl SymbolSeries {
    pub fn new(symbols: Vec<usize>, n_bins: usize) -> Result<Self> {
        if let Some((i, s)) = symbols.iter().enumerate().find(|(_, s)| **s >= n_bins) {
            return Err(Error::Validation(format!(
                "symbol {s} at index {i} exceeds {n_bins} bins"
            )));
        }
        Ok(SymbolSeries { symbols, n_bins })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Cyclic left shift by `offset`.
    pub fn rotated(&self, offset: usize) -> SymbolSeries {
        let mut symbols = self.symbols.clone();
        if !symbols.is_empty() {
            symbols.rotate_left(offset % self.symbols.len());
        }
        SymbolSeries {
            symbols,
            n_bins: self.n_bins,
        }
    }
}

/// Equal-width binning. The top edge belongs to the last bin; a constant
/// series (zero-width range) maps entirely to bin 0.
pub fn discretize(values: &[f64], spec: &BinningSpec) -> Result<SymbolSeries> {
    spec.validate()?;
    if values.is_empty() {
        return Err(Error::Validation(
            "cannot discretize an empty series".into(),
        ));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Validation(format!("non-finite value at index {i}")));
    }
    let (lo, hi) = match spec.range {
        RangePolicy::PerSeriesMinMax => values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            }),
        RangePolicy::Fixed { lo, hi } => {
            if let Some((index, &value)) = values
                .iter()
                .enumerate()
                .find(|(_, v)| **v < lo || **v > hi)
            {
                return Err(Error::OutOfRange {
                    index,
                    value,
                    lo,
                    hi,
                });
            }
            (lo, hi)
        }
    };
    let n = spec.n_bins;
    let symbols = if hi == lo {
        vec![0; values.len()]
    } else {
        let span = hi - lo;
        values
            .iter()
            .map(|&v| {
                let bin = ((v - lo) / span * n as f64).floor();
                (bin.max(0.0) as usize).min(n - 1)
            })
            .collect()
    };
    Ok(SymbolSeries { symbols, n_bins: n })
}

/// Counts of `(y_t, y_{t-lag}, x_{t-lag})` triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution {
    target_bins: usize,
    source_bins: usize,
    counts: Vec<u64>,
    total: u64,
}

impl JointDistribution {
    pub fn empty(target_bins: usize, source_bins: usize) -> Self {
        JointDistribution {
            target_bins,
            source_bins,
            counts: vec![0; target_bins * target_bins * source_bins],
            total: 0,
        }
    }

    fn cell(&self, next: usize, past: usize, source: usize) -> usize {
        (next * self.target_bins + past) * self.source_bins + source
    }

    pub fn add(&mut self, next: usize, past: usize, source: usize, count: u64) {
        let c = self.cell(next, past, source);
        self.counts[c] += count;
        self.total += count;
    }

    pub fn count(&self, next: usize, past: usize, source: usize) -> u64 {
        self.counts[self.cell(next, past, source)]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn target_bins(&self) -> usize {
        self.target_bins
    }

    pub fn source_bins(&self) -> usize {
        self.source_bins
    }

    /// Observed triples with their counts, in lexicographic order.
    pub fn observed(&self) -> impl Iterator<Item = ((usize, usize, usize), u64)> + '_ {
        let (nt, ns) = (self.target_bins, self.source_bins);
        (0..nt)
            .flat_map(move |a| (0..nt).flat_map(move |b| (0..ns).map(move |c| (a, b, c))))
            .map(|(a, b, c)| ((a, b, c), self.count(a, b, c)))
            .filter(|(_, n)| *n > 0)
    }
}

/// Tallies the triples `(y[t], y[t-lag], x[t-lag])` for `t` in `lag..len`.
pub fn joint_counts(x: &SymbolSeries, y: &SymbolSeries, lag: usize) -> Result<JointDistribution> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if lag == 0 {
        return Err(Error::Config("lag must be at least 1".into()));
    }
    if x.len() < lag + 1 {
        return Err(Error::TooShort { len: x.len(), lag });
    }
    let mut joint = JointDistribution::empty(y.n_bins, x.n_bins);
    for t in lag..y.len() {
        joint.add(y.symbols[t], y.symbols[t - lag], x.symbols[t - lag], 1);
    }
    Ok(joint)
}

/// Plug-in transfer entropy in bits.
pub fn transfer_entropy(joint: &JointDistribution) -> Result<f64> {
    if joint.total == 0 {
        return Err(Error::EmptyDistribution);
    }
    let (nt, ns) = (joint.target_bins, joint.source_bins);
    let mut past_source = vec![0u64; nt * ns];
    let mut next_past = vec![0u64; nt * nt];
    let mut past = vec![0u64; nt];
    for ((next, p, s), n) in joint.observed() {
        past_source[p * ns + s] += n;
        next_past[next * nt + p] += n;
        past[p] += n;
    }
    let total = joint.total as f64;
    let te: f64 = joint
        .observed()
        .map(|((next, p, s), n)| {
            let n = n as f64;
            let ratio = (n * past[p] as f64)
                / (past_source[p * ns + s] as f64 * next_past[next * nt + p] as f64);
            n / total * ratio.log2()
        })
        .sum();
    Ok(if (-NEGATIVE_SLACK..0.0).contains(&te) {
        0.0
    } else {
        te
    })
}

/// Transfer entropy from `x` to `y` over symbol series.
pub fn te_symbols(x: &SymbolSeries, y: &SymbolSeries, lag: usize) -> Result<f64> {
    transfer_entropy(&joint_counts(x, y, lag)?)
}
