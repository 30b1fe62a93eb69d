//! Cyclic-shift surrogate test for transfer entropy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{discretize, te_symbols, BinningSpec, SymbolSeries, NEGATIVE_SLACK};
use crate::error::{Error, Result};

pub const MIN_SURROGATES: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValues {
    pub p_x_to_y: f64,
    pub p_y_to_x: f64,
}

/// Permutation p-values for both directions.
///
/// Each surrogate rotates the source series by a uniform nonzero offset,
/// which keeps its autocorrelation and breaks its alignment with the
/// target. `p = (1 + #{surrogate >= observed}) / (1 + n_surrogates)`.
/// Offsets are drawn up front from a generator seeded with `seed`, all
/// `x -> y` offsets first, so the result does not depend on scheduling.
pub fn permutation_significance(
    x: &[f64],
    y: &[f64],
    spec: &BinningSpec,
    lag: usize,
    n_surrogates: usize,
    seed: u64,
) -> Result<PValues> {
    significance_with_specs(x, y, (spec, spec), lag, n_surrogates, seed)
}

pub(crate) fn significance_with_specs(
    x: &[f64],
    y: &[f64],
    (x_spec, y_spec): (&BinningSpec, &BinningSpec),
    lag: usize,
    n_surrogates: usize,
    seed: u64,
) -> Result<PValues> {
    if n_surrogates < MIN_SURROGATES {
        return Err(Error::Config(format!(
            "at least {MIN_SURROGATES} surrogates are needed, got {n_surrogates}"
        )));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < lag + 2 {
        return Err(Error::TooShort { len: x.len(), lag });
    }
    let xs = discretize(x, x_spec)?;
    let ys = discretize(y, y_spec)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let mut draw = || -> Vec<usize> { (0..n_surrogates).map(|_| rng.random_range(1..n)).collect() };
    let x_offsets = draw();
    let y_offsets = draw();

    Ok(PValues {
        p_x_to_y: p_value(&xs, &ys, lag, &x_offsets)?,
        p_y_to_x: p_value(&ys, &xs, lag, &y_offsets)?,
    })
}

fn p_value(
    source: &SymbolSeries,
    target: &SymbolSeries,
    lag: usize,
    offsets: &[usize],
) -> Result<f64> {
    let observed = te_symbols(source, target, lag)?;
    let exceed = offsets
        .par_iter()
        .map(|&off| te_symbols(&source.rotated(off), target, lag))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .filter(|&te| te >= observed - NEGATIVE_SLACK)
        .count();
    Ok((1 + exceed) as f64 / (1 + offsets.len()) as f64)
}
