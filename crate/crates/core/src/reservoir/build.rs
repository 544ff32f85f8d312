use rand::Rng;

use super::config::ReservoirConfig;
use super::sparse::{InputMatrix, SparseMatrix};
use super::spectral::spectral_radius;
use crate::error::{Error, Result};

pub const MAX_RESAMPLE_ATTEMPTS: usize = 16;

/// Directed Erdos-Renyi graph with edge probability `mean_degree / size`,
/// weights `U(-1, 1)`, rescaled to the configured spectral radius. Graphs
/// whose spectral radius vanishes (no cycles) are redrawn from the same stream.
pub fn build_internal_matrix<R: Rng + ?Sized>(
    cfg: &ReservoirConfig,
    rng: &mut R,
) -> Result<SparseMatrix> {
    cfg.validate()?;
    let n = cfg.size;
    let p = cfg.edge_probability().min(1.0);
    for _ in 0..MAX_RESAMPLE_ATTEMPTS {
        let rows = (0..n)
            .map(|_| {
                (0..n)
                    .filter_map(|j| rng.random_bool(p).then(|| (j, rng.random_range(-1.0..1.0))))
                    .collect()
            })
            .collect();
        let mut a = SparseMatrix::from_rows(n, rows);
        let rho = spectral_radius(&a);
        if rho > 1e-12 {
            a.scale(cfg.spectral_radius / rho);
            return Ok(a);
        }
    }
    Err(Error::ZeroSpectralRadius {
        attempts: MAX_RESAMPLE_ATTEMPTS,
    })
}

/// One input connection per node with weight `U(-s, s)`.
///
/// Standard reservoirs pick the input column uniformly from `0..d_u`. Hybrid
/// reservoirs see the concatenation `[expert prediction; state]` and connect
/// to the expert block with probability `knowledge_ratio`, else to the state
/// block. Per row the stream is consumed as (block choice, column, weight).
pub fn build_input_matrix<R: Rng + ?Sized>(
    cfg: &ReservoirConfig,
    d_u: usize,
    hybrid: bool,
    rng: &mut R,
) -> Result<InputMatrix> {
    cfg.validate()?;
    if d_u == 0 {
        return Err(Error::InvalidParameter("input dimension must be >= 1".into()));
    }
    let s = cfg.input_scaling;
    let mut columns = Vec::with_capacity(cfg.size);
    let mut weights = Vec::with_capacity(cfg.size);
    for _ in 0..cfg.size {
        let offset = if hybrid && !rng.random_bool(cfg.knowledge_ratio) {
            d_u
        } else {
            0
        };
        columns.push(offset + rng.random_range(0..d_u));
        weights.push(rng.random_range(-s..=s));
    }
    InputMatrix::new(if hybrid { 2 * d_u } else { d_u }, columns, weights)
}
