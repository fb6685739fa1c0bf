//! Ulam's method: a column-stochastic Monte-Carlo discretization of the
//! Perron-Frobenius operator on a uniform box partition.

use crate::systems::Box as DomainBox;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Uniform grid over an axis-aligned box; cells indexed row-major by axis.
#[derive(Debug, Clone)]
pub struct GridPartition {
    pub domain: DomainBox,
    pub cells_per_dim: Vec<usize>,
}

impl GridPartition {
    pub fn new(domain: DomainBox, cells_per_dim: Vec<usize>) -> Result<Self> {
        if cells_per_dim.len() != domain.dim() || cells_per_dim.iter().any(|&c| c == 0) {
            return Err(Error::InvalidInput("bad partition grid".into()));
        }
        Ok(GridPartition {
            domain,
            cells_per_dim,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.cells_per_dim.iter().product()
    }

    /// Flat index of the cell containing x, or None when x escapes the box.
    pub fn cell_of(&self, x: &DVector<f64>) -> Option<usize> {
        let mut idx = 0usize;
        for d in 0..self.domain.dim() {
            let lo = self.domain.lo[d];
            let hi = self.domain.hi[d];
            if x[d] < lo || x[d] > hi {
                return None;
            }
            let cells = self.cells_per_dim[d];
            let frac = (x[d] - lo) / (hi - lo);
            let c = ((frac * cells as f64) as usize).min(cells - 1);
            idx = idx * cells + c;
        }
        Some(idx)
    }

    /// Bounds of cell j.
    pub fn cell_bounds(&self, mut j: usize) -> (DVector<f64>, DVector<f64>) {
        let dim = self.domain.dim();
        let mut coords = vec![0usize; dim];
        for d in (0..dim).rev() {
            coords[d] = j % self.cells_per_dim[d];
            j /= self.cells_per_dim[d];
        }
        let mut lo = DVector::zeros(dim);
        let mut hi = DVector::zeros(dim);
        for d in 0..dim {
            let w = (self.domain.hi[d] - self.domain.lo[d]) / self.cells_per_dim[d] as f64;
            lo[d] = self.domain.lo[d] + coords[d] as f64 * w;
            hi[d] = lo[d] + w;
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone)]
pub struct UlamMatrix {
    /// Column-stochastic transition matrix: u[(i, j)] is the fraction of
    /// samples seeded in cell j whose image lands in cell i.
    pub u: DMatrix<f64>,
    pub partition: GridPartition,
    /// Map evolution time (metadata; the map itself is supplied as a closure).
    pub map_time: f64,
    pub samples_per_cell: usize,
    /// Escaped-sample count per source cell.
    pub escaped: Vec<usize>,
}

impl UlamMatrix {
    /// Cells whose samples all escaped (their columns were set to self-loops).
    pub fn fully_escaped_cells(&self) -> Vec<usize> {
        self.escaped
            .iter()
            .enumerate()
            .filter(|&(_, &e)| e == self.samples_per_cell)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Monte-Carlo Ulam matrix: seed `samples_per_cell` points uniformly in each
/// cell (an independent seeded stream per cell, so results are reproducible
/// and mergeable in any evaluation order), push them through the map, and
/// record the landing-cell fractions over the retained mass.
pub fn ulam_matrix(
    map: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    partition: &GridPartition,
    samples_per_cell: usize,
    map_time: f64,
    seed: u64,
) -> Result<UlamMatrix> {
    if samples_per_cell == 0 {
        return Err(Error::InvalidInput("samples_per_cell must be >= 1".into()));
    }
    let n = partition.n_cells();
    let mut u = DMatrix::<f64>::zeros(n, n);
    let mut escaped = vec![0usize; n];
    for j in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64 + 1);
        let (lo, hi) = partition.cell_bounds(j);
        let mut counts = vec![0usize; n];
        let mut retained = 0usize;
        for _ in 0..samples_per_cell {
            let x = DVector::from_fn(lo.len(), |d, _| rng.gen_range(lo[d]..hi[d]));
            let y = map(&x);
            match partition.cell_of(&y) {
                Some(i) => {
                    counts[i] += 1;
                    retained += 1;
                }
                None => escaped[j] += 1,
            }
        }
        if retained == 0 {
            // no mass retained: keep the chain stochastic with a self-loop
            u[(j, j)] = 1.0;
        } else {
            for i in 0..n {
                u[(i, j)] = counts[i] as f64 / retained as f64;
            }
        }
    }
    Ok(UlamMatrix {
        u,
        partition: partition.clone(),
        map_time,
        samples_per_cell,
        escaped,
    })
}
