use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::column_basis;

/// Column basis `A` of a matrix `M` with `(alpha, beta, z)` conditioning:
/// `(sum |a_ij|^z)^(1/z) <= alpha` and `||u||_{z'} <= beta ||A u||_z`.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionedBasis {
    /// Row-major `rows x rank`.
    pub a: Vec<f64>,
    pub rows: usize,
    pub rank: usize,
    pub alpha: f64,
    pub beta: f64,
    pub z: f64,
    /// `beta` comes from norm equivalence and grows with the row count.
    pub loose: bool,
}

impl ConditionedBasis {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.rank..(i + 1) * self.rank]
    }

    /// `||A_i||_z^z * beta^z`: bound on the share of row `i` in `||M u||_z^z`.
    pub fn row_bounds(&self) -> Vec<f64> {
        let bz = self.beta.powf(self.z);
        (0..self.rows).map(|i| self.row(i).iter().map(|x| x.abs().powf(self.z)).sum::<f64>() * bz).collect()
    }
}

/// Orthonormal column basis of the row-major `rows x cols` matrix `m`.
///
/// For z = 2 it is exactly `(sqrt(rank), 1, 2)`-conditioned. For other z the
/// same basis is returned with `beta = rank^max(0, 1/z' - 1/2) * rows^max(0, 1/2 - 1/z)`.
pub fn conditioned_basis(m: &[f64], rows: usize, cols: usize, z: f64) -> Result<ConditionedBasis> {
    if rows == 0 || cols == 0 || m.len() != rows * cols {
        return Err(Error::input(format!("expected a {rows}x{cols} matrix, got {} entries", m.len())));
    }
    if !(z >= 1.0) {
        return Err(Error::input(format!("conditioned bases need z >= 1, got {z}")));
    }
    let (a, rank) = column_basis(m, rows, cols, 1e-12);
    if rank == 0 {
        return Err(Error::capability("matrix has rank 0; no conditioned basis exists"));
    }
    let alpha = a.iter().map(|x| x.abs().powf(z)).sum::<f64>().powf(1.0 / z);
    let (beta, loose) = if z == 2.0 {
        (1.0, false)
    } else {
        let inv_dual = 1.0 - 1.0 / z;
        let b = (rank as f64).powf((inv_dual - 0.5).max(0.0)) * (rows as f64).powf((0.5 - 1.0 / z).max(0.0));
        (b, true)
    };
    Ok(ConditionedBasis { a, rows, rank, alpha, beta, z, loose })
}
