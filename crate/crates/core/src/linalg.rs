//! Small dense linear algebra on top of nalgebra's SVD: numerical rank,
//! reciprocal condition numbers, orthonormal bases and minimum-norm least squares.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold used for every rank decision.
pub const RANK_TOL: f64 = 1e-9;

fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(0);
    }
    m.clone().svd(false, false).singular_values
}

/// Rank with threshold `RANK_TOL * sigma_max`. A zero matrix has rank 0.
pub fn rank(m: &DMatrix<f64>) -> usize {
    rank_scaled(m, 0.0)
}

/// Rank with threshold `RANK_TOL * max(sigma_max, scale)`.
///
/// For a product `m = a b`, pass `scale = |a| |b|` so that entries left over
/// from cancellation are not mistaken for a full-rank matrix.
pub fn rank_scaled(m: &DMatrix<f64>, scale: f64) -> usize {
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(scale, f64::max);
    if max == 0.0 || !max.is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

/// `sigma_min / sigma_max` of a square matrix; 1 for the empty matrix and 0
/// for the zero matrix.
pub fn rcond(m: &DMatrix<f64>) -> f64 {
    let sv = singular_values(m);
    if sv.is_empty() {
        return 1.0;
    }
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

/// Orthonormal basis (as rows) of the row space of `m`.
pub fn row_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = m.ncols();
    if m.nrows() == 0 || cols == 0 {
        return DMatrix::zeros(0, cols);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| max > 0.0 && svd.singular_values[i] > RANK_TOL * max)
        .collect();
    let mut out = DMatrix::zeros(keep.len(), cols);
    for (r, &i) in keep.iter().enumerate() {
        out.set_row(r, &v_t.row(i));
    }
    out
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    row_space(&m.transpose()).transpose()
}

/// Orthonormal basis (as columns) of the left null space of `m`, i.e. the
/// vectors `u` with `u^T m = 0`.
pub fn left_null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = m.nrows();
    if rows == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.ncols() == 0 {
        return DMatrix::identity(rows, rows);
    }
    // Pad to at least as many columns as rows so that U is complete.
    let padded = if m.ncols() < rows {
        let mut p = DMatrix::zeros(rows, rows);
        p.view_mut((0, 0), (rows, m.ncols())).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(true, false);
    let u = svd.u.expect("requested U");
    let sv = &svd.singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let null: Vec<usize> = (0..rows)
        .filter(|&i| i >= sv.len() || max == 0.0 || sv[i] <= RANK_TOL * max)
        .collect();
    let mut out = DMatrix::zeros(rows, null.len());
    for (c, &i) in null.iter().enumerate() {
        out.set_column(c, &u.column(i));
    }
    out
}

/// Minimum-norm least-squares solution of `a x = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub x: DVector<f64>,
    pub rank: usize,
    /// `a x - b`
    pub residual: DVector<f64>,
}

pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> LeastSquares {
    least_squares_scaled(a, b, 0.0)
}

/// As [`least_squares`], truncating singular values at `RANK_TOL * max(sigma_max, scale)`.
pub fn least_squares_scaled(a: &DMatrix<f64>, b: &DVector<f64>, scale: f64) -> LeastSquares {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return LeastSquares {
            x: DVector::zeros(cols),
            rank: 0,
            residual: -b.clone(),
        };
    }
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().copied().fold(scale, f64::max);
    let r = if max == 0.0 {
        0
    } else {
        svd.singular_values
            .iter()
            .filter(|&&s| s > RANK_TOL * max)
            .count()
    };
    let x = if r == 0 {
        DVector::zeros(cols)
    } else {
        svd.solve(b, RANK_TOL * max).expect("U and V^T computed")
    };
    let residual = a * &x - b;
    LeastSquares { x, rank: r, residual }
}

/// Inverse through LU; `None` when the matrix is exactly singular.
pub fn inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Some(DMatrix::zeros(0, 0));
    }
    m.clone().try_inverse()
}
