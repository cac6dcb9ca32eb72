//! Pointwise verification of the compatibility hypotheses: the rank
//! condition `rank F = corank D`, the intersection condition
//! `D^0 ∩ F^⊥ = 0`, regularity `S_C ∩ TC = 0` and definiteness of the Hessian.
//!
//! Everything is computed in the `2n` coordinate frame from the evaluated
//! `Lambda_L`, independently of the multiplier system.

use nalgebra::DMatrix;

use crate::constraints::NonholonomicProblem;
use crate::error::Result;
use crate::linalg;
use crate::mechanics::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TheoremReport {
    /// `rank F = rank D^0 = r + s`
    pub rank_condition: bool,
    pub force_rank: usize,
    pub annihilator_rank: usize,
    /// `r + s`
    pub nominal_corank: usize,
    /// `dim(span D^0 ∩ F^⊥) = 0`
    pub intersection_condition: bool,
    pub intersection_dim: usize,
    /// `d psi` has rank `r` and `S_C ∩ TC = 0`, with `S_C = S(TC^⊥)`
    pub regularity: bool,
    pub regularity_dim: usize,
    pub constraint_rank: usize,
    pub definite_hessian: bool,
}

impl TheoremReport {
    pub fn compatible(&self) -> bool {
        self.rank_condition && self.intersection_condition
    }
}

pub fn check_theorem2(p: &NonholonomicProblem, s: &State) -> Result<TheoremReport> {
    let model = p.model();
    let n = model.dim();
    let sd = model.symplectic_data(s)?;
    let h = model.hessian(s)?;

    let d0 = p.annihilator_basis(s)?;
    let forces = p.force_rows(s)?;
    let mut f2n = DMatrix::zeros(forces.nrows(), 2 * n);
    f2n.view_mut((0, 0), (forces.nrows(), n)).copy_from(&forces);

    let force_rank = linalg::rank(&f2n);
    let annihilator_rank = linalg::rank(&d0);
    let nominal_corank = p.annihilator_count();
    let rank_condition = force_rank == annihilator_rank && annihilator_rank == nominal_corank;

    // alpha in F^⊥  <=>  Lambda(alpha, f^C) = alpha^T lambda^T f^C = 0 for all C
    let basis = linalg::row_space(&d0);
    let lf = sd.lambda.transpose() * f2n.transpose();
    let pairing = &basis * &lf;
    let intersection_dim = basis.nrows() - linalg::rank_scaled(&pairing, lf.norm());

    // TC^⊥ = omega^-1((TC)^0); S maps (xi_q, xi_v) to (0, xi_q)
    let dpsi = p.constraint_differentials(s)?;
    let constraint_rank = linalg::rank(&dpsi);
    let tc_perp = -(&sd.lambda * dpsi.transpose());
    let mut s_c = DMatrix::zeros(2 * n, dpsi.nrows());
    s_c.view_mut((n, 0), (n, dpsi.nrows()))
        .copy_from(&tc_perp.rows(0, n));
    let s_c_basis = linalg::column_space(&s_c);
    let regularity_dim = s_c_basis.ncols() - linalg::rank_scaled(&(&dpsi * &s_c_basis), dpsi.norm());
    let regularity = constraint_rank == p.constraint_count() && regularity_dim == 0;

    Ok(TheoremReport {
        rank_condition,
        force_rank,
        annihilator_rank,
        nominal_corank,
        intersection_condition: intersection_dim == 0,
        intersection_dim,
        regularity,
        regularity_dim,
        constraint_rank,
        definite_hessian: is_definite(&h),
    })
}

fn is_definite(h: &DMatrix<f64>) -> bool {
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen().eigenvalues;
    let scale = eig.amax();
    if scale == 0.0 {
        return false;
    }
    let tol = 1e-12 * scale;
    eig.iter().all(|&e| e > tol) || eig.iter().all(|&e| e < -tol)
}
