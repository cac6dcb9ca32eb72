//! Multiplier elimination for the constrained dynamics `Gamma = Gamma_L + Lambda_L(f)`, `f in F`.
//!
//! Pairing `Gamma` with every row `beta^B = (gamma^B | beta^B)` of `D^0` gives
//! the linear system
//!
//! ```text
//! sum_C (beta^B . W . f^C) lambda_C = -(gamma^B . v + beta^B . a_free) = -rho^B
//! ```
//!
//! with `W = H^-1`. The constrained acceleration is then
//! `a = a_free + W sum_C lambda_C f^C`. Forces are horizontal, so `(v, a)` is
//! second order by construction.

mod algorithm;
mod theorem;

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::constraints::NonholonomicProblem;
use crate::error::Result;
use crate::linalg;
use crate::mechanics::State;

pub use algorithm::{
    integrability_algorithm, AlgorithmStep, AlgorithmTrace, Verdict, DEFAULT_DEPTH,
    FD_STEP, MEMBERSHIP_TOL,
};
pub use theorem::{check_theorem2, TheoremReport};

/// Relative least-squares residual separating underdetermined from infeasible systems.
pub const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Unique,
    /// Consistent but rank deficient; carries the kernel dimension.
    Underdetermined(usize),
    Infeasible,
}

impl Classification {
    pub fn is_feasible(self) -> bool {
        !matches!(self, Self::Infeasible)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unique => f.write_str("unique"),
            Self::Underdetermined(k) => write!(f, "underdetermined({k})"),
            Self::Infeasible => f.write_str("infeasible"),
        }
    }
}

/// `M^{BC} = W^{ij} f_i^B beta_j^C`: rows index force generators, columns
/// index `D^0` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityMatrix {
    pub m: DMatrix<f64>,
    pub rank: usize,
    pub rcond: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SodeResult {
    pub classification: Classification,
    pub velocity: DVector<f64>,
    pub acceleration: Option<DVector<f64>>,
    pub multipliers: Option<DVector<f64>>,
    /// Norm of the least-squares residual of the multiplier system.
    pub residual: f64,
}

impl SodeResult {
    /// The prolonged field `(v, a)`; its first half is `v` itself.
    pub fn field(&self) -> Option<DVector<f64>> {
        let a = self.acceleration.as_ref()?;
        let n = self.velocity.len();
        Some(DVector::from_fn(2 * n, |i, _| {
            if i < n {
                self.velocity[i]
            } else {
                a[i - n]
            }
        }))
    }
}

/// Evaluated multiplier system at one state.
#[derive(Debug, Clone)]
pub(crate) struct MultiplierSystem {
    /// `k x c`, `N[B][C] = beta^B . W . f^C`
    pub matrix: DMatrix<f64>,
    /// drift `rho^B = gamma^B . v + beta^B . a_free`
    pub rho: DVector<f64>,
    pub w: DMatrix<f64>,
    pub forces: DMatrix<f64>,
    pub a_free: DVector<f64>,
    /// `|beta| |W f^T|`, the magnitude below which entries of `matrix` are cancellation noise
    pub scale: f64,
}

impl MultiplierSystem {
    /// `rows` are `2n` covectors (the `D^0` spanning set, possibly enlarged).
    pub(crate) fn assemble(
        p: &NonholonomicProblem,
        s: &State,
        rows: &DMatrix<f64>,
    ) -> Result<Self> {
        let model = p.model();
        let n = model.dim();
        let (_, w) = model.regular_hessian(s)?;
        let a_free = &w * model.euler_lagrange_rhs(s)?;
        let forces = p.force_rows(s)?;
        let gamma = rows.columns(0, n);
        let beta = rows.columns(n, n);
        let rho = gamma * &s.v + beta * &a_free;
        let wf = &w * forces.transpose();
        let scale = beta.norm() * wf.norm();
        let matrix = beta * wf;
        Ok(Self {
            matrix,
            rho,
            w,
            forces,
            a_free,
            scale,
        })
    }

    pub(crate) fn solve(&self, velocity: &DVector<f64>) -> SodeResult {
        let c = self.matrix.ncols();
        let ls = linalg::least_squares_scaled(&self.matrix, &(-&self.rho), self.scale);
        let residual = ls.residual.norm();
        let consistent = residual <= CONSISTENCY_TOL * (1.0 + self.rho.norm());
        let classification = if !consistent {
            Classification::Infeasible
        } else if ls.rank == c {
            Classification::Unique
        } else {
            Classification::Underdetermined(c - ls.rank)
        };
        let (acceleration, multipliers) = if consistent {
            let a = &self.a_free + &self.w * self.forces.transpose() * &ls.x;
            (Some(a), Some(ls.x))
        } else {
            (None, None)
        };
        SodeResult {
            classification,
            velocity: velocity.clone(),
            acceleration,
            multipliers,
            residual,
        }
    }

    /// Least-squares residual vector `N lambda + rho`; zero when consistent.
    pub(crate) fn inconsistency(&self) -> DVector<f64> {
        linalg::least_squares_scaled(&self.matrix, &(-&self.rho), self.scale).residual
    }
}

/// The pairing matrix between force generators and `D^0` rows.
pub fn compatibility_matrix(p: &NonholonomicProblem, s: &State) -> Result<CompatibilityMatrix> {
    let rows = p.annihilator_basis(s)?;
    let sys = MultiplierSystem::assemble(p, s, &rows)?;
    let m = sys.matrix.transpose();
    let rank = linalg::rank_scaled(&m, sys.scale);
    let rcond = if rank < m.nrows().min(m.ncols()) { 0.0 } else { linalg::rcond(&m) };
    Ok(CompatibilityMatrix { rank, rcond, m })
}

/// Solves for the multipliers and the constrained acceleration at `s`.
///
/// `s` need not lie on the constraint set; off `C` the result is the field
/// that keeps every constraint value constant to first order.
pub fn solve_sode(p: &NonholonomicProblem, s: &State) -> Result<SodeResult> {
    let rows = p.annihilator_basis(s)?;
    let sys = MultiplierSystem::assemble(p, s, &rows)?;
    Ok(sys.solve(&s.v))
}
