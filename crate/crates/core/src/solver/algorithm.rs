//! Constraint algorithm for incompatible configurations.
//!
//! `C_0 = C`. At step `k` the multiplier system is solved with the current
//! row set (the `D^0` spanning set plus every covector appended so far). If it
//! is infeasible at the state, the state is excluded from `C_k`. Otherwise the
//! inconsistency `g = U^T (N lambda + rho)`, with `U` spanning the left null
//! space of `N` at the state, defines the next constraint functions; their
//! numerical differentials are frozen and appended. The algorithm stops when
//! the appended differentials add no rank.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::{Classification, MultiplierSystem};
use crate::constraints::NonholonomicProblem;
use crate::error::{Error, Result};
use crate::linalg;
use crate::mechanics::State;

/// Membership tolerance for `max |psi| = 0`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Central-difference step for the differentials of the secondary constraints.
pub const FD_STEP: f64 = 1e-6;
pub const DEFAULT_DEPTH: usize = 3;
/// Differentials below this norm are truncation noise of the difference quotient.
const GRADIENT_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmStep {
    pub k: usize,
    pub member: bool,
    pub feasible: bool,
    /// Step 0: `max |psi|`. Later steps: least-squares residual norm.
    pub appended_residual: f64,
    pub appended_rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    CompatibleUnique,
    CompatibleNonUnique,
    ExcludedAtStep(usize),
    DepthExhausted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CompatibleUnique => f.write_str("compatible, unique"),
            Self::CompatibleNonUnique => f.write_str("compatible, non-unique"),
            Self::ExcludedAtStep(k) => write!(f, "excluded at step {k}"),
            Self::DepthExhausted => f.write_str("depth exhausted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmTrace {
    pub steps: Vec<AlgorithmStep>,
    pub verdict: Verdict,
}

pub fn integrability_algorithm(
    p: &NonholonomicProblem,
    s: &State,
    max_depth: usize,
) -> Result<AlgorithmTrace> {
    if max_depth == 0 {
        return Err(Error::InvalidArgument("algorithm depth must be at least 1".into()));
    }
    let n = p.dim();
    let violation = p.constraint_violation(s)?;
    let member = violation <= MEMBERSHIP_TOL;
    let mut steps = vec![AlgorithmStep {
        k: 0,
        member,
        feasible: member,
        appended_residual: violation,
        appended_rows: 0,
    }];
    if !member {
        return Ok(AlgorithmTrace {
            steps,
            verdict: Verdict::ExcludedAtStep(0),
        });
    }

    let mut appended = DMatrix::<f64>::zeros(0, 2 * n);
    for k in 1..=max_depth {
        let rows = with_appended(&p.annihilator_basis(s)?, &appended);
        let sys = MultiplierSystem::assemble(p, s, &rows)?;
        let result = sys.solve(&s.v);
        let mut step = AlgorithmStep {
            k,
            member: true,
            feasible: result.classification.is_feasible(),
            appended_residual: result.residual,
            appended_rows: 0,
        };
        if !step.feasible {
            step.member = false;
            steps.push(step);
            return Ok(AlgorithmTrace {
                steps,
                verdict: Verdict::ExcludedAtStep(k),
            });
        }

        let u = linalg::left_null_space(&sys.matrix);
        let grad = if u.ncols() == 0 {
            DMatrix::zeros(0, 2 * n)
        } else {
            secondary_differentials(p, s, &appended, &u)?
        };
        let grown = with_appended(&rows, &grad);
        if grad.nrows() == 0 || linalg::rank(&grown) == linalg::rank(&rows) {
            steps.push(step);
            let verdict = match result.classification {
                Classification::Unique => Verdict::CompatibleUnique,
                _ => Verdict::CompatibleNonUnique,
            };
            return Ok(AlgorithmTrace { steps, verdict });
        }
        step.appended_rows = grad.nrows();
        steps.push(step);
        appended = with_appended(&appended, &grad);
    }
    Ok(AlgorithmTrace {
        steps,
        verdict: Verdict::DepthExhausted,
    })
}

fn with_appended(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

/// Rows of the central-difference Jacobian of `x -> U^T (N(x) lambda(x) + rho(x))`,
/// dropping rows that vanish to within the difference noise.
fn secondary_differentials(
    p: &NonholonomicProblem,
    s: &State,
    appended: &DMatrix<f64>,
    u: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = p.dim();
    let g = |x: &State| -> Result<DVector<f64>> {
        let rows = with_appended(&p.annihilator_basis(x)?, appended);
        let sys = MultiplierSystem::assemble(p, x, &rows)?;
        Ok(u.transpose() * sys.inconsistency())
    };
    let mut jac = DMatrix::zeros(u.ncols(), 2 * n);
    for j in 0..2 * n {
        let e = DVector::from_fn(2 * n, |i, _| if i == j { 1.0 } else { 0.0 });
        let plus = g(&s.offset(&e, FD_STEP))?;
        let minus = g(&s.offset(&e, -FD_STEP))?;
        jac.set_column(j, &((plus - minus) / (2.0 * FD_STEP)));
    }
    let kept: Vec<usize> = (0..jac.nrows())
        .filter(|&i| jac.row(i).norm() > GRADIENT_FLOOR)
        .collect();
    let mut out = DMatrix::zeros(kept.len(), 2 * n);
    for (r, &i) in kept.iter().enumerate() {
        out.set_row(r, &jac.row(i));
    }
    Ok(out)
}
