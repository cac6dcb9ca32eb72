//! Constraint submanifold `C = {psi = 0}`, the annihilator `D^0` of the
//! permitted directions, and the bundle of reaction forces.
//!
//! `D` is only ever represented through `D^0`: the differentials of the
//! constraint functions followed by the extra direction covectors. Every
//! covector on TQ is a `2n` coefficient row `(gamma | beta)` against
//! `(dq, dv)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::linalg;
use crate::mechanics::{LagrangianModel, State};

/// A 1-form `gamma_i dq^i + beta_i dv^i` with expression coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorField {
    pub gamma: Vec<Expression>,
    pub beta: Vec<Expression>,
}

impl CovectorField {
    /// Horizontal 1-form `gamma_i dq^i`.
    pub fn horizontal(gamma: Vec<Expression>) -> Self {
        let beta = vec![Expression::zero(); gamma.len()];
        Self { gamma, beta }
    }

    pub fn is_horizontal(&self) -> bool {
        self.beta.iter().all(Expression::is_zero)
    }

    fn eval(&self, model: &LagrangianModel, s: &State) -> Result<DVector<f64>> {
        let n = self.gamma.len();
        let mut out = DVector::zeros(2 * n);
        for i in 0..n {
            out[i] = model.eval(&self.gamma[i], s)?;
            out[n + i] = model.eval(&self.beta[i], s)?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForceSpec {
    /// `F = S*(D^0)`.
    Chetaev,
    /// Explicit horizontal generators.
    Custom(Vec<CovectorField>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Admissibility {
    pub admissible: bool,
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct NonholonomicProblem {
    model: LagrangianModel,
    psi: Vec<Expression>,
    // d(psi^a) coefficients, precomputed symbolically
    dpsi: Vec<CovectorField>,
    directions: Vec<CovectorField>,
    forces: ForceSpec,
}

impl NonholonomicProblem {
    /// Validates and assembles `(L, C, D, F)`.
    pub fn build(
        model: LagrangianModel,
        psi: Vec<Expression>,
        directions: Vec<CovectorField>,
        forces: ForceSpec,
    ) -> Result<Self> {
        let n = model.dim();
        for (b, d) in directions.iter().enumerate() {
            if d.gamma.len() != n || d.beta.len() != n {
                return Err(Error::Arity {
                    what: format!("direction covector {}", b + 1),
                    expected: 2 * n,
                    got: d.gamma.len() + d.beta.len(),
                });
            }
        }
        if let ForceSpec::Custom(fs) = &forces {
            for (c, f) in fs.iter().enumerate() {
                if f.gamma.len() != n || f.beta.len() != n {
                    return Err(Error::Arity {
                        what: format!("force covector {}", c + 1),
                        expected: n,
                        got: f.gamma.len(),
                    });
                }
                if !f.is_horizontal() {
                    return Err(Error::NonHorizontalForce(c + 1));
                }
            }
            let required = psi.len() + directions.len();
            if fs.len() != required {
                return Err(Error::DimensionMismatch {
                    forces: fs.len(),
                    required,
                });
            }
        }
        let scope = model.scope();
        let dpsi = psi
            .iter()
            .map(|p| CovectorField {
                gamma: (0..n).map(|i| p.diff(&scope.coordinate(i))).collect(),
                beta: (0..n).map(|i| p.diff(&scope.velocity(i))).collect(),
            })
            .collect();
        Ok(Self {
            model,
            psi,
            dpsi,
            directions,
            forces,
        })
    }

    pub fn model(&self) -> &LagrangianModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn constraints(&self) -> &[Expression] {
        &self.psi
    }

    pub fn directions(&self) -> &[CovectorField] {
        &self.directions
    }

    pub fn forces(&self) -> &ForceSpec {
        &self.forces
    }

    /// `r`
    pub fn constraint_count(&self) -> usize {
        self.psi.len()
    }

    /// `r + s`, the nominal corank of `D`.
    pub fn annihilator_count(&self) -> usize {
        self.psi.len() + self.directions.len()
    }

    pub fn force_count(&self) -> usize {
        match &self.forces {
            ForceSpec::Chetaev => self.annihilator_count(),
            ForceSpec::Custom(fs) => fs.len(),
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        self.annihilator_count() == 0
    }

    pub fn constraint_values(&self, s: &State) -> Result<DVector<f64>> {
        self.model.check_state(s)?;
        let vals = self
            .psi
            .iter()
            .map(|p| self.model.eval(p, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// `max_a |psi^a(s)|`, 0 when unconstrained.
    pub fn constraint_violation(&self, s: &State) -> Result<f64> {
        Ok(self.constraint_values(s)?.amax())
    }

    /// Rows `d psi^a` only, `r x 2n`.
    pub fn constraint_differentials(&self, s: &State) -> Result<DMatrix<f64>> {
        self.model.check_state(s)?;
        self.rows_of(&self.dpsi, s)
    }

    fn rows_of(&self, fields: &[CovectorField], s: &State) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut m = DMatrix::zeros(fields.len(), 2 * n);
        for (r, f) in fields.iter().enumerate() {
            m.set_row(r, &f.eval(&self.model, s)?.transpose());
        }
        Ok(m)
    }

    /// Spanning rows of `D^0` at `s`: `d psi^a` first, then the direction covectors.
    pub fn annihilator_basis(&self, s: &State) -> Result<DMatrix<f64>> {
        self.model.check_state(s)?;
        let n = self.dim();
        let mut m = DMatrix::zeros(self.annihilator_count(), 2 * n);
        let dpsi = self.rows_of(&self.dpsi, s)?;
        let dirs = self.rows_of(&self.directions, s)?;
        m.view_mut((0, 0), (dpsi.nrows(), 2 * n)).copy_from(&dpsi);
        m.view_mut((dpsi.nrows(), 0), (dirs.nrows(), 2 * n)).copy_from(&dirs);
        Ok(m)
    }

    /// `dq` coefficients of `S*` applied to the `D^0` rows.
    pub fn chetaev_forces(&self, s: &State) -> Result<DMatrix<f64>> {
        if !matches!(self.forces, ForceSpec::Chetaev) {
            return Err(Error::WrongForceMode);
        }
        let n = self.dim();
        Ok(self.annihilator_basis(s)?.columns(n, n).into_owned())
    }

    /// `dq` coefficients of the force generators, `c x n`, for either force mode.
    pub fn force_rows(&self, s: &State) -> Result<DMatrix<f64>> {
        match &self.forces {
            ForceSpec::Chetaev => self.chetaev_forces(s),
            ForceSpec::Custom(fs) => {
                self.model.check_state(s)?;
                let n = self.dim();
                Ok(self.rows_of(fs, s)?.columns(0, n).into_owned())
            }
        }
    }

    /// Injectivity of `S*` on `D^0`: the `beta` parts of the `D^0` rows are independent.
    pub fn admissibility(&self, s: &State) -> Result<Admissibility> {
        let n = self.dim();
        let beta = self.annihilator_basis(s)?.columns(n, n).into_owned();
        let rank = linalg::rank(&beta);
        Ok(Admissibility {
            admissible: rank == self.annihilator_count(),
            rank,
        })
    }
}

/// Builds a [`NonholonomicProblem`] from expression text parsed against the model.
#[derive(Debug, Clone)]
pub struct ProblemBuilder {
    model: LagrangianModel,
    psi: Vec<Expression>,
    directions: Vec<CovectorField>,
    forces: Option<Vec<CovectorField>>,
}

impl ProblemBuilder {
    pub fn new(model: LagrangianModel) -> Self {
        Self {
            model,
            psi: Vec::new(),
            directions: Vec::new(),
            forces: None,
        }
    }

    pub fn constraint(mut self, text: &str) -> Result<Self> {
        let e = self.model.parse(text)?;
        self.psi.push(e);
        Ok(self)
    }

    /// `2n` expressions: `gamma` coefficients then `beta` coefficients.
    pub fn direction<S: AsRef<str>>(mut self, coeffs: &[S]) -> Result<Self> {
        let n = self.model.dim();
        if coeffs.len() != 2 * n {
            return Err(Error::Arity {
                what: format!("direction covector {}", self.directions.len() + 1),
                expected: 2 * n,
                got: coeffs.len(),
            });
        }
        let es = coeffs
            .iter()
            .map(|c| self.model.parse(c.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let beta = es[n..].to_vec();
        let gamma = es[..n].to_vec();
        self.directions.push(CovectorField { gamma, beta });
        Ok(self)
    }

    /// `n` expressions: the `dq` coefficients of one horizontal force generator.
    pub fn force<S: AsRef<str>>(mut self, coeffs: &[S]) -> Result<Self> {
        let n = self.model.dim();
        let forces = self.forces.get_or_insert_with(Vec::new);
        if coeffs.len() != n {
            return Err(Error::Arity {
                what: format!("force covector {}", forces.len() + 1),
                expected: n,
                got: coeffs.len(),
            });
        }
        let gamma = coeffs
            .iter()
            .map(|c| self.model.parse(c.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        forces.push(CovectorField::horizontal(gamma));
        Ok(self)
    }

    pub fn build(self) -> Result<NonholonomicProblem> {
        let forces = match self.forces {
            None => ForceSpec::Chetaev,
            Some(fs) => ForceSpec::Custom(fs),
        };
        NonholonomicProblem::build(self.model, self.psi, self.directions, forces)
    }
}
