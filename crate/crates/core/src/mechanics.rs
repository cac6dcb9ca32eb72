//! Geometry of a regular Lagrangian in a single chart of TQ: Hessian,
//! Euler-Lagrange field, energy, Legendre map, Cartan 2-form and its inverse.
//!
//! All first and second partials of `L` are derived symbolically once, at
//! construction; every per-state quantity is evaluated fresh.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{Expression, Scope, SlotEnv};
use crate::linalg;

/// Below this reciprocal condition number the Hessian is treated as singular.
pub const HESSIAN_RCOND_MIN: f64 = 1e-12;

/// A point of TQ.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub q: DVector<f64>,
    pub v: DVector<f64>,
}

impl State {
    pub fn new(q: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(q.len(), v.len(), "q and v must have equal length");
        Self {
            q: DVector::from_vec(q),
            v: DVector::from_vec(v),
        }
    }

    /// Splits a `2n` vector `(q, v)`.
    pub fn from_slice(x: &[f64]) -> Self {
        assert!(x.len().is_multiple_of(2), "state vector must have even length");
        let n = x.len() / 2;
        Self::new(x[..n].to_vec(), x[n..].to_vec())
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let n = self.dim();
        DVector::from_fn(2 * n, |i, _| if i < n { self.q[i] } else { self.v[i - n] })
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }

    pub(crate) fn offset(&self, dir: &DVector<f64>, h: f64) -> State {
        let n = self.dim();
        State {
            q: &self.q + dir.rows(0, n) * h,
            v: &self.v + dir.rows(n, n) * h,
        }
    }
}

/// Cartan 2-form and its inverse at one state, in the basis
/// `(d/dq_1..d/dq_n, d/dv_1..d/dv_n)`.
///
/// `omega[(a, b)] = omega_L(e_a, e_b)`, `lambda = omega^-1`. The Poisson
/// pairing of two covectors is `Lambda_L(alpha, beta) = alpha^T lambda^T beta`,
/// so `Lambda_L(dq_i, dv_j)` is the `(v_j, q_i)` entry of `lambda`, i.e. `H^-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticData {
    pub omega: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
}

impl SymplecticData {
    pub fn dim(&self) -> usize {
        self.omega.nrows() / 2
    }

    /// `Lambda_L(alpha, beta)` for covectors given as `2n` coefficient vectors.
    pub fn pairing(&self, alpha: &DVector<f64>, beta: &DVector<f64>) -> f64 {
        (alpha.transpose() * self.lambda.transpose() * beta)[(0, 0)]
    }

    /// The `W^{ij} = Lambda_L(dq_i, dv_j)` block.
    pub fn w_block(&self) -> DMatrix<f64> {
        let n = self.dim();
        self.lambda.view((n, 0), (n, n)).transpose()
    }

    /// Vector field `X` with `i_X omega_L = alpha`.
    pub fn hamiltonian_vector(&self, alpha: &DVector<f64>) -> DVector<f64> {
        -(&self.lambda * alpha)
    }
}

#[derive(Debug, Clone)]
pub struct LagrangianModel {
    scope: Scope,
    param_values: Vec<f64>,
    lagrangian: Expression,
    dl_dq: Vec<Expression>,
    dl_dv: Vec<Expression>,
    // d2L / dv_i dv_j
    hess: Vec<Vec<Expression>>,
    // mixed[i][j] = d2L / dq_i dv_j
    mixed: Vec<Vec<Expression>>,
}

impl LagrangianModel {
    pub fn new(coords: &[&str], params: &[(&str, f64)], lagrangian: &str) -> Result<Self> {
        let names: Vec<&str> = params.iter().map(|(n, _)| *n).collect();
        let scope = Scope::new(coords, &names)?;
        let values = params.iter().map(|(_, v)| *v).collect();
        let l = scope.parse(lagrangian)?;
        Self::from_parts(scope, values, l)
    }

    pub fn from_parts(scope: Scope, param_values: Vec<f64>, lagrangian: Expression) -> Result<Self> {
        let n = scope.dim();
        if n == 0 {
            return Err(Error::InvalidArgument("model needs at least one coordinate".into()));
        }
        if param_values.len() != scope.params().len() {
            return Err(Error::Arity {
                what: "parameter values".into(),
                expected: scope.params().len(),
                got: param_values.len(),
            });
        }
        if let Some(i) = param_values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "{} = {}",
                scope.params()[i],
                param_values[i]
            )));
        }
        let dl_dq: Vec<_> = (0..n).map(|i| lagrangian.diff(&scope.coordinate(i))).collect();
        let dl_dv: Vec<_> = (0..n).map(|i| lagrangian.diff(&scope.velocity(i))).collect();
        let hess = (0..n)
            .map(|i| (0..n).map(|j| dl_dv[i].diff(&scope.velocity(j))).collect())
            .collect();
        let mixed = (0..n)
            .map(|i| (0..n).map(|j| dl_dv[j].diff(&scope.coordinate(i))).collect())
            .collect();
        Ok(Self {
            scope,
            param_values,
            lagrangian,
            dl_dq,
            dl_dv,
            hess,
            mixed,
        })
    }

    pub fn dim(&self) -> usize {
        self.scope.dim()
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn coords(&self) -> &[String] {
        self.scope.coords()
    }

    pub fn lagrangian(&self) -> &Expression {
        &self.lagrangian
    }

    pub fn params(&self) -> impl Iterator<Item = (&str, f64)> {
        self.scope
            .params()
            .iter()
            .map(String::as_str)
            .zip(self.param_values.iter().copied())
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    pub fn param_values(&self) -> &[f64] {
        &self.param_values
    }

    pub fn parse(&self, text: &str) -> Result<Expression> {
        Ok(self.scope.parse(text)?)
    }

    pub(crate) fn check_state(&self, s: &State) -> Result<()> {
        if s.dim() != self.dim() {
            return Err(Error::Arity {
                what: "state".into(),
                expected: self.dim(),
                got: s.dim(),
            });
        }
        if !s.is_finite() {
            return Err(Error::NonFiniteState);
        }
        Ok(())
    }

    /// Evaluates any expression of this model's scope at `s`.
    pub fn eval(&self, e: &Expression, s: &State) -> Result<f64> {
        let env = SlotEnv {
            q: s.q.as_slice(),
            v: s.v.as_slice(),
            params: &self.param_values,
        };
        Ok(e.eval(&env)?)
    }

    fn eval_vec(&self, es: &[Expression], s: &State) -> Result<DVector<f64>> {
        let vals = es.iter().map(|e| self.eval(e, s)).collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }

    fn eval_mat(&self, es: &[Vec<Expression>], s: &State) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.eval(&es[i][j], s)?;
            }
        }
        Ok(m)
    }

    pub fn lagrangian_value(&self, s: &State) -> Result<f64> {
        self.check_state(s)?;
        self.eval(&self.lagrangian, s)
    }

    /// `H_ij = d2L / dv_i dv_j`.
    pub fn hessian(&self, s: &State) -> Result<DMatrix<f64>> {
        self.check_state(s)?;
        self.eval_mat(&self.hess, s)
    }

    /// `d2L / dq_i dv_j`.
    pub fn mixed_partials(&self, s: &State) -> Result<DMatrix<f64>> {
        self.check_state(s)?;
        self.eval_mat(&self.mixed, s)
    }

    /// Hessian together with its inverse; fails when `L` is not regular at `s`.
    pub fn regular_hessian(&self, s: &State) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let h = self.hessian(s)?;
        let rc = linalg::rcond(&h);
        if !(rc >= HESSIAN_RCOND_MIN) {
            return Err(Error::SingularHessian { rcond: rc });
        }
        let w = linalg::inverse(&h).ok_or(Error::SingularHessian { rcond: rc })?;
        Ok((h, w))
    }

    /// Right-hand side `b_i = dL/dq_i - sum_j (d2L / dq_j dv_i) v_j` of the
    /// Euler-Lagrange equations `H a = b`.
    pub fn euler_lagrange_rhs(&self, s: &State) -> Result<DVector<f64>> {
        self.check_state(s)?;
        let dq = self.eval_vec(&self.dl_dq, s)?;
        let mixed = self.eval_mat(&self.mixed, s)?;
        Ok(dq - mixed.transpose() * &s.v)
    }

    /// Accelerations of the free Euler-Lagrange field at `s`.
    pub fn free_acceleration(&self, s: &State) -> Result<DVector<f64>> {
        let (_, w) = self.regular_hessian(s)?;
        Ok(w * self.euler_lagrange_rhs(s)?)
    }

    /// `E_L = sum_i v_i dL/dv_i - L`.
    pub fn energy(&self, s: &State) -> Result<f64> {
        let p = self.legendre(s)?;
        Ok(p.dot(&s.v) - self.eval(&self.lagrangian, s)?)
    }

    /// Fiber derivative `p_i = dL/dv_i`.
    pub fn legendre(&self, s: &State) -> Result<DVector<f64>> {
        self.check_state(s)?;
        self.eval_vec(&self.dl_dv, s)
    }

    /// `dL/dq_i`.
    pub fn configuration_gradient(&self, s: &State) -> Result<DVector<f64>> {
        self.check_state(s)?;
        self.eval_vec(&self.dl_dq, s)
    }

    /// Cartan 2-form `omega_L = -d(p_i dq^i)` and its inverse.
    ///
    /// Blocks: `omega(dq_k, dq_l) = d2L/dq_l dv_k - d2L/dq_k dv_l`,
    /// `omega(dq, dv) = H`, `omega(dv, dv) = 0`.
    pub fn symplectic_data(&self, s: &State) -> Result<SymplecticData> {
        let (h, _) = self.regular_hessian(s)?;
        let mixed = self.eval_mat(&self.mixed, s)?;
        let n = self.dim();
        let antisym = mixed.transpose() - &mixed;
        let mut omega = DMatrix::zeros(2 * n, 2 * n);
        omega.view_mut((0, 0), (n, n)).copy_from(&antisym);
        omega.view_mut((0, n), (n, n)).copy_from(&h);
        omega.view_mut((n, 0), (n, n)).copy_from(&(-h.transpose()));
        let lambda = linalg::inverse(&omega).ok_or(Error::SingularHessian { rcond: 0.0 })?;
        Ok(SymplecticData { omega, lambda })
    }
}
