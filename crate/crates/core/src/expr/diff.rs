//! Symbolic partial differentiation by tree rewriting.

use super::{BinaryOp, Expression, UnaryOp, Variable};

impl Expression {
    /// Exact partial derivative with respect to `wrt`. Only literal zeros,
    /// ones and constant operands are folded.
    pub fn diff(&self, wrt: &Variable) -> Expression {
        use Expression as E;
        match self {
            E::Constant(_) => E::zero(),
            E::Variable(v) => {
                if v.kind == wrt.kind && v.index == wrt.index {
                    E::Constant(1.0)
                } else {
                    E::zero()
                }
            }
            E::Unary(op, a) => {
                let da = a.diff(wrt);
                if da.is_zero() {
                    return E::zero();
                }
                let a = (**a).clone();
                let outer = match op {
                    UnaryOp::Neg => return E::neg(da),
                    UnaryOp::Sin => E::unary(UnaryOp::Cos, a),
                    UnaryOp::Cos => E::neg(E::unary(UnaryOp::Sin, a)),
                    // 1 + tan^2
                    UnaryOp::Tan => E::add(
                        E::Constant(1.0),
                        E::pow(E::unary(UnaryOp::Tan, a), E::Constant(2.0)),
                    ),
                    UnaryOp::Exp => E::unary(UnaryOp::Exp, a),
                    UnaryOp::Log => return E::div(da, a),
                    UnaryOp::Sqrt => {
                        return E::div(da, E::mul(E::Constant(2.0), E::unary(UnaryOp::Sqrt, a)))
                    }
                };
                E::mul(outer, da)
            }
            E::Binary(op, a, b) => {
                let da = a.diff(wrt);
                let db = b.diff(wrt);
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinaryOp::Add => E::add(da, db),
                    BinaryOp::Sub => E::sub(da, db),
                    BinaryOp::Mul => E::add(E::mul(da, b), E::mul(a, db)),
                    BinaryOp::Div => {
                        if db.is_zero() {
                            E::div(da, b)
                        } else {
                            // (a' b - a b') / b^2
                            E::div(
                                E::sub(E::mul(da, b.clone()), E::mul(a, db)),
                                E::pow(b, E::Constant(2.0)),
                            )
                        }
                    }
                    BinaryOp::Pow => match b {
                        E::Constant(c) => E::mul(
                            E::mul(E::Constant(c), E::pow(a, E::Constant(c - 1.0))),
                            da,
                        ),
                        b => {
                            // a^b (b' ln a + b a' / a)
                            let log_term = if db.is_zero() {
                                E::zero()
                            } else {
                                E::mul(db, E::unary(UnaryOp::Log, a.clone()))
                            };
                            let base_term = if da.is_zero() {
                                E::zero()
                            } else {
                                E::div(E::mul(b.clone(), da), a.clone())
                            };
                            let inner = E::add(log_term, base_term);
                            if inner.is_zero() {
                                E::zero()
                            } else {
                                E::mul(E::pow(a, b), inner)
                            }
                        }
                    },
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{Bindings, ExprError, Scope};

    fn scope() -> Scope {
        Scope::new(&["x", "theta", "phi", "x1", "y1", "x2", "y2"], &["R"]).unwrap()
    }

    #[test]
    fn derivative_of_half_square_is_the_velocity() {
        let s = scope();
        let e = s.parse("dx^2/2").unwrap();
        let d = s.diff(&e, "dx").unwrap();
        for x in [-2.0, 0.0, 0.5, 3.0] {
            let env = Bindings::from_pairs(&[("dx", x)]);
            assert_eq!(d.eval(&env).unwrap(), x);
        }
    }

    #[test]
    fn rolling_constraint_theta_derivative() {
        let s = scope();
        let e = s.parse("R*cos(theta)*dphi").unwrap();
        let d = s.diff(&e, "theta").unwrap();
        let want = s.parse("-R*sin(theta)*dphi").unwrap();
        for (r, th, dp) in [(1.0, 0.3, 2.0), (0.7, -1.1, 0.4), (2.0, 2.5, -3.0)] {
            let b = Bindings::from_pairs(&[("R", r), ("theta", th), ("dphi", dp)]);
            let got = d.eval(&b).unwrap();
            assert!((got - want.eval(&b).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn parallel_velocity_constraint_derivative() {
        let s = scope();
        let e = s.parse("dx1*dy2 - dx2*dy1").unwrap();
        assert_eq!(s.diff(&e, "dy2").unwrap(), s.parse("dx1").unwrap());
        assert_eq!(s.diff(&e, "dx2").unwrap(), s.parse("-dy1").unwrap());
    }

    #[test]
    fn parameters_are_not_differentiable() {
        let s = scope();
        let e = s.parse("R*dx").unwrap();
        assert_eq!(s.diff(&e, "R"), Err(ExprError::UnknownVariable("R".into())));
        assert_eq!(s.diff(&e, "q7"), Err(ExprError::UnknownVariable("q7".into())));
    }

    #[test]
    fn general_power_rule() {
        let s = scope();
        let e = s.parse("x^theta").unwrap();
        let b = Bindings::from_pairs(&[("x", 1.7), ("theta", 0.6)]);
        let dx = s.diff(&e, "x").unwrap().eval(&b).unwrap();
        let dt = s.diff(&e, "theta").unwrap().eval(&b).unwrap();
        assert!((dx - 0.6 * 1.7f64.powf(-0.4)).abs() < 1e-14);
        assert!((dt - 1.7f64.powf(0.6) * 1.7f64.ln()).abs() < 1e-14);
    }
}
