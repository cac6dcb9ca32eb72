//! Fixed-step integration of the constrained second-order field with
//! energy, constraint, multiplier and momentum monitors.

use nalgebra::DVector;

use crate::constraints::NonholonomicProblem;
use crate::error::{Error, Result};
use crate::linalg;
use crate::mechanics::State;
use crate::solver::{solve_sode, Classification, SodeResult};

/// `s0` counts as on the constraint set when `max |psi| <= ON_CONSTRAINT_TOL`.
pub const ON_CONSTRAINT_TOL: f64 = 1e-9;
pub const PROJECTION_TOL: f64 = 1e-12;
pub const PROJECTION_MAX_ITER: usize = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimulateOptions {
    /// Project velocities back onto the constraint set after every step.
    pub project: bool,
    /// Integrate through underdetermined states with the minimum-norm multiplier.
    pub allow_underdetermined: bool,
    /// Skip the check that `s0` satisfies the constraints.
    pub allow_off_constraint: bool,
}

/// Recorded run. All per-sample lists have the same length and `times` is
/// strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub coords: Vec<String>,
    pub constraint_count: usize,
    pub multiplier_count: usize,
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub energy: Vec<f64>,
    pub psi_residuals: Vec<DVector<f64>>,
    pub lambdas: Vec<DVector<f64>>,
    pub momenta: Vec<DVector<f64>>,
    /// Set when any recorded or stage state was underdetermined.
    pub non_unique: bool,
}

impl Trajectory {
    pub fn empty(coords: Vec<String>, constraint_count: usize, multiplier_count: usize) -> Self {
        Self {
            coords,
            constraint_count,
            multiplier_count,
            times: Vec::new(),
            states: Vec::new(),
            energy: Vec::new(),
            psi_residuals: Vec::new(),
            lambdas: Vec::new(),
            momenta: Vec::new(),
            non_unique: false,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    /// `max_t max_a |psi^a(t)|`
    pub fn max_constraint_drift(&self) -> f64 {
        self.psi_residuals.iter().map(|p| p.amax()).fold(0.0, f64::max)
    }

    /// `max_t |E(t) - E(0)|`
    pub fn max_energy_drift(&self) -> f64 {
        let Some(&e0) = self.energy.first() else {
            return 0.0;
        };
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    /// `max_t |p_i(t) - p_i(0)|`
    pub fn max_momentum_drift(&self, i: usize) -> f64 {
        let Some(p0) = self.momenta.first() else {
            return 0.0;
        };
        self.momenta.iter().map(|p| (p[i] - p0[i]).abs()).fold(0.0, f64::max)
    }
}

fn stage(
    p: &NonholonomicProblem,
    s: &State,
    index: usize,
    allow_underdetermined: bool,
) -> Result<SodeResult> {
    let r = solve_sode(p, s)?;
    match r.classification {
        Classification::Unique => Ok(r),
        Classification::Underdetermined(_) if allow_underdetermined => Ok(r),
        classification => Err(Error::StageFailure {
            stage: index,
            classification,
        }),
    }
}

fn field(r: &SodeResult) -> DVector<f64> {
    r.field().expect("feasible stage carries an acceleration")
}

/// One classical Runge-Kutta step given the already evaluated first stage.
fn rk4_from(
    p: &NonholonomicProblem,
    s: &State,
    k1: &SodeResult,
    h: f64,
    allow_underdetermined: bool,
    non_unique: &mut bool,
) -> Result<State> {
    let mut track = |r: SodeResult| {
        *non_unique |= r.classification != Classification::Unique;
        field(&r)
    };
    let k1 = track(k1.clone());
    let k2 = track(stage(p, &s.offset(&k1, h / 2.0), 2, allow_underdetermined)?);
    let k3 = track(stage(p, &s.offset(&k2, h / 2.0), 3, allow_underdetermined)?);
    let k4 = track(stage(p, &s.offset(&k3, h), 4, allow_underdetermined)?);
    let incr = (k1 + k2 * 2.0 + k3 * 2.0 + k4) / 6.0;
    let next = s.offset(&incr, h);
    if !next.is_finite() {
        return Err(Error::NonFiniteState);
    }
    Ok(next)
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("step size must be positive, got {h}")))
    }
}

/// Classical four-stage Runge-Kutta step of the field `(v, a)`; every stage
/// must be uniquely solvable.
pub fn rk4_step(p: &NonholonomicProblem, s: &State, h: f64) -> Result<State> {
    check_step(h)?;
    let k1 = stage(p, s, 1, false)?;
    rk4_from(p, s, &k1, h, false, &mut false)
}

/// Moves `v` onto `psi(q, v) = 0` by Newton steps of minimal `H`-norm,
/// `dv = -W J^T (J W J^T)^-1 psi` with `J = d psi / d v`. `q` is untouched.
pub fn project_to_constraints(p: &NonholonomicProblem, s: &State) -> Result<State> {
    let n = p.dim();
    let mut cur = s.clone();
    if p.constraint_count() == 0 {
        p.model().energy(&cur)?;
        return Ok(cur);
    }
    for _ in 0..=PROJECTION_MAX_ITER {
        let psi = p.constraint_values(&cur)?;
        let residual = psi.amax();
        if residual <= PROJECTION_TOL {
            return Ok(cur);
        }
        let j = p.constraint_differentials(&cur)?.columns(n, n).into_owned();
        if linalg::rank(&j) < j.nrows() {
            return Err(Error::NotProjectable);
        }
        let (_, w) = p.model().regular_hessian(&cur)?;
        let wjt = &w * j.transpose();
        let gram = &j * &wjt;
        let mu = gram.lu().solve(&psi).ok_or(Error::NotProjectable)?;
        cur.v -= wjt * mu;
        if !cur.is_finite() {
            return Err(Error::NonFiniteState);
        }
    }
    let residual = p.constraint_values(&cur)?.amax();
    if residual <= PROJECTION_TOL {
        Ok(cur)
    } else {
        Err(Error::ProjectionFailed { residual })
    }
}

/// Integrates from `s0` to `t_end` with fixed step `h`; the final step is
/// shortened so that the last sample lands on `t_end` exactly.
pub fn simulate(
    p: &NonholonomicProblem,
    s0: &State,
    h: f64,
    t_end: f64,
    opts: SimulateOptions,
) -> Result<Trajectory> {
    check_step(h)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("end time must be positive, got {t_end}")));
    }
    let model = p.model();
    if !opts.allow_off_constraint {
        let residual = p.constraint_violation(s0)?;
        if residual > ON_CONSTRAINT_TOL {
            return Err(Error::OffConstraint { residual });
        }
    }
    let steps = ((t_end / h) - 1e-9).ceil().max(1.0) as usize;
    let mut tr = Trajectory::empty(model.coords().to_vec(), p.constraint_count(), p.force_count());
    let at = |t: f64, s: &State| {
        let state = s.to_vector().iter().copied().collect();
        move |e: Error| Error::AtTime {
            t,
            state,
            source: Box::new(e),
        }
    };

    let mut s = s0.clone();
    let mut t = 0.0;
    for i in 0..=steps {
        let k1 = stage(p, &s, 1, opts.allow_underdetermined).map_err(at(t, &s))?;
        tr.non_unique |= k1.classification != Classification::Unique;
        record(p, &mut tr, t, &s, &k1).map_err(at(t, &s))?;
        if i == steps {
            break;
        }
        let t_next = if i + 1 == steps { t_end } else { (i + 1) as f64 * h };
        let mut next = rk4_from(p, &s, &k1, t_next - t, opts.allow_underdetermined, &mut tr.non_unique)
            .map_err(at(t, &s))?;
        if opts.project {
            next = project_to_constraints(p, &next).map_err(at(t_next, &next))?;
        }
        s = next;
        t = t_next;
    }
    Ok(tr)
}

fn record(
    p: &NonholonomicProblem,
    tr: &mut Trajectory,
    t: f64,
    s: &State,
    sol: &SodeResult,
) -> Result<()> {
    let model = p.model();
    tr.times.push(t);
    tr.states.push(s.clone());
    tr.energy.push(model.energy(s)?);
    tr.psi_residuals.push(p.constraint_values(s)?);
    tr.lambdas.push(sol.multipliers.clone().expect("feasible solve carries multipliers"));
    tr.momenta.push(model.legendre(s)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ProblemBuilder;
    use crate::mechanics::LagrangianModel;

    fn particle() -> NonholonomicProblem {
        let m = LagrangianModel::new(&["x"], &[], "0.5*dx^2").unwrap();
        ProblemBuilder::new(m).build().unwrap()
    }

    fn unit_disk() -> NonholonomicProblem {
        let m = LagrangianModel::new(
            &["x", "y", "theta", "phi"],
            &[("R", 1.0)],
            "0.5*(dx^2+dy^2) + 0.5*dtheta^2 + 0.5*dphi^2",
        )
        .unwrap();
        ProblemBuilder::new(m)
            .constraint("dx - R*cos(theta)*dphi")
            .unwrap()
            .constraint("dy - R*sin(theta)*dphi")
            .unwrap()
            .build()
            .unwrap()
    }

    #[test]
    fn free_particle_step_is_exact() {
        let s = rk4_step(&particle(), &State::new(vec![0.0], vec![1.0]), 0.1).unwrap();
        assert_eq!(s.q[0], 0.1);
        assert_eq!(s.v[0], 1.0);
    }

    #[test]
    fn nan_state_is_rejected() {
        let r = rk4_step(&particle(), &State::new(vec![f64::NAN], vec![1.0]), 0.1);
        assert!(matches!(r, Err(Error::NonFiniteState)));
    }

    #[test]
    fn nonpositive_step_is_rejected() {
        let s = State::new(vec![0.0], vec![1.0]);
        assert!(matches!(rk4_step(&particle(), &s, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            simulate(&particle(), &s, 0.1, -1.0, SimulateOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn disk_single_step_matches_closed_form() {
        let s0 = State::new(vec![0.0; 4], vec![2.0, 0.0, 1.0, 2.0]);
        let h = 1e-3;
        let s = rk4_step(&unit_disk(), &s0, h).unwrap();
        let want = [2.0 * h.sin(), 2.0 * (1.0 - h.cos()), h, 2.0 * h];
        for i in 0..4 {
            assert!((s.q[i] - want[i]).abs() <= 1e-14, "q[{i}] = {}", s.q[i]);
        }
        assert!((s.v[0] - 2.0 * h.cos()).abs() <= 1e-14);
        assert!((s.v[1] - 2.0 * h.sin()).abs() <= 1e-14);
    }

    #[test]
    fn projection_leaves_on_constraint_state_alone() {
        let s = State::new(vec![0.0, 0.0, 0.3, 0.0], vec![2.0 * 0.3f64.cos(), 2.0 * 0.3f64.sin(), 1.0, 2.0]);
        assert_eq!(project_to_constraints(&unit_disk(), &s).unwrap(), s);
    }

    #[test]
    fn projection_restores_perturbed_velocity() {
        let p = unit_disk();
        let s = State::new(vec![0.0; 4], vec![2.0 + 1e-3, 0.0, 1.0, 2.0]);
        let out = project_to_constraints(&p, &s).unwrap();
        assert!(p.constraint_violation(&out).unwrap() <= 1e-12);
        assert_eq!(out.q, s.q);
        let dv = &out.v - &s.v;
        let h = p.model().hessian(&s).unwrap();
        assert!((dv.transpose() * h * &dv)[0].sqrt() <= 1e-3);
    }

    #[test]
    fn configuration_constraint_is_not_projectable() {
        let m = LagrangianModel::new(&["x", "y"], &[], "0.5*(dx^2+dy^2)").unwrap();
        let p = ProblemBuilder::new(m).constraint("x").unwrap().build().unwrap();
        let r = project_to_constraints(&p, &State::new(vec![1.0, 0.0], vec![0.0, 0.0]));
        assert!(matches!(r, Err(Error::NotProjectable)));
    }

    #[test]
    fn off_constraint_start_is_rejected_unless_allowed() {
        let p = unit_disk();
        let s = State::new(vec![0.0; 4], vec![1.0, 0.0, 1.0, 2.0]);
        let opts = SimulateOptions::default();
        assert!(matches!(simulate(&p, &s, 0.1, 0.2, opts), Err(Error::OffConstraint { .. })));
        let opts = SimulateOptions {
            allow_off_constraint: true,
            ..opts
        };
        assert!(simulate(&p, &s, 0.1, 0.2, opts).is_ok());
    }

    #[test]
    fn last_sample_lands_on_end_time() {
        let tr = simulate(
            &particle(),
            &State::new(vec![0.0], vec![1.0]),
            0.3,
            1.0,
            SimulateOptions::default(),
        )
        .unwrap();
        assert_eq!(tr.times.len(), 5);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
        assert!(tr.times.windows(2).all(|w| w[0] < w[1]));
        assert!((tr.last().unwrap().q[0] - 1.0).abs() < 1e-15);
        assert!(!tr.non_unique);
    }

    #[test]
    fn stage_failure_carries_the_time() {
        let m = LagrangianModel::new(&["x", "y"], &[("g", 9.8)], "0.5*(dx^2+dy^2) - g*y").unwrap();
        let p = ProblemBuilder::new(m)
            .constraint("dy")
            .unwrap()
            .force(&["1", "0"])
            .unwrap()
            .build()
            .unwrap();
        let err = simulate(
            &p,
            &State::new(vec![0.0, 0.0], vec![1.0, 0.0]),
            0.1,
            1.0,
            SimulateOptions::default(),
        )
        .unwrap_err();
        match err {
            Error::AtTime { t, source, .. } => {
                assert_eq!(t, 0.0);
                assert!(matches!(
                    *source,
                    Error::StageFailure {
                        stage: 1,
                        classification: Classification::Infeasible
                    }
                ));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
