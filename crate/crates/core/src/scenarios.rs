//! Built-in problems: a free particle, the rolling disk, both Appell
//! machines, the parallel-velocity (Benenti) systems and a deliberately
//! infeasible force assignment. Closed-form solutions are provided where they
//! exist.

use crate::constraints::{NonholonomicProblem, ProblemBuilder};
use crate::error::{Error, Result};
use crate::mechanics::{LagrangianModel, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    FreeParticle,
    RollingDisk,
    AppellRho0,
    AppellRho,
    BenentiPoints,
    BenentiPointsNonChetaev,
    BenentiDisks,
    MisalignedForce,
}

const KINDS: [(&str, Kind); 8] = [
    ("free_particle", Kind::FreeParticle),
    ("rolling_disk", Kind::RollingDisk),
    ("appell_rho0", Kind::AppellRho0),
    ("appell_rho", Kind::AppellRho),
    ("benenti_points", Kind::BenentiPoints),
    ("benenti_points_nonchetaev", Kind::BenentiPointsNonChetaev),
    ("benenti_disks", Kind::BenentiDisks),
    ("misaligned_force", Kind::MisalignedForce),
];

pub fn scenario_names() -> impl Iterator<Item = &'static str> {
    KINDS.iter().map(|(name, _)| *name)
}

const APPELL_PARAMS: [(&str, f64); 7] = [
    ("M", 1.0),
    ("m", 1.0),
    ("R", 1.0),
    ("r", 0.5),
    ("I1", 1.0),
    ("I2", 1.0),
    ("g", 9.8),
];

impl Kind {
    fn description(self) -> &'static str {
        match self {
            Kind::FreeParticle => "planar free particle, no constraints",
            Kind::RollingDisk => "vertical disk rolling without slipping (I1 about the axle, I2 about the vertical)",
            Kind::AppellRho0 => "Appell's machine with the hanging mass below the contact point",
            Kind::AppellRho => "Appell's machine with the mass on a frame of length rho",
            Kind::BenentiPoints => "two point masses with parallel velocities, Chetaev forces",
            Kind::BenentiPointsNonChetaev => "two point masses with parallel velocities, force (m1 f1, m1 f2, m2 f1, m2 f2)",
            Kind::BenentiDisks => "two rolling disks whose centre velocities stay parallel",
            Kind::MisalignedForce => "particle under gravity with dy = 0 enforced by a horizontal force",
        }
    }

    fn defaults(self) -> Vec<(&'static str, f64)> {
        match self {
            Kind::FreeParticle => vec![],
            Kind::RollingDisk => vec![("M", 1.0), ("R", 1.0), ("I1", 1.0), ("I2", 1.0)],
            Kind::AppellRho0 => APPELL_PARAMS.to_vec(),
            Kind::AppellRho => {
                let mut p = APPELL_PARAMS.to_vec();
                p.push(("rho", 0.3));
                p
            }
            Kind::BenentiPoints => vec![("m1", 1.0), ("m2", 1.0)],
            Kind::BenentiPointsNonChetaev => {
                vec![("m1", 1.0), ("m2", 1.0), ("f1", 1.0), ("f2", 0.5)]
            }
            Kind::BenentiDisks => vec![
                ("M1", 1.0),
                ("R1", 1.0),
                ("Iphi1", 1.0),
                ("Itheta1", 1.0),
                ("M2", 1.0),
                ("R2", 1.0),
                ("Iphi2", 1.0),
                ("Itheta2", 1.0),
            ],
            Kind::MisalignedForce => vec![("g", 9.8)],
        }
    }

    fn coords(self) -> &'static [&'static str] {
        match self {
            Kind::FreeParticle | Kind::MisalignedForce => &["x", "y"],
            Kind::RollingDisk => &["x", "y", "theta", "phi"],
            Kind::AppellRho0 | Kind::AppellRho => &["x", "y", "z", "theta", "phi"],
            Kind::BenentiPoints | Kind::BenentiPointsNonChetaev => &["x1", "y1", "x2", "y2"],
            Kind::BenentiDisks => &[
                "x1", "y1", "theta1", "phi1", "x2", "y2", "theta2", "phi2",
            ],
        }
    }

    fn problem(self, params: &[(&str, f64)]) -> Result<NonholonomicProblem> {
        let model = |l: &str| LagrangianModel::new(self.coords(), params, l);
        let points = "0.5*m1*(dx1^2+dy1^2) + 0.5*m2*(dx2^2+dy2^2)";
        let parallel = "dx1*dy2 - dx2*dy1";
        match self {
            Kind::FreeParticle => ProblemBuilder::new(model("0.5*(dx^2+dy^2)")?).build(),
            Kind::RollingDisk => {
                ProblemBuilder::new(model("0.5*M*(dx^2+dy^2) + 0.5*I2*dtheta^2 + 0.5*I1*dphi^2")?)
                    .constraint("dx - R*cos(theta)*dphi")?
                    .constraint("dy - R*sin(theta)*dphi")?
                    .build()
            }
            Kind::AppellRho0 => ProblemBuilder::new(model(
                "0.5*M*(dx^2+dy^2) + 0.5*m*(dx^2+dy^2+dz^2) + 0.5*I1*dphi^2 + 0.5*I2*dtheta^2 - m*g*z",
            )?)
            .constraint("dx - R*cos(theta)*dphi")?
            .constraint("dy - R*sin(theta)*dphi")?
            .constraint("r*dphi - dz")?
            .build(),
            Kind::AppellRho => {
                // contact-point velocities after eliminating x - x_D = rho cos(theta),
                // y - y_D = rho sin(theta)
                let xd = "(dx + rho*sin(theta)*dtheta)";
                let yd = "(dy - rho*cos(theta)*dtheta)";
                let l = format!(
                    "0.5*M*({xd}^2+{yd}^2) + 0.5*m*(dx^2+dy^2+dz^2) + 0.5*I1*dphi^2 + 0.5*I2*dtheta^2 - m*g*z"
                );
                ProblemBuilder::new(model(&l)?)
                    .constraint(&format!("{xd} - R*cos(theta)*dphi"))?
                    .constraint(&format!("{yd} - R*sin(theta)*dphi"))?
                    .constraint("r*dphi - dz")?
                    .build()
            }
            Kind::BenentiPoints => ProblemBuilder::new(model(points)?).constraint(parallel)?.build(),
            Kind::BenentiPointsNonChetaev => ProblemBuilder::new(model(points)?)
                .constraint(parallel)?
                .force(&["m1*f1", "m1*f2", "m2*f1", "m2*f2"])?
                .build(),
            Kind::BenentiDisks => ProblemBuilder::new(model(
                "0.5*M1*(dx1^2+dy1^2) + 0.5*Itheta1*dtheta1^2 + 0.5*Iphi1*dphi1^2 \
                 + 0.5*M2*(dx2^2+dy2^2) + 0.5*Itheta2*dtheta2^2 + 0.5*Iphi2*dphi2^2",
            )?)
            .constraint("dx1 - R1*cos(theta1)*dphi1")?
            .constraint("dy1 - R1*sin(theta1)*dphi1")?
            .constraint("dx2 - R2*cos(theta2)*dphi2")?
            .constraint("dy2 - R2*sin(theta2)*dphi2")?
            .constraint(parallel)?
            .build(),
            Kind::MisalignedForce => ProblemBuilder::new(model("0.5*(dx^2+dy^2) - g*y")?)
                .constraint("dy")?
                .force(&["1", "0"])?
                .build(),
        }
    }

    /// A representative state on the constraint set.
    fn default_state(self, p: &impl Fn(&str) -> f64) -> State {
        match self {
            Kind::FreeParticle => State::new(vec![0.0, 0.0], vec![1.0, 0.5]),
            Kind::RollingDisk => {
                State::new(vec![0.0; 4], vec![p("R") * 2.0, 0.0, 1.0, 2.0])
            }
            Kind::AppellRho0 => State::new(vec![0.0; 5], vec![0.0; 5]),
            Kind::AppellRho => {
                let (theta, dtheta, dphi) = (0.0f64, 1.0, 1.0);
                let rho = p("rho");
                let dx = p("R") * theta.cos() * dphi - rho * theta.sin() * dtheta;
                let dy = p("R") * theta.sin() * dphi + rho * theta.cos() * dtheta;
                State::new(vec![0.0; 5], vec![dx, dy, p("r") * dphi, dtheta, dphi])
            }
            Kind::BenentiPoints | Kind::BenentiPointsNonChetaev => {
                State::new(vec![0.0, 0.0, 1.0, 0.0], vec![1.0, 1.0, 2.0, 2.0])
            }
            Kind::BenentiDisks => {
                let theta = 0.3f64;
                let (dphi1, dphi2) = (2.0, -1.5);
                let (r1, r2) = (p("R1"), p("R2"));
                State::new(
                    vec![0.0, 0.0, theta, 0.0, 3.0, 0.0, theta, 0.0],
                    vec![
                        r1 * theta.cos() * dphi1,
                        r1 * theta.sin() * dphi1,
                        1.0,
                        dphi1,
                        r2 * theta.cos() * dphi2,
                        r2 * theta.sin() * dphi2,
                        1.0,
                        dphi2,
                    ],
                )
            }
            Kind::MisalignedForce => State::new(vec![0.0, 0.0], vec![1.0, 0.0]),
        }
    }
}

/// A built-in problem together with its parameter values.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub params: Vec<(String, f64)>,
    pub problem: NonholonomicProblem,
    pub default_state: State,
    kind: Kind,
}

impl ScenarioSpec {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }

    pub fn has_oracle(&self) -> bool {
        matches!(
            self.kind,
            Kind::FreeParticle | Kind::RollingDisk | Kind::AppellRho0 | Kind::BenentiPoints
        )
    }
}

/// Builds a scenario with the given parameter overrides.
pub fn build_scenario(name: &str, overrides: &[(&str, f64)]) -> Result<ScenarioSpec> {
    let &(name, kind) = KINDS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    let mut params = kind.defaults();
    for &(key, value) in overrides {
        let slot = params
            .iter_mut()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| Error::InvalidParam(format!("`{key}` is not a parameter of {name}")))?;
        if !value.is_finite() {
            return Err(Error::InvalidParam(format!("`{key}` must be finite")));
        }
        slot.1 = value;
    }
    let problem = kind.problem(&params)?;
    let lookup = |k: &str| params.iter().find(|(n, _)| *n == k).map_or(0.0, |&(_, v)| v);
    let default_state = kind.default_state(&lookup);
    Ok(ScenarioSpec {
        name,
        description: kind.description(),
        params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        problem,
        default_state,
        kind,
    })
}

/// `sin(u) / u`, continuous at zero.
fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Exact state at time `t` of the solution through `s0`, which must lie on
/// the constraint set.
pub fn oracle_state(spec: &ScenarioSpec, s0: &State, t: f64) -> Result<State> {
    let p = |k: &str| spec.param(k).unwrap_or(0.0);
    let n = spec.problem.dim();
    if s0.dim() != n {
        return Err(Error::Arity {
            what: "state".into(),
            expected: n,
            got: s0.dim(),
        });
    }
    let (q, v) = (&s0.q, &s0.v);
    match spec.kind {
        Kind::FreeParticle | Kind::BenentiPoints => {
            Ok(State::new((q + v * t).iter().copied().collect(), v.iter().copied().collect()))
        }
        Kind::RollingDisk => {
            let r = p("R");
            let (omega, dphi) = (v[2], v[3]);
            let theta = q[2] + omega * t;
            let mid = q[2] + omega * t / 2.0;
            let chord = r * dphi * t * sinc(omega * t / 2.0);
            Ok(State::new(
                vec![q[0] + chord * mid.cos(), q[1] + chord * mid.sin(), theta, q[3] + dphi * t],
                vec![r * dphi * theta.cos(), r * dphi * theta.sin(), omega, dphi],
            ))
        }
        Kind::AppellRho0 => {
            let (big_m, m, r_big, r, i1, g) = (p("M"), p("m"), p("R"), p("r"), p("I1"), p("g"));
            let alpha = -m * g * r / (i1 + (big_m + m) * r_big * r_big + m * r * r);
            let (theta0, omega, dphi0) = (q[3], v[3], v[4]);
            let theta = theta0 + omega * t;
            let dphi = dphi0 + alpha * t;
            let dphi_int = dphi0 * t + 0.5 * alpha * t * t;
            // R * int_0^t (dphi0 + alpha s) (cos, sin)(theta0 + omega s) ds
            let (ix, iy) = if omega.abs() < 1e-8 {
                (dphi_int * theta0.cos(), dphi_int * theta0.sin())
            } else {
                let w2 = omega * omega;
                let ix = (dphi * theta.sin() - dphi0 * theta0.sin()) / omega
                    + alpha * (theta.cos() - theta0.cos()) / w2;
                let iy = -(dphi * theta.cos() - dphi0 * theta0.cos()) / omega
                    + alpha * (theta.sin() - theta0.sin()) / w2;
                (ix, iy)
            };
            Ok(State::new(
                vec![
                    q[0] + r_big * ix,
                    q[1] + r_big * iy,
                    q[2] + r * dphi_int,
                    theta,
                    q[4] + dphi_int,
                ],
                vec![
                    r_big * theta.cos() * dphi,
                    r_big * theta.sin() * dphi,
                    r * dphi,
                    omega,
                    dphi,
                ],
            ))
        }
        _ => Err(Error::NoClosedForm(spec.name.to_string())),
    }
}
