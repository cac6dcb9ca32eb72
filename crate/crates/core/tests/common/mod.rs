#![allow(dead_code)]

use nonholonomic::simulate::project_to_constraints;
use nonholonomic::{NonholonomicProblem, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const VARS: [&str; 4] = ["x", "y", "dx", "dy"];

/// Random expression text over `x, y, dx, dy` whose value and derivatives
/// stay finite and moderate on `[-1.5, 1.5]^4`.
pub fn random_expression(rng: &mut impl Rng, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.7) {
            VARS[rng.gen_range(0..VARS.len())].to_string()
        } else {
            format!("{:.3}", rng.gen_range(-2.0..2.0))
        };
    }
    let a = random_expression(rng, depth - 1);
    let b = random_expression(rng, depth - 1);
    match rng.gen_range(0..12) {
        0 => format!("sin({a})"),
        1 => format!("cos({a})"),
        2 => format!("exp(sin({a}))"),
        3 => format!("log(1 + ({a})^2)"),
        4 => format!("sqrt(1 + ({a})^2)"),
        5 => format!("tan(0.5*sin({a}))"),
        6 => format!("({a})/(1 + ({b})^2)"),
        7 => format!("({a})^{}", rng.gen_range(2..=3)),
        8 => format!("-({a})"),
        9 => format!("({a}) + ({b})"),
        10 => format!("({a}) - ({b})"),
        _ => format!("({a})*({b})"),
    }
}

pub fn random_point(rng: &mut impl Rng) -> Vec<(&'static str, f64)> {
    VARS.iter().map(|&v| (v, rng.gen_range(-1.5..1.5))).collect()
}

/// On-constraint states obtained by projecting uniform random seeds in
/// `[-1, 1]^2n`; seeds that cannot be projected are skipped.
pub fn sample_states(p: &NonholonomicProblem, count: usize, seed: u64) -> Vec<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.dim();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 10 * count {
        attempts += 1;
        let q = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let v = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if let Ok(s) = project_to_constraints(p, &State::new(q, v)) {
            out.push(s);
        }
    }
    out
}

/// Random states with no constraint applied.
pub fn free_states(n: usize, count: usize, seed: u64) -> Vec<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let q = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let v = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            State::new(q, v)
        })
        .collect()
}

pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("header line")
        .split(',')
        .map(String::from)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().expect("numeric field")).collect())
        .collect();
    (header, rows)
}

pub fn data_file(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(format!("{name}.problem"))
}
