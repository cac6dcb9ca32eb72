//! Trajectory CSV: header
//! `t,q_<name>..,v_<name>..,E,psi_1..psi_r,lambda_1..lambda_c,p_1..p_n`,
//! one row per recorded sample, reals in `{:.16e}` so they re-read exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::simulate::Trajectory;

pub fn csv_header(tr: &Trajectory) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend(tr.coords.iter().map(|c| format!("q_{c}")));
    cols.extend(tr.coords.iter().map(|c| format!("v_{c}")));
    cols.push("E".into());
    cols.extend((1..=tr.constraint_count).map(|i| format!("psi_{i}")));
    cols.extend((1..=tr.multiplier_count).map(|i| format!("lambda_{i}")));
    cols.extend((1..=tr.coords.len()).map(|i| format!("p_{i}")));
    cols.join(",")
}

pub fn format_trajectory_csv(tr: &Trajectory) -> String {
    let mut out = csv_header(tr);
    out.push('\n');
    for i in 0..tr.len() {
        let s = &tr.states[i];
        let row = std::iter::once(tr.times[i])
            .chain(s.q.iter().copied())
            .chain(s.v.iter().copied())
            .chain(std::iter::once(tr.energy[i]))
            .chain(tr.psi_residuals[i].iter().copied())
            .chain(tr.lambdas[i].iter().copied())
            .chain(tr.momenta[i].iter().copied());
        for (k, x) in row.enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{x:.16e}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn write_trajectory_csv(tr: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_trajectory_csv(tr)).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}
