//! Line-oriented problem description.
//!
//! ```text
//! # rolling disk
//! coords x y theta phi
//! params M=1 R=1 I1=1 I2=1
//! lagrangian 0.5*M*(dx^2+dy^2) + 0.5*I2*dtheta^2 + 0.5*I1*dphi^2
//! constraint dx - R*cos(theta)*dphi
//! constraint dy - R*sin(theta)*dphi
//! forces chetaev
//! ```
//!
//! `direction` lines carry `2n` comma-separated expressions (the `dq` part
//! then the `dv` part) and `force` lines carry `n`. Any `force` line selects
//! custom forces; without one the forces are Chetaev's.

use std::fs;
use std::path::Path;

use crate::constraints::{NonholonomicProblem, ProblemBuilder};
use crate::error::{Error, Result};
use crate::mechanics::LagrangianModel;

#[derive(Debug, Clone, PartialEq)]
pub struct Line<T> {
    pub line: usize,
    pub value: T,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemFile {
    pub coords: Vec<String>,
    pub params: Vec<(String, f64)>,
    pub lagrangian: Option<Line<String>>,
    pub constraints: Vec<Line<String>>,
    pub directions: Vec<Line<Vec<String>>>,
    /// Empty means Chetaev forces.
    pub forces: Vec<Line<Vec<String>>>,
}

fn section(line: usize, message: impl Into<String>) -> Error {
    Error::Section {
        line,
        message: message.into(),
    }
}

/// Expression and arity errors are reported against the offending line.
fn at_line(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Expr(_) | Error::Arity { .. } => section(line, e.to_string()),
        other => other,
    }
}

fn split_list(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).collect()
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = ProblemFile::default();
        let mut coords_line = None;
        let mut chetaev_line = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, rest) = content
                .split_once(char::is_whitespace)
                .map_or((content, ""), |(k, r)| (k, r.trim()));
            match key {
                "coords" => {
                    if coords_line.replace(line).is_some() {
                        return Err(section(line, "duplicate coords section"));
                    }
                    file.coords = rest.split_whitespace().map(String::from).collect();
                    if file.coords.is_empty() {
                        return Err(section(line, "coords needs at least one name"));
                    }
                }
                "params" => {
                    for item in rest.split_whitespace() {
                        let (name, value) = item
                            .split_once('=')
                            .ok_or_else(|| section(line, format!("expected name=value, got `{item}`")))?;
                        let value: f64 = value
                            .parse()
                            .map_err(|_| section(line, format!("`{value}` is not a number")))?;
                        file.params.push((name.to_string(), value));
                    }
                }
                "lagrangian" => {
                    if file.lagrangian.is_some() {
                        return Err(section(line, "duplicate lagrangian section"));
                    }
                    file.lagrangian = Some(Line {
                        line,
                        value: rest.to_string(),
                    });
                }
                "constraint" => file.constraints.push(Line {
                    line,
                    value: rest.to_string(),
                }),
                "direction" => file.directions.push(Line {
                    line,
                    value: split_list(rest),
                }),
                "force" => file.forces.push(Line {
                    line,
                    value: split_list(rest),
                }),
                "forces" => {
                    if rest != "chetaev" {
                        return Err(section(line, format!("unknown force mode `{rest}`")));
                    }
                    chetaev_line = Some(line);
                }
                other => return Err(section(line, format!("unknown section `{other}`"))),
            }
            if matches!(key, "constraint" | "lagrangian") && rest.is_empty() {
                return Err(section(line, format!("{key} needs an expression")));
            }
        }
        if let (Some(line), Some(_)) = (chetaev_line, file.forces.first()) {
            return Err(section(line, "`forces chetaev` conflicts with explicit force lines"));
        }
        if coords_line.is_none() {
            return Err(section(text.lines().count().max(1), "missing coords section"));
        }
        if file.lagrangian.is_none() {
            return Err(section(text.lines().count().max(1), "missing lagrangian section"));
        }
        Ok(file)
    }

    pub fn build(&self) -> Result<NonholonomicProblem> {
        let lagrangian = self
            .lagrangian
            .as_ref()
            .ok_or_else(|| section(0, "missing lagrangian section"))?;
        let coords: Vec<&str> = self.coords.iter().map(String::as_str).collect();
        let params: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let model = LagrangianModel::new(&coords, &params, &lagrangian.value)
            .map_err(at_line(lagrangian.line))?;
        let mut builder = ProblemBuilder::new(model);
        for c in &self.constraints {
            builder = builder.constraint(&c.value).map_err(at_line(c.line))?;
        }
        for d in &self.directions {
            builder = builder.direction(&d.value).map_err(at_line(d.line))?;
        }
        for f in &self.forces {
            builder = builder.force(&f.value).map_err(at_line(f.line))?;
        }
        builder.build()
    }
}

pub fn parse_problem(text: &str) -> Result<NonholonomicProblem> {
    ProblemFile::parse(text)?.build()
}

pub fn load_problem_file(path: impl AsRef<Path>) -> Result<NonholonomicProblem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })?;
    parse_problem(&text)
}
