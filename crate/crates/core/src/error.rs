use std::path::PathBuf;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scenario: {}", join_violations(.0))]
    InvalidScenario(Vec<Violation>),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {value:e}, achieved error {abs_err:e})"
    )]
    Quadrature {
        value: f64,
        abs_err: f64,
        subdivisions: usize,
    },

    #[error("rate unbounded in interference-free model")]
    UnboundedRate,

    #[error("{}:{line}: {msg}", .path.display())]
    Config {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
