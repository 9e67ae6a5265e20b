//! Ring-expression language, JSON certificates, table cache and the `jring`
//! command surface.

pub mod cache;
pub mod cert;
pub mod commands;
pub mod expr;

pub use commands::run_command;
pub use expr::{parse_ring_expr, ParseError, RingExpr};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Expr(String),
    #[error(transparent)]
    Core(#[from] jring_core::Error),
    #[error("{0}")]
    Io(String),
    #[error("invalid certificate: {0}")]
    Json(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Expr(_) | CliError::Json(_) => EXIT_PARSE,
            CliError::Core(_) | CliError::Io(_) => EXIT_PRECONDITION,
        }
    }
}
