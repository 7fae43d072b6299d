use std::path::PathBuf;

use serde::Serialize;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: u64, column: usize, message: String },

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error(transparent)]
    Library(#[from] depthrank::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse { .. } | CliError::File { .. } => EXIT_DATA,
            CliError::Library(e) if e.is_degeneracy() => EXIT_NUMERIC,
            CliError::Library(e) => match e {
                depthrank::Error::Domain(_) | depthrank::Error::Unsupported(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_USAGE => "usage",
            EXIT_DATA => "data",
            _ => "numeric",
        }
    }

    fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Library(
                depthrank::Error::DegenerateSample(_)
                | depthrank::Error::DegenerateRank(_)
                | depthrank::Error::Factorization(_),
            ) => Some("supply more observations or reduce the dimension"),
            CliError::Library(depthrank::Error::DegenerateScale { .. }) => {
                Some("too many tied projections; use mean-sd scale or a different depth")
            }
            CliError::Library(depthrank::Error::Unsupported(_)) => {
                Some("use --mode approximate for dimensions above 2")
            }
            _ => None,
        }
    }

    /// Machine-readable error document.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
            exit_code: i32,
            #[serde(skip_serializing_if = "Option::is_none")]
            hint: Option<&'a str>,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            error: Body<'a>,
        }
        let doc = Doc {
            error: Body {
                kind: self.kind(),
                message: self.to_string(),
                exit_code: self.exit_code(),
                hint: self.hint(),
            },
        };
        serde_json::to_string(&doc).expect("error document serializes")
    }
}

pub type CliResult<T> = Result<T, CliError>;
