use serde::Serialize;
use thiserror::Error;
use wunt_core::data::DataError;
use wunt_core::estimator::EstimateError;
use wunt_core::transformer::TransformError;
use wunt_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        CliError::Core(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Schema,
    Numerical,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Schema => 3,
            ErrorClass::Numerical => 4,
            ErrorClass::Io => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Config => "config",
            ErrorClass::Schema => "schema",
            ErrorClass::Numerical => "numerical",
            ErrorClass::Io => "io",
        }
    }
}

fn classify_data(e: &DataError) -> ErrorClass {
    match e {
        DataError::MissingFile(_) | DataError::Io(_) => ErrorClass::Io,
        DataError::Csv(c) if c.is_io_error() => ErrorClass::Io,
        DataError::InvalidMargin(_) => ErrorClass::Config,
        _ => ErrorClass::Schema,
    }
}

fn classify_transform(e: &TransformError) -> ErrorClass {
    match e {
        TransformError::Data(d) => classify_data(d),
        _ => ErrorClass::Schema,
    }
}

impl CliError {
    pub fn class(&self) -> ErrorClass {
        match self {
            CliError::Config(_) => ErrorClass::Config,
            CliError::Io { .. } => ErrorClass::Io,
            CliError::Core(core) => match core {
                CoreError::Config(_) | CoreError::Density(_) => ErrorClass::Config,
                CoreError::Data(d) => classify_data(d),
                CoreError::Transform(t) => classify_transform(t),
                CoreError::Estimate(e) => match e {
                    EstimateError::Data(d) => classify_data(d),
                    EstimateError::Transform(t) => classify_transform(t),
                    EstimateError::Density(_) | EstimateError::NoWeights => ErrorClass::Config,
                    EstimateError::Overlap { .. } | EstimateError::NonConvergence { .. } | EstimateError::Separation => {
                        ErrorClass::Numerical
                    }
                    EstimateError::DimensionMismatch { .. } => ErrorClass::Schema,
                    EstimateError::Io(_) => ErrorClass::Io,
                },
            },
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            code: i32,
            message: String,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        let class = self.class();
        let w = Wrapper { error: Body { kind: class.as_str(), code: class.exit_code(), message: self.to_string() } };
        serde_json::to_string(&w).unwrap_or_else(|_| format!("{{\"error\":{{\"code\":{}}}}}", class.exit_code()))
    }
}

pub fn io_error(path: impl std::fmt::Display, source: std::io::Error) -> CliError {
    CliError::Io { path: path.to_string(), source }
}
