use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("polynomial degree {0} is below the minimum of 2 required by the third-order form")]
    DegreeTooLow(usize),
    #[error("fields live on different meshes or degrees")]
    ShapeMismatch,
    #[error("singular local projection system in cell {cell}")]
    SingularProjection { cell: usize },
    #[error("non-finite state after step {step} (t = {time:e})")]
    NonFinite { step: usize, time: f64 },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
