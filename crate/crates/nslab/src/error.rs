use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),
    #[error("datum: {0}")]
    Datum(String),
    #[error(transparent)]
    Core(#[from] nslab_core::CoreError),
    #[error("i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }
}
