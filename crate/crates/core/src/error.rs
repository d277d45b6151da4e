use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("instance does not conform to schema: {0}")]
    SchemaViolation(String),
    #[error("Hoeffding bound is undefined for n = 0")]
    UndefinedBound,
    #[error("no split candidates to rank")]
    EmptyReport,
    #[error("invalid generator configuration: {0}")]
    InvalidGenerator(String),
    #[error("end of stream at t = {0}")]
    EndOfStream(u64),
}
