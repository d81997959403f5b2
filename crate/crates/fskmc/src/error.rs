//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice: {0}")]
    Lattice(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("model: {0}")]
    Model(String),

    #[error("update: {0}")]
    InvalidUpdate(String),

    #[error("partition: {0}")]
    Partition(String),

    #[error("schedule: {0}")]
    Schedule(String),

    #[error("oracle scale: {0}")]
    OracleScale(String),

    #[error("balance: {0}")]
    Balance(String),

    #[error("estimation: {0}")]
    Estimation(String),

    #[error("config file `{path}`: {message}")]
    ConfigFile { path: String, message: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn lattice(msg: impl Into<String>) -> Self {
        Error::Lattice(msg.into())
    }
    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }
    pub fn partition(msg: impl Into<String>) -> Self {
        Error::Partition(msg.into())
    }
    pub fn schedule(msg: impl Into<String>) -> Self {
        Error::Schedule(msg.into())
    }
    pub fn balance(msg: impl Into<String>) -> Self {
        Error::Balance(msg.into())
    }
    pub fn estimation(msg: impl Into<String>) -> Self {
        Error::Estimation(msg.into())
    }
}
