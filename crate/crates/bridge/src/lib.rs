//! Real-time front end for the simulation: paces the loop, broadcasts state
//! snapshots and turns client events into gaze selections and injections.

pub mod protocol;
pub mod server;
pub mod session;

use thiserror::Error;

pub use server::{serve, serve_on, ServeOptions};
pub use session::{Catalog, Session};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("real-time factor must be positive and finite, got {0}")]
    InvalidRealTimeFactor(f64),
    #[error("cannot listen on port {port}: {source}")]
    Bind { port: u16, source: std::io::Error },
    #[error("scenario catalog: {0}")]
    Catalog(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
