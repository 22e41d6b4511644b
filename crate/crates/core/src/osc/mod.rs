//! OSC 1.0 positioning commands over UDP.

mod codec;
mod schema;
mod transport;

pub use codec::{
    decode, encode, hex_dump, DecodeError, DecodeErrorKind, EncodeError, OscArg, OscMessage,
};
pub use schema::{AddressSchema, PositionCommand, TrajectoryCommand};
pub use transport::{
    parse_endpoint, send_position, send_trajectory, CommandSink, OscQueue, OscSender, RecordingSink,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OscError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("invalid endpoint {0:?}")]
    Endpoint(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("address schema: {0}")]
    Schema(String),
    #[error("transport error: {0}")]
    Transport(#[from] std::io::Error),
    #[error("sender queue closed")]
    QueueClosed,
}
