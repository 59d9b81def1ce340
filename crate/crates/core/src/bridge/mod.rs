//! Live session server. Clients exchange newline-delimited JSON envelopes
//! over raw TCP or WebSocket: telemetry goes out once per simulation tick,
//! pilot commands and assistance settings come in.
//!
//! Sessions record every pilot command into a [`CommandLog`](crate::shared::CommandLog)
//! stamped with the tick at which it took effect, so a headless run fed
//! that log reproduces the session exactly.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{Envelope, Hello, PilotCmd, Telemetry, PROTOCOL_VERSION};
pub use server::{serve, spawn_server, ServeOptions};
pub use session::{Session, SessionContext};
