//! Live steering: long-running generation sessions that stream snapshots and
//! accept parameter changes between iterations.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{ClientMessage, ControlAction, ServerMessage, Snapshot};
pub use server::{bind, router, ServiceConfig};
pub use session::{replay, LoggedEvent, Session, SessionConfig};
