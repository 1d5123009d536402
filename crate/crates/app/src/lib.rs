//! Command line front end and the push-game session service.

pub mod cli;
pub mod server;
