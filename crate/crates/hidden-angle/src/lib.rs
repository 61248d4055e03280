//! File formats, configuration and the command-line front end for
//! `hidden-angle-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod events;
pub mod report;
pub mod table;

pub use cli::run;
pub use error::{AppError, Result};
