//! Library surface of the `janus-cpi` binary: command implementations are
//! exposed here so integration and acceptance tests can drive them
//! in-process.

pub mod commands;
pub mod manifest;
pub mod reports;

use janus_cpi_core::Error;

/// Exit-code contract: 0 success, 1 data error, 2 usage/config error.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::Config(_) => 2,
        _ => 1,
    }
}
