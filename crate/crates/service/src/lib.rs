//! Command-line tool and HTTP JSON service around `witness-resolve`
//! sessions.

pub mod cli;
pub mod http;
pub mod report;
