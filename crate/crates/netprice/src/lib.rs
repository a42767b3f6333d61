//! File formats, result rendering and the command-line front end for
//! `netprice-core`.

pub mod cli;
pub mod format;
pub mod output;
