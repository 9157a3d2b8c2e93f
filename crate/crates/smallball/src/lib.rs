//! File formats, experiment families, the verification suite and the
//! command-line front end for `smallball-core`.

pub mod claims;
pub mod cli;
pub mod constants;
pub mod experiments;
pub mod formats;
pub mod suite;
