//! Plain-text front end for the `ttwb` library: input parsing, subcommand
//! dispatch, canonical certificates and their replay.

pub mod cert;
pub mod commands;
pub mod input;
pub mod replay;
