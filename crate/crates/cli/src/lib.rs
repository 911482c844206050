//! Problem files, presets and the commands behind the `varcheck` binary.

pub mod artifacts;
pub mod commands;
pub mod error;
pub mod presets;
pub mod problem_file;

pub use artifacts::{sha256_hex, Summary};
pub use commands::{run, Command, Flags, Input};
pub use error::CliError;
pub use presets::preset;
pub use problem_file::ProblemFile;
