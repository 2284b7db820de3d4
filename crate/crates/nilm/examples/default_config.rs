//! Prints the built-in configuration as a TOML file.
//!
//! Redirect it to a file, edit, and feed it back with `nilm --config`:
//!
//! ```text
//! cargo run --example default_config > my_setup.toml
//! nilm run-all --config my_setup.toml
//! ```

use nilm::PipelineConfig;

fn main() {
    print!("{}", PipelineConfig::default().to_toml_string());
}
