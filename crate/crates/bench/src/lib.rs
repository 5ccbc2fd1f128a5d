//! Shared fixtures for the pipeline benchmarks.

use pwhile_core::lang::{parse, Program};
use std::path::Path;

pub fn corpus(name: &str) -> Program {
    let dir = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../programs"));
    let text = std::fs::read_to_string(dir.join(name)).expect("corpus program");
    parse(&text).expect("corpus program parses")
}

pub fn sketch_path() -> &'static Path {
    Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../programs/sketches/swap.json"
    ))
}
