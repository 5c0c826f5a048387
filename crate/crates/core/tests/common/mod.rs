#![allow(dead_code)]

pub mod props;

use std::path::PathBuf;

use cylevel::{parse_db, Dataset, TraceData};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture is readable")
}

pub fn dataset(name: &str) -> Dataset {
    parse_db(&fixture_text(name)).expect("fixture parses")
}

pub fn traces(name: &str) -> TraceData {
    let (td, warnings) = TraceData::parse(&fixture_text(name)).expect("trace fixture parses");
    assert!(warnings.is_empty(), "{warnings:?}");
    td
}

pub fn w4() -> Dataset {
    dataset("newforms_w4.txt")
}

pub fn w2() -> Dataset {
    dataset("newforms_w2_16.txt")
}

pub fn w2_subset() -> Dataset {
    dataset("newforms_w2_16_subset.txt")
}
