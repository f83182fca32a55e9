#![allow(dead_code)]

use cubulate::{parse_presentation, StaggeredComplex};

pub fn load(name: &str) -> StaggeredComplex {
    let path = format!("{}/../../presentations/{name}.sgc", env!("CARGO_MANIFEST_DIR"));
    parse_presentation(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn word(cx: &StaggeredComplex, text: &str) -> cubulate::Path {
    cx.parse_word(text).unwrap()
}
