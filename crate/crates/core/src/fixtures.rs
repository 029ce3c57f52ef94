//! Bundled case data: the 19-task shirt line ("style A").

use crate::report_io::{parse_bundle, IoError, LoadedScenario};

pub const STYLE_A_PROCESS_SHEET: &str = include_str!("../fixtures/style_a/process_sheet.csv");
pub const STYLE_A_RESOURCES: &str = include_str!("../fixtures/style_a/resources.csv");
pub const STYLE_A_SCENARIO: &str = include_str!("../fixtures/style_a/scenario.json");

/// Loads the bundled style A scenario together with its line layout.
pub fn style_a() -> Result<LoadedScenario, IoError> {
    parse_bundle(
        ("style_a/process_sheet.csv", STYLE_A_PROCESS_SHEET),
        ("style_a/resources.csv", STYLE_A_RESOURCES),
        ("style_a/scenario.json", STYLE_A_SCENARIO),
    )
}

/// Directory holding the style A fixture files in the source tree.
pub fn style_a_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("style_a")
}
