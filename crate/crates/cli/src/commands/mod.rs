pub mod estimate;
pub mod simulate;
pub mod unitroot;

use std::path::Path;

use dynpanel::panel::{load_panel, PanelLayout};
use dynpanel::PanelDataset;
use serde::de::DeserializeOwned;

use crate::args::PanelInput;
use crate::error::{from_panel, CliError};

pub fn load(input: &PanelInput) -> Result<PanelDataset, CliError> {
    let layout = PanelLayout {
        entity_column: input.entity_col.clone(),
        time_column: input.time_col.clone(),
    };
    load_panel(&input.input, &layout).map_err(|e| from_panel("reading panel", e))
}

/// Reads a JSON config, naming the offending key path on failure.
pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data("reading config", format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        let inner = e.into_inner();
        if at == "." {
            CliError::usage("reading config", inner)
        } else {
            CliError::usage("reading config", format!("at `{at}`: {inner}"))
        }
    })
}
