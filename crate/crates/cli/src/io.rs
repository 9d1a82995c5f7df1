use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};
use slpa::{Graph, RawCover};

use crate::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::User(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Loaded file plus its `(path, sha256)` record.
pub struct Input<T> {
    pub value: T,
    pub record: (String, String),
}

pub fn load_graph(path: &Path) -> Result<Input<Graph>, CliError> {
    let text = read(path)?;
    let (graph, report) = slpa::parse_edge_list(&text)
        .map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
    if report.duplicate_edges > 0 {
        log::info!("collapsed {} duplicate edge(s)", report.duplicate_edges);
    }
    log::info!("{}: {}", path.display(), graph.summary());
    Ok(Input {
        value: graph,
        record: (path.display().to_string(), digest(&text)),
    })
}

pub fn load_cover(path: &Path) -> Result<Input<RawCover>, CliError> {
    let text = read(path)?;
    Ok(Input {
        value: slpa::parse_cover(&text),
        record: (path.display().to_string(), digest(&text)),
    })
}

/// Turns an id-universe error into a user error naming at most ten ids.
pub fn universe_error(what: &str, err: slpa::CoverError) -> CliError {
    match err {
        slpa::CoverError::UnknownIds(ids) => {
            let shown: Vec<&str> = ids.iter().take(10).map(String::as_str).collect();
            CliError::User(format!(
                "{what}: node universes differ ({} offending ids): {}",
                ids.len(),
                shown.join(" ")
            ))
        }
        other => CliError::User(format!("{what}: {other}")),
    }
}
