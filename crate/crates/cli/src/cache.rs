//! Closures stored under the SHA-256 of their defining data.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use liegen_core::algebra::Variety;
use liegen_core::bracket::{closure, ClosureBasis, ClosureJson, NamedField};
use liegen_core::fields::VectorField;

use crate::output::{failure, usage, CliError};

/// Contents of a closure file.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureFile {
    pub key: String,
    pub variety: Variety,
    pub closure: ClosureJson,
}

#[derive(Serialize)]
struct KeyData {
    variety: Variety,
    generators: Vec<NamedField>,
    degree: u32,
    slack: u32,
}

/// Hex SHA-256 of the variety, the generators (names and fields), `D` and the slack.
pub fn key(
    variety: Variety,
    generators: &[(String, VectorField)],
    degree: u32,
    slack: u32,
) -> String {
    let data = KeyData {
        variety,
        generators: generators
            .iter()
            .map(|(name, f)| NamedField {
                name: name.clone(),
                field: f.to_json(),
            })
            .collect(),
        degree,
        slack,
    };
    let bytes = serde_json::to_vec(&data).expect("key data serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub fn read(path: &Path) -> Result<(ClosureFile, ClosureBasis), CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let file: ClosureFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let cb = ClosureBasis::from_json(&file.closure)
        .map_err(|e| failure(format!("{}: {e}", path.display())))?;
    Ok((file, cb))
}

/// Where the closure came from.
pub enum Source {
    Hit,
    Miss,
    /// The cached file did not rebuild and was recomputed.
    Stale,
}

impl Source {
    pub fn label(&self) -> &'static str {
        match self {
            Source::Hit => "hit",
            Source::Miss => "miss",
            Source::Stale => "stale",
        }
    }
}

/// The closure for these parameters, reusing the cached file when it rebuilds
/// to the same key.
pub fn load_or_compute(
    dir: &Path,
    variety: Variety,
    generators: &[(String, VectorField)],
    degree: u32,
    slack: u32,
) -> Result<(ClosureBasis, PathBuf, Source), CliError> {
    let key = key(variety, generators, degree, slack);
    let path = dir.join(format!("{key}.json"));
    let mut source = Source::Miss;
    if path.exists() {
        match read(&path) {
            Ok((file, cb)) if file.key == key => return Ok((cb, path, Source::Hit)),
            _ => source = Source::Stale,
        }
    }
    let cb = closure(generators, degree, slack).map_err(usage)?;
    let file = ClosureFile {
        key,
        variety,
        closure: cb.to_json(),
    };
    std::fs::create_dir_all(dir).map_err(|e| failure(format!("{}: {e}", dir.display())))?;
    // write then rename, so readers never see a partial file
    let tmp = path.with_extension("json.tmp");
    let text = serde_json::to_string(&file).expect("closure serializes");
    std::fs::write(&tmp, text)
        .and_then(|()| std::fs::rename(&tmp, &path))
        .map_err(|e| failure(format!("{}: {e}", path.display())))?;
    Ok((cb, path, source))
}
