use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use satgap::instances::parse_dimacs;
use satgap::{Metadata, SatInstance};
use tempfile::NamedTempFile;

/// Sidecar path for an instance file: `foo.cnf` -> `foo.cnf.meta`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        NamedTempFile::new_in(dir).with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Reads a DIMACS file and, when present, its metadata sidecar.
pub fn read_instance(path: &Path) -> Result<SatInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut instance = parse_dimacs(&text).with_context(|| format!("in {}", path.display()))?;
    let meta = sidecar_path(path);
    if meta.exists() {
        let text = fs::read_to_string(&meta)?;
        let metadata = Metadata::from_sidecar(&text).with_context(|| format!("in {}", meta.display()))?;
        instance = instance.with_metadata(metadata);
    }
    Ok(instance)
}
