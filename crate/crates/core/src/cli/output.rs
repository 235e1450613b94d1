use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use tempfile::NamedTempFile;

use super::{CliError, Command, Outcome, VERSION};

/// Writes `contents` to a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn millis(t: SystemTime) -> u128 {
    t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// Result JSON, optional CSV and extra files, then the timing sidecar. Returns the JSON path.
pub(crate) fn write_artifacts(
    dir: &Path,
    command: Command,
    document: &Value,
    outcome: Option<&Outcome>,
    started: SystemTime,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let name = command.name();
    let main = dir.join(format!("{name}.json"));
    let mut text = serde_json::to_string_pretty(document).expect("documents serialize");
    text.push('\n');
    write_atomic(&main, text.as_bytes())?;
    let mut files = vec![format!("{name}.json")];
    if let Some(o) = outcome {
        if let Some(csv) = &o.csv {
            write_atomic(&dir.join(format!("{name}.csv")), csv.as_bytes())?;
            files.push(format!("{name}.csv"));
        }
        for (file, contents) in &o.files {
            write_atomic(&dir.join(file), contents.as_bytes())?;
            files.push(file.clone());
        }
    }
    let finished = SystemTime::now();
    let meta = json!({
        "version": VERSION,
        "command": name,
        "started_unix_ms": millis(started) as u64,
        "finished_unix_ms": millis(finished) as u64,
        "elapsed_ms": finished.duration_since(started).map_or(0, |d| d.as_millis()) as u64,
        "files": files,
    });
    write_atomic(
        &dir.join(format!("{name}.meta.json")),
        serde_json::to_string_pretty(&meta).expect("meta serializes").as_bytes(),
    )?;
    Ok(main)
}
