//! Output sinks and run metadata.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

/// Writes through `body` to `out`, or to stdout when `out` is absent.
pub fn write_primary<F>(out: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            body(&mut w).with_context(|| format!("cannot write {}", path.display()))?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w).context("cannot write to stdout")?;
            w.flush()?;
        }
    }
    Ok(())
}

/// `<out>.<suffix>` next to the primary output.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

/// Writes `<out>.meta.json` with the config echo, library version, pass flag and
/// summary. Nothing is written when output goes to stdout.
pub fn write_meta(
    out: Option<&Path>,
    command: &str,
    config: Value,
    passed: bool,
    summary: Value,
) -> Result<()> {
    let Some(out) = out else {
        return Ok(());
    };
    let meta = json!({
        "command": command,
        "config": config,
        "library_version": detpp::experiments::LIBRARY_VERSION,
        "passed": passed,
        "summary": summary,
    });
    let path = sibling(out, "meta.json");
    let text = serde_json::to_string_pretty(&meta)?;
    std::fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json(out: Option<&Path>, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_primary(out, |w| writeln!(w, "{text}"))
}
