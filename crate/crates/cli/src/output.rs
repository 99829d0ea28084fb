use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use parareal_lab::artifacts::RunManifest;
use serde::Serialize;

/// Write `name` inside `dir` with `body` and record it in the manifest.
pub fn emit<F>(dir: &Path, name: &str, manifest: &mut RunManifest, body: F) -> anyhow::Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))?;
    manifest.outputs.push(path.display().to_string());
    Ok(())
}

pub fn emit_json<T: Serialize>(dir: &Path, name: &str, manifest: &mut RunManifest, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(dir, name, manifest, |w| w.write_all(text.as_bytes()))
}
