use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use gaplab::io::write_atomic;

/// Writes to `out` atomically, or to stdout.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => write_atomic(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
            Ok(())
        }
    }
}

/// `dir/stem.<suffix>` for `dir/stem.ext`.
pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar(Path::new("a/b/x.csv"), "run.csv"), PathBuf::from("a/b/x.run.csv"));
        assert_eq!(sidecar(Path::new("x"), "meta.json"), PathBuf::from("x.meta.json"));
    }
}
