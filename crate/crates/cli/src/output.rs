use std::io::Write;
use std::path::{Path, PathBuf};

use crate::commands::Artifact;
use crate::error::CliError;

/// Where results go: `--out` names a file (a directory for several
/// artifacts); otherwise the default output directory, otherwise stdout.
pub fn emit(
    out: Option<&Path>,
    out_dir: Option<&Path>,
    many: bool,
    artifacts: &[Artifact],
) -> Result<(), CliError> {
    let dir: Option<PathBuf> = match (out, many) {
        (Some(p), true) => Some(p.to_path_buf()),
        (Some(p), false) => {
            if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            let a = &artifacts[0];
            std::fs::write(p, &a.contents)?;
            eprintln!("wrote {}", p.display());
            return Ok(());
        }
        (None, true) => Some(out_dir.map_or_else(|| PathBuf::from("."), Path::to_path_buf)),
        (None, false) => out_dir.map(Path::to_path_buf),
    };
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            for a in artifacts {
                let path = dir.join(&a.name);
                std::fs::write(&path, &a.contents)?;
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for a in artifacts {
                stdout.write_all(a.contents.as_bytes())?;
            }
        }
    }
    Ok(())
}
