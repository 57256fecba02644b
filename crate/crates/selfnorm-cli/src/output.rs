//! Output plumbing: 17-significant-digit number formatting, the output
//! directory convention, and a sink that mirrors stdout into a file.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SELFNORM_OUT_DIR";

/// 17 significant digits round-trip f64 exactly.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Where output files land: `--out-dir`, else `$SELFNORM_OUT_DIR`, else `.`.
pub fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Collects report lines, prints them to stdout, and optionally persists the
/// identical bytes to `dir/name`.
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new() -> Report {
        Report { lines: Vec::new() }
    }

    pub fn push(&mut self, line: String) {
        self.lines.push(line);
    }

    pub fn comment(&mut self, text: &str) {
        self.lines.push(format!("# {text}"));
    }

    /// Emit to stdout and, when a file name is given, to `dir/name`.
    pub fn finish(self, dir: &std::path::Path, file: Option<&str>) -> Result<(), String> {
        let mut body = self.lines.join("\n");
        body.push('\n');
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(body.as_bytes()).map_err(|e| format!("writing stdout: {e}"))?;
        if let Some(name) = file {
            fs::create_dir_all(dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, body.as_bytes())
                .map_err(|e| format!("writing {}: {e}", path.display()))?;
        }
        Ok(())
    }
}
