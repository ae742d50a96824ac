//! Output staging: files go to a hidden sibling directory that is renamed
//! into place only when the run succeeds.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

pub struct StagedDir {
    target: PathBuf,
    staging: PathBuf,
    written: Vec<String>,
    committed: bool,
    /// Extensions to keep; everything else is skipped. The manifest is
    /// always written.
    formats: Option<Vec<String>>,
}

impl StagedDir {
    pub fn new(target: &Path) -> Result<Self> {
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)?;
        let name = target
            .file_name()
            .ok_or_else(|| Error::invalid(format!("bad output path {}", target.display())))?
            .to_string_lossy()
            .into_owned();
        let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir_all(&staging)?;
        Ok(Self {
            target: target.to_path_buf(),
            staging,
            written: Vec::new(),
            committed: false,
            formats: None,
        })
    }

    pub fn with_formats(mut self, formats: Vec<String>) -> Self {
        self.formats = Some(formats);
        self
    }

    fn keeps(&self, name: &str) -> bool {
        let ext = Path::new(name).extension().and_then(|e| e.to_str()).unwrap_or("");
        name == "manifest.json" || self.formats.as_ref().is_none_or(|f| f.iter().any(|x| x == ext))
    }

    pub fn target(&self) -> &Path {
        &self.target
    }

    /// Names written so far, in order.
    pub fn artifacts(&self) -> &[String] {
        &self.written
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if !self.keeps(name) {
            return Ok(());
        }
        let mut f = fs::File::create(self.staging.join(name))?;
        f.write_all(bytes)?;
        f.sync_all()?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write_bytes(name, s.as_bytes())
    }

    pub fn write_csv<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        self.write_bytes(name, &bytes)
    }

    /// Moves the staged directory onto the target, replacing an older run.
    pub fn commit(mut self) -> Result<PathBuf> {
        if self.target.exists() {
            let old = self.staging.with_extension("old");
            fs::rename(&self.target, &old)?;
            fs::rename(&self.staging, &self.target)?;
            fs::remove_dir_all(&old)?;
        } else {
            fs::rename(&self.staging, &self.target)?;
        }
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for StagedDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}

/// Writes a single file through a temporary sibling and a rename.
pub fn write_file_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(p) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(p)?;
    }
    let tmp = path.with_extension(format!("partial-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Shortest round-trip form, the same one the JSON artifacts use.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::Value::from(x).to_string()
    } else {
        "nan".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncommitted_runs_leave_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("run");
        {
            let mut s = StagedDir::new(&target).unwrap();
            s.write_bytes("a.txt", b"x").unwrap();
        }
        assert!(!target.exists());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn commit_replaces_previous_output() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("run");
        for text in ["first", "second"] {
            let mut s = StagedDir::new(&target).unwrap();
            s.write_csv("t.csv", &["a", "b"], [[text, "1"]]).unwrap();
            s.commit().unwrap();
        }
        assert_eq!(fs::read_to_string(target.join("t.csv")).unwrap(), "a,b\nsecond,1\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn format_filter() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("run");
        let mut s = StagedDir::new(&target).unwrap().with_formats(vec!["svg".into()]);
        s.write_bytes("a.csv", b"x").unwrap();
        s.write_bytes("b.svg", b"x").unwrap();
        s.write_bytes("manifest.json", b"{}").unwrap();
        assert_eq!(s.artifacts(), ["b.svg", "manifest.json"]);
    }

    #[test]
    fn numbers_round_trip() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(2.0), "2.0");
        assert_eq!(num(1.5e-13).parse::<f64>().unwrap(), 1.5e-13);
        assert!(num(1.5e-13).len() < 10);
    }
}
