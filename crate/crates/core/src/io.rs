//! Output files. Every CSV starts with `#` comment lines holding the
//! resolved configuration, so a run can be repeated from its output alone.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MSNAKE_OUT_DIR";

/// `flag` if given, else `$MSNAKE_OUT_DIR`, else the working directory.
pub fn output_dir(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
    }
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::File {
        path: path.to_path_buf(),
        source,
    }
}

/// Create `path` (and its parent directories) for writing.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(file_err(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(file_err(path))?))
}

/// Write `text` as `# `-prefixed lines.
pub fn write_comment<W: Write>(w: &mut W, text: &str) -> std::io::Result<()> {
    for line in text.lines() {
        if line.is_empty() {
            writeln!(w, "#")?;
        } else {
            writeln!(w, "# {line}")?;
        }
    }
    Ok(())
}

/// A CSV file with a comment header. Fields are quoted where needed.
pub struct CsvOut {
    path: PathBuf,
    inner: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    /// `comment` goes first, then the column row taken from `columns`
    /// (a comma-separated header such as `Trajectory::CSV_HEADER`).
    pub fn create(path: &Path, comment: &str, columns: &str) -> Result<Self> {
        let mut f = create(path)?;
        write_comment(&mut f, comment).map_err(file_err(path))?;
        let mut inner = csv::Writer::from_writer(f);
        inner
            .write_record(columns.split(','))
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path: path.to_path_buf(),
            inner,
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner
            .write_record(fields)
            .map_err(|e| Error::Config(format!("{}: {e}", self.path.display())))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(file_err(&self.path))
    }
}

/// Read back the data rows of a file written by [`CsvOut`], skipping the
/// comment header.
pub fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let header = r
        .headers()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// The comment lines at the top of a file, prefixes stripped.
pub fn read_comment(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).map_err(file_err(path))?;
    let mut out = String::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        out.push_str(line.strip_prefix("# ").unwrap_or(line.trim_start_matches('#')));
        out.push('\n');
    }
    Ok(out)
}
