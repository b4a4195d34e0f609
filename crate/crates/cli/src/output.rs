//! Deterministic result files. Floats are written with 17 significant
//! digits and every file carries the config hash and seed.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `x` in scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Pretty JSON whose floats use [`fmt_f64`].
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| CliError::Internal(format!("json encoding failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))
}

/// Hash and seed stamped into every output file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stamp {
    pub config_sha256: String,
    pub seed: u64,
}

impl Stamp {
    pub fn comment_lines(&self) -> Vec<String> {
        vec![format!("config_sha256={}", self.config_sha256), format!("seed={}", self.seed)]
    }
}

/// Output directory that records what has been written in a manifest.
pub struct OutputDir {
    root: PathBuf,
    command: &'static str,
    stamp: Stamp,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_sha256: &'a str,
    seed: u64,
    complete: bool,
    files: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

impl OutputDir {
    /// Creates the directory and an incomplete manifest.
    pub fn create(root: &Path, command: &'static str, stamp: Stamp) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::write(root, e))?;
        let dir = Self { root: root.to_path_buf(), command, stamp, files: Vec::new() };
        dir.write_manifest(false, None)?;
        Ok(dir)
    }

    pub fn stamp(&self) -> &Stamp {
        &self.stamp
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| CliError::write(&path, e))?;
        self.record(name)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        self.write(name, &to_json(value)?)
    }

    /// Registers a file written by other means.
    pub fn record(&mut self, name: &str) -> CliResult<()> {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.write_manifest(false, None)
    }

    pub fn finish(&self) -> CliResult<()> {
        self.write_manifest(true, None)
    }

    /// Leaves the manifest marked incomplete with the failure reason.
    pub fn abort(&self, error: &CliError) {
        // the original error is more useful than a secondary write failure
        let _ = self.write_manifest(false, Some(&error.to_string()));
    }

    fn write_manifest(&self, complete: bool, error: Option<&str>) -> CliResult<()> {
        let m = Manifest {
            command: self.command,
            config_sha256: &self.stamp.config_sha256,
            seed: self.stamp.seed,
            complete,
            files: &self.files,
            error,
        };
        let path = self.path(MANIFEST);
        fs::write(&path, to_json(&m)?).map_err(|e| CliError::write(&path, e))
    }
}

/// CSV file preceded by `#` comment lines with the stamp; rows are flushed
/// as they are written so interrupted runs keep what they produced.
pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    pub fn create(path: &Path, stamp: &Stamp, header: &[&str]) -> CliResult<Self> {
        let mut file = BufWriter::new(File::create(path).map_err(|e| CliError::write(path, e))?);
        for line in stamp.comment_lines() {
            writeln!(file, "# {line}").map_err(|e| CliError::write(path, e))?;
        }
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header).map_err(|e| CliError::write(path, e))?;
        let mut sink = Self { path: path.to_path_buf(), writer };
        sink.flush()?;
        Ok(sink)
    }

    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| CliError::write(&self.path, e))
    }

    pub fn flush(&mut self) -> CliResult<()> {
        self.writer.flush().map_err(|e| CliError::write(&self.path, e))
    }
}

/// Reads a CSV written by [`CsvSink`], skipping comment lines.
pub fn read_csv(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let header = reader
        .headers()
        .map_err(|e| CliError::Input(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok((header, rows))
}
