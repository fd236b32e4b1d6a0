use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use singularcs::SCHEMA_VERSION;

use crate::CliError;

/// Common wrapper of every JSON report. Only `generated_at` varies between
/// identical runs.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub schema_version: &'static str,
    pub command: &'a str,
    pub generated_at: String,
    pub status: &'static str,
    pub config: &'a C,
    pub result: &'a R,
}

#[derive(Serialize)]
pub struct ErrorBody<'a> {
    pub kind: &'a str,
    pub message: String,
}

#[derive(Serialize)]
pub struct ErrorReport<'a> {
    pub schema_version: &'static str,
    pub command: &'a str,
    pub generated_at: String,
    pub status: &'static str,
    pub error: ErrorBody<'a>,
    /// Files written before the failure.
    pub partial: &'a [String],
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Output directory plus the list of files written so far.
pub struct Sink {
    pub dir: PathBuf,
    pub written: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Create `name` in the output directory and fill it with `body`.
    pub fn file(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.file(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }

    pub fn report<C: Serialize, R: Serialize>(&mut self, command: &str, config: &C, result: &R) -> Result<(), CliError> {
        let env = Envelope {
            schema_version: SCHEMA_VERSION,
            command,
            generated_at: timestamp(),
            status: "ok",
            config,
            result,
        };
        self.json(&format!("{command}.json"), &env)
    }
}
