//! Append-only JSON-lines store of `q_n` records.
//!
//! Each line is one [`PrimeSpeedRecord`]. A cached record is re-checked
//! (primality and speed) before it is trusted; the search only runs for
//! indices that are missing.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::primes::{check_record, smallest_prime_with_speed, PrimeSpeedRecord};

/// Where a record came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Cached,
    Computed,
}

#[derive(Debug)]
pub struct PrimeCache {
    path: PathBuf,
    records: BTreeMap<u64, PrimeSpeedRecord>,
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Cache(format!("{}: {e}", path.display()))
}

impl PrimeCache {
    /// Load `path`, treating a missing file as empty.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut records = BTreeMap::new();
        match File::open(&path) {
            Ok(f) => {
                for (i, line) in BufReader::new(f).lines().enumerate() {
                    let line = line.map_err(|e| io_error(&path, e))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let record: PrimeSpeedRecord = serde_json::from_str(&line)
                        .map_err(|e| Error::Cache(format!("{}:{}: {e}", path.display(), i + 1)))?;
                    if let Some(prev) = records.get(&record.n) {
                        if prev != &record {
                            return Err(Error::Cache(format!(
                                "{}:{}: conflicting entries for n = {}",
                                path.display(),
                                i + 1,
                                record.n
                            )));
                        }
                    }
                    records.insert(record.n, record);
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(io_error(&path, e)),
        }
        Ok(PrimeCache { path, records })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, n: u64) -> Option<&PrimeSpeedRecord> {
        self.records.get(&n)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Append one record as a single line.
    pub fn append(&mut self, record: &PrimeSpeedRecord) -> Result<()> {
        let mut line = serde_json::to_string(record).map_err(|e| Error::Cache(e.to_string()))?;
        line.push('\n');
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| io_error(&self.path, e))?;
        // one write call per line keeps lines whole under O_APPEND
        f.write_all(line.as_bytes()).map_err(|e| io_error(&self.path, e))?;
        self.records.insert(record.n, record.clone());
        Ok(())
    }

    /// Cached record after verification, or a fresh search that is then appended.
    pub fn lookup(&mut self, n: u64, budget: u64) -> Result<(PrimeSpeedRecord, Provenance)> {
        if let Some(r) = self.records.get(&n) {
            check_record(r).map_err(|e| Error::Cache(format!("{}: {e}", self.path.display())))?;
            return Ok((r.clone(), Provenance::Cached));
        }
        let record = smallest_prime_with_speed(n, budget)?;
        self.append(&record)?;
        Ok((record, Provenance::Computed))
    }
}
