use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::AcquisitionError;

/// Where one release's data lives: a local N-Triples dump or a SPARQL endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReleaseSource {
    Dump(PathBuf),
    Endpoint(String),
}

/// Identity, date and source of one knowledge-base release.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseDescriptor {
    pub id: String,
    pub date: NaiveDate,
    pub source: ReleaseSource,
}

impl ReleaseDescriptor {
    pub fn new(
        id: impl Into<String>,
        date: &str,
        source: ReleaseSource,
    ) -> Result<Self, AcquisitionError> {
        let id = id.into();
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d").map_err(|_| {
            AcquisitionError::UnparseableDate { id: id.clone(), date: date.to_string() }
        })?;
        Ok(ReleaseDescriptor { id, date, source })
    }
}

/// The ordered series of releases, kept strictly ascending by date.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseRegistry {
    releases: Vec<ReleaseDescriptor>,
}

impl ReleaseRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a release, keeping the registry date-sorted.
    pub fn register(&mut self, d: ReleaseDescriptor) -> Result<(), AcquisitionError> {
        if self.releases.iter().any(|r| r.id == d.id) {
            return Err(AcquisitionError::DuplicateRelease(d.id));
        }
        if self.releases.iter().any(|r| r.date == d.date) {
            return Err(AcquisitionError::ConflictingDate(d.id, d.date));
        }
        let pos = self.releases.partition_point(|r| r.date < d.date);
        self.releases.insert(pos, d);
        Ok(())
    }

    /// Releases in ascending date order.
    pub fn releases(&self) -> &[ReleaseDescriptor] {
        &self.releases
    }

    pub fn len(&self) -> usize {
        self.releases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.releases.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ReleaseDescriptor> {
        self.releases.iter().find(|r| r.id == id)
    }

    pub fn require(&self, id: &str) -> Result<&ReleaseDescriptor, AcquisitionError> {
        self.get(id).ok_or_else(|| AcquisitionError::UnknownRelease(id.to_string()))
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, AcquisitionError> {
        let reg: ReleaseRegistry = serde_json::from_reader(reader)?;
        // Rebuild through register() so file contents obey the same invariants.
        let mut out = ReleaseRegistry::new();
        for r in reg.releases {
            out.register(r)?;
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AcquisitionError> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|source| AcquisitionError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AcquisitionError> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).expect("registry serializes");
        let mut file = fs::File::create(path).map_err(|source| AcquisitionError::Io {
            path: path.display().to_string(),
            source,
        })?;
        file.write_all(json.as_bytes()).and_then(|_| file.write_all(b"\n")).map_err(|source| {
            AcquisitionError::Io { path: path.display().to_string(), source }
        })
    }
}
