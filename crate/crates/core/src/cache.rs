//! Content-addressed on-disk store for computed q-characters.
//!
//! Each entry is one JSON file named by the SHA-256 of its key. Monomials
//! are stored as flat `[i, s, e, i, s, e, ...]` arrays, which keeps large
//! characters cheap to read back. Writes go to a temporary file that is then
//! renamed, so readers never see a partial entry.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cartan::CartanData;
use crate::error::{Error, Result};
use crate::monomial::Monomial;
use crate::poly::LaurentPoly;
use crate::qchar::{QCharacter, TruncationRegion};

/// Bumped whenever the entry layout changes; older entries are misses.
const FORMAT: u32 = 2;

#[derive(Serialize, Deserialize)]
struct Stored {
    format: u32,
    highest: Vec<i32>,
    terms: Vec<(Vec<i32>, i64)>,
    complete: bool,
    cut_right_negative: bool,
    region: Option<TruncationRegion>,
}

fn flat(m: &Monomial) -> Vec<i32> {
    m.factors().flat_map(|(i, s, e)| [i as i32, s, e]).collect()
}

fn unflat(v: &[i32]) -> Option<Monomial> {
    if !v.len().is_multiple_of(3) || v.chunks(3).any(|c| c[0] < 1) {
        return None;
    }
    Some(Monomial::from_factors(
        v.chunks(3).map(|c| (c[0] as usize, c[1], c[2])),
    ))
}

impl Stored {
    fn new(q: &QCharacter) -> Self {
        Stored {
            format: FORMAT,
            highest: flat(&q.highest),
            terms: q.poly.iter().map(|(m, c)| (flat(m), c)).collect(),
            complete: q.complete,
            cut_right_negative: q.cut_right_negative,
            region: q.truncation.clone(),
        }
    }

    fn into_character(self) -> Option<QCharacter> {
        if self.format != FORMAT {
            return None;
        }
        let mut poly = LaurentPoly::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            poly.add_term(unflat(m)?, *c);
        }
        Some(QCharacter {
            poly,
            highest: unflat(&self.highest)?,
            truncation: self.region,
            complete: self.complete,
            cut_right_negative: self.cut_right_negative,
        })
    }
}

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "MINAFF_CACHE_DIR";

#[derive(Clone, Debug)]
pub struct CharCache {
    dir: PathBuf,
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

impl CharCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io)?;
        Ok(CharCache { dir })
    }

    /// Cache at `$MINAFF_CACHE_DIR`, if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Ok(Some(CharCache::new(PathBuf::from(d))?)),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(cd: &CartanData, m: &Monomial, region: Option<&TruncationRegion>) -> String {
        let mut h = Sha256::new();
        h.update(cd.fingerprint().as_bytes());
        h.update(b"|");
        h.update(m.to_string().as_bytes());
        h.update(b"|");
        if let Some(r) = region {
            h.update(r.to_string().as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<QCharacter> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str::<Stored>(&text).ok()?.into_character()
    }

    pub fn put(&self, key: &str, q: &QCharacter) -> Result<()> {
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp).map_err(io)?;
            let text =
                serde_json::to_string(&Stored::new(q)).map_err(|e| Error::Io(e.to_string()))?;
            f.write_all(text.as_bytes()).map_err(io)?;
        }
        fs::rename(&tmp, self.path(key)).map_err(io)
    }

    /// `(key, size in bytes)` of every entry, sorted by key.
    pub fn entries(&self) -> Result<Vec<(String, u64)>> {
        let mut v = vec![];
        for e in fs::read_dir(&self.dir).map_err(io)? {
            let e = e.map_err(io)?;
            let name = e.file_name().to_string_lossy().into_owned();
            if let Some(k) = name.strip_suffix(".json") {
                v.push((k.to_string(), e.metadata().map_err(io)?.len()));
            }
        }
        v.sort();
        Ok(v)
    }

    /// Removes every entry; returns how many were removed.
    pub fn clear(&self) -> Result<usize> {
        let entries = self.entries()?;
        for (k, _) in &entries {
            fs::remove_file(self.path(k)).map_err(io)?;
        }
        Ok(entries.len())
    }
}
