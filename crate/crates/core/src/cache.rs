//! Content-addressed JSON cache: files are named by the SHA-256 of the
//! serialized key.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Hex SHA-256 of the JSON serialization of `value`.
pub fn hash_json<K: Serialize + ?Sized>(value: &K) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self {
            dir: dir.as_ref().to_path_buf(),
        })
    }

    pub fn key<K: Serialize + ?Sized>(kind: &str, key: &K) -> Result<String> {
        Ok(format!("{kind}-{}", hash_json(key)?))
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        let p = self.path(key);
        if !p.exists() {
            return Ok(None);
        }
        let f = fs::File::open(p)?;
        Ok(Some(serde_json::from_reader(std::io::BufReader::new(f))?))
    }

    /// Writes through a temporary file so readers never see partial data.
    pub fn store<T: Serialize>(&self, key: &str, value: &T) -> Result<()> {
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        {
            let f = fs::File::create(&tmp)?;
            let mut w = std::io::BufWriter::new(f);
            serde_json::to_writer(&mut w, value)?;
            std::io::Write::flush(&mut w)?;
        }
        fs::rename(tmp, self.path(key))?;
        Ok(())
    }

    /// Loads the entry or builds and stores it; the flag reports a hit.
    pub fn get_or_build<T, F>(&self, key: &str, build: F) -> Result<(T, bool)>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        if let Some(v) = self.load(key)? {
            return Ok((v, true));
        }
        let v = build()?;
        self.store(key, &v)?;
        Ok((v, false))
    }
}
