//! On-disk reuse of compiled models, keyed by a hash of the schema source.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{compile_model, CompiledModel, ModelSchema, SchemaError};

/// Bumped whenever the serialized layout of [`CompiledModel`] changes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CacheError {
    #[error("cache format version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("stale cache entry for `{model}`: schema hash changed")]
    Stale { model: String },
    #[error("corrupt cache payload: {0}")]
    Corrupt(String),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format_version: u32,
    schema_hash: String,
    model: CompiledModel,
}

/// Hex SHA-256 of the canonical JSON form of a schema.
pub fn schema_hash(schema: &ModelSchema) -> String {
    let text = serde_json::to_string(schema).expect("schema serializes");
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(digest)
}

pub fn cache_store(c: &CompiledModel) -> Vec<u8> {
    let env = Envelope { format_version: FORMAT_VERSION, schema_hash: c.schema_hash.clone(), model: c.clone() };
    serde_json::to_vec(&env).expect("compiled model serializes")
}

/// Decode a cache payload. When `expected_hash` is given, a different
/// stored hash is reported as stale.
pub fn cache_load(bytes: &[u8], expected_hash: Option<&str>) -> Result<CompiledModel, CacheError> {
    #[derive(Deserialize)]
    struct Header {
        format_version: u32,
    }
    let h: Header = serde_json::from_slice(bytes).map_err(|e| CacheError::Corrupt(e.to_string()))?;
    if h.format_version != FORMAT_VERSION {
        return Err(CacheError::Version { found: h.format_version, expected: FORMAT_VERSION });
    }
    let env: Envelope = serde_json::from_slice(bytes).map_err(|e| CacheError::Corrupt(e.to_string()))?;
    if env.schema_hash != env.model.schema_hash {
        return Err(CacheError::Corrupt("hash fields disagree".into()));
    }
    if let Some(want) = expected_hash {
        if env.schema_hash != want {
            return Err(CacheError::Stale { model: env.model.name });
        }
    }
    Ok(env.model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Miss,
    /// Entry existed but was unusable (stale, wrong version or corrupt).
    Recompiled,
    Disabled,
}

/// Directory of compiled models, one file per model.
#[derive(Debug, Clone)]
pub struct ModelCache {
    dir: Option<PathBuf>,
}

impl ModelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ModelCache { dir: Some(dir.into()) }
    }

    pub fn disabled() -> Self {
        ModelCache { dir: None }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path(&self, schema: &ModelSchema) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{}.json", schema.name)))
    }

    /// Load a compiled model or compile and store it. Write failures are
    /// not fatal; the compiled model is returned either way.
    pub fn load_or_compile(&self, schema: &ModelSchema) -> Result<(CompiledModel, CacheOutcome), SchemaError> {
        let Some(path) = self.path(schema) else {
            return Ok((compile_model(schema)?, CacheOutcome::Disabled));
        };
        let hash = schema_hash(schema);
        let mut outcome = CacheOutcome::Miss;
        if let Ok(bytes) = fs::read(&path) {
            match cache_load(&bytes, Some(&hash)) {
                Ok(m) => return Ok((m, CacheOutcome::Hit)),
                Err(_) => outcome = CacheOutcome::Recompiled,
            }
        }
        let c = compile_model(schema)?;
        if let Some(parent) = path.parent() {
            let _ = fs::create_dir_all(parent);
        }
        let tmp = path.with_extension("json.tmp");
        if fs::write(&tmp, cache_store(&c)).is_ok() {
            let _ = fs::rename(&tmp, &path);
        }
        Ok((c, outcome))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn shunt() -> ModelSchema {
        models::shunt()
    }

    #[test]
    fn store_load_round_trip() {
        let c = compile_model(&shunt()).unwrap();
        let back = cache_load(&cache_store(&c), Some(&c.schema_hash)).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.schema_hash, schema_hash(&shunt()));
    }

    #[test]
    fn rejects_stale_version_and_corrupt_entries() {
        let c = compile_model(&shunt()).unwrap();
        let bytes = cache_store(&c);
        assert_eq!(cache_load(&bytes, Some("00")), Err(CacheError::Stale { model: "Shunt".into() }));

        let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        v["format_version"] = (FORMAT_VERSION + 1).into();
        let err = cache_load(&serde_json::to_vec(&v).unwrap(), None).unwrap_err();
        assert_eq!(err, CacheError::Version { found: FORMAT_VERSION + 1, expected: FORMAT_VERSION });

        assert!(matches!(cache_load(&bytes[..bytes.len() / 2], None), Err(CacheError::Corrupt(_))));
        let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        v["schema_hash"] = "ff".into();
        assert!(matches!(cache_load(&serde_json::to_vec(&v).unwrap(), None), Err(CacheError::Corrupt(_))));
    }

    #[test]
    fn load_or_compile_outcomes() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ModelCache::new(dir.path().join("nested"));
        let s = shunt();
        let (a, o) = cache.load_or_compile(&s).unwrap();
        assert_eq!(o, CacheOutcome::Miss);
        let (b, o) = cache.load_or_compile(&s).unwrap();
        assert_eq!(o, CacheOutcome::Hit);
        assert_eq!(a, b);

        fs::write(dir.path().join("nested/Shunt.json"), b"{not json").unwrap();
        assert_eq!(cache.load_or_compile(&s).unwrap().1, CacheOutcome::Recompiled);
        assert_eq!(cache.load_or_compile(&s).unwrap().1, CacheOutcome::Hit);

        // an edited schema hashes differently and is recompiled
        let mut edited = s.clone();
        edited.description.push_str(" (edited)");
        assert_ne!(schema_hash(&edited), schema_hash(&s));
        assert_eq!(cache.load_or_compile(&edited).unwrap().1, CacheOutcome::Recompiled);

        assert_eq!(ModelCache::disabled().load_or_compile(&s).unwrap().1, CacheOutcome::Disabled);
    }
}
