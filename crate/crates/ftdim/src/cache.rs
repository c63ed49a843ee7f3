//! Result cache.
//!
//! A cache entry stores the canonical JSON of a result document, keyed by
//! the SHA-256 of the inputs that determine it (schema version, subcommand,
//! spec text, and every parameter that influences the computation).  A warm
//! run deserializes the document and re-renders all artifacts from it; since
//! rendering is deterministic and the JSON round-trip is byte-exact, warm
//! and cold runs produce identical bytes.

use crate::doc::{doc_json, ResultDoc, SCHEMA_VERSION};
use crate::pipeline::{sha256_hex, CliError};
use std::fs;
use std::path::Path;

/// One named cache file (name is the key plus `.json`).
#[derive(Clone, Debug)]
pub struct CacheEntry {
    pub name: String,
    pub contents: String,
}

/// A document plus the cache entries backing it.
pub struct CacheOutcome {
    pub doc: ResultDoc,
    pub entries: Vec<CacheEntry>,
    /// True when the document came from the cache instead of a computation.
    pub warm: bool,
}

/// Builds the key material for a run; every computation-relevant input must
/// appear here so distinct runs never collide.
pub fn key_material(kind: &str, spec_text: &str, params_repr: &str) -> String {
    format!("schema {SCHEMA_VERSION}\nkind {kind}\nparams {params_repr}\nspec:\n{spec_text}")
}

pub fn cache_key(material: &str) -> String {
    sha256_hex(material)
}

/// Runs `compute` unless a valid cache entry exists for the key material.
/// With `dir = None` nothing is read or written, but the entry that a cache
/// would hold is still reported.
pub fn run_cached(
    dir: Option<&Path>,
    material: &str,
    compute: impl FnOnce() -> Result<ResultDoc, CliError>,
) -> Result<CacheOutcome, CliError> {
    let key = cache_key(material);
    let name = format!("{key}.json");
    if let Some(dir) = dir {
        let path = dir.join(&name);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(doc) = serde_json::from_str::<ResultDoc>(&text) {
                if doc.schema_version == SCHEMA_VERSION {
                    let contents = doc_json(&doc);
                    return Ok(CacheOutcome {
                        doc,
                        entries: vec![CacheEntry { name, contents }],
                        warm: true,
                    });
                }
            }
            // Unreadable or stale-schema entries are recomputed and replaced.
        }
    }
    let doc = compute()?;
    let contents = doc_json(&doc);
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(&name), &contents)?;
    }
    Ok(CacheOutcome {
        doc,
        entries: vec![CacheEntry { name, contents }],
        warm: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doc::{Flags, Params};

    fn tiny_doc(tag: &str) -> ResultDoc {
        ResultDoc {
            schema_version: SCHEMA_VERSION,
            generator: format!("test {tag}"),
            kind: "analyze".into(),
            params: Params::empty(),
            spec: None,
            structure: None,
            dims: None,
            point: None,
            table: None,
            pisot: None,
            flags: Flags::default(),
            warnings: vec![],
        }
    }

    #[test]
    fn keys_separate_distinct_inputs() {
        let a = cache_key(&key_material("analyze", "spec a", "p"));
        let b = cache_key(&key_material("analyze", "spec b", "p"));
        let c = cache_key(&key_material("analyze", "spec a", "q"));
        let d = cache_key(&key_material("dims", "spec a", "p"));
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        assert_eq!(a, cache_key(&key_material("analyze", "spec a", "p")));
    }

    #[test]
    fn warm_run_returns_identical_bytes_and_skips_compute() {
        let dir = tempfile::tempdir().unwrap();
        let material = key_material("analyze", "spec", "params");
        let cold = run_cached(Some(dir.path()), &material, || Ok(tiny_doc("cold"))).unwrap();
        assert!(!cold.warm);
        let warm = run_cached(Some(dir.path()), &material, || {
            panic!("cache should have been hit")
        })
        .unwrap();
        assert!(warm.warm);
        assert_eq!(warm.entries[0].contents, cold.entries[0].contents);
        assert_eq!(warm.entries[0].name, cold.entries[0].name);
        assert_eq!(doc_json(&warm.doc), doc_json(&cold.doc));
    }

    #[test]
    fn corrupt_entries_are_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let material = key_material("analyze", "spec", "params");
        let name = format!("{}.json", cache_key(&material));
        std::fs::write(dir.path().join(&name), "{ not json").unwrap();
        let out = run_cached(Some(dir.path()), &material, || Ok(tiny_doc("fresh"))).unwrap();
        assert!(!out.warm);
        let reread = std::fs::read_to_string(dir.path().join(&name)).unwrap();
        assert_eq!(reread, out.entries[0].contents);
    }

    #[test]
    fn no_directory_still_reports_the_entry() {
        let material = key_material("analyze", "spec", "params");
        let out = run_cached(None, &material, || Ok(tiny_doc("x"))).unwrap();
        assert!(!out.warm);
        assert_eq!(out.entries.len(), 1);
        assert!(out.entries[0].name.ends_with(".json"));
    }
}
