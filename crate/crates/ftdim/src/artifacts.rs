//! Artifact bundle for one run.
//!
//! All artifacts are derived from the result document, so a bundle is fully
//! reproducible from the document alone.

use crate::cache::CacheEntry;
use crate::doc::{doc_json, exit_code, ResultDoc};
use crate::render::render_report;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Everything one invocation produces.
pub struct RunArtifacts {
    /// Human-readable report.
    pub report: String,
    /// Reduced transition diagram, DOT syntax.
    pub dot: Option<String>,
    /// Loop-class listing.
    pub classes_csv: Option<String>,
    /// Per-class dimension listing.
    pub dims_csv: Option<String>,
    /// Comparison table.
    pub table_csv: Option<String>,
    /// Canonical JSON of the result document.
    pub result_json: String,
    /// Cache files backing the run.
    pub cache_entries: Vec<CacheEntry>,
    pub doc: ResultDoc,
}

impl RunArtifacts {
    /// Renders the full bundle from a document.
    pub fn from_doc(doc: ResultDoc, cache_entries: Vec<CacheEntry>) -> RunArtifacts {
        let report = render_report(&doc);
        let result_json = doc_json(&doc);
        let dot = doc
            .structure
            .as_ref()
            .map(|s| s.dot.clone())
            .filter(|s| !s.is_empty());
        let classes_csv = doc
            .structure
            .as_ref()
            .map(|s| s.classes_csv.clone())
            .filter(|s| !s.is_empty());
        let dims_csv = doc
            .dims
            .as_ref()
            .map(|d| d.dims_csv.clone())
            .filter(|s| !s.is_empty());
        let table_csv = doc
            .table
            .as_ref()
            .map(|t| t.csv.clone())
            .filter(|s| !s.is_empty());
        RunArtifacts {
            report,
            dot,
            classes_csv,
            dims_csv,
            table_csv,
            result_json,
            cache_entries,
            doc,
        }
    }

    /// Exit code for the run; a function of the document flags alone.
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.doc.flags)
    }

    /// Writes every artifact into `out_dir` and returns the paths written.
    pub fn write_to(&self, out_dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(out_dir)?;
        let mut written = Vec::new();
        let put = |name: &str, contents: &str| -> io::Result<PathBuf> {
            let p = out_dir.join(name);
            fs::write(&p, contents)?;
            Ok(p)
        };
        written.push(put("report.txt", &self.report)?);
        if let Some(d) = &self.dot {
            written.push(put("diagram.dot", d)?);
        }
        if let Some(c) = &self.classes_csv {
            written.push(put("classes.csv", c)?);
        }
        if let Some(c) = &self.dims_csv {
            written.push(put("dims.csv", c)?);
        }
        if let Some(c) = &self.table_csv {
            written.push(put("table.csv", c)?);
        }
        written.push(put("result.json", &self.result_json)?);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doc::{Flags, Params, TableInfo, SCHEMA_VERSION};

    #[test]
    fn bundle_writes_only_present_artifacts() {
        let doc = ResultDoc {
            schema_version: SCHEMA_VERSION,
            generator: "t".into(),
            kind: "cantor-table".into(),
            params: Params::empty(),
            spec: None,
            structure: None,
            dims: None,
            point: None,
            table: Some(TableInfo {
                rows: vec![],
                csv: "m,d\n".into(),
            }),
            pisot: None,
            flags: Flags::default(),
            warnings: vec![],
        };
        let a = RunArtifacts::from_doc(doc, vec![]);
        assert!(a.dot.is_none());
        assert_eq!(a.table_csv.as_deref(), Some("m,d\n"));
        assert_eq!(a.exit_code(), 0);
        let dir = tempfile::tempdir().unwrap();
        let written = a.write_to(dir.path()).unwrap();
        let names: Vec<String> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, vec!["report.txt", "table.csv", "result.json"]);
    }
}
