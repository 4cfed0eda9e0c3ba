//! JSON manifest tying each lane mask to its group of candidate surrounding
//! images. Paths are relative to the manifest's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub lane_file: String,
    pub image_files: Vec<String>,
    pub group_id: String,
}

impl ManifestEntry {
    /// Entry whose group is its own id.
    pub fn new(id: impl Into<String>, lane_file: impl Into<String>) -> Self {
        let id = id.into();
        Self {
            group_id: id.clone(),
            id,
            lane_file: lane_file.into(),
            image_files: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub config: PipelineConfig,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Structural checks: unique ids, each lane file referenced once.
    /// With `base`, also checks that every referenced file exists.
    pub fn validate(&self, base: Option<&Path>) -> Result<()> {
        let mut problems = Vec::new();
        let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
        let mut lane_files: BTreeMap<&str, usize> = BTreeMap::new();
        for e in &self.entries {
            if e.id.is_empty() {
                problems.push("entry with empty id".to_string());
            }
            *ids.entry(&e.id).or_default() += 1;
            *lane_files.entry(&e.lane_file).or_default() += 1;
        }
        for (id, n) in &ids {
            if *n > 1 {
                problems.push(format!("duplicate id \"{id}\" ({n} entries)"));
            }
        }
        for (f, n) in &lane_files {
            if *n > 1 {
                problems.push(format!("lane file \"{f}\" referenced {n} times"));
            }
        }
        if let Some(base) = base {
            for e in &self.entries {
                for f in std::iter::once(&e.lane_file).chain(&e.image_files) {
                    if !base.join(f).is_file() {
                        problems.push(format!("entry \"{}\": missing file \"{f}\"", e.id));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Entries grouped by `group_id`, groups in order of first appearance.
    pub fn groups(&self) -> Vec<(String, Vec<&ManifestEntry>)> {
        let mut order: Vec<(String, Vec<&ManifestEntry>)> = Vec::new();
        for e in &self.entries {
            match order.iter_mut().find(|(g, _)| *g == e.group_id) {
                Some((_, v)) => v.push(e),
                None => order.push((e.group_id.clone(), vec![e])),
            }
        }
        order
    }

    /// Serialized form: sorted keys, two-space indent, trailing LF.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("manifest serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        m.validate(None)?;
        Ok(m)
    }
}

/// Directory that relative manifest paths resolve against.
pub fn manifest_dir(path: &Path) -> PathBuf {
    path.parent()
        .map(Path::to_path_buf)
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Manifest::from_json(&text, &path.display().to_string())
}

pub fn write_manifest(m: &Manifest, path: &Path) -> Result<()> {
    std::fs::write(path, m.to_json()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Manifest {
        let mut a = ManifestEntry::new("s1", "lanes/s1.txt");
        a.image_files = vec!["img/s1_0.pgm".into(), "img/s1_1.pgm".into()];
        Manifest {
            config: PipelineConfig::default(),
            entries: vec![a, ManifestEntry::new("s2", "lanes/s2.txt")],
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = sample();
        let text = m.to_json();
        assert!(text.ends_with("}\n"));
        let back = Manifest::from_json(&text, "mem").unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn keys_are_sorted() {
        let text = sample().to_json();
        let (c, e) = (text.find("\"config\"").unwrap(), text.find("\"entries\"").unwrap());
        assert!(c < e);
        let (g, i) = (text.find("\"group_id\"").unwrap(), text.find("\"id\"").unwrap());
        assert!(g < i);
    }

    #[test]
    fn duplicate_ids_are_named() {
        let mut m = sample();
        m.entries[1].id = "s1".into();
        let err = m.validate(None).unwrap_err();
        assert!(err.to_string().contains("\"s1\""), "{err}");
    }

    #[test]
    fn shared_lane_file_is_rejected() {
        let mut m = sample();
        m.entries[1].lane_file = "lanes/s1.txt".into();
        assert!(m.validate(None).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v = serde_json::to_value(sample()).unwrap();
        v["entries"][0]["color"] = serde_json::json!("red");
        assert!(Manifest::from_json(&v.to_string(), "mem").is_err());
    }

    #[test]
    fn missing_files_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        let err = sample().validate(Some(dir.path())).unwrap_err();
        match err {
            Error::Validation(list) => assert_eq!(list.len(), 4),
            other => panic!("unexpected {other}"),
        }
    }
}
