//! Dataset manifests: which images to process, how to crop them and what is
//! known about them.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use octa_core::volume::DEFAULT_SLICE_DISTANCE_UM;
use octa_core::{CropRect, GeometryConfig, Label};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackRef {
    pub group: String,
    pub section: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image_id: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crop: Option<CropRect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stack: Option<StackRef>,
}

fn default_slice_distance() -> f64 {
    DEFAULT_SLICE_DISTANCE_UM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default = "default_slice_distance")]
    pub slice_distance_um: f64,
    #[serde(default)]
    pub entries: Vec<ManifestEntry>,
}

impl Default for DatasetManifest {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            slice_distance_um: DEFAULT_SLICE_DISTANCE_UM,
            entries: Vec::new(),
        }
    }
}

impl DatasetManifest {
    /// Reads a JSON manifest. Relative image and annotation paths are taken
    /// relative to the manifest's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let mut manifest: DatasetManifest =
            serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for e in &mut manifest.entries {
            if e.path.is_relative() {
                e.path = base.join(&e.path);
            }
            if let Some(a) = &mut e.annotation {
                if a.is_relative() {
                    *a = base.join(&*a);
                }
            }
        }
        manifest.validate()?;
        for e in manifest.missing_files() {
            log::warn!("{}: image {} does not exist", e.image_id, e.path.display());
        }
        Ok(manifest)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing manifest {}", path.display()))
    }

    /// Structural checks. Missing image files are not an error here; the
    /// commands report them per entry.
    pub fn validate(&self) -> Result<()> {
        self.geometry.pixel_geometry()?;
        if !(self.slice_distance_um.is_finite() && self.slice_distance_um > 0.0) {
            bail!("slice_distance_um must be positive, got {}", self.slice_distance_um);
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if e.image_id.is_empty() {
                bail!("entry with path {} has an empty image_id", e.path.display());
            }
            if e.image_id.contains(['/', '\\']) || e.image_id.starts_with('.') {
                bail!("image_id {:?} is used as a file name and may not contain path separators or start with '.'", e.image_id);
            }
            if !seen.insert(e.image_id.as_str()) {
                bail!("duplicate image_id {:?}", e.image_id);
            }
        }
        for (group, members) in self.stack_groups() {
            for (expected, e) in members.iter().enumerate() {
                let got = e.stack.as_ref().expect("grouped entries have a stack").section;
                if got != expected {
                    bail!("stack group {group:?}: section indices must be 0..{}, found {got} at position {expected}", members.len());
                }
            }
        }
        Ok(())
    }

    pub fn missing_files(&self) -> Vec<&ManifestEntry> {
        self.entries.iter().filter(|e| !e.path.is_file()).collect()
    }

    /// Entries of each stack group, sorted by section index. Groups are
    /// ordered by name.
    pub fn stack_groups(&self) -> BTreeMap<&str, Vec<&ManifestEntry>> {
        let mut groups: BTreeMap<&str, Vec<&ManifestEntry>> = BTreeMap::new();
        for e in &self.entries {
            if let Some(s) = &e.stack {
                groups.entry(s.group.as_str()).or_default().push(e);
            }
        }
        for members in groups.values_mut() {
            members.sort_by_key(|e| e.stack.as_ref().map(|s| s.section));
        }
        groups
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, stack: Option<(&str, usize)>) -> ManifestEntry {
        ManifestEntry {
            image_id: id.into(),
            path: format!("{id}.pgm").into(),
            crop: None,
            label: None,
            annotation: None,
            stack: stack.map(|(g, s)| StackRef {
                group: g.into(),
                section: s,
            }),
        }
    }

    #[test]
    fn rejects_duplicates_and_gaps() {
        let mut m = DatasetManifest {
            entries: vec![entry("a", None), entry("a", None)],
            ..Default::default()
        };
        assert!(m.validate().is_err());
        m.entries = vec![entry("a", Some(("v", 1))), entry("b", Some(("v", 0)))];
        assert!(m.validate().is_ok());
        m.entries.push(entry("c", Some(("v", 3))));
        assert!(m.validate().is_err());
    }

    #[test]
    fn relative_paths_follow_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let m = DatasetManifest {
            entries: vec![entry("a", None)],
            ..Default::default()
        };
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        let back = DatasetManifest::load(&path).unwrap();
        assert_eq!(back.entries[0].path, dir.path().join("a.pgm"));
        assert_eq!(back.missing_files().len(), 1);
    }

    #[test]
    fn minimal_json() {
        let m: DatasetManifest = serde_json::from_str(r#"{"entries": [{"image_id": "x", "path": "x.png", "label": "Sick"}]}"#).unwrap();
        assert_eq!(m.geometry.scan_size_um, 200.0);
        assert_eq!(m.slice_distance_um, 25.0);
        assert_eq!(m.entries[0].label, Some(Label::Sick));
    }
}
