use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::DescriptorError;

/// Named contribution values loaded from a versioned text table: a
/// `# <name> v<version>` header, then `key<TAB>value` lines. Other lines
/// starting with `#` are comments.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionTable {
    pub name: String,
    pub version: u32,
    entries: BTreeMap<String, f64>,
}

impl ContributionTable {
    pub fn new(name: &str, version: u32, entries: BTreeMap<String, f64>) -> ContributionTable {
        ContributionTable {
            name: name.to_string(),
            version,
            entries,
        }
    }

    pub fn from_text(text: &str) -> Result<ContributionTable, DescriptorError> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let (name, version) = header
            .strip_prefix("# ")
            .and_then(|h| h.rsplit_once(" v"))
            .and_then(|(n, v)| Some((n.to_string(), v.trim().parse::<u32>().ok()?)))
            .ok_or_else(|| DescriptorError::Table(format!("bad header `{header}`")))?;
        let mut entries = BTreeMap::new();
        for (no, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(key), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(DescriptorError::Table(format!("line {}: expected key and value", no + 2)));
            };
            let value: f64 = value
                .parse()
                .map_err(|_| DescriptorError::Table(format!("line {}: bad number `{value}`", no + 2)))?;
            if entries.insert(key.to_string(), value).is_some() {
                return Err(DescriptorError::Table(format!("duplicate key `{key}`")));
            }
        }
        Ok(ContributionTable {
            name,
            version,
            entries,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# {} v{}\n", self.name, self.version);
        for (k, v) in &self.entries {
            out.push_str(&format!("{k}\t{v}\n"));
        }
        out
    }

    pub fn load(path: &Path) -> Result<ContributionTable, DescriptorError> {
        ContributionTable::from_text(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), DescriptorError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}
