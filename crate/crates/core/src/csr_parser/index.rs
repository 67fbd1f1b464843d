use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub name: String,
    pub range: Range<usize>,
}

/// Submodel name to contiguous global node range, in NODTRE block order.
///
/// The ranges tile `0..num_nodes` without gaps.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<IndexEntry>", into = "Vec<IndexEntry>")]
pub struct SubmodelIndex {
    entries: Vec<IndexEntry>,
    #[serde(skip)]
    by_name: HashMap<String, usize>,
}

impl From<Vec<IndexEntry>> for SubmodelIndex {
    fn from(entries: Vec<IndexEntry>) -> Self {
        let by_name = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.name.clone(), i))
            .collect();
        SubmodelIndex { entries, by_name }
    }
}

impl From<SubmodelIndex> for Vec<IndexEntry> {
    fn from(idx: SubmodelIndex) -> Self {
        idx.entries
    }
}

impl SubmodelIndex {
    /// Builds the index from per-block node counts; ranges follow from the
    /// running sum of counts.
    pub fn from_counts(counts: impl IntoIterator<Item = (String, usize)>) -> Self {
        let mut start = 0;
        let entries: Vec<IndexEntry> = counts
            .into_iter()
            .map(|(name, n)| {
                let e = IndexEntry {
                    name,
                    range: start..start + n,
                };
                start += n;
                e
            })
            .collect();
        entries.into()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.entries.last().map_or(0, |e| e.range.end)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn range_of(&self, name: &str) -> Result<Range<usize>> {
        self.position(name)
            .map(|i| self.entries[i].range.clone())
            .ok_or_else(|| Error::UnknownSubmodel(name.to_owned()))
    }

    /// Block ordinal owning global node `node`.
    pub fn submodel_of(&self, node: usize) -> Option<usize> {
        if node >= self.num_nodes() {
            return None;
        }
        // first entry whose end is past `node`; empty ranges are skipped
        let k = self.entries.partition_point(|e| e.range.end <= node);
        Some(k)
    }

    /// True when two blocks share a name, which makes lookups ambiguous.
    pub(crate) fn has_duplicate_names(&self) -> bool {
        self.by_name.len() != self.entries.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_tile() {
        let idx = SubmodelIndex::from_counts([("A".to_string(), 3), ("E".to_string(), 0), ("B".to_string(), 2)]);
        assert_eq!(idx.range_of("A").unwrap(), 0..3);
        assert_eq!(idx.range_of("E").unwrap(), 3..3);
        assert_eq!(idx.range_of("B").unwrap(), 3..5);
        assert_eq!(idx.num_nodes(), 5);
        assert_eq!(idx.submodel_of(2), Some(0));
        assert_eq!(idx.submodel_of(3), Some(2));
        assert_eq!(idx.submodel_of(5), None);
        assert!(matches!(idx.range_of("Z"), Err(Error::UnknownSubmodel(_))));
    }

    #[test]
    fn serde_roundtrip_rebuilds_lookup() {
        let idx = SubmodelIndex::from_counts([("A".to_string(), 3), ("B".to_string(), 2)]);
        let json = serde_json::to_string(&idx).unwrap();
        let back: SubmodelIndex = serde_json::from_str(&json).unwrap();
        assert_eq!(back, idx);
        assert_eq!(back.position("B"), Some(1));
    }

    #[test]
    fn duplicates_detected() {
        let idx = SubmodelIndex::from_counts([("A".to_string(), 1), ("A".to_string(), 1)]);
        assert!(idx.has_duplicate_names());
    }
}
