//! Canonical JSON document shared by every command.
//!
//! ```json
//! { "n": 2,
//!   "trees": [ { "vertices": ["a","b"], "edges": [["a","b"]] }, ... ],
//!   "codistance": [ { "tuple": ["a","p"], "d": 0 }, ... ] }
//! ```
//!
//! Writers emit vertices in canonical (creation) order, edges sorted by
//! vertex position and entries in lexicographic tuple order. Readers accept
//! edges and entries in any order but reject duplicates, gaps and non-trees.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::StructureError;
use crate::multitree::{CodistanceTable, MultiTree};
use crate::scalar::Codistance;
use crate::tree::FiniteTree;
use crate::validate::{validate, ValidationConfig, ValidationReport};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub n: usize,
    pub trees: Vec<TreeDocument>,
    pub codistance: Vec<CodistanceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodistanceEntry {
    pub tuple: Vec<String>,
    pub d: u64,
}

impl Document {
    pub fn from_multitree<D: Codistance>(a: &MultiTree<D>) -> Self {
        let trees = a
            .trees()
            .iter()
            .map(|t| TreeDocument {
                vertices: t.names().to_vec(),
                edges: t
                    .edges()
                    .into_iter()
                    .map(|(u, v)| [t.name(u).to_string(), t.name(v).to_string()])
                    .collect(),
            })
            .collect();
        let codistance = a
            .tuples()
            .map(|t| CodistanceEntry {
                tuple: a.tuple_names(&t),
                d: a.at(&t).as_u64(),
            })
            .collect();
        Document {
            n: a.n(),
            trees,
            codistance,
        }
    }

    pub fn to_multitree<D: Codistance>(&self) -> Result<MultiTree<D>, StructureError> {
        if self.trees.is_empty() {
            return Err(StructureError::NoTrees);
        }
        if self.n != self.trees.len() {
            return Err(StructureError::Table(format!(
                "n = {} but {} trees given",
                self.n,
                self.trees.len()
            )));
        }
        let trees = self
            .trees
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let edges: Vec<(&str, &str)> =
                    t.edges.iter().map(|[u, v]| (u.as_str(), v.as_str())).collect();
                let vertices: Vec<&str> = t.vertices.iter().map(String::as_str).collect();
                FiniteTree::new(i + 1, &vertices, &edges)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let sizes: Vec<usize> = trees.iter().map(FiniteTree::len).collect();
        let probe = CodistanceTable::new(sizes.clone(), vec![D::zero(); sizes.iter().product()])?;
        let mut values: Vec<Option<D>> = vec![None; probe.values().len()];
        let lookup: Vec<HashMap<&str, usize>> = trees
            .iter()
            .map(|t| t.names().iter().enumerate().map(|(p, s)| (s.as_str(), p)).collect())
            .collect();
        let mut coords = vec![0; self.n];
        for entry in &self.codistance {
            if entry.tuple.len() != self.n {
                return Err(StructureError::TupleArity {
                    expected: self.n,
                    got: entry.tuple.len(),
                });
            }
            for (i, name) in entry.tuple.iter().enumerate() {
                coords[i] = *lookup[i].get(name.as_str()).ok_or_else(|| StructureError::UnknownVertex {
                    tree: i + 1,
                    vertex: name.clone(),
                })?;
            }
            let d = D::from_u64(entry.d).ok_or(StructureError::Overflow { value: entry.d })?;
            let slot = &mut values[probe.offset(&coords)];
            if slot.is_some() {
                return Err(StructureError::Table(format!("duplicate entry for {:?}", entry.tuple)));
            }
            *slot = Some(d);
        }
        let mut dense = Vec::with_capacity(values.len());
        for (t, v) in probe.tuples().zip(values) {
            match v {
                Some(d) => dense.push(d),
                None => {
                    let names: Vec<&str> = t.iter().zip(&trees).map(|(&p, tr)| tr.name(p)).collect();
                    return Err(StructureError::Table(format!("missing entry for {names:?}")));
                }
            }
        }
        MultiTree::from_parts(trees, CodistanceTable::new(sizes, dense)?)
    }

    /// Pretty-printed canonical text with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Canonical JSON text for a multiple tree.
pub fn to_canonical_json<D: Codistance>(a: &MultiTree<D>) -> String {
    Document::from_multitree(a).to_json()
}

pub fn parse_multitree<D: Codistance>(text: &str) -> Result<MultiTree<D>, DocumentError> {
    Ok(Document::from_json(text)?.to_multitree()?)
}

/// Validates a raw document, turning shape failures into a structural
/// rejection rather than an error.
pub fn validate_document(doc: &Document, config: ValidationConfig) -> ValidationReport {
    match doc.to_multitree::<u64>() {
        Ok(a) => validate(&a, config),
        Err(e) => ValidationReport::structural(e.to_string(), config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::validate::Axiom;

    #[test]
    fn canonical_text_for_fragment_w() {
        let text = to_canonical_json(&fixtures::fragment_w());
        let doc = Document::from_json(&text).unwrap();
        assert_eq!(doc.n, 2);
        assert_eq!(doc.trees[1].vertices, vec!["p", "q", "r"]);
        assert_eq!(doc.trees[1].edges, vec![["p".to_string(), "q".to_string()], ["p".into(), "r".into()]]);
        let first: Vec<(Vec<String>, u64)> =
            doc.codistance.iter().map(|e| (e.tuple.clone(), e.d)).take(3).collect();
        assert_eq!(first[0], (vec!["a".to_string(), "p".to_string()], 0));
        assert_eq!(first[1], (vec!["a".to_string(), "q".to_string()], 1));
        assert_eq!(first[2], (vec!["a".to_string(), "r".to_string()], 1));
        let again = to_canonical_json(&doc.to_multitree::<u32>().unwrap());
        assert_eq!(text, again);
    }

    fn w_doc() -> Document {
        Document::from_multitree(&fixtures::fragment_w())
    }

    #[test]
    fn rejects_duplicates_and_gaps() {
        let mut dup = w_doc();
        dup.codistance.push(dup.codistance[0].clone());
        assert!(dup.to_multitree::<u32>().is_err());

        let mut gap = w_doc();
        gap.codistance.pop();
        let err = gap.to_multitree::<u32>().unwrap_err();
        assert!(err.to_string().contains("missing entry"), "{err}");

        let mut bad_edge = w_doc();
        bad_edge.trees[1].edges.push(["q".into(), "r".into()]);
        assert!(matches!(
            bad_edge.to_multitree::<u32>(),
            Err(StructureError::NotATree { tree: 2, .. })
        ));

        let mut shared = w_doc();
        shared.trees[1].vertices[2] = "a".into();
        for e in &mut shared.trees[1].edges {
            for v in e.iter_mut() {
                if v == "r" {
                    *v = "a".into();
                }
            }
        }
        for e in &mut shared.codistance {
            if e.tuple[1] == "r" {
                e.tuple[1] = "a".into();
            }
        }
        assert!(matches!(
            shared.to_multitree::<u32>(),
            Err(StructureError::DuplicateVertex { .. })
        ));
    }

    #[test]
    fn entries_in_any_order_are_accepted() {
        let mut doc = w_doc();
        doc.codistance.reverse();
        doc.trees[1].edges.reverse();
        let a: MultiTree<u32> = doc.to_multitree().unwrap();
        assert_eq!(to_canonical_json(&a), w_doc().to_json());
    }

    #[test]
    fn structural_rejection_report() {
        let mut doc = w_doc();
        doc.trees[0].edges.clear();
        let report = validate_document(&doc, ValidationConfig::default());
        assert!(!report.accepted());
        assert_eq!(report.count(Axiom::Structure), 1);
    }

    #[test]
    fn overflow_is_reported() {
        let mut doc = w_doc();
        doc.codistance[0].d = 300;
        assert!(matches!(
            doc.to_multitree::<u8>(),
            Err(StructureError::Overflow { value: 300 })
        ));
        assert!(doc.to_multitree::<u16>().is_ok());
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(Document::from_json("{"), Err(DocumentError::Syntax(_))));
        assert!(Document::from_json(r#"{"n":1,"trees":[],"codistance":[],"x":1}"#).is_err());
    }
}
