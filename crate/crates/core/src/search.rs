//! Isomorphism-invariant fingerprints and bounded counterexample search.
//!
//! Canonical forms are computed by brute force over all vertex orders of
//! every tree (tree order stays fixed), so they are meant for structures of
//! a handful of vertices.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::document::Document;
use crate::extension::{enumerate_extensions, replay, ExtensionDescriptor, ExtensionKind};
use crate::generator::base_structure;
use crate::multitree::{MultiTree, TupleIter};
use crate::scalar::Codistance;
use crate::validate::{is_member, validate, ValidationConfig};

/// Isomorphism-type key of a structure with fixed tree order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalForm(Vec<u64>);

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "{}", parts.join("."))
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    heap_permute(k, &mut cur, &mut out);
    out
}

fn heap_permute(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k - 1 {
        heap_permute(k - 1, cur, out);
        if k.is_multiple_of(2) {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
    heap_permute(k - 1, cur, out);
}

/// Lexicographically least encoding of `a` over all per-tree relabelings.
pub fn canonical_form<D: Codistance>(a: &MultiTree<D>) -> CanonicalForm {
    let sizes = a.sizes().to_vec();
    // `perm[slot][old] = new`
    let per_tree: Vec<Vec<Vec<usize>>> = sizes.iter().map(|&k| permutations(k)).collect();
    let edges: Vec<Vec<(usize, usize)>> = a.trees().iter().map(|t| t.edges()).collect();
    let mut best: Option<Vec<u64>> = None;
    let mut choice = vec![0usize; sizes.len()];
    let choice_sizes: Vec<usize> = per_tree.iter().map(Vec::len).collect();
    let mut inverse: Vec<Vec<usize>> = sizes.iter().map(|&k| vec![0; k]).collect();
    let mut old = vec![0; sizes.len()];
    for pick in TupleIter::new(&choice_sizes) {
        choice.copy_from_slice(&pick);
        let mut key: Vec<u64> = sizes.iter().map(|&k| k as u64).collect();
        for (slot, es) in edges.iter().enumerate() {
            let perm = &per_tree[slot][choice[slot]];
            let mut mapped: Vec<(usize, usize)> = es
                .iter()
                .map(|&(u, v)| {
                    let (x, y) = (perm[u], perm[v]);
                    (x.min(y), x.max(y))
                })
                .collect();
            mapped.sort_unstable();
            key.extend(mapped.into_iter().flat_map(|(x, y)| [x as u64, y as u64]));
            for (o, &nw) in perm.iter().enumerate() {
                inverse[slot][nw] = o;
            }
        }
        for t in TupleIter::new(&sizes) {
            for (slot, &p) in t.iter().enumerate() {
                old[slot] = inverse[slot][p];
            }
            key.push(a.at(&old).as_u64());
        }
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    CanonicalForm(best.unwrap_or_default())
}

pub fn isomorphic<D: Codistance>(a: &MultiTree<D>, b: &MultiTree<D>) -> bool {
    a.sizes() == b.sizes() && canonical_form(a) == canonical_form(b)
}

/// Contested statements the searcher can probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    /// Sandwiched codistance forces every coordinate onto the path.
    GeodesicOnlyIf,
    /// The double-raise identity at codistance zero.
    RemarkZero,
    /// Kind 1 extensions stay inside the class.
    Type1Closure,
}

impl Lemma {
    pub fn as_str(self) -> &'static str {
        match self {
            Lemma::GeodesicOnlyIf => "geodesic-onlyif",
            Lemma::RemarkZero => "remark-zero",
            Lemma::Type1Closure => "type1-closure",
        }
    }
}

impl FromStr for Lemma {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "geodesic-onlyif" => Ok(Lemma::GeodesicOnlyIf),
            "remark-zero" => Ok(Lemma::RemarkZero),
            "type1-closure" => Ok(Lemma::Type1Closure),
            other => Err(format!("unknown lemma `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub structure: Document,
    pub canonical: String,
    pub certificate: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub lemma: Lemma,
    pub max_size: usize,
    pub zero_guard: bool,
    /// Isomorphism types of members visited.
    pub explored: usize,
    pub counterexamples: Vec<Counterexample>,
}

/// Breadth-first search over members of the class with two trees and at most
/// `max_size` vertices, grown from the base by elementary good extensions and
/// deduplicated up to isomorphism. Only structures accepted under `config`
/// are visited.
pub fn search_counterexample(lemma: Lemma, max_size: usize, config: ValidationConfig) -> SearchReport {
    let base: MultiTree<u32> = base_structure(2).expect("two trees");
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    let mut explored = 0;
    if max_size >= 2 {
        seen.insert(canonical_form(&base));
        queue.push_back(base);
    }
    while let Some(a) = queue.pop_front() {
        explored += 1;
        let children: Vec<(ExtensionDescriptor, MultiTree<u32>)> = if a.vertex_count() < max_size {
            enumerate_extensions(&a)
                .into_iter()
                .filter_map(|d| replay(&a, &d).ok().map(|b| (d, b)))
                .collect()
        } else {
            Vec::new()
        };
        let certificate = match lemma {
            Lemma::GeodesicOnlyIf => geodesic_only_if_witness(&a),
            Lemma::RemarkZero => remark_zero_witness(&a),
            Lemma::Type1Closure => children.iter().find_map(|(d, b)| {
                if d.kind != ExtensionKind::Fold || is_member(b, config) {
                    return None;
                }
                Some(serde_json::json!({
                    "descriptor": d,
                    "extended": Document::from_multitree(b),
                    "report": validate(b, config),
                }))
            }),
        };
        if let Some(certificate) = certificate {
            out.push(Counterexample {
                structure: Document::from_multitree(&a),
                canonical: canonical_form(&a).to_string(),
                certificate,
            });
        }
        for (_, b) in children {
            if !is_member(&b, config) {
                continue;
            }
            if seen.insert(canonical_form(&b)) {
                queue.push_back(b);
            }
        }
    }
    SearchReport {
        lemma,
        max_size,
        zero_guard: config.zero_guard,
        explored,
        counterexamples: out,
    }
}

/// A geodesic pair `x, y` and a tuple `z` with `d(y) <= d(z) <= d(x)` where
/// some coordinate of `z` lies off the path from `y_j` to `x_j`.
pub fn geodesic_only_if_witness<D: Codistance>(a: &MultiTree<D>) -> Option<serde_json::Value> {
    let all: Vec<Vec<usize>> = a.tuples().collect();
    for x in &all {
        for y in &all {
            if !a.is_geodesic(x, y) {
                continue;
            }
            let (lo, hi) = (a.at(y), a.at(x));
            for z in &all {
                let dz = a.at(z);
                if dz < lo || dz > hi {
                    continue;
                }
                let off = (0..a.n()).find(|&j| !a.tree(j).on_path(y[j], x[j], z[j]));
                if let Some(j) = off {
                    return Some(serde_json::json!({
                        "x": a.tuple_names(x),
                        "y": a.tuple_names(y),
                        "a": a.tuple_names(z),
                        "off_path_tree": j + 1,
                    }));
                }
            }
        }
    }
    None
}

/// A zero tuple with raisers in two trees whose joint move does not reach 2.
pub fn remark_zero_witness<D: Codistance>(a: &MultiTree<D>) -> Option<serde_json::Value> {
    let two = D::one() + D::one();
    for t in a.zero_tuples() {
        for i in 0..a.n() {
            for j in (i + 1)..a.n() {
                for &yi in &a.raising_neighbors(&t, i) {
                    for &yj in &a.raising_neighbors(&t, j) {
                        let mut p = t.to_vec();
                        p[i] = yi;
                        p[j] = yj;
                        if a.at(&p) != two {
                            return Some(serde_json::json!({
                                "tuple": a.tuple_names(&t),
                                "trees": [i + 1, j + 1],
                                "neighbors": [a.tree(i).name(yi), a.tree(j).name(yj)],
                                "found": a.at(&p).as_u64(),
                            }));
                        }
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(permutations(3).len(), 6);
        let mut p = permutations(4);
        p.sort();
        p.dedup();
        assert_eq!(p.len(), 24);
    }

    #[test]
    fn canonical_form_ignores_names_and_order() {
        let w = fixtures::fragment_w();
        let renamed = Document::from_multitree(&w)
            .to_json()
            .replace("\"q\"", "\"zz\"")
            .replace("\"r\"", "\"q\"");
        let other: MultiTree = crate::document::parse_multitree(&renamed).unwrap();
        assert!(isomorphic(&w, &other));
        assert!(!isomorphic(&w, &fixtures::fragment_a1q()));
    }

    #[test]
    fn w_breaks_the_only_if_direction() {
        assert!(geodesic_only_if_witness(&fixtures::fragment_w()).is_some());
        assert!(remark_zero_witness(&fixtures::fragment_w()).is_some());
        assert!(remark_zero_witness(&fixtures::fragment_a1()).is_none());
    }
}
