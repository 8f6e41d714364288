//! Half apartments, apartments, marked apartments and the raising-neighbor
//! probe.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::StructureError;
use crate::multitree::MultiTree;
use crate::scalar::Codistance;
use crate::search::canonical_form;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("base {0:?} does not have codistance zero")]
    NotOpposite(Vec<String>),
    #[error("`{y}` is not adjacent to `{x}` in tree {tree}")]
    NotAdjacent { tree: usize, x: String, y: String },
    #[error("the two directions coincide at `{0}`")]
    SameDirection(String),
    #[error("tuple {0:?} has codistance zero")]
    ZeroCodistance(Vec<String>),
    #[error("tuple {tuple:?} has raising neighbors {neighbors:?} in tree {tree}")]
    MultipleRaisers {
        tuple: Vec<String>,
        tree: usize,
        neighbors: Vec<String>,
    },
}

/// Vertices on the `y` side of a zero tuple. Tree indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfApartment {
    pub base: Vec<String>,
    pub tree: usize,
    pub direction: String,
    /// Member names per tree, in canonical vertex order.
    pub members: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Apartment {
    pub base: Vec<String>,
    pub tree: usize,
    pub y: String,
    pub z: String,
    pub members: Vec<Vec<String>>,
}

/// A zero tuple together with a neighbor of its first coordinate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MarkedApartment {
    pub base: Vec<String>,
    pub mark: String,
}

fn opposite_base<D: Codistance, S: AsRef<str>>(
    a: &MultiTree<D>,
    base: &[S],
) -> Result<Vec<usize>, GeometryError> {
    let t = a.tuple(base)?.into_inner();
    if !a.at(&t).is_zero() {
        return Err(GeometryError::NotOpposite(a.tuple_names(&t)));
    }
    Ok(t)
}

fn slot_of<D: Codistance>(a: &MultiTree<D>, tree: usize) -> Result<usize, GeometryError> {
    if tree == 0 || tree > a.n() {
        return Err(StructureError::UnknownTree { tree, n: a.n() }.into());
    }
    Ok(tree - 1)
}

fn membership<D: Codistance>(a: &MultiTree<D>, base: &[usize], slot: usize, y: usize) -> Vec<Vec<bool>> {
    let mut moved = base.to_vec();
    moved[slot] = y;
    let mut probe = base.to_vec();
    (0..a.n())
        .map(|j| {
            let t = a.tree(j);
            (0..t.len())
                .map(|z| {
                    if j == slot {
                        return t.distance(z, y) < t.distance(z, base[slot]);
                    }
                    moved[j] = z;
                    probe[j] = z;
                    let inside = a.at(&moved) > a.at(&probe);
                    moved[j] = base[j];
                    probe[j] = base[j];
                    inside
                })
                .collect()
        })
        .collect()
}

fn names_of<D: Codistance>(a: &MultiTree<D>, flags: &[Vec<bool>]) -> Vec<Vec<String>> {
    flags
        .iter()
        .enumerate()
        .map(|(j, f)| {
            f.iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(z, _)| a.tree(j).name(z).to_string())
                .collect()
        })
        .collect()
}

fn direction<D: Codistance>(a: &MultiTree<D>, base: &[usize], slot: usize, y: &str) -> Result<usize, GeometryError> {
    let t = a.tree(slot);
    let p = t.resolve(y)?;
    if !t.adjacent(p, base[slot]) {
        return Err(GeometryError::NotAdjacent {
            tree: slot + 1,
            x: t.name(base[slot]).to_string(),
            y: y.to_string(),
        });
    }
    Ok(p)
}

/// In tree `j != i`, the members are the `z` with
/// `d(base[i -> y, j -> z]) > d(base[j -> z])`; in tree `i` they are the
/// vertices strictly closer to `y` than to `base[i]`.
pub fn half_apartment<D: Codistance, S: AsRef<str>>(
    a: &MultiTree<D>,
    base: &[S],
    tree: usize,
    y: &str,
) -> Result<HalfApartment, GeometryError> {
    let slot = slot_of(a, tree)?;
    let b = opposite_base(a, base)?;
    let yp = direction(a, &b, slot, y)?;
    Ok(HalfApartment {
        base: a.tuple_names(&b),
        tree,
        direction: y.to_string(),
        members: names_of(a, &membership(a, &b, slot, yp)),
    })
}

/// Member-wise union of the half apartments towards `y` and `z`.
pub fn apartment<D: Codistance, S: AsRef<str>>(
    a: &MultiTree<D>,
    base: &[S],
    tree: usize,
    y: &str,
    z: &str,
) -> Result<Apartment, GeometryError> {
    let slot = slot_of(a, tree)?;
    let b = opposite_base(a, base)?;
    let yp = direction(a, &b, slot, y)?;
    let zp = direction(a, &b, slot, z)?;
    if yp == zp {
        return Err(GeometryError::SameDirection(y.to_string()));
    }
    let (fy, fz) = (membership(a, &b, slot, yp), membership(a, &b, slot, zp));
    let union: Vec<Vec<bool>> = fy
        .iter()
        .zip(&fz)
        .map(|(u, v)| u.iter().zip(v).map(|(&p, &q)| p || q).collect())
        .collect();
    Ok(Apartment {
        base: a.tuple_names(&b),
        tree,
        y: y.to_string(),
        z: z.to_string(),
        members: names_of(a, &union),
    })
}

/// Every pair (zero tuple, neighbor of its first coordinate) in canonical
/// order.
pub fn marked_apartments<D: Codistance>(a: &MultiTree<D>) -> Vec<MarkedApartment> {
    a.zero_tuples()
        .into_iter()
        .flat_map(|t| {
            let base = a.tuple_names(&t);
            a.tree(0)
                .neighbors(t[0])
                .iter()
                .map(|&y| MarkedApartment {
                    base: base.clone(),
                    mark: a.tree(0).name(y).to_string(),
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// The neighbor of `t[tree]` raising the codistance of `t`, if any.
pub fn unique_raising_neighbor<D: Codistance, S: AsRef<str>>(
    a: &MultiTree<D>,
    t: &[S],
    tree: usize,
) -> Result<Option<String>, GeometryError> {
    let slot = slot_of(a, tree)?;
    let x = a.tuple(t)?;
    if a.at(&x).is_zero() {
        return Err(GeometryError::ZeroCodistance(a.tuple_names(&x)));
    }
    let raisers = a.raising_neighbors(&x, slot);
    match raisers.as_slice() {
        [] => Ok(None),
        [y] => Ok(Some(a.tree(slot).name(*y).to_string())),
        many => Err(GeometryError::MultipleRaisers {
            tuple: a.tuple_names(&x),
            tree,
            neighbors: many.iter().map(|&y| a.tree(slot).name(y).to_string()).collect(),
        }),
    }
}

/// The substructure spanned by a marked apartment: the base tuple plus the
/// mark in the first tree.
pub fn germ<D: Codistance>(a: &MultiTree<D>, m: &MarkedApartment) -> Result<MultiTree<D>, StructureError> {
    let mut keep: Vec<Vec<&str>> = m.base.iter().map(|v| vec![v.as_str()]).collect();
    keep[0].push(&m.mark);
    a.restrict_by_names(&keep)
}

/// Number of marked apartments per germ isomorphism type, keyed by canonical
/// form.
pub fn germ_census<D: Codistance>(a: &MultiTree<D>) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for m in marked_apartments(a) {
        let g = germ(a, &m).expect("marked apartments lie in the structure");
        *out.entry(canonical_form(&g).to_string()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn half_apartments_of_w() {
        let w = fixtures::fragment_w();
        let h = half_apartment(&w, &["a", "p"], 1, "b").unwrap();
        assert_eq!(h.members, vec![s(&["b"]), s(&["p", "r"])]);
        let h = half_apartment(&w, &["a", "p"], 2, "q").unwrap();
        assert_eq!(h.members, vec![s(&["a"]), s(&["q"])]);
        let h = half_apartment(&w, &["a", "p"], 2, "r").unwrap();
        assert_eq!(h.members, vec![s(&["a", "b"]), s(&["r"])]);
    }

    #[test]
    fn apartment_errors() {
        let w = fixtures::fragment_w();
        let ap = apartment(&w, &["a", "p"], 2, "q", "r").unwrap();
        assert_eq!(ap.members, vec![s(&["a", "b"]), s(&["q", "r"])]);
        assert!(matches!(
            apartment(&w, &["a", "p"], 2, "q", "q"),
            Err(GeometryError::SameDirection(_))
        ));
        assert!(matches!(
            half_apartment(&w, &["b", "p"], 2, "q"),
            Err(GeometryError::NotOpposite(_))
        ));
        let base = fixtures::base_ap();
        assert!(apartment(&base, &["a", "p"], 1, "a", "p").is_err());
    }

    #[test]
    fn marked_apartments_of_w() {
        let w = fixtures::fragment_w();
        let got = marked_apartments(&w);
        assert_eq!(
            got,
            vec![
                MarkedApartment { base: s(&["a", "p"]), mark: "b".into() },
                MarkedApartment { base: s(&["b", "q"]), mark: "a".into() },
            ]
        );
        assert!(marked_apartments(&fixtures::base_ap()).is_empty());
        assert_eq!(germ_census(&w).len(), 1);
    }

    #[test]
    fn raising_neighbor_probe() {
        let w = fixtures::fragment_w();
        assert_eq!(unique_raising_neighbor(&w, &["b", "p"], 2).unwrap(), Some("r".into()));
        assert_eq!(unique_raising_neighbor(&w, &["a", "q"], 1).unwrap(), None);
        let mut bad = w.clone();
        let t = bad.tuple(&["a", "q"]).unwrap();
        bad.set_codistance(&t, 2).unwrap();
        assert!(matches!(
            unique_raising_neighbor(&bad, &["a", "p"], 2),
            Err(GeometryError::ZeroCodistance(_))
        ));
        let t = bad.tuple(&["b", "p"]).unwrap();
        bad.set_codistance(&t, 1).unwrap();
        let t = bad.tuple(&["b", "q"]).unwrap();
        bad.set_codistance(&t, 2).unwrap();
        assert!(matches!(
            unique_raising_neighbor(&bad, &["b", "p"], 2),
            Err(GeometryError::MultipleRaisers { .. })
        ));
    }
}
