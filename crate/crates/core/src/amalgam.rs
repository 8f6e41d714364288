//! Amalgamation of good extensions over a common base.
//!
//! [`amalgamate_elementary`] handles two one-point extensions `B = A + b`,
//! `C = A + c` by the six-way case analysis on the trees and kinds involved.
//! [`amalgamate`] decomposes `B` over `A` into elementary steps and pushes
//! each step across the growing right-hand structure.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extension::{
    apply_fold, apply_raise, classify_extension, good_filtration, replay, ExtensionDescriptor,
    ExtensionError, ExtensionKind,
};
use crate::multitree::MultiTree;
use crate::scalar::Codistance;
use crate::validate::{validate, ValidationConfig, ValidationReport};

/// Per-tree injective vertex maps, serialized as one JSON object per tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding {
    pub maps: Vec<BTreeMap<String, String>>,
}

impl Embedding {
    pub fn identity<D: Codistance>(a: &MultiTree<D>) -> Self {
        Embedding {
            maps: a
                .trees()
                .iter()
                .map(|t| t.names().iter().map(|s| (s.clone(), s.clone())).collect())
                .collect(),
        }
    }

    pub fn image(&self, slot: usize, name: &str) -> Option<&str> {
        self.maps.get(slot)?.get(name).map(String::as_str)
    }

    /// Checks injectivity, adjacency in both directions and codistance
    /// preservation on every tuple of `src`.
    pub fn check<D: Codistance>(&self, src: &MultiTree<D>, dst: &MultiTree<D>) -> Result<(), String> {
        if self.maps.len() != src.n() || dst.n() != src.n() {
            return Err("tree counts differ".into());
        }
        let mut pos = Vec::with_capacity(src.n());
        for (slot, t) in src.trees().iter().enumerate() {
            let mut img = Vec::with_capacity(t.len());
            for name in t.names() {
                let target = self
                    .image(slot, name)
                    .ok_or_else(|| format!("tree {}: `{name}` is unmapped", slot + 1))?;
                let p = dst
                    .tree(slot)
                    .position(target)
                    .ok_or_else(|| format!("tree {}: image `{target}` missing", slot + 1))?;
                if img.contains(&p) {
                    return Err(format!("tree {}: not injective at `{target}`", slot + 1));
                }
                img.push(p);
            }
            for u in 0..t.len() {
                for v in (u + 1)..t.len() {
                    if t.adjacent(u, v) != dst.tree(slot).adjacent(img[u], img[v]) {
                        return Err(format!(
                            "tree {}: adjacency of `{}` and `{}` not preserved",
                            slot + 1,
                            t.name(u),
                            t.name(v)
                        ));
                    }
                }
            }
            pos.push(img);
        }
        let mut full = vec![0; src.n()];
        for t in src.tuples() {
            for (i, &c) in t.iter().enumerate() {
                full[i] = pos[i][c];
            }
            if src.at(&t) != dst.at(&full) {
                return Err(format!("codistance differs at {:?}", src.tuple_names(&t)));
            }
        }
        Ok(())
    }
}

/// The six configurations of two elementary extensions `b ∈ B_i`, `c ∈ C_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmalgamCase {
    /// (a) same tree, at least one fold: plain union.
    SameTreeFold,
    /// (b) same tree, both raise at the same attach vertex and witness:
    /// `b` and `c` are identified.
    Identified,
    /// (c) same tree, both raise otherwise: plain union.
    SameTreeRaise,
    /// (d) different trees, one of them a fold.
    CrossFold,
    /// (e) different trees, both raise, different witnesses.
    CrossRaise,
    /// (f) different trees, both raise at the same witness.
    SharedWitness,
}

impl AmalgamCase {
    pub fn letter(self) -> char {
        match self {
            AmalgamCase::SameTreeFold => 'a',
            AmalgamCase::Identified => 'b',
            AmalgamCase::SameTreeRaise => 'c',
            AmalgamCase::CrossFold => 'd',
            AmalgamCase::CrossRaise => 'e',
            AmalgamCase::SharedWitness => 'f',
        }
    }

    pub const ALL: [AmalgamCase; 6] = [
        AmalgamCase::SameTreeFold,
        AmalgamCase::Identified,
        AmalgamCase::SameTreeRaise,
        AmalgamCase::CrossFold,
        AmalgamCase::CrossRaise,
        AmalgamCase::SharedWitness,
    ];
}

impl fmt::Display for AmalgamCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.letter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Amalgam<D = u32> {
    pub structure: MultiTree<D>,
    pub from_b: Embedding,
    pub from_c: Embedding,
    /// Cases met along the way, in order.
    pub cases: Vec<AmalgamCase>,
    /// Number of elementary steps realized by an existing vertex.
    pub identified: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmalgamError {
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error("descriptor does not reproduce {which}")]
    DescriptorMismatch { which: char },
    #[error("{0} does not contain the base")]
    NotOverBase(char),
    #[error("amalgam fails validation in case {case:?}: {} violations", report.violations.len())]
    Failure {
        case: Option<AmalgamCase>,
        report: ValidationReport,
    },
    #[error("amalgam is not a good extension of its right-hand side")]
    LostGoodness,
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<AmalgamError>,
    },
}

/// Name-indexed position translation from one structure into another.
fn translation<D: Codistance>(from: &MultiTree<D>, to: &MultiTree<D>) -> Vec<Vec<Option<usize>>> {
    from.trees()
        .iter()
        .zip(to.trees())
        .map(|(f, t)| f.names().iter().map(|s| t.position(s)).collect())
        .collect()
}

/// Amalgamates two elementary good extensions `B = A + b`, `C = A + c`
/// realized by `db` and `dc`.
///
/// The amalgam is built on top of `C` (`from_c` is the inclusion) except in
/// the identification case, where it is `B` itself and `c` maps to `b`.
pub fn amalgamate_elementary<D: Codistance>(
    a: &MultiTree<D>,
    b: &MultiTree<D>,
    c: &MultiTree<D>,
    db: &ExtensionDescriptor,
    dc: &ExtensionDescriptor,
) -> Result<Amalgam<D>, AmalgamError> {
    if !replay(a, db)?.same_structure(b) {
        return Err(AmalgamError::DescriptorMismatch { which: 'B' });
    }
    if !replay(a, dc)?.same_structure(c) {
        return Err(AmalgamError::DescriptorMismatch { which: 'C' });
    }
    let (i, j) = (db.tree - 1, dc.tree - 1);
    let both_raise = db.kind == ExtensionKind::Raise && dc.kind == ExtensionKind::Raise;
    let same_witness = both_raise && db.witness == dc.witness;
    let case = if i == j {
        if !both_raise {
            AmalgamCase::SameTreeFold
        } else if db.attach == dc.attach && same_witness {
            AmalgamCase::Identified
        } else {
            AmalgamCase::SameTreeRaise
        }
    } else if !both_raise {
        AmalgamCase::CrossFold
    } else if same_witness {
        AmalgamCase::SharedWitness
    } else {
        AmalgamCase::CrossRaise
    };

    if case == AmalgamCase::Identified {
        let mut from_c = Embedding::identity(c);
        from_c.maps[j].remove(&dc.new_vertex);
        from_c.maps[j].insert(dc.new_vertex.clone(), db.new_vertex.clone());
        return Ok(Amalgam {
            structure: b.clone(),
            from_b: Embedding::identity(b),
            from_c,
            cases: vec![case],
            identified: 1,
        });
    }

    let b_name = if c.contains_name(&db.new_vertex) {
        c.fresh_name(i)
    } else {
        db.new_vertex.clone()
    };
    let to_b = translation(c, b);
    let b_pos = b.tree(i).position(&db.new_vertex).expect("replayed");
    let c_pos = c.tree(j).position(&dc.new_vertex).expect("replayed");
    let b_attach = c.tree(i).position(&db.attach).expect("attach lies in A");
    let c_attach = c.tree(j).position(&dc.attach).expect("attach lies in A");
    let witness_in_c = |names: &Option<Vec<String>>| names.as_ref().map(|w| c.tuple(w).expect("witness lies in A"));
    let wb = witness_in_c(&db.witness);
    let wc = witness_in_c(&dc.witness);

    // Lookup in B of a C-frame whose slot i carries b' (mapped to b) and
    // whose slot j, if it carries c, is first moved back to c'.
    let b_value = |frame: &[usize]| -> D {
        let mut bt: Vec<usize> = frame
            .iter()
            .enumerate()
            .map(|(s, &p)| {
                if s == j && i != j && p == c_pos {
                    to_b[s][c_attach].expect("attach lies in A")
                } else {
                    to_b[s][p].expect("frame lies in A")
                }
            })
            .collect();
        bt[i] = b_pos;
        b.at(&bt)
    };

    let structure = c.with_leaf(i, b_attach, &b_name, |frame| {
        if i == j || frame[j] != c_pos {
            return Ok(b_value(frame));
        }
        let mixed = match case {
            AmalgamCase::CrossFold if db.kind == ExtensionKind::Fold => Some(c.at(frame).fold_down()),
            AmalgamCase::CrossFold => Some(b_value(frame).fold_down()),
            AmalgamCase::CrossRaise => {
                let w = wb.as_ref().expect("raise has a witness");
                let here = c.at(frame);
                if c.is_geodesic(w, frame) {
                    here.raise()
                } else {
                    Some(here.fold_down())
                }
            }
            AmalgamCase::SharedWitness => {
                let w = wc.as_ref().expect("raise has a witness");
                let mut paired = frame.to_vec();
                paired[j] = c_attach;
                let base = b_value(frame);
                if c.is_geodesic(w, &paired) {
                    base.raise()
                } else {
                    Some(base.fold_down())
                }
            }
            _ => unreachable!("same-tree cases never see a mixed frame"),
        };
        mixed.ok_or(ExtensionError::Overflow)
    })?;

    let report = validate(&structure, ValidationConfig::default());
    if !report.accepted() {
        return Err(AmalgamError::Failure {
            case: Some(case),
            report,
        });
    }
    let mut from_b = Embedding::identity(b);
    from_b.maps[i].insert(db.new_vertex.clone(), b_name);
    Ok(Amalgam {
        structure,
        from_b,
        from_c: Embedding::identity(c),
        cases: vec![case],
        identified: 0,
    })
}

/// Outcome of pushing one elementary extension of a substructure `S ⊆ M`
/// across `M`.
#[derive(Debug, Clone)]
pub struct PointFold<D> {
    pub structure: MultiTree<D>,
    /// Name of the new vertex's image in `structure`.
    pub image: String,
    pub identified: bool,
    pub cases: Vec<AmalgamCase>,
}

/// How [`fold_point`] pushes a step across the right-hand structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldStrategy {
    /// Apply the lifted descriptor to `M` directly when possible, falling
    /// back to the chain otherwise.
    Direct,
    /// Always walk a filtration of `M` over `S` with elementary amalgams.
    Chain,
}

/// Amalgamates `S + v` (given by `desc` over `s`) with `m ⊇ s`.
///
/// `desc` uses the names of `m`; its new vertex is renamed when the name is
/// taken in `m`.
pub fn fold_point<D: Codistance>(
    s: &MultiTree<D>,
    desc: &ExtensionDescriptor,
    m: &MultiTree<D>,
    strategy: FoldStrategy,
) -> Result<PointFold<D>, AmalgamError> {
    let slot = desc.tree - 1;
    let mut desc = desc.clone();
    if m.contains_name(&desc.new_vertex) || s.contains_name(&desc.new_vertex) {
        desc.new_vertex = m.fresh_name(slot);
    }
    if strategy == FoldStrategy::Direct {
        if let Some(structure) = direct_lift(s, &desc, m)? {
            let report = validate(&structure, ValidationConfig::default());
            if !report.accepted() {
                return Err(AmalgamError::Failure { case: None, report });
            }
            return Ok(PointFold {
                structure,
                image: desc.new_vertex,
                identified: false,
                cases: Vec::new(),
            });
        }
    }
    fold_point_chain(s, &desc, m)
}

/// The descriptor applied to `m` itself: folds always lift, raises lift once
/// the witness is pushed up to a locally maximal tuple of `m` along raising
/// moves outside the extension's own tree. `None` when the walk meets a
/// raising neighbor in that tree.
fn direct_lift<D: Codistance>(
    s: &MultiTree<D>,
    desc: &ExtensionDescriptor,
    m: &MultiTree<D>,
) -> Result<Option<MultiTree<D>>, AmalgamError> {
    let slot = desc.tree - 1;
    let attach = m.tree(slot).resolve(&desc.attach).map_err(ExtensionError::from)?;
    match desc.kind {
        ExtensionKind::Fold => Ok(Some(apply_fold(m, slot, attach, &desc.new_vertex))),
        ExtensionKind::Raise => {
            let names = desc.witness.as_ref().ok_or(ExtensionError::MissingWitness)?;
            if !s.is_locally_maximal(&s.tuple(names).map_err(ExtensionError::from)?) {
                return Err(ExtensionError::WitnessNotMaximal { witness: names.clone() }.into());
            }
            let mut w = m.tuple(names).map_err(ExtensionError::from)?.into_inner();
            loop {
                if !m.raising_neighbors(&w, slot).is_empty() {
                    return Ok(None);
                }
                let step = (0..m.n())
                    .filter(|&k| k != slot)
                    .find_map(|k| m.raising_neighbors(&w, k).first().map(|&y| (k, y)));
                match step {
                    Some((k, y)) => w[k] = y,
                    None => break,
                }
            }
            Ok(Some(apply_raise(m, slot, &w, &desc.new_vertex)?))
        }
    }
}

fn fold_point_chain<D: Codistance>(
    s: &MultiTree<D>,
    desc: &ExtensionDescriptor,
    m: &MultiTree<D>,
) -> Result<PointFold<D>, AmalgamError> {
    let chain = good_filtration(s, m)?;
    let mut c_cur = s.clone();
    let mut d_cur = desc.clone();
    let mut b_cur = replay(s, &d_cur)?;
    let mut cases = Vec::new();
    for (t, dc) in chain.iter().enumerate() {
        let c_next = replay(&c_cur, dc)?;
        let step = amalgamate_elementary(&c_cur, &b_cur, &c_next, &d_cur, dc)
            .map_err(|e| AmalgamError::Step { step: t, source: Box::new(e) })?;
        cases.extend(step.cases.iter().copied());
        if step.identified > 0 {
            return Ok(PointFold {
                structure: m.clone(),
                image: dc.new_vertex.clone(),
                identified: true,
                cases,
            });
        }
        let image = step.from_b.image(desc.tree - 1, &d_cur.new_vertex).expect("mapped").to_string();
        d_cur = classify_extension(&c_next, &step.structure)?
            .into_iter()
            .next()
            .ok_or(AmalgamError::LostGoodness)?;
        debug_assert_eq!(d_cur.new_vertex, image);
        b_cur = step.structure;
        c_cur = c_next;
    }
    let structure = replay(m, &d_cur).map_err(|e| match e {
        ExtensionError::WitnessNotMaximal { .. } => AmalgamError::LostGoodness,
        other => other.into(),
    })?;
    let report = validate(&structure, ValidationConfig::default());
    if !report.accepted() {
        return Err(AmalgamError::Failure { case: None, report });
    }
    Ok(PointFold {
        structure,
        image: d_cur.new_vertex,
        identified: false,
        cases,
    })
}

/// Amalgamates `B ⊇ A` and `C ⊇ A` (identity on shared names).
pub fn amalgamate<D: Codistance>(
    a: &MultiTree<D>,
    b: &MultiTree<D>,
    c: &MultiTree<D>,
) -> Result<Amalgam<D>, AmalgamError> {
    amalgamate_with(a, b, c, FoldStrategy::Direct)
}

pub fn amalgamate_with<D: Codistance>(
    a: &MultiTree<D>,
    b: &MultiTree<D>,
    c: &MultiTree<D>,
    strategy: FoldStrategy,
) -> Result<Amalgam<D>, AmalgamError> {
    if !b.contains_substructure(a) {
        return Err(AmalgamError::NotOverBase('B'));
    }
    if !c.contains_substructure(a) {
        return Err(AmalgamError::NotOverBase('C'));
    }
    let steps = good_filtration(a, b)?;
    let mut from_b = Embedding::identity(a);
    let mut m = c.clone();
    let mut cases = Vec::new();
    let mut identified = 0;
    let mut base_names: Vec<Vec<String>> = a.trees().iter().map(|t| t.names().to_vec()).collect();
    for (step, desc) in steps.iter().enumerate() {
        let slot = desc.tree - 1;
        let lifted = desc.map_names(|name| {
            (0..a.n())
                .find_map(|k| from_b.image(k, name))
                .unwrap_or(name)
                .to_string()
        });
        let s = m
            .restrict_by_names(
                &base_names
                    .iter()
                    .enumerate()
                    .map(|(k, names)| names.iter().map(|x| from_b.image(k, x).unwrap().to_string()).collect())
                    .collect::<Vec<Vec<String>>>(),
            )
            .map_err(ExtensionError::from)?;
        let folded = fold_point(&s, &lifted, &m, strategy)
            .map_err(|e| AmalgamError::Step { step, source: Box::new(e) })?;
        cases.extend(folded.cases);
        if folded.identified {
            identified += 1;
        }
        from_b.maps[slot].insert(desc.new_vertex.clone(), folded.image);
        base_names[slot].push(desc.new_vertex.clone());
        m = folded.structure;
    }
    Ok(Amalgam {
        structure: m,
        from_b,
        from_c: Embedding::identity(c),
        cases,
        identified,
    })
}
