//! Elementary good extensions: one new leaf whose codistances are forced by
//! either the fold rule (kind 1) or the raise rule (kind 2).
//!
//! Kind 1 attaches `y ~ x_k` and sets every new entry to `|d - 1|` of the
//! same frame with `x_k`. Kind 2 needs a locally maximal witness `w` with
//! `w_k = x_k`; frames geodesic with `w` are raised by one, all others fold.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::StructureError;
use crate::multitree::MultiTree;
use crate::scalar::Codistance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ExtensionKind {
    /// Kind 1: every new entry is `|d - 1|`.
    Fold,
    /// Kind 2: raise along frames geodesic with a locally maximal witness.
    Raise,
}

impl From<ExtensionKind> for u8 {
    fn from(k: ExtensionKind) -> u8 {
        match k {
            ExtensionKind::Fold => 1,
            ExtensionKind::Raise => 2,
        }
    }
}

impl TryFrom<u8> for ExtensionKind {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(ExtensionKind::Fold),
            2 => Ok(ExtensionKind::Raise),
            other => Err(format!("extension kind must be 1 or 2, got {other}")),
        }
    }
}

/// A replayable record of one elementary good extension. `tree` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionDescriptor {
    pub kind: ExtensionKind,
    pub tree: usize,
    pub attach: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    pub new_vertex: String,
}

impl ExtensionDescriptor {
    pub fn fold(tree: usize, attach: impl Into<String>, new_vertex: impl Into<String>) -> Self {
        ExtensionDescriptor {
            kind: ExtensionKind::Fold,
            tree,
            attach: attach.into(),
            witness: None,
            new_vertex: new_vertex.into(),
        }
    }

    pub fn raise(tree: usize, witness: Vec<String>, new_vertex: impl Into<String>) -> Self {
        ExtensionDescriptor {
            kind: ExtensionKind::Raise,
            tree,
            attach: witness[tree - 1].clone(),
            witness: Some(witness),
            new_vertex: new_vertex.into(),
        }
    }

    /// Same descriptor with another new-vertex name.
    pub fn renamed(&self, new_vertex: impl Into<String>) -> Self {
        ExtensionDescriptor {
            new_vertex: new_vertex.into(),
            ..self.clone()
        }
    }

    /// Rewrites every vertex name through `f`.
    pub fn map_names(&self, mut f: impl FnMut(&str) -> String) -> Self {
        ExtensionDescriptor {
            kind: self.kind,
            tree: self.tree,
            attach: f(&self.attach),
            witness: self.witness.as_ref().map(|w| w.iter().map(|s| f(s)).collect()),
            new_vertex: f(&self.new_vertex),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("witness {witness:?} is not locally maximal")]
    WitnessNotMaximal { witness: Vec<String> },
    #[error("attach vertex `{attach}` differs from witness coordinate `{coordinate}`")]
    AttachMismatch { attach: String, coordinate: String },
    #[error("kind 2 extension needs a witness tuple")]
    MissingWitness,
    #[error("kind 1 extension takes no witness")]
    UnexpectedWitness,
    #[error("vertex name `{0}` is already in use")]
    NameTaken(String),
    #[error("codistance overflow while raising")]
    Overflow,
    #[error("not a one-point enlargement: {0}")]
    NotOnePoint(String),
    #[error("not a substructure: {0}")]
    NotSubstructure(String),
    #[error("filtration stuck after {} steps; frontier {frontier:?}", done.len())]
    FiltrationStuck {
        done: Vec<ExtensionDescriptor>,
        frontier: Vec<String>,
    },
}

fn slot_of(a_n: usize, tree: usize) -> Result<usize, ExtensionError> {
    if tree == 0 || tree > a_n {
        return Err(StructureError::UnknownTree { tree, n: a_n }.into());
    }
    Ok(tree - 1)
}

/// Value of the raise rule on one frame.
fn raise_rule<D: Codistance>(a: &MultiTree<D>, frame: &[usize], witness: &[usize]) -> Option<D> {
    let here = a.at(frame);
    if a.is_geodesic(witness, frame) {
        here.raise()
    } else {
        Some(here.fold_down())
    }
}

pub(crate) fn apply_fold<D: Codistance>(
    a: &MultiTree<D>,
    slot: usize,
    attach: usize,
    name: &str,
) -> MultiTree<D> {
    a.with_leaf(slot, attach, name, |f| Ok::<D, ExtensionError>(a.at(f).fold_down()))
        .expect("fold rule never fails")
}

/// Applies the raise rule with an arbitrary witness, without checking local
/// maximality.
pub(crate) fn apply_raise<D: Codistance>(
    a: &MultiTree<D>,
    slot: usize,
    witness: &[usize],
    name: &str,
) -> Result<MultiTree<D>, ExtensionError> {
    a.with_leaf(slot, witness[slot], name, |f| {
        raise_rule(a, f, witness).ok_or(ExtensionError::Overflow)
    })
}

/// Adds a fresh leaf at `attach` in tree `tree` (1-based) by the fold rule.
pub fn extend_type1<D: Codistance>(
    a: &MultiTree<D>,
    tree: usize,
    attach: &str,
) -> Result<(MultiTree<D>, ExtensionDescriptor), ExtensionError> {
    let slot = slot_of(a.n(), tree)?;
    let name = a.fresh_name(slot);
    let desc = ExtensionDescriptor::fold(tree, attach, name);
    Ok((replay(a, &desc)?, desc))
}

/// Adds a fresh leaf at `witness[tree]` by the raise rule.
pub fn extend_type2<D: Codistance, S: AsRef<str>>(
    a: &MultiTree<D>,
    witness: &[S],
    tree: usize,
) -> Result<(MultiTree<D>, ExtensionDescriptor), ExtensionError> {
    let slot = slot_of(a.n(), tree)?;
    let w = a.tuple(witness)?;
    let name = a.fresh_name(slot);
    let desc = ExtensionDescriptor::raise(tree, a.tuple_names(&w), name);
    Ok((replay(a, &desc)?, desc))
}

/// Replays a descriptor on `a`, checking every descriptor invariant.
pub fn replay<D: Codistance>(
    a: &MultiTree<D>,
    desc: &ExtensionDescriptor,
) -> Result<MultiTree<D>, ExtensionError> {
    let slot = slot_of(a.n(), desc.tree)?;
    let attach = a.tree(slot).resolve(&desc.attach)?;
    if a.contains_name(&desc.new_vertex) {
        return Err(ExtensionError::NameTaken(desc.new_vertex.clone()));
    }
    match desc.kind {
        ExtensionKind::Fold => {
            if desc.witness.is_some() {
                return Err(ExtensionError::UnexpectedWitness);
            }
            Ok(apply_fold(a, slot, attach, &desc.new_vertex))
        }
        ExtensionKind::Raise => {
            let names = desc.witness.as_ref().ok_or(ExtensionError::MissingWitness)?;
            let w = a.tuple(names)?;
            if w[slot] != attach {
                return Err(ExtensionError::AttachMismatch {
                    attach: desc.attach.clone(),
                    coordinate: names[slot].clone(),
                });
            }
            if !a.is_locally_maximal(&w) {
                return Err(ExtensionError::WitnessNotMaximal { witness: names.clone() });
            }
            apply_raise(a, slot, &w, &desc.new_vertex)
        }
    }
}

/// Replays a sequence of descriptors.
pub fn replay_all<D: Codistance>(
    a: &MultiTree<D>,
    descs: &[ExtensionDescriptor],
) -> Result<MultiTree<D>, ExtensionError> {
    let mut cur = a.clone();
    for d in descs {
        cur = replay(&cur, d)?;
    }
    Ok(cur)
}

/// Every kind 1 descriptor (each tree, each attach vertex) followed by every
/// kind 2 descriptor (each locally maximal tuple, each slot). New vertices
/// get the deterministic fresh name of their tree.
pub fn enumerate_extensions<D: Codistance>(a: &MultiTree<D>) -> Vec<ExtensionDescriptor> {
    let mut out = Vec::new();
    for slot in 0..a.n() {
        let name = a.fresh_name(slot);
        for v in 0..a.tree(slot).len() {
            out.push(ExtensionDescriptor::fold(slot + 1, a.tree(slot).name(v), name.clone()));
        }
    }
    let fresh: Vec<String> = (0..a.n()).map(|s| a.fresh_name(s)).collect();
    for t in a.tuples() {
        if a.is_locally_maximal(&t) {
            let names = a.tuple_names(&t);
            for (slot, name) in fresh.iter().enumerate() {
                out.push(ExtensionDescriptor::raise(slot + 1, names.clone(), name.clone()));
            }
        }
    }
    out
}

/// Shape of a one-point enlargement `a ⊂ b`.
struct OnePoint {
    slot: usize,
    new_pos: usize,
    attach: usize,
    /// a-position -> b-position, per tree.
    map: Vec<Vec<usize>>,
}

fn one_point<D: Codistance>(a: &MultiTree<D>, b: &MultiTree<D>) -> Result<OnePoint, ExtensionError> {
    if a.n() != b.n() {
        return Err(ExtensionError::NotOnePoint(format!("{} trees vs {}", a.n(), b.n())));
    }
    let map = b
        .position_map(a)
        .ok_or_else(|| ExtensionError::NotOnePoint("some vertex of the base is missing".into()))?;
    let grown: Vec<usize> = (0..a.n())
        .filter(|&s| b.tree(s).len() != a.tree(s).len())
        .collect();
    if grown.len() != 1 || b.vertex_count() != a.vertex_count() + 1 {
        return Err(ExtensionError::NotOnePoint(format!(
            "sizes {:?} vs {:?}",
            a.sizes(),
            b.sizes()
        )));
    }
    let slot = grown[0];
    for (s, m) in map.iter().enumerate() {
        let (at, bt) = (a.tree(s), b.tree(s));
        for u in 0..m.len() {
            for v in (u + 1)..m.len() {
                if at.adjacent(u, v) != bt.adjacent(m[u], m[v]) {
                    return Err(ExtensionError::NotOnePoint(format!(
                        "adjacency of {} and {} differs",
                        at.name(u),
                        at.name(v)
                    )));
                }
            }
        }
    }
    let new_pos = (0..b.tree(slot).len())
        .find(|p| !map[slot].contains(p))
        .expect("exactly one new vertex");
    let neighbors = b.tree(slot).neighbors(new_pos);
    if neighbors.len() != 1 {
        return Err(ExtensionError::NotOnePoint(format!(
            "new vertex {} has {} neighbors",
            b.tree(slot).name(new_pos),
            neighbors.len()
        )));
    }
    let attach = map[slot]
        .iter()
        .position(|&p| p == neighbors[0])
        .expect("neighbor lies in the base");
    if !b.contains_substructure(a) {
        return Err(ExtensionError::NotOnePoint("old table entries differ".into()));
    }
    Ok(OnePoint {
        slot,
        new_pos,
        attach,
        map,
    })
}

/// All descriptors whose replay on `a` reproduces `b` exactly, kind 1 first,
/// then kind 2 in canonical witness order. Empty iff `b` is not an elementary
/// good extension of `a`.
pub fn classify_extension<D: Codistance>(
    a: &MultiTree<D>,
    b: &MultiTree<D>,
) -> Result<Vec<ExtensionDescriptor>, ExtensionError> {
    let op = one_point(a, b)?;
    let frames: Vec<Vec<usize>> = a.tuples().filter(|t| t[op.slot] == op.attach).collect();
    let target: Vec<D> = frames
        .iter()
        .map(|f| {
            let mut bt: Vec<usize> = f.iter().enumerate().map(|(s, &p)| op.map[s][p]).collect();
            bt[op.slot] = op.new_pos;
            b.at(&bt)
        })
        .collect();
    let tree = op.slot + 1;
    let attach_name = a.tree(op.slot).name(op.attach).to_string();
    let new_name = b.tree(op.slot).name(op.new_pos).to_string();
    let mut out = Vec::new();
    if frames.iter().zip(&target).all(|(f, &d)| a.at(f).fold_down() == d) {
        out.push(ExtensionDescriptor::fold(tree, attach_name, new_name.clone()));
    }
    for w in &frames {
        if !a.is_locally_maximal(w) {
            continue;
        }
        if frames
            .iter()
            .zip(&target)
            .all(|(f, &d)| raise_rule(a, f, w) == Some(d))
        {
            out.push(ExtensionDescriptor::raise(tree, a.tuple_names(w), new_name.clone()));
        }
    }
    Ok(out)
}

/// A deterministic sequence of elementary good extensions rebuilding `b`
/// from its substructure `a`.
///
/// Candidates are tried lowest first (by tree, then by position in `b`),
/// each new vertex adjacent to the current part, with its canonically least
/// descriptor. A candidate after which no completion exists is abandoned and
/// the next one tried, so the result is the first complete sequence in that
/// order. Dead intermediate parts are remembered.
pub fn good_filtration<D: Codistance>(
    a: &MultiTree<D>,
    b: &MultiTree<D>,
) -> Result<Vec<ExtensionDescriptor>, ExtensionError> {
    if !b.contains_substructure(a) {
        return Err(ExtensionError::NotSubstructure(
            "names, edges or codistances of the base differ".into(),
        ));
    }
    let mut current = b.position_map(a).expect("checked above");
    for s in &mut current {
        s.sort_unstable();
    }
    let mut search = FiltrationSearch {
        b,
        total: b.vertex_count(),
        dead: HashSet::new(),
        done: Vec::new(),
        deepest: None,
    };
    if search.extend(&mut current)? {
        return Ok(search.done);
    }
    let (done, frontier) = search.deepest.unwrap_or_default();
    Err(ExtensionError::FiltrationStuck { done, frontier })
}

struct FiltrationSearch<'a, D> {
    b: &'a MultiTree<D>,
    total: usize,
    dead: HashSet<Vec<Vec<usize>>>,
    done: Vec<ExtensionDescriptor>,
    /// Longest partial sequence seen, with the frontier that stopped it.
    deepest: Option<(Vec<ExtensionDescriptor>, Vec<String>)>,
}

impl<D: Codistance> FiltrationSearch<'_, D> {
    fn extend(&mut self, current: &mut Vec<Vec<usize>>) -> Result<bool, ExtensionError> {
        if current.iter().map(Vec::len).sum::<usize>() == self.total {
            return Ok(true);
        }
        if self.dead.contains(current) {
            return Ok(false);
        }
        let b = self.b;
        let here = b.restrict(current)?;
        let mut frontier = Vec::new();
        for slot in 0..b.n() {
            for v in 0..b.tree(slot).len() {
                if current[slot].binary_search(&v).is_ok()
                    || !b.tree(slot).neighbors(v).iter().any(|w| current[slot].binary_search(w).is_ok())
                {
                    continue;
                }
                frontier.push(b.tree(slot).name(v).to_string());
                let mut next = current.clone();
                next[slot].push(v);
                next[slot].sort_unstable();
                let step = b.restrict(&next)?;
                let Some(d) = classify_extension(&here, &step)?.into_iter().next() else {
                    continue;
                };
                self.done.push(d);
                if self.extend(&mut next)? {
                    return Ok(true);
                }
                self.done.pop();
            }
        }
        if self.deepest.as_ref().is_none_or(|(d, _)| d.len() < self.done.len()) {
            self.deepest = Some((self.done.clone(), frontier));
        }
        self.dead.insert(current.clone());
        Ok(false)
    }
}
