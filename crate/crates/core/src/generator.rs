//! Bounded approximation of the limit structure by an obligation queue.
//!
//! An obligation is a pair (small substructure `S` of the current stage,
//! one-point extension of `S`). Obligations are processed oldest first; one
//! already realized by an existing vertex is discharged, otherwise it is
//! realized by amalgamating `S + v` with the current stage over `S`.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amalgam::amalgamate;
use crate::error::StructureError;
use crate::extension::{replay, ExtensionDescriptor};
use crate::geometry::germ_census;
use crate::multitree::{MultiTree, TupleIter};
use crate::scalar::Codistance;
use crate::tree::FiniteTree;
use crate::validate::{validate, ValidationConfig, ValidationReport};

/// `n` one-vertex trees `t{k}_v0` with the single tuple at codistance zero.
pub fn base_structure<D: Codistance>(n: usize) -> Result<MultiTree<D>, StructureError> {
    if n == 0 {
        return Err(StructureError::NoTrees);
    }
    let trees = (1..=n).map(|k| FiniteTree::singleton(k, format!("t{k}_v0"))).collect();
    MultiTree::from_fn(trees, |_| D::zero())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    pub steps: usize,
    pub seed: u64,
    #[serde(default)]
    pub max_tree_size: Option<usize>,
    pub audit_bound: usize,
    pub zero_guard: bool,
}

impl GenConfig {
    pub const DEFAULT_AUDIT_BOUND: usize = 4;

    pub fn new(n: usize, steps: usize, seed: u64) -> Self {
        GenConfig {
            n,
            steps,
            seed,
            max_tree_size: None,
            audit_bound: Self::DEFAULT_AUDIT_BOUND,
            zero_guard: true,
        }
    }

    fn validation(&self) -> ValidationConfig {
        ValidationConfig {
            zero_guard: self.zero_guard,
            require_zero_tuple: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOutcome {
    /// A new vertex was added.
    Realized,
    /// An existing vertex already realizes the extension.
    Discharged,
    /// Realization would exceed `max_tree_size`; the obligation is dropped.
    Deferred,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub obligation: String,
    /// The obligation's descriptor, `new_vertex` naming the realizing vertex.
    pub descriptor: ExtensionDescriptor,
    pub outcome: StepOutcome,
    pub identified: bool,
    pub sizes: Vec<usize>,
}

/// A raise obligation whose witness now has a raising neighbor in `tree`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProcessedWitness {
    pub tuple: Vec<String>,
    pub tree: usize,
}

#[derive(Debug, Clone)]
pub struct Generation<D> {
    pub structure: MultiTree<D>,
    pub log: Vec<StepRecord>,
    pub processed: Vec<ProcessedWitness>,
    /// Obligations still queued when the step budget ran out.
    pub pending: usize,
}

#[derive(Debug, Clone, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Config(#[from] StructureError),
    #[error("step {step}: {reason}")]
    Aborted {
        step: usize,
        reason: String,
        report: Option<ValidationReport>,
        log: Vec<StepRecord>,
    },
}

/// Per-tree vertex positions of a convex substructure, each sorted.
pub type Hull = Vec<Vec<usize>>;

#[derive(Debug, Clone)]
struct Obligation {
    hull: Hull,
    slot: usize,
    attach: usize,
    witness: Option<Vec<usize>>,
}

/// Vertex names of a hull, `,` within a tree and `|` between trees.
pub fn fingerprint<D: Codistance>(m: &MultiTree<D>, hull: &Hull) -> String {
    hull.iter()
        .enumerate()
        .map(|(k, vs)| {
            vs.iter()
                .map(|&v| m.tree(k).name(v))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("|")
}

/// Connected vertex sets of `t` with at most `max` vertices, optionally
/// containing `root`; each sorted, the list sorted.
pub fn connected_subsets(t: &FiniteTree, max: usize, root: Option<usize>) -> Vec<Vec<usize>> {
    let mut all = BTreeSet::new();
    if max == 0 {
        return Vec::new();
    }
    let mut layer: BTreeSet<Vec<usize>> = match root {
        Some(r) => [vec![r]].into_iter().collect(),
        None => (0..t.len()).map(|v| vec![v]).collect(),
    };
    while !layer.is_empty() {
        let mut next = BTreeSet::new();
        for set in &layer {
            if set.len() < max {
                for &v in set {
                    for &w in t.neighbors(v) {
                        if set.binary_search(&w).is_err() {
                            let mut grown = set.clone();
                            grown.push(w);
                            grown.sort_unstable();
                            next.insert(grown);
                        }
                    }
                }
            }
        }
        all.extend(std::mem::take(&mut layer));
        layer = next;
    }
    all.into_iter().collect()
}

fn hull_has_zero<D: Codistance>(m: &MultiTree<D>, hull: &Hull) -> bool {
    let sizes: Vec<usize> = hull.iter().map(Vec::len).collect();
    let mut full = vec![0; hull.len()];
    TupleIter::new(&sizes).any(|t| {
        for (k, &c) in t.iter().enumerate() {
            full[k] = hull[k][c];
        }
        m.at(&full).is_zero()
    })
}

/// Every hull with at most `bound` vertices that contains a zero tuple. With
/// `through = Some((slot, v))` only hulls whose tree `slot` contains `v`.
pub fn hulls<D: Codistance>(m: &MultiTree<D>, bound: usize, through: Option<(usize, usize)>) -> Vec<Hull> {
    let n = m.n();
    if bound < n {
        return Vec::new();
    }
    let span = bound - (n - 1);
    let options: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|k| {
            let root = through.and_then(|(s, v)| (s == k).then_some(v));
            connected_subsets(m.tree(k), span, root)
        })
        .collect();
    let mut out = Vec::new();
    let mut cur: Hull = Vec::with_capacity(n);
    fn rec<D: Codistance>(
        m: &MultiTree<D>,
        options: &[Vec<Vec<usize>>],
        budget: usize,
        cur: &mut Hull,
        out: &mut Vec<Hull>,
    ) {
        let k = cur.len();
        if k == options.len() {
            if hull_has_zero(m, cur) {
                out.push(cur.clone());
            }
            return;
        }
        let reserve = options.len() - k - 1;
        for set in &options[k] {
            if set.len() + reserve <= budget {
                cur.push(set.clone());
                rec(m, options, budget - set.len(), cur, out);
                cur.pop();
            }
        }
    }
    rec(m, &options, bound, &mut cur, &mut out);
    out
}

/// Frames of a hull: tuples over the hull whose coordinate `slot` is fixed
/// to `attach`.
fn frames(hull: &Hull, slot: usize, attach: usize) -> Vec<Vec<usize>> {
    let sizes: Vec<usize> = hull
        .iter()
        .enumerate()
        .map(|(k, vs)| if k == slot { 1 } else { vs.len() })
        .collect();
    TupleIter::new(&sizes)
        .map(|t| {
            t.iter()
                .enumerate()
                .map(|(k, &c)| if k == slot { attach } else { hull[k][c] })
                .collect()
        })
        .collect()
}

fn locally_maximal_in<D: Codistance>(m: &MultiTree<D>, hull: &Hull, w: &[usize]) -> bool {
    let here = m.at(w);
    let mut probe = w.to_vec();
    for (k, vs) in hull.iter().enumerate() {
        for &y in m.tree(k).neighbors(w[k]) {
            if vs.binary_search(&y).is_ok() {
                probe[k] = y;
                if m.at(&probe) > here {
                    return false;
                }
            }
        }
        probe[k] = w[k];
    }
    true
}

/// The one-point extensions of a hull in canonical order: folds per tree and
/// attach vertex, then raises per locally maximal tuple and tree.
fn hull_obligations<D: Codistance>(m: &MultiTree<D>, hull: &Hull) -> Vec<Obligation> {
    let mut out = Vec::new();
    for (slot, vs) in hull.iter().enumerate() {
        for &attach in vs {
            out.push(Obligation {
                hull: hull.clone(),
                slot,
                attach,
                witness: None,
            });
        }
    }
    let sizes: Vec<usize> = hull.iter().map(Vec::len).collect();
    for t in TupleIter::new(&sizes) {
        let w: Vec<usize> = t.iter().enumerate().map(|(k, &c)| hull[k][c]).collect();
        if locally_maximal_in(m, hull, &w) {
            for slot in 0..m.n() {
                out.push(Obligation {
                    hull: hull.clone(),
                    slot,
                    attach: w[slot],
                    witness: Some(w.clone()),
                });
            }
        }
    }
    out
}

/// Codistances the extension prescribes on the frames of its hull.
fn required<D: Codistance>(m: &MultiTree<D>, ob: &Obligation, fs: &[Vec<usize>]) -> Option<Vec<D>> {
    fs.iter()
        .map(|f| {
            let here = m.at(f);
            match &ob.witness {
                Some(w) if m.is_geodesic(w, f) => here.raise(),
                _ => Some(here.fold_down()),
            }
        })
        .collect()
}

/// A vertex of `m` outside the hull, adjacent to the attach vertex, whose
/// codistances against the hull are exactly those the extension prescribes.
fn find_realizer<D: Codistance>(m: &MultiTree<D>, ob: &Obligation) -> Option<usize> {
    let fs = frames(&ob.hull, ob.slot, ob.attach);
    let want = required(m, ob, &fs)?;
    let mut probe = vec![0; m.n()];
    m.tree(ob.slot).neighbors(ob.attach).iter().copied().find(|&u| {
        ob.hull[ob.slot].binary_search(&u).is_err()
            && fs.iter().zip(&want).all(|(f, &d)| {
                probe.copy_from_slice(f);
                probe[ob.slot] = u;
                m.at(&probe) == d
            })
    })
}

fn descriptor<D: Codistance>(m: &MultiTree<D>, ob: &Obligation, new_vertex: String) -> ExtensionDescriptor {
    let tree = ob.slot + 1;
    match &ob.witness {
        None => ExtensionDescriptor::fold(tree, m.tree(ob.slot).name(ob.attach), new_vertex),
        Some(w) => ExtensionDescriptor::raise(tree, m.tuple_names(w), new_vertex),
    }
}

/// Appends the obligations of `hs` in shuffled order. Obligations beyond the
/// remaining step budget can never be popped, so the queue is capped there.
fn enqueue<D: Codistance>(
    m: &MultiTree<D>,
    hs: &[Hull],
    queue: &mut VecDeque<Obligation>,
    rng: &mut ChaCha8Rng,
    left: usize,
) {
    let mut batch: Vec<Obligation> = hs.iter().flat_map(|h| hull_obligations(m, h)).collect();
    batch.shuffle(rng);
    let room = left.saturating_sub(queue.len());
    queue.extend(batch.into_iter().take(room));
}

/// Runs the obligation queue for `cfg.steps` pops.
pub fn generate<D: Codistance>(cfg: &GenConfig) -> Result<Generation<D>, GenerateError> {
    let mut m: MultiTree<D> = base_structure(cfg.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut queue: VecDeque<Obligation> = VecDeque::new();
    let mut log = Vec::new();
    let mut processed = BTreeSet::new();
    let vcfg = cfg.validation();

    let initial = hulls(&m, cfg.audit_bound.max(cfg.n), None);
    enqueue(&m, &initial, &mut queue, &mut rng, cfg.steps);

    for step in 0..cfg.steps {
        let Some(ob) = queue.pop_front() else { break };
        let fp = fingerprint(&m, &ob.hull);
        if let Some(u) = find_realizer(&m, &ob) {
            if let Some(w) = &ob.witness {
                processed.insert(ProcessedWitness { tuple: m.tuple_names(w), tree: ob.slot + 1 });
            }
            log.push(StepRecord {
                step,
                obligation: fp,
                descriptor: descriptor(&m, &ob, m.tree(ob.slot).name(u).to_string()),
                outcome: StepOutcome::Discharged,
                identified: false,
                sizes: m.sizes().to_vec(),
            });
            continue;
        }
        let fresh = m.fresh_name(ob.slot);
        let desc = descriptor(&m, &ob, fresh);
        if cfg.max_tree_size.is_some_and(|cap| m.tree(ob.slot).len() >= cap) {
            log.push(StepRecord {
                step,
                obligation: fp,
                descriptor: desc,
                outcome: StepOutcome::Deferred,
                identified: false,
                sizes: m.sizes().to_vec(),
            });
            continue;
        }
        let abort = |reason: String, report: Option<ValidationReport>, log: &Vec<StepRecord>| GenerateError::Aborted {
            step,
            reason,
            report,
            log: log.clone(),
        };
        let s = m.restrict(&ob.hull).map_err(|e| abort(e.to_string(), None, &log))?;
        let ext = replay(&s, &desc).map_err(|e| abort(e.to_string(), None, &log))?;
        let amalgam = amalgamate(&s, &ext, &m).map_err(|e| abort(e.to_string(), None, &log))?;
        let report = validate(&amalgam.structure, vcfg);
        if !report.accepted() {
            return Err(abort("stage fails validation".into(), Some(report), &log));
        }
        let image = amalgam
            .from_b
            .image(ob.slot, &desc.new_vertex)
            .expect("new vertex is mapped")
            .to_string();
        let grown = amalgam.structure.vertex_count() > m.vertex_count();
        m = amalgam.structure;
        if let Some(w) = &ob.witness {
            processed.insert(ProcessedWitness { tuple: m.tuple_names(w), tree: ob.slot + 1 });
        }
        log.push(StepRecord {
            step,
            obligation: fp,
            descriptor: desc.renamed(image.clone()),
            outcome: StepOutcome::Realized,
            identified: amalgam.identified > 0,
            sizes: m.sizes().to_vec(),
        });
        if grown {
            let v = m.tree(ob.slot).position(&image).expect("image exists");
            let left = cfg.steps - step - 1;
            let hs = hulls(&m, cfg.audit_bound.max(cfg.n), Some((ob.slot, v)));
            enqueue(&m, &hs, &mut queue, &mut rng, left);
        }
    }
    Ok(Generation {
        structure: m,
        log,
        processed: processed.into_iter().collect(),
        pending: queue.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingExtension {
    pub fingerprint: String,
    pub descriptor: ExtensionDescriptor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GermType {
    pub canonical: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub bound: usize,
    pub substructures: usize,
    pub realized: usize,
    pub missing: Vec<MissingExtension>,
    pub germ_types: Vec<GermType>,
}

impl AuditReport {
    pub fn holds(&self) -> bool {
        self.missing.is_empty()
    }
}

/// For every hull of at most `bound` vertices with a zero tuple and every
/// one-point extension of it, looks for a vertex of `m` realizing the
/// extension over the identity on the hull.
pub fn check_extension_property<D: Codistance>(m: &MultiTree<D>, bound: usize) -> AuditReport {
    let hs = if bound == 0 { Vec::new() } else { hulls(m, bound, None) };
    let mut realized = 0;
    let mut missing = Vec::new();
    for h in &hs {
        for ob in hull_obligations(m, h) {
            if find_realizer(m, &ob).is_some() {
                realized += 1;
            } else {
                missing.push(MissingExtension {
                    fingerprint: fingerprint(m, h),
                    descriptor: descriptor(m, &ob, m.fresh_name(ob.slot)),
                });
            }
        }
    }
    missing.sort_by(|a, b| a.fingerprint.cmp(&b.fingerprint));
    AuditReport {
        bound,
        substructures: hs.len(),
        realized,
        missing,
        germ_types: germ_census(m)
            .into_iter()
            .map(|(canonical, count)| GermType { canonical, count })
            .collect(),
    }
}
