//! Tuples of finite trees carrying a dense codistance table.

use std::ops::Deref;

use crate::error::StructureError;
use crate::scalar::Codistance;
use crate::tree::FiniteTree;

/// One vertex position per coordinate tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple(Vec<usize>);

impl Tuple {
    pub fn new(coords: Vec<usize>) -> Self {
        Tuple(coords)
    }

    /// A copy with coordinate `slot` replaced by `v`.
    pub fn with(&self, slot: usize, v: usize) -> Tuple {
        let mut c = self.0.clone();
        c[slot] = v;
        Tuple(c)
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for Tuple {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Tuple {
    fn from(v: Vec<usize>) -> Self {
        Tuple(v)
    }
}

/// A total map from the vertex product to codistances, stored densely in
/// lexicographic tuple order (coordinate 1 most significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodistanceTable<D> {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<D>,
}

fn strides_for(sizes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }
    strides
}

impl<D: Codistance> CodistanceTable<D> {
    pub fn new(sizes: Vec<usize>, values: Vec<D>) -> Result<Self, StructureError> {
        let expected: usize = sizes.iter().product();
        if values.len() != expected {
            return Err(StructureError::Table(format!(
                "{} entries for a product of size {expected}",
                values.len()
            )));
        }
        Ok(CodistanceTable {
            strides: strides_for(&sizes),
            sizes,
            values,
        })
    }

    pub fn from_fn(sizes: Vec<usize>, mut f: impl FnMut(&[usize]) -> D) -> Self {
        let values = TupleIter::new(&sizes).map(|t| f(&t)).collect();
        CodistanceTable {
            strides: strides_for(&sizes),
            sizes,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn values(&self) -> &[D] {
        &self.values
    }

    #[inline]
    pub fn offset(&self, t: &[usize]) -> usize {
        t.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    #[inline]
    pub fn get(&self, t: &[usize]) -> D {
        self.values[self.offset(t)]
    }

    pub fn try_get(&self, t: &[usize]) -> Result<D, StructureError> {
        if t.len() != self.sizes.len() {
            return Err(StructureError::TupleArity {
                expected: self.sizes.len(),
                got: t.len(),
            });
        }
        if t.iter().zip(&self.sizes).any(|(c, s)| c >= s) {
            return Err(StructureError::Table(format!("no entry for tuple {t:?}")));
        }
        Ok(self.get(t))
    }

    pub(crate) fn set(&mut self, t: &[usize], d: D) {
        let o = self.offset(t);
        self.values[o] = d;
    }

    /// All tuples in canonical order.
    pub fn tuples(&self) -> TupleIter {
        TupleIter::new(&self.sizes)
    }
}

/// Odometer over a vertex product in lexicographic order.
#[derive(Debug, Clone)]
pub struct TupleIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl TupleIter {
    pub fn new(sizes: &[usize]) -> Self {
        let next = if sizes.iter().all(|&s| s > 0) {
            Some(vec![0; sizes.len()])
        } else {
            None
        };
        TupleIter {
            sizes: sizes.to_vec(),
            next,
        }
    }
}

impl Iterator for TupleIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.sizes[i] {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(cur)
    }
}

/// An n-tuple of finite trees with a codistance table over their product.
///
/// Construction only checks shapes (tree-ness, table totality, unique names);
/// the codistance axioms are checked by [`crate::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiTree<D = u32> {
    trees: Vec<FiniteTree>,
    table: CodistanceTable<D>,
}

impl<D: Codistance> MultiTree<D> {
    pub fn from_parts(trees: Vec<FiniteTree>, table: CodistanceTable<D>) -> Result<Self, StructureError> {
        if trees.is_empty() {
            return Err(StructureError::NoTrees);
        }
        let sizes: Vec<usize> = trees.iter().map(FiniteTree::len).collect();
        if sizes != table.sizes {
            return Err(StructureError::Table(format!(
                "table shape {:?} does not match tree sizes {sizes:?}",
                table.sizes
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for t in &trees {
            for name in t.names() {
                if !seen.insert(name.as_str()) {
                    return Err(StructureError::DuplicateVertex { vertex: name.clone() });
                }
            }
        }
        let trees = trees
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.with_id(i + 1))
            .collect();
        Ok(MultiTree { trees, table })
    }

    pub fn from_fn(
        trees: Vec<FiniteTree>,
        f: impl FnMut(&[usize]) -> D,
    ) -> Result<Self, StructureError> {
        let sizes = trees.iter().map(FiniteTree::len).collect();
        Self::from_parts(trees, CodistanceTable::from_fn(sizes, f))
    }

    pub fn n(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[FiniteTree] {
        &self.trees
    }

    /// Tree at 0-based `slot`.
    pub fn tree(&self, slot: usize) -> &FiniteTree {
        &self.trees[slot]
    }

    pub fn table(&self) -> &CodistanceTable<D> {
        &self.table
    }

    pub fn sizes(&self) -> &[usize] {
        self.table.sizes()
    }

    pub fn vertex_count(&self) -> usize {
        self.sizes().iter().sum()
    }

    pub fn tuples(&self) -> TupleIter {
        self.table.tuples()
    }

    /// Codistance at a tuple of positions. Panics on out-of-range positions;
    /// see [`MultiTree::codistance_at`] for the checked form.
    #[inline]
    pub fn at(&self, t: &[usize]) -> D {
        self.table.get(t)
    }

    pub fn codistance_at(&self, t: &[usize]) -> Result<D, StructureError> {
        self.table.try_get(t)
    }

    /// Codistance after replacing the listed `(slot, position)` pairs.
    pub fn substituted(&self, t: &[usize], replacements: &[(usize, usize)]) -> Result<D, StructureError> {
        let mut c = t.to_vec();
        for &(slot, v) in replacements {
            if slot >= self.n() {
                return Err(StructureError::UnknownTree {
                    tree: slot + 1,
                    n: self.n(),
                });
            }
            c[slot] = v;
        }
        self.table.try_get(&c)
    }

    /// Resolves vertex names into a tuple.
    pub fn tuple<S: AsRef<str>>(&self, names: &[S]) -> Result<Tuple, StructureError> {
        if names.len() != self.n() {
            return Err(StructureError::TupleArity {
                expected: self.n(),
                got: names.len(),
            });
        }
        names
            .iter()
            .zip(&self.trees)
            .map(|(name, t)| t.resolve(name.as_ref()))
            .collect::<Result<Vec<_>, _>>()
            .map(Tuple)
    }

    pub fn tuple_names(&self, t: &[usize]) -> Vec<String> {
        t.iter()
            .zip(&self.trees)
            .map(|(&v, tree)| tree.name(v).to_string())
            .collect()
    }

    /// `(slot, position)` of a vertex name, searching all trees.
    pub fn locate(&self, name: &str) -> Option<(usize, usize)> {
        self.trees
            .iter()
            .enumerate()
            .find_map(|(slot, t)| t.position(name).map(|p| (slot, p)))
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.locate(name).is_some()
    }

    /// Deterministic fresh vertex name `t{k}_v{m}` for tree `slot`.
    pub fn fresh_name(&self, slot: usize) -> String {
        let mut m = self.trees[slot].len();
        loop {
            let name = format!("t{}_v{}", slot + 1, m);
            if !self.contains_name(&name) {
                return name;
            }
            m += 1;
        }
    }

    /// Sum of coordinatewise tree distances.
    pub fn product_distance(&self, x: &[usize], y: &[usize]) -> u64 {
        x.iter()
            .zip(y)
            .zip(&self.trees)
            .map(|((&a, &b), t)| t.distance(a, b) as u64)
            .sum()
    }

    /// `d*(y) = d*(x) - sum_j dist(x_j, y_j)`.
    pub fn is_geodesic(&self, x: &[usize], y: &[usize]) -> bool {
        let dx = self.at(x).as_u64();
        let dy = self.at(y).as_u64();
        let span = self.product_distance(x, y);
        dx >= span && dx - span == dy
    }

    /// No single-coordinate neighbor move strictly raises the codistance.
    pub fn is_locally_maximal(&self, x: &[usize]) -> bool {
        let here = self.at(x);
        let mut probe = x.to_vec();
        for slot in 0..self.n() {
            let orig = x[slot];
            for &y in self.trees[slot].neighbors(orig) {
                probe[slot] = y;
                if self.at(&probe) > here {
                    return false;
                }
            }
            probe[slot] = orig;
        }
        true
    }

    /// Neighbors of `x[slot]` whose substitution raises the codistance by one.
    pub fn raising_neighbors(&self, x: &[usize], slot: usize) -> Vec<usize> {
        let here = self.at(x);
        let mut probe = x.to_vec();
        self.trees[slot]
            .neighbors(x[slot])
            .iter()
            .copied()
            .filter(|&y| {
                probe[slot] = y;
                here.raise() == Some(self.at(&probe))
            })
            .collect()
    }

    pub fn zero_tuples(&self) -> Vec<Tuple> {
        self.tuples()
            .filter(|t| self.at(t).is_zero())
            .map(Tuple)
            .collect()
    }

    /// A copy with a new leaf `name` in tree `slot` attached at `attach`.
    ///
    /// `rule` receives every frame (a tuple whose coordinate `slot` is
    /// `attach`) and returns the codistance of the same frame with the new
    /// leaf substituted. Old entries are copied verbatim.
    pub fn with_leaf<E>(
        &self,
        slot: usize,
        attach: usize,
        name: &str,
        mut rule: impl FnMut(&[usize]) -> Result<D, E>,
    ) -> Result<Self, E> {
        let new_pos = self.trees[slot].len();
        let mut trees = self.trees.clone();
        trees[slot] = trees[slot].with_leaf(name, attach);
        let mut sizes = self.sizes().to_vec();
        sizes[slot] += 1;
        let mut values = Vec::with_capacity(sizes.iter().product());
        let mut frame = vec![0; sizes.len()];
        for t in TupleIter::new(&sizes) {
            if t[slot] == new_pos {
                frame.copy_from_slice(&t);
                frame[slot] = attach;
                values.push(rule(&frame)?);
            } else {
                values.push(self.table.get(&t));
            }
        }
        Ok(MultiTree {
            trees,
            table: CodistanceTable {
                strides: strides_for(&sizes),
                sizes,
                values,
            },
        })
    }

    /// The sub-multitree induced on the given positions per tree. Positions
    /// are kept in ascending order; every set must induce a subtree.
    pub fn restrict(&self, keep: &[Vec<usize>]) -> Result<Self, StructureError> {
        if keep.len() != self.n() {
            return Err(StructureError::TupleArity {
                expected: self.n(),
                got: keep.len(),
            });
        }
        let mut sorted: Vec<Vec<usize>> = keep.to_vec();
        for s in &mut sorted {
            s.sort_unstable();
            s.dedup();
        }
        let trees = sorted
            .iter()
            .zip(&self.trees)
            .map(|(s, t)| {
                if s.is_empty() {
                    Err(StructureError::EmptyTree { tree: t.id() })
                } else {
                    t.induced(s)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut full = vec![0; self.n()];
        Self::from_fn(trees, |t| {
            for (i, &c) in t.iter().enumerate() {
                full[i] = sorted[i][c];
            }
            self.at(&full)
        })
    }

    /// Restriction to the named vertices of each tree.
    pub fn restrict_by_names<S: AsRef<str>>(&self, keep: &[Vec<S>]) -> Result<Self, StructureError> {
        let pos = keep
            .iter()
            .zip(&self.trees)
            .map(|(names, t)| names.iter().map(|s| t.resolve(s.as_ref())).collect())
            .collect::<Result<Vec<Vec<usize>>, _>>()?;
        self.restrict(&pos)
    }

    /// Positions of `other`'s vertices inside `self`, per tree, when every
    /// name of `other` occurs in the matching tree of `self`.
    pub fn position_map(&self, other: &Self) -> Option<Vec<Vec<usize>>> {
        if other.n() != self.n() {
            return None;
        }
        other
            .trees
            .iter()
            .zip(&self.trees)
            .map(|(o, s)| o.names().iter().map(|name| s.position(name)).collect())
            .collect()
    }

    /// Whether `sub` is a sub-multitree of `self` under the identity on names:
    /// same-named vertices, induced edges and restricted table all agree.
    pub fn contains_substructure(&self, sub: &Self) -> bool {
        let Some(map) = self.position_map(sub) else {
            return false;
        };
        for (slot, m) in map.iter().enumerate() {
            let (st, bt) = (&sub.trees[slot], &self.trees[slot]);
            for u in 0..m.len() {
                for v in (u + 1)..m.len() {
                    if st.adjacent(u, v) != bt.adjacent(m[u], m[v]) {
                        return false;
                    }
                }
            }
        }
        let mut full = vec![0; self.n()];
        sub.tuples().all(|t| {
            for (i, &c) in t.iter().enumerate() {
                full[i] = map[i][c];
            }
            sub.at(&t) == self.at(&full)
        })
    }

    /// Equality up to vertex order: same names, edges and codistances.
    pub fn same_structure(&self, other: &Self) -> bool {
        self.sizes() == other.sizes() && self.contains_substructure(other)
    }

    /// Re-stores the table in another codistance type.
    pub fn convert<E: Codistance>(&self) -> Result<MultiTree<E>, StructureError> {
        let values = self
            .table
            .values
            .iter()
            .map(|&d| E::from_u64(d.as_u64()).ok_or(StructureError::Overflow { value: d.as_u64() }))
            .collect::<Result<Vec<E>, _>>()?;
        Ok(MultiTree {
            trees: self.trees.clone(),
            table: CodistanceTable {
                sizes: self.table.sizes.clone(),
                strides: self.table.strides.clone(),
                values,
            },
        })
    }

    /// Overwrites a single entry. Used to build deliberately corrupt
    /// structures for audits.
    pub fn set_codistance(&mut self, t: &[usize], d: D) -> Result<(), StructureError> {
        self.table.try_get(t)?;
        self.table.set(t, d);
        Ok(())
    }
}
