//! Finite coordinate trees with cached all-pairs distances.

use std::collections::{HashMap, VecDeque};

use crate::error::StructureError;

/// One coordinate tree of a multiple tree.
///
/// Vertices are kept in creation order; that order is the canonical order used
/// for tuples, tables and serialization. Distances are cached densely and are
/// kept in sync when leaves are added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTree {
    id: usize,
    names: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<usize>>,
    dist: Vec<Vec<u32>>,
}

impl FiniteTree {
    /// A tree with a single vertex. `id` is the 1-based tree index.
    pub fn singleton(id: usize, name: impl Into<String>) -> Self {
        let name = name.into();
        let mut index = HashMap::new();
        index.insert(name.clone(), 0);
        FiniteTree {
            id,
            names: vec![name],
            index,
            adj: vec![Vec::new()],
            dist: vec![vec![0]],
        }
    }

    /// Builds a tree from vertex names (in canonical order) and edges.
    ///
    /// Rejects empty vertex sets, duplicate names, unknown endpoints, self
    /// loops, duplicate edges and anything that is not connected and acyclic.
    pub fn new<S: AsRef<str>>(
        id: usize,
        vertices: &[S],
        edges: &[(S, S)],
    ) -> Result<Self, StructureError> {
        if vertices.is_empty() {
            return Err(StructureError::EmptyTree { tree: id });
        }
        let mut index = HashMap::with_capacity(vertices.len());
        let mut names = Vec::with_capacity(vertices.len());
        for (pos, v) in vertices.iter().enumerate() {
            let v = v.as_ref();
            if index.insert(v.to_string(), pos).is_some() {
                return Err(StructureError::DuplicateVertex { vertex: v.to_string() });
            }
            names.push(v.to_string());
        }
        let mut adj = vec![Vec::new(); names.len()];
        for (u, v) in edges {
            let (u, v) = (u.as_ref(), v.as_ref());
            let pu = *index.get(u).ok_or_else(|| StructureError::UnknownVertex {
                tree: id,
                vertex: u.to_string(),
            })?;
            let pv = *index.get(v).ok_or_else(|| StructureError::UnknownVertex {
                tree: id,
                vertex: v.to_string(),
            })?;
            if pu == pv {
                return Err(StructureError::SelfLoop { tree: id, vertex: u.to_string() });
            }
            if adj[pu].contains(&pv) {
                return Err(StructureError::DuplicateEdge {
                    tree: id,
                    u: u.to_string(),
                    v: v.to_string(),
                });
            }
            adj[pu].push(pv);
            adj[pv].push(pu);
        }
        if edges.len() + 1 != names.len() {
            return Err(StructureError::NotATree {
                tree: id,
                reason: format!("{} vertices but {} edges", names.len(), edges.len()),
            });
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let mut tree = FiniteTree {
            id,
            names,
            index,
            adj,
            dist: Vec::new(),
        };
        let from_root = tree.bfs_distances(0);
        if from_root.contains(&u32::MAX) {
            return Err(StructureError::NotATree {
                tree: id,
                reason: "not connected".into(),
            });
        }
        tree.dist = (0..tree.len()).map(|v| tree.bfs_distances(v)).collect();
        Ok(tree)
    }

    /// 1-based index of this tree inside its multiple tree.
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub(crate) fn resolve(&self, name: &str) -> Result<usize, StructureError> {
        self.position(name).ok_or_else(|| StructureError::UnknownVertex {
            tree: self.id,
            vertex: name.to_string(),
        })
    }

    /// Sorted neighbor positions of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.dist[u][v] == 1
    }

    /// Cached graph distance between two vertex positions.
    pub fn distance(&self, u: usize, v: usize) -> u32 {
        self.dist[u][v]
    }

    /// Graph distance between two named vertices.
    pub fn distance_by_name(&self, u: &str, v: &str) -> Result<u32, StructureError> {
        Ok(self.distance(self.resolve(u)?, self.resolve(v)?))
    }

    /// The `i`-th vertex on the path from `u` to `v`, or `u` itself when the
    /// path is shorter than `i`.
    pub fn path_point(&self, u: usize, v: usize, i: usize) -> usize {
        if i as u64 > self.dist[u][v] as u64 {
            return u;
        }
        let mut cur = u;
        for _ in 0..i {
            cur = self.step_toward(cur, v);
        }
        cur
    }

    pub fn path_point_by_name(&self, u: &str, v: &str, i: usize) -> Result<&str, StructureError> {
        let p = self.path_point(self.resolve(u)?, self.resolve(v)?, i);
        Ok(self.name(p))
    }

    /// The neighbor of `from` one step closer to `to` (`from` when equal).
    pub fn step_toward(&self, from: usize, to: usize) -> usize {
        if from == to {
            return from;
        }
        let target = self.dist[from][to] - 1;
        *self.adj[from]
            .iter()
            .find(|&&w| self.dist[w][to] == target)
            .expect("tree distances are consistent")
    }

    /// Vertex positions on the path from `u` to `v`, both ends included.
    pub fn path(&self, u: usize, v: usize) -> Vec<usize> {
        let mut out = vec![u];
        let mut cur = u;
        while cur != v {
            cur = self.step_toward(cur, v);
            out.push(cur);
        }
        out
    }

    /// Whether `a` lies on the path between `u` and `v`.
    pub fn on_path(&self, u: usize, v: usize, a: usize) -> bool {
        self.dist[u][a] + self.dist[a][v] == self.dist[u][v]
    }

    /// Edges as position pairs `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Breadth-first distances from `from`; `u32::MAX` marks unreachable
    /// vertices.
    pub fn bfs_distances(&self, from: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        let mut queue = VecDeque::new();
        dist[from] = 0;
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Checks the distance cache against a fresh breadth-first search.
    pub fn distances_consistent(&self) -> bool {
        (0..self.len()).all(|v| self.bfs_distances(v) == self.dist[v])
    }

    /// A copy with one new leaf `name` attached at position `attach`. The new
    /// vertex receives position `len()`.
    pub(crate) fn with_leaf(&self, name: &str, attach: usize) -> Self {
        let mut t = self.clone();
        let new = t.names.len();
        t.names.push(name.to_string());
        t.index.insert(name.to_string(), new);
        t.adj.push(vec![attach]);
        t.adj[attach].push(new);
        t.adj[attach].sort_unstable();
        let row: Vec<u32> = (0..new).map(|v| t.dist[attach][v] + 1).collect();
        for (v, r) in t.dist.iter_mut().enumerate() {
            r.push(row[v]);
        }
        let mut own = row;
        own.push(0);
        t.dist.push(own);
        t
    }

    /// The subtree induced on `keep` (positions, in the order given).
    pub(crate) fn induced(&self, keep: &[usize]) -> Result<Self, StructureError> {
        let names: Vec<&str> = keep.iter().map(|&v| self.name(v)).collect();
        let mut edges = Vec::new();
        for (a, &u) in keep.iter().enumerate() {
            for &v in &keep[a + 1..] {
                if self.adjacent(u, v) {
                    edges.push((self.name(u), self.name(v)));
                }
            }
        }
        FiniteTree::new(self.id, &names, &edges)
    }

    pub(crate) fn with_id(mut self, id: usize) -> Self {
        self.id = id;
        self
    }
}
