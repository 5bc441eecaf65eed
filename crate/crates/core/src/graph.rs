//! Plain undirected simple graphs with sorted adjacency lists.
//!
//! Resistance, walk and flow routines work on this type; the geometric
//! [`crate::hrg::HrgGraph`] wraps one together with vertex positions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    pub fn with_vertices(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n], edge_count: 0 }
    }

    /// Builds a graph from an edge list. Self-loops are rejected; duplicate
    /// edges are merged.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return invalid(format!("edge ({u}, {v}) out of range for {n} vertices"));
            }
            if u == v {
                return invalid(format!("self-loop at {u}"));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Self::from_adjacency_unchecked(adj))
    }

    /// Sorts and deduplicates the lists. Lists must already be symmetric.
    pub(crate) fn from_adjacency_unchecked(mut adj: Vec<Vec<usize>>) -> Self {
        let mut twice = 0;
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Graph { adj, edge_count: twice / 2 }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adj.len() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        if u == v {
            return invalid(format!("self-loop at {u}"));
        }
        if u >= self.adj.len() || v >= self.adj.len() {
            return invalid(format!("edge ({u}, {v}) out of range"));
        }
        match self.adj[u].binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adj[u].insert(pos, v);
                let pos_v = self.adj[v].binary_search(&u).unwrap_err();
                self.adj[v].insert(pos_v, u);
                self.edge_count += 1;
                Ok(true)
            }
        }
    }

    /// Appends an isolated vertex and returns its id.
    pub fn add_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub fn components(&self) -> Components {
        let n = self.vertex_count();
        let mut uf = UnionFind::new(n);
        for (u, v) in self.edges() {
            uf.union(u, v);
        }
        // relabel roots densely in order of first appearance
        let mut label = vec![usize::MAX; n];
        let mut root_label = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        for (v, slot) in label.iter_mut().enumerate() {
            let root = uf.find(v);
            if root_label[root] == usize::MAX {
                root_label[root] = sizes.len();
                sizes.push(0);
            }
            *slot = root_label[root];
            sizes[*slot] += 1;
        }
        Components { label, sizes }
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() > 0 && self.components().count() == 1
    }

    /// Subgraph induced by `vertices` (which must be distinct). Local ids
    /// follow the order of `vertices`.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Subgraph {
        let mut local = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let adj = vertices
            .iter()
            .map(|&v| self.adj[v].iter().filter_map(|&u| (local[u] != usize::MAX).then_some(local[u])).collect())
            .collect();
        Subgraph { graph: Graph::from_adjacency_unchecked(adj), global_ids: vertices.to_vec() }
    }

    /// Connected component containing `v`, as an induced subgraph.
    pub fn component_of(&self, v: usize) -> Result<Subgraph> {
        if v >= self.vertex_count() {
            return invalid(format!("vertex {v} out of range"));
        }
        let comps = self.components();
        Ok(self.induced_subgraph(&comps.members(comps.label(v))))
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        if self.vertex_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        if !self.is_connected() {
            return Err(Error::NotConnected);
        }
        Ok(())
    }

    /// Checks symmetry, sortedness and absence of self-loops.
    pub fn check_invariants(&self) -> bool {
        let mut twice = 0;
        for (u, list) in self.adj.iter().enumerate() {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for &v in list {
                if v == u || v >= self.adj.len() || self.adj[v].binary_search(&u).is_err() {
                    return false;
                }
            }
            twice += list.len();
        }
        twice == 2 * self.edge_count
    }

    /// Single-source BFS distances; `usize::MAX` marks unreachable vertices.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        let mut queue = std::collections::VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// An induced subgraph together with the ids its vertices had in the parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    pub graph: Graph,
    pub global_ids: Vec<usize>,
}

impl Subgraph {
    pub fn local_id(&self, global: usize) -> Option<usize> {
        self.global_ids.iter().position(|&g| g == global)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    label: Vec<usize>,
    sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn label(&self, v: usize) -> usize {
        self.label[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.label
    }

    pub fn size(&self, component: usize) -> usize {
        self.sizes[component]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Label of a largest component (smallest label among ties).
    pub fn largest(&self) -> Option<usize> {
        let max = *self.sizes.iter().max()?;
        self.sizes.iter().position(|&s| s == max)
    }

    pub fn members(&self, component: usize) -> Vec<usize> {
        self.label.iter().enumerate().filter(|&(_, &l)| l == component).map(|(v, _)| v).collect()
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Small named graphs used throughout the tests and examples.
pub mod named {
    use super::Graph;

    pub fn path(k: usize) -> Graph {
        let edges: Vec<_> = (1..k).map(|i| (i - 1, i)).collect();
        Graph::from_edges(k, &edges).expect("valid path")
    }

    pub fn cycle(k: usize) -> Graph {
        let mut edges: Vec<_> = (1..k).map(|i| (i - 1, i)).collect();
        edges.push((k - 1, 0));
        Graph::from_edges(k, &edges).expect("valid cycle")
    }

    pub fn complete(k: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..k {
            for v in (u + 1)..k {
                edges.push((u, v));
            }
        }
        Graph::from_edges(k, &edges).expect("valid clique")
    }

    pub fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Graph::from_edges(leaves + 1, &edges).expect("valid star")
    }

    /// Clique on `clique` vertices with a path of `tail` further vertices
    /// hanging off clique vertex 0. Tail vertex ids are `clique..clique+tail`,
    /// the last one being the leaf.
    pub fn lollipop(clique: usize, tail: usize) -> Graph {
        let mut g = complete(clique);
        let mut prev = 0;
        for _ in 0..tail {
            let v = g.add_vertex();
            g.add_edge(prev, v).expect("fresh edge");
            prev = v;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_and_reports_invariants() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.check_invariants());
        assert!(g.has_edge(2, 1));
        assert!(!g.has_edge(3, 1));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        assert!(Graph::from_edges(2, &[(1, 1)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn components_and_largest() {
        let g = Graph::from_edges(6, &[(0, 1), (2, 3), (3, 4)]).unwrap();
        let c = g.components();
        assert_eq!(c.count(), 3);
        assert_eq!(c.label(0), c.label(1));
        assert_ne!(c.label(0), c.label(2));
        assert_eq!(c.size(c.largest().unwrap()), 3);
        assert_eq!(c.members(c.label(5)), vec![5]);
        assert!(!g.is_connected());
        assert!(named::cycle(5).is_connected());
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = named::path(5);
        let sub = g.induced_subgraph(&[4, 3, 1]);
        assert_eq!(sub.graph.edge_count(), 1);
        assert!(sub.graph.has_edge(0, 1));
        assert_eq!(sub.local_id(1), Some(2));
        assert!(sub.graph.check_invariants());
    }

    #[test]
    fn add_edge_and_vertex() {
        let mut g = named::path(3);
        assert!(g.add_edge(0, 2).unwrap());
        assert!(!g.add_edge(2, 0).unwrap());
        let v = g.add_vertex();
        assert_eq!(v, 3);
        assert_eq!(g.degree(3), 0);
        assert!(g.check_invariants());
    }

    #[test]
    fn lollipop_shape() {
        let g = named::lollipop(4, 3);
        assert_eq!(g.vertex_count(), 7);
        assert_eq!(g.degree(6), 1);
        assert_eq!(g.degree(0), 4);
        assert_eq!(g.bfs_distances(6)[1], 4);
    }
}
