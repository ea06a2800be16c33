//! Finite graphs, oriented edges, reduced edge paths, circuits and turns.
//!
//! Edges are stored once; an [`OrientedEdge`] packs the edge index with an
//! orientation bit so that reversal is a single xor. The packed integer is
//! also the total token order used for canonical circuit rotations.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;
pub type EdgeSet = BTreeSet<EdgeId>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("token {position} ({token}) does not start where the previous token ends")]
    MismatchedEndpoints { position: usize, token: String },
    #[error("circuit reduces to the trivial word")]
    TrivialCircuit,
    #[error("word is not closed")]
    NotClosed,
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("graph is not connected")]
    NotConnected,
    #[error("graph has no vertices")]
    Empty,
    #[error("turn directions are based at different vertices")]
    TurnVertexMismatch,
}

/// An edge with an orientation. `2 * edge + reversed`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrientedEdge(u32);

impl OrientedEdge {
    pub fn new(edge: EdgeId, reversed: bool) -> Self {
        OrientedEdge(((edge as u32) << 1) | reversed as u32)
    }

    pub fn forward(edge: EdgeId) -> Self {
        Self::new(edge, false)
    }

    pub fn backward(edge: EdgeId) -> Self {
        Self::new(edge, true)
    }

    pub fn edge(self) -> EdgeId {
        (self.0 >> 1) as EdgeId
    }

    pub fn is_reversed(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn reverse(self) -> Self {
        OrientedEdge(self.0 ^ 1)
    }

    /// Dense index in `0..2 * edge_count`, used for direction tables.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        OrientedEdge(i as u32)
    }
}

impl fmt::Debug for OrientedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_reversed() {
            write!(f, "~e{}", self.edge())
        } else {
            write!(f, "e{}", self.edge())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub name: String,
    pub init: VertexId,
    pub term: VertexId,
}

/// Spanning tree used to identify the fundamental group with a free group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marking {
    pub root: VertexId,
    pub tree: EdgeSet,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedGraph {
    vertex_names: Vec<String>,
    edges: Vec<EdgeRecord>,
    vertex_index: BTreeMap<String, VertexId>,
    edge_index: BTreeMap<String, EdgeId>,
    star: Vec<Vec<OrientedEdge>>,
    marking: Option<Marking>,
}

pub fn valid_edge_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

pub fn valid_vertex_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl MarkedGraph {
    /// Builds an unmarked graph. Edges are `(name, init, term)` by vertex name.
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(S, S, S)]) -> Result<Self, GraphError> {
        let mut vertex_index = BTreeMap::new();
        let mut vertex_names = Vec::new();
        for v in vertices {
            let v = v.as_ref();
            if !valid_vertex_name(v) {
                return Err(GraphError::InvalidName(v.to_string()));
            }
            if vertex_index
                .insert(v.to_string(), vertex_names.len())
                .is_some()
            {
                return Err(GraphError::DuplicateName(v.to_string()));
            }
            vertex_names.push(v.to_string());
        }
        let mut edge_index = BTreeMap::new();
        let mut records = Vec::new();
        for (name, a, b) in edges {
            let name = name.as_ref();
            if !valid_edge_name(name) {
                return Err(GraphError::InvalidName(name.to_string()));
            }
            let lookup = |s: &str| {
                vertex_index
                    .get(s)
                    .copied()
                    .ok_or_else(|| GraphError::UnknownVertex(s.to_string()))
            };
            let init = lookup(a.as_ref())?;
            let term = lookup(b.as_ref())?;
            if edge_index.insert(name.to_string(), records.len()).is_some() {
                return Err(GraphError::DuplicateName(name.to_string()));
            }
            records.push(EdgeRecord {
                name: name.to_string(),
                init,
                term,
            });
        }
        Ok(Self::from_parts(vertex_names, records))
    }

    pub(crate) fn from_parts(vertex_names: Vec<String>, edges: Vec<EdgeRecord>) -> Self {
        let vertex_index = vertex_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let edge_index = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.name.clone(), i))
            .collect();
        let mut star = vec![Vec::new(); vertex_names.len()];
        for (i, e) in edges.iter().enumerate() {
            star[e.init].push(OrientedEdge::forward(i));
            star[e.term].push(OrientedEdge::backward(i));
        }
        for s in &mut star {
            s.sort();
        }
        MarkedGraph {
            vertex_names,
            edges,
            vertex_index,
            edge_index,
            star,
            marking: None,
        }
    }

    /// Rose with one vertex `v` and one loop per name.
    pub fn rose(names: &[&str]) -> Self {
        let edges: Vec<(&str, &str, &str)> = names.iter().map(|n| (*n, "v", "v")).collect();
        Self::new(&["v"], &edges)
            .expect("rose names are valid")
            .marked()
            .expect("rose is connected")
    }

    /// Attaches a breadth-first spanning-tree marking rooted at vertex 0.
    pub fn marked(mut self) -> Result<Self, GraphError> {
        if self.vertex_names.is_empty() {
            return Err(GraphError::Empty);
        }
        if !self.is_connected() {
            return Err(GraphError::NotConnected);
        }
        let tree = self.spanning_tree(0);
        let rank = self.edges.len() + 1 - self.vertex_names.len();
        self.marking = Some(Marking {
            root: 0,
            tree,
            rank,
        });
        Ok(self)
    }

    pub fn marking(&self) -> Option<&Marking> {
        self.marking.as_ref()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn all_edges(&self) -> EdgeSet {
        (0..self.edges.len()).collect()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e].name
    }

    pub fn vertex_id(&self, name: &str) -> Result<VertexId, GraphError> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn edge_id(&self, name: &str) -> Result<EdgeId, GraphError> {
        self.edge_index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownEdge(name.to_string()))
    }

    pub fn init(&self, d: OrientedEdge) -> VertexId {
        let e = &self.edges[d.edge()];
        if d.is_reversed() {
            e.term
        } else {
            e.init
        }
    }

    pub fn term(&self, d: OrientedEdge) -> VertexId {
        self.init(d.reverse())
    }

    /// Directions based at `v`, sorted by token order.
    pub fn directions_at(&self, v: VertexId) -> &[OrientedEdge] {
        &self.star[v]
    }

    pub fn valence(&self, v: VertexId) -> usize {
        self.star[v].len()
    }

    pub fn direction_count(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn token(&self, d: OrientedEdge) -> String {
        if d.is_reversed() {
            format!("~{}", self.edges[d.edge()].name)
        } else {
            self.edges[d.edge()].name.clone()
        }
    }

    pub fn tokens(&self, word: &[OrientedEdge]) -> Vec<String> {
        word.iter().map(|d| self.token(*d)).collect()
    }

    pub fn format_word(&self, word: &[OrientedEdge]) -> String {
        self.tokens(word).join(" ")
    }

    pub fn parse_token(&self, tok: &str) -> Result<OrientedEdge, GraphError> {
        match tok.strip_prefix('~') {
            Some(name) => Ok(OrientedEdge::backward(self.edge_id(name)?)),
            None => Ok(OrientedEdge::forward(self.edge_id(tok)?)),
        }
    }

    /// Parses a whitespace separated token list without checking concatenation.
    pub fn parse_word(&self, text: &str) -> Result<Vec<OrientedEdge>, GraphError> {
        text.split_whitespace()
            .map(|t| self.parse_token(t))
            .collect()
    }

    /// Checks that consecutive tokens concatenate.
    pub fn check_word(&self, word: &[OrientedEdge]) -> Result<(), GraphError> {
        for (i, w) in word.windows(2).enumerate() {
            if self.term(w[0]) != self.init(w[1]) {
                return Err(GraphError::MismatchedEndpoints {
                    position: i + 1,
                    token: self.token(w[1]),
                });
            }
        }
        Ok(())
    }

    /// Tightens a word starting at `start` to the reduced path homotopic rel endpoints.
    pub fn tighten_path(
        &self,
        start: VertexId,
        word: &[OrientedEdge],
    ) -> Result<EdgePath, GraphError> {
        if let Some(first) = word.first() {
            if self.init(*first) != start {
                return Err(GraphError::MismatchedEndpoints {
                    position: 0,
                    token: self.token(*first),
                });
            }
        }
        self.check_word(word)?;
        let end = word.last().map_or(start, |d| self.term(*d));
        Ok(EdgePath {
            start,
            end,
            edges: free_reduce(word),
        })
    }

    /// Tightens a nonempty word; the start vertex is read from its first token.
    pub fn tighten_word(&self, word: &[OrientedEdge]) -> Result<EdgePath, GraphError> {
        let start = word
            .first()
            .map(|d| self.init(*d))
            .ok_or(GraphError::Empty)?;
        self.tighten_path(start, word)
    }

    /// Builds a path from a word that must already be reduced.
    pub fn path(&self, start: VertexId, word: &[OrientedEdge]) -> Result<EdgePath, GraphError> {
        let p = self.tighten_path(start, word)?;
        debug_assert!(p.len() <= word.len());
        if p.len() != word.len() {
            return Err(GraphError::MismatchedEndpoints {
                position: 0,
                token: "non-reduced".into(),
            });
        }
        Ok(p)
    }

    pub fn parse_path(&self, text: &str) -> Result<EdgePath, GraphError> {
        let w = self.parse_word(text)?;
        self.tighten_word(&w)
    }

    pub fn tighten_circuit(&self, word: &[OrientedEdge]) -> Result<Circuit, GraphError> {
        if word.is_empty() {
            return Err(GraphError::TrivialCircuit);
        }
        self.check_word(word)?;
        if self.term(*word.last().unwrap()) != self.init(word[0]) {
            return Err(GraphError::NotClosed);
        }
        Circuit::from_word(word).ok_or(GraphError::TrivialCircuit)
    }

    pub fn parse_circuit(&self, text: &str) -> Result<Circuit, GraphError> {
        let w = self.parse_word(text)?;
        self.tighten_circuit(&w)
    }

    /// The circuit as a closed path based at the initial vertex of its first token.
    pub fn circuit_path(&self, c: &Circuit) -> EdgePath {
        let start = self.init(c.edges[0]);
        EdgePath {
            start,
            end: start,
            edges: c.edges.clone(),
        }
    }

    pub fn vertices_of(&self, edges: &EdgeSet) -> BTreeSet<VertexId> {
        edges
            .iter()
            .flat_map(|&e| [self.edges[e].init, self.edges[e].term])
            .collect()
    }

    /// Connected components of the subgraph spanned by `edges`, as (vertices, edges).
    pub fn components(&self, edges: &EdgeSet) -> Vec<(BTreeSet<VertexId>, EdgeSet)> {
        let verts = self.vertices_of(edges);
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &v0 in &verts {
            if seen.contains(&v0) {
                continue;
            }
            let mut cv = BTreeSet::new();
            let mut ce = EdgeSet::new();
            let mut queue = VecDeque::from([v0]);
            seen.insert(v0);
            while let Some(v) = queue.pop_front() {
                cv.insert(v);
                for d in &self.star[v] {
                    if !edges.contains(&d.edge()) {
                        continue;
                    }
                    ce.insert(d.edge());
                    let w = self.term(*d);
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
            out.push((cv, ce));
        }
        out
    }

    /// E − V + (number of components) of the subgraph spanned by `edges`.
    pub fn rank_of(&self, edges: &EdgeSet) -> usize {
        let v = self.vertices_of(edges).len();
        let c = self.components(edges).len();
        edges.len() + c - v
    }

    pub fn rank(&self) -> usize {
        let c = self.components(&self.all_edges()).len();
        let isolated = (0..self.vertex_count())
            .filter(|&v| self.star[v].is_empty())
            .count();
        self.edges.len() + c + isolated - self.vertex_count()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_names.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for d in &self.star[v] {
                let w = self.term(*d);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|s| *s)
    }

    /// Breadth-first spanning tree of the component of `root`.
    pub fn spanning_tree(&self, root: VertexId) -> EdgeSet {
        let mut tree = EdgeSet::new();
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            for d in &self.star[v] {
                let w = self.term(*d);
                if !seen[w] {
                    seen[w] = true;
                    tree.insert(d.edge());
                    queue.push_back(w);
                }
            }
        }
        tree
    }

    /// Reduced path inside `tree` from `a` to `b`, if one exists.
    pub fn tree_path(&self, tree: &EdgeSet, a: VertexId, b: VertexId) -> Option<EdgePath> {
        let mut prev: Vec<Option<OrientedEdge>> = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([a]);
        seen[a] = true;
        while let Some(v) = queue.pop_front() {
            if v == b {
                break;
            }
            for d in &self.star[v] {
                if !tree.contains(&d.edge()) {
                    continue;
                }
                let w = self.term(*d);
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = Some(*d);
                    queue.push_back(w);
                }
            }
        }
        if !seen[b] {
            return None;
        }
        let mut word = Vec::new();
        let mut v = b;
        while v != a {
            let d = prev[v].expect("bfs predecessor");
            word.push(d);
            v = self.init(d);
        }
        word.reverse();
        Some(EdgePath {
            start: a,
            end: b,
            edges: word,
        })
    }

    /// Closed paths at the marking root, one per non-tree edge.
    pub fn basis_loops(&self) -> Vec<EdgePath> {
        let (root, tree) = match &self.marking {
            Some(m) => (m.root, m.tree.clone()),
            None => (0, self.spanning_tree(0)),
        };
        self.basis_loops_at(root, &tree)
    }

    pub fn basis_loops_at(&self, root: VertexId, tree: &EdgeSet) -> Vec<EdgePath> {
        let mut out = Vec::new();
        for e in 0..self.edge_count() {
            if tree.contains(&e) {
                continue;
            }
            let d = OrientedEdge::forward(e);
            let (Some(p), Some(q)) = (
                self.tree_path(tree, root, self.init(d)),
                self.tree_path(tree, self.term(d), root),
            ) else {
                continue;
            };
            let mut w = p.edges.clone();
            w.push(d);
            w.extend_from_slice(&q.edges);
            out.push(EdgePath {
                start: root,
                end: root,
                edges: w,
            });
        }
        out
    }

    /// Spanning tree of the component of `root` in the subgraph spanned by `edges`.
    pub fn spanning_tree_in(&self, edges: &EdgeSet, root: VertexId) -> EdgeSet {
        let mut tree = EdgeSet::new();
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            for d in &self.star[v] {
                if !edges.contains(&d.edge()) {
                    continue;
                }
                let w = self.term(*d);
                if !seen[w] {
                    seen[w] = true;
                    tree.insert(d.edge());
                    queue.push_back(w);
                }
            }
        }
        tree
    }

    /// Free basis of π₁ of the component of `root` in the subgraph spanned by `edges`.
    pub fn basis_loops_in(&self, edges: &EdgeSet, root: VertexId) -> Vec<EdgePath> {
        let tree = self.spanning_tree_in(edges, root);
        let comp: BTreeSet<VertexId> = std::iter::once(root)
            .chain(self.vertices_of(&tree))
            .collect();
        let mut out = Vec::new();
        for &e in edges {
            let d = OrientedEdge::forward(e);
            if tree.contains(&e) || !comp.contains(&self.init(d)) {
                continue;
            }
            let p = self
                .tree_path(&tree, root, self.init(d))
                .expect("tree spans component");
            let q = self
                .tree_path(&tree, self.term(d), root)
                .expect("tree spans component");
            let mut w = p.edges;
            w.push(d);
            w.extend_from_slice(&q.edges);
            out.push(EdgePath {
                start: root,
                end: root,
                edges: w,
            });
        }
        out
    }

    pub fn is_core(&self) -> bool {
        core_subgraph(self, &self.all_edges()).len() == self.edge_count()
            && (0..self.vertex_count()).all(|v| !self.star[v].is_empty())
    }

    /// Height of a word with respect to a level function on edges.
    pub fn max_level(word: &[OrientedEdge], level: &[usize]) -> usize {
        word.iter().map(|d| level[d.edge()]).max().unwrap_or(0)
    }
}

/// Free reduction by a single stack pass.
pub fn free_reduce(word: &[OrientedEdge]) -> Vec<OrientedEdge> {
    let mut out: Vec<OrientedEdge> = Vec::with_capacity(word.len());
    for &d in word {
        if out.last() == Some(&d.reverse()) {
            out.pop();
        } else {
            out.push(d);
        }
    }
    out
}

/// Free then cyclic reduction.
pub fn cyclic_reduce(word: &[OrientedEdge]) -> Vec<OrientedEdge> {
    let w = free_reduce(word);
    let mut lo = 0;
    let mut hi = w.len();
    while hi - lo >= 2 && w[lo] == w[hi - 1].reverse() {
        lo += 1;
        hi -= 1;
    }
    w[lo..hi].to_vec()
}

pub fn reverse_word(word: &[OrientedEdge]) -> Vec<OrientedEdge> {
    word.iter().rev().map(|d| d.reverse()).collect()
}

/// Start of the lexicographically least rotation (two-pointer minimum expression).
pub fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = &s[(i + k) % n];
        let b = &s[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j) % n.max(1)
}

/// First occurrence of `needle` in `hay` (Knuth–Morris–Pratt).
pub fn find_subslice<T: Eq>(hay: &[T], needle: &[T]) -> Option<usize> {
    if needle.is_empty() {
        return Some(0);
    }
    if needle.len() > hay.len() {
        return None;
    }
    let mut fail = vec![0usize; needle.len()];
    let mut k = 0;
    for i in 1..needle.len() {
        while k > 0 && needle[i] != needle[k] {
            k = fail[k - 1];
        }
        if needle[i] == needle[k] {
            k += 1;
        }
        fail[i] = k;
    }
    k = 0;
    for (i, h) in hay.iter().enumerate() {
        while k > 0 && *h != needle[k] {
            k = fail[k - 1];
        }
        if *h == needle[k] {
            k += 1;
        }
        if k == needle.len() {
            return Some(i + 1 - k);
        }
    }
    None
}

/// Length of the longest common prefix.
pub fn common_prefix<T: Eq>(a: &[T], b: &[T]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct EdgePath {
    start: VertexId,
    end: VertexId,
    edges: Vec<OrientedEdge>,
}

impl EdgePath {
    pub fn trivial(v: VertexId) -> Self {
        EdgePath {
            start: v,
            end: v,
            edges: Vec::new(),
        }
    }

    /// Unchecked constructor; callers guarantee concatenation and reduction.
    pub(crate) fn from_raw(start: VertexId, end: VertexId, edges: Vec<OrientedEdge>) -> Self {
        EdgePath { start, end, edges }
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn end(&self) -> VertexId {
        self.end
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.start == self.end
    }

    pub fn first(&self) -> Option<OrientedEdge> {
        self.edges.first().copied()
    }

    pub fn last(&self) -> Option<OrientedEdge> {
        self.edges.last().copied()
    }

    pub fn reverse(&self) -> Self {
        EdgePath {
            start: self.end,
            end: self.start,
            edges: reverse_word(&self.edges),
        }
    }

    /// Subpath on edge positions `lo..hi`.
    pub fn slice(&self, g: &MarkedGraph, lo: usize, hi: usize) -> Self {
        let start = if lo < self.edges.len() {
            g.init(self.edges[lo])
        } else {
            self.end
        };
        let end = if hi > 0 {
            g.term(self.edges[hi - 1])
        } else {
            self.start
        };
        if lo >= hi {
            return EdgePath::trivial(start);
        }
        EdgePath {
            start,
            end,
            edges: self.edges[lo..hi].to_vec(),
        }
    }

    /// Concatenation followed by tightening. Panics if endpoints do not match.
    pub fn concat_tight(&self, other: &EdgePath) -> EdgePath {
        assert_eq!(self.end, other.start, "paths do not concatenate");
        let mut w = self.edges.clone();
        w.extend_from_slice(&other.edges);
        EdgePath {
            start: self.start,
            end: other.end,
            edges: free_reduce(&w),
        }
    }

    /// Concatenation when it is already reduced.
    pub fn concat_reduced(&self, other: &EdgePath) -> Option<EdgePath> {
        if self.end != other.start {
            return None;
        }
        if let (Some(a), Some(b)) = (self.last(), other.first()) {
            if a == b.reverse() {
                return None;
            }
        }
        let mut w = self.edges.clone();
        w.extend_from_slice(&other.edges);
        Some(EdgePath {
            start: self.start,
            end: other.end,
            edges: w,
        })
    }

    /// Oriented subpath containment. A trivial path is contained if its vertex is visited.
    pub fn contains(&self, g: &MarkedGraph, other: &EdgePath) -> bool {
        if other.is_empty() {
            return self.start == other.start
                || self.end == other.start
                || self.edges.iter().any(|d| g.term(*d) == other.start);
        }
        find_subslice(&self.edges, &other.edges).is_some()
    }

    /// Containment of `other` or its reverse.
    pub fn contains_unoriented(&self, g: &MarkedGraph, other: &EdgePath) -> bool {
        self.contains(g, other) || self.contains(g, &other.reverse())
    }

    /// Number of crossings of each edge, both orientations.
    pub fn crossing_counts(&self, edge_count: usize) -> Vec<usize> {
        let mut c = vec![0; edge_count];
        for d in &self.edges {
            c[d.edge()] += 1;
        }
        c
    }
}

/// Cyclically reduced word in its least rotation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Circuit {
    edges: Vec<OrientedEdge>,
}

impl Circuit {
    /// Reduces cyclically and canonicalizes; `None` if the word is trivial.
    /// Does not check concatenation; see [`MarkedGraph::tighten_circuit`].
    pub fn from_word(word: &[OrientedEdge]) -> Option<Circuit> {
        let w = cyclic_reduce(word);
        if w.is_empty() {
            return None;
        }
        let k = least_rotation(&w);
        let mut edges = w[k..].to_vec();
        edges.extend_from_slice(&w[..k]);
        Some(Circuit { edges })
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn inverse(&self) -> Circuit {
        Circuit::from_word(&reverse_word(&self.edges)).expect("inverse of a circuit is a circuit")
    }

    /// Key for comparing classes up to inversion.
    pub fn unoriented(&self) -> Circuit {
        let inv = self.inverse();
        if inv < *self {
            inv
        } else {
            self.clone()
        }
    }

    pub fn power(&self, k: usize) -> Circuit {
        let mut w = Vec::with_capacity(self.len() * k);
        for _ in 0..k {
            w.extend_from_slice(&self.edges);
        }
        Circuit::from_word(&w).expect("positive power of a circuit")
    }

    /// True iff the cyclic word is not a proper power.
    pub fn is_root_free(&self) -> bool {
        self.root().1 == 1
    }

    /// Root circuit and exponent.
    pub fn root(&self) -> (Circuit, usize) {
        let n = self.edges.len();
        for p in 1..n {
            if n % p == 0 && (0..n).all(|i| self.edges[i] == self.edges[i % p]) {
                return (
                    Circuit {
                        edges: self.edges[..p].to_vec(),
                    },
                    n / p,
                );
            }
        }
        (self.clone(), 1)
    }

    /// Whether `word` occurs as a cyclic subword.
    pub fn contains_cyclic(&self, word: &[OrientedEdge]) -> bool {
        if word.is_empty() {
            return true;
        }
        let mut hay = self.edges.clone();
        while hay.len() < self.edges.len() + word.len() - 1 {
            hay.extend_from_slice(&self.edges);
        }
        hay.extend_from_slice(&self.edges);
        find_subslice(&hay, word).is_some()
    }
}

/// Unordered pair of directions at a common vertex, stored sorted.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Turn {
    pub first: OrientedEdge,
    pub second: OrientedEdge,
}

impl Turn {
    pub fn new(g: &MarkedGraph, a: OrientedEdge, b: OrientedEdge) -> Result<Turn, GraphError> {
        if g.init(a) != g.init(b) {
            return Err(GraphError::TurnVertexMismatch);
        }
        Ok(Turn::unchecked(a, b))
    }

    pub(crate) fn unchecked(a: OrientedEdge, b: OrientedEdge) -> Turn {
        if a <= b {
            Turn {
                first: a,
                second: b,
            }
        } else {
            Turn {
                first: b,
                second: a,
            }
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.first == self.second
    }

    /// Turns taken by a path: {reverse of edge i, edge i+1}.
    pub fn taken_by(word: &[OrientedEdge]) -> impl Iterator<Item = (usize, Turn)> + '_ {
        word.windows(2)
            .enumerate()
            .map(|(i, w)| (i + 1, Turn::unchecked(w[0].reverse(), w[1])))
    }

    /// Turns taken by a closed word including the wrap-around turn at position 0.
    pub fn taken_cyclic(word: &[OrientedEdge]) -> Vec<(usize, Turn)> {
        let n = word.len();
        (0..n)
            .map(|i| (i, Turn::unchecked(word[(i + n - 1) % n].reverse(), word[i])))
            .collect()
    }
}

/// `core(H)`: repeatedly removes edges at valence-one vertices.
pub fn core_subgraph(g: &MarkedGraph, h: &EdgeSet) -> EdgeSet {
    let mut edges = h.clone();
    let mut valence = vec![0usize; g.vertex_count()];
    for &e in &edges {
        valence[g.edges[e].init] += 1;
        valence[g.edges[e].term] += 1;
    }
    let mut stack: Vec<VertexId> = (0..g.vertex_count()).filter(|&v| valence[v] == 1).collect();
    while let Some(v) = stack.pop() {
        if valence[v] != 1 {
            continue;
        }
        let d = g.star[v]
            .iter()
            .find(|d| edges.contains(&d.edge()))
            .copied()
            .expect("valence one");
        edges.remove(&d.edge());
        let w = g.term(d);
        valence[v] -= 1;
        valence[w] -= 1;
        if valence[w] == 1 {
            stack.push(w);
        }
    }
    edges
}

/// Depth-first enumeration of reduced paths of length `1..=max_len` from
/// `start`, restricted to edges accepted by `allowed`. `visit` returns
/// `false` to prune extensions of the current path.
pub fn for_each_reduced_path(
    g: &MarkedGraph,
    start: VertexId,
    max_len: usize,
    allowed: &dyn Fn(EdgeId) -> bool,
    visit: &mut dyn FnMut(&[OrientedEdge]) -> bool,
) {
    fn go(
        g: &MarkedGraph,
        v: VertexId,
        max_len: usize,
        allowed: &dyn Fn(EdgeId) -> bool,
        visit: &mut dyn FnMut(&[OrientedEdge]) -> bool,
        word: &mut Vec<OrientedEdge>,
    ) {
        if word.len() == max_len {
            return;
        }
        for &d in g.directions_at(v) {
            if !allowed(d.edge()) || word.last() == Some(&d.reverse()) {
                continue;
            }
            word.push(d);
            if visit(word) {
                go(g, g.term(d), max_len, allowed, visit, word);
            }
            word.pop();
        }
    }
    let mut word = Vec::new();
    go(g, start, max_len, allowed, visit, &mut word);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rose2() -> MarkedGraph {
        MarkedGraph::rose(&["a", "b"])
    }

    fn naive_reduce(word: &[OrientedEdge]) -> Vec<OrientedEdge> {
        let mut w = word.to_vec();
        'scan: loop {
            for i in 0..w.len().saturating_sub(1) {
                if w[i] == w[i + 1].reverse() {
                    w.drain(i..i + 2);
                    continue 'scan;
                }
            }
            return w;
        }
    }

    #[test]
    fn tighten_examples() {
        let g = rose2();
        assert_eq!(g.format_word(g.parse_path("a ~a b").unwrap().edges()), "b");
        let p = g.parse_path("a ~a").unwrap();
        assert!(p.is_empty());
        assert_eq!(p.start(), 0);
        assert_eq!(
            g.format_word(g.parse_path("b a ~a ~b a").unwrap().edges()),
            "a"
        );
    }

    #[test]
    fn mismatched_endpoints() {
        let g = MarkedGraph::new(&["u", "v"], &[("a", "u", "v"), ("b", "u", "v")]).unwrap();
        let w = g.parse_word("a a").unwrap();
        assert!(matches!(
            g.tighten_word(&w),
            Err(GraphError::MismatchedEndpoints { position: 1, .. })
        ));
    }

    #[test]
    fn circuit_examples() {
        let g = rose2();
        assert_eq!(
            g.parse_circuit("a b ~b").unwrap(),
            g.parse_circuit("a").unwrap()
        );
        assert_eq!(
            g.parse_circuit("b a").unwrap(),
            g.parse_circuit("a b").unwrap()
        );
        assert_eq!(
            g.format_word(g.parse_circuit("b a").unwrap().edges()),
            "a b"
        );
        assert_eq!(g.parse_circuit("a ~a"), Err(GraphError::TrivialCircuit));
        assert_eq!(
            g.format_word(g.parse_circuit("~b a b ~a a").unwrap().edges()),
            "a"
        );
    }

    #[test]
    fn root_free_examples() {
        let g = rose2();
        assert!(g.parse_circuit("a b").unwrap().is_root_free());
        assert!(!g.parse_circuit("a b a b").unwrap().is_root_free());
        assert!(g.parse_circuit("a b a ~b").unwrap().is_root_free());
        let (r, k) = g.parse_circuit("b a b a b a").unwrap().root();
        assert_eq!((g.format_word(r.edges()), k), ("a b".to_string(), 3));
    }

    #[test]
    fn core_examples() {
        let g = MarkedGraph::new(
            &["v", "w", "x"],
            &[("a", "v", "v"), ("e", "v", "w"), ("t", "w", "x")],
        )
        .unwrap();
        let a = g.edge_id("a").unwrap();
        let e = g.edge_id("e").unwrap();
        let t = g.edge_id("t").unwrap();
        assert_eq!(core_subgraph(&g, &[a].into()), EdgeSet::from([a]));
        assert!(core_subgraph(&g, &[e, t].into()).is_empty());
        assert_eq!(core_subgraph(&g, &[a, e].into()), EdgeSet::from([a]));
        assert_eq!(g.rank_of(&[a, e, t].into()), 1);
        assert!(!g.is_core());
    }

    #[test]
    fn least_rotation_matches_naive() {
        let cases: Vec<Vec<u8>> = vec![
            vec![3, 1, 2, 1, 2],
            vec![1, 1, 1],
            vec![2, 1],
            vec![5],
            vec![1, 2, 1, 1, 2, 1, 1],
        ];
        for s in cases {
            let n = s.len();
            let naive = (0..n)
                .min_by_key(|&k| {
                    let mut r = s[k..].to_vec();
                    r.extend_from_slice(&s[..k]);
                    r
                })
                .unwrap();
            let k = least_rotation(&s);
            let rot = |k: usize| {
                let mut r = s[k..].to_vec();
                r.extend_from_slice(&s[..k]);
                r
            };
            assert_eq!(rot(k), rot(naive));
        }
    }

    #[test]
    fn marking_rank() {
        let g = MarkedGraph::new(
            &["v", "w"],
            &[("a", "v", "v"), ("e", "v", "w"), ("b", "w", "w")],
        )
        .unwrap()
        .marked()
        .unwrap();
        assert_eq!(g.marking().unwrap().rank, 2);
        assert_eq!(g.basis_loops().len(), 2);
        for l in g.basis_loops() {
            assert!(l.is_closed());
            g.check_word(l.edges()).unwrap();
        }
    }

    fn token_strategy(rank: usize) -> impl Strategy<Value = OrientedEdge> {
        (0..rank, any::<bool>()).prop_map(|(e, r)| OrientedEdge::new(e, r))
    }

    proptest! {
        #[test]
        fn tighten_matches_naive(word in prop::collection::vec(token_strategy(3), 0..20)) {
            let g = MarkedGraph::rose(&["a", "b", "c"]);
            let p = g.tighten_path(0, &word).unwrap();
            prop_assert_eq!(p.edges(), &naive_reduce(&word)[..]);
            let again = g.tighten_path(0, p.edges()).unwrap();
            prop_assert_eq!(&again, &p);
            prop_assert!(p.len() <= word.len());
        }

        #[test]
        fn circuit_rotation_invariant(word in prop::collection::vec(token_strategy(2), 1..16), k in 0usize..16) {
            let g = rose2();
            let k = k % word.len();
            let mut rot = word[k..].to_vec();
            rot.extend_from_slice(&word[..k]);
            prop_assert_eq!(g.tighten_circuit(&word).ok(), g.tighten_circuit(&rot).ok());
        }

        #[test]
        fn core_idempotent(mask in prop::collection::vec(any::<bool>(), 6)) {
            let g = MarkedGraph::new(
                &["u", "v", "w", "x"],
                &[("a", "u", "u"), ("b", "u", "v"), ("c", "v", "w"), ("d", "w", "u"), ("e", "w", "x"), ("f", "x", "x")],
            ).unwrap();
            let h: EdgeSet = mask.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i).collect();
            let c = core_subgraph(&g, &h);
            prop_assert_eq!(&core_subgraph(&g, &c), &c);
            let noncontractible: EdgeSet = g.components(&h).into_iter()
                .filter(|(v, e)| e.len() + 1 > v.len())
                .flat_map(|(_, e)| e)
                .collect();
            prop_assert_eq!(g.rank_of(&c), g.rank_of(&noncontractible));
        }
    }
}
