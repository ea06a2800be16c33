//! Stallings graphs over an ambient graph: folding, carrying, fiber
//! products, malnormality and meets of subgraph systems.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::graphs::Circuit;
use crate::graphs::{
    core_subgraph, EdgePath, EdgeSet, GraphError, MarkedGraph, OrientedEdge, VertexId,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StallingsError {
    #[error("generator does not start and end at the base vertex")]
    NotBasedLoop,
    #[error("systems live over different ambient graphs")]
    AmbientMismatch,
    #[error("meets are only computed for subgraph systems")]
    UnsupportedRepresentation,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Incremental folding with union-find. Half-edges are stored per vertex as
/// `label -> target`; a collision identifies the two targets.
#[derive(Clone, Debug, Default)]
pub(crate) struct Folder {
    parent: Vec<usize>,
    image: Vec<VertexId>,
    out: Vec<BTreeMap<OrientedEdge, usize>>,
    pending: Vec<(usize, usize)>,
}

impl Folder {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add_vertex(&mut self, image: VertexId) -> usize {
        self.parent.push(self.parent.len());
        self.image.push(image);
        self.out.push(BTreeMap::new());
        self.parent.len() - 1
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn attach(&mut self, u: usize, label: OrientedEdge, v: usize) {
        let u = self.find(u);
        match self.out[u].get(&label).copied() {
            Some(w) => self.pending.push((v, w)),
            None => {
                self.out[u].insert(label, v);
            }
        }
    }

    /// Adds an edge `u -> v` labeled `label` and folds to completion.
    pub(crate) fn add_edge(&mut self, u: usize, v: usize, label: OrientedEdge) {
        self.attach(u, label, v);
        self.attach(v, label.reverse(), u);
        self.drain();
    }

    /// Identifies two vertices with the same image and folds to completion.
    pub(crate) fn merge(&mut self, u: usize, v: usize) {
        self.pending.push((u, v));
        self.drain();
    }

    /// Reads a path labeled by `word` from `u`, creating vertices as needed,
    /// and ending at `v`.
    pub(crate) fn add_path(&mut self, g: &MarkedGraph, u: usize, v: usize, word: &[OrientedEdge]) {
        let mut cur = u;
        for (i, d) in word.iter().enumerate() {
            let next = if i + 1 == word.len() {
                v
            } else {
                self.add_vertex(g.term(*d))
            };
            self.add_edge(cur, next, *d);
            cur = self.find(next);
        }
    }

    fn drain(&mut self) {
        while let Some((x, y)) = self.pending.pop() {
            let x = self.find(x);
            let y = self.find(y);
            if x == y {
                continue;
            }
            debug_assert_eq!(self.image[x], self.image[y]);
            let (keep, drop) = if x < y { (x, y) } else { (y, x) };
            self.parent[drop] = keep;
            let moved = std::mem::take(&mut self.out[drop]);
            for (label, t) in moved {
                match self.out[keep].get(&label).copied() {
                    Some(w) => self.pending.push((t, w)),
                    None => {
                        self.out[keep].insert(label, t);
                    }
                }
            }
        }
    }

    /// Number of edges currently represented.
    pub(crate) fn edge_count(&mut self) -> usize {
        let mut n = 0;
        for v in 0..self.parent.len() {
            if self.find(v) == v {
                n += self.out[v].len();
            }
        }
        n / 2
    }

    /// Compacts into an immersion, keeping all live vertices.
    pub(crate) fn finish(
        mut self,
        ambient: Arc<MarkedGraph>,
        base: Option<usize>,
    ) -> CoreImmersion {
        let mut index = BTreeMap::new();
        let mut vertex_image = Vec::new();
        for v in 0..self.parent.len() {
            if self.find(v) == v {
                index.insert(v, vertex_image.len());
                vertex_image.push(self.image[v]);
            }
        }
        let mut edges = Vec::new();
        for v in 0..self.parent.len() {
            if self.find(v) != v {
                continue;
            }
            let targets: Vec<(OrientedEdge, usize)> =
                self.out[v].iter().map(|(l, t)| (*l, *t)).collect();
            for (label, t) in targets {
                if label.is_reversed() {
                    continue;
                }
                let t = self.find(t);
                edges.push((index[&v], index[&t], label));
            }
        }
        let base = base.map(|b| {
            let b = self.find(b);
            index[&b]
        });
        CoreImmersion::build(ambient, vertex_image, edges, base)
    }
}

/// A folded labeled graph immersing into the ambient graph. Edges are
/// stored with forward labels.
#[derive(Clone, Debug)]
pub struct CoreImmersion {
    ambient: Arc<MarkedGraph>,
    vertex_image: Vec<VertexId>,
    edges: Vec<(usize, usize, OrientedEdge)>,
    out: Vec<BTreeMap<OrientedEdge, usize>>,
    base: Option<usize>,
}

impl CoreImmersion {
    fn build(
        ambient: Arc<MarkedGraph>,
        vertex_image: Vec<VertexId>,
        mut edges: Vec<(usize, usize, OrientedEdge)>,
        base: Option<usize>,
    ) -> Self {
        edges.sort();
        let mut out = vec![BTreeMap::new(); vertex_image.len()];
        for &(u, v, l) in &edges {
            let prev = out[u].insert(l, v);
            debug_assert!(prev.is_none(), "not folded");
            let prev = out[v].insert(l.reverse(), u);
            debug_assert!(prev.is_none(), "not folded");
        }
        CoreImmersion {
            ambient,
            vertex_image,
            edges,
            out,
            base,
        }
    }

    /// Folded wedge of closed paths at `base`, trimmed to the core plus the base.
    pub fn from_generators(
        ambient: Arc<MarkedGraph>,
        base: VertexId,
        loops: &[EdgePath],
    ) -> Result<Self, StallingsError> {
        let mut folder = Folder::new();
        let b = folder.add_vertex(base);
        for l in loops {
            if l.start() != base || l.end() != base {
                return Err(StallingsError::NotBasedLoop);
            }
            if l.is_empty() {
                continue;
            }
            let b_now = folder.find(b);
            folder.add_path(&ambient, b_now, b_now, l.edges());
        }
        Ok(folder.finish(ambient, Some(b)).trimmed())
    }

    /// Unbased core of the cyclic subgroup carried by `c`.
    pub fn from_circuit(ambient: Arc<MarkedGraph>, c: &Circuit) -> Self {
        let p = ambient.circuit_path(c);
        Self::from_generators(ambient, p.start(), &[p])
            .expect("closed path")
            .unbased()
    }

    /// Core immersion of a connected subgraph by inclusion.
    pub fn from_connected_subgraph(ambient: Arc<MarkedGraph>, edges: &EdgeSet) -> Self {
        let verts: Vec<VertexId> = ambient.vertices_of(edges).into_iter().collect();
        let index: BTreeMap<VertexId, usize> =
            verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let list = edges
            .iter()
            .map(|&e| {
                let r = &ambient.edges()[e];
                (index[&r.init], index[&r.term], OrientedEdge::forward(e))
            })
            .collect();
        Self::build(ambient, verts, list, None).trimmed()
    }

    pub fn ambient(&self) -> &Arc<MarkedGraph> {
        &self.ambient
    }

    pub fn base(&self) -> Option<usize> {
        self.base
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_image.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize, OrientedEdge)] {
        &self.edges
    }

    pub fn vertex_image(&self, v: usize) -> VertexId {
        self.vertex_image[v]
    }

    /// Rank of the (connected) graph.
    pub fn rank(&self) -> usize {
        if self.vertex_image.is_empty() {
            return 0;
        }
        (self.edges.len() + 1).saturating_sub(self.vertex_image.len())
    }

    pub fn is_trivial(&self) -> bool {
        self.rank() == 0
    }

    /// Drops the base and trims to the core.
    pub fn unbased(&self) -> Self {
        let mut c = self.clone();
        c.base = None;
        c.trimmed()
    }

    /// Removes valence-one vertices other than the base, repeatedly.
    fn trimmed(self) -> Self {
        let n = self.vertex_image.len();
        let mut alive = vec![true; n];
        let mut deg: Vec<usize> = self.out.iter().map(|o| o.len()).collect();
        let mut stack: Vec<usize> = (0..n)
            .filter(|&v| deg[v] <= 1 && Some(v) != self.base)
            .collect();
        while let Some(v) = stack.pop() {
            if !alive[v] || deg[v] > 1 || Some(v) == self.base {
                continue;
            }
            alive[v] = false;
            for (_, &t) in &self.out[v] {
                if alive[t] && t != v {
                    deg[t] -= 1;
                    if deg[t] <= 1 {
                        stack.push(t);
                    }
                }
            }
        }
        let mut index = vec![usize::MAX; n];
        let mut images = Vec::new();
        for v in 0..n {
            if alive[v] {
                index[v] = images.len();
                images.push(self.vertex_image[v]);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|(u, v, _)| alive[*u] && alive[*v])
            .map(|&(u, v, l)| (index[u], index[v], l))
            .collect();
        let base = self.base.map(|b| index[b]);
        Self::build(self.ambient, images, edges, base)
    }

    /// Follows `word` from `v`.
    pub fn read(&self, v: usize, word: &[OrientedEdge]) -> Option<usize> {
        let mut cur = v;
        for d in word {
            cur = *self.out[cur].get(d)?;
        }
        Some(cur)
    }

    /// Membership of a closed path at the ambient base in the based subgroup.
    pub fn contains_element(&self, word: &[OrientedEdge]) -> bool {
        let b = self.base.expect("based immersion");
        self.read(b, word) == Some(b)
    }

    /// Whether the circuit itself is conjugate into the subgroup.
    pub fn contains_class(&self, c: &Circuit) -> bool {
        (0..self.vertex_count()).any(|v| self.read(v, c.edges()) == Some(v))
    }

    /// Whether some positive power of the circuit is conjugate into the subgroup.
    /// Reading `c` is a partial map on vertices; a power closes up iff it has a periodic point.
    pub fn carries_power(&self, c: &Circuit) -> bool {
        let n = self.vertex_count();
        let step: Vec<Option<usize>> = (0..n).map(|v| self.read(v, c.edges())).collect();
        for v in 0..n {
            let mut cur = v;
            for _ in 0..n {
                match step[cur] {
                    Some(w) => cur = w,
                    None => break,
                }
                if cur == v {
                    return true;
                }
            }
        }
        false
    }

    /// Breadth-first code from `root`; equal codes iff based isomorphism.
    fn code_from(&self, root: usize) -> Vec<u64> {
        let mut num = vec![u64::MAX; self.vertex_count()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([root]);
        num[root] = 0;
        let mut next = 1;
        let mut code = vec![self.vertex_image[root] as u64];
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for (label, &t) in &self.out[v] {
                if num[t] == u64::MAX {
                    num[t] = next;
                    next += 1;
                    queue.push_back(t);
                }
                code.push(label.index() as u64);
                code.push(num[t]);
            }
            code.push(u64::MAX);
        }
        code
    }

    /// Canonical code: based code if based, else minimum over all basings.
    pub fn canonical_code(&self) -> Vec<u64> {
        match self.base {
            Some(b) => self.code_from(b),
            None => (0..self.vertex_count())
                .map(|v| self.code_from(v))
                .min()
                .unwrap_or_default(),
        }
    }

    pub fn is_isomorphic(&self, other: &CoreImmersion) -> bool {
        self.canonical_code() == other.canonical_code()
    }

    /// A nontrivial circuit carried by this graph, if any.
    pub fn witness_circuit(&self) -> Option<Circuit> {
        if self.edges.is_empty() {
            return None;
        }
        let n = self.vertex_count();
        let root = self.base.unwrap_or(self.edges[0].0);
        let mut adj: Vec<Vec<(usize, usize, OrientedEdge)>> = vec![Vec::new(); n];
        for (i, &(u, v, l)) in self.edges.iter().enumerate() {
            adj[u].push((i, v, l));
            adj[v].push((i, u, l.reverse()));
        }
        let mut prev: Vec<Option<(usize, OrientedEdge)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        let mut tree = BTreeSet::new();
        while let Some(v) = queue.pop_front() {
            for &(i, t, l) in &adj[v] {
                if !seen[t] {
                    seen[t] = true;
                    prev[t] = Some((v, l));
                    tree.insert(i);
                    queue.push_back(t);
                }
            }
        }
        let path_to = |mut v: usize| {
            let mut w = Vec::new();
            while let Some((u, l)) = prev[v] {
                w.push(l);
                v = u;
            }
            w.reverse();
            w
        };
        for (i, &(u, v, l)) in self.edges.iter().enumerate() {
            if tree.contains(&i) || !seen[u] {
                continue;
            }
            let mut w = path_to(u);
            w.push(l);
            w.extend(crate::graphs::reverse_word(&path_to(v)));
            if let Some(c) = Circuit::from_word(&w) {
                return Some(c);
            }
        }
        None
    }

    /// Tokens of the labeled edge list, for serialization.
    pub fn labeled_edges(&self) -> Vec<(usize, usize, String)> {
        self.edges
            .iter()
            .map(|(u, v, l)| (*u, *v, self.ambient.token(*l)))
            .collect()
    }

    /// Whether this based immersion covers the ambient component with degree one.
    pub fn is_full(&self) -> bool {
        let b = match self.base {
            Some(b) => b,
            None => return false,
        };
        let full = CoreImmersion::from_generators(
            self.ambient.clone(),
            self.vertex_image[b],
            &self.ambient.basis_loops_at(
                self.vertex_image[b],
                &self.ambient.spanning_tree(self.vertex_image[b]),
            ),
        )
        .expect("basis loops are based");
        self.is_isomorphic(&full)
    }
}

/// Fiber product components: (component, contains the pair of bases).
pub fn fiber_product(a: &CoreImmersion, b: &CoreImmersion) -> Vec<(CoreImmersion, bool)> {
    let mut pairs: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut images = Vec::new();
    let mut id = |p: (usize, usize), img: VertexId, images: &mut Vec<VertexId>| -> usize {
        *pairs.entry(p).or_insert_with(|| {
            images.push(img);
            images.len() - 1
        })
    };
    let mut edges = Vec::new();
    let mut by_label: BTreeMap<OrientedEdge, Vec<(usize, usize)>> = BTreeMap::new();
    for &(u, v, l) in &b.edges {
        by_label.entry(l).or_default().push((u, v));
    }
    for &(u, v, l) in &a.edges {
        if let Some(list) = by_label.get(&l) {
            for &(x, y) in list {
                let s = id((u, x), a.vertex_image[u], &mut images);
                let t = id((v, y), a.vertex_image[v], &mut images);
                edges.push((s, t, l));
            }
        }
    }
    let base_pair = match (a.base, b.base) {
        (Some(p), Some(q)) if a.vertex_image[p] == b.vertex_image[q] => {
            Some(id((p, q), a.vertex_image[p], &mut images))
        }
        _ => None,
    };
    // connected components of the product graph
    let n = images.len();
    let mut adj = vec![Vec::new(); n];
    for (i, &(s, t, _)) in edges.iter().enumerate() {
        adj[s].push(i);
        adj[t].push(i);
    }
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let c = out.len();
        let mut verts = Vec::new();
        let mut stack = vec![start];
        comp[start] = c;
        while let Some(v) = stack.pop() {
            verts.push(v);
            for &i in &adj[v] {
                let (s, t, _) = edges[i];
                for w in [s, t] {
                    if comp[w] == usize::MAX {
                        comp[w] = c;
                        stack.push(w);
                    }
                }
            }
        }
        verts.sort();
        let local: BTreeMap<usize, usize> =
            verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let es = edges
            .iter()
            .filter(|(s, _, _)| comp[*s] == c)
            .map(|&(s, t, l)| (local[&s], local[&t], l))
            .collect();
        let vi = verts.iter().map(|v| images[*v]).collect();
        let has_base = base_pair.map_or(false, |bp| comp[bp] == c);
        let base = if has_base {
            base_pair.map(|bp| local[&bp])
        } else {
            None
        };
        out.push((
            CoreImmersion::build(a.ambient.clone(), vi, es, base),
            has_base,
        ));
    }
    out
}

/// Finite set of conjugacy classes of nontrivial finitely generated subgroups.
#[derive(Clone, Debug, Default)]
pub struct SubgroupSystem {
    components: Vec<CoreImmersion>,
}

impl SubgroupSystem {
    /// Keeps nontrivial components as unbased cores, in the given order.
    pub fn new(components: Vec<CoreImmersion>) -> Self {
        let components = components
            .into_iter()
            .map(|c| c.unbased())
            .filter(|c| !c.is_trivial())
            .collect();
        SubgroupSystem { components }
    }

    pub fn components(&self) -> &[CoreImmersion] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Sorted, deduplicated canonical codes; equal systems have equal keys.
    pub fn canonical_key(&self) -> Vec<Vec<u64>> {
        let mut k: Vec<Vec<u64>> = self.components.iter().map(|c| c.canonical_code()).collect();
        k.sort();
        k.dedup();
        k
    }

    /// A pair of conjugate components, if any.
    pub fn duplicate_pair(&self) -> Option<(usize, usize)> {
        for i in 0..self.components.len() {
            for j in i + 1..self.components.len() {
                if self.components[i].is_isomorphic(&self.components[j]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn max_rank(&self) -> usize {
        self.components.iter().map(|c| c.rank()).max().unwrap_or(0)
    }
}

/// One component per noncontractible component of `h`.
pub fn from_subgraph(g: &Arc<MarkedGraph>, h: &EdgeSet) -> SubgroupSystem {
    let core = core_subgraph(g, h);
    let comps = g
        .components(&core)
        .into_iter()
        .map(|(_, es)| CoreImmersion::from_connected_subgraph(g.clone(), &es))
        .collect();
    SubgroupSystem::new(comps)
}

/// Some power of `c` is conjugate into some component.
pub fn carries_class(k: &SubgroupSystem, c: &Circuit) -> bool {
    k.components.iter().any(|comp| comp.carries_power(c))
}

/// Noncontractible cores of the fiber product.
pub fn intersect_components(a: &CoreImmersion, b: &CoreImmersion) -> SubgroupSystem {
    SubgroupSystem::new(fiber_product(a, b).into_iter().map(|(c, _)| c).collect())
}

#[derive(Clone, Debug)]
pub struct MalnormalReport {
    pub malnormal: bool,
    pub witness: Option<Circuit>,
    pub components: Option<(usize, usize)>,
}

pub fn is_malnormal(k: &SubgroupSystem) -> MalnormalReport {
    let cs = &k.components;
    for i in 0..cs.len() {
        for j in i..cs.len() {
            let mut a = cs[i].clone();
            let mut b = cs[j].clone();
            if i == j {
                // based at the same vertex so that the diagonal is the based component
                a.base = Some(0);
                b.base = Some(0);
            }
            for (comp, diagonal) in fiber_product(&a, &b) {
                if i == j && diagonal {
                    continue;
                }
                let core = comp.unbased();
                if !core.is_trivial() {
                    return MalnormalReport {
                        malnormal: false,
                        witness: core.witness_circuit(),
                        components: Some((i, j)),
                    };
                }
            }
        }
    }
    MalnormalReport {
        malnormal: true,
        witness: None,
        components: None,
    }
}

/// Label-preserving graph morphism `a -> b`, searched from each compatible start.
fn has_morphism(a: &CoreImmersion, b: &CoreImmersion) -> bool {
    if a.vertex_count() == 0 {
        return true;
    }
    let a0 = 0;
    'starts: for b0 in 0..b.vertex_count() {
        if a.vertex_image[a0] != b.vertex_image[b0] {
            continue;
        }
        let mut map = vec![usize::MAX; a.vertex_count()];
        map[a0] = b0;
        let mut queue = VecDeque::from([a0]);
        while let Some(v) = queue.pop_front() {
            for (l, &t) in &a.out[v] {
                let Some(&bt) = b.out[map[v]].get(l) else {
                    continue 'starts;
                };
                if map[t] == usize::MAX {
                    map[t] = bt;
                    queue.push_back(t);
                } else if map[t] != bt {
                    continue 'starts;
                }
            }
        }
        if map.iter().all(|m| *m != usize::MAX) {
            return true;
        }
    }
    false
}

/// `k1 ⊑ k2`: every component of `k1` is conjugate into a component of `k2`.
pub fn carries_system(k1: &SubgroupSystem, k2: &SubgroupSystem) -> bool {
    k1.components
        .iter()
        .all(|a| k2.components.iter().any(|b| has_morphism(a, b)))
}

/// Meet of two subgraph systems: `[π₁ core(H1 ∩ H2)]`, checked against both.
pub fn meet_subgraph_systems(
    g: &Arc<MarkedGraph>,
    h1: &EdgeSet,
    h2: &EdgeSet,
) -> Result<SubgroupSystem, StallingsError> {
    let both: EdgeSet = h1.intersection(h2).copied().collect();
    let meet = from_subgraph(g, &both);
    debug_assert!(carries_system(&meet, &from_subgraph(g, h1)));
    debug_assert!(carries_system(&meet, &from_subgraph(g, h2)));
    Ok(meet)
}
