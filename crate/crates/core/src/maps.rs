//! Topological representatives `f: G -> G` and the path operators built on them.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::graphs::{
    common_prefix, free_reduce, reverse_word, Circuit, EdgePath, GraphError, MarkedGraph,
    OrientedEdge, Turn, VertexId,
};
use crate::stallings::{CoreImmersion, Folder};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("maps act on different graphs")]
    DomainMismatch,
    #[error("image of the circuit is homotopically trivial")]
    ImageCollapsed,
    #[error("edges with trivial image: {0:?}")]
    CollapsedEdge(Vec<String>),
    #[error("map is not a homotopy equivalence")]
    NotHomotopyEquivalence,
    #[error("image of edge `{edge}` is invalid: {reason}")]
    BadImage { edge: String, reason: String },
    #[error("no image given for vertex `{0}`")]
    UnresolvedVertex(String),
    #[error("budget exhausted: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Work budget for searches that have no a priori bound.
pub const DEFAULT_SEARCH_BUDGET: usize = 200_000;

#[derive(Clone, Debug)]
pub struct GraphMap {
    graph: Arc<MarkedGraph>,
    vertex_map: Vec<VertexId>,
    images: Vec<EdgePath>,
    dmap: OnceLock<Result<DirectionMap, MapError>>,
    bcc: OnceLock<Result<usize, MapError>>,
}

impl PartialEq for GraphMap {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph
            && self.vertex_map == other.vertex_map
            && self.images == other.images
    }
}

impl GraphMap {
    /// Builds a map from edge image words, tightening them. Vertex images are
    /// read off nontrivial edge images unless given explicitly. Returns the
    /// names of edges whose images had to be tightened.
    pub fn new(
        graph: Arc<MarkedGraph>,
        vertex_map: Option<Vec<VertexId>>,
        words: Vec<Vec<OrientedEdge>>,
    ) -> Result<(Self, Vec<String>), MapError> {
        let vm = match vertex_map {
            Some(v) => v.into_iter().map(Some).collect(),
            None => vec![None; graph.vertex_count()],
        };
        Self::with_partial_vertices(graph, vm, words)
    }

    /// As [`GraphMap::new`], with only some vertex images prescribed.
    pub fn with_partial_vertices(
        graph: Arc<MarkedGraph>,
        mut vm: Vec<Option<VertexId>>,
        words: Vec<Vec<OrientedEdge>>,
    ) -> Result<(Self, Vec<String>), MapError> {
        assert_eq!(words.len(), graph.edge_count(), "one image per edge");
        assert_eq!(vm.len(), graph.vertex_count(), "one slot per vertex");
        let mut set = |v: VertexId, w: VertexId, edge: &str| -> Result<(), MapError> {
            match vm[v] {
                Some(x) if x != w => Err(MapError::BadImage {
                    edge: edge.to_string(),
                    reason: format!(
                        "vertex `{}` would map to two vertices",
                        graph.vertex_name(v)
                    ),
                }),
                _ => {
                    vm[v] = Some(w);
                    Ok(())
                }
            }
        };
        let mut tightened = Vec::new();
        let mut images = Vec::new();
        for (e, w) in words.iter().enumerate() {
            let name = graph.edge_name(e).to_string();
            graph.check_word(w).map_err(|err| MapError::BadImage {
                edge: name.clone(),
                reason: err.to_string(),
            })?;
            let rec = &graph.edges()[e];
            if let (Some(first), Some(last)) = (w.first(), w.last()) {
                set(rec.init, graph.init(*first), &name)?;
                set(rec.term, graph.term(*last), &name)?;
            }
            let red = free_reduce(w);
            if red.len() != w.len() {
                tightened.push(name);
            }
            images.push(red);
        }
        let mut vertex_map = Vec::new();
        for (v, m) in vm.iter().enumerate() {
            vertex_map.push(
                m.ok_or_else(|| MapError::UnresolvedVertex(graph.vertex_name(v).to_string()))?,
            );
        }
        let mut paths = Vec::new();
        for (e, w) in images.into_iter().enumerate() {
            let rec = &graph.edges()[e];
            let p = graph.tighten_path(vertex_map[rec.init], &w)?;
            if p.end() != vertex_map[rec.term] {
                return Err(MapError::BadImage {
                    edge: graph.edge_name(e).to_string(),
                    reason: "image does not end at the image of the terminal vertex".into(),
                });
            }
            paths.push(p);
        }
        Ok((Self::from_paths(graph, vertex_map, paths), tightened))
    }

    pub(crate) fn from_paths(
        graph: Arc<MarkedGraph>,
        vertex_map: Vec<VertexId>,
        images: Vec<EdgePath>,
    ) -> Self {
        GraphMap {
            graph,
            vertex_map,
            images,
            dmap: OnceLock::new(),
            bcc: OnceLock::new(),
        }
    }

    /// Convenience constructor from `(edge, image)` token strings.
    pub fn from_strs(graph: Arc<MarkedGraph>, rules: &[(&str, &str)]) -> Result<Self, MapError> {
        let mut words = vec![None; graph.edge_count()];
        for (e, img) in rules {
            let id = graph.edge_id(e)?;
            words[id] = Some(graph.parse_word(img)?);
        }
        let words = words
            .into_iter()
            .enumerate()
            .map(|(e, w)| {
                w.ok_or_else(|| MapError::BadImage {
                    edge: graph.edge_name(e).into(),
                    reason: "missing".into(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(graph, None, words)?.0)
    }

    pub fn identity(graph: Arc<MarkedGraph>) -> Self {
        let images = (0..graph.edge_count())
            .map(|e| {
                let d = OrientedEdge::forward(e);
                EdgePath::from_raw(graph.init(d), graph.term(d), vec![d])
            })
            .collect();
        let vm = (0..graph.vertex_count()).collect();
        Self::from_paths(graph, vm, images)
    }

    pub fn graph(&self) -> &Arc<MarkedGraph> {
        &self.graph
    }

    pub fn vertex(&self, v: VertexId) -> VertexId {
        self.vertex_map[v]
    }

    pub fn vertex_map(&self) -> &[VertexId] {
        &self.vertex_map
    }

    /// Image of an oriented edge.
    pub fn image(&self, d: OrientedEdge) -> EdgePath {
        let p = &self.images[d.edge()];
        if d.is_reversed() {
            p.reverse()
        } else {
            p.clone()
        }
    }

    pub fn edge_image(&self, e: usize) -> &EdgePath {
        &self.images[e]
    }

    /// Maximum edge image length.
    pub fn lipschitz(&self) -> usize {
        self.images.iter().map(|p| p.len()).max().unwrap_or(0)
    }

    /// Untightened image of a word.
    pub fn image_word(&self, word: &[OrientedEdge]) -> Vec<OrientedEdge> {
        let mut out = Vec::new();
        for d in word {
            let p = &self.images[d.edge()];
            if d.is_reversed() {
                out.extend(reverse_word(p.edges()));
            } else {
                out.extend_from_slice(p.edges());
            }
        }
        out
    }

    /// `f_#` on paths.
    pub fn sharp(&self, p: &EdgePath) -> EdgePath {
        let w = free_reduce(&self.image_word(p.edges()));
        EdgePath::from_raw(self.vertex_map[p.start()], self.vertex_map[p.end()], w)
    }

    /// `f_#` on circuits.
    pub fn sharp_circuit(&self, c: &Circuit) -> Result<Circuit, MapError> {
        Circuit::from_word(&self.image_word(c.edges())).ok_or(MapError::ImageCollapsed)
    }

    /// `f^k_#(p)`.
    pub fn iterate(&self, p: &EdgePath, k: usize) -> EdgePath {
        let mut q = p.clone();
        for _ in 0..k {
            q = self.sharp(&q);
        }
        q
    }

    pub fn iterate_circuit(&self, c: &Circuit, k: usize) -> Result<Circuit, MapError> {
        let mut q = c.clone();
        for _ in 0..k {
            q = self.sharp_circuit(&q)?;
        }
        Ok(q)
    }

    /// `f^k` as a map.
    pub fn power(&self, k: usize) -> GraphMap {
        let mut m = GraphMap::identity(self.graph.clone());
        for _ in 0..k {
            m = compose(self, &m).expect("same graph");
        }
        m
    }

    pub fn direction_map(&self) -> Result<&DirectionMap, MapError> {
        self.dmap
            .get_or_init(|| DirectionMap::new(self))
            .as_ref()
            .map_err(|e| e.clone())
    }

    pub fn is_legal(&self, t: Turn) -> bool {
        match self.direction_map() {
            Ok(dm) => dm.is_legal(t),
            Err(_) => false,
        }
    }

    /// Bounded cancellation constant (certified upper bound).
    pub fn bcc(&self) -> Result<usize, MapError> {
        self.bcc.get_or_init(|| bcc_bound(self)).clone()
    }
}

/// `f_#` for paths and circuits.
pub trait Sharp {
    type Output;
    fn sharp_by(&self, f: &GraphMap) -> Self::Output;
}

impl Sharp for EdgePath {
    type Output = EdgePath;
    fn sharp_by(&self, f: &GraphMap) -> EdgePath {
        f.sharp(self)
    }
}

impl Sharp for Circuit {
    type Output = Result<Circuit, MapError>;
    fn sharp_by(&self, f: &GraphMap) -> Self::Output {
        f.sharp_circuit(self)
    }
}

pub fn apply_sharp<P: Sharp>(f: &GraphMap, p: &P) -> P::Output {
    p.sharp_by(f)
}

/// `g ∘ f`.
pub fn compose(g: &GraphMap, f: &GraphMap) -> Result<GraphMap, MapError> {
    if !Arc::ptr_eq(&g.graph, &f.graph) && g.graph != f.graph {
        return Err(MapError::DomainMismatch);
    }
    let images = f.images.iter().map(|p| g.sharp(p)).collect();
    let vm = f.vertex_map.iter().map(|v| g.vertex_map[*v]).collect();
    Ok(GraphMap::from_paths(f.graph.clone(), vm, images))
}

/// The derivative `Df` on directions, with its periodic structure and gates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionMap {
    table: Vec<OrientedEdge>,
    periodic: BTreeSet<OrientedEdge>,
    fixed: BTreeSet<OrientedEdge>,
    gates: Vec<Vec<OrientedEdge>>,
}

impl DirectionMap {
    fn new(f: &GraphMap) -> Result<Self, MapError> {
        let g = &f.graph;
        let collapsed: Vec<String> = (0..g.edge_count())
            .filter(|&e| f.images[e].is_empty())
            .map(|e| g.edge_name(e).to_string())
            .collect();
        if !collapsed.is_empty() {
            return Err(MapError::CollapsedEdge(collapsed));
        }
        let n = g.direction_count();
        let table: Vec<OrientedEdge> = (0..n)
            .map(|i| {
                f.image(OrientedEdge::from_index(i))
                    .first()
                    .expect("nontrivial")
            })
            .collect();
        let mut periodic = BTreeSet::new();
        for i in 0..n {
            let d = OrientedEdge::from_index(i);
            let mut x = table[i];
            for _ in 0..n {
                if x == d {
                    periodic.insert(d);
                    break;
                }
                x = table[x.index()];
            }
        }
        let fixed = (0..n)
            .map(OrientedEdge::from_index)
            .filter(|d| table[d.index()] == *d)
            .collect();
        // after n steps every direction sits on its periodic cycle
        let settle = |d: OrientedEdge| {
            let mut x = d;
            for _ in 0..n {
                x = table[x.index()];
            }
            x
        };
        let mut gates = Vec::new();
        for v in 0..g.vertex_count() {
            let mut groups: Vec<(OrientedEdge, Vec<OrientedEdge>)> = Vec::new();
            for &d in g.directions_at(v) {
                let s = settle(d);
                match groups.iter_mut().find(|(k, _)| *k == s) {
                    Some((_, list)) => list.push(d),
                    None => groups.push((s, vec![d])),
                }
            }
            gates.extend(groups.into_iter().map(|(_, l)| l));
        }
        Ok(DirectionMap {
            table,
            periodic,
            fixed,
            gates,
        })
    }

    pub fn df(&self, d: OrientedEdge) -> OrientedEdge {
        self.table[d.index()]
    }

    pub fn df_iter(&self, d: OrientedEdge, k: usize) -> OrientedEdge {
        (0..k).fold(d, |x, _| self.df(x))
    }

    pub fn periodic(&self) -> &BTreeSet<OrientedEdge> {
        &self.periodic
    }

    pub fn fixed(&self) -> &BTreeSet<OrientedEdge> {
        &self.fixed
    }

    pub fn gates(&self) -> &[Vec<OrientedEdge>] {
        &self.gates
    }

    pub fn image_turn(&self, t: Turn) -> Turn {
        Turn::unchecked(self.df(t.first), self.df(t.second))
    }

    /// Legal iff no iterate degenerates the turn. The pair orbit lives in a
    /// set of size (#directions)², so that many steps decide it.
    pub fn is_legal(&self, t: Turn) -> bool {
        let n = self.table.len();
        let mut seen = BTreeSet::new();
        let mut cur = t;
        for _ in 0..=n * n {
            if cur.is_degenerate() {
                return false;
            }
            if !seen.insert(cur) {
                return true;
            }
            cur = self.image_turn(cur);
        }
        unreachable!("pair orbit longer than (#directions)^2")
    }
}

pub fn direction_map(f: &GraphMap) -> Result<DirectionMap, MapError> {
    f.direction_map().cloned()
}

pub fn is_legal_turn(f: &GraphMap, t: Turn) -> bool {
    f.is_legal(t)
}

/// Surjectivity on π₁ at the marking root, by folding the images of a basis.
pub fn is_homotopy_equivalence(f: &GraphMap) -> bool {
    let g = &f.graph;
    if !g.is_connected() {
        return false;
    }
    let root = g.marking().map_or(0, |m| m.root);
    let tree = g
        .marking()
        .map_or_else(|| g.spanning_tree(root), |m| m.tree.clone());
    let loops: Vec<EdgePath> = g
        .basis_loops_at(root, &tree)
        .iter()
        .map(|l| f.sharp(l))
        .collect();
    let base = f.vertex_map[root];
    match CoreImmersion::from_generators(g.clone(), base, &loops) {
        Ok(im) => im.is_full(),
        Err(_) => false,
    }
}

/// Certified bounded cancellation constant. `f` factors as a subdivision,
/// a sequence of Stallings folds and an immersion; subdivisions and
/// immersions cancel nothing, each fold cancels at most one edge and is
/// 1-Lipschitz, so the number of folds bounds the constant.
pub fn bcc_bound(f: &GraphMap) -> Result<usize, MapError> {
    if !is_homotopy_equivalence(f) {
        return Err(MapError::NotHomotopyEquivalence);
    }
    let g = &f.graph;
    let mut folder = Folder::new();
    let verts: Vec<usize> = (0..g.vertex_count())
        .map(|v| folder.add_vertex(f.vertex_map[v]))
        .collect();
    let mut total = 0;
    for (e, p) in f.images.iter().enumerate() {
        let rec = &g.edges()[e];
        let (u, v) = (folder.find(verts[rec.init]), folder.find(verts[rec.term]));
        if p.is_empty() {
            // collapsed edge: identify its endpoints
            folder.merge(u, v);
            continue;
        }
        total += p.len();
        folder.add_path(g, u, v, p.edges());
    }
    let remaining = folder.edge_count();
    Ok(total - remaining)
}

/// Longest prefix of `fp` cancelled by some image `f_#(γ)` where `γ` starts
/// at `start` and avoids the direction `avoid`. Extensions whose stable part
/// (all but the last `bcc` edges) already diverges from `fp` are pruned.
fn max_cancellation(
    f: &GraphMap,
    start: VertexId,
    avoid: Option<OrientedEdge>,
    fp: &[OrientedEdge],
    bcc: usize,
    budget: &mut usize,
) -> Result<usize, MapError> {
    let g = f.graph.clone();
    let mut best = 0;
    // the future of a prolongation depends only on its last edge, the
    // agreement length with `fp`, and the unstable tail of its image
    let mut seen: BTreeSet<(OrientedEdge, usize, Vec<OrientedEdge>)> = BTreeSet::new();
    let mut stack: Vec<Vec<OrientedEdge>> = g
        .directions_at(start)
        .iter()
        .filter(|d| Some(**d) != avoid)
        .map(|d| vec![*d])
        .collect();
    while let Some(gamma) = stack.pop() {
        if *budget == 0 {
            return Err(MapError::Inconclusive("f_## extension search".into()));
        }
        *budget -= 1;
        let x = free_reduce(&f.image_word(&gamma));
        let c = common_prefix(&x, fp);
        best = best.max(c);
        if best >= fp.len() {
            return Ok(fp.len());
        }
        let stable = x.len().saturating_sub(bcc);
        if c < stable {
            continue;
        }
        let last = *gamma.last().unwrap();
        if !seen.insert((last, c, x[c..].to_vec())) {
            continue;
        }
        for &d in g.directions_at(g.term(last)) {
            if d != last.reverse() {
                let mut next = gamma.clone();
                next.push(d);
                stack.push(next);
            }
        }
    }
    Ok(best)
}

/// `f_##(p)`: the part of `f_#(p)` that survives in `f_#(δ)` for every
/// extension `δ ⊇ p`.
pub fn double_sharp(f: &GraphMap, p: &EdgePath) -> Result<EdgePath, MapError> {
    double_sharp_with_budget(f, p, DEFAULT_SEARCH_BUDGET)
}

pub fn double_sharp_with_budget(
    f: &GraphMap,
    p: &EdgePath,
    budget: usize,
) -> Result<EdgePath, MapError> {
    let bcc = f.bcc()?;
    let fp = f.sharp(p);
    let g = &f.graph;
    let mut budget = budget;
    let left = max_cancellation(f, p.start(), p.first(), fp.edges(), bcc, &mut budget)?;
    let rev: Vec<OrientedEdge> = reverse_word(fp.edges());
    let right = max_cancellation(
        f,
        p.end(),
        p.last().map(|d| d.reverse()),
        &rev,
        bcc,
        &mut budget,
    )?;
    let n = fp.len();
    if left + right >= n {
        let at = if left >= n {
            fp.end()
        } else {
            fp.slice(g, left, left).start()
        };
        return Ok(EdgePath::trivial(at));
    }
    Ok(fp.slice(g, left, n - right))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1() -> GraphMap {
        let g = Arc::new(MarkedGraph::rose(&["a", "b"]));
        GraphMap::from_strs(g, &[("a", "b"), ("b", "b a")]).unwrap()
    }

    fn ex3() -> GraphMap {
        let g = Arc::new(MarkedGraph::rose(&["a", "e"]));
        GraphMap::from_strs(g, &[("a", "a"), ("e", "e a")]).unwrap()
    }

    fn shear() -> GraphMap {
        let g = Arc::new(MarkedGraph::rose(&["a", "b"]));
        GraphMap::from_strs(g, &[("a", "a"), ("b", "a b")]).unwrap()
    }

    fn w(f: &GraphMap, p: &EdgePath) -> String {
        f.graph().format_word(p.edges())
    }

    #[test]
    fn sharp_examples() {
        let f = ex1();
        let g = f.graph().clone();
        assert_eq!(
            w(&f, &apply_sharp(&f, &g.parse_path("a b").unwrap())),
            "b b a"
        );
        let id = GraphMap::identity(g.clone());
        let p = g.parse_path("a ~b b a").unwrap();
        assert_eq!(apply_sharp(&id, &p), p);
        let s = shear();
        assert_eq!(
            w(&s, &s.sharp(&s.graph().parse_path("~b a").unwrap())),
            "~b"
        );
    }

    #[test]
    fn compose_examples() {
        let f = ex1();
        let f2 = compose(&f, &f).unwrap();
        assert_eq!(w(&f, f2.edge_image(0)), "b a");
        assert_eq!(w(&f, f2.edge_image(1)), "b a b");
        assert_eq!(
            compose(&GraphMap::identity(f.graph().clone()), &f).unwrap(),
            f
        );
        let other = shear();
        assert_eq!(compose(&f, &ex3()), Err(MapError::DomainMismatch));
        assert!(compose(&f, &other).is_ok());
    }

    #[test]
    fn direction_examples() {
        let f = ex1();
        let g = f.graph();
        let dm = f.direction_map().unwrap();
        let t = |s: &str| g.parse_token(s).unwrap();
        assert_eq!(dm.df(t("a")), t("b"));
        assert_eq!(dm.df(t("b")), t("b"));
        assert_eq!(dm.df(t("~a")), t("~b"));
        assert_eq!(dm.df(t("~b")), t("~a"));
        assert_eq!(dm.fixed(), &BTreeSet::from([t("b")]));
        assert_eq!(dm.periodic(), &BTreeSet::from([t("b"), t("~a"), t("~b")]));
        assert!(!dm.is_legal(Turn::new(g, t("a"), t("b")).unwrap()));
        assert!(dm.is_legal(Turn::new(g, t("~a"), t("~b")).unwrap()));
        assert!(!dm.is_legal(Turn::new(g, t("a"), t("a")).unwrap()));

        let f3 = ex3();
        let g3 = f3.graph();
        let dm3 = f3.direction_map().unwrap();
        let t3 = |s: &str| g3.parse_token(s).unwrap();
        for d in ["a", "~a", "e"] {
            assert_eq!(dm3.df(t3(d)), t3(d));
        }
        assert_eq!(dm3.df(t3("~e")), t3("~a"));
        let id = GraphMap::identity(g.clone());
        assert_eq!(id.direction_map().unwrap().fixed().len(), 4);
    }

    #[test]
    fn homotopy_equivalence_examples() {
        let f = ex1();
        assert!(is_homotopy_equivalence(&f));
        assert!(is_homotopy_equivalence(&GraphMap::identity(
            f.graph().clone()
        )));
        let collapse = GraphMap::from_strs(f.graph().clone(), &[("a", "a"), ("b", "a")]).unwrap();
        assert!(!is_homotopy_equivalence(&collapse));
        assert_eq!(bcc_bound(&collapse), Err(MapError::NotHomotopyEquivalence));
        let square = GraphMap::from_strs(f.graph().clone(), &[("a", "a a"), ("b", "b")]).unwrap();
        assert!(!is_homotopy_equivalence(&square));
    }

    #[test]
    fn bcc_examples() {
        assert_eq!(
            bcc_bound(&GraphMap::identity(ex1().graph().clone())).unwrap(),
            0
        );
        assert!(bcc_bound(&ex1()).unwrap() >= 1);
        let s = shear();
        let b = bcc_bound(&s).unwrap();
        assert!(b >= 1);
        // ~b · a: images ~b ~a and a cancel exactly one edge
        let g = s.graph();
        let x = s.sharp(&g.parse_path("~b").unwrap());
        let y = s.sharp(&g.parse_path("a").unwrap());
        let xy = s.sharp(&g.parse_path("~b a").unwrap());
        assert_eq!((x.len() + y.len() - xy.len()) / 2, 1);
    }

    #[test]
    fn double_sharp_examples() {
        let f = ex1();
        let id = GraphMap::identity(f.graph().clone());
        let p = f.graph().parse_path("a b ~a").unwrap();
        assert_eq!(double_sharp(&id, &p).unwrap(), p);
        let s = shear();
        let b = s.graph().parse_path("b").unwrap();
        let ds = double_sharp(&s, &b).unwrap();
        assert_eq!(w(&s, &ds), "b");
    }
}
