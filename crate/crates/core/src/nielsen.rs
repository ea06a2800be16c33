//! Periodic Nielsen paths and the geometricity decision for EG strata.
//!
//! Only Nielsen paths with endpoints at vertices are searched for.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::graphs::{
    common_prefix, core_subgraph, for_each_reduced_path, reverse_word, Circuit, EdgeId, EdgePath,
    MarkedGraph, OrientedEdge, Turn,
};
use crate::maps::{GraphMap, MapError};
use crate::strata::{
    classify_stratum, perron, transition_matrix, Filtration, NegKind, StrataError, StratumClass,
};

pub const DEFAULT_PERIOD_BOUND: usize = 12;
/// Search states explored per seed before giving up.
pub const DEFAULT_SEED_BUDGET: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NielsenError {
    #[error("stratum {0} is not irreducible")]
    NotIrreducible(usize),
    #[error("stratum {0} is not EG")]
    NotEg(usize),
    #[error(transparent)]
    Strata(#[from] StrataError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Default length bound: 64 edges per edge of the graph.
pub fn default_length_bound(g: &MarkedGraph) -> usize {
    64 * g.edge_count()
}

/// Least `k ≤ period_bound` with `f^k_#(p) = p`.
pub fn is_nielsen_path(f: &GraphMap, p: &EdgePath, period_bound: usize) -> Option<usize> {
    if p.is_empty() {
        return None;
    }
    let mut q = p.clone();
    for k in 1..=period_bound {
        q = f.sharp(&q);
        if q == *p {
            return Some(k);
        }
    }
    None
}

/// `is_nielsen_path`, giving up once an iterate is longer than `max_len`.
pub fn is_nielsen_path_within(
    f: &GraphMap,
    p: &EdgePath,
    period_bound: usize,
    max_len: usize,
) -> Option<usize> {
    if p.is_empty() {
        return None;
    }
    let mut q = p.clone();
    for k in 1..=period_bound {
        q = f.sharp(&q);
        if q == *p {
            return Some(k);
        }
        if q.len() > max_len {
            return None;
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NielsenRecord {
    pub path: EdgePath,
    pub period: usize,
    pub height: usize,
    pub closed: bool,
    /// Crossings of each edge of the height stratum, both orientations.
    pub crossings: Vec<(EdgeId, usize)>,
    /// `ρ = α·β` split at the illegal turn, for EG height.
    pub decomposition: Option<(EdgePath, EdgePath)>,
    pub junction: Option<Turn>,
    pub indivisible: bool,
}

impl NielsenRecord {
    fn build(
        f: &GraphMap,
        phi: &Filtration,
        r: usize,
        path: EdgePath,
        period: usize,
        split: Option<usize>,
    ) -> Self {
        let g = f.graph();
        // store the lexicographically least of ρ and its reverse
        let (path, split) = {
            let rev = path.reverse();
            if rev.edges() < path.edges() {
                (rev, split.map(|s| path.len() - s))
            } else {
                (path, split)
            }
        };
        let counts = path.crossing_counts(g.edge_count());
        let crossings = phi.stratum(r).into_iter().map(|e| (e, counts[e])).collect();
        let decomposition = split.map(|s| (path.slice(g, 0, s), path.slice(g, s, path.len())));
        let junction =
            split.map(|s| Turn::unchecked(path.edges()[s - 1].reverse(), path.edges()[s]));
        let indivisible = is_indivisible(f, &path, period);
        NielsenRecord {
            closed: path.is_closed(),
            path,
            period,
            height: r,
            crossings,
            decomposition,
            junction,
            indivisible,
        }
    }

    pub fn crosses_each_twice(&self) -> bool {
        self.crossings.iter().all(|(_, c)| *c == 2)
    }

    pub fn crosses_some_once(&self) -> bool {
        self.crossings.iter().any(|(_, c)| *c == 1)
    }
}

/// No split at an interior vertex into two periodic Nielsen paths whose
/// periods divide a common multiple within range. Iterates longer than the
/// default length bound count as non-periodic, like the search itself.
fn is_indivisible(f: &GraphMap, p: &EdgePath, period: usize) -> bool {
    let g = f.graph();
    let bound = DEFAULT_PERIOD_BOUND.max(period);
    let cap = default_length_bound(g).max(p.len());
    (1..p.len()).all(|i| {
        let (a, b) = (p.slice(g, 0, i), p.slice(g, i, p.len()));
        is_nielsen_path_within(f, &a, bound, cap).is_none()
            || is_nielsen_path_within(f, &b, bound, cap).is_none()
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum SearchStatus {
    Complete,
    Inconclusive(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InpSearch {
    pub records: Vec<NielsenRecord>,
    pub status: SearchStatus,
}

impl InpSearch {
    pub fn is_complete(&self) -> bool {
        self.status == SearchStatus::Complete
    }
}

enum SeedOutcome {
    Found(Vec<(Vec<OrientedEdge>, Vec<OrientedEdge>)>),
    Exhausted,
    Inconclusive(String),
}

/// Junction growth for one EG stratum under `g = f^p`. An INP with
/// illegal turn `{d1, d2}` is `ᾱ1·α2` where `α_i` starts with `d_i`, is
/// r-legal, ends with an `H_r` edge, and `g_#(α_i) = τ·α_i` for one common
/// path `τ`. Stable image prefixes force `α_i` once `τ` is known, and PF
/// lengths force `ℓ(α_i) = ℓ(τ)/(λ^p - 1)`, which ends every branch.
struct Grower<'a> {
    f: &'a GraphMap,
    g: GraphMap,
    phi: &'a Filtration,
    r: usize,
    bcc: usize,
    lengths: Vec<f64>,
    stretch: f64,
    length_bound: usize,
}

impl Grower<'_> {
    fn pf_length(&self, w: &[OrientedEdge]) -> f64 {
        w.iter().map(|d| self.lengths[d.edge()]).sum()
    }

    fn in_stratum(&self, d: OrientedEdge) -> bool {
        self.phi.edge_height(d.edge()) == self.r
    }

    fn legal_step(&self, w: &[OrientedEdge], d: OrientedEdge) -> bool {
        let Some(&last) = w.last() else { return true };
        if d == last.reverse() {
            return false;
        }
        let t = Turn::unchecked(last.reverse(), d);
        !(self.in_stratum(t.first) && self.in_stratum(t.second)) || self.f.is_legal(t)
    }

    /// `(prefix length, τ)` for prefixes ending in `H_r` with `g_#(A) = τ·A`.
    fn candidates(&self, p: &[OrientedEdge]) -> Vec<(usize, Vec<OrientedEdge>)> {
        let mut out = Vec::new();
        for l in 1..=p.len() {
            if !self.in_stratum(p[l - 1]) {
                continue;
            }
            let img = crate::graphs::free_reduce(&self.g.image_word(&p[..l]));
            if img.len() >= l && img[img.len() - l..] == p[..l] {
                out.push((l, img[..img.len() - l].to_vec()));
            }
        }
        out
    }

    fn extensions(&self, p: &[OrientedEdge]) -> Vec<OrientedEdge> {
        let gr = self.f.graph();
        let v = gr.term(*p.last().unwrap());
        gr.directions_at(v)
            .iter()
            .copied()
            .filter(|d| self.phi.edge_height(d.edge()) <= self.r && self.legal_step(p, *d))
            .collect()
    }

    fn grow(&self, d1: OrientedEdge, d2: OrientedEdge, budget: usize) -> SeedOutcome {
        let mut stack = vec![(vec![d1], vec![d2])];
        let mut found = Vec::new();
        let mut truncated = false;
        let mut steps = 0;
        while let Some((p1, p2)) = stack.pop() {
            steps += 1;
            if steps > budget {
                return SeedOutcome::Inconclusive("seed budget exhausted".into());
            }
            if p1.len() + p2.len() > self.length_bound {
                truncated = true;
                continue;
            }
            let c1 = self.candidates(&p1);
            let c2 = self.candidates(&p2);
            let mut hit = false;
            for (l1, t1) in &c1 {
                for (l2, t2) in &c2 {
                    if t1 != t2 {
                        continue;
                    }
                    let mut rho = reverse_word(&p1[..*l1]);
                    rho.extend_from_slice(&p2[..*l2]);
                    if crate::graphs::free_reduce(&self.g.image_word(&rho)) == rho {
                        found.push((p1[..*l1].to_vec(), p2[..*l2].to_vec()));
                        hit = true;
                    }
                }
            }
            if hit {
                continue;
            }
            let x1 = crate::graphs::free_reduce(&self.g.image_word(&p1));
            let x2 = crate::graphs::free_reduce(&self.g.image_word(&p2));
            let s1 = x1.len().saturating_sub(self.bcc);
            let s2 = x2.len().saturating_sub(self.bcc);
            let c = common_prefix(&x1, &x2);
            if c < s1.min(s2) {
                // τ = x1[..c] is settled; force and bound both sides
                let target = self.pf_length(&x1[..c]) / (self.stretch - 1.0);
                let mut next = [p1.clone(), p2.clone()];
                let mut dead = false;
                for (side, (x, s)) in [(&x1, s1), (&x2, s2)].into_iter().enumerate() {
                    let forced = &x[c..s];
                    let p = &next[side];
                    let k = p.len().min(forced.len());
                    if p[..k] != forced[..k] {
                        dead = true;
                        break;
                    }
                    if forced.len() > p.len() {
                        next[side] = forced.to_vec();
                    }
                    if self.pf_length(&next[side]) > target * (1.0 + 1e-9) + 1e-9 {
                        dead = true;
                        break;
                    }
                }
                if dead {
                    continue;
                }
                if next[0] != p1 || next[1] != p2 {
                    if next
                        .iter()
                        .all(|p| p.windows(2).all(|w| self.legal_step(&w[..1], w[1])))
                    {
                        stack.push((next[0].clone(), next[1].clone()));
                    }
                    continue;
                }
            }
            let grow_first = p1.len() <= p2.len();
            let base = if grow_first { &p1 } else { &p2 };
            for d in self.extensions(base) {
                let mut q = base.clone();
                q.push(d);
                if grow_first {
                    stack.push((q, p2.clone()));
                } else {
                    stack.push((p1.clone(), q));
                }
            }
        }
        if !found.is_empty() {
            SeedOutcome::Found(found)
        } else if truncated {
            SeedOutcome::Inconclusive("length bound reached".into())
        } else {
            SeedOutcome::Exhausted
        }
    }
}

fn eg_inps(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    length_bound: usize,
    period_bound: usize,
) -> Result<InpSearch, NielsenError> {
    let m = transition_matrix(f, phi, r)?;
    let left = perron::perron::<f64>(
        &m.transpose().entries,
        1e-12,
        perron::DEFAULT_MAX_ITERATIONS,
    )
    .map_err(StrataError::from)?;
    let lambda = left.lambda;
    let g0 = f.graph();
    let mut lengths = vec![0.0; g0.edge_count()];
    for (i, e) in m.edges.iter().enumerate() {
        lengths[*e] = left.vector[i];
    }
    let dm = f.direction_map()?;
    let hr: Vec<OrientedEdge> = phi
        .stratum(r)
        .into_iter()
        .flat_map(|e| [OrientedEdge::forward(e), OrientedEdge::backward(e)])
        .collect();
    let mut records: Vec<NielsenRecord> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut reasons = Vec::new();
    let mut power = f.clone();
    for p in 1..=period_bound {
        // an EG stratum carries at most one INP up to reversal, so the first
        // period that produces one ends the search
        if !records.is_empty() {
            break;
        }
        if p > 1 {
            power = crate::maps::compose(f, &power)?;
        }
        let grower = Grower {
            f,
            bcc: power.bcc()?,
            g: power.clone(),
            phi,
            r,
            lengths: lengths.clone(),
            stretch: lambda.powi(p as i32),
            length_bound,
        };
        for (i, &d1) in hr.iter().enumerate() {
            for &d2 in &hr[i + 1..] {
                if g0.init(d1) != g0.init(d2) || dm.df_iter(d1, p) != dm.df_iter(d2, p) {
                    continue;
                }
                match grower.grow(d1, d2, DEFAULT_SEED_BUDGET) {
                    SeedOutcome::Found(pairs) => {
                        for (a1, a2) in pairs {
                            let mut w = reverse_word(&a1);
                            w.extend_from_slice(&a2);
                            let path = g0
                                .path(g0.term(*a1.last().unwrap()), &w)
                                .expect("reduced at the seed");
                            let period = is_nielsen_path(f, &path, p).expect("verified for f^p");
                            let rec = NielsenRecord::build(f, phi, r, path, period, Some(a1.len()));
                            if rec.indivisible && seen.insert(rec.path.clone()) {
                                records.push(rec);
                            }
                        }
                    }
                    SeedOutcome::Exhausted => {}
                    SeedOutcome::Inconclusive(why) => reasons.push(format!(
                        "period {p}, turn {{{}, {}}}: {why}",
                        g0.token(d1),
                        g0.token(d2)
                    )),
                }
            }
        }
    }
    let status = if reasons.is_empty() {
        SearchStatus::Complete
    } else {
        SearchStatus::Inconclusive(reasons.join("; "))
    };
    Ok(InpSearch { records, status })
}

fn neg_inps(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    class: &StratumClass,
    length_bound: usize,
) -> InpSearch {
    let g = f.graph();
    let StratumClass::Neg { edges: Some(edges) } = class else {
        return InpSearch {
            records: Vec::new(),
            status: SearchStatus::Inconclusive("no NEG orientation".into()),
        };
    };
    let mut records = Vec::new();
    for ne in edges {
        match &ne.kind {
            NegKind::Fixed | NegKind::Periodic => {
                let p = g.path(g.init(ne.edge), &[ne.edge]).unwrap();
                let period = edges.len();
                records.push(NielsenRecord::build(f, phi, r, p, period, None));
            }
            NegKind::Linear { w: Some(w), .. } => {
                // E w^k Ē with k = 1 represents the family; k = -1 is its reverse
                if w.len() + 2 > length_bound {
                    continue;
                }
                for inv in [false, true] {
                    let wk = if inv { w.reverse() } else { w.clone() };
                    let mut word = vec![ne.edge];
                    word.extend_from_slice(wk.edges());
                    word.push(ne.edge.reverse());
                    let p = g.path(g.init(ne.edge), &word).unwrap();
                    if let Some(period) = is_nielsen_path(f, &p, DEFAULT_PERIOD_BOUND) {
                        let rec = NielsenRecord::build(f, phi, r, p, period, None);
                        if !records.iter().any(|x: &NielsenRecord| x.path == rec.path) {
                            records.push(rec);
                        }
                    }
                }
            }
            NegKind::Linear { w: None, .. } | NegKind::Superlinear => {}
        }
    }
    InpSearch {
        records,
        status: SearchStatus::Complete,
    }
}

/// All indivisible periodic Nielsen paths of height `r` up to reversal.
pub fn find_inps(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    length_bound: usize,
    period_bound: usize,
) -> Result<InpSearch, NielsenError> {
    let class = classify_stratum(f, phi, r)?;
    match class {
        StratumClass::Zero => Err(NielsenError::NotIrreducible(r)),
        StratumClass::Eg { .. } => eg_inps(f, phi, r, length_bound, period_bound),
        StratumClass::Neg { .. } => Ok(neg_inps(f, phi, r, &class, length_bound)),
    }
}

/// INP records of every irreducible stratum.
pub fn find_all_inps(
    f: &GraphMap,
    phi: &Filtration,
    length_bound: usize,
    period_bound: usize,
) -> Result<InpSearch, NielsenError> {
    let mut records = Vec::new();
    let mut reasons = Vec::new();
    for r in 1..=phi.top() {
        match find_inps(f, phi, r, length_bound, period_bound) {
            Ok(s) => {
                records.extend(s.records);
                if let SearchStatus::Inconclusive(why) = s.status {
                    reasons.push(format!("H_{r}: {why}"));
                }
            }
            Err(NielsenError::NotIrreducible(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let status = if reasons.is_empty() {
        SearchStatus::Complete
    } else {
        SearchStatus::Inconclusive(reasons.join("; "))
    };
    Ok(InpSearch { records, status })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub length: usize,
    pub period: usize,
}

impl Bounds {
    pub fn defaults(g: &MarkedGraph) -> Self {
        Bounds {
            length: default_length_bound(g),
            period: DEFAULT_PERIOD_BOUND,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Geometricity {
    Geometric { rho: NielsenRecord },
    NonGeometric { reason: String },
    Inconclusive { reason: String },
}

impl Geometricity {
    pub fn is_geometric(&self) -> bool {
        matches!(self, Geometricity::Geometric { .. })
    }
}

/// Each component of `G_{r-1}` carries a nontrivial loop.
pub fn lower_components_noncontractible(g: &MarkedGraph, phi: &Filtration, r: usize) -> bool {
    let lower = phi.level(r - 1);
    let core = core_subgraph(g, lower);
    g.components(lower)
        .iter()
        .all(|(_, ce)| !ce.is_disjoint(&core))
}

/// A closed height-`r` INP means geometric; a non-closed one, or a search
/// that finishes empty, means not geometric.
pub fn geometricity(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    bounds: Bounds,
) -> Result<Geometricity, NielsenError> {
    if !classify_stratum(f, phi, r)?.is_eg() {
        return Err(NielsenError::NotEg(r));
    }
    let search = find_inps(f, phi, r, bounds.length, bounds.period)?;
    let g = f.graph();
    if let Some(rho) = search.records.iter().find(|rec| rec.closed) {
        if !rho.crosses_each_twice() {
            return Ok(Geometricity::Inconclusive {
                reason: "closed INP does not cross each stratum edge twice; not a CT".into(),
            });
        }
        if !lower_components_noncontractible(g, phi, r) {
            return Ok(Geometricity::Inconclusive {
                reason: "a lower component is contractible; not a CT".into(),
            });
        }
        return Ok(Geometricity::Geometric { rho: rho.clone() });
    }
    if let Some(rho) = search.records.first() {
        debug_assert!(rho.crosses_some_once());
        return Ok(Geometricity::NonGeometric {
            reason: format!("the INP {} is not closed", g.format_word(rho.path.edges())),
        });
    }
    match search.status {
        SearchStatus::Complete => Ok(Geometricity::NonGeometric {
            reason: format!("no height-{r} INP of period at most {}", bounds.period),
        }),
        SearchStatus::Inconclusive(reason) => Ok(Geometricity::Inconclusive { reason }),
    }
}

/// `f_#`-fixed circuits of height `r` with at most `length_bound` edges.
pub fn fixed_classes_of_height(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    length_bound: usize,
) -> Vec<Circuit> {
    let g = f.graph();
    let mut out = BTreeSet::new();
    for v in 0..g.vertex_count() {
        for_each_reduced_path(g, v, length_bound, &|e| phi.edge_height(e) <= r, &mut |w| {
            let closed = g.term(*w.last().unwrap()) == v && w[0] != w.last().unwrap().reverse();
            if closed && phi.word_height(w) == r {
                if let Some(c) = Circuit::from_word(w) {
                    if c.edges() == w && f.sharp_circuit(&c).as_ref() == Ok(&c) {
                        out.insert(c);
                    }
                }
            }
            true
        });
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn map(edges: &[&str], rules: &[(&str, &str)]) -> GraphMap {
        GraphMap::from_strs(Arc::new(MarkedGraph::rose(edges)), rules).unwrap()
    }

    fn ex3() -> (GraphMap, Filtration) {
        let f = map(&["a", "e"], &[("a", "a"), ("e", "e a")]);
        let g = f.graph().clone();
        let phi = Filtration::new(&g, vec![[0].into(), [0, 1].into()]).unwrap();
        (f, phi)
    }

    #[test]
    fn nielsen_path_examples() {
        let (f, _) = ex3();
        let g = f.graph();
        assert_eq!(is_nielsen_path(&f, &g.parse_path("a").unwrap(), 5), Some(1));
        assert_eq!(
            is_nielsen_path(&f, &g.parse_path("e a ~e").unwrap(), 5),
            Some(1)
        );
        let f1 = map(&["a", "b"], &[("a", "b"), ("b", "b a")]);
        assert_eq!(
            is_nielsen_path(&f1, &f1.graph().parse_path("a").unwrap(), 5),
            None
        );
    }

    #[test]
    fn neg_family() {
        let (f, phi) = ex3();
        let s = find_inps(&f, &phi, 2, 64, 12).unwrap();
        let g = f.graph();
        let words: Vec<String> = s
            .records
            .iter()
            .map(|r| g.format_word(r.path.edges()))
            .collect();
        assert_eq!(words, vec!["e a ~e"]);
        assert!(s.records.iter().all(|r| r.closed && r.indivisible));
    }

    #[test]
    fn ex1_square_closed_inp() {
        let f1 = map(&["a", "b"], &[("a", "b"), ("b", "b a")]);
        let f = crate::maps::compose(&f1, &f1).unwrap();
        let phi = Filtration::single(f.graph());
        let s = find_inps(&f, &phi, 1, 128, 4).unwrap();
        assert!(s.is_complete(), "{:?}", s.status);
        assert_eq!(s.records.len(), 1);
        let rho = &s.records[0];
        assert!(rho.closed);
        assert_eq!(rho.crossings, vec![(0, 2), (1, 2)]);
        let (a, b) = rho.decomposition.clone().unwrap();
        assert_eq!(a.len() + b.len(), 4);
        assert!(geometricity(
            &f,
            &phi,
            1,
            Bounds {
                length: 128,
                period: 4
            }
        )
        .unwrap()
        .is_geometric());
        let fixed = fixed_classes_of_height(&f, &phi, 1, 8);
        let rho_c = Circuit::from_word(rho.path.edges()).unwrap();
        let expect: BTreeSet<Circuit> = [
            rho_c.clone(),
            rho_c.inverse(),
            rho_c.power(2),
            rho_c.inverse().power(2),
        ]
        .into();
        assert_eq!(fixed.into_iter().collect::<BTreeSet<_>>(), expect);
        assert!(fixed_classes_of_height(&f, &phi, 1, 0).is_empty());
    }

    #[test]
    fn tribonacci_is_not_geometric() {
        let f = map(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a b")]);
        let phi = Filtration::single(f.graph());
        let d = geometricity(
            &f,
            &phi,
            1,
            Bounds {
                length: 96,
                period: 3,
            },
        )
        .unwrap();
        assert!(matches!(d, Geometricity::NonGeometric { .. }), "{d:?}");
    }
}
