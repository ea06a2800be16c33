//! Splittings of paths and circuits: decompositions whose terms have
//! images that concatenate without cancellation under every iterate.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::graphs::{Circuit, EdgeId, EdgePath, MarkedGraph, OrientedEdge, Turn};
use crate::maps::{DirectionMap, GraphMap, MapError};
use crate::nielsen::{is_nielsen_path, NielsenRecord, DEFAULT_PERIOD_BOUND};
use crate::strata::{classify_all, turn_height_is, Filtration, NegKind, StrataError, StratumClass};

pub const DEFAULT_ITERATE_BOUND: usize = 32;
/// Iterates checked directly when a splitting cannot be proved exact.
pub const DEFAULT_CERTIFY_DEPTH: usize = 8;
/// Iterates of irreducible edges searched for taken zero-stratum paths.
pub const DEFAULT_TAKEN_DEPTH: usize = 6;
/// Iterates longer than this stop a search.
pub const MAX_ITERATE_LEN: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplittingError {
    #[error("not completely split: no complete splitting past position {0}")]
    NotCompletelySplit(usize),
    #[error("stratum {0} is not EG")]
    NotEg(usize),
    #[error("stratum {0} is EG but not aperiodic")]
    Periodic(usize),
    #[error("path does not have height {0}")]
    WrongHeight(usize),
    #[error("r-illegal turn count increased at iterate {0}")]
    NotMonotone(usize),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Strata(#[from] StrataError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// A path or a circuit, the things splittings are taken of.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Subject {
    Path(EdgePath),
    Circuit(Circuit),
}

impl From<EdgePath> for Subject {
    fn from(p: EdgePath) -> Self {
        Subject::Path(p)
    }
}

impl From<Circuit> for Subject {
    fn from(c: Circuit) -> Self {
        Subject::Circuit(c)
    }
}

impl Subject {
    pub fn edges(&self) -> &[OrientedEdge] {
        match self {
            Subject::Path(p) => p.edges(),
            Subject::Circuit(c) => c.edges(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges().len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges().is_empty()
    }

    pub fn is_circuit(&self) -> bool {
        matches!(self, Subject::Circuit(_))
    }

    pub fn sharp(&self, f: &GraphMap) -> Result<Subject, MapError> {
        Ok(match self {
            Subject::Path(p) => Subject::Path(f.sharp(p)),
            Subject::Circuit(c) => Subject::Circuit(f.sharp_circuit(c)?),
        })
    }

    /// Turns taken, with the closing turn at position 0 for circuits.
    pub fn turns(&self) -> Vec<(usize, Turn)> {
        match self {
            Subject::Path(p) => Turn::taken_by(p.edges()).collect(),
            Subject::Circuit(c) => Turn::taken_cyclic(c.edges()),
        }
    }

    /// Edges `lo..hi`; for circuits `hi` may run past the end and wraps.
    pub fn segment(&self, g: &MarkedGraph, lo: usize, hi: usize) -> EdgePath {
        match self {
            Subject::Path(p) => p.slice(g, lo, hi),
            Subject::Circuit(c) => {
                let n = c.len();
                let w: Vec<OrientedEdge> = (lo..hi).map(|i| c.edges()[i % n]).collect();
                g.path(g.init(c.edges()[lo % n]), &w)
                    .expect("circuit segments are paths")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermTag {
    IrreducibleEdge,
    Inp,
    ExceptionalPath,
    TakenZeroStratum,
    LowerStratum,
    Unclassified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "iterates", rename_all = "snake_case")]
pub enum SplitStatus {
    /// Proved for all iterates by legal junctures and persistent term ends.
    Exact,
    /// Checked directly for iterates `1..=k`.
    Certified(usize),
    /// Cancellation at this iterate.
    Failed(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Splitting {
    pub subject: Subject,
    /// Term starts. For paths these are interior positions; for circuits
    /// they are positions in the circuit word, at least one.
    pub breakpoints: Vec<usize>,
    pub tags: Vec<TermTag>,
    pub status: SplitStatus,
}

impl Splitting {
    /// `(lo, hi)` edge ranges of the terms.
    pub fn term_bounds(&self) -> Vec<(usize, usize)> {
        bounds_of(&self.subject, &self.breakpoints)
    }

    pub fn terms(&self, g: &MarkedGraph) -> Vec<EdgePath> {
        self.term_bounds()
            .into_iter()
            .map(|(lo, hi)| self.subject.segment(g, lo, hi))
            .collect()
    }

    pub fn is_split(&self) -> bool {
        !matches!(self.status, SplitStatus::Failed(_))
    }

    /// Terms written as `[t1][t2]…`.
    pub fn display(&self, g: &MarkedGraph) -> String {
        self.terms(g)
            .iter()
            .map(|t| format!("[{}]", g.format_word(t.edges())))
            .collect()
    }
}

fn bounds_of(subject: &Subject, breakpoints: &[usize]) -> Vec<(usize, usize)> {
    let n = subject.len();
    if subject.is_circuit() {
        let m = breakpoints.len();
        (0..m)
            .map(|i| {
                let lo = breakpoints[i];
                let hi = if i + 1 < m {
                    breakpoints[i + 1]
                } else {
                    breakpoints[0] + n
                };
                (lo, hi)
            })
            .collect()
    } else {
        let mut starts = vec![0];
        starts.extend(breakpoints.iter().copied());
        let mut ends: Vec<usize> = breakpoints.to_vec();
        ends.push(n);
        starts.into_iter().zip(ends).collect()
    }
}

fn normalize_breakpoints(subject: &Subject, bps: &[usize]) -> Vec<usize> {
    let n = subject.len();
    let set: BTreeSet<usize> = if subject.is_circuit() {
        bps.iter().map(|b| b % n.max(1)).collect()
    } else {
        bps.iter().copied().filter(|&b| b > 0 && b < n).collect()
    };
    let mut out: Vec<usize> = set.into_iter().collect();
    if subject.is_circuit() && out.is_empty() {
        out.push(0);
    }
    out
}

/// Edges reachable from `seeds` by repeatedly taking edge images.
fn edge_closure(f: &GraphMap, seeds: impl IntoIterator<Item = EdgeId>) -> BTreeSet<EdgeId> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<EdgeId> = seeds.into_iter().collect();
    while let Some(e) = stack.pop() {
        if seen.insert(e) {
            stack.extend(f.edge_image(e).edges().iter().map(|d| d.edge()));
        }
    }
    seen
}

/// Every iterate of `w` is legal: `w` is, and so is every edge image
/// reachable from it.
fn legal_forever(f: &GraphMap, dm: &DirectionMap, w: &[OrientedEdge]) -> bool {
    Turn::taken_by(w).all(|(_, t)| dm.is_legal(t))
        && edge_closure(f, w.iter().map(|d| d.edge()))
            .into_iter()
            .all(|e| Turn::taken_by(f.edge_image(e).edges()).all(|(_, t)| dm.is_legal(t)))
}

/// The initial direction of `f^k_#(w)` is `Df^k` of the initial direction
/// of `w`, for every `k`.
fn start_persists(f: &GraphMap, dm: &DirectionMap, w: &[OrientedEdge]) -> bool {
    let g = f.graph();
    let e = w[0];
    let img = f.image(e);
    // E·μ with f(E) = E·u, where nothing reachable from u or μ reaches E
    if img.first() == Some(e) {
        let seeds = img.edges()[1..].iter().chain(&w[1..]).map(|d| d.edge());
        if !edge_closure(f, seeds).contains(&e.edge()) {
            return true;
        }
    }
    // Ē with f(E) = E·u and u a closed fixed Nielsen path: f^k_#(Ē) = ū^k·Ē
    if w.len() == 1 {
        let fe = f.image(e.reverse());
        if fe.first() == Some(e.reverse()) && fe.len() > 1 {
            let u = fe.slice(g, 1, fe.len());
            let (first, last) = (u.first().unwrap(), u.last().unwrap());
            if u.is_closed() && first != last.reverse() && f.sharp(&u) == u {
                return dm.df(last.reverse()) == last.reverse();
            }
        }
    }
    false
}

/// Periodic Nielsen paths whose end directions follow `Df` over a period.
fn nielsen_persists(f: &GraphMap, dm: &DirectionMap, p: &EdgePath) -> Option<bool> {
    let period = is_nielsen_path(f, p, DEFAULT_PERIOD_BOUND)?;
    let (a, b) = (p.first()?, p.last()?.reverse());
    let mut q = p.clone();
    for k in 1..=period {
        q = f.sharp(&q);
        if q.first() != Some(dm.df_iter(a, k))
            || q.last().map(|d| d.reverse()) != Some(dm.df_iter(b, k))
        {
            return Some(false);
        }
    }
    Some(true)
}

fn term_persists(f: &GraphMap, dm: &DirectionMap, t: &EdgePath) -> bool {
    if t.is_empty() {
        return false;
    }
    if nielsen_persists(f, dm, t) == Some(true) || legal_forever(f, dm, t.edges()) {
        return true;
    }
    start_persists(f, dm, t.edges()) && start_persists(f, dm, t.reverse().edges())
}

/// Whether term images concatenate with no cancellation. Trivial images
/// drop out and their neighbours must then fit.
fn concatenates(images: &[EdgePath], circular: bool) -> bool {
    let live: Vec<&EdgePath> = images.iter().filter(|p| !p.is_empty()).collect();
    if live.is_empty() {
        return false;
    }
    let fits = |a: &EdgePath, b: &EdgePath| a.last().unwrap() != b.first().unwrap().reverse();
    if !live.windows(2).all(|w| fits(w[0], w[1])) {
        return false;
    }
    !circular || fits(live[live.len() - 1], live[0])
}

fn junctures(terms: &[EdgePath], circular: bool) -> Vec<Turn> {
    let mut out: Vec<Turn> = terms
        .windows(2)
        .map(|w| Turn::unchecked(w[0].last().unwrap().reverse(), w[1].first().unwrap()))
        .collect();
    if circular {
        let (a, b) = (&terms[terms.len() - 1], &terms[0]);
        out.push(Turn::unchecked(
            a.last().unwrap().reverse(),
            b.first().unwrap(),
        ));
    }
    out
}

fn verify_terms(f: &GraphMap, terms: &[EdgePath], circular: bool, k_bound: usize) -> SplitStatus {
    if let Ok(dm) = f.direction_map() {
        let legal = junctures(terms, circular)
            .into_iter()
            .all(|t| dm.is_legal(t));
        if legal && terms.iter().all(|t| term_persists(f, dm, t)) {
            return SplitStatus::Exact;
        }
    }
    let mut images = terms.to_vec();
    for i in 1..=k_bound {
        images = images.iter().map(|t| f.sharp(t)).collect();
        if !concatenates(&images, circular) {
            return SplitStatus::Failed(i);
        }
    }
    SplitStatus::Certified(k_bound)
}

/// Checks that `breakpoints` split `p`. Exact when every juncture turn is
/// legal and every term keeps its end directions under iteration;
/// otherwise iterates up to `k_bound` are checked directly.
pub fn verify_splitting(
    f: &GraphMap,
    p: &Subject,
    breakpoints: &[usize],
    k_bound: usize,
) -> Splitting {
    let g = f.graph();
    let breakpoints = normalize_breakpoints(p, breakpoints);
    let bounds = bounds_of(p, &breakpoints);
    let terms: Vec<EdgePath> = bounds
        .iter()
        .map(|&(lo, hi)| p.segment(g, lo, hi))
        .collect();
    let status = if p.is_empty() {
        SplitStatus::Exact
    } else {
        verify_terms(f, &terms, p.is_circuit(), k_bound)
    };
    Splitting {
        subject: p.clone(),
        tags: vec![TermTag::Unclassified; terms.len()],
        breakpoints,
        status,
    }
}

#[derive(Clone, Debug)]
struct LinearEdge {
    edge: OrientedEdge,
    w: Vec<OrientedEdge>,
    d: i64,
}

/// Precomputed term recognition for one map and filtration.
pub struct Splitter<'a> {
    f: &'a GraphMap,
    phi: &'a Filtration,
    classes: Vec<StratumClass>,
    inps: Vec<Vec<OrientedEdge>>,
    linear: Vec<LinearEdge>,
    /// Iterates of irreducible edges with the height of the edge.
    taken_in: Vec<(usize, Vec<OrientedEdge>)>,
    certify_depth: usize,
    images: RefCell<HashMap<Vec<OrientedEdge>, Vec<EdgePath>>>,
}

/// INP words closed under `f_#` orbits and reversal.
fn expand_inps(f: &GraphMap, inps: &[NielsenRecord]) -> Vec<Vec<OrientedEdge>> {
    let mut out = BTreeSet::new();
    for rec in inps {
        let mut q = rec.path.clone();
        for _ in 0..rec.period.max(1) {
            out.insert(q.edges().to_vec());
            out.insert(q.reverse().edges().to_vec());
            q = f.sharp(&q);
        }
    }
    let mut v: Vec<Vec<OrientedEdge>> = out.into_iter().filter(|w| !w.is_empty()).collect();
    // longer words first so that ties resolve the same way every time
    v.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    v
}

impl<'a> Splitter<'a> {
    pub fn new(
        f: &'a GraphMap,
        phi: &'a Filtration,
        inps: &[NielsenRecord],
    ) -> Result<Self, SplittingError> {
        Self::with_depths(f, phi, inps, DEFAULT_CERTIFY_DEPTH, DEFAULT_TAKEN_DEPTH)
    }

    pub fn with_depths(
        f: &'a GraphMap,
        phi: &'a Filtration,
        inps: &[NielsenRecord],
        certify_depth: usize,
        taken_depth: usize,
    ) -> Result<Self, SplittingError> {
        let classes = classify_all(f, phi)?;
        let mut linear = Vec::new();
        for c in &classes {
            if let StratumClass::Neg { edges: Some(es) } = c {
                for e in es {
                    if let NegKind::Linear { w: Some(w), d } = &e.kind {
                        linear.push(LinearEdge {
                            edge: e.edge,
                            w: w.edges().to_vec(),
                            d: *d,
                        });
                    }
                }
            }
        }
        let mut taken_in = Vec::new();
        let has_zero = classes.iter().any(|c| c.is_zero());
        if has_zero {
            for (i, c) in classes.iter().enumerate() {
                if !c.is_irreducible() {
                    continue;
                }
                for e in phi.stratum(i + 1) {
                    let mut q = f.image(OrientedEdge::forward(e));
                    for _ in 0..taken_depth {
                        if q.len() > MAX_ITERATE_LEN {
                            break;
                        }
                        taken_in.push((i + 1, q.edges().to_vec()));
                        q = f.sharp(&q);
                    }
                }
            }
        }
        Ok(Splitter {
            f,
            phi,
            classes,
            inps: expand_inps(f, inps),
            linear,
            taken_in,
            certify_depth,
            images: RefCell::new(HashMap::new()),
        })
    }

    fn class_of(&self, d: OrientedEdge) -> &StratumClass {
        &self.classes[self.phi.edge_height(d.edge()) - 1]
    }

    /// `f^k_#(t)` for `k = 1..=certify_depth`.
    fn iterates(&self, t: &EdgePath) -> Vec<EdgePath> {
        if let Some(v) = self.images.borrow().get(t.edges()) {
            return v.clone();
        }
        let mut v = Vec::with_capacity(self.certify_depth);
        let mut q = t.clone();
        for _ in 0..self.certify_depth {
            q = self.f.sharp(&q);
            v.push(q.clone());
        }
        self.images
            .borrow_mut()
            .insert(t.edges().to_vec(), v.clone());
        v
    }

    /// Term images concatenate without cancellation at every checked iterate.
    fn pair_fits(&self, a: &EdgePath, b: &EdgePath) -> bool {
        let (ia, ib) = (self.iterates(a), self.iterates(b));
        ia.iter()
            .zip(&ib)
            .all(|(x, y)| match (x.last(), y.first()) {
                (Some(l), Some(r)) => l != r.reverse(),
                _ => false,
            })
    }

    /// `σ` is a maximal subpath in its zero stratum of some iterate of an
    /// irreducible edge, up to the configured depth.
    fn is_taken(&self, sigma: &[OrientedEdge]) -> bool {
        let j = self.phi.edge_height(sigma[0].edge());
        let rev: Vec<OrientedEdge> = sigma.iter().rev().map(|d| d.reverse()).collect();
        let outside = |w: &[OrientedEdge], i: Option<usize>| {
            i.map_or(true, |i| self.phi.edge_height(w[i].edge()) != j)
        };
        self.taken_in.iter().filter(|(h, _)| *h > j).any(|(_, w)| {
            [sigma, &rev[..]].iter().any(|s| {
                (0..=w.len().saturating_sub(s.len())).any(|at| {
                    w.len() >= s.len()
                        && w[at..at + s.len()] == **s
                        && outside(w, at.checked_sub(1))
                        && outside(w, Some(at + s.len()).filter(|&i| i < w.len()))
                })
            })
        })
    }

    /// Candidate terms starting at `i` in priority order: INP, exceptional
    /// path, irreducible edge, taken zero-stratum path.
    fn candidates(
        &self,
        w: &[OrientedEdge],
        i: usize,
        prev: Option<OrientedEdge>,
    ) -> Vec<(usize, TermTag)> {
        let n = w.len();
        let mut out = Vec::new();
        for u in &self.inps {
            if i + u.len() <= n && w[i..i + u.len()] == u[..] {
                out.push((i + u.len(), TermTag::Inp));
            }
        }
        // E_i w^p Ē_j: the same edge gives the NEG Nielsen family
        for li in &self.linear {
            if w[i] != li.edge {
                continue;
            }
            let wr: Vec<OrientedEdge> = li.w.iter().rev().map(|d| d.reverse()).collect();
            for (unit, positive) in [(&li.w, true), (&wr, false)] {
                let mut pos = i + 1;
                let mut p = 0usize;
                loop {
                    if pos < n {
                        for lj in &self.linear {
                            if w[pos] == lj.edge.reverse()
                                && lj.w == li.w
                                && (li.d > 0) == (lj.d > 0)
                            {
                                let same = lj.edge == li.edge;
                                if same && p > 0 {
                                    out.push((pos + 1, TermTag::Inp));
                                } else if !same && (positive || p > 0) {
                                    out.push((pos + 1, TermTag::ExceptionalPath));
                                }
                            }
                        }
                    }
                    if pos + unit.len() <= n && w[pos..pos + unit.len()] == unit[..] {
                        pos += unit.len();
                        p += 1;
                    } else {
                        break;
                    }
                }
            }
        }
        out.sort_by_key(|&(j, tag)| {
            (
                tag != TermTag::Inp,
                tag != TermTag::ExceptionalPath,
                std::cmp::Reverse(j),
            )
        });
        out.dedup();
        match self.class_of(w[i]) {
            StratumClass::Zero => {
                let h = self.phi.edge_height(w[i].edge());
                let starts_run = prev.map_or(true, |d| self.phi.edge_height(d.edge()) != h);
                if starts_run {
                    let mut j = i;
                    while j < n && self.phi.edge_height(w[j].edge()) == h {
                        j += 1;
                    }
                    if self.is_taken(&w[i..j]) {
                        out.push((j, TermTag::TakenZeroStratum));
                    }
                }
            }
            _ => out.push((i + 1, TermTag::IrreducibleEdge)),
        }
        out
    }

    /// Left-to-right choice of the highest-priority term that still admits
    /// a complete splitting of the rest, decided by a right-to-left pass.
    fn split_word(
        &self,
        p: &EdgePath,
        before_start: Option<OrientedEdge>,
        wrap_to_first: bool,
    ) -> Result<Vec<(usize, usize, TermTag)>, usize> {
        let g = self.f.graph();
        let w = p.edges();
        let n = w.len();
        let cands: Vec<Vec<(usize, TermTag)>> = (0..n)
            .map(|i| self.candidates(w, i, if i == 0 { before_start } else { Some(w[i - 1]) }))
            .collect();
        if let Some(i) = cands.iter().position(|c| c.is_empty()) {
            return Err(i);
        }
        let term = |i: usize, j: usize| p.slice(g, i, j);
        let first_terms: Vec<(usize, TermTag)> = cands[0].clone();
        for &(j0, tag0) in &first_terms {
            let first = term(0, j0);
            // good[i][c]: candidate c at i extends to a complete splitting
            let mut good: Vec<Vec<bool>> = cands.iter().map(|c| vec![false; c.len()]).collect();
            for i in (0..n).rev() {
                for (ci, &(j, _)) in cands[i].iter().enumerate() {
                    if i == 0 && j != j0 {
                        continue;
                    }
                    let t = term(i, j);
                    good[i][ci] = if j == n {
                        !wrap_to_first || self.pair_fits(&t, &first)
                    } else {
                        cands[j]
                            .iter()
                            .enumerate()
                            .any(|(cj, &(k, _))| good[j][cj] && self.pair_fits(&t, &term(j, k)))
                    };
                }
            }
            let Some(c0) = cands[0].iter().position(|&(j, tg)| j == j0 && tg == tag0) else {
                continue;
            };
            if !good[0][c0] {
                continue;
            }
            let mut out = vec![(0, j0, tag0)];
            let mut i = j0;
            while i < n {
                let prev = term(out.last().unwrap().0, i);
                let (_, &(k, tag)) = cands[i]
                    .iter()
                    .enumerate()
                    .find(|(cj, &(k, _))| good[i][*cj] && self.pair_fits(&prev, &term(i, k)))
                    .expect("a good continuation exists");
                out.push((i, k, tag));
                i = k;
            }
            return Ok(out);
        }
        Err(0)
    }

    /// The complete splitting of `p`, if it has one within the recognition
    /// bounds.
    pub fn complete(&self, p: &Subject) -> Result<Splitting, SplittingError> {
        let g = self.f.graph();
        let n = p.len();
        if n == 0 {
            return Err(SplittingError::NotCompletelySplit(0));
        }
        let (breakpoints, tags) = match p {
            Subject::Path(path) => {
                let parts = self
                    .split_word(path, None, false)
                    .map_err(SplittingError::NotCompletelySplit)?;
                (
                    parts.iter().skip(1).map(|t| t.0).collect::<Vec<_>>(),
                    parts.iter().map(|t| t.2).collect::<Vec<_>>(),
                )
            }
            Subject::Circuit(c) => {
                let mut found = None;
                let mut furthest = 0;
                for s in 0..n {
                    let rotated = p.segment(g, s, s + n);
                    let before = Some(c.edges()[(s + n - 1) % n]);
                    match self.split_word(&rotated, before, true) {
                        Ok(parts) => {
                            found = Some((s, parts));
                            break;
                        }
                        Err(i) => furthest = furthest.max((s + i) % n),
                    }
                }
                let (s, parts) = found.ok_or(SplittingError::NotCompletelySplit(furthest))?;
                let mut terms: Vec<(usize, TermTag)> =
                    parts.iter().map(|t| ((t.0 + s) % n, t.2)).collect();
                terms.sort();
                (
                    terms.iter().map(|t| t.0).collect(),
                    terms.iter().map(|t| t.1).collect(),
                )
            }
        };
        let bounds = bounds_of(p, &breakpoints);
        let terms: Vec<EdgePath> = bounds
            .iter()
            .map(|&(lo, hi)| p.segment(g, lo, hi))
            .collect();
        let status = verify_terms(self.f, &terms, p.is_circuit(), self.certify_depth);
        if let SplitStatus::Failed(_) = status {
            return Err(SplittingError::NotCompletelySplit(0));
        }
        Ok(Splitting {
            subject: p.clone(),
            breakpoints,
            tags,
            status,
        })
    }
}

/// The complete splitting of `p`. Ties between readings resolve as INP,
/// then exceptional path, then edge.
pub fn complete_splitting(
    f: &GraphMap,
    phi: &Filtration,
    p: &Subject,
    inps: &[NielsenRecord],
) -> Result<Splitting, SplittingError> {
    Splitter::new(f, phi, inps)?.complete(p)
}

/// Least `k ≤ iterate_bound` with `f^k_#(p)` completely split.
pub fn eventual_complete_splitting(
    f: &GraphMap,
    phi: &Filtration,
    p: &Subject,
    iterate_bound: usize,
    inps: &[NielsenRecord],
) -> Result<(usize, Splitting), SplittingError> {
    let splitter = Splitter::new(f, phi, inps)?;
    let mut q = p.clone();
    for k in 0..=iterate_bound {
        match splitter.complete(&q) {
            Ok(s) => return Ok((k, s)),
            Err(SplittingError::NotCompletelySplit(_)) => {}
            Err(e) => return Err(e),
        }
        if k < iterate_bound {
            q = q.sharp(f)?;
            if q.len() > MAX_ITERATE_LEN {
                return Err(SplittingError::Inconclusive(format!(
                    "iterate {} is too long",
                    k + 1
                )));
            }
        }
    }
    Err(SplittingError::Inconclusive(format!(
        "not completely split within {iterate_bound} iterates"
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Attraction {
    /// `f^k_#(σ)` splits off the H_r edge at `position`.
    Attracted {
        k: usize,
        position: usize,
        status: SplitStatus,
    },
    NotAttractedWithinBound {
        bound: usize,
    },
}

fn require_eg(
    phi: &Filtration,
    classes: &[StratumClass],
    r: usize,
) -> Result<bool, SplittingError> {
    phi.check_level(r)?;
    match &classes[r - 1] {
        StratumClass::Eg { aperiodic, .. } => Ok(*aperiodic),
        _ => Err(SplittingError::NotEg(r)),
    }
}

/// Breakpoints isolating the edge at `i`.
fn around(subject: &Subject, i: usize) -> Vec<usize> {
    let n = subject.len();
    if subject.is_circuit() {
        vec![i, (i + 1) % n]
    } else {
        vec![i, i + 1]
    }
}

/// Looks for an iterate with a splitting that has an H_r edge as a term.
pub fn weak_attraction_test(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    sigma: &Subject,
    iterate_bound: usize,
) -> Result<Attraction, SplittingError> {
    let classes = classify_all(f, phi)?;
    require_eg(phi, &classes, r)?;
    let mut q = sigma.clone();
    for k in 0..=iterate_bound {
        for (i, d) in q.edges().iter().enumerate() {
            if phi.edge_height(d.edge()) != r {
                continue;
            }
            let s = verify_splitting(f, &q, &around(&q, i), DEFAULT_CERTIFY_DEPTH);
            if s.is_split() {
                return Ok(Attraction::Attracted {
                    k,
                    position: i,
                    status: s.status,
                });
            }
        }
        if k < iterate_bound {
            q = q.sharp(f)?;
            if q.len() > MAX_ITERATE_LEN {
                break;
            }
        }
    }
    Ok(Attraction::NotAttractedWithinBound {
        bound: iterate_bound,
    })
}

/// Number of illegal turns of height `r`.
pub fn illegal_turn_count(f: &GraphMap, phi: &Filtration, r: usize, sigma: &Subject) -> usize {
    sigma
        .turns()
        .into_iter()
        .filter(|(_, t)| turn_height_is(phi, *t, r) && !f.is_legal(*t))
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoarseSplit {
    pub k: usize,
    /// r-illegal turn counts of `f^i_#(σ)` for `i = 0..=k`.
    pub counts: Vec<usize>,
    pub splitting: Splitting,
}

/// Splitting of `f^k_#(σ)` into H_r edges, height-r INPs and paths in
/// `G_{r-1}`, for the least `k` within the bound.
pub fn coarse_eg_split(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    sigma: &Subject,
    inps: &[NielsenRecord],
) -> Result<CoarseSplit, SplittingError> {
    coarse_eg_split_with_bound(f, phi, r, sigma, inps, DEFAULT_ITERATE_BOUND)
}

pub fn coarse_eg_split_with_bound(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    sigma: &Subject,
    inps: &[NielsenRecord],
    iterate_bound: usize,
) -> Result<CoarseSplit, SplittingError> {
    let classes = classify_all(f, phi)?;
    if !require_eg(phi, &classes, r)? {
        return Err(SplittingError::Periodic(r));
    }
    if phi.word_height(sigma.edges()) != r {
        return Err(SplittingError::WrongHeight(r));
    }
    let height_r: Vec<NielsenRecord> = inps.iter().filter(|rec| rec.height == r).cloned().collect();
    let words: Vec<(Vec<OrientedEdge>, Vec<usize>)> = expand_inps(f, &height_r)
        .into_iter()
        .map(|w| {
            let inner: Vec<usize> = Turn::taken_by(&w)
                .filter(|(_, t)| turn_height_is(phi, *t, r) && !f.is_legal(*t))
                .map(|(i, _)| i)
                .collect();
            (w, inner)
        })
        .collect();
    let mut counts = Vec::new();
    let mut q = sigma.clone();
    for k in 0..=iterate_bound {
        let c = illegal_turn_count(f, phi, r, &q);
        if counts.last().is_some_and(|&prev| c > prev) {
            return Err(SplittingError::NotMonotone(k));
        }
        counts.push(c);
        if let Some(s) = coarse_attempt(f, phi, r, &q, &words) {
            return Ok(CoarseSplit {
                k,
                counts,
                splitting: s,
            });
        }
        if k < iterate_bound {
            q = q.sharp(f)?;
            if q.len() > MAX_ITERATE_LEN {
                return Err(SplittingError::Inconclusive(format!(
                    "iterate {} is too long",
                    k + 1
                )));
            }
        }
    }
    Err(SplittingError::Inconclusive(format!(
        "no coarse splitting within {iterate_bound} iterates"
    )))
}

/// Covers every r-illegal turn of `q` by an INP occurrence, then cuts the
/// rest into H_r edges and maximal lower paths.
fn coarse_attempt(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    q: &Subject,
    words: &[(Vec<OrientedEdge>, Vec<usize>)],
) -> Option<Splitting> {
    let w = q.edges();
    let n = w.len();
    let circular = q.is_circuit();
    let at = |i: usize| w[i % n];
    let mut covered = vec![false; n];
    let mut segments: Vec<(usize, usize, TermTag)> = Vec::new();
    for (pos, t) in q.turns() {
        if !turn_height_is(phi, t, r)
            || f.is_legal(t)
            || covered[pos % n] && covered[(pos + n - 1) % n]
        {
            continue;
        }
        let mut hit = None;
        'search: for (u, inner) in words {
            if u.len() > n {
                continue;
            }
            for &off in inner {
                let start = if circular {
                    (pos + n - off) % n
                } else if pos >= off && pos - off + u.len() <= n {
                    pos - off
                } else {
                    continue;
                };
                let free = (0..u.len()).all(|k| !covered[(start + k) % n]);
                if free && (0..u.len()).all(|k| at(start + k) == u[k]) {
                    hit = Some((start, u.len()));
                    break 'search;
                }
            }
        }
        let (start, len) = hit?;
        for k in 0..len {
            covered[(start + k) % n] = true;
        }
        segments.push((start, start + len, TermTag::Inp));
    }
    // walk the uncovered edges from a term boundary
    let origin = if !circular {
        0
    } else if let Some(s) = segments.first() {
        s.1 % n
    } else {
        (0..n).find(|&i| phi.edge_height(w[i].edge()) == r)?
    };
    let mut i = origin;
    let mut steps = 0;
    while steps < n {
        if covered[i % n] {
            i += 1;
            steps += 1;
            continue;
        }
        if phi.edge_height(at(i).edge()) == r {
            segments.push((i, i + 1, TermTag::IrreducibleEdge));
            i += 1;
            steps += 1;
        } else {
            let lo = i;
            while steps < n && !covered[i % n] && phi.edge_height(at(i).edge()) < r {
                i += 1;
                steps += 1;
            }
            segments.push((lo, i, TermTag::LowerStratum));
        }
        if !circular && i >= n {
            break;
        }
    }
    let mut segs: Vec<(usize, TermTag)> = segments.iter().map(|s| (s.0 % n, s.2)).collect();
    segs.sort();
    let bps: Vec<usize> = segs.iter().map(|s| s.0).collect();
    let mut s = verify_splitting(f, q, &bps, DEFAULT_CERTIFY_DEPTH);
    if !s.is_split() || s.breakpoints.len() != segs.len() - usize::from(!circular) {
        return None;
    }
    s.tags = segs.into_iter().map(|x| x.1).collect();
    Some(s)
}
