//! Tiles, attracting neighborhoods of the leaf of an EG stratum, principal
//! vertices and directions, and rays.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::graphs::{common_prefix, find_subslice, EdgePath, OrientedEdge, VertexId};
use crate::maps::{GraphMap, MapError};
use crate::nielsen::NielsenRecord;
use crate::strata::ct::{periodic_vertices, principal_vertices};
use crate::strata::{
    classify_all, classify_stratum, perron, transition_matrix, Filtration, NegKind, StrataError,
    StratumClass,
};
use crate::Real;

/// Longest path the dynamics routines will build before giving up.
pub const MAX_PATH_LEN: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("{0} is not an edge of an EG stratum at the requested height")]
    NotEgEdge(String),
    #[error("stratum H_{0} is not exponentially growing")]
    NotEg(usize),
    #[error("no edge of the stratum has an image crossing itself in its interior; pass a power of the map")]
    NoInteriorFixedPoint,
    #[error("{0} does not have an f-fixed initial direction")]
    NoFixedInitialDirection(String),
    #[error("{0} is a fixed edge")]
    FixedEdge(String),
    #[error("ray and Nielsen path do not share an initial direction")]
    NoSharedInitialDirection,
    #[error("ray prefix does not contain the first half of the Nielsen path")]
    PrefixTooShort,
    #[error("ray follows the Nielsen path past its illegal turn")]
    OverlapMismatch,
    #[error("Nielsen path has no EG decomposition")]
    NotEgInp,
    #[error("tile decomposition is not a splitting: {0}")]
    NotSplit(String),
    #[error("path length budget exhausted: {0}")]
    BudgetExceeded(String),
    #[error(transparent)]
    Strata(#[from] StrataError),
    #[error(transparent)]
    Map(#[from] MapError),
}

type Result<T> = std::result::Result<T, DynamicsError>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tile {
    pub level: usize,
    pub edge: OrientedEdge,
    pub k: usize,
    pub path: EdgePath,
}

fn require_eg(f: &GraphMap, phi: &Filtration, r: usize) -> Result<Real> {
    if r == 0 || r > phi.top() {
        return Err(DynamicsError::NotEg(r));
    }
    match classify_stratum(f, phi, r)? {
        StratumClass::Eg { lambda, .. } => Ok(lambda),
        _ => Err(DynamicsError::NotEg(r)),
    }
}

fn lr(phi: &Filtration, r: usize, p: &EdgePath) -> usize {
    p.edges()
        .iter()
        .filter(|d| phi.edge_height(d.edge()) == r)
        .count()
}

/// Incrementally extended tiles `f^k_#(E)` of one EG stratum.
pub struct Tiles<'a> {
    f: &'a GraphMap,
    r: usize,
    cache: HashMap<OrientedEdge, Vec<EdgePath>>,
}

impl<'a> Tiles<'a> {
    pub fn new(f: &'a GraphMap, phi: &Filtration, r: usize) -> Result<Self> {
        require_eg(f, phi, r)?;
        Ok(Tiles {
            f,
            r,
            cache: HashMap::new(),
        })
    }

    pub fn get(&mut self, phi: &Filtration, e: OrientedEdge, k: usize) -> Result<&EdgePath> {
        if phi.edge_height(e.edge()) != self.r {
            return Err(DynamicsError::NotEgEdge(self.f.graph().token(e)));
        }
        let g = self.f.graph().clone();
        let seq = self
            .cache
            .entry(e)
            .or_insert_with(|| vec![g.path(g.init(e), &[e]).expect("edge path")]);
        while seq.len() <= k {
            let next = self.f.sharp(seq.last().unwrap());
            if next.len() > MAX_PATH_LEN {
                return Err(DynamicsError::BudgetExceeded(format!(
                    "tile of {} at k={}",
                    g.token(e),
                    seq.len()
                )));
            }
            seq.push(next);
        }
        Ok(&seq[k])
    }
}

/// The `k`-tile of height `r` generated by `e`.
pub fn tile(f: &GraphMap, phi: &Filtration, r: usize, e: OrientedEdge, k: usize) -> Result<Tile> {
    if e.edge() >= f.graph().edge_count() || phi.edge_height(e.edge()) != r {
        return Err(DynamicsError::NotEgEdge(format!("{e:?}")));
    }
    let token = f.graph().token(e);
    let mut tiles = Tiles::new(f, phi, r).map_err(|err| match err {
        DynamicsError::NotEg(_) => DynamicsError::NotEgEdge(token),
        other => other,
    })?;
    let path = tiles.get(phi, e, k)?.clone();
    Ok(Tile {
        level: r,
        edge: e,
        k,
        path,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeGrowth {
    pub edge: OrientedEdge,
    /// `ℓ_r(f^k_#(E))` for `k = 0..=k_max`.
    pub lengths: Vec<usize>,
    /// Successive quotients of `lengths`.
    pub ratios: Vec<Real>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainmentFailure {
    pub outer: OrientedEdge,
    pub outer_k: usize,
    pub inner: OrientedEdge,
    pub inner_k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TileStatistics {
    pub level: usize,
    pub lambda: Real,
    pub k_max: usize,
    pub growth: Vec<EdgeGrowth>,
    /// Least `p` with `M^p > 0`; absent for periodic transition matrices.
    pub p: Option<usize>,
    /// Number of `(k+p)`-tile versus `i`-tile comparisons made.
    pub containment_checks: usize,
    pub containment_failures: Vec<ContainmentFailure>,
}

impl TileStatistics {
    pub fn containment_holds(&self) -> bool {
        self.p.is_some() && self.containment_failures.is_empty()
    }

    /// Largest `|ratio - λ|` over all edges at exponent `k`.
    pub fn ratio_error(&self, k: usize) -> Option<Real> {
        self.growth
            .iter()
            .map(|g| g.ratios.get(k).map(|x| (x - self.lambda).abs()))
            .try_fold(0.0 as Real, |m, x| x.map(|x| m.max(x)))
    }
}

/// Growth of tiles of height `r` up to exponent `k_max`, with the
/// containment of every `i`-tile in every `(k+p)`-tile for `i ≤ k ≤ k_max - p`.
pub fn tile_statistics(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    k_max: usize,
) -> Result<TileStatistics> {
    let lambda = require_eg(f, phi, r)?;
    let g = f.graph().clone();
    let m = transition_matrix(f, phi, r)?;
    let p = perron::primitivity_exponent(&m.entries);
    let mut tiles = Tiles::new(f, phi, r)?;
    let edges: Vec<OrientedEdge> = phi
        .stratum(r)
        .into_iter()
        .map(OrientedEdge::forward)
        .collect();
    let mut growth = Vec::new();
    for &e in &edges {
        let mut lengths = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            lengths.push(lr(phi, r, tiles.get(phi, e, k)?));
        }
        let ratios = lengths
            .windows(2)
            .map(|w| w[1] as Real / w[0] as Real)
            .collect();
        growth.push(EdgeGrowth {
            edge: e,
            lengths,
            ratios,
        });
    }
    let mut checks = 0;
    let mut failures = Vec::new();
    if let Some(p) = p {
        for k in 0..=k_max.saturating_sub(p) {
            if k + p > k_max {
                break;
            }
            for &outer in &edges {
                let big = tiles.get(phi, outer, k + p)?.clone();
                for &inner in &edges {
                    for i in 0..=k {
                        checks += 1;
                        let small = tiles.get(phi, inner, i)?;
                        if !big.contains_unoriented(&g, small) {
                            failures.push(ContainmentFailure {
                                outer,
                                outer_k: k + p,
                                inner,
                                inner_k: i,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(TileStatistics {
        level: r,
        lambda,
        k_max,
        growth,
        p,
        containment_checks: checks,
        containment_failures: failures,
    })
}

/// A finite piece `A_N · E · B_N = f^N_#(E)` of the leaf fixed by `f_#`,
/// grown from an occurrence of `E` in the interior of `f(E)`.
struct Leaf {
    seed: OrientedEdge,
    alpha: EdgePath,
    beta: EdgePath,
    segs: Vec<EdgePath>,
    centers: Vec<usize>,
}

impl Leaf {
    fn new(f: &GraphMap, seed: OrientedEdge, at: usize) -> Self {
        let g = f.graph();
        let img = f.image(seed);
        let alpha = img.slice(g, 0, at);
        let beta = img.slice(g, at + 1, img.len());
        let e = g.path(g.init(seed), &[seed]).expect("edge path");
        Leaf {
            seed,
            alpha,
            beta,
            segs: vec![e],
            centers: vec![0],
        }
    }

    fn grow(&mut self, f: &GraphMap) -> Result<()> {
        let g = f.graph();
        let s = self.segs.last().unwrap();
        let c = *self.centers.last().unwrap();
        let a = f.sharp(&s.slice(g, 0, c));
        let b = f.sharp(&s.slice(g, c + 1, s.len()));
        let not_split = || DynamicsError::NotSplit("leaf segment cancels at the seed".into());
        let left = a.concat_reduced(&self.alpha).ok_or_else(not_split)?;
        let e = g.path(g.init(self.seed), &[self.seed]).expect("edge path");
        let right = self.beta.concat_reduced(&b).ok_or_else(not_split)?;
        let next = left
            .concat_reduced(&e)
            .and_then(|x| x.concat_reduced(&right))
            .ok_or_else(not_split)?;
        if next != f.sharp(s) {
            return Err(not_split());
        }
        if next.len() > MAX_PATH_LEN {
            return Err(DynamicsError::BudgetExceeded(format!(
                "leaf segment at N={}",
                self.segs.len()
            )));
        }
        self.centers.push(left.len());
        self.segs.push(next);
        Ok(())
    }
}

/// First `(E, j)` with `E` an edge of `H_r` and `f(E)[j] = E`, `0 < j < |f(E)| - 1`.
fn interior_seed(f: &GraphMap, phi: &Filtration, r: usize) -> Option<(OrientedEdge, usize)> {
    for e in phi.stratum(r) {
        let d = OrientedEdge::forward(e);
        let img = f.image(d);
        let n = img.len();
        if let Some(j) = (1..n.saturating_sub(1)).find(|&j| img.edges()[j] == d) {
            return Some((d, j));
        }
    }
    None
}

/// Positions of `H_r` edges in `p`.
fn hr_positions(phi: &Filtration, r: usize, p: &EdgePath) -> Vec<usize> {
    p.edges()
        .iter()
        .enumerate()
        .filter(|(_, d)| phi.edge_height(d.edge()) == r)
        .map(|(i, _)| i)
        .collect()
}

/// Tile indices for the pushforward of `segs[m]` onto `segs[m + k]`: for
/// each `H_r` edge `E_j` of the smaller segment (indexed relative to the
/// seed), the index of the first `H_r` edge of its `k`-tile.
fn tile_starts(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    leaf: &Leaf,
    m: usize,
    k: usize,
    tiles: &mut Tiles,
) -> Result<BTreeMap<i64, i64>> {
    let g = f.graph();
    let small = &leaf.segs[m];
    let big = &leaf.segs[m + k];
    let big_hr = hr_positions(phi, r, big);
    let big_zero = big_hr
        .binary_search(&leaf.centers[m + k])
        .expect("seed is in H_r") as i64;
    let small_hr = hr_positions(phi, r, small);
    let small_zero = small_hr
        .binary_search(&leaf.centers[m])
        .expect("seed is in H_r") as i64;
    let mut out = BTreeMap::new();
    let mut acc: Vec<OrientedEdge> = Vec::with_capacity(big.len());
    let mut i = 0;
    let mut idx = 0i64;
    while i < small.len() {
        let d = small.edges()[i];
        if phi.edge_height(d.edge()) == r {
            let t = tiles.get(phi, d, k)?;
            let at = acc.len();
            let Ok(h) = big_hr.binary_search(&at) else {
                return Err(DynamicsError::NotSplit(
                    "tile does not start with an H_r edge".into(),
                ));
            };
            out.insert(idx - small_zero, h as i64 - big_zero);
            acc.extend_from_slice(t.edges());
            idx += 1;
            i += 1;
        } else {
            let mut j = i;
            while j < small.len() && phi.edge_height(small.edges()[j].edge()) != r {
                j += 1;
            }
            let mu = f.iterate(&small.slice(g, i, j), k);
            acc.extend_from_slice(mu.edges());
            i = j;
        }
    }
    if acc != big.edges() {
        return Err(DynamicsError::NotSplit(
            "tile images do not concatenate to the leaf segment".into(),
        ));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttractingBasis {
    pub level: usize,
    pub seed: OrientedEdge,
    /// Position of the seed inside `f(seed)`.
    pub seed_position: usize,
    pub lambda: Real,
    /// `(λ + 1) / 2`.
    pub lambda_prime: Real,
    /// Exponent with `ℓ_r(f^{k+1}_#(E)) / ℓ_r(f^k_#(E)) > λ'` for every edge.
    pub k: usize,
    /// Index of the first emitted neighborhood.
    pub start: usize,
    /// `(i, a(i), b(i))` over the computed range.
    pub indices: Vec<(i64, i64, i64)>,
    pub gammas: Vec<EdgePath>,
    /// Offset of `γ_{i+1}` inside `f_#(γ_i)`.
    pub nesting: Vec<usize>,
}

/// Nested neighborhoods `γ_0 ⊂ γ_1 ⊂ …` of the attracting lamination of
/// `H_r`, read off the leaf through a fixed point interior to an edge, with
/// `f_#(γ_i) ⊇ γ_{i+1}` checked for every emitted `i`.
pub fn attracting_basis(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    depth: usize,
) -> Result<AttractingBasis> {
    if r == 0 || r > phi.top() {
        return Err(DynamicsError::NotEg(r));
    }
    let Some((seed, at)) = interior_seed(f, phi, r) else {
        return Err(DynamicsError::NoInteriorFixedPoint);
    };
    let lambda = require_eg(f, phi, r)?;
    let lambda_prime = (lambda + 1.0) / 2.0;
    let g = f.graph().clone();
    let mut tiles = Tiles::new(f, phi, r)?;

    let edges: Vec<OrientedEdge> = phi
        .stratum(r)
        .into_iter()
        .map(OrientedEdge::forward)
        .collect();
    let mut k = 0;
    loop {
        let mut ok = true;
        for &e in &edges {
            let a = lr(phi, r, tiles.get(phi, e, k)?) as Real;
            let b = lr(phi, r, tiles.get(phi, e, k + 1)?) as Real;
            ok &= b > lambda_prime * a;
        }
        if ok {
            break;
        }
        k += 1;
    }

    let mut leaf = Leaf::new(f, seed, at);
    // smallest segment whose tile range covers the indices we need
    let mut m = 1;
    loop {
        while leaf.segs.len() <= m + k + 1 {
            leaf.grow(f)?;
        }
        let a = tile_starts(f, phi, r, &leaf, m + 1, k, &mut tiles)?;
        let b = tile_starts(f, phi, r, &leaf, m, k + 1, &mut tiles)?;
        let reach = (-*b.keys().next().unwrap()).min(*b.keys().last().unwrap());
        let big = &leaf.segs[m + k + 1];
        let big_hr = hr_positions(phi, r, big);
        let zero = big_hr.binary_search(&leaf.centers[m + k + 1]).unwrap() as i64;
        let pos = |h: i64| big_hr[(h + zero) as usize];
        let eventually = |i: i64| b[&-i] < a[&-i] && a[&i] < b[&i];
        // the γ_i need a(±i) for i ≤ start + depth + 1
        for start in 1..=reach {
            let last = start + depth as i64 + 1;
            if last > reach {
                break;
            }
            if !(start..=reach).all(eventually) {
                continue;
            }
            let gamma = |i: i64| big.slice(&g, pos(a[&-i]), pos(a[&i] - 1) + 1);
            let gammas: Vec<EdgePath> = (start..=last).map(gamma).collect();
            let mut nesting = Vec::new();
            for w in gammas.windows(2) {
                match find_subslice(f.sharp(&w[0]).edges(), w[1].edges()) {
                    Some(o) => nesting.push(o),
                    None => break,
                }
            }
            if nesting.len() < depth + 1 {
                continue;
            }
            let mut gammas = gammas;
            gammas.pop();
            nesting.truncate(depth);
            for p in &gammas {
                let ends = [p.first(), p.last()];
                if ends
                    .iter()
                    .any(|d| d.is_none_or(|d| phi.edge_height(d.edge()) != r))
                {
                    return Err(DynamicsError::NotSplit(
                        "neighborhood does not end in H_r".into(),
                    ));
                }
            }
            let indices = b
                .keys()
                .filter(|i| a.contains_key(i))
                .map(|&i| (i, a[&i], b[&i]))
                .collect();
            return Ok(AttractingBasis {
                level: r,
                seed,
                seed_position: at,
                lambda,
                lambda_prime,
                k,
                start: start as usize,
                indices,
                gammas,
                nesting,
            });
        }
        m += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrincipalStructure {
    pub periodic_vertices: BTreeSet<VertexId>,
    pub principal_vertices: BTreeSet<VertexId>,
    /// Periodic directions at each periodic vertex.
    pub periodic_directions: BTreeMap<VertexId, Vec<OrientedEdge>>,
    /// Fixed directions at each fixed vertex.
    pub fixed_directions: BTreeMap<VertexId, Vec<OrientedEdge>>,
    /// Nonfixed, nonlinear edges with fixed initial direction at a principal vertex.
    pub principal_directions: Vec<OrientedEdge>,
}

/// Edges of linear NEG strata with a nontrivial tail.
fn linear_edges(f: &GraphMap, phi: &Filtration) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for class in classify_all(f, phi)? {
        if let StratumClass::Neg { edges: Some(es) } = class {
            for e in es {
                if matches!(e.kind, NegKind::Linear { w: Some(_), .. }) {
                    out.insert(e.edge.edge());
                }
            }
        }
    }
    Ok(out)
}

pub fn principal_structure(
    f: &GraphMap,
    phi: &Filtration,
    inps: &[NielsenRecord],
) -> Result<PrincipalStructure> {
    let g = f.graph();
    let dm = f.direction_map()?;
    let periodic = periodic_vertices(f);
    let principal = principal_vertices(f, phi, inps);
    let linear = linear_edges(f, phi)?;
    let mut periodic_directions = BTreeMap::new();
    let mut fixed_directions = BTreeMap::new();
    for &v in &periodic {
        let dirs = g.directions_at(v);
        periodic_directions.insert(
            v,
            dirs.iter()
                .copied()
                .filter(|d| dm.periodic().contains(d))
                .collect(),
        );
        if f.vertex(v) == v {
            fixed_directions.insert(
                v,
                dirs.iter().copied().filter(|d| dm.df(*d) == *d).collect(),
            );
        }
    }
    let mut principal_directions = Vec::new();
    for &v in &principal {
        for &d in g.directions_at(v) {
            let img = f.image(d);
            let fixed_edge = img.len() == 1 && img.edges()[0] == d;
            if dm.df(d) == d && !fixed_edge && !linear.contains(&d.edge()) {
                principal_directions.push(d);
            }
        }
    }
    principal_directions.sort();
    principal_directions.dedup();
    Ok(PrincipalStructure {
        periodic_vertices: periodic,
        principal_vertices: principal,
        periodic_directions,
        fixed_directions,
        principal_directions,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RayClass {
    Principal,
    Linear,
    ExceptionalSeed,
    NonprincipalFixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayPrefix {
    pub seed: OrientedEdge,
    pub depth: usize,
    pub path: EdgePath,
    pub class: RayClass,
    /// For a linear seed `f(E) = E·u`, the prefix `E·ū^k` of the ray heading
    /// the other way around the axis of `u`.
    pub companion: Option<Box<RayPrefix>>,
}

/// `E·u·f_#(u)·…·f^{k-1}_#(u)` for `f(E) = E·u`.
pub fn ray_prefix(
    f: &GraphMap,
    phi: &Filtration,
    inps: &[NielsenRecord],
    e: OrientedEdge,
    k: usize,
) -> Result<RayPrefix> {
    let g = f.graph();
    let dm = f.direction_map()?;
    let img = f.image(e);
    if img.len() == 1 && img.edges()[0] == e {
        return Err(DynamicsError::FixedEdge(g.token(e)));
    }
    if dm.df(e) != e || img.first() != Some(e) {
        return Err(DynamicsError::NoFixedInitialDirection(g.token(e)));
    }
    let u = img.slice(g, 1, img.len());
    let edge = g.path(g.init(e), &[e]).expect("edge path");
    let not_split = || DynamicsError::NotSplit(format!("ray of {} cancels", g.token(e)));
    let mut path = edge.clone();
    let mut cur = u.clone();
    for _ in 0..k {
        path = path.concat_reduced(&cur).ok_or_else(not_split)?;
        if path.len() > MAX_PATH_LEN {
            return Err(DynamicsError::BudgetExceeded(format!(
                "ray of {}",
                g.token(e)
            )));
        }
        cur = f.sharp(&cur);
    }
    let linear = !u.is_empty() && f.sharp(&u) == u;
    let (class, companion) = if linear {
        let ubar = u.reverse();
        let mut other = edge.clone();
        for _ in 0..k {
            other = other.concat_reduced(&ubar).ok_or_else(not_split)?;
        }
        let comp = RayPrefix {
            seed: e,
            depth: k,
            path: other,
            class: RayClass::ExceptionalSeed,
            companion: None,
        };
        (RayClass::Linear, Some(Box::new(comp)))
    } else if principal_vertices(f, phi, inps).contains(&g.init(e)) {
        (RayClass::Principal, None)
    } else {
        (RayClass::NonprincipalFixed, None)
    };
    Ok(RayPrefix {
        seed: e,
        depth: k,
        path,
        class,
        companion,
    })
}

/// Swap the first half `α₁` of an EG INP `ρ = α₁·ᾱ₂` at the start of `ray`
/// for `α₂`.
pub fn exchange_across_inp(
    f: &GraphMap,
    ray: &RayPrefix,
    rho: &NielsenRecord,
) -> Result<RayPrefix> {
    let g = f.graph();
    let Some((alpha, beta)) = &rho.decomposition else {
        return Err(DynamicsError::NotEgInp);
    };
    let first = ray.path.first();
    let (a1, a2) = if first.is_some() && first == alpha.first() {
        (alpha.clone(), beta.reverse())
    } else if first.is_some() && first == beta.reverse().first() {
        (beta.reverse(), alpha.clone())
    } else {
        return Err(DynamicsError::NoSharedInitialDirection);
    };
    let n = a1.len();
    if common_prefix(ray.path.edges(), a1.edges()) < n {
        return Err(DynamicsError::PrefixTooShort);
    }
    let rest = ray.path.slice(g, n, ray.path.len());
    let path = a2
        .concat_reduced(&rest)
        .ok_or(DynamicsError::OverlapMismatch)?;
    Ok(RayPrefix {
        seed: a2.first().expect("INP halves are nontrivial"),
        depth: ray.depth,
        path,
        class: ray.class,
        companion: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::MarkedGraph;
    use crate::nielsen::find_inps;
    use std::sync::Arc;

    fn ex1() -> GraphMap {
        let g = Arc::new(MarkedGraph::rose(&["a", "b"]));
        GraphMap::from_strs(g, &[("a", "b"), ("b", "b a")]).unwrap()
    }

    fn ex3() -> (GraphMap, Filtration) {
        let g = Arc::new(MarkedGraph::rose(&["a", "e"]));
        let f = GraphMap::from_strs(g.clone(), &[("a", "a"), ("e", "e a")]).unwrap();
        let phi = Filtration::from_strata(&g, vec![[0].into(), [1].into()]).unwrap();
        (f, phi)
    }

    fn word(f: &GraphMap, p: &EdgePath) -> String {
        f.graph().format_word(p.edges())
    }

    #[test]
    fn tiles_of_ex1() {
        let f = ex1();
        let phi = Filtration::single(f.graph());
        let a = OrientedEdge::forward(0);
        let b = OrientedEdge::forward(1);
        assert_eq!(word(&f, &tile(&f, &phi, 1, a, 0).unwrap().path), "a");
        assert_eq!(word(&f, &tile(&f, &phi, 1, a, 2).unwrap().path), "b a");
        assert_eq!(word(&f, &tile(&f, &phi, 1, b, 1).unwrap().path), "b a");
        let st = tile_statistics(&f, &phi, 1, 15).unwrap();
        assert_eq!(st.p, Some(2));
        assert!(st.containment_holds());
        assert!(st.ratio_error(14).unwrap() < 0.02);
        let (f3, phi3) = ex3();
        assert!(matches!(
            tile(&f3, &phi3, 2, OrientedEdge::forward(1), 1),
            Err(DynamicsError::NotEgEdge(_))
        ));
        assert!(matches!(
            tile_statistics(&f3, &phi3, 2, 4),
            Err(DynamicsError::NotEg(2))
        ));
    }

    #[test]
    fn basis_needs_a_power() {
        let f = ex1();
        let phi = Filtration::single(f.graph());
        assert_eq!(
            attracting_basis(&f, &phi, 1, 8),
            Err(DynamicsError::NoInteriorFixedPoint)
        );
        assert_eq!(
            attracting_basis(&f.power(2), &phi, 1, 8),
            Err(DynamicsError::NoInteriorFixedPoint)
        );
        let f3 = f.power(3);
        let basis = attracting_basis(&f3, &phi, 1, 8).unwrap();
        assert_eq!(basis.gammas.len(), 9);
        assert_eq!(basis.nesting.len(), 8);
        for (i, w) in basis.gammas.windows(2).enumerate() {
            assert!(f3.sharp(&w[0]).contains(f3.graph(), &w[1]), "i={i}");
            assert!(w[1].contains(f3.graph(), &w[0]));
        }
        let zero = attracting_basis(&f3, &phi, 1, 0).unwrap();
        assert_eq!(zero.gammas.len(), 1);
        assert_eq!(zero.gammas[0], basis.gammas[0]);
        let (g3, phi3) = ex3();
        assert_eq!(
            attracting_basis(&g3, &phi3, 2, 3),
            Err(DynamicsError::NoInteriorFixedPoint)
        );
    }

    #[test]
    fn principal_data() {
        let g = Arc::new(MarkedGraph::rose(&["a", "b"]));
        let id = GraphMap::identity(g.clone());
        let phi = Filtration::from_strata(&g, vec![[0].into(), [1].into()]).unwrap();
        let ps = principal_structure(&id, &phi, &[]).unwrap();
        assert_eq!(ps.principal_vertices.len(), 1);
        assert!(ps.principal_directions.is_empty());

        let f2 = ex1().power(2);
        let phi = Filtration::single(f2.graph());
        let inps = find_inps(&f2, &phi, 1, 12, 2).unwrap().records;
        let ps = principal_structure(&f2, &phi, &inps).unwrap();
        assert!(ps.principal_vertices.contains(&0));
        assert!(ps.fixed_directions[&0].contains(&OrientedEdge::forward(1)));
        assert!(ps.principal_directions.contains(&OrientedEdge::forward(1)));

        let (f3, phi3) = ex3();
        let ps = principal_structure(&f3, &phi3, &[]).unwrap();
        assert!(!ps.principal_directions.contains(&OrientedEdge::forward(1)));
    }

    #[test]
    fn rays() {
        let (f, phi) = ex3();
        let e = OrientedEdge::forward(1);
        let r = ray_prefix(&f, &phi, &[], e, 3).unwrap();
        assert_eq!(word(&f, &r.path), "e a a a");
        assert_eq!(r.class, RayClass::Linear);
        assert_eq!(word(&f, &r.companion.unwrap().path), "e ~a ~a ~a");
        assert_eq!(
            word(&f, &ray_prefix(&f, &phi, &[], e, 0).unwrap().path),
            "e"
        );
        assert!(matches!(
            ray_prefix(&f, &phi, &[], OrientedEdge::forward(0), 2),
            Err(DynamicsError::FixedEdge(_))
        ));

        let f2 = ex1().power(2);
        let phi = Filtration::single(f2.graph());
        let b = OrientedEdge::forward(1);
        let mut prev = ray_prefix(&f2, &phi, &[], b, 0).unwrap().path;
        for k in 1..6 {
            let cur = ray_prefix(&f2, &phi, &[], b, k).unwrap().path;
            assert!(cur.edges().starts_with(prev.edges()));
            // prefixes are tiles of b
            assert_eq!(cur, f2.iterate(&prev, 1));
            prev = cur;
        }
        assert!(matches!(
            ray_prefix(&f2, &phi, &[], OrientedEdge::forward(0), 2),
            Err(DynamicsError::NoFixedInitialDirection(_))
        ));
    }

    #[test]
    fn exchange() {
        let f2 = ex1().power(2);
        let g = f2.graph().clone();
        let phi = Filtration::single(&g);
        let inps = find_inps(&f2, &phi, 1, 12, 2).unwrap().records;
        let rho = inps
            .iter()
            .find(|r| r.decomposition.is_some())
            .expect("EX1 has an EG INP");
        let (alpha, beta) = rho.decomposition.clone().unwrap();
        let a2 = beta.reverse();
        // degenerate swap
        let bare = RayPrefix {
            seed: alpha.first().unwrap(),
            depth: 0,
            path: alpha.clone(),
            class: RayClass::Principal,
            companion: None,
        };
        assert_eq!(exchange_across_inp(&f2, &bare, rho).unwrap().path, a2);
        // rays from the two halves agree after the swap
        let seed1 = alpha.first().unwrap();
        let seed2 = a2.first().unwrap();
        let r1 = ray_prefix(&f2, &phi, &inps, seed1, 4).unwrap();
        let r2 = ray_prefix(&f2, &phi, &inps, seed2, 4).unwrap();
        assert!(r1.path.edges().starts_with(alpha.edges()));
        let swapped = exchange_across_inp(&f2, &r1, rho).unwrap();
        let n = swapped.path.len().min(r2.path.len());
        assert!(n > a2.len() + 4);
        assert_eq!(swapped.path.edges()[..n], r2.path.edges()[..n]);
        // NEG INP
        let (f3, phi3) = ex3();
        let neg = find_inps(&f3, &phi3, 2, 8, 1).unwrap().records;
        let rec = neg.iter().find(|r| r.path.len() > 1).expect("e a ~e");
        let r = ray_prefix(&f3, &phi3, &[], OrientedEdge::forward(1), 2).unwrap();
        assert_eq!(
            exchange_across_inp(&f3, &r, rec),
            Err(DynamicsError::NotEgInp)
        );
        let short = RayPrefix {
            seed: seed1,
            depth: 0,
            path: g.path(0, &[seed1]).unwrap(),
            class: RayClass::Principal,
            companion: None,
        };
        if alpha.len() > 1 {
            assert_eq!(
                exchange_across_inp(&f2, &short, rho),
                Err(DynamicsError::PrefixTooShort)
            );
        }
    }
}
