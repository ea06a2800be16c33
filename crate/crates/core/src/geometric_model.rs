//! Weak geometric models of a geometric EG stratum, built from a closed
//! indivisible Nielsen path: the glued polygon, its boundary cycles, the
//! complementary subgraph and the peripheral graph of groups.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::graphs::{Circuit, EdgeId, EdgePath, EdgeSet, MarkedGraph, OrientedEdge, VertexId};
use crate::maps::GraphMap;
use crate::nielsen::NielsenRecord;
use crate::stallings::{carries_class, from_subgraph, is_malnormal, CoreImmersion, SubgroupSystem};
use crate::strata::Filtration;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("Nielsen path is not a closed path of height {0}")]
    NotClosedINP(usize),
    #[error("edge {edge} is crossed {count} times, expected exactly twice")]
    CrossingCountViolation { edge: String, count: usize },
    #[error("attaching map of lower boundary {0} is homotopically trivial")]
    AttachingMapTrivial(usize),
    #[error("upper boundary picks up lower-stratum sides: {0}")]
    UpperBoundaryNotFree(String),
    #[error("boundary image {0} is not contained in the subgraph")]
    BoundaryNotContained(String),
}

type Result<T> = std::result::Result<T, ModelError>;

/// A pair of lower-side subintervals glued together.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gluing {
    pub edge: EdgeId,
    pub first: usize,
    pub second: usize,
    /// Both occurrences have the same orientation in `ρ`, so the gluing
    /// reverses the surface orientation.
    pub twisted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryCycle {
    /// Polygon sides `(index, reversed)` in walk order. Side `n` is the upper arc.
    pub sides: Vec<(usize, bool)>,
    /// Labels of the lower-stratum sides, read along the walk.
    pub labels: Vec<OrientedEdge>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceData {
    /// Labels of the lower side of the square, left to right.
    pub lower_side: Vec<OrientedEdge>,
    pub gluings: Vec<Gluing>,
    /// `V - E + F` of the glued cell structure.
    pub euler_characteristic: i64,
    /// `1 - k` for `k` glued pairs; agrees with the above exactly when the
    /// corners fall into `1 + (number of unglued lower sides)` classes.
    pub disc_euler_characteristic: i64,
    pub orientable: bool,
    /// Genus if orientable, crosscap count otherwise.
    pub genus: i64,
    /// Boundary cycles; cycle 0 contains the upper arc.
    pub boundary: Vec<BoundaryCycle>,
}

impl SurfaceData {
    /// Rank of `π₁S`.
    pub fn rank(&self) -> usize {
        (1 - self.euler_characteristic) as usize
    }
}

/// A component of the complementary subgraph.
#[derive(Clone, Debug, Serialize)]
pub struct LComponent {
    pub vertices: BTreeSet<VertexId>,
    pub edges: EdgeSet,
    /// Carries the loop `E_ρ`.
    pub rho: bool,
    pub rank: usize,
    #[serde(skip)]
    pub immersion: Option<CoreImmersion>,
}

impl LComponent {
    pub fn noncontractible(&self) -> bool {
        self.rank > 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplementaryGraph {
    /// Edges of `G \ H_r`.
    pub edges: EdgeSet,
    /// `E_ρ` is a loop wedged at `p_r` rather than its own circle.
    pub rho_wedged: bool,
    pub components: Vec<LComponent>,
}

impl ComplementaryGraph {
    pub fn contractible_components(&self) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.noncontractible())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn system(&self) -> SubgroupSystem {
        SubgroupSystem::new(
            self.components
                .iter()
                .filter_map(|c| c.immersion.clone())
                .collect(),
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometricModelData {
    pub level: usize,
    pub surface: SurfaceData,
    pub rho: Vec<OrientedEdge>,
    pub base_point: VertexId,
    /// Raw label words `α_i` for the lower boundaries `i = 1..=m`.
    pub attaching_maps: Vec<Vec<OrientedEdge>>,
    /// Their tightened circuits.
    pub attaching_circuits: Vec<Circuit>,
    pub attaching_points: Vec<VertexId>,
    pub complement: ComplementaryGraph,
    /// `[∂_i S]` for `i = 0..=m`.
    pub peripheral: Vec<Circuit>,
    /// Edges of `G_{r-1}`.
    pub lower_edges: EdgeSet,
    #[serde(skip)]
    graph: Option<Arc<MarkedGraph>>,
}

impl GeometricModelData {
    pub fn graph(&self) -> &Arc<MarkedGraph> {
        self.graph
            .as_ref()
            .expect("models are built with their graph")
    }

    pub fn nonorientable(&self) -> bool {
        !self.surface.orientable
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Glue the square along `word` (lower side) and walk its boundary.
/// `upper` marks the labels of the glued stratum.
pub fn glue_polygon(
    word: &[OrientedEdge],
    in_stratum: impl Fn(EdgeId) -> bool,
) -> std::result::Result<SurfaceData, (EdgeId, usize)> {
    let n = word.len();
    let sides = n + 1;
    let mut seen: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
    for (t, d) in word.iter().enumerate() {
        if in_stratum(d.edge()) {
            seen.entry(d.edge()).or_default().push(t);
        }
    }
    let mut gluings = Vec::new();
    let mut partner = vec![None; sides];
    for (&e, ts) in &seen {
        if ts.len() != 2 {
            return Err((e, ts.len()));
        }
        let twisted = word[ts[0]] == word[ts[1]];
        partner[ts[0]] = Some((ts[1], twisted));
        partner[ts[1]] = Some((ts[0], twisted));
        gluings.push(Gluing {
            edge: e,
            first: ts[0],
            second: ts[1],
            twisted,
        });
    }
    // corners: corner c starts side c and ends side c-1
    let mut parent: Vec<usize> = (0..sides).collect();
    for g in &gluings {
        let (s, t) = (g.first, g.second);
        let (s0, s1, t0, t1) = (s, (s + 1) % sides, t, (t + 1) % sides);
        let pairs = if g.twisted {
            [(s0, t0), (s1, t1)]
        } else {
            [(s0, t1), (s1, t0)]
        };
        for (a, b) in pairs {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let v = (0..sides).filter(|&c| find(&mut parent, c) == c).count() as i64;
    let k = gluings.len() as i64;
    let cell_chi = v - (sides as i64 - k) + 1;

    let mut boundary = Vec::new();
    let mut used = vec![false; sides];
    let order = std::iter::once(n).chain(0..n);
    for start in order {
        if partner[start].is_some() || used[start] {
            continue;
        }
        let mut cycle = BoundaryCycle {
            sides: Vec::new(),
            labels: Vec::new(),
        };
        // state: at corner c heading forward (next side c) or backward (next side c-1)
        let (mut c, mut fwd) = (start, true);
        let mut guard = 0;
        loop {
            guard += 1;
            assert!(guard <= 4 * sides * sides + 8, "corner walk does not close");
            let side = if fwd { c } else { (c + sides - 1) % sides };
            if cycle.sides.first() == Some(&(side, !fwd)) {
                break;
            }
            match partner[side] {
                None => {
                    if used[side] && cycle.sides.is_empty() {
                        break;
                    }
                    used[side] = true;
                    cycle.sides.push((side, !fwd));
                    if side < n {
                        let d = word[side];
                        cycle.labels.push(if fwd { d } else { d.reverse() });
                    }
                    c = if fwd { (c + 1) % sides } else { side };
                }
                Some((other, twisted)) => {
                    // we stand at the entry endpoint of `side`; cross to `other`
                    let at_start = fwd;
                    let lands_on_start = at_start == twisted;
                    if lands_on_start {
                        c = other;
                        fwd = false;
                    } else {
                        c = (other + 1) % sides;
                        fwd = true;
                    }
                }
            }
        }
        boundary.push(cycle);
    }
    let orientable = gluings.iter().all(|g| !g.twisted);
    let chi = cell_chi;
    let b = boundary.len() as i64;
    let genus = if orientable {
        (2 - chi - b) / 2
    } else {
        2 - chi - b
    };
    Ok(SurfaceData {
        lower_side: word.to_vec(),
        gluings,
        euler_characteristic: chi,
        disc_euler_characteristic: 1 - k,
        orientable,
        genus,
        boundary,
    })
}

/// Weak geometric model of `H_r` from a closed height-`r` Nielsen path
/// crossing each edge of `H_r` exactly twice.
pub fn build_weak_model(
    f: &GraphMap,
    phi: &Filtration,
    r: usize,
    rho: &NielsenRecord,
) -> Result<GeometricModelData> {
    let g = f.graph().clone();
    let word = rho.path.edges().to_vec();
    if !rho.path.is_closed()
        || rho.path.is_empty()
        || phi.word_height(&word) != r
        || r == 0
        || r > phi.top()
    {
        return Err(ModelError::NotClosedINP(r));
    }
    let counts = rho.path.crossing_counts(g.edge_count());
    for e in phi.stratum(r) {
        if counts[e] != 2 {
            return Err(ModelError::CrossingCountViolation {
                edge: g.edge_name(e).to_string(),
                count: counts[e],
            });
        }
    }
    let surface = glue_polygon(&word, |e| phi.edge_height(e) == r).map_err(|(e, count)| {
        ModelError::CrossingCountViolation {
            edge: g.edge_name(e).to_string(),
            count,
        }
    })?;
    if surface.boundary[0].sides.len() != 1 {
        return Err(ModelError::UpperBoundaryNotFree(
            g.format_word(&surface.boundary[0].labels),
        ));
    }
    let mut attaching_maps = Vec::new();
    let mut attaching_circuits = Vec::new();
    for (i, cycle) in surface.boundary.iter().enumerate().skip(1) {
        let c = g
            .tighten_circuit(&cycle.labels)
            .map_err(|_| ModelError::AttachingMapTrivial(i))?;
        attaching_maps.push(cycle.labels.clone());
        attaching_circuits.push(c);
    }
    let p_r = rho.path.start();

    let lower: EdgeSet = phi.level(r - 1).clone();
    let upper: EdgeSet = (0..g.edge_count())
        .filter(|&e| phi.edge_height(e) > r)
        .collect();
    let lower_vertices = g.vertices_of(&lower);
    let upper_vertices = g.vertices_of(&upper);
    let hr_vertices = phi.stratum_vertices(&g, r);
    let attaching_points: Vec<VertexId> = hr_vertices
        .iter()
        .copied()
        .filter(|v| *v != p_r && upper_vertices.contains(v) && !lower_vertices.contains(v))
        .collect();

    let l_edges: EdgeSet = (0..g.edge_count())
        .filter(|&e| phi.edge_height(e) != r)
        .collect();
    let (rho_wedged, components) = components_with_rho(&g, &l_edges, p_r, &rho.path);
    let complement = ComplementaryGraph {
        edges: l_edges,
        rho_wedged,
        components,
    };
    let mut peripheral = vec![g
        .tighten_circuit(&word)
        .map_err(|_| ModelError::NotClosedINP(r))?];
    peripheral.extend(attaching_circuits.iter().cloned());
    Ok(GeometricModelData {
        level: r,
        surface,
        rho: word,
        base_point: p_r,
        attaching_maps,
        attaching_circuits,
        attaching_points,
        complement,
        peripheral,
        lower_edges: lower,
        graph: Some(g),
    })
}

/// Components of `edges` with the loop `E_ρ` added at `p_r`, either wedged
/// into the component containing `p_r` or as its own circle.
fn components_with_rho(
    g: &Arc<MarkedGraph>,
    edges: &EdgeSet,
    p_r: VertexId,
    rho: &EdgePath,
) -> (bool, Vec<LComponent>) {
    let wedged = g.vertices_of(edges).contains(&p_r);
    let mut components = Vec::new();
    let mut push = |vertices: BTreeSet<VertexId>, es: EdgeSet, has_rho: bool, base: VertexId| {
        let mut loops = g.basis_loops_in(&es, base);
        if has_rho {
            loops.push(rho.clone());
        }
        let imm = CoreImmersion::from_generators(g.clone(), base, &loops)
            .ok()
            .map(|c| c.unbased());
        let rank = imm.as_ref().map_or(0, |c| c.rank());
        components.push(LComponent {
            vertices,
            edges: es,
            rho: has_rho,
            rank,
            immersion: imm,
        });
    };
    for (vertices, es) in g.components(edges) {
        let has_rho = wedged && vertices.contains(&p_r);
        let base = if has_rho {
            p_r
        } else {
            *vertices.iter().next().expect("nonempty component")
        };
        push(vertices, es, has_rho, base);
    }
    if !wedged {
        push([p_r].into(), EdgeSet::new(), true, p_r);
    }
    (wedged, components)
}

/// The complementary subgraph `L = (G \ H_r) ∪ E_ρ` of a model.
pub fn complementary_subgraph(model: &GeometricModelData) -> &ComplementaryGraph {
    &model.complement
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GogVertex {
    Surface { rank: usize },
    Complement { component: usize, rank: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "group", rename_all = "snake_case")]
pub enum GogEdge {
    /// Boundary annulus `N_i`; `word` is its image in the `L`-side vertex group.
    Cyclic {
        boundary: usize,
        l_vertex: usize,
        word: String,
    },
    /// Blown-up attaching point.
    Trivial { point: VertexId, l_vertex: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphOfGroups {
    /// Vertex 0 is the surface vertex.
    pub vertices: Vec<GogVertex>,
    pub edges: Vec<GogEdge>,
    /// Peripheral generators of the surface group, as boundary indices.
    pub peripheral_words: Vec<String>,
    /// `1 - χ` of the graph of groups.
    pub rank: i64,
    pub ambient_rank: usize,
}

impl GraphOfGroups {
    pub fn rank_matches(&self) -> bool {
        self.rank == self.ambient_rank as i64
    }

    /// Valence of vertex `v` in the underlying graph.
    pub fn valence(&self, v: usize) -> usize {
        if v == 0 {
            return self.edges.len();
        }
        self.edges
            .iter()
            .filter(|e| match e {
                GogEdge::Cyclic { l_vertex, .. } | GogEdge::Trivial { l_vertex, .. } => {
                    *l_vertex == v
                }
            })
            .count()
    }

    pub fn is_bipartite(&self) -> bool {
        self.edges.iter().all(|e| match e {
            GogEdge::Cyclic { l_vertex, .. } | GogEdge::Trivial { l_vertex, .. } => {
                *l_vertex > 0 && *l_vertex < self.vertices.len()
            }
        })
    }
}

/// Component index of `L` (or `K`) carrying each boundary image.
fn boundary_components(model: &GeometricModelData, comps: &[LComponent]) -> Vec<Option<usize>> {
    let g = model.graph();
    let mut out = vec![comps.iter().position(|c| c.rho)];
    for a in &model.attaching_maps {
        let v = g.init(a[0]);
        out.push(comps.iter().position(|c| {
            c.vertices.contains(&v) && a.iter().all(|d| c.edges.contains(&d.edge()))
        }));
    }
    out
}

fn build_gog(model: &GeometricModelData, comps: &[LComponent]) -> GraphOfGroups {
    let g = model.graph();
    let mut vertices = vec![GogVertex::Surface {
        rank: model.surface.rank(),
    }];
    for (i, c) in comps.iter().enumerate() {
        vertices.push(GogVertex::Complement {
            component: i,
            rank: c.rank,
        });
    }
    let mut edges = Vec::new();
    let words: Vec<String> = std::iter::once(g.format_word(&model.rho))
        .chain(model.attaching_maps.iter().map(|a| g.format_word(a)))
        .collect();
    for (i, comp) in boundary_components(model, comps).into_iter().enumerate() {
        if let Some(l) = comp {
            edges.push(GogEdge::Cyclic {
                boundary: i,
                l_vertex: l + 1,
                word: words[i].clone(),
            });
        }
    }
    for &z in &model.attaching_points {
        if let Some(l) = comps.iter().position(|c| c.vertices.contains(&z)) {
            edges.push(GogEdge::Trivial {
                point: z,
                l_vertex: l + 1,
            });
        }
    }
    // χ(free of rank k) = 1 - k, χ(Z) = 0, χ(1) = 1
    let chi_v: i64 =
        1 - model.surface.rank() as i64 + comps.iter().map(|c| 1 - c.rank as i64).sum::<i64>();
    let chi_e: i64 = edges
        .iter()
        .map(|e| {
            if matches!(e, GogEdge::Trivial { .. }) {
                1
            } else {
                0
            }
        })
        .sum();
    let peripheral_words = (0..model.surface.boundary.len())
        .map(|i| format!("d{i}"))
        .collect();
    GraphOfGroups {
        vertices,
        edges,
        peripheral_words,
        rank: 1 - (chi_v - chi_e),
        ambient_rank: g.rank(),
    }
}

/// `Γ(X)`: one surface vertex, one vertex per component of `L`, a cyclic
/// edge per boundary circle and a trivial edge per attaching point.
pub fn peripheral_splitting(model: &GeometricModelData) -> GraphOfGroups {
    build_gog(model, &model.complement.components)
}

/// Indices `i` of the free boundary circles `∂_i S`.
pub fn free_boundary_circles(model: &GeometricModelData) -> Vec<usize> {
    let g = model.graph();
    let gog = peripheral_splitting(model);
    let comps = &model.complement.components;
    let mut out = Vec::new();
    for (i, comp) in boundary_components(model, comps).into_iter().enumerate() {
        let Some(l) = comp else { continue };
        if gog.valence(l + 1) != 1 {
            continue;
        }
        let Some(imm) = &comps[l].immersion else {
            continue;
        };
        let c = &model.peripheral[i];
        let cyc = CoreImmersion::from_circuit(g.clone(), c);
        if imm.rank() == 1 && cyc.is_isomorphic(imm) {
            out.push(i);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelCheck {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelReport {
    pub checks: Vec<ModelCheck>,
    /// Where `f_#` sends each peripheral class, up to inversion.
    pub boundary_permutation: Vec<Option<usize>>,
}

impl ModelReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn find(&self, name: &str) -> Option<&ModelCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn same_unoriented(a: &Circuit, b: &Circuit) -> bool {
    a == b || *a == b.inverse()
}

/// Invariance of the peripheral classes, height of the upper boundary
/// class, and malnormality and component count of `[π₁L]`.
pub fn verify_model(model: &GeometricModelData, f: &GraphMap) -> ModelReport {
    let g = model.graph();
    let mut checks = Vec::new();

    // each class is named by its first index up to inversion
    let class = |c: &Circuit| model.peripheral.iter().position(|d| same_unoriented(c, d));
    let mut perm = Vec::new();
    let mut witness = None;
    for (i, c) in model.peripheral.iter().enumerate() {
        let img = f.sharp_circuit(c).ok();
        let j = img.as_ref().and_then(class);
        if j.is_none() && witness.is_none() {
            let shown = img.map_or("trivial".into(), |c| g.format_word(c.edges()));
            witness = Some(format!(
                "f_# of boundary {i} is {shown}, not a boundary class"
            ));
        }
        perm.push(j);
    }
    let reps: BTreeSet<usize> = model.peripheral.iter().filter_map(class).collect();
    let images: BTreeSet<usize> = perm.iter().flatten().copied().collect();
    let upper_fixed = perm[0] == Some(0);
    if witness.is_none() && images != reps {
        witness = Some("f_# is not a bijection of boundary classes".into());
    }
    if witness.is_none() && !upper_fixed {
        witness = Some("upper boundary class is not fixed".into());
    }
    checks.push(ModelCheck {
        name: "peripheral classes permuted".into(),
        passed: witness.is_none(),
        witness,
    });

    let carried = carries_class(&from_subgraph(g, &model.lower_edges), &model.peripheral[0]);
    checks.push(ModelCheck {
        name: "upper boundary not carried by lower filtration element".into(),
        passed: !carried,
        witness: carried.then(|| g.format_word(model.peripheral[0].edges())),
    });

    let system = model.complement.system();
    let mal = is_malnormal(&system);
    checks.push(ModelCheck {
        name: "complement malnormal".into(),
        passed: mal.malnormal,
        witness: mal.witness.map(|c| g.format_word(c.edges())),
    });

    let noncontractible = model
        .complement
        .components
        .iter()
        .filter(|c| c.noncontractible())
        .count();
    let dup = system.duplicate_pair();
    checks.push(ModelCheck {
        name: "complement component count".into(),
        passed: dup.is_none() && system.len() == noncontractible,
        witness: dup.map(|(i, j)| format!("components {i} and {j} are conjugate")),
    });
    ModelReport {
        checks,
        boundary_permutation: perm,
    }
}

/// A subgraph `K` of `L`: edges of `G \ H_r` plus optionally `E_ρ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KSubgraph {
    pub edges: EdgeSet,
    pub rho: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexGroupReport {
    pub components: Vec<LComponent>,
    pub malnormal: bool,
    pub malnormal_witness: Option<String>,
    pub max_rank: usize,
    pub rank_bound: usize,
    pub skeleton: GraphOfGroups,
}

impl VertexGroupReport {
    pub fn passed(&self) -> bool {
        self.malnormal && self.max_rank <= self.rank_bound
    }
}

/// `[π₁K]` for `K ⊆ L` containing every boundary image, with the collapsed
/// graph of groups whose vertex groups are `[π₁K]` and `[π₁S]`.
pub fn vertex_group_system_report(
    model: &GeometricModelData,
    k: &KSubgraph,
) -> Result<VertexGroupReport> {
    let g = model.graph();
    if !k.rho {
        return Err(ModelError::BoundaryNotContained(g.format_word(&model.rho)));
    }
    for a in &model.attaching_maps {
        if !a.iter().all(|d| k.edges.contains(&d.edge())) {
            return Err(ModelError::BoundaryNotContained(g.format_word(a)));
        }
    }
    let rho = g.path(model.base_point, &model.rho).expect("ρ is a path");
    let (_, components) = components_with_rho(g, &k.edges, model.base_point, &rho);
    let system = SubgroupSystem::new(
        components
            .iter()
            .filter_map(|c| c.immersion.clone())
            .collect(),
    );
    let mal = is_malnormal(&system);
    let skeleton = build_gog(model, &components);
    Ok(VertexGroupReport {
        malnormal: mal.malnormal,
        malnormal_witness: mal.witness.map(|c| g.format_word(c.edges())),
        max_rank: system.max_rank(),
        rank_bound: g.rank(),
        components,
        skeleton,
    })
}
