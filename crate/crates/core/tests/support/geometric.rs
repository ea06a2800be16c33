//! Geometric models: the EX1 power end to end, and peripheral splittings of
//! every model the tests build.

use std::sync::Arc;
use std::time::Instant;

use ttwb::geometric_model::{
    build_weak_model, free_boundary_circles, peripheral_splitting, GogEdge, GogVertex,
};
use ttwb::graphs::{MarkedGraph, VertexId};
use ttwb::maps::{compose, GraphMap};
use ttwb::nielsen::{find_all_inps, find_inps, geometricity, Bounds, Geometricity, NielsenRecord};
use ttwb::strata::ct::{check_ct, CtBudget};
use ttwb::strata::{Filtration, Status};

use super::dynamics::{ex1, ex4, Outcome};
use super::*;

pub struct ModelCase {
    pub name: String,
    pub f: GraphMap,
    pub phi: Filtration,
    pub r: usize,
    pub rho: NielsenRecord,
    /// Whether the map is a candidate CT; hand-built records have no dynamics.
    pub dynamic: bool,
}

fn record(g: &Arc<MarkedGraph>, r: usize, word: &str, start: VertexId) -> NielsenRecord {
    let path = g.path(start, &g.parse_word(word).unwrap()).unwrap();
    NielsenRecord {
        closed: path.is_closed(),
        path,
        period: 1,
        height: r,
        crossings: vec![],
        decomposition: None,
        junction: None,
        indivisible: true,
    }
}

fn closed_inp(f: &GraphMap, phi: &Filtration, r: usize) -> NielsenRecord {
    let inps = find_inps(f, phi, r, 12, 2).unwrap().records;
    inps.into_iter().find(|x| x.closed).expect("closed INP")
}

/// Every model the tests build, from maps and from hand-written closed paths.
pub fn model_cases() -> Vec<ModelCase> {
    let mut out = Vec::new();
    let (f, phi) = ex1();
    let f2 = compose(&f, &f).unwrap();
    let f4 = compose(&f2, &f2).unwrap();
    for (name, f) in [("EX1^2", f2), ("EX1^4", f4)] {
        let rho = closed_inp(&f, &phi, 1);
        out.push(ModelCase {
            name: name.into(),
            f,
            phi: phi.clone(),
            r: 1,
            rho,
            dynamic: true,
        });
    }
    let (f, phi) = ex4();
    let rho = closed_inp(&f, &phi, 2);
    out.push(ModelCase {
        name: "EX4".into(),
        f,
        phi,
        r: 2,
        rho,
        dynamic: true,
    });

    let g = Arc::new(
        MarkedGraph::new(
            &["v", "w"],
            &[
                ("a", "v", "v"),
                ("b", "v", "w"),
                ("e", "w", "v"),
                ("c", "w", "w"),
            ],
        )
        .unwrap(),
    );
    let phi = Filtration::from_strata(&g, vec![[3].into(), [0, 1, 2].into()]).unwrap();
    for word in [
        "~e c ~b ~a b e a",
        "~e ~c ~c ~b ~a b e a",
        "~e ~c e ~a b ~c ~b ~a",
    ] {
        out.push(ModelCase {
            name: format!("two-vertex {word}"),
            f: GraphMap::identity(g.clone()),
            phi: phi.clone(),
            r: 2,
            rho: record(&g, 2, word, 0),
            dynamic: false,
        });
    }
    let g = Arc::new(
        MarkedGraph::new(
            &["v", "w", "u"],
            &[
                ("a", "v", "u"),
                ("d", "u", "v"),
                ("b", "v", "w"),
                ("e", "w", "v"),
                ("c", "w", "w"),
                ("x", "u", "u"),
            ],
        )
        .unwrap(),
    );
    let phi =
        Filtration::from_strata(&g, vec![[4].into(), [0, 1, 2, 3].into(), [5].into()]).unwrap();
    out.push(ModelCase {
        name: "attaching point".into(),
        f: GraphMap::identity(g.clone()),
        phi,
        r: 2,
        rho: record(&g, 2, "~e c ~b ~d ~a b e a d", 0),
        dynamic: false,
    });
    out
}

pub fn geometric_end_to_end() -> Outcome {
    let t = Instant::now();
    let (f, phi) = ex1();
    let f = compose(&f, &f).unwrap();
    let g = f.graph().clone();
    let geo = geometricity(&f, &phi, 1, Bounds::defaults(&g)).map_err(|e| e.to_string())?;
    let Geometricity::Geometric { rho } = geo else {
        return Err(format!("decision {geo:?}"));
    };
    let mut counts = vec![0; g.edge_count()];
    for d in rho.path.edges() {
        counts[d.edge()] += 1;
    }
    if counts.iter().any(|&c| c != 2) || !rho.path.is_closed() {
        return Err(format!(
            "rho {} crosses {counts:?}",
            g.format_word(rho.path.edges())
        ));
    }
    // items (2) and (3) of the characterization, read off the INP list
    let inps = {
        let b = Bounds::defaults(&g);
        find_all_inps(&f, &phi, b.length, b.period)
    }
    .map_err(|e| e.to_string())?
    .records;
    let closed = inps.iter().any(|x| x.height == 1 && x.path.is_closed());
    let twice = inps.iter().any(|x| {
        x.height == 1
            && (0..g.edge_count())
                .all(|e| x.path.edges().iter().filter(|d| d.edge() == e).count() == 2)
    });
    if closed != twice {
        return Err(format!("closed INP {closed}, INP crossing twice {twice}"));
    }
    let m = build_weak_model(&f, &phi, 1, &rho).map_err(|e| e.to_string())?;
    let s = &m.surface;
    // G_0 is empty, so S carries all of π₁ and χ(S) = 1 - n
    let chi = 1 - g.rank() as i64;
    if (s.euler_characteristic, s.orientable, s.boundary.len()) != (chi, true, 1) || chi != -1 {
        return Err(format!(
            "surface χ {} orientable {} boundaries {}",
            s.euler_characteristic,
            s.orientable,
            s.boundary.len()
        ));
    }
    let upper = class_key(&from_edges(m.peripheral[0].edges()));
    let rho_key = class_key(&from_edges(rho.path.edges()));
    if upper != rho_key && upper != class_key(&inverse(&from_edges(rho.path.edges()))) {
        return Err("upper boundary does not tighten to rho".into());
    }
    let el = t.elapsed();
    if el.as_secs_f64() >= 5.0 {
        return Err(format!("took {el:?}"));
    }
    Ok(format!(
        "rho = {}, χ = {chi}, genus {}",
        g.format_word(rho.path.edges()),
        s.genus
    ))
}

pub fn peripheral_rank() -> Outcome {
    let mut lines = Vec::new();
    let mut flagged = Vec::new();
    for case in model_cases() {
        let t = Instant::now();
        let g = case.f.graph().clone();
        let m = build_weak_model(&case.f, &case.phi, case.r, &case.rho)
            .map_err(|e| format!("{}: {e}", case.name))?;
        let gog = peripheral_splitting(&m);
        let n = g.edge_count() as i64 - g.vertex_count() as i64 + 1;
        if gog.rank != n || !gog.rank_matches() {
            return Err(format!("{}: rank {} against n = {n}", case.name, gog.rank));
        }
        let bip = matches!(gog.vertices[0], GogVertex::Surface { .. })
            && gog.vertices[1..]
                .iter()
                .all(|v| matches!(v, GogVertex::Complement { .. }))
            && gog.edges.iter().all(|e| match e {
                GogEdge::Cyclic { l_vertex, .. } | GogEdge::Trivial { l_vertex, .. } => {
                    (1..gog.vertices.len()).contains(l_vertex)
                }
            });
        if !bip || !gog.is_bipartite() {
            return Err(format!("{}: not bipartite", case.name));
        }
        if case.r == case.phi.top() {
            let p = case.rho.path.start();
            let lower = g.vertices_of(case.phi.level(case.r - 1));
            let free = free_boundary_circles(&m).contains(&0);
            if lower.contains(&p) {
                // a CT never bases rho in G_{r-1}; the axiom check must say so
                let inps = {
                    let b = Bounds::defaults(&g);
                    find_all_inps(&case.f, &case.phi, b.length, b.period)
                }
                .map_err(|e| e.to_string())?
                .records;
                let rep = check_ct(&case.f, &case.phi, &inps, CtBudget::default());
                let eg = rep.find("EG Nielsen Paths").map(|v| v.status);
                if !case.dynamic || eg != Some(Status::Fail) || free {
                    return Err(format!(
                        "{}: rho based in G_{} but not flagged",
                        case.name,
                        case.r - 1
                    ));
                }
                flagged.push(case.name.clone());
            } else if !free {
                return Err(format!("{}: upper boundary not marked free", case.name));
            }
        }
        let el = t.elapsed();
        if el.as_secs_f64() >= 1.0 {
            return Err(format!("{}: took {el:?}", case.name));
        }
        lines.push(case.name);
    }
    Ok(format!(
        "{} models; not CTs: {}",
        lines.len(),
        flagged.join(", ")
    ))
}
