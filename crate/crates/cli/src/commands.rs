//! Subcommand dispatch. Every command returns a certificate; domain errors
//! become failing verdicts.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use ttwb::dynamics::{
    attracting_basis, principal_structure, ray_prefix, tile_statistics, DynamicsError, RayPrefix,
};
use ttwb::geometric_model::{
    build_weak_model, free_boundary_circles, peripheral_splitting, verify_model,
    GeometricModelData, GogEdge, GogVertex, GraphOfGroups,
};
use ttwb::graphs::{Circuit, EdgePath, EdgeSet, MarkedGraph, OrientedEdge};
use ttwb::maps::is_homotopy_equivalence;
use ttwb::nielsen::{
    find_inps, geometricity, is_nielsen_path, Bounds, Geometricity, NielsenRecord, SearchStatus,
};
use ttwb::stallings::{
    carries_class, from_subgraph, intersect_components, is_malnormal, meet_subgraph_systems,
    CoreImmersion, SubgroupSystem,
};
use ttwb::strata::ct::{check_ct, CtBudget};
use ttwb::strata::{
    check_rtt, classify_all, classify_stratum, transition_matrix, CheckReport, NegKind, Status,
    StratumClass,
};

use crate::cert::{Budgets, Certificate, CheckVerdict, Witness};
use crate::input::{ExpectedClass, WorkbenchInput};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubgroupVerb {
    Fold,
    Carries,
    Intersect,
    Malnormal,
    Meet,
}

/// Subgroups named on the command line: generator lists (words separated by
/// `;`, based at the start of the first word) and subgraphs (edge names).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubgroupArgs {
    pub gens: Vec<String>,
    pub subgraphs: Vec<String>,
    pub class: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Strata,
    CheckRtt,
    CheckCt,
    Inp {
        height: Option<usize>,
    },
    Geometric {
        height: Option<usize>,
    },
    Model {
        height: Option<usize>,
    },
    Peripheral {
        height: Option<usize>,
    },
    Tiles {
        height: Option<usize>,
    },
    Attract {
        height: Option<usize>,
    },
    Rays {
        edge: Option<String>,
    },
    Subgroup {
        verb: SubgroupVerb,
        args: SubgroupArgs,
    },
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Validate => "validate".into(),
            Command::Strata => "strata".into(),
            Command::CheckRtt => "check-rtt".into(),
            Command::CheckCt => "check-ct".into(),
            Command::Inp { .. } => "inp".into(),
            Command::Geometric { .. } => "geometric".into(),
            Command::Model { .. } => "model".into(),
            Command::Peripheral { .. } => "peripheral".into(),
            Command::Tiles { .. } => "tiles".into(),
            Command::Attract { .. } => "attract".into(),
            Command::Rays { .. } => "rays".into(),
            Command::Subgroup { verb, .. } => format!("subgroup {}", verb_name(verb)),
        }
    }
}

fn verb_name(v: &SubgroupVerb) -> &'static str {
    match v {
        SubgroupVerb::Fold => "fold",
        SubgroupVerb::Carries => "carries",
        SubgroupVerb::Intersect => "intersect",
        SubgroupVerb::Malnormal => "malnormal",
        SubgroupVerb::Meet => "meet",
    }
}

pub const DEFAULT_ITERATE_BOUND: usize = 20;
pub const DEFAULT_DEPTH: usize = 8;

/// Budget overrides from flags or `TTWB_BUDGET`; unset fields take defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BudgetOverrides {
    pub iterate_bound: Option<usize>,
    pub length_bound: Option<usize>,
    pub period_bound: Option<usize>,
    pub depth: Option<usize>,
}

impl BudgetOverrides {
    /// Parses `key=value` pairs separated by commas. Keys: `iterate`,
    /// `length`, `period`, `depth`.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let mut out = BudgetOverrides::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| format!("budget item `{item}` is not key=value"))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| format!("budget `{k}` needs a nonnegative integer"))?;
            match k.trim() {
                "iterate" => out.iterate_bound = Some(v),
                "length" => out.length_bound = Some(v),
                "period" => out.period_bound = Some(v),
                "depth" => out.depth = Some(v),
                other => return Err(format!("unknown budget `{other}`")),
            }
        }
        Ok(out)
    }

    /// Fields set in `other` win.
    pub fn overlay(self, other: BudgetOverrides) -> Self {
        BudgetOverrides {
            iterate_bound: other.iterate_bound.or(self.iterate_bound),
            length_bound: other.length_bound.or(self.length_bound),
            period_bound: other.period_bound.or(self.period_bound),
            depth: other.depth.or(self.depth),
        }
    }

    pub fn resolve(self, g: &MarkedGraph) -> Budgets {
        let d = Bounds::defaults(g);
        Budgets {
            iterate_bound: self.iterate_bound.unwrap_or(DEFAULT_ITERATE_BOUND),
            length_bound: self.length_bound.unwrap_or(d.length),
            period_bound: self.period_bound.unwrap_or(d.period),
            depth: self.depth.unwrap_or(DEFAULT_DEPTH),
        }
    }
}

/// Token and name rendering against one graph.
struct Render<'a> {
    g: &'a MarkedGraph,
}

impl Render<'_> {
    fn word(&self, w: &[OrientedEdge]) -> Vec<String> {
        self.g.tokens(w)
    }

    fn path(&self, p: &EdgePath) -> Vec<String> {
        self.word(p.edges())
    }

    fn vertex(&self, v: usize) -> String {
        self.g.vertex_name(v).to_string()
    }

    fn edges(&self, s: &EdgeSet) -> Vec<String> {
        s.iter().map(|&e| self.g.edge_name(e).to_string()).collect()
    }

    fn nielsen(&self, p: &EdgePath, period: usize) -> Witness {
        Witness::NielsenPath {
            start: self.vertex(p.start()),
            path: self.path(p),
            period,
        }
    }

    fn iterate(&self, p: &EdgePath, k: usize, image: &EdgePath) -> Witness {
        Witness::Iterate {
            start: self.vertex(p.start()),
            path: self.path(p),
            k,
            image: self.path(image),
        }
    }

    fn crossings(&self, rec: &NielsenRecord) -> Witness {
        let counts = rec
            .crossings
            .iter()
            .map(|&(e, c)| (self.g.edge_name(e).to_string(), c))
            .collect();
        Witness::Crossings {
            start: self.vertex(rec.path.start()),
            path: self.path(&rec.path),
            counts,
        }
    }

    fn record(&self, rec: &NielsenRecord) -> Value {
        let counts: BTreeMap<String, usize> = rec
            .crossings
            .iter()
            .map(|&(e, c)| (self.g.edge_name(e).to_string(), c))
            .collect();
        json!({
            "height": rec.height,
            "start": self.vertex(rec.path.start()),
            "path": self.path(&rec.path),
            "period": rec.period,
            "closed": rec.closed,
            "crossings": counts,
            "decomposition": rec.decomposition.as_ref().map(|(a, b)| vec![self.path(a), self.path(b)]),
            "junction": rec.junction.map(|t| self.word(&[t.first, t.second])),
            "indivisible": rec.indivisible,
        })
    }
}

fn fail(check: &str, note: impl Into<String>) -> CheckVerdict {
    CheckVerdict::bounded(check, Status::Fail, note, "precondition")
}

fn report_verdicts(report: &CheckReport) -> Vec<CheckVerdict> {
    report
        .verdicts
        .iter()
        .map(|v| {
            let witness = v.witness.as_ref().map(|w| Witness::Text {
                description: w.clone(),
            });
            let bound = if v.note.is_empty() {
                "finite check over the graph and map".to_string()
            } else {
                v.note.clone()
            };
            CheckVerdict {
                check: v.axiom.clone(),
                status: v.status,
                note: v.note.clone(),
                witness,
                bound: Some(bound),
                budget_exhausted: v.status == Status::Inconclusive,
            }
        })
        .collect()
}

/// Highest EG stratum, the default height for stratum commands.
fn top_eg(input: &WorkbenchInput) -> Option<usize> {
    let classes = classify_all(&input.map, &input.filtration).ok()?;
    classes.iter().rposition(|c| c.is_eg()).map(|i| i + 1)
}

fn height_or_top(input: &WorkbenchInput, h: Option<usize>) -> Result<usize, CheckVerdict> {
    match h.or_else(|| top_eg(input)) {
        Some(r) if r >= 1 && r <= input.filtration.top() => Ok(r),
        Some(r) => Err(fail("height", format!("no stratum {r}"))),
        None => Err(fail("height", "no EG stratum; pass --height")),
    }
}

pub fn run(
    command: &Command,
    input: &WorkbenchInput,
    power: usize,
    budgets: Budgets,
) -> Certificate {
    let (verdicts, result) = match command {
        Command::Validate => validate(input, budgets),
        Command::Strata => strata(input),
        Command::CheckRtt => (
            report_verdicts(&check_rtt(&input.map, &input.filtration)),
            json!({}),
        ),
        Command::CheckCt => check_ct_cmd(input, budgets),
        Command::Inp { height } => inp(input, *height, budgets),
        Command::Geometric { height } => geometric(input, *height, budgets),
        Command::Model { height } => model(input, *height, budgets, false),
        Command::Peripheral { height } => model(input, *height, budgets, true),
        Command::Tiles { height } => tiles(input, *height, budgets),
        Command::Attract { height } => attract(input, *height, budgets),
        Command::Rays { edge } => rays(input, edge.as_deref(), budgets),
        Command::Subgroup { verb, args } => subgroup(input, verb, args),
    };
    Certificate::new(&command.name(), input, power, budgets, verdicts, result)
}

fn validate(input: &WorkbenchInput, b: Budgets) -> (Vec<CheckVerdict>, Value) {
    let (f, phi, g) = (&input.map, &input.filtration, &input.graph);
    let r = Render { g };
    let mut out = Vec::new();
    let he = is_homotopy_equivalence(f);
    out.push(CheckVerdict::bounded(
        "homotopy equivalence",
        if he { Status::Pass } else { Status::Fail },
        "",
        "Stallings folding of the edge images onto the graph",
    ));
    match phi.check_invariant(f) {
        Ok(()) => out.push(CheckVerdict::bounded(
            "filtration invariant",
            Status::Pass,
            "",
            "every edge image stays in its level",
        )),
        Err(e) => out.push(fail("filtration invariant", e.to_string())),
    }
    for (&k, &want) in &input.declarations.strata {
        let got = classify_stratum(f, phi, k);
        let (status, note) = match &got {
            Ok(c) => {
                let name = class_name(c);
                (
                    if name == want.name() {
                        Status::Pass
                    } else {
                        Status::Fail
                    },
                    format!("declared {}, computed {name}", want.name()),
                )
            }
            Err(e) => (Status::Fail, e.to_string()),
        };
        out.push(CheckVerdict::bounded(
            format!("declared class of H_{k}"),
            status,
            note,
            "exact transition matrix",
        ));
    }
    for p in &input.declarations.inps {
        let check = format!("declared Nielsen path {}", g.format_word(p.edges()));
        match is_nielsen_path(f, p, b.period_bound) {
            Some(period) => out.push(CheckVerdict::witnessed(
                check,
                Status::Pass,
                "",
                r.nielsen(p, period),
            )),
            None => out.push(CheckVerdict::bounded(
                check,
                Status::Fail,
                "not fixed",
                format!("periods 1..={}", b.period_bound),
            )),
        }
    }
    let result = json!({
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "rank": g.rank(),
        "strata": phi.top(),
        "expected": input.declarations.strata.iter().map(|(k, c)| (k.to_string(), c.name())).collect::<BTreeMap<_, _>>(),
    });
    (out, result)
}

fn class_name(c: &StratumClass) -> &'static str {
    match c {
        StratumClass::Zero => ExpectedClass::Zero.name(),
        StratumClass::Eg { .. } => ExpectedClass::Eg.name(),
        StratumClass::Neg { .. } => ExpectedClass::Neg.name(),
    }
}

fn strata(input: &WorkbenchInput) -> (Vec<CheckVerdict>, Value) {
    let (f, phi, g) = (&input.map, &input.filtration, &input.graph);
    let r = Render { g };
    let mut verdicts = Vec::new();
    let mut rows = Vec::new();
    for k in 1..=phi.top() {
        let check = format!("H_{k}");
        let class = match classify_stratum(f, phi, k) {
            Ok(c) => c,
            Err(e) => {
                verdicts.push(fail(&check, e.to_string()));
                continue;
            }
        };
        let m = transition_matrix(f, phi, k).ok();
        let mut row = json!({
            "level": k,
            "edges": r.edges(&phi.stratum(k)),
            "class": class_name(&class),
            "matrix": m.map(|m| m.entries),
        });
        let note = match &class {
            StratumClass::Eg { lambda, aperiodic } => {
                row["lambda"] = json!(lambda);
                row["aperiodic"] = json!(aperiodic);
                format!("EG, lambda = {}", crate::cert::format_g(*lambda, 12))
            }
            StratumClass::Neg { edges } => {
                row["neg_edges"] = json!(edges.as_ref().map(|es| es
                    .iter()
                    .map(|e| {
                        let (kind, w, d) = match &e.kind {
                            NegKind::Fixed => ("fixed", None, None),
                            NegKind::Periodic => ("periodic", None, None),
                            NegKind::Linear { w, d } => ("linear", w.as_ref().map(|p| r.path(p)), Some(*d)),
                            NegKind::Superlinear => ("superlinear", None, None),
                        };
                        json!({"edge": g.token(e.edge), "tail": r.path(&e.tail), "kind": kind, "w": w, "d": d})
                    })
                    .collect::<Vec<_>>()));
                "NEG".into()
            }
            StratumClass::Zero => "zero".into(),
        };
        verdicts.push(CheckVerdict::bounded(
            check,
            Status::Pass,
            note,
            "exact transition matrix",
        ));
        rows.push(row);
    }
    (verdicts, json!({ "strata": rows }))
}

/// Records from the search at every irreducible stratum plus supplied paths.
fn all_inps(input: &WorkbenchInput, b: Budgets) -> (Vec<NielsenRecord>, Vec<String>) {
    let (f, phi) = (&input.map, &input.filtration);
    let mut records = Vec::new();
    let mut exhausted = Vec::new();
    for r in 1..=phi.top() {
        match find_inps(f, phi, r, b.length_bound, b.period_bound) {
            Ok(s) => {
                if let SearchStatus::Inconclusive(why) = &s.status {
                    exhausted.push(format!("H_{r}: {why}"));
                }
                records.extend(s.records);
            }
            Err(_) => continue,
        }
    }
    for p in &input.declarations.inps {
        if records
            .iter()
            .any(|rec| rec.path == *p || rec.path == p.reverse())
        {
            continue;
        }
        if let Some(period) = is_nielsen_path(f, p, b.period_bound) {
            let height = phi.word_height(p.edges());
            let counts = p.crossing_counts(input.graph.edge_count());
            records.push(NielsenRecord {
                closed: p.is_closed(),
                path: p.clone(),
                period,
                height,
                crossings: phi
                    .stratum(height)
                    .into_iter()
                    .map(|e| (e, counts[e]))
                    .collect(),
                decomposition: None,
                junction: None,
                indivisible: true,
            });
        }
    }
    (records, exhausted)
}

fn check_ct_cmd(input: &WorkbenchInput, b: Budgets) -> (Vec<CheckVerdict>, Value) {
    let (records, exhausted) = all_inps(input, b);
    let budget = CtBudget::default();
    let mut verdicts = report_verdicts(&check_ct(&input.map, &input.filtration, &records, budget));
    if !exhausted.is_empty() {
        verdicts.push(CheckVerdict::exhausted(
            "Nielsen path search",
            exhausted.join("; "),
            search_bound(b),
        ));
    }
    let r = Render { g: &input.graph };
    let result = json!({
        "inps": records.iter().map(|rec| r.record(rec)).collect::<Vec<_>>(),
        "taken_depth": budget.taken_depth,
        "certify_depth": budget.certify_depth,
    });
    (verdicts, result)
}

fn search_bound(b: Budgets) -> String {
    format!(
        "paths of length <= {} and period <= {}",
        b.length_bound, b.period_bound
    )
}

fn inp(input: &WorkbenchInput, height: Option<usize>, b: Budgets) -> (Vec<CheckVerdict>, Value) {
    let (f, phi, g) = (&input.map, &input.filtration, &input.graph);
    let r = Render { g };
    let levels: Vec<usize> = match height {
        Some(h) => vec![h],
        None => (1..=phi.top()).collect(),
    };
    let mut verdicts = Vec::new();
    let mut rows = Vec::new();
    for k in levels {
        let check = format!("INP search H_{k}");
        let search = match find_inps(f, phi, k, b.length_bound, b.period_bound) {
            Ok(s) => s,
            Err(e) if height.is_none() => {
                rows.push(json!({"level": k, "skipped": e.to_string()}));
                continue;
            }
            Err(e) => {
                verdicts.push(fail(&check, e.to_string()));
                continue;
            }
        };
        let eg = classify_stratum(f, phi, k)
            .map(|c| c.is_eg())
            .unwrap_or(false);
        for rec in &search.records {
            let name = format!("INP {}", g.format_word(rec.path.edges()));
            verdicts.push(CheckVerdict::witnessed(
                name,
                Status::Pass,
                format!("height {k}"),
                r.nielsen(&rec.path, rec.period),
            ));
            if eg {
                // closed iff every edge is crossed twice, open iff some edge once
                let ok =
                    rec.closed == rec.crosses_each_twice() && rec.closed != rec.crosses_some_once();
                verdicts.push(CheckVerdict::witnessed(
                    format!("crossings of {}", g.format_word(rec.path.edges())),
                    if ok { Status::Pass } else { Status::Fail },
                    if rec.closed { "closed" } else { "not closed" },
                    r.crossings(rec),
                ));
            }
        }
        match &search.status {
            SearchStatus::Complete => verdicts.push(CheckVerdict::bounded(
                check,
                Status::Pass,
                format!("{} found", search.records.len()),
                search_bound(b),
            )),
            SearchStatus::Inconclusive(why) => {
                verdicts.push(CheckVerdict::exhausted(check, why.clone(), search_bound(b)))
            }
        }
        rows.push(json!({
            "level": k,
            "complete": search.is_complete(),
            "records": search.records.iter().map(|rec| r.record(rec)).collect::<Vec<_>>(),
        }));
    }
    (verdicts, json!({ "levels": rows }))
}

/// The geometricity decision with its verdicts; `Some` when geometric.
fn decide(
    input: &WorkbenchInput,
    r: usize,
    b: Budgets,
    out: &mut Vec<CheckVerdict>,
) -> Option<NielsenRecord> {
    let (f, phi, g) = (&input.map, &input.filtration, &input.graph);
    let rd = Render { g };
    let bounds = Bounds {
        length: b.length_bound,
        period: b.period_bound,
    };
    match geometricity(f, phi, r, bounds) {
        Err(e) => {
            out.push(fail("geometric", e.to_string()));
            None
        }
        Ok(Geometricity::Geometric { rho }) => {
            out.push(CheckVerdict::witnessed(
                "geometric",
                Status::Pass,
                format!("closed height-{r} INP"),
                rd.nielsen(&rho.path, rho.period),
            ));
            out.push(CheckVerdict::witnessed(
                "closed INP crosses each stratum edge twice",
                if rho.crosses_each_twice() {
                    Status::Pass
                } else {
                    Status::Fail
                },
                "",
                rd.crossings(&rho),
            ));
            let circuit = Circuit::from_word(rho.path.edges()).expect("closed INP is a circuit");
            out.push(CheckVerdict::witnessed(
                "height-r fixed conjugacy class",
                Status::Pass,
                "",
                Witness::FixedCircuit {
                    circuit: rd.word(circuit.edges()),
                    period: rho.period,
                },
            ));
            Some(rho)
        }
        Ok(Geometricity::NonGeometric { reason }) => {
            let search = find_inps(f, phi, r, b.length_bound, b.period_bound).ok();
            let rec = search.as_ref().and_then(|s| s.records.first());
            match rec {
                Some(rec) => out.push(CheckVerdict::witnessed(
                    "geometric",
                    Status::Fail,
                    reason,
                    rd.crossings(rec),
                )),
                None => out.push(CheckVerdict::bounded(
                    "geometric",
                    Status::Fail,
                    reason,
                    search_bound(b),
                )),
            }
            None
        }
        Ok(Geometricity::Inconclusive { reason }) => {
            out.push(CheckVerdict::exhausted(
                "geometric",
                reason,
                search_bound(b),
            ));
            None
        }
    }
}

fn geometric(
    input: &WorkbenchInput,
    height: Option<usize>,
    b: Budgets,
) -> (Vec<CheckVerdict>, Value) {
    let r = match height_or_top(input, height) {
        Ok(r) => r,
        Err(v) => return (vec![v], json!({})),
    };
    let mut verdicts = Vec::new();
    let rho = decide(input, r, b, &mut verdicts);
    let rd = Render { g: &input.graph };
    let result = json!({
        "height": r,
        "decision": match (&rho, verdicts[0].status) {
            (Some(_), _) => "geometric",
            (None, Status::Inconclusive) => "inconclusive",
            _ => "nongeometric",
        },
        "rho": rho.as_ref().map(|rec| rd.record(rec)),
    });
    (verdicts, result)
}

fn gog_json(rd: &Render, gog: &GraphOfGroups, model: &GeometricModelData) -> Value {
    json!({
        "vertices": gog.vertices.iter().map(|v| match v {
            GogVertex::Surface { rank } => json!({"kind": "surface", "rank": rank}),
            GogVertex::Complement { component, rank } => json!({"kind": "complement", "component": component, "rank": rank}),
        }).collect::<Vec<_>>(),
        "edges": gog.edges.iter().map(|e| match e {
            GogEdge::Cyclic { boundary, l_vertex, .. } => json!({
                "group": "cyclic",
                "boundary": boundary,
                "l_vertex": l_vertex,
                "word": rd.word(model.peripheral[*boundary].edges()),
            }),
            GogEdge::Trivial { point, l_vertex } => json!({"group": "trivial", "point": rd.vertex(*point), "l_vertex": l_vertex}),
        }).collect::<Vec<_>>(),
        "rank": gog.rank,
        "ambient_rank": gog.ambient_rank,
    })
}

fn model_json(rd: &Render, m: &GeometricModelData) -> Value {
    let s = &m.surface;
    let g = rd.g;
    json!({
        "level": m.level,
        "polygon": rd.word(&s.lower_side),
        "gluings": s.gluings.iter().map(|gl| json!({
            "edge": g.edge_name(gl.edge),
            "sides": [gl.first, gl.second],
            "twisted": gl.twisted,
        })).collect::<Vec<_>>(),
        "boundary_cycles": s.boundary.iter().map(|c| json!({
            "sides": c.sides.iter().map(|&(i, rev)| json!([i, rev])).collect::<Vec<_>>(),
            "labels": rd.word(&c.labels),
        })).collect::<Vec<_>>(),
        "euler_characteristic": s.euler_characteristic,
        "disc_euler_characteristic": s.disc_euler_characteristic,
        "orientable": s.orientable,
        "genus": s.genus,
        "rho": rd.word(&m.rho),
        "base_point": rd.vertex(m.base_point),
        "attaching_maps": m.attaching_maps.iter().map(|w| rd.word(w)).collect::<Vec<_>>(),
        "attaching_circuits": m.attaching_circuits.iter().map(|c| rd.word(c.edges())).collect::<Vec<_>>(),
        "attaching_points": m.attaching_points.iter().map(|&v| rd.vertex(v)).collect::<Vec<_>>(),
        "complement": {
            "rho_wedged": m.complement.rho_wedged,
            "components": m.complement.components.iter().map(|c| json!({
                "vertices": c.vertices.iter().map(|&v| rd.vertex(v)).collect::<Vec<_>>(),
                "edges": rd.edges(&c.edges),
                "rho": c.rho,
                "rank": c.rank,
            })).collect::<Vec<_>>(),
        },
        "peripheral": m.peripheral.iter().map(|c| rd.word(c.edges())).collect::<Vec<_>>(),
    })
}

fn model(
    input: &WorkbenchInput,
    height: Option<usize>,
    b: Budgets,
    peripheral: bool,
) -> (Vec<CheckVerdict>, Value) {
    let r = match height_or_top(input, height) {
        Ok(r) => r,
        Err(v) => return (vec![v], json!({})),
    };
    let (f, phi, g) = (&input.map, &input.filtration, &input.graph);
    let rd = Render { g };
    let mut verdicts = Vec::new();
    let Some(rho) = decide(input, r, b, &mut verdicts) else {
        return (verdicts, json!({"height": r}));
    };
    let m = match build_weak_model(f, phi, r, &rho) {
        Ok(m) => m,
        Err(e) => {
            verdicts.push(fail("weak geometric model", e.to_string()));
            return (verdicts, json!({"height": r}));
        }
    };
    verdicts.push(CheckVerdict::witnessed(
        "upper boundary reads rho",
        if m.peripheral[0] == Circuit::from_word(rho.path.edges()).expect("closed")
            || m.peripheral[0].inverse() == Circuit::from_word(rho.path.edges()).expect("closed")
        {
            Status::Pass
        } else {
            Status::Fail
        },
        "",
        Witness::SameCircuit {
            a: rd.word(m.peripheral[0].edges()),
            b: rd.path(&rho.path),
        },
    ));
    for (i, (raw, c)) in m
        .attaching_maps
        .iter()
        .zip(&m.attaching_circuits)
        .enumerate()
    {
        verdicts.push(CheckVerdict::witnessed(
            format!("attaching map alpha_{}", i + 1),
            Status::Pass,
            "",
            Witness::SameCircuit {
                a: rd.word(raw),
                b: rd.word(c.edges()),
            },
        ));
    }
    let gog = peripheral_splitting(&m);
    let mut result = json!({ "height": r, "model": model_json(&rd, &m) });
    if !m.surface.orientable {
        result["review"] = json!(["nonorientable surface"]);
    }
    if peripheral {
        let n = g.rank();
        verdicts.push(CheckVerdict::bounded(
            "rank of the peripheral splitting",
            if gog.rank_matches() {
                Status::Pass
            } else {
                Status::Fail
            },
            format!("rank {} against n = {n}", gog.rank),
            "Euler characteristic of the graph of groups",
        ));
        verdicts.push(CheckVerdict::bounded(
            "peripheral splitting bipartite",
            if gog.is_bipartite() {
                Status::Pass
            } else {
                Status::Fail
            },
            "",
            "edge endpoints",
        ));
        let free = free_boundary_circles(&m);
        if r == phi.top() {
            // in a CT the base point of rho is off G_{r-1}, so the top upper boundary is free
            let based_low = g.vertices_of(phi.level(r - 1)).contains(&rho.path.start());
            let note = if based_low {
                "top stratum; rho is based in G_{r-1}, which a CT excludes"
            } else {
                "top stratum"
            };
            verdicts.push(CheckVerdict::bounded(
                "upper boundary free",
                if free.contains(&0) {
                    Status::Pass
                } else {
                    Status::Fail
                },
                note,
                "valence-one L-vertex whose edge group fills it",
            ));
        }
        result["splitting"] = gog_json(&rd, &gog, &m);
        result["free_boundaries"] = json!(free);
    } else {
        let report = verify_model(&m, f);
        for c in &report.checks {
            verdicts.push(CheckVerdict {
                check: c.name.clone(),
                status: if c.passed { Status::Pass } else { Status::Fail },
                note: String::new(),
                witness: c.witness.as_ref().map(|w| Witness::Text {
                    description: w.clone(),
                }),
                bound: Some("Stallings graphs of the peripheral classes and L".into()),
                budget_exhausted: false,
            });
        }
        result["boundary_permutation"] = json!(report.boundary_permutation);
        result["splitting"] = gog_json(&rd, &gog, &m);
    }
    (verdicts, result)
}

fn dyn_fail(check: &str, e: DynamicsError) -> CheckVerdict {
    match e {
        DynamicsError::BudgetExceeded(why) => {
            CheckVerdict::exhausted(check, why, "path length cap")
        }
        other => fail(check, other.to_string()),
    }
}

fn tiles(input: &WorkbenchInput, height: Option<usize>, b: Budgets) -> (Vec<CheckVerdict>, Value) {
    let r = match height_or_top(input, height) {
        Ok(r) => r,
        Err(v) => return (vec![v], json!({})),
    };
    let (f, phi, g) = (&input.map, &input.filtration, &input.graph);
    let rd = Render { g };
    let stats = match tile_statistics(f, phi, r, b.iterate_bound) {
        Ok(s) => s,
        Err(e) => return (vec![dyn_fail("tiles", e)], json!({"height": r})),
    };
    let mut verdicts = Vec::new();
    let bound = format!("all i <= k <= {} - p", stats.k_max);
    verdicts.push(match (stats.p, stats.containment_failures.first()) {
        (None, _) => CheckVerdict::bounded(
            "tile containment",
            Status::Fail,
            "transition matrix is not primitive",
            bound,
        ),
        (Some(p), None) => CheckVerdict::bounded(
            "tile containment",
            Status::Pass,
            format!("p = {p}, {} comparisons", stats.containment_checks),
            bound,
        ),
        (Some(p), Some(c)) => CheckVerdict::witnessed(
            "tile containment",
            Status::Fail,
            format!("p = {p}"),
            Witness::Text {
                description: format!(
                    "{}-tile of {} not in {}-tile of {}",
                    c.inner_k,
                    g.token(c.inner),
                    c.outer_k,
                    g.token(c.outer)
                ),
            },
        ),
    });
    let last = stats.k_max.saturating_sub(1);
    if let Some(err) = stats.ratio_error(last) {
        verdicts.push(CheckVerdict::bounded(
            "tile growth rate",
            if err < 0.02 {
                Status::Pass
            } else {
                Status::Fail
            },
            format!(
                "max |ratio - lambda| = {} at k = {last}",
                crate::cert::format_g(err, 12)
            ),
            "2% of lambda",
        ));
    }
    // replayable tiles at a small exponent
    let kw = stats.k_max.min(b.depth);
    for e in phi.stratum(r) {
        let d = OrientedEdge::forward(e);
        let p = g.path(g.init(d), &[d]).expect("edge");
        let img = f.iterate(&p, kw);
        verdicts.push(CheckVerdict::witnessed(
            format!("tile of {} at k = {kw}", g.token(d)),
            Status::Pass,
            "",
            rd.iterate(&p, kw, &img),
        ));
    }
    let result = json!({
        "height": r,
        "lambda": stats.lambda,
        "k_max": stats.k_max,
        "p": stats.p,
        "growth": stats.growth.iter().map(|eg| json!({
            "edge": g.token(eg.edge),
            "lengths": eg.lengths,
            "ratios": eg.ratios,
        })).collect::<Vec<_>>(),
    });
    (verdicts, result)
}

fn attract(
    input: &WorkbenchInput,
    height: Option<usize>,
    b: Budgets,
) -> (Vec<CheckVerdict>, Value) {
    let r = match height_or_top(input, height) {
        Ok(r) => r,
        Err(v) => return (vec![v], json!({})),
    };
    let (f, phi, g) = (&input.map, &input.filtration, &input.graph);
    let rd = Render { g };
    let basis = match attracting_basis(f, phi, r, b.depth) {
        Ok(x) => x,
        Err(DynamicsError::NoInteriorFixedPoint) => {
            let v = fail(
                "attracting basis",
                "no edge of the stratum has itself strictly inside its image; try --power",
            );
            return (vec![v], json!({"height": r}));
        }
        Err(e) => return (vec![dyn_fail("attracting basis", e)], json!({"height": r})),
    };
    let mut verdicts = Vec::new();
    for (i, w) in basis.gammas.windows(2).enumerate() {
        let idx = basis.start + i;
        verdicts.push(CheckVerdict::witnessed(
            format!("f(gamma_{idx}) contains gamma_{}", idx + 1),
            Status::Pass,
            "",
            Witness::ImageContains {
                start: rd.vertex(w[0].start()),
                path: rd.path(&w[0]),
                k: 1,
                sub: rd.path(&w[1]),
            },
        ));
    }
    let result = json!({
        "height": r,
        "seed": g.token(basis.seed),
        "seed_position": basis.seed_position,
        "lambda": basis.lambda,
        "lambda_prime": basis.lambda_prime,
        "k": basis.k,
        "start": basis.start,
        "indices": basis.indices,
        "gamma_lengths": basis.gammas.iter().map(EdgePath::len).collect::<Vec<_>>(),
        "nesting": basis.nesting,
    });
    (verdicts, result)
}

fn ray_json(rd: &Render, ray: &RayPrefix) -> Value {
    json!({
        "seed": rd.g.token(ray.seed),
        "depth": ray.depth,
        "class": serde_json::to_value(ray.class).expect("enum"),
        "path": rd.path(&ray.path),
        "companion": ray.companion.as_ref().map(|c| ray_json(rd, c)),
    })
}

fn rays(input: &WorkbenchInput, edge: Option<&str>, b: Budgets) -> (Vec<CheckVerdict>, Value) {
    let (f, phi, g) = (&input.map, &input.filtration, &input.graph);
    let rd = Render { g };
    let (records, _) = all_inps(input, b);
    let mut verdicts = Vec::new();
    let mut result = json!({});
    let seeds: Vec<OrientedEdge> = match edge {
        Some(tok) => match g.parse_token(tok) {
            Ok(d) => vec![d],
            Err(e) => return (vec![fail("rays", e.to_string())], result),
        },
        None => match principal_structure(f, phi, &records) {
            Ok(ps) => {
                result["principal_vertices"] = json!(ps
                    .principal_vertices
                    .iter()
                    .map(|&v| rd.vertex(v))
                    .collect::<Vec<_>>());
                result["principal_directions"] = json!(rd.word(&ps.principal_directions));
                ps.principal_directions.clone()
            }
            Err(e) => return (vec![dyn_fail("principal structure", e)], result),
        },
    };
    if seeds.is_empty() {
        verdicts.push(CheckVerdict::bounded(
            "rays",
            Status::Pass,
            "no principal directions",
            "finite direction map",
        ));
    }
    let mut out = Vec::new();
    for d in seeds {
        let check = format!("ray from {}", g.token(d));
        match ray_prefix(f, phi, &records, d, b.depth) {
            Ok(ray) => {
                let e = g.path(g.init(d), &[d]).expect("edge");
                let expect = f.iterate(&e, ray.depth);
                let w = if expect == ray.path {
                    rd.iterate(&e, ray.depth, &ray.path)
                } else {
                    Witness::ImageContains {
                        start: rd.vertex(e.start()),
                        path: rd.path(&e),
                        k: ray.depth,
                        sub: rd.path(&ray.path),
                    }
                };
                verdicts.push(CheckVerdict::witnessed(
                    check,
                    Status::Pass,
                    format!("{:?}", ray.class).to_lowercase(),
                    w,
                ));
                out.push(ray_json(&rd, &ray));
            }
            Err(e) => verdicts.push(dyn_fail(&check, e)),
        }
    }
    result["rays"] = json!(out);
    (verdicts, result)
}

fn parse_gens(g: &std::sync::Arc<MarkedGraph>, spec: &str) -> Result<CoreImmersion, String> {
    let mut loops = Vec::new();
    for w in spec.split(';').map(str::trim).filter(|w| !w.is_empty()) {
        let word = g.parse_word(w).map_err(|e| e.to_string())?;
        let p = g
            .path(g.init(word[0]), &word)
            .map_err(|e| format!("`{w}`: {e}"))?;
        loops.push(p);
    }
    let Some(base) = loops.first().map(|p| p.start()) else {
        return Err("empty generator list".into());
    };
    CoreImmersion::from_generators(g.clone(), base, &loops).map_err(|e| e.to_string())
}

fn parse_subgraph(g: &MarkedGraph, spec: &str) -> Result<EdgeSet, String> {
    spec.split_whitespace()
        .map(|n| g.edge_id(n).map_err(|e| e.to_string()))
        .collect()
}

fn immersion_json(rd: &Render, c: &CoreImmersion) -> Value {
    json!({
        "rank": c.rank(),
        "vertices": c.vertex_count(),
        "edges": c.labeled_edges().into_iter().map(|(u, v, l)| json!([u, v, l])).collect::<Vec<_>>(),
        "witness": c.witness_circuit().map(|w| rd.word(w.edges())),
    })
}

fn subgroup(
    input: &WorkbenchInput,
    verb: &SubgroupVerb,
    args: &SubgroupArgs,
) -> (Vec<CheckVerdict>, Value) {
    let g = &input.graph;
    let rd = Render { g };
    let check = format!("subgroup {}", verb_name(verb));
    let system = || -> Result<SubgroupSystem, String> {
        let mut comps = Vec::new();
        for s in &args.gens {
            let c = parse_gens(g, s)?;
            if !c.is_trivial() {
                comps.push(c.unbased());
            }
        }
        for s in &args.subgraphs {
            comps.extend(
                from_subgraph(g, &parse_subgraph(g, s)?)
                    .components()
                    .iter()
                    .cloned(),
            );
        }
        Ok(SubgroupSystem::new(comps))
    };
    let outcome: Result<(Vec<CheckVerdict>, Value), String> = (|| match verb {
        SubgroupVerb::Fold => {
            let [spec] = &args.gens[..] else {
                return Err("fold takes one --gens".into());
            };
            let c = parse_gens(g, spec)?;
            let v = CheckVerdict::bounded(
                &check,
                Status::Pass,
                format!("rank {}", c.rank()),
                "Stallings folding",
            );
            Ok((vec![v], immersion_json(&rd, &c)))
        }
        SubgroupVerb::Carries => {
            let class = args.class.as_deref().ok_or("carries needs --class")?;
            let c = g.parse_circuit(class).map_err(|e| e.to_string())?;
            let k = system()?;
            let yes = carries_class(&k, &c);
            let v = CheckVerdict::bounded(
                &check,
                if yes { Status::Pass } else { Status::Fail },
                "",
                "cyclic readings in each Stallings graph",
            );
            Ok((
                vec![v],
                json!({"class": rd.word(c.edges()), "carried": yes}),
            ))
        }
        SubgroupVerb::Intersect => {
            let [a, b] = &args.gens[..] else {
                return Err("intersect takes two --gens".into());
            };
            let (a, b) = (parse_gens(g, a)?, parse_gens(g, b)?);
            let meet = intersect_components(&a, &b);
            let nontrivial: Vec<Value> = meet
                .components()
                .iter()
                .filter(|c| !c.unbased().is_trivial())
                .map(|c| immersion_json(&rd, &c.unbased()))
                .collect();
            let v = CheckVerdict::bounded(
                &check,
                Status::Pass,
                format!("{} nontrivial components", nontrivial.len()),
                "fiber product",
            );
            Ok((vec![v], json!({"components": nontrivial})))
        }
        SubgroupVerb::Malnormal => {
            let k = system()?;
            let rep = is_malnormal(&k);
            let v = match &rep.witness {
                Some(w) => CheckVerdict::witnessed(
                    &check,
                    Status::Fail,
                    format!("components {:?}", rep.components),
                    Witness::Text {
                        description: g.format_word(w.edges()),
                    },
                ),
                None => CheckVerdict::bounded(
                    &check,
                    if rep.malnormal {
                        Status::Pass
                    } else {
                        Status::Fail
                    },
                    "",
                    "fiber products of all pairs",
                ),
            };
            Ok((
                vec![v],
                json!({"malnormal": rep.malnormal, "components": k.len()}),
            ))
        }
        SubgroupVerb::Meet => {
            let [a, b] = &args.subgraphs[..] else {
                return Err("meet takes two --subgraph".into());
            };
            let (a, b) = (parse_subgraph(g, a)?, parse_subgraph(g, b)?);
            let meet = meet_subgraph_systems(g, &a, &b).map_err(|e| e.to_string())?;
            let v = CheckVerdict::bounded(
                &check,
                Status::Pass,
                format!("{} components", meet.len()),
                "core of the common subgraph",
            );
            Ok((
                vec![v],
                json!({"components": meet.components().iter().map(|c| immersion_json(&rd, c)).collect::<Vec<_>>()}),
            ))
        }
    })();
    outcome.unwrap_or_else(|e| (vec![fail(&check, e)], json!({})))
}
