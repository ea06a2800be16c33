//! The line-oriented workbench format.
//!
//! ```text
//! graph
//!   vertex v
//!   edge a v v
//!   edge b v v
//! filtration
//!   1: a b        # cumulative edge list of G_1
//! map
//!   a -> b
//!   b -> b a
//! declare
//!   stratum 1 eg
//!   inp a b ~a ~b
//! ```
//!
//! `filtration` defaults to a single level and `map` to the identity. A map
//! line whose left side is a vertex name prescribes a vertex image, which is
//! needed only when no edge at that vertex has a nontrivial image.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;
use ttwb::graphs::{
    valid_edge_name, valid_vertex_name, EdgePath, EdgeSet, MarkedGraph, OrientedEdge, VertexId,
};
use ttwb::maps::GraphMap;
use ttwb::strata::Filtration;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InputError {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: {message}")]
    Semantic {
        line: usize,
        column: usize,
        message: String,
    },
}

impl InputError {
    fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        InputError::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn semantic(line: usize, column: usize, message: impl Into<String>) -> Self {
        InputError::Semantic {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Warning {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.line, self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExpectedClass {
    Eg,
    Neg,
    Zero,
}

impl ExpectedClass {
    pub fn name(self) -> &'static str {
        match self {
            ExpectedClass::Eg => "eg",
            ExpectedClass::Neg => "neg",
            ExpectedClass::Zero => "zero",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Declarations {
    pub strata: BTreeMap<usize, ExpectedClass>,
    /// Supplied Nielsen paths.
    pub inps: Vec<EdgePath>,
}

#[derive(Clone, Debug)]
pub struct WorkbenchInput {
    pub graph: Arc<MarkedGraph>,
    pub filtration: Filtration,
    pub map: GraphMap,
    pub declarations: Declarations,
    pub warnings: Vec<Warning>,
}

/// Warnings are diagnostics, not part of the input.
impl PartialEq for WorkbenchInput {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph
            && self.filtration == other.filtration
            && self.map == other.map
            && self.declarations == other.declarations
    }
}

impl WorkbenchInput {
    /// Replaces the map by its `k`-th power.
    pub fn power(mut self, k: usize) -> Self {
        if k != 1 {
            self.map = self.map.power(k);
        }
        self
    }
}

/// A whitespace-separated token with its 1-based column.
struct Tok<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (col, (i, c)) in line.char_indices().enumerate() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some((i, col)),
            (true, Some((s, sc))) => {
                out.push(Tok {
                    text: &line[s..i],
                    column: sc + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some((s, sc)) = start {
        out.push(Tok {
            text: &line[s..],
            column: sc + 1,
        });
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    Graph,
    Filtration,
    Map,
    Declare,
}

struct Raw<'a> {
    line: usize,
    toks: Vec<Tok<'a>>,
}

pub fn parse_input(text: &str) -> Result<WorkbenchInput, InputError> {
    let mut section = Section::None;
    let mut seen = BTreeSet::new();
    let mut vertices: Vec<(usize, Tok)> = Vec::new();
    let mut edges: Vec<(usize, Tok, Tok, Tok)> = Vec::new();
    let mut levels: Vec<Raw> = Vec::new();
    let mut rules: Vec<Raw> = Vec::new();
    let mut decls: Vec<Raw> = Vec::new();
    let mut graph_line = 0;

    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let body = full.split('#').next().unwrap_or("");
        let toks = tokens(body);
        let Some(head) = toks.first() else { continue };
        let next = match head.text {
            "graph" => Some(Section::Graph),
            "filtration" => Some(Section::Filtration),
            "map" => Some(Section::Map),
            "declare" => Some(Section::Declare),
            _ => None,
        };
        if let Some(s) = next {
            if toks.len() > 1 {
                return Err(InputError::parse(
                    line,
                    toks[1].column,
                    format!("unexpected text after `{}`", head.text),
                ));
            }
            if !seen.insert(head.text) {
                return Err(InputError::parse(
                    line,
                    head.column,
                    format!("duplicate section `{}`", head.text),
                ));
            }
            if s == Section::Graph {
                graph_line = line;
            }
            section = s;
            continue;
        }
        match section {
            Section::None => {
                return Err(InputError::parse(
                    line,
                    head.column,
                    "expected a section header",
                ))
            }
            Section::Graph => match head.text {
                "vertex" => {
                    if toks.len() != 2 {
                        return Err(InputError::parse(
                            line,
                            head.column,
                            "expected `vertex NAME`",
                        ));
                    }
                    let mut it = toks.into_iter();
                    it.next();
                    vertices.push((line, it.next().unwrap()));
                }
                "edge" => {
                    if toks.len() != 4 {
                        return Err(InputError::parse(
                            line,
                            head.column,
                            "expected `edge NAME INIT TERM`",
                        ));
                    }
                    let mut it = toks.into_iter().skip(1);
                    edges.push((
                        line,
                        it.next().unwrap(),
                        it.next().unwrap(),
                        it.next().unwrap(),
                    ));
                }
                other => {
                    return Err(InputError::parse(
                        line,
                        head.column,
                        format!("unknown graph item `{other}`"),
                    ))
                }
            },
            Section::Filtration => levels.push(Raw { line, toks }),
            Section::Map => rules.push(Raw { line, toks }),
            Section::Declare => decls.push(Raw { line, toks }),
        }
    }
    if !seen.contains("graph") {
        return Err(InputError::parse(1, 1, "missing `graph` section"));
    }

    // graph
    for (line, v) in &vertices {
        if !valid_vertex_name(v.text) {
            return Err(InputError::parse(
                *line,
                v.column,
                format!("invalid vertex name `{}`", v.text),
            ));
        }
    }
    let vnames: BTreeSet<&str> = vertices.iter().map(|(_, v)| v.text).collect();
    if vnames.len() != vertices.len() {
        let (line, v) = vertices
            .iter()
            .find(|(_, v)| vertices.iter().filter(|(_, w)| w.text == v.text).count() > 1)
            .unwrap();
        return Err(InputError::semantic(
            *line,
            v.column,
            format!("duplicate vertex `{}`", v.text),
        ));
    }
    let mut enames = BTreeSet::new();
    for (line, name, a, b) in &edges {
        if !valid_edge_name(name.text) {
            return Err(InputError::parse(
                *line,
                name.column,
                format!("invalid edge name `{}`", name.text),
            ));
        }
        if !enames.insert(name.text) {
            return Err(InputError::semantic(
                *line,
                name.column,
                format!("duplicate edge `{}`", name.text),
            ));
        }
        if vnames.contains(name.text) {
            return Err(InputError::semantic(
                *line,
                name.column,
                format!("`{}` names both a vertex and an edge", name.text),
            ));
        }
        for end in [a, b] {
            if !vnames.contains(end.text) {
                return Err(InputError::semantic(
                    *line,
                    end.column,
                    format!("undeclared vertex `{}`", end.text),
                ));
            }
        }
    }
    if edges.is_empty() {
        return Err(InputError::semantic(graph_line, 1, "graph has no edges"));
    }
    let vlist: Vec<&str> = vertices.iter().map(|(_, v)| v.text).collect();
    let elist: Vec<(&str, &str, &str)> = edges
        .iter()
        .map(|(_, n, a, b)| (n.text, a.text, b.text))
        .collect();
    let graph = MarkedGraph::new(&vlist, &elist)
        .and_then(MarkedGraph::marked)
        .map_err(|e| InputError::semantic(graph_line, 1, e.to_string()))?;
    let graph = Arc::new(graph);

    let edge_tok = |line: usize, t: &Tok| -> Result<OrientedEdge, InputError> {
        let name = t.text.strip_prefix('~').unwrap_or(t.text);
        if !valid_edge_name(name) {
            return Err(InputError::parse(
                line,
                t.column,
                format!("invalid token `{}`", t.text),
            ));
        }
        graph
            .parse_token(t.text)
            .map_err(|_| InputError::semantic(line, t.column, format!("undeclared edge `{name}`")))
    };
    let word = |line: usize, toks: &[Tok]| -> Result<Vec<OrientedEdge>, InputError> {
        let w = toks
            .iter()
            .map(|t| edge_tok(line, t))
            .collect::<Result<Vec<_>, _>>()?;
        for (k, pair) in w.windows(2).enumerate() {
            if graph.term(pair[0]) != graph.init(pair[1]) {
                let t = &toks[k + 1];
                return Err(InputError::semantic(
                    line,
                    t.column,
                    format!("`{}` does not start where the previous token ends", t.text),
                ));
            }
        }
        Ok(w)
    };

    // filtration
    let filtration = if levels.is_empty() {
        Filtration::single(&graph)
    } else {
        let mut sets: Vec<EdgeSet> = Vec::new();
        for raw in &levels {
            let head = &raw.toks[0];
            let k = head
                .text
                .strip_suffix(':')
                .and_then(|n| n.parse::<usize>().ok())
                .ok_or_else(|| InputError::parse(raw.line, head.column, "expected `K: edges…`"))?;
            if k != sets.len() + 1 {
                return Err(InputError::semantic(
                    raw.line,
                    head.column,
                    format!("expected level {}, found {k}", sets.len() + 1),
                ));
            }
            let mut set = EdgeSet::new();
            for t in &raw.toks[1..] {
                let d = edge_tok(raw.line, t)?;
                if d.is_reversed() {
                    return Err(InputError::parse(
                        raw.line,
                        t.column,
                        "filtration levels list edges, not inverses",
                    ));
                }
                set.insert(d.edge());
            }
            if let Some(prev) = sets.last() {
                if !prev.is_subset(&set) || *prev == set {
                    return Err(InputError::semantic(
                        raw.line,
                        head.column,
                        format!("level {k} does not strictly contain level {}", k - 1),
                    ));
                }
            } else if set.is_empty() {
                return Err(InputError::semantic(
                    raw.line,
                    head.column,
                    "level 1 is empty",
                ));
            }
            sets.push(set);
        }
        let last = levels.last().unwrap();
        Filtration::new(&graph, sets)
            .map_err(|e| InputError::semantic(last.line, 1, e.to_string()))?
    };

    // map
    let mut warnings = Vec::new();
    let map = if !seen.contains("map") {
        GraphMap::identity(graph.clone())
    } else {
        let mut images: Vec<Option<(usize, Vec<OrientedEdge>)>> = vec![None; graph.edge_count()];
        let mut vmap: Vec<Option<VertexId>> = vec![None; graph.vertex_count()];
        let mut map_line = 0;
        for raw in &rules {
            map_line = raw.line;
            if raw.toks.len() < 2 || raw.toks[1].text != "->" {
                return Err(InputError::parse(
                    raw.line,
                    raw.toks[0].column,
                    "expected `NAME -> image`",
                ));
            }
            let lhs = &raw.toks[0];
            if let Ok(e) = graph.edge_id(lhs.text) {
                if images[e].is_some() {
                    return Err(InputError::semantic(
                        raw.line,
                        lhs.column,
                        format!("second image for edge `{}`", lhs.text),
                    ));
                }
                images[e] = Some((raw.line, word(raw.line, &raw.toks[2..])?));
            } else if let Ok(v) = graph.vertex_id(lhs.text) {
                let [t] = &raw.toks[2..] else {
                    return Err(InputError::parse(
                        raw.line,
                        lhs.column,
                        "a vertex maps to one vertex",
                    ));
                };
                let w = graph.vertex_id(t.text).map_err(|_| {
                    InputError::semantic(
                        raw.line,
                        t.column,
                        format!("undeclared vertex `{}`", t.text),
                    )
                })?;
                if vmap[v].replace(w).is_some() {
                    return Err(InputError::semantic(
                        raw.line,
                        lhs.column,
                        format!("second image for vertex `{}`", lhs.text),
                    ));
                }
            } else {
                return Err(InputError::semantic(
                    raw.line,
                    lhs.column,
                    format!("undeclared edge `{}`", lhs.text),
                ));
            }
        }
        let mut words = Vec::new();
        for (e, img) in images.into_iter().enumerate() {
            let (_, w) = img.ok_or_else(|| {
                InputError::semantic(
                    map_line.max(1),
                    1,
                    format!("no image for edge `{}`", graph.edge_name(e)),
                )
            })?;
            words.push(w);
        }
        let lines: BTreeMap<&str, usize> = rules.iter().map(|r| (r.toks[0].text, r.line)).collect();
        let (map, tightened) = GraphMap::with_partial_vertices(graph.clone(), vmap, words)
            .map_err(|e| InputError::semantic(map_line.max(1), 1, e.to_string()))?;
        for name in tightened {
            let img = graph.format_word(map.edge_image(graph.edge_id(&name).unwrap()).edges());
            warnings.push(Warning {
                line: lines[name.as_str()],
                message: format!("image of `{name}` tightened to `{img}`"),
            });
        }
        map
    };

    // declarations
    let mut declarations = Declarations::default();
    for raw in &decls {
        let head = &raw.toks[0];
        match head.text {
            "stratum" => {
                let [_, k, c] = &raw.toks[..] else {
                    return Err(InputError::parse(
                        raw.line,
                        head.column,
                        "expected `stratum K eg|neg|zero`",
                    ));
                };
                let level = k
                    .text
                    .parse::<usize>()
                    .map_err(|_| InputError::parse(raw.line, k.column, "expected a level"))?;
                if level == 0 || level > filtration.top() {
                    return Err(InputError::semantic(
                        raw.line,
                        k.column,
                        format!("no stratum {level}"),
                    ));
                }
                let class = match c.text {
                    "eg" => ExpectedClass::Eg,
                    "neg" => ExpectedClass::Neg,
                    "zero" => ExpectedClass::Zero,
                    other => {
                        return Err(InputError::parse(
                            raw.line,
                            c.column,
                            format!("unknown class `{other}`"),
                        ))
                    }
                };
                declarations.strata.insert(level, class);
            }
            "inp" => {
                if raw.toks.len() < 2 {
                    return Err(InputError::parse(
                        raw.line,
                        head.column,
                        "an INP has at least one edge",
                    ));
                }
                let w = word(raw.line, &raw.toks[1..])?;
                let p = graph
                    .path(graph.init(w[0]), &w)
                    .map_err(|e| InputError::semantic(raw.line, head.column, e.to_string()))?;
                if p.len() != w.len() {
                    return Err(InputError::semantic(
                        raw.line,
                        raw.toks[1].column,
                        "supplied INP is not reduced",
                    ));
                }
                declarations.inps.push(p);
            }
            other => {
                return Err(InputError::parse(
                    raw.line,
                    head.column,
                    format!("unknown declaration `{other}`"),
                ))
            }
        }
    }

    Ok(WorkbenchInput {
        graph,
        filtration,
        map,
        declarations,
        warnings,
    })
}

/// Canonical text of an input. Parsing it back gives the same input.
pub fn serialize(input: &WorkbenchInput) -> String {
    let g = &input.graph;
    let mut out = String::from("graph\n");
    for v in g.vertex_names() {
        out.push_str(&format!("  vertex {v}\n"));
    }
    for e in g.edges() {
        out.push_str(&format!(
            "  edge {} {} {}\n",
            e.name,
            g.vertex_name(e.init),
            g.vertex_name(e.term)
        ));
    }
    out.push_str("filtration\n");
    for (k, names) in input.filtration.level_names(g).iter().enumerate() {
        out.push_str(&format!("  {}: {}\n", k + 1, names.join(" ")));
    }
    out.push_str("map\n");
    let f = &input.map;
    let mut determined = BTreeSet::new();
    for (e, rec) in g.edges().iter().enumerate() {
        let img = f.edge_image(e);
        if img.is_empty() {
            out.push_str(&format!("  {} ->\n", rec.name));
        } else {
            determined.insert(rec.init);
            determined.insert(rec.term);
            out.push_str(&format!(
                "  {} -> {}\n",
                rec.name,
                g.format_word(img.edges())
            ));
        }
    }
    for v in 0..g.vertex_count() {
        if !determined.contains(&v) {
            out.push_str(&format!(
                "  {} -> {}\n",
                g.vertex_name(v),
                g.vertex_name(f.vertex(v))
            ));
        }
    }
    let d = &input.declarations;
    if !d.strata.is_empty() || !d.inps.is_empty() {
        out.push_str("declare\n");
        for (k, c) in &d.strata {
            out.push_str(&format!("  stratum {k} {}\n", c.name()));
        }
        for p in &d.inps {
            out.push_str(&format!("  inp {}\n", g.format_word(p.edges())));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = "graph\n  vertex v\n  edge a v v\n  edge b v v\nfiltration\n  1: a b   # all of G\nmap\n  a -> b\n  b -> b a\n";

    #[test]
    fn ex1_parses() {
        let input = parse_input(EX1).unwrap();
        assert_eq!(
            (input.graph.vertex_count(), input.graph.edge_count()),
            (1, 2)
        );
        assert!(input.warnings.is_empty());
        assert_eq!(parse_input(&serialize(&input)).unwrap(), input);
    }

    #[test]
    fn tightening_warns() {
        let text = EX1.replace("a -> b\n", "a -> b ~b a\n");
        let input = parse_input(&text).unwrap();
        assert_eq!(input.warnings.len(), 1);
        assert_eq!(input.warnings[0].line, 8);
        assert_eq!(
            input.graph.format_word(input.map.edge_image(0).edges()),
            "a"
        );
    }

    #[test]
    fn diagnostics() {
        let bad = EX1.replace("1: a b", "1: a c");
        assert_eq!(
            parse_input(&bad).unwrap_err(),
            InputError::Semantic {
                line: 6,
                column: 8,
                message: "undeclared edge `c`".into()
            }
        );
        let bad = EX1.replace("b -> b a", "b -> b A");
        assert!(matches!(
            parse_input(&bad).unwrap_err(),
            InputError::Parse {
                line: 9,
                column: 10,
                ..
            }
        ));
        let bad = EX1.replace("map\n", "");
        assert!(matches!(
            parse_input(&bad).unwrap_err(),
            InputError::Parse {
                line: 7,
                column: 3,
                ..
            }
        ));
        let nested = "graph\n vertex v\n edge a v v\n edge b v v\nfiltration\n 1: a\n 2: b\n";
        assert!(matches!(
            parse_input(nested).unwrap_err(),
            InputError::Semantic { line: 7, .. }
        ));
        let missing = EX1.replace("  b -> b a\n", "");
        assert!(matches!(
            parse_input(&missing).unwrap_err(),
            InputError::Semantic { .. }
        ));
    }

    #[test]
    fn vertex_images_and_declarations() {
        let text = "graph\n vertex v\n vertex w\n edge a v v\n edge c v w\nmap\n a -> a\n c ->\n w -> v\ndeclare\n stratum 1 neg\n inp a\n";
        let input = parse_input(text).unwrap();
        assert_eq!(input.map.vertex(1), 0);
        assert_eq!(input.declarations.strata[&1], ExpectedClass::Neg);
        assert_eq!(input.declarations.inps.len(), 1);
        assert_eq!(parse_input(&serialize(&input)).unwrap(), input);
    }
}
