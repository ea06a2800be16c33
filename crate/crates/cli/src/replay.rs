//! Re-checks certificate witnesses with nothing but path tightening and the
//! map's action on paths, circuits and directions.

use serde_json::json;
use ttwb::graphs::{find_subslice, Circuit, EdgePath, MarkedGraph, OrientedEdge};
use ttwb::maps::GraphMap;
use ttwb::strata::Status;

use crate::cert::{digest, Budgets, Certificate, CheckVerdict, Witness};
use crate::input::WorkbenchInput;

fn word(g: &MarkedGraph, toks: &[String]) -> Result<Vec<OrientedEdge>, String> {
    toks.iter()
        .map(|t| g.parse_token(t).map_err(|e| e.to_string()))
        .collect()
}

fn path(g: &MarkedGraph, start: &str, toks: &[String]) -> Result<EdgePath, String> {
    let v = g.vertex_id(start).map_err(|e| e.to_string())?;
    let w = word(g, toks)?;
    let p = g.path(v, &w).map_err(|e| e.to_string())?;
    if p.len() != w.len() {
        return Err("witness path is not reduced".into());
    }
    Ok(p)
}

fn circuit(g: &MarkedGraph, toks: &[String]) -> Result<Circuit, String> {
    g.tighten_circuit(&word(g, toks)?)
        .map_err(|e| e.to_string())
}

/// `Ok(true)` when the witness holds, `Ok(false)` when it is refuted.
pub fn check_witness(f: &GraphMap, w: &Witness) -> Result<bool, String> {
    let g = f.graph().as_ref();
    Ok(match w {
        Witness::NielsenPath {
            start,
            path: p,
            period,
        } => {
            let p = path(g, start, p)?;
            *period >= 1 && f.iterate(&p, *period) == p
        }
        Witness::FixedCircuit { circuit: c, period } => {
            let c = circuit(g, c)?;
            *period >= 1 && f.iterate_circuit(&c, *period).map_err(|e| e.to_string())? == c
        }
        Witness::Iterate {
            start,
            path: p,
            k,
            image,
        } => {
            let p = path(g, start, p)?;
            f.iterate(&p, *k).edges() == word(g, image)?.as_slice()
        }
        Witness::ImageContains {
            start,
            path: p,
            k,
            sub,
        } => {
            let p = path(g, start, p)?;
            find_subslice(f.iterate(&p, *k).edges(), &word(g, sub)?).is_some()
        }
        Witness::Degenerate { directions, k } => {
            let dm = f.direction_map().map_err(|e| e.to_string())?;
            let a = g.parse_token(&directions[0]).map_err(|e| e.to_string())?;
            let b = g.parse_token(&directions[1]).map_err(|e| e.to_string())?;
            a != b && g.init(a) == g.init(b) && dm.df_iter(a, *k) == dm.df_iter(b, *k)
        }
        Witness::Crossings {
            start,
            path: p,
            counts,
        } => {
            let p = path(g, start, p)?;
            let have = p.crossing_counts(g.edge_count());
            counts
                .iter()
                .all(|(name, c)| g.edge_id(name).map(|e| have[e] == *c).unwrap_or(false))
        }
        Witness::SameCircuit { a, b } => {
            let (a, b) = (circuit(g, a)?, circuit(g, b)?);
            a == b || a == b.inverse()
        }
        Witness::Text { .. } => return Err("not replayable".into()),
    })
}

/// A `verify` certificate with one verdict per replayable witness.
pub fn replay(input: &WorkbenchInput, cert: &Certificate, budgets: Budgets) -> Certificate {
    let input = &input.clone().power(cert.power.max(1));
    let mut out = Vec::new();
    let d = digest(input);
    out.push(CheckVerdict::bounded(
        "input digest",
        if d == cert.input_digest {
            Status::Pass
        } else {
            Status::Fail
        },
        if d == cert.input_digest {
            String::new()
        } else {
            format!("certificate is for {}", cert.input_digest)
        },
        "SHA-256 of the canonical input text",
    ));
    let f = &input.map;
    let (mut replayed, mut skipped) = (0, 0);
    for v in &cert.verdicts {
        let Some(w) = &v.witness else { continue };
        if !w.replayable() {
            skipped += 1;
            continue;
        }
        replayed += 1;
        let status = match check_witness(f, w) {
            Ok(true) => Status::Pass,
            Ok(false) => Status::Fail,
            Err(e) => {
                out.push(CheckVerdict::witnessed(
                    format!("replay: {}", v.check),
                    Status::Fail,
                    e,
                    w.clone(),
                ));
                continue;
            }
        };
        out.push(CheckVerdict::witnessed(
            format!("replay: {}", v.check),
            status,
            "",
            w.clone(),
        ));
    }
    let result =
        json!({ "command": cert.command, "replayed": replayed, "not_replayable": skipped });
    Certificate::new("verify", input, cert.power, budgets, out, result)
}
