//! Checks on train track dynamics over roses, each computed twice: once by
//! the library and once by plain substitution and free reduction.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttwb::dynamics::{attracting_basis, tile_statistics};
use ttwb::graphs::{Circuit, EdgeSet};
use ttwb::maps::{bcc_bound, compose, GraphMap};
use ttwb::nielsen::find_all_inps;
use ttwb::splitting::{coarse_eg_split, Subject};
use ttwb::strata::perron::perron;
use ttwb::strata::{classify_stratum, pf_eigenvalue, transition_matrix, Filtration, StratumClass};

use super::*;

pub type Outcome = Result<String, String>;

/// A map on a rose given by image words, with filtration levels as edge
/// index lists.
pub fn rose_map(
    names: &[&str],
    rules: &[(&str, &str)],
    levels: &[&[usize]],
) -> (GraphMap, Filtration) {
    let g = rose(names);
    let f = GraphMap::from_strs(g.clone(), rules).unwrap();
    let phi = if levels.is_empty() {
        Filtration::single(&g)
    } else {
        Filtration::new(
            &g,
            levels
                .iter()
                .map(|l| l.iter().copied().collect::<EdgeSet>())
                .collect(),
        )
        .unwrap()
    };
    (f, phi)
}

pub fn ex1() -> (GraphMap, Filtration) {
    rose_map(&["a", "b"], &[("a", "b"), ("b", "b a")], &[])
}

pub fn ex2() -> (GraphMap, Filtration) {
    rose_map(
        &["a", "b", "c"],
        &[("a", "b"), ("b", "c"), ("c", "a b")],
        &[],
    )
}

pub fn ex3() -> (GraphMap, Filtration) {
    rose_map(&["a", "e"], &[("a", "a"), ("e", "e a")], &[&[0], &[0, 1]])
}

/// EX1 squared above a fixed loop at the same vertex.
pub fn ex4() -> (GraphMap, Filtration) {
    rose_map(
        &["c", "a", "b"],
        &[("c", "c"), ("a", "b a"), ("b", "b a b")],
        &[&[0], &[0, 1, 2]],
    )
}

pub fn images(f: &GraphMap) -> Vec<Word> {
    (0..f.graph().edge_count())
        .map(|e| from_edges(f.edge_image(e).edges()))
        .collect()
}

pub fn substitute(imgs: &[Word], w: &[i32]) -> Word {
    let mut out = Word::new();
    for &x in w {
        let i = x.unsigned_abs() as usize - 1;
        if x > 0 {
            out.extend_from_slice(&imgs[i]);
        } else {
            out.extend(inverse(&imgs[i]));
        }
    }
    reduce(&out)
}

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

/// PF eigenvalues of the golden-mean and EX2 matrices against polynomial roots.
pub fn pf_eigenvalues() -> Outcome {
    let golden = bisect_root(&[1.0, -1.0, -1.0], 1.0, 2.0);
    let plastic = bisect_root(&[1.0, 0.0, -1.0, -1.0], 1.0, 2.0);
    let t = Instant::now();
    let a = perron::<f64>(&[vec![0, 1], vec![1, 1]], 1e-12, 10_000)
        .map_err(|e| e.to_string())?
        .lambda;
    let ta = t.elapsed();
    let (f, phi) = ex2();
    let t = Instant::now();
    let b = pf_eigenvalue(&transition_matrix(&f, &phi, 1).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let tb = t.elapsed();
    check(
        (a - golden).abs() < 1e-9,
        format!("golden mean {a} against {golden}"),
    )?;
    check(
        (b - plastic).abs() < 1e-9,
        format!("EX2 {b} against {plastic}"),
    )?;
    check(
        ta.as_millis() < 10 && tb.as_millis() < 10,
        format!("took {ta:?} and {tb:?}"),
    )?;
    Ok(format!("{a:.10} and {b:.10}"))
}

/// Largest juncture cancellation over reduced `αβ` with `|α| + |β| ≤ max_len`.
pub fn worst_cancellation(f: &GraphMap, max_len: usize) -> usize {
    let imgs = images(f);
    let rank = f.graph().edge_count();
    let mut worst = 0;
    for w in all_words(rank, max_len) {
        for cut in 1..w.len() {
            let (a, b) = w.split_at(cut);
            let (fa, fb, fw) = (
                substitute(&imgs, a),
                substitute(&imgs, b),
                substitute(&imgs, &w),
            );
            worst = worst.max((fa.len() + fb.len() - fw.len()) / 2);
        }
    }
    worst
}

pub fn cancellation_soundness() -> Outcome {
    let mut parts = Vec::new();
    for (name, (f, _)) in [("EX1", ex1()), ("EX3", ex3())] {
        let b = bcc_bound(&f).map_err(|e| e.to_string())?;
        let seen = worst_cancellation(&f, 8);
        check(
            seen <= b,
            format!("{name}: cancellation {seen} above bound {b}"),
        )?;
        parts.push(format!("{name} {seen} <= {b}"));
    }
    Ok(parts.join(", "))
}

pub fn tile_dynamics() -> Outcome {
    let mut parts = Vec::new();
    for (name, (f, phi)) in [("EX1", ex1()), ("EX2", ex2())] {
        let st = tile_statistics(&f, &phi, 1, 20).map_err(|e| e.to_string())?;
        let p = st.p.ok_or("periodic transition matrix")?;
        check(
            st.containment_holds(),
            format!(
                "{name}: {} containment failures",
                st.containment_failures.len()
            ),
        )?;
        // independent tiles by substitution
        let imgs = images(&f);
        let n = imgs.len();
        let mut tiles: Vec<Vec<Word>> = (0..n).map(|e| vec![vec![e as i32 + 1]]).collect();
        for t in tiles.iter_mut() {
            for k in 1..=20 {
                let next = substitute(&imgs, &t[k - 1]);
                t.push(next);
            }
        }
        for e in 0..n {
            for k in 15..20 {
                let ratio = tiles[e][k + 1].len() as f64 / tiles[e][k].len() as f64;
                check(
                    (ratio - st.lambda).abs() / st.lambda < 0.02,
                    format!("{name}: ratio {ratio} at k = {k}"),
                )?;
                check(
                    st.growth[e].lengths[k] == tiles[e][k].len(),
                    format!("{name}: tile length at k = {k}"),
                )?;
            }
        }
        let contains = |hay: &Word, needle: &Word| {
            let rev = inverse(needle);
            hay.windows(needle.len())
                .any(|w| w == needle.as_slice() || w == rev.as_slice())
        };
        for k in 0..=20 - p {
            for outer in 0..n {
                for inner in 0..n {
                    check(
                        contains(&tiles[outer][k + p], &tiles[inner][k]),
                        format!("{name}: tile {inner}/{k} not in {outer}/{}", k + p),
                    )?;
                }
            }
        }
        parts.push(format!(
            "{name} p = {p}, {} containments",
            st.containment_checks
        ));
    }
    Ok(parts.join(", "))
}

/// EX1 cubed: `f_#(γ_i) ⊇ γ_{i+1}` for `i = 0..=8`.
pub fn attracting_nesting() -> Outcome {
    let (f, phi) = ex1();
    let f3 = compose(&f, &compose(&f, &f).unwrap()).unwrap();
    let basis = attracting_basis(&f3, &phi, 1, 9).map_err(|e| e.to_string())?;
    check(
        basis.gammas.len() >= 10,
        format!("{} neighborhoods", basis.gammas.len()),
    )?;
    let imgs = images(&f3);
    for i in 0..=8 {
        let outer = substitute(&imgs, &from_edges(basis.gammas[i].edges()));
        let inner = from_edges(basis.gammas[i + 1].edges());
        check(
            outer.windows(inner.len()).any(|w| w == inner.as_slice()),
            format!("gamma_{} not inside f(gamma_{i})", i + 1),
        )?;
    }
    Ok(format!(
        "gamma_0..gamma_9 nested, lengths {} to {}",
        basis.gammas[0].len(),
        basis.gammas[9].len()
    ))
}

fn illegal_count(f: &GraphMap, phi: &Filtration, r: usize, c: &[i32]) -> usize {
    let e = to_edges(c);
    let n = e.len();
    (0..n)
        .filter(|&i| {
            let (x, y) = (e[i].reverse(), e[(i + 1) % n]);
            phi.edge_height(x.edge()) == r
                && phi.edge_height(y.edge()) == r
                && illegal_by_table(f, x, y)
        })
        .count()
}

/// Random height-r circuits: r-illegal turn counts never go up, and the
/// coarse splitting exists once they settle.
pub fn splitting_monotonicity(circuits_per_map: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (f1, phi1) = ex1();
    let f2 = compose(&f1, &f1).unwrap();
    let mut total = 0;
    for (name, (f, phi)) in [
        ("EX1", (f1.clone(), phi1.clone())),
        ("EX1^2", (f2, phi1)),
        ("EX2", ex2()),
        ("EX4", ex4()),
    ] {
        let r = phi.top();
        let StratumClass::Eg { .. } = classify_stratum(&f, &phi, r).map_err(|e| e.to_string())?
        else {
            return Err(format!("{name}: top stratum is not EG"));
        };
        let inps = find_all_inps(&f, &phi, 64, 2)
            .map_err(|e| e.to_string())?
            .records;
        let imgs = images(&f);
        let rank = imgs.len();
        let mut done = 0;
        while done < circuits_per_map {
            let len = rng.gen_range(2..=10);
            let c = cyclic_reduce(&random_word(&mut rng, rank, len));
            if c.is_empty()
                || !c
                    .iter()
                    .any(|x| phi.edge_height(x.unsigned_abs() as usize - 1) == r)
            {
                continue;
            }
            done += 1;
            let mut counts = vec![illegal_count(&f, &phi, r, &c)];
            let mut w = c.clone();
            while counts.len() <= 12 && w.len() < 4000 {
                w = cyclic_reduce(&substitute(&imgs, &w));
                counts.push(illegal_count(&f, &phi, r, &w));
            }
            let last = counts.len() - 1;
            check(
                counts.windows(2).all(|p| p[1] <= p[0]),
                format!("{name}: counts {counts:?} for {c:?}"),
            )?;
            let sigma = Subject::Circuit(Circuit::from_word(&to_edges(&c)).unwrap());
            let split = coarse_eg_split(&f, &phi, r, &sigma, &inps)
                .map_err(|e| format!("{name}: {c:?}: {e}"))?;
            let k = split.k;
            let shared = (k + 1).min(counts.len());
            check(
                split.counts[..shared] == counts[..shared],
                format!(
                    "{name}: library counts {:?} against {counts:?}",
                    split.counts
                ),
            )?;
            // the count has settled by the time the splitting is found
            if k < last {
                check(
                    counts[k..].iter().all(|&x| x == counts[k]),
                    format!("{name}: count still falling after k = {k}"),
                )?;
            }
        }
        total += done;
    }
    Ok(format!("{total} circuits"))
}
