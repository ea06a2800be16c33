//! The `##` lemma on random automorphisms of roses of rank 2 and 3.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttwb::graphs::{Circuit, EdgePath};
use ttwb::maps::{bcc_bound, compose, double_sharp, GraphMap};

use super::dynamics::{images, substitute, Outcome};
use super::*;

const NAMES: [&str; 3] = ["a", "b", "c"];

/// Product of random elementary Nielsen automorphisms.
pub fn random_automorphism(rng: &mut impl Rng, rank: usize, moves: usize) -> GraphMap {
    let mut imgs: Vec<Word> = (1..=rank as i32).map(|i| vec![i]).collect();
    for _ in 0..moves {
        let i = rng.gen_range(0..rank);
        let j = (i + rng.gen_range(1..rank)) % rank;
        let y = if rng.gen_bool(0.5) {
            imgs[j].clone()
        } else {
            inverse(&imgs[j])
        };
        imgs[i] = match rng.gen_range(0..3) {
            0 => mul(&imgs[i], &y),
            1 => mul(&y, &imgs[i]),
            _ => inverse(&imgs[i]),
        };
    }
    let g = rose(&NAMES[..rank]);
    let text: Vec<String> = imgs.iter().map(|w| g.format_word(&to_edges(w))).collect();
    let rules: Vec<(&str, &str)> = NAMES[..rank]
        .iter()
        .zip(&text)
        .map(|(n, t)| (*n, t.as_str()))
        .collect();
    GraphMap::from_strs(g, &rules).unwrap()
}

fn path(f: &GraphMap, w: &[i32]) -> EdgePath {
    f.graph().path(0, &to_edges(w)).unwrap()
}

fn inside(hay: &[i32], needle: &[i32]) -> Option<usize> {
    if needle.is_empty() {
        return Some(0);
    }
    hay.windows(needle.len()).position(|w| w == needle)
}

/// Runs the suite until `cases` (map, path) pairs have been checked.
pub fn double_sharp_suite(cases: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut done, mut skipped) = (0, 0);
    while done < cases {
        let rank = rng.gen_range(2..=3);
        let (mf, mh) = (rng.gen_range(1..=4), rng.gen_range(1..=2));
        let f = random_automorphism(&mut rng, rank, mf);
        let h = random_automorphism(&mut rng, rank, mh);
        let len = rng.gen_range(1..=8);
        let beta = random_word(&mut rng, rank, len);
        let b = bcc_bound(&f).map_err(|e| e.to_string())?;
        let fimg = images(&f);
        let fb = substitute(&fimg, &beta);
        let Ok(ds) = double_sharp(&f, &path(&f, &beta)) else {
            skipped += 1;
            continue;
        };
        let ds = from_edges(ds.edges());

        // f_##(β) is f_#(β) with at most b edges trimmed from each end
        if ds.is_empty() {
            if fb.len() > 2 * b {
                return Err(format!(
                    "{beta:?}: empty f_## but |f_#| = {} > 2·{b}",
                    fb.len()
                ));
            }
        } else {
            let ok = (0..=fb.len().saturating_sub(ds.len()))
                .any(|at| fb[at..].starts_with(&ds) && at <= b && fb.len() - at - ds.len() <= b);
            if !ok {
                return Err(format!("{beta:?}: f_## is not a trimmed f_#"));
            }
        }

        // subpaths have smaller f_##
        let lo = rng.gen_range(0..beta.len());
        let hi = rng.gen_range(lo + 1..=beta.len());
        let alpha = &beta[lo..hi];
        if let Ok(da) = double_sharp(&f, &path(&f, alpha)) {
            let da = from_edges(da.edges());
            if inside(&ds, &da).is_none() && !da.is_empty() {
                return Err(format!("{alpha:?} inside {beta:?}: f_## not monotone"));
            }
        }

        // f_##(α) survives in the image of any circuit through α
        if let Some(sigma) = Circuit::from_word(&to_edges(&beta)) {
            if cyclic_reduce(&beta) == beta {
                let fs = cyclic_reduce(&substitute(&fimg, &from_edges(sigma.edges())));
                if let Ok(da) = double_sharp(&f, &path(&f, alpha)) {
                    let da = from_edges(da.edges());
                    let doubled: Word = fs.iter().chain(&fs).copied().collect();
                    if !da.is_empty() && inside(&doubled, &da).is_none() {
                        return Err(format!("{alpha:?}: f_## not inside the circuit image"));
                    }
                }
            }
        }

        // h_##(f_##(β)) ⊂ (hf)_##(β)
        if !ds.is_empty() {
            let hf = compose(&h, &f).map_err(|e| e.to_string())?;
            if let (Ok(lhs), Ok(rhs)) = (
                double_sharp(&h, &path(&h, &ds)),
                double_sharp(&hf, &path(&hf, &beta)),
            ) {
                let (lhs, rhs) = (from_edges(lhs.edges()), from_edges(rhs.edges()));
                if !lhs.is_empty() && inside(&rhs, &lhs).is_none() {
                    return Err(format!("{beta:?}: composition property fails"));
                }
            }
        }
        done += 1;
    }
    Ok(format!("{done} cases, {skipped} over budget"))
}
