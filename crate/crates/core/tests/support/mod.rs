//! Oracles shared by the integration tests. Nothing here folds graphs or
//! reads the library's own reduction routines.
#![allow(dead_code)]

pub mod dynamics;
pub mod geometric;
pub mod lemma;
pub mod subgroups;

use std::collections::BTreeSet;

use rand::Rng;
use ttwb::graphs::{MarkedGraph, OrientedEdge};
use ttwb::maps::GraphMap;

/// Letters are `±(i+1)` for the `i`-th rose petal.
pub type Word = Vec<i32>;

pub fn reduce(w: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &x in w {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

pub fn inverse(w: &[i32]) -> Word {
    w.iter().rev().map(|x| -x).collect()
}

pub fn mul(a: &[i32], b: &[i32]) -> Word {
    let mut w = a.to_vec();
    w.extend_from_slice(b);
    reduce(&w)
}

pub fn cyclic_reduce(w: &[i32]) -> Word {
    let mut w = reduce(w);
    while w.len() >= 2 && w[0] == -w[w.len() - 1] {
        w.remove(0);
        w.pop();
    }
    w
}

/// Least rotation of a cyclically reduced word, used as a class key.
pub fn class_key(w: &[i32]) -> Word {
    let c = cyclic_reduce(w);
    (0..c.len().max(1))
        .map(|i| c[i..].iter().chain(&c[..i]).copied().collect::<Word>())
        .min()
        .unwrap_or_default()
}

pub fn power(w: &[i32], m: usize) -> Word {
    reduce(&w.repeat(m))
}

pub fn to_edges(w: &[i32]) -> Vec<OrientedEdge> {
    w.iter()
        .map(|&x| {
            if x > 0 {
                OrientedEdge::forward(x as usize - 1)
            } else {
                OrientedEdge::backward((-x) as usize - 1)
            }
        })
        .collect()
}

pub fn from_edges(w: &[OrientedEdge]) -> Word {
    w.iter()
        .map(|d| {
            if d.is_reversed() {
                -(d.edge() as i32 + 1)
            } else {
                d.edge() as i32 + 1
            }
        })
        .collect()
}

pub fn random_word(rng: &mut impl Rng, rank: usize, len: usize) -> Word {
    let mut w = Word::new();
    while w.len() < len {
        let x = rng.gen_range(1..=rank as i32) * if rng.gen_bool(0.5) { 1 } else { -1 };
        if w.last() != Some(&-x) {
            w.push(x);
        }
    }
    w
}

/// All reduced words of length at most `len`.
pub fn all_words(rank: usize, len: usize) -> Vec<Word> {
    let mut out = vec![Word::new()];
    let mut frontier = vec![Word::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &frontier {
            for x in 1..=rank as i32 {
                for y in [x, -x] {
                    if w.last() != Some(&-y) {
                        let mut v = w.clone();
                        v.push(y);
                        next.push(v);
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// A finitely generated subgroup, kept as a Nielsen-reduced basis.
#[derive(Clone, Debug)]
pub struct NielsenSubgroup {
    pub basis: Vec<Word>,
}

impl NielsenSubgroup {
    /// Length-reducing Nielsen moves until none applies.
    pub fn new(gens: &[Word]) -> Self {
        let mut b: Vec<Word> = gens
            .iter()
            .map(|g| reduce(g))
            .filter(|g| !g.is_empty())
            .collect();
        loop {
            let mut changed = false;
            'outer: for i in 0..b.len() {
                for j in 0..b.len() {
                    if i == j {
                        continue;
                    }
                    for y in [b[j].clone(), inverse(&b[j])] {
                        for cand in [mul(&b[i], &y), mul(&y, &b[i])] {
                            if cand.len() < b[i].len() {
                                b[i] = cand;
                                changed = true;
                                break 'outer;
                            }
                        }
                    }
                }
            }
            b.retain(|g| !g.is_empty());
            if !changed {
                break;
            }
        }
        NielsenSubgroup { basis: b }
    }

    fn letters(&self) -> Vec<Word> {
        self.basis
            .iter()
            .flat_map(|g| [g.clone(), inverse(g)])
            .collect()
    }

    /// Membership by searching reduced products of basis elements. Partial
    /// products never get much longer than the target and always share most
    /// of their prefix with it.
    pub fn contains(&self, w: &[i32]) -> bool {
        let w = reduce(w);
        if w.is_empty() {
            return true;
        }
        let letters = self.letters();
        let slack = letters.iter().map(|x| x.len()).max().unwrap_or(0);
        let mut stack: Vec<(Word, Option<usize>, usize)> = vec![(Word::new(), None, 0)];
        let mut seen = BTreeSet::new();
        while let Some((p, last, depth)) = stack.pop() {
            if p == w {
                return true;
            }
            if depth > w.len() + 2 {
                continue;
            }
            for (k, x) in letters.iter().enumerate() {
                if last.is_some_and(|l| l ^ 1 == k) {
                    continue;
                }
                let q = mul(&p, x);
                if q.len() > w.len() + slack {
                    continue;
                }
                let shared = q.iter().zip(&w).take_while(|(a, b)| a == b).count();
                if shared + slack < q.len() {
                    continue;
                }
                if seen.insert(q.clone()) {
                    stack.push((q, Some(k), depth + 1));
                }
            }
        }
        false
    }

    /// Some power `c^m` with `m ≤ max_power` has a conjugate `ū c' u` in the
    /// subgroup, with `c'` a rotation of `c^m` and `|u| ≤ max_conj`.
    pub fn carries_power(&self, c: &[i32], rank: usize, max_power: usize, max_conj: usize) -> bool {
        let c = cyclic_reduce(c);
        if c.is_empty() {
            return false;
        }
        let conj = all_words(rank, max_conj);
        for m in 1..=max_power {
            let cm = power(&c, m);
            for i in 0..cm.len() {
                let rot: Word = cm[i..].iter().chain(&cm[..i]).copied().collect();
                for u in &conj {
                    if self.contains(&mul(&mul(&inverse(u), &rot), u)) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Legality of a turn from the derivative table alone: `Df` is read off the
/// first letter of each image and iterated.
pub fn illegal_by_table(f: &GraphMap, a: OrientedEdge, b: OrientedEdge) -> bool {
    let g = f.graph();
    let n = g.direction_count();
    let df = |d: OrientedEdge| -> OrientedEdge {
        let img = f.image(d);
        img.edges()[0]
    };
    let (mut x, mut y) = (a, b);
    for _ in 0..=n * n {
        if x == y {
            return true;
        }
        x = df(x);
        y = df(y);
    }
    false
}

pub fn rose(names: &[&str]) -> std::sync::Arc<MarkedGraph> {
    std::sync::Arc::new(MarkedGraph::rose(names))
}

/// Positive root of a polynomial (coefficients from the leading term down)
/// in `[lo, hi]`, by bisection.
pub fn bisect_root(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let p = |x: f64| coeffs.iter().fold(0.0, |acc, c| acc * x + c);
    assert!(p(lo) * p(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(lo) * p(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
