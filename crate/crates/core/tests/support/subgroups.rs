//! Random subgroup pairs checked against the Nielsen-basis oracle.

use std::sync::Arc;

use rand::Rng;
use ttwb::graphs::{Circuit, MarkedGraph};
use ttwb::stallings::{
    carries_class, fiber_product, intersect_components, CoreImmersion, SubgroupSystem,
};

use super::*;

const NAMES: [&str; 3] = ["a", "b", "c"];

pub struct Case {
    pub rank: usize,
    pub gens: [Vec<Word>; 2],
}

pub fn random_case(rng: &mut impl Rng) -> Case {
    let rank = rng.gen_range(2..=3);
    let mut sub = || {
        let k = rng.gen_range(1..=2);
        (0..k)
            .map(|_| {
                let len = rng.gen_range(1..=3);
                random_word(rng, rank, len)
            })
            .collect::<Vec<Word>>()
    };
    Case {
        rank,
        gens: [sub(), sub()],
    }
}

fn immersion(g: &Arc<MarkedGraph>, gens: &[Word]) -> CoreImmersion {
    let loops: Vec<_> = gens
        .iter()
        .map(|w| g.path(0, &to_edges(w)).unwrap())
        .collect();
    CoreImmersion::from_generators(g.clone(), 0, &loops).unwrap()
}

fn circuit(c: &[i32]) -> Circuit {
    Circuit::from_word(&to_edges(&cyclic_reduce(c))).unwrap()
}

#[derive(Default)]
pub struct Tally {
    pub checks: usize,
    pub carried: usize,
    pub meet_components: usize,
}

/// Checks one pair of subgroups against the enumeration oracle.
pub fn check_case(case: &Case, rng: &mut impl Rng, tally: &mut Tally) {
    let g = rose(&NAMES[..case.rank]);
    let hs: Vec<NielsenSubgroup> = case
        .gens
        .iter()
        .map(|gs| NielsenSubgroup::new(gs))
        .collect();
    let cores: Vec<CoreImmersion> = case.gens.iter().map(|gs| immersion(&g, gs)).collect();
    let budget: usize = case.gens.iter().flatten().map(|w| w.len()).sum();
    // based membership on words of length at most 8
    let mut words: Vec<Word> = (0..60)
        .map(|_| {
            let len = rng.gen_range(0..=8);
            random_word(rng, case.rank, len)
        })
        .collect();
    for h in &hs {
        for _ in 0..20 {
            let mut w = Word::new();
            for _ in 0..rng.gen_range(1..=3) {
                let x = &h.basis[rng.gen_range(0..h.basis.len())];
                w = mul(
                    &w,
                    &if rng.gen_bool(0.5) {
                        x.clone()
                    } else {
                        inverse(x)
                    },
                );
            }
            if w.len() <= 8 {
                words.push(w);
            }
        }
    }
    for w in &words {
        for (h, core) in hs.iter().zip(&cores) {
            assert_eq!(
                core.contains_element(&to_edges(w)),
                h.contains(w),
                "{:?} in {:?}",
                w,
                h.basis
            );
            tally.checks += 1;
        }
        let base = fiber_product(&cores[0], &cores[1])
            .into_iter()
            .find(|(_, b)| *b)
            .map(|(c, _)| c);
        let both = hs[0].contains(w) && hs[1].contains(w);
        let got = base.is_some_and(|c| c.contains_element(&to_edges(w)));
        assert_eq!(
            got, both,
            "{:?} in both {:?} {:?}",
            w, hs[0].basis, hs[1].basis
        );
        tally.checks += 1;
    }

    // conjugacy classes of length at most 8
    let mut classes: Vec<Word> = (0..12)
        .map(|_| {
            let len = rng.gen_range(1..=8);
            cyclic_reduce(&random_word(rng, case.rank, len))
        })
        .collect();
    classes.extend(words.iter().map(|w| cyclic_reduce(w)));
    classes.retain(|c| !c.is_empty());
    let systems: Vec<SubgroupSystem> = cores
        .iter()
        .map(|c| SubgroupSystem::new(vec![c.clone()]))
        .collect();
    let meet = intersect_components(&cores[0], &cores[1]);
    for c in &classes {
        let mut carried = [false; 2];
        for i in 0..2 {
            let got = carries_class(&systems[i], &circuit(c));
            // short powers and conjugators first; the wide search only runs
            // to confirm a positive the short one missed
            let short = hs[i].carries_power(c, case.rank, (8 / c.len()).max(1), 1);
            if short {
                assert!(got, "{:?} carried by {:?}", c, hs[i].basis);
            } else if got {
                assert!(
                    hs[i].carries_power(c, case.rank, budget, budget.min(4)),
                    "{:?} not carried by {:?}",
                    c,
                    hs[i].basis
                );
            }
            carried[i] = got;
            tally.carried += got as usize;
            tally.checks += 1;
        }
        if carried[0] && carried[1] {
            assert!(
                carries_class(&meet, &circuit(c)),
                "{:?} carried by both but not by the meet",
                c
            );
        }
        if carries_class(&meet, &circuit(c)) {
            assert!(carried[0] && carried[1], "{:?} carried by the meet only", c);
        }
        tally.checks += 1;
    }
    tally.meet_components += meet.components().len();
    for comp in meet.components() {
        let c = from_edges(comp.witness_circuit().expect("noncontractible").edges());
        for h in &hs {
            assert!(
                h.carries_power(&c, case.rank, 1, budget.min(4)),
                "meet class {:?} not in {:?}",
                c,
                h.basis
            );
        }
        tally.checks += 1;
    }
}

/// Every nonempty edge subset of a rose of rank 3 and of a two-vertex graph.
pub fn subgraph_systems_malnormal() -> super::dynamics::Outcome {
    use std::sync::Arc;
    use ttwb::graphs::{EdgeSet, MarkedGraph};
    use ttwb::stallings::{from_subgraph, is_malnormal};

    let graphs = [
        Arc::new(MarkedGraph::rose(&["a", "b", "c"])),
        Arc::new(
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
        ),
    ];
    let mut n = 0;
    for g in &graphs {
        let m = g.edge_count();
        for mask in 1u32..(1 << m) {
            let h: EdgeSet = (0..m).filter(|e| mask >> e & 1 == 1).collect();
            if !is_malnormal(&from_subgraph(g, &h)).malnormal {
                return Err(format!("subgraph {mask:b} not malnormal"));
            }
            n += 1;
        }
    }
    Ok(format!("{n} subgraph systems malnormal"))
}
