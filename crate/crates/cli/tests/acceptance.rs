//! The ten acceptance checks, one line each. Runs without the test harness
//! so the lines always print.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::dynamics::{
    attracting_nesting, cancellation_soundness, pf_eigenvalues, splitting_monotonicity,
    tile_dynamics, Outcome,
};
use support::geometric::{geometric_end_to_end, peripheral_rank};
use support::lemma::double_sharp_suite;
use support::subgroups::{check_case, random_case, subgraph_systems_malnormal, Tally};
use ttwb_cli::input::{parse_input, serialize};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn ttwb(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_ttwb"))
        .args(args)
        .current_dir(fixtures())
        .env_remove("TTWB_BUDGET")
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn timed(limit: Duration, check: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let summary = check()?;
    let el = t.elapsed();
    if el > limit {
        return Err(format!("{summary}; took {el:?}, limit {limit:?}"));
    }
    Ok(format!("{summary} ({} ms)", el.as_millis()))
}

fn stallings() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tally = Tally::default();
    for _ in 0..100 {
        let case = random_case(&mut rng);
        check_case(&case, &mut rng, &mut tally);
    }
    if tally.checks <= 10_000 || tally.carried <= 100 || tally.meet_components <= 10 {
        return Err(format!(
            "too few nontrivial checks: {} / {} / {}",
            tally.checks, tally.carried, tally.meet_components
        ));
    }
    let mal = subgraph_systems_malnormal()?;
    Ok(format!(
        "100 subgroup pairs, {} checks; {mal}",
        tally.checks
    ))
}

fn cli_contract() -> Outcome {
    let corpus: Vec<PathBuf> = std::fs::read_dir(fixtures())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ttw"))
        .collect();
    let mut parsed = 0;
    for p in &corpus {
        let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
        let Ok(input) = parse_input(&text) else {
            if p.ends_with("bad_syntax.ttw") {
                continue;
            }
            return Err(format!("{} does not parse", p.display()));
        };
        let once = serialize(&input);
        let again = parse_input(&once).map_err(|e| format!("{}: reparse: {e}", p.display()))?;
        if serialize(&again) != once {
            return Err(format!("{}: round trip differs", p.display()));
        }
        parsed += 1;
    }
    for args in [
        ["strata", "ex2.ttw"],
        ["check-ct", "ex3.ttw"],
        ["geometric", "ex1_power.ttw"],
    ] {
        if ttwb(&args).0 != ttwb(&args).0 {
            return Err(format!("{args:?} differs between runs"));
        }
    }
    let expect: [(&[&str], i32); 5] = [
        (&["validate", "ex1.ttw"], 0),
        (&["validate", "not_homotopy_equivalence.ttw"], 1),
        (&["geometric", "ex2.ttw", "--period-bound", "3"], 1),
        (&["validate", "bad_syntax.ttw"], 2),
        (&["geometric", "ex2.ttw"], 3),
    ];
    for (args, code) in expect {
        let got = ttwb(args).1;
        if got != code {
            return Err(format!("{args:?} exited {got}, expected {code}"));
        }
    }
    Ok(format!(
        "{parsed} fixtures round trip; 3 commands deterministic; exit codes 0/1/2/3"
    ))
}

fn main() {
    let s = Duration::from_secs;
    let checks: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("PF eigenvalues", Box::new(pf_eigenvalues)),
        (
            "## lemma suite",
            Box::new(move || timed(s(30), || double_sharp_suite(200, 3))),
        ),
        (
            "cancellation soundness",
            Box::new(move || timed(s(60), cancellation_soundness)),
        ),
        (
            "tile dynamics",
            Box::new(move || timed(s(10), tile_dynamics)),
        ),
        ("geometricity end to end", Box::new(geometric_end_to_end)),
        ("peripheral splitting rank", Box::new(peripheral_rank)),
        (
            "Stallings oracle equivalence",
            Box::new(move || timed(s(60), stallings)),
        ),
        ("attracting basis", Box::new(attracting_nesting)),
        (
            "splitting monotonicity",
            Box::new(|| splitting_monotonicity(30, 11)),
        ),
        ("CLI determinism", Box::new(cli_contract)),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in checks.into_iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(summary) => println!("[{}] PASS {name}: {summary}", i + 1),
            Err(why) => {
                println!("[{}] FAIL {name}: {why}", i + 1);
                failed.push(name);
            }
        }
    }
    println!("acceptance: {} of 10 passed", 10 - failed.len());
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
