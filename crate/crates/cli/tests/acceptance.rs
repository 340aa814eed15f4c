//! The acceptance suite: every criterion with its seed, instance count and
//! time budget. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any fails.

use slimc_testkit::laws::Outcome;
use slimc_testkit::suites::*;
use std::time::{Duration, Instant};

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn(&mut Sizes) -> Outcome,
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "hierarchy classifier", budget: secs(1), run: |_| hierarchy_examples() },
    Criterion { id: 2, name: "simulation depth walkthrough", budget: secs(1), run: |_| ndd_walkthrough() },
    Criterion { id: 3, name: "root-level validity on 20 structures", budget: secs(300), run: |s| root_level_validity(3, 20, s) },
    Criterion { id: 4, name: "quantifier-free pipeline vs CTL* oracle", budget: secs(600), run: |s| quantifier_free(4, 100, s) },
    Criterion { id: 5, name: "automata construction laws", budget: secs(900), run: |_| automata_laws(5) },
    Criterion { id: 6, name: "parity solver cross-check", budget: secs(120), run: |_| parity_cross_check(6, 200) },
    Criterion { id: 7, name: "SL pipeline vs bounded oracle", budget: secs(1200), run: |s| sl_end_to_end(7, 50, s) },
    Criterion { id: 8, name: "QCTL to SL round trip", budget: secs(1200), run: |s| round_trip(8, 30, s) },
    Criterion { id: 9, name: "applications", budget: secs(300), run: |_| applications() },
];

fn report(id: u32, name: &str, o: &Outcome, elapsed: Duration, budget: Option<Duration>) -> bool {
    let in_time = budget.map_or(true, |b| elapsed <= b);
    let pass = o.ok() && in_time;
    println!(
        "criterion {id:>2}: {} {name} ({} checks, {:.2?})",
        if pass { "PASS" } else { "FAIL" },
        o.checked,
        elapsed
    );
    for n in &o.notes {
        println!("              {n}");
    }
    for f in o.failures.iter().take(10) {
        println!("              failure: {f}");
    }
    if !in_time {
        println!("              over budget of {:?}", budget.unwrap());
    }
    pass
}

fn main() {
    let mut sizes = Sizes::default();
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let t = Instant::now();
        let o = (c.run)(&mut sizes);
        if !report(c.id, c.name, &o, t.elapsed(), Some(c.budget)) {
            failed.push(c.id);
        }
    }
    let t = Instant::now();
    let (o, constants) = size_bounds(&sizes);
    if !report(10, "tower bounds with measured constants", &o, t.elapsed(), None) {
        failed.push(10);
    }
    println!("              constants: m1 = {}, m2 = {}", constants.m1, constants.m2);
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
