use slimc_testkit::laws;

fn check(o: laws::Outcome) {
    assert!(o.ok(), "{} of {} checks failed:\n{}", o.failures.len(), o.checked, o.failures.join("\n"));
}

#[test]
fn dualize_complements() {
    check(laws::dualize_law(1, 30));
}

#[test]
fn narrow_matches_widening() {
    check(laws::narrow_law(2, 20));
}

#[test]
fn simulate_preserves_language() {
    check(laws::simulate_law(3, 20));
}

#[test]
fn project_matches_labelling_oracle() {
    check(laws::project_law(4, 20));
}
