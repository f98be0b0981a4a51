use gausslink::experiments::config::{Experiment, ExperimentConfig};
use gausslink::experiments::validate::{run_validation_with, theorem_sweep};
use gausslink::network::swap;
use gausslink::BalancedForm;

/// Swap with the sign of the optical-mode sum flipped.
fn corrupted_swap(m1: &BalancedForm, m2: &BalancedForm) -> BalancedForm {
    let s = m1.a() - m2.a();
    BalancedForm::new(m1.b() - m1.c() * m1.c() / s, m2.b() - m2.c() * m2.c() / s, -m1.c() * m2.c() / s)
}

#[test]
fn theorem_sweep_catches_corrupted_swap() {
    assert!(theorem_sweep(1, 5000, 1, swap).unwrap().passed);
    let bad = theorem_sweep(1, 5000, 1, corrupted_swap).unwrap();
    assert!(!bad.passed);
    assert!(bad.counterexample.is_some());
}

#[test]
fn report_flags_mutation_and_keeps_seed() {
    let cfg = ExperimentConfig { validation_scale: 0.001, seed: 99, ..ExperimentConfig::defaults(Experiment::Validate) };
    let good = run_validation_with(&cfg, swap).unwrap();
    assert!(good.passed, "{good:#?}");
    let bad = run_validation_with(&cfg, corrupted_swap).unwrap();
    assert!(!bad.passed);
    assert_eq!(bad.seed, 99);
    assert!(!bad.checks[0].passed);
    assert!(bad.checks[1..].iter().all(|c| c.passed));
}
