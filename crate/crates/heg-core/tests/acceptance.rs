//! Acceptance gate: one test per verification criterion, each printing a
//! single status line. Run with `--nocapture` to see the lines for passing
//! criteria too.

use heg_core::verify::{run_criterion, CriterionStatus, VerifyConfig};

fn run(id: u8) {
    let outcome = run_criterion(id, &VerifyConfig::default());
    println!("{}", outcome.line());
    assert_eq!(
        outcome.status,
        CriterionStatus::Pass,
        "criterion {id} did not pass: {}",
        outcome.detail
    );
}

#[test]
fn criterion_01_worked_example() {
    run(1);
}

#[test]
fn criterion_02_random_instances_are_monotone_submodular() {
    run(2);
}

#[test]
fn criterion_03_potential_maximal_partitions_are_triply_stable() {
    run(3);
}

#[test]
fn criterion_04_decreasing_pair_admits_no_stable_partition() {
    run(4);
}

#[test]
fn criterion_05_dynamics_stay_within_the_move_bound() {
    run(5);
}

#[test]
fn criterion_06_swap_construction_reaches_contractual_stability() {
    run(6);
}

#[test]
fn criterion_07_greedy_utility_ratio() {
    run(7);
}

#[test]
fn criterion_08_greedy_partition_withstands_approximate_blocking() {
    run(8);
}

#[test]
fn criterion_09_covering_reduction_equivalences() {
    run(9);
}

#[test]
fn criterion_10_graph_incidence_correspondence() {
    run(10);
}

#[test]
fn criterion_11_stability_concept_containments() {
    run(11);
}
