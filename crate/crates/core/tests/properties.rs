//! Property tests against independent brute-force oracles, plus scale and
//! location equivariance of the whole test procedure.

mod common;

use common::checks::*;
use sens_core::phase1::Procedure;

#[test]
fn mle_matches_grid_oracle() {
    run(64, probit_trials(8..=24), mle_vs_grid).unwrap();
}

#[test]
fn kstar_matches_grid_oracle() {
    run(64, kstar_case(), kstar_vs_grid).unwrap();
}

#[test]
fn pav_matches_min_max_formula() {
    run(256, trials_strategy(1..=8), pav_vs_brute).unwrap();
}

#[test]
fn info_matrix_is_expected_hessian() {
    run(256, info_case(), info_vs_hessian).unwrap();
}

#[test]
fn lr_limits_match_polar_scan() {
    run(12, lr_case(), lr_limits_vs_scan).unwrap();
}

#[test]
fn three_pod_equivariant() {
    run(200, ys_strategy(), |ys| equivariance(Procedure::ThreePod, &ys)).unwrap();
}

#[test]
fn neyer_equivariant() {
    run(200, ys_strategy(), |ys| equivariance(Procedure::Neyer, &ys)).unwrap();
}

#[test]
fn bruceton_equivariant() {
    run(200, ys_strategy(), |ys| equivariance(Procedure::Bruceton, &ys)).unwrap();
}

#[test]
fn langlie_equivariant() {
    run(200, ys_strategy(), |ys| equivariance(Procedure::Langlie, &ys)).unwrap();
}
