mod props;

fn check(result: Result<u32, String>) {
    match result {
        Ok(cases) => assert!(cases >= 200),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn encrypt_then_decrypt_is_identity() {
    check(props::roundtrip());
}

#[test]
fn checking_relations_hold_on_genuine_ciphertext() {
    check(props::relations_hold());
}

#[test]
fn left_and_right_transitions_agree() {
    check(props::transition_identities());
}

#[test]
fn coding_matrix_matches_power_oracle() {
    check(props::power_oracle());
}

#[test]
fn range_contains_true_value_under_single_error() {
    check(props::range_contains_truth());
}

#[test]
fn spiral_is_exhaustive() {
    check(props::spiral_exhaustive());
}

#[test]
fn clean_ciphertext_is_not_flagged() {
    check(props::clean_not_flagged());
}
