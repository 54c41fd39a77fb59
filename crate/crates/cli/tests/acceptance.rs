//! Acceptance criterion 10: the full CLI suite run twice with the same seed
//! produces byte-identical reports.

use std::process::Command;

fn plectic(args: &[&str]) -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_plectic"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code())
}

/// The full battery exercised for determinism, covering every subcommand.
fn suite(seed: &str) -> Vec<(Vec<u8>, Option<i32>)> {
    let ring = r#"{"ring":{"p":2,"delta":["a","b"],"neg_bound":6,"window":24,"prec":3},"element":[[[1,0],[1]],[[-1,-1],[3]]],"word":[{"op":"gamma","units":[[3],[5]]},{"op":"phi","steps":[1,0]}]}"#;
    let ring_plec = r#"{"ring":{"p":2,"delta":["a","b"],"neg_bound":6,"window":24,"prec":3},"element":[[[1,0],[1]],[[0,2],[5]]],"word":[{"op":"plectic","phi":[1,0],"units":[[3],[1]],"perm":[1,0]},{"op":"frob","power":2}]}"#;
    let member = r#"{"ring":{"p":2,"delta":["a","b"],"neg_bound":2,"window":10,"prec":4},"element":[[[0,0],[4]]],"n":2,"k":1}"#;
    let module = r#"{"p":2,"nvars":1,"rank":2,"phi_global":[1,[[[],[[[0],[1]]]],[[[[1],[1]]],[]]]]}"#;
    let fixed = r#"{"p":2,"nvars":2,"rank":1,"phi_mats":{"0":[[[[[0,0],[1]]]]],"1":[[[[[0,0],[1]]]]]},"phi_global":[1,[[[[[0,0],[1]]]]]],"box_lo":-3,"box_hi":3}"#;
    let sd_word = r#"{"nvars":2,"sigma":[1,0],"quotient":[2,[1,1]],"word":[{"m":[2,0]},{"n":3}]}"#;
    let hahn = r#"{"q":2,"delta":2,"terms":[[[1,1],[1,0]],[[2,0],[1,2]]],"weights":[1,1],"gamma":[3,1]}"#;
    let family = r#"{"Sequence":[{"base":0.0,"lin":0.0,"geo":1.0,"sign":-1},{"base":0.0,"lin":0.0,"geo":1.0,"sign":1}]}"#;
    vec![
        plectic(&["lt-build", "--p", "2", "--poly", "cyclotomic", "--cap", "6", "--prec", "4", "--scalar", "7", "--inverse"]),
        plectic(&["lt-build", "--p", "3", "--cap", "6", "--prec", "3"]),
        plectic(&["lt-check", "--p", "2", "--cap", "5", "--prec", "3", "--samples", "3", "--seed", seed]),
        plectic(&["lt-check", "--p", "3", "--f-res", "2", "--cap", "4", "--prec", "2", "--samples", "2", "--seed", seed]),
        plectic(&["ring-act", "--input", ring]),
        plectic(&["ring-act", "--input", ring_plec]),
        plectic(&["ring-member", "--input", member]),
        plectic(&["mod-validate", "--input", module]),
        plectic(&["mod-sd", "--input", module]),
        plectic(&["mod-fixed", "--input", fixed]),
        plectic(&["monoid-cosets", "--f", "3", "--delta", "2"]),
        plectic(&["monoid-relations", "--f", "2", "--t1", "0,1", "--t2", "1,0"]),
        plectic(&["coind-check", "--q", "2", "--q-prime", "8", "--r", "2", "--delta", "2"]),
        plectic(&["sd-normal-form", "--input", sd_word]),
        plectic(&["hahn-norm", "--input", hahn]),
        plectic(&["hahn-classify", "--input", family]),
    ]
}

#[test]
fn acceptance_10_cli_determinism() {
    let first = suite("4242");
    let second = suite("4242");
    assert_eq!(first.len(), second.len());
    for (i, (a, b)) in first.iter().zip(&second).enumerate() {
        assert_eq!(a.1, b.1, "exit codes differ at step {i}");
        assert_eq!(a.0, b.0, "reports differ at step {i}");
        assert!(!a.0.is_empty(), "step {i} produced no report");
        assert_eq!(a.1, Some(0), "step {i} failed");
    }
    println!("ACCEPTANCE 10: PASS - {} CLI reports byte-identical across two seeded runs", first.len());
}

#[test]
fn malformed_input_exits_2() {
    let (_, code) = plectic(&["ring-member", "--input", r#"{"ring":{"p":2}"#]);
    assert_eq!(code, Some(2));
    let (_, code) = plectic(&["hahn-classify", "--input", r#"{"Sequence":"zzz"}"#]);
    assert_eq!(code, Some(2));
}

#[test]
fn failed_check_exits_1() {
    // a module with matrix X + X^2 (unit) is etale, but matrix 0 is not:
    // rank-1 zero matrix must fail validation with exit 1
    let module = r#"{"p":2,"nvars":1,"rank":1,"phi_global":[1,[[[]]]]}"#;
    let (_, code) = plectic(&["mod-validate", "--input", module]);
    assert_eq!(code, Some(1));
}
