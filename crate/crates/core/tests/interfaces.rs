//! The serialized shapes are part of the external contract: field names,
//! coordinate endianness, and canonical term order are pinned here.

use plectic_core::lubin_tate::{lt_add_law, LubinTatePoly};
use plectic_core::multivar::{MultivarJson, RingSpecDelta};
use plectic_core::padic::{PadicElementJson, PadicRingSpec};
use plectic_core::series::SeriesJson;

#[test]
fn padic_element_shape() {
    let spec = PadicRingSpec::eisenstein(2, 2, vec![vec![2, 0], vec![0, 2]], 4).unwrap();
    let x = spec.from_coords(&[3, 1, 2, 0], 4).unwrap();
    let v = serde_json::to_value(PadicElementJson::encode(&x)).unwrap();
    assert_eq!(v["p"], 2);
    assert_eq!(v["f_res"], 2);
    assert!(v["eis"].is_array());
    assert_eq!(v["prec"], 4);
    // coords little-endian in the power basis u^i pi^j
    assert_eq!(v["coords"], serde_json::json!([3, 1, 2, 0]));
    // null eis for unramified specs
    let qp = PadicRingSpec::qp(5, 3).unwrap();
    let y = qp.from_u64(7, 3);
    let v = serde_json::to_value(PadicElementJson::encode(&y)).unwrap();
    assert!(v["eis"].is_null());
    // decode round-trips
    let json: PadicElementJson = serde_json::from_value(v).unwrap();
    assert_eq!(json.decode().unwrap(), y);
}

#[test]
fn series_terms_sorted_total_degree_then_lex() {
    let spec = PadicRingSpec::qp(2, 20).unwrap();
    let f = LubinTatePoly::standard(&spec, 20).unwrap();
    let law = lt_add_law(&f, 4, 4).unwrap();
    let v = serde_json::to_value(SeriesJson::encode(&law)).unwrap();
    assert_eq!(v["vars"], 2);
    assert_eq!(v["cap"], 4);
    assert_eq!(v["prec"], 4);
    let terms = v["terms"].as_array().unwrap();
    let mut last: Option<(u64, Vec<u64>)> = None;
    for t in terms {
        let exp: Vec<u64> = t[0].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
        let total: u64 = exp.iter().sum();
        if let Some((lt, le)) = &last {
            assert!((*lt, le.clone()) < (total, exp.clone()), "order violated");
        }
        last = Some((total, exp));
    }
}

#[test]
fn multivar_shape_and_lex_order() {
    let base = PadicRingSpec::qp(2, 20).unwrap();
    let f = LubinTatePoly::standard(&base, 20).unwrap();
    let spec =
        RingSpecDelta::uniform(&base, vec!["a".into(), "b".into()], f, 2, 12, 3).unwrap();
    let x = spec
        .from_terms(vec![
            (vec![1, -1], base.from_u64(3, 3)),
            (vec![-1, 2], base.from_u64(5, 3)),
            (vec![0, 0], base.from_u64(6, 3)),
        ])
        .unwrap();
    let v = serde_json::to_value(MultivarJson::encode(&x)).unwrap();
    assert_eq!(v["delta"], serde_json::json!(["a", "b"]));
    assert_eq!(v["neg_bound"], 2);
    assert_eq!(v["window"], 12);
    assert_eq!(v["prec"], 3);
    let terms = v["terms"].as_array().unwrap();
    let exps: Vec<Vec<i64>> = terms
        .iter()
        .map(|t| t[0].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect())
        .collect();
    let mut sorted = exps.clone();
    sorted.sort();
    assert_eq!(exps, sorted, "terms must be in lexicographic exponent order");
    // decode round-trips through the same spec
    let json: MultivarJson = serde_json::from_value(v).unwrap();
    assert_eq!(json.decode(&spec).unwrap(), x);
}
