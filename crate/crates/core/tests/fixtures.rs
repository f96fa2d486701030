use std::path::PathBuf;

use reeb_edit::distance::{edit_distance, DistanceOptions};
use reeb_edit::homotopy::{trace, EventKind};
use reeb_edit::pseudodist::improved_edit_lower;
use reeb_edit::{CircleFunction, LabelledReebGraph, Tolerances};
use serde::de::DeserializeOwned;

fn load<T: DeserializeOwned>(name: &str) -> Result<T, serde_json::Error> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text)
}

fn graph(name: &str) -> LabelledReebGraph {
    load(name).unwrap()
}

fn function(name: &str) -> CircleFunction {
    load(name).unwrap()
}

#[test]
fn pse1_distance() {
    let est = edit_distance(&graph("pse1.json"), &graph("pse_target.json"), &DistanceOptions::default()).unwrap();
    assert!((est.lower - 0.2).abs() < 1e-9 && (est.upper - 0.2).abs() < 1e-9, "{est:?}");
}

#[test]
fn pse2_distance() {
    let est = edit_distance(&graph("pse2.json"), &graph("pse_target.json"), &DistanceOptions::default()).unwrap();
    assert!((est.upper - 0.2).abs() < 1e-9, "{est:?}");
    assert!(est.lower <= est.upper + 1e-12);
}

#[test]
fn trig_fits_realize_the_graphs() {
    let tol = Tolerances::default();
    for (f, g) in [
        ("pse1_trig.json", "pse1.json"),
        ("pse2_trig.json", "pse2.json"),
        ("pse_target_trig.json", "pse_target.json"),
        ("sin.json", "pse_target.json"),
    ] {
        let extracted = LabelledReebGraph::extract(&function(f), &tol).unwrap();
        let shifted = if f == "sin.json" {
            // sin ranges over [−1, 1]; compare shape only
            LabelledReebGraph::from_labels(&extracted.labels().iter().map(|x| (x + 1.0) / 2.0).collect::<Vec<_>>())
                .unwrap()
        } else {
            extracted
        };
        assert!(shifted.is_isomorphic(&graph(g), 1e-8), "{f}: {:?}", shifted.labels());
    }
}

#[test]
fn pse1_fit_traces_to_target_with_one_death() {
    let r = trace(&function("pse1_trig.json"), &function("pse_target_trig.json")).unwrap();
    let folds: Vec<_> = r.events.iter().filter(|e| e.kind == EventKind::BirthDeath).collect();
    assert_eq!(folds.iter().map(|e| e.vertex_delta).sum::<i64>(), -2);
    assert!(r.script_cost <= r.c2_bound + 1e-6);
    let lower = improved_edit_lower(&function("pse1_trig.json"), &function("pse_target_trig.json"), &Tolerances::default());
    assert!(lower <= r.script_cost + 1e-6);
}

#[test]
fn noise_family_norms() {
    let tol = Tolerances::default();
    for n in 1..=3 {
        let f = function(&format!("noise_f{n}.json"));
        let nf = n as f64;
        assert!((f.cr_norm(0, &tol).unwrap() - 1.0 / (nf * nf)).abs() < 1e-6);
        assert!((f.cr_norm(2, &tol).unwrap() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn bad_extremality_is_rejected_with_the_vertex() {
    let err = load::<LabelledReebGraph>("bad_extremality.json").unwrap_err();
    assert!(err.to_string().contains("local extremality violated at id=3"), "{err}");
}
