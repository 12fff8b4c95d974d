//! The specification corpus: every file parses, typechecks and survives a
//! print/parse round trip, and the robustness example matches its goldens.
//! Set `UPDATE_GOLDEN=1` to rewrite the golden files.

use std::path::{Path, PathBuf};

use ldl_core::ast::LdlType;
use ldl_core::parser::parse;
use ldl_core::pretty::{ast_dump, pretty_spec};
use ldl_core::typeck::check_spec;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ldl"))
        .collect();
    files.sort();
    files
}

fn golden(name: &str, actual: &str) {
    let path = corpus_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden {name} differs");
}

#[test]
fn corpus_has_twenty_specs() {
    assert!(corpus_files().len() >= 20);
}

#[test]
fn every_spec_parses_and_typechecks() {
    for path in corpus_files() {
        let src = std::fs::read_to_string(&path).unwrap();
        let spec = parse(&src).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let ty = check_spec(&spec).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let (_, result) = ty.uncurry();
        assert_eq!(result, &LdlType::Bool, "{}", path.display());
    }
}

#[test]
fn every_spec_round_trips_through_the_printer() {
    for path in corpus_files() {
        let spec = parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let printed = pretty_spec(&spec);
        let again = parse(&printed).unwrap_or_else(|e| panic!("{}: {e}\n{printed}", path.display()));
        assert!(again.root_expr().alpha_eq(&spec.root_expr()), "{}", path.display());
        assert_eq!(pretty_spec(&again), printed, "{}", path.display());
    }
}

#[test]
fn robustness_goldens() {
    let spec = parse(&std::fs::read_to_string(corpus_dir().join("robustness.ldl")).unwrap()).unwrap();
    let ty = check_spec(&spec).unwrap();
    assert_eq!(ty.to_string(), "Real -> Real -> Vec 784 -> Bool");
    golden("robustness.ast", &ast_dump(&spec.root_expr()));
    golden("robustness.pretty", &pretty_spec(&spec));
}
