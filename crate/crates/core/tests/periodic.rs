use nilsol::nil::{enumerate_characters, is_irrational, shared, FilteredNilmanifoldModel, PolynomialSequence};
use nilsol::periodic::{
    build_periodic_irrational, character_sum, level_one_sums, verify_periodicity_range, vertical_sum,
    vertical_tolerance,
};

#[test]
fn heisenberg_lcs_227() {
    let model = shared(FilteredNilmanifoldModel::heisenberg_lcs());
    let c = build_periodic_irrational(model.clone(), 227, 3, 7).unwrap();
    let g = &c.sequence;
    assert!(verify_periodicity_range(g, 227, 0, 454).unwrap());
    assert!(is_irrational(g, 3).unwrap().irrational);
    for (ch, s) in level_one_sums(g, 227, 3).unwrap() {
        assert_eq!(s.exact_zero, Some(true), "{ch:?}");
        assert!(s.abs < 1e-9);
    }
    let v = vertical_sum(g, 227).unwrap();
    assert!(v <= vertical_tolerance(227), "vertical sum {v}");
    assert_eq!(c.stages.len(), 2);
    assert!(c.stages.iter().all(|s| s.invariant_holds && s.lower_coefficients_kept));
}

#[test]
fn heisenberg_deg3() {
    let model = shared(FilteredNilmanifoldModel::heisenberg_deg3());
    let c = build_periodic_irrational(model.clone(), 227, 3, 11).unwrap();
    assert!(verify_periodicity_range(&c.sequence, 227, -50, 454).unwrap());
    assert!(is_irrational(&c.sequence, 3).unwrap().irrational);
    assert_eq!(enumerate_characters(&model, 3, 3).unwrap().len(), 6);
}

#[test]
fn torus_degree_two() {
    let model = shared(FilteredNilmanifoldModel::builtin("torus:m=2,s=2").unwrap());
    let c = build_periodic_irrational(model.clone(), 101, 2, 1).unwrap();
    assert!(c.periodic && c.irrational);
    let p = &c.sequence;
    assert!(verify_periodicity_range(p, 101, -10, 210).unwrap());
}

#[test]
fn degenerate_low_complexity() {
    let model = shared(FilteredNilmanifoldModel::heisenberg_lcs());
    let c = build_periodic_irrational(model, 11, 1, 2).unwrap();
    assert!(c.irrational);
}

#[test]
fn preconditions() {
    let model = shared(FilteredNilmanifoldModel::heisenberg_lcs());
    assert!(build_periodic_irrational(model.clone(), 211, 3, 7).is_err());
    // composite q with a small prime factor
    assert!(build_periodic_irrational(model.clone(), 230, 3, 7).is_err());
    let p = PolynomialSequence::identity(model);
    let ch = enumerate_characters(p.model(), 1, 1).unwrap().remove(0);
    assert!(character_sum(&p, &ch, 5).unwrap().abs > 0.99);
}
