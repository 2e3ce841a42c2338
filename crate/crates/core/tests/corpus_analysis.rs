//! End-to-end analysis of every corpus package against its manifest.

use hlp_core::corpus::{
    build_blowup_p2, build_product_family, build_projective_space, build_sl2sl2_package,
    build_threefold_model, corrupted_variants, Manifest, PieceSpec,
};
use hlp_core::perverse::{Analysis, PerversePackage};
use hlp_core::Rational;

fn check_against_manifest(package: PerversePackage<Rational>, manifest: &Manifest) {
    let name = package.name.clone();
    let validation = package.validate();
    assert!(validation.passed(), "{name} validation:\n{validation}");

    let analysis = Analysis::new(package).unwrap_or_else(|e| panic!("{name}: {e}"));

    let filtration = analysis.filtration_report();
    assert!(filtration.passed(), "{name} filtration:\n{filtration}");
    let observed: std::collections::BTreeMap<(usize, i64), usize> =
        analysis.perverse.graded_dims();
    assert_eq!(observed, manifest.perverse_table, "{name} perverse table");

    let cup = analysis.filtered_cup_report();
    assert!(cup.passed(), "{name} cup:\n{cup}");

    let hl = analysis.hard_lefschetz_report();
    assert!(hl.passed(), "{name} hard lefschetz:\n{hl}");

    let (decomp, biprims) = analysis.decomposition_report().unwrap();
    assert!(decomp.passed(), "{name} decomposition:\n{decomp}");
    assert_eq!(biprims, manifest.biprimitives, "{name} biprimitives");

    let hrr = analysis.hrr_report().unwrap();
    assert!(hrr.passed(), "{name} hrr:\n{hrr}");

    let (lambda, lambda_report) = analysis.lambda().unwrap();
    assert!(lambda_report.passed(), "{name} lambda:\n{lambda_report}");
    assert_eq!(lambda.dim(), manifest.lambda_dim, "{name} lambda dim");

    if let Some(expected_defect) = manifest.defect {
        let table = analysis
            .package
            .defect_table
            .as_ref()
            .expect("manifest promises a defect table");
        let r = hlp_core::perverse::defect(table, analysis.package.half_dim()).unwrap();
        assert_eq!(r, expected_defect, "{name} defect");
    }

    for expectation in &manifest.fibers {
        let fiber = analysis
            .package
            .fibers
            .iter()
            .find(|f| f.label == expectation.label)
            .expect("fiber present")
            .clone();
        for b in fiber.levels().collect::<Vec<_>>() {
            let rif = analysis.refined_intersection(&fiber, b).unwrap();
            assert!(rif.passed(), "{name} rif b={b}:\n{rif}");
            let grauert = analysis.grauert(&fiber, b).unwrap();
            assert!(grauert.passed(), "{name} grauert b={b}:\n{grauert}");
            let splitting = analysis.splitting(&fiber, b).unwrap();
            assert!(splitting.passed(), "{name} splitting b={b}:\n{splitting}");
            if let Some(&rank) = expectation.splitting_ranks.get(&b) {
                let detail = splitting
                    .items
                    .iter()
                    .find(|i| i.label == "skyscraper rank")
                    .and_then(|i| i.detail.clone())
                    .expect("rank recorded");
                assert_eq!(detail, rank.to_string(), "{name} skyscraper rank at b={b}");
            }
        }
        if expectation.semismall_signature {
            let signature = analysis.semismall_signature(&fiber).unwrap();
            assert!(signature.passed(), "{name} signature:\n{signature}");
        }
    }
}

#[test]
fn point_package() {
    let (pkg, manifest) = build_projective_space::<Rational>(0);
    check_against_manifest(pkg, &manifest);
}

#[test]
fn projective_line_plane_and_space() {
    for a in 1..=3usize {
        let (pkg, manifest) = build_projective_space::<Rational>(a);
        check_against_manifest(pkg, &manifest);
    }
}

#[test]
fn product_families() {
    for (a, b) in [(1usize, 1usize), (1, 2), (2, 1), (2, 2)] {
        let (pkg, manifest) = build_product_family::<Rational>(a, b);
        check_against_manifest(pkg, &manifest);
    }
}

#[test]
fn blowup_of_the_plane() {
    let (pkg, manifest) = build_blowup_p2::<Rational>();
    check_against_manifest(pkg, &manifest);
}

#[test]
fn threefold_models() {
    for r in 1..=3usize {
        for c in 0..=1usize {
            let (pkg, manifest) = build_threefold_model::<Rational>(r, c).unwrap();
            check_against_manifest(pkg, &manifest);
        }
    }
}

#[test]
fn sl2sl2_packages() {
    let tables: Vec<Vec<PieceSpec>> = vec![
        vec![PieceSpec { a: 1, b: 1, mult: 1 }],
        vec![PieceSpec { a: 0, b: 0, mult: 3 }],
        vec![
            PieceSpec { a: 2, b: 0, mult: 1 },
            PieceSpec { a: 0, b: 2, mult: 2 },
            PieceSpec { a: 1, b: 1, mult: 1 },
        ],
        vec![
            PieceSpec { a: 3, b: 0, mult: 1 },
            PieceSpec { a: 1, b: 2, mult: 1 },
        ],
    ];
    for table in tables {
        let (pkg, manifest) = build_sl2sl2_package::<Rational>(&table).unwrap();
        check_against_manifest(pkg, &manifest);
    }
}

#[test]
fn product_family_1x1_spot_values() {
    // graded dimensions of H^2 are (1, 0, 1) at perversities (-1, 0, 1),
    // H^0 sits at perversity -1 and H^4 at +1
    let (pkg, _) = build_product_family::<Rational>(1, 1);
    let analysis = Analysis::new(pkg).unwrap();
    let dims = analysis.perverse.graded_dims();
    assert_eq!(dims.get(&(2, -1)), Some(&1));
    assert_eq!(dims.get(&(2, 0)), None);
    assert_eq!(dims.get(&(2, 1)), Some(&1));
    assert_eq!(dims.get(&(0, -1)), Some(&1));
    assert_eq!(dims.get(&(4, 1)), Some(&1));
}

#[test]
fn blowup_spot_values() {
    let (pkg, _) = build_blowup_p2::<Rational>();
    let analysis = Analysis::new(pkg).unwrap();

    // refined intersection form I_0 = [-1]
    let fiber = analysis.package.fibers[0].clone();
    let cl = &fiber.class_maps[&0];
    let res = &fiber.restriction_maps[&0];
    let i0 = res * cl;
    assert_eq!(i0, hlp_core::Matrix::from_int_rows(&[&[-1]]));

    // Lambda = span{E}: second basis vector of the flattened H^2 block
    let (lambda, _) = analysis.lambda().unwrap();
    assert_eq!(lambda.dim(), 1);
    let e_column = hlp_core::Matrix::from_int_rows(&[&[0], &[0], &[1], &[0]]);
    assert!(lambda.contains_vector(&e_column.column_vec(0)));

    // S^{eta L}_00 restricted to [E] is [+1]
    let form = analysis.s_eta_l_form(0, 0).unwrap();
    let piece = analysis.sys.piece(0, 0);
    let projected = &piece.projection * &e_column;
    let value = &(&projected.transpose() * &form) * &projected;
    assert_eq!(value, hlp_core::Matrix::identity(1));
}

#[test]
fn threefold_display_isomorphism() {
    for r in 1..=3usize {
        let (pkg, _) = build_threefold_model::<Rational>(r, 1).unwrap();
        let eta = pkg.eta.total();
        let fiber = pkg.fibers[0].clone();
        let analysis = Analysis::new(pkg).unwrap();
        // the composite H_4(D) -> H^2 -> (eta) -> H^4 -> H^4(D) must be
        // invertible: the relative hard Lefschetz display
        let space = &analysis.package.space;
        let cl = &fiber.class_maps[&-1];
        let res = &fiber.restriction_maps[&1];
        let block =
            &(&space.projection::<Rational>(4) * &eta) * &space.inclusion::<Rational>(2);
        let composite = &(res * &block) * cl;
        assert_eq!(composite.rows(), r);
        assert_eq!(composite.rank(), r, "display composite must be invertible");
    }
}

#[test]
fn corrupted_variants_fail_exactly_their_target() {
    for variant in corrupted_variants::<Rational>() {
        let name = variant.name.clone();
        let valid = variant.package.validate();
        if variant.target_check == "validate" {
            assert!(!valid.passed(), "{name}: validation must fail");
            continue;
        }
        assert!(valid.passed(), "{name}: validation must pass:\n{valid}");
        let analysis = Analysis::new(variant.package).unwrap();
        let filtration_ok = analysis.filtration_report().passed();
        let cup_ok = analysis.filtered_cup_report().passed();
        let hl_ok = analysis.hard_lefschetz_report().passed();
        let decomp_ok = analysis.decomposition_report().unwrap().0.passed();
        let hrr_ok = analysis.hrr_report().unwrap().passed();
        let lambda_ok = analysis.lambda().unwrap().1.passed();
        let mut rif_ok = true;
        let mut grauert_ok = true;
        let mut signature_ok = true;
        let mut splitting_ok = true;
        for fiber in analysis.package.fibers.clone() {
            for b in fiber.levels().collect::<Vec<_>>() {
                rif_ok &= analysis.refined_intersection(&fiber, b).unwrap().passed();
                grauert_ok &= analysis.grauert(&fiber, b).unwrap().passed();
                splitting_ok &= analysis.splitting(&fiber, b).unwrap().passed();
            }
            if fiber.codim_h.is_some() {
                signature_ok &= analysis.semismall_signature(&fiber).unwrap().passed();
            }
        }
        let outcomes = [
            ("filtration", filtration_ok),
            ("cup", cup_ok),
            ("hl", hl_ok),
            ("decomp", decomp_ok),
            ("hrr", hrr_ok),
            ("lambda", lambda_ok),
            ("rif", rif_ok),
            ("grauert", grauert_ok),
            ("signature", signature_ok),
            ("splitting", splitting_ok),
        ];
        for (check, ok) in outcomes {
            if check == variant.target_check {
                assert!(!ok, "{name}: {check} must fail");
            } else {
                assert!(ok, "{name}: {check} must stay clean");
            }
        }
    }
}
