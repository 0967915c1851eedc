mod common;

use bumpmoment::catalog::lookup;
use bumpmoment::certify::{certify, CheckVerdict, DEFAULT_TOL};
use bumpmoment::decompose::decompose;
use bumpmoment::formats;
use bumpmoment::measures::{Moments, DEFAULT_AUDIT_TOL};
use bumpmoment::sampling::{support_points, SamplingSpec, SupportLabel};
use bumpmoment::sosearch::{
    expand_blocks, find_certificate, verify_certificate, SearchOptions, SearchOutcome,
};
use common::{planted_blocks, setup, SCENARIOS};
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn measure_file_to_certificate_and_back() {
    let mut rng = StdRng::seed_from_u64(11);
    for name in SCENARIOS {
        let su = setup(name);
        let mu = su.random_measure(&mut rng);
        let mu = formats::measure_from_json(&formats::measure_to_json(&mu)).unwrap();
        let s = formats::sequence_from_json(&formats::sequence_to_json(&mu.moments(6).unwrap()))
            .unwrap();
        assert_eq!(s, mu.moments(6).unwrap());
        let report = certify(&s, &su.scenario, DEFAULT_TOL).unwrap();
        assert!(report.passed(), "{name}\n{report}");

        let d = decompose(&mu, &su.scenario, 6, DEFAULT_AUDIT_TOL).unwrap();
        assert!(d.report.passed(), "{name}\n{}", d.report);
        assert!(d.reconstruction_error <= 1e-12 * (1.0 + s.max_abs()));
        // σ carries the curve part: certified against the flipped bumps too
        let sigma = d.sigma.moments(6).unwrap();
        let flipped = certify(&sigma, &su.scenario.flip_bumps(), DEFAULT_TOL).unwrap();
        assert!(flipped.passed(), "{name}\n{flipped}");
    }
}

#[test]
fn violation_detected_from_file_scenario() {
    let entry = lookup("fig1").unwrap();
    let scenario =
        formats::scenario_from_json(&formats::scenario_to_json(&entry.scenario)).unwrap();
    let mu = formats::measure_from_json(r#"{"atoms":[{"point":[1.5,1.5],"weight":2}]}"#).unwrap();
    let report = certify(&mu.moments(4).unwrap(), &scenario, DEFAULT_TOL).unwrap();
    assert_eq!(report.overall, CheckVerdict::Fail);
    assert_eq!(report.exit_code(), 1);
    assert!(report.to_string().contains("asserted by user"));
}

#[test]
fn planted_certificate_survives_file_round_trip() {
    let mut rng = StdRng::seed_from_u64(12);
    let su = setup("fig2");
    let blocks = planted_blocks(&mut rng, &su.scenario, 4);
    let p = expand_blocks(2, blocks.iter().map(|(b, g)| (b, g))).unwrap();
    let p = formats::polynomial_from_json(&formats::polynomial_to_json(&p), 2).unwrap();
    let opts = SearchOptions {
        seed: Some(3),
        ..SearchOptions::new(4)
    };
    let SearchOutcome::Found(c) = find_certificate(&p, &su.scenario, &opts).unwrap() else {
        panic!("planted member not recovered");
    };
    let c = formats::certificate_from_json(&formats::certificate_to_json(&c), 2).unwrap();
    assert!(
        verify_certificate(&c, &p, &su.scenario, 1e-6)
            .unwrap()
            .valid
    );
}

#[test]
fn sampled_support_is_where_certified_atoms_live() {
    let scenario = lookup("fig2").unwrap().scenario;
    let spec = SamplingSpec::square(2, -1.2, 1.2, 0.2).unwrap();
    for lp in support_points(&scenario, &spec).unwrap() {
        let mu = bumpmoment::measures::AtomicMeasure::dirac(lp.point.clone());
        let ok = certify(&mu.moments(4).unwrap(), &scenario, DEFAULT_TOL)
            .unwrap()
            .passed();
        assert_eq!(
            ok,
            lp.label != SupportLabel::Outside,
            "{:?} {}",
            lp.point,
            lp.label
        );
    }
}
