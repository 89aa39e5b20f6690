use gz_core::bodies::ConvexBody;
use gz_core::inequalities::{gap, EvalConfig, PairMeasures, Verdict};
use gz_core::integrals::{Method, RngSpec};
use gz_core::measures::Potential;
use gz_core::search::{random_pair, SearchClass, SearchSpace};
use proptest::prelude::*;

fn quadrature() -> EvalConfig {
    EvalConfig { method: Method::Radial, ..EvalConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn origin_pairs_hold_at_one_quarter(seed in 0u64..100_000) {
        let p = Potential::gaussian(2).unwrap();
        let space = SearchSpace::harmonic(SearchClass::Origin, 5, 240).unwrap();
        let (k, l) = random_pair(&space, seed, 0).unwrap();
        let pair = PairMeasures::new(&p, &k, &l, &[0.25, 0.5, 0.75], &quadrature()).unwrap();
        prop_assert_ne!(pair.verdict(0.25).0, Verdict::Violated);
    }

    #[test]
    fn nested_discs_gap_matches_closed_form(a in 0.2f64..3.0, b in 0.2f64..3.0, lambda in 0.05f64..0.95, exponent in 0.05f64..0.5) {
        let disc = |r: f64| 1.0 - (-0.5 * r * r).exp();
        let p = Potential::gaussian(2).unwrap();
        let k = ConvexBody::ball(2, a).unwrap();
        let l = ConvexBody::ball(2, b).unwrap();
        let r = gap(&p, &k, &l, lambda, exponent, &EvalConfig::default()).unwrap();
        let m = lambda * a + (1.0 - lambda) * b;
        let oracle = disc(m).powf(exponent) - lambda * disc(a).powf(exponent) - (1.0 - lambda) * disc(b).powf(exponent);
        prop_assert!((r.gap.value - oracle).abs() < 1e-12);
        prop_assert_eq!(r.verdict, Verdict::Holds);
    }
}

#[test]
fn monte_carlo_gap_agrees_with_quadrature() {
    let p = Potential::gaussian(2).unwrap();
    let k = ConvexBody::square(1.0).unwrap();
    let l = ConvexBody::ball(2, 1.5).unwrap();
    let q = gap(&p, &k, &l, 0.5, 0.25, &quadrature()).unwrap();
    let mc = EvalConfig { method: Method::Mc, budget: 400_000, rng: RngSpec::new(11), common_random_numbers: false };
    let m = gap(&p, &k, &l, 0.5, 0.25, &mc).unwrap();
    assert!((m.gap.value - q.gap.value).abs() < 5.0 * m.gap.stderr, "{:?} vs {:?}", m.gap, q.gap);
    let crn = EvalConfig { common_random_numbers: true, ..mc };
    let c = gap(&p, &k, &l, 0.5, 0.25, &crn).unwrap();
    assert!((c.gap.value - q.gap.value).abs() < 5.0 * c.gap.stderr);
}
