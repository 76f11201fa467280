use partlab::arith::{ratio_to_f64, Rational};
use partlab::cfp::{self, CfpModel, MoveKind, Perturbation, RateMode, SimOptions};
use partlab::measure::PartitionState;
use partlab::{Preset, WeightSpec, WorkLimits};

fn perms(n: usize) -> CfpModel {
    CfpModel::new(WeightSpec::assembly(Preset::Permutations).unwrap(), n, RateMode::MeanField).unwrap()
}

#[test]
fn occupation_matches_mu_within_three_standard_errors() {
    let limits = WorkLimits::default();
    let model = perms(6);
    let mu = cfp::support(&model.spec, 6, &limits).unwrap();
    let report = cfp::simulate(&model, &SimOptions::new(20_000.0, 42), &limits).unwrap();
    let occ = report.occupation.as_ref().unwrap();
    assert_eq!(occ.len(), 11);
    for (o, (s, m)) in occ.iter().zip(&mu) {
        assert_eq!(&o.state, s);
        let z = (o.fraction - ratio_to_f64(m)).abs() / o.std_error;
        assert!(z <= 3.0, "{s}: z = {z}");
    }
}

#[test]
fn occupation_csv_is_reproducible() {
    let limits = WorkLimits::default();
    let model = perms(5);
    let csv = |seed| {
        let r = cfp::simulate(&model, &SimOptions::new(500.0, seed), &limits).unwrap();
        let mut out = Vec::new();
        r.write_occupation_csv(&mut out).unwrap();
        out
    };
    assert_eq!(csv(3), csv(3));
    assert_ne!(csv(3), csv(4));
}

#[test]
fn tv_to_mu_shrinks_with_horizon() {
    let limits = WorkLimits::default();
    let model = perms(5);
    let mu = cfp::support(&model.spec, 5, &limits).unwrap();
    let tv: Vec<f64> = [10.0, 100.0, 1_000.0, 10_000.0]
        .iter()
        .map(|&t| {
            let r = cfp::simulate(&model, &SimOptions::new(t, 11), &limits).unwrap();
            cfp::occupation_tv(&r, &mu).unwrap()
        })
        .collect();
    assert!(tv.windows(2).all(|w| w[1] < w[0]), "{tv:?}");
}

#[test]
fn stationary_law_equals_mu_across_families() {
    let limits = WorkLimits::default();
    let half = Rational::new(1.into(), 2.into());
    let cases = [
        (WeightSpec::assembly(Preset::Permutations).unwrap(), RateMode::MeanField),
        (WeightSpec::assembly(Preset::SetPartitions).unwrap(), RateMode::RatioGauge),
        (WeightSpec::multiset(Preset::IntegerPartitions, half.clone()).unwrap(), RateMode::RatioGauge),
        (WeightSpec::selection(Preset::DistinctParts, half).unwrap(), RateMode::RatioGauge),
    ];
    for (spec, mode) in cases {
        for n in [1, 5, 10] {
            let r = cfp::stationary_exact(&CfpModel::new(spec.clone(), n, mode).unwrap(), &limits).unwrap();
            assert!(r.residual_zero && r.matches_mu(), "{spec:?} n={n}");
        }
    }
}

#[test]
fn perturbation_is_localised() {
    let limits = WorkLimits::default();
    let from = PartitionState::new(7, vec![3, 2]).unwrap();
    let model = perms(7).with_perturbation(Perturbation {
        from: from.clone(),
        kind: MoveKind::Frag(1, 1),
        factor: Rational::new(1.into(), 2.into()),
    });
    let report = cfp::check_detailed_balance(&model, &limits).unwrap();
    assert_eq!(report.violations.len(), 1);
    assert!(report.violations[0].from == from || report.violations[0].to == from);
}
