//! Engine-versus-oracle equivalence: generating-function tables against
//! brute-force enumeration, stopping at the first exact disagreement.

use num_traits::Zero;

use crate::arith::Rational;
use crate::error::Result;
use crate::limits::WorkLimits;
use crate::measure::Measure;
use crate::oracle;
use crate::weights::{Factor, FactorF64, Family, Preset, ScaledWeights, WeightSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub n: usize,
    /// `None` when c̃_n itself disagrees.
    pub prefix: Option<Vec<u64>>,
    pub engine: Rational,
    pub oracle: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub n_max: usize,
    pub fdd_n_max: usize,
    pub l_max: usize,
    pub checks: usize,
    pub first_mismatch: Option<Mismatch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Compares c̃_n for n ≤ n_max and every fdd prefix for n ≤ fdd_n_max, l ≤ l_max.
pub fn verify<W: ScaledWeights + Clone>(
    weights: &W,
    n_max: usize,
    fdd_n_max: usize,
    l_max: usize,
    limits: &WorkLimits,
) -> Result<VerifyReport> {
    limits.check_enumeration(n_max.max(fdd_n_max))?;
    let top = n_max.max(fdd_n_max);
    let measure = Measure::new(weights.clone(), top, l_max.min(top).max(1))?;
    let mut report = VerifyReport { n_max, fdd_n_max, l_max, checks: 0, first_mismatch: None };
    for n in 1..=top {
        if n <= n_max {
            let engine = measure.tables().c_tilde.coeff(n).clone();
            let brute = oracle::brute_c_tilde(weights, n, limits)?;
            report.checks += 1;
            if engine != brute {
                report.first_mismatch = Some(Mismatch { n, prefix: None, engine, oracle: brute });
                return Ok(report);
            }
        }
        if n > fdd_n_max || measure.tables().c_tilde.coeff(n).is_zero() {
            continue;
        }
        for l in 1..=l_max.min(n) {
            let brute = oracle::brute_marginal(weights, n, l, limits)?;
            let prefixes: std::collections::BTreeSet<&Vec<u64>> = brute.entries.keys().collect();
            // Prefixes the oracle omits carry zero mass; the engine must agree.
            let mut all: Vec<Vec<u64>> = prefixes.into_iter().cloned().collect();
            for k in measure.count_law(n, l)?.entries.into_keys() {
                if !brute.entries.contains_key(&k) {
                    all.push(k);
                }
            }
            all.sort();
            for prefix in all {
                let engine = measure.fdd(n, &prefix)?;
                let exact = brute.prob(&prefix).exact().cloned().unwrap_or_else(Rational::zero);
                report.checks += 1;
                if engine != exact {
                    report.first_mismatch = Some(Mismatch { n, prefix: Some(prefix), engine, oracle: exact });
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// Every preset, with representative rational arguments and p.
pub fn preset_corpus() -> Vec<WeightSpec> {
    let half = Rational::new(1.into(), 2.into());
    let mut out: Vec<WeightSpec> = [
        Preset::Permutations,
        Preset::Ewens(Rational::from_integer(2.into())),
        Preset::Ewens(half.clone()),
        Preset::SetPartitions,
        Preset::Graphs,
        Preset::ForestsLabelled,
        Preset::OscillatingDemo,
    ]
    .into_iter()
    .map(|p| WeightSpec::assembly(p).expect("assembly preset"))
    .collect();
    for p in [
        Preset::IntegerPartitions,
        Preset::PlanePartitions,
        Preset::Bose(Rational::from_integer(2.into())),
        Preset::IdealGas(2),
    ] {
        out.push(WeightSpec::multiset(p, half.clone()).expect("multiset preset"));
    }
    out.push(
        WeightSpec::multiset(Preset::MappingPatterns(half.clone()), Rational::new(1.into(), 4.into()))
            .expect("multiset preset"),
    );
    for p in [Preset::DistinctParts, Preset::Fermi(Rational::from_integer(1.into()))] {
        out.push(WeightSpec::selection(p, half.clone()).expect("selection preset"));
    }
    out
}

/// Wraps weights and changes one ã_k^(j) without touching the generating
/// factors; a planted inconsistency for testing the checker itself.
#[derive(Debug, Clone)]
pub struct Perturbed<W> {
    pub base: W,
    pub j: usize,
    pub k: u64,
    pub factor: Rational,
}

impl<W: ScaledWeights> ScaledWeights for Perturbed<W> {
    fn family(&self) -> Family {
        self.base.family()
    }

    fn factor(&self, j: usize) -> Result<Factor> {
        self.base.factor(j)
    }

    fn factor_f64(&self, j: usize) -> Result<FactorF64> {
        self.base.factor_f64(j)
    }

    fn x_scale(&self) -> Option<Rational> {
        self.base.x_scale()
    }

    fn scaled_weight(&self, j: usize, k: u64) -> Result<Rational> {
        let w = self.base.scaled_weight(j, k)?;
        Ok(if (j, k) == (self.j, self.k) { w * &self.factor } else { w })
    }
}
