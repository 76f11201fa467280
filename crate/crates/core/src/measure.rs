//! The multiplicative measure μ_n in scaled form: point masses, the joint
//! law of the small component counts, tilting and the limit product law.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::{int, ln_factorial, ln_ratio, pow, ratio_to_f64, Number, Rational};
use crate::error::{Error, Result};
use crate::series::ScaledTables;
use crate::weights::{Factor, FactorF64, Family, ScaledWeights, WeightSpec};

/// Tail mass below which limit-law components are cut.
pub const LIMIT_TAIL_MASS: f64 = 1e-12;

/// A partition η = (k_1, ..., k_n) of n, Σ j·k_j = n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionState {
    k: Vec<u64>,
}

impl PartitionState {
    /// Multiplicities k_1, k_2, ...; shorter vectors are padded to length n.
    pub fn new(n: usize, mut k: Vec<u64>) -> Result<Self> {
        let mass: u64 = k.iter().enumerate().map(|(i, c)| (i as u64 + 1) * c).sum();
        if mass != n as u64 {
            return Err(Error::InvalidState(format!(
                "Σ j·k_j = {mass} but n = {n} for {k:?}"
            )));
        }
        if k.len() > n && k[n..].iter().any(|c| *c != 0) {
            return Err(Error::InvalidState("multiplicity beyond index n".into()));
        }
        k.resize(n, 0);
        Ok(PartitionState { k })
    }

    /// One cluster of size n.
    pub fn singleton(n: usize) -> Self {
        let mut k = vec![0; n];
        k[n - 1] = 1;
        PartitionState { k }
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    /// k_j for 1 ≤ j; zero beyond n.
    pub fn count(&self, j: usize) -> u64 {
        self.k.get(j.wrapping_sub(1)).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.k
    }

    /// Total number of clusters Σ k_j.
    pub fn parts(&self) -> u64 {
        self.k.iter().sum()
    }

    pub fn mass(&self) -> u64 {
        self.k.iter().enumerate().map(|(i, c)| (i as u64 + 1) * c).sum()
    }

    /// η^{(i,j)}: two clusters of sizes i and j merged.
    pub fn coagulate(&self, i: usize, j: usize) -> Option<PartitionState> {
        let n = self.n();
        if i == 0 || j == 0 || i + j > n {
            return None;
        }
        let ok = if i == j { self.count(i) >= 2 } else { self.count(i) >= 1 && self.count(j) >= 1 };
        if !ok {
            return None;
        }
        let mut k = self.k.clone();
        k[i - 1] -= 1;
        k[j - 1] -= 1;
        k[i + j - 1] += 1;
        Some(PartitionState { k })
    }

    /// η_{(i,j)}: a cluster of size i+j split into sizes i and j.
    pub fn fragment(&self, i: usize, j: usize) -> Option<PartitionState> {
        if i == 0 || j == 0 || self.count(i + j) == 0 {
            return None;
        }
        let mut k = self.k.clone();
        k[i + j - 1] -= 1;
        k[i - 1] += 1;
        k[j - 1] += 1;
        Some(PartitionState { k })
    }
}

impl fmt::Display for PartitionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.k.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    Exact,
    Limit,
}

/// Joint law of (K_1, ..., K_l), at finite n or in the limit.
#[derive(Debug, Clone, PartialEq)]
pub struct CountLawTable {
    /// `None` for the n → ∞ limit.
    pub n: Option<usize>,
    pub l: usize,
    pub kind: LawKind,
    pub entries: BTreeMap<Vec<u64>, Number>,
    /// Mass dropped by truncating infinite supports.
    pub truncated_mass: f64,
}

impl CountLawTable {
    pub fn prob(&self, prefix: &[u64]) -> Number {
        self.entries
            .get(prefix)
            .cloned()
            .unwrap_or(Number::Exact(Rational::zero()))
    }

    /// Σ of all entries; exact when every entry is.
    pub fn total(&self) -> Number {
        let mut exact = Rational::zero();
        let mut float = 0.0;
        let mut all_exact = true;
        for v in self.entries.values() {
            match v {
                Number::Exact(r) => exact += r,
                Number::Float(x) => {
                    all_exact = false;
                    float += x;
                }
            }
        }
        if all_exact {
            Number::Exact(exact)
        } else {
            Number::Float(float + ratio_to_f64(&exact))
        }
    }

    /// The law of (K_1, ..., K_{l-1}).
    pub fn marginalize_last(&self) -> CountLawTable {
        let mut entries: BTreeMap<Vec<u64>, Number> = BTreeMap::new();
        for (key, v) in &self.entries {
            let short = key[..key.len() - 1].to_vec();
            let slot = entries.entry(short).or_insert(Number::Exact(Rational::zero()));
            *slot = match (&*slot, v) {
                (Number::Exact(a), Number::Exact(b)) => Number::Exact(a + b),
                (a, b) => Number::Float(a.to_f64() + b.to_f64()),
            };
        }
        CountLawTable { l: self.l - 1, entries, ..self.clone() }
    }

    /// E[K_a] and E[K_a K_b] style moments; exact when the table is.
    pub fn moment(&self, f: impl Fn(&[u64]) -> i64) -> Number {
        let mut exact = Rational::zero();
        let mut float = 0.0;
        let mut all_exact = true;
        for (key, v) in &self.entries {
            let w = f(key);
            match v {
                Number::Exact(r) => exact += r * int(w),
                Number::Float(x) => {
                    all_exact = false;
                    float += x * w as f64;
                }
            }
        }
        if all_exact {
            Number::Exact(exact)
        } else {
            Number::Float(float + ratio_to_f64(&exact))
        }
    }

    /// CSV with columns k_1..k_l, probability (exact string), probability_float.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.l).map(|j| format!("k_{j}")).collect();
        header.push("probability".into());
        header.push("probability_float".into());
        w.write_record(&header)?;
        for (key, v) in &self.entries {
            let mut row: Vec<String> = key.iter().map(|k| k.to_string()).collect();
            row.push(match v {
                Number::Exact(_) => v.to_string(),
                Number::Float(_) => String::new(),
            });
            row.push(format!("{:e}", v.to_f64()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// μ_n and its finite-dimensional laws for one weight specification.
#[derive(Debug, Clone)]
pub struct Measure<W: ScaledWeights> {
    weights: W,
    tables: ScaledTables,
}

impl<W: ScaledWeights> Measure<W> {
    /// Builds c̃ to order `n` and tail tables for l = 1..=l_max.
    pub fn new(weights: W, n: usize, l_max: usize) -> Result<Self> {
        let tables = ScaledTables::build(&weights, n, 1..=l_max)?;
        Ok(Measure { weights, tables })
    }

    pub fn from_tables(weights: W, tables: ScaledTables) -> Self {
        Measure { weights, tables }
    }

    pub fn weights(&self) -> &W {
        &self.weights
    }

    pub fn tables(&self) -> &ScaledTables {
        &self.tables
    }

    fn c_tilde(&self, n: usize) -> Result<&Rational> {
        self.tables.require(n)?;
        let c = self.tables.c_tilde.coeff(n);
        if c.is_zero() {
            return Err(Error::ZeroPartitionFunction(n));
        }
        Ok(c)
    }

    /// μ_n(η) = Π_j ã_{k_j}^(j) / c̃_n.
    pub fn mu_point(&self, eta: &PartitionState) -> Result<Rational> {
        let n = eta.n();
        let c = self.c_tilde(n)?.clone();
        let mut w = Rational::one();
        for (i, k) in eta.counts().iter().enumerate() {
            if *k > 0 {
                w *= self.weights.scaled_weight(i + 1, *k)?;
                if w.is_zero() {
                    break;
                }
            }
        }
        Ok(w / c)
    }

    /// P(K_1 = k_1, ..., K_l = k_l) = (Π_j ã_{k_j}^(j))·T̃^(l)_{n-M_l}/c̃_n.
    pub fn fdd(&self, n: usize, prefix: &[u64]) -> Result<Rational> {
        let l = prefix.len();
        if l == 0 || l > n {
            return Err(Error::Precondition(format!("prefix length l = {l} must satisfy 1 ≤ l ≤ n = {n}")));
        }
        let c = self.c_tilde(n)?.clone();
        let tail = self.tables.tail(l)?;
        let mass: u64 = prefix.iter().enumerate().map(|(i, k)| (i as u64 + 1) * k).sum();
        if mass > n as u64 {
            return Ok(Rational::zero());
        }
        let mut w = Rational::one();
        for (i, k) in prefix.iter().enumerate() {
            if *k > 0 {
                w *= self.weights.scaled_weight(i + 1, *k)?;
            }
        }
        Ok(w * tail.coeff(n - mass as usize) / c)
    }

    /// The exact joint law of the first l counts, over all prefixes with M_l ≤ n.
    pub fn count_law(&self, n: usize, l: usize) -> Result<CountLawTable> {
        if l == 0 || l > n {
            return Err(Error::Precondition(format!("l = {l} must satisfy 1 ≤ l ≤ n = {n}")));
        }
        let c = self.c_tilde(n)?.clone();
        let tail = self.tables.tail(l)?;
        // ã_k^(j) for all k with j·k ≤ n.
        let mut weights = Vec::with_capacity(l);
        for j in 1..=l {
            let row: Vec<Rational> = (0..=(n / j) as u64)
                .map(|k| self.weights.scaled_weight(j, k))
                .collect::<Result<_>>()?;
            weights.push(row);
        }
        let mut entries = BTreeMap::new();
        let mut prefix = vec![0u64; l];
        #[allow(clippy::too_many_arguments)]
        fn walk(
            j: usize,
            remaining: usize,
            acc: Rational,
            prefix: &mut Vec<u64>,
            weights: &[Vec<Rational>],
            tail: &crate::series::Series,
            c: &Rational,
            out: &mut BTreeMap<Vec<u64>, Number>,
        ) {
            if j > prefix.len() {
                let p = &acc * tail.coeff(remaining) / c;
                if !p.is_zero() {
                    out.insert(prefix.clone(), Number::Exact(p));
                }
                return;
            }
            for k in 0..=(remaining / j) {
                let w = &weights[j - 1][k];
                if w.is_zero() {
                    continue;
                }
                prefix[j - 1] = k as u64;
                walk(j + 1, remaining - j * k, &acc * w, prefix, weights, tail, c, out);
            }
            prefix[j - 1] = 0;
        }
        walk(1, n, Rational::one(), &mut prefix, &weights, tail, &c, &mut entries);
        Ok(CountLawTable { n: Some(n), l, kind: LawKind::Exact, entries, truncated_mass: 0.0 })
    }

    /// cov(K_a, K_b) under μ_n, exact.
    pub fn covariance(&self, n: usize, a: usize, b: usize) -> Result<Rational> {
        let law = self.count_law(n, a.max(b))?;
        let ea = law.moment(|k| k[a - 1] as i64);
        let eb = law.moment(|k| k[b - 1] as i64);
        let eab = law.moment(|k| (k[a - 1] * k[b - 1]) as i64);
        match (ea, eb, eab) {
            (Number::Exact(ea), Number::Exact(eb), Number::Exact(eab)) => Ok(eab - ea * eb),
            _ => unreachable!("exact count laws have exact moments"),
        }
    }
}

/// A weight specification tilted by ρ: ã_k^(j) ↦ ρ^{jk} ã_k^(j).
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedSpec {
    pub base: WeightSpec,
    pub rho: Rational,
}

impl ScaledWeights for TiltedSpec {
    fn family(&self) -> Family {
        self.base.family()
    }

    fn factor(&self, j: usize) -> Result<Factor> {
        Ok(self.base.factor(j)?.tilted(&self.rho, j))
    }

    fn x_scale(&self) -> Option<Rational> {
        self.base.x_scale().map(|s| s * &self.rho)
    }

    fn factor_f64(&self, j: usize) -> Result<FactorF64> {
        if self.rho.is_zero() {
            return Ok(FactorF64::Poly(vec![0.0]));
        }
        Ok(self.base.factor_f64(j)?.tilted(ln_ratio(&self.rho), j))
    }
}

/// Tilts a spec by ρ ≥ 0, rejecting ρ where some S^(j)(ρ) diverges.
pub fn tilt(spec: &WeightSpec, rho: Rational) -> Result<TiltedSpec> {
    if rho.is_negative() {
        return Err(Error::Domain("tilt parameter ρ must be ≥ 0".into()));
    }
    if spec.family() == Family::Multiset {
        let p = spec.p().expect("multisets carry p");
        if p * &rho >= int(1) {
            return Err(Error::Domain(format!(
                "S^(j)(ρ) diverges: p·ρ = {} ≥ 1",
                crate::arith::format_rational(&(p * &rho))
            )));
        }
    }
    Ok(TiltedSpec { base: spec.clone(), rho })
}

/// The law k ↦ ρ^{jk} ã_k^(j) / S̃^(j)(ρ) of one tilted component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentLaw {
    pub probs: Vec<Number>,
    pub tail_mass: f64,
}

pub fn tilted_component_law<W: ScaledWeights + ?Sized>(
    weights: &W,
    rho: &Rational,
    j: usize,
) -> Result<ComponentLaw> {
    if rho.is_zero() {
        return Ok(ComponentLaw { probs: vec![Number::Exact(Rational::one())], tail_mass: 0.0 });
    }
    let factor = weights.factor(j)?;
    let total = factor.eval(rho, j)?;
    let x = pow(rho, j as u64);
    let finite = factor.support_max();
    match total {
        Number::Exact(s) => {
            // Locate the cut in floats; exact remainders get expensive near the radius.
            let (cut, tail_mass) = match finite {
                Some(top) => (top, 0.0),
                None => {
                    let f = FactorF64::from(&factor);
                    let (step, ln_s) = (j as f64 * ln_ratio(rho), ln_ratio(&s));
                    let terms = float_terms(|k| (f.ln_weight(k) + k as f64 * step - ln_s).exp());
                    suffix_cut(&terms)
                }
            };
            let mut probs = Vec::with_capacity(cut as usize + 1);
            let mut xp = Rational::one();
            for k in 0..=cut {
                probs.push(Number::Exact(factor.weight(k) * &xp / &s));
                xp *= &x;
            }
            Ok(ComponentLaw { probs, tail_mass })
        }
        Number::Float(_) => {
            let Factor::Exp(c) = &factor else {
                unreachable!("only exponential factors evaluate to floats")
            };
            poisson_component(ratio_to_f64(&(c * &x)))
        }
    }
}

/// Poisson(λ) cut where the remaining mass drops below [`LIMIT_TAIL_MASS`].
fn poisson_component(lambda: f64) -> Result<ComponentLaw> {
    if lambda == 0.0 {
        return Ok(ComponentLaw { probs: vec![Number::Float(1.0)], tail_mass: 0.0 });
    }
    let terms = float_terms(|k| (-lambda + k as f64 * lambda.ln() - ln_factorial(k)).exp());
    let (cut, tail_mass) = suffix_cut(&terms);
    Ok(ComponentLaw {
        probs: terms[..=cut as usize].iter().map(|t| Number::Float(*t)).collect(),
        tail_mass,
    })
}

/// Terms of a unimodal pmf until they fall past the mode below 1e-40.
fn float_terms(term: impl Fn(u64) -> f64) -> Vec<f64> {
    let mut terms: Vec<f64> = Vec::new();
    for k in 0u64.. {
        let t = term(k);
        let falling = terms.last().is_some_and(|prev| t <= *prev);
        terms.push(t);
        if falling && t < 1e-40 {
            break;
        }
    }
    terms
}

/// Smallest cut whose remaining mass is below [`LIMIT_TAIL_MASS`], from suffix sums.
fn suffix_cut(terms: &[f64]) -> (u64, f64) {
    let mut suffix = vec![0.0; terms.len() + 1];
    for i in (0..terms.len()).rev() {
        suffix[i] = suffix[i + 1] + terms[i];
    }
    let cut = (0..terms.len())
        .find(|&i| suffix[i + 1] < LIMIT_TAIL_MASS)
        .unwrap_or(terms.len() - 1);
    (cut as u64, suffix[cut + 1])
}

/// The product of tilted component laws for j = 1..=l.
pub fn limit_law<W: ScaledWeights + ?Sized>(weights: &W, rho: &Rational, l: usize) -> Result<CountLawTable> {
    if l == 0 {
        return Err(Error::Precondition("l must be ≥ 1".into()));
    }
    let components: Vec<ComponentLaw> = (1..=l)
        .map(|j| tilted_component_law(weights, rho, j))
        .collect::<Result<_>>()?;
    let mut entries: BTreeMap<Vec<u64>, Number> = BTreeMap::new();
    entries.insert(Vec::new(), Number::Exact(Rational::one()));
    for comp in &components {
        let mut next = BTreeMap::new();
        for (key, v) in &entries {
            for (k, p) in comp.probs.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                let mut key2 = key.clone();
                key2.push(k as u64);
                next.insert(key2, v.mul(p));
            }
        }
        entries = next;
    }
    let kept: f64 = components.iter().map(|c| 1.0 - c.tail_mass).product();
    Ok(CountLawTable {
        n: None,
        l,
        kind: LawKind::Limit,
        entries,
        truncated_mass: 1.0 - kept,
    })
}

/// Total variation between two count laws: half the L1 distance over the
/// union support, plus half of both truncated masses.
pub fn tv_distance(a: &CountLawTable, b: &CountLawTable) -> Result<f64> {
    if a.l != b.l {
        return Err(Error::Mismatch(format!("laws over l = {} and l = {}", a.l, b.l)));
    }
    let keys: BTreeSet<&Vec<u64>> = a.entries.keys().chain(b.entries.keys()).collect();
    let mut sum = 0.0;
    for key in keys {
        let pa = a.entries.get(key).map_or(0.0, Number::to_f64);
        let pb = b.entries.get(key).map_or(0.0, Number::to_f64);
        sum += (pa - pb).abs();
    }
    Ok(0.5 * sum + 0.5 * (a.truncated_mass + b.truncated_mass))
}

/// Writes a tv-vs-n grid as CSV with columns n, tv.
pub fn write_tv_csv<W: std::io::Write>(rows: &[(usize, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "tv"])?;
    for (n, tv) in rows {
        w.write_record([n.to_string(), format!("{tv:e}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::frac;
    use crate::oracle;
    use crate::weights::Preset;

    fn state(n: usize, k: &[u64]) -> PartitionState {
        PartitionState::new(n, k.to_vec()).unwrap()
    }

    #[test]
    fn mu_point_examples() {
        let ip = Measure::new(WeightSpec::multiset(Preset::IntegerPartitions, frac(1, 2)).unwrap(), 3, 1).unwrap();
        assert_eq!(ip.mu_point(&state(3, &[1, 1, 0])).unwrap(), frac(1, 3));
        let perms = Measure::new(WeightSpec::assembly(Preset::Permutations).unwrap(), 3, 1).unwrap();
        assert_eq!(perms.mu_point(&state(3, &[3, 0, 0])).unwrap(), frac(1, 6));
        assert_eq!(perms.mu_point(&state(1, &[1])).unwrap(), int(1));
    }

    #[test]
    fn fdd_examples() {
        let ip = Measure::new(WeightSpec::multiset(Preset::IntegerPartitions, int(1)).unwrap(), 3, 2).unwrap();
        assert_eq!(ip.fdd(3, &[1]).unwrap(), frac(1, 3));
        assert_eq!(ip.fdd(3, &[2, 1]).unwrap(), int(0));
        let perms = Measure::new(WeightSpec::assembly(Preset::Permutations).unwrap(), 4, 2).unwrap();
        assert_eq!(perms.fdd(4, &[0, 2]).unwrap(), frac(1, 8));
        assert!(matches!(perms.fdd(5, &[1]), Err(Error::TablesTooShort { .. })));
        assert!(matches!(perms.fdd(4, &[0, 0, 1]), Err(Error::MissingTail(3))));
        assert!(perms.fdd(1, &[1, 0]).is_err());
    }

    #[test]
    fn count_law_sums_to_one_and_marginalizes() {
        let spec = WeightSpec::assembly(Preset::Ewens(int(2))).unwrap();
        let m = Measure::new(spec, 14, 3).unwrap();
        let l3 = m.count_law(14, 3).unwrap();
        assert_eq!(l3.total(), Number::Exact(int(1)));
        let l2 = m.count_law(14, 2).unwrap();
        assert_eq!(l3.marginalize_last(), l2);
    }

    #[test]
    fn tilted_component_law_examples() {
        let ms = WeightSpec::multiset(Preset::IntegerPartitions, frac(1, 2)).unwrap();
        let law = tilted_component_law(&ms, &int(1), 1).unwrap();
        for k in 0..10 {
            let want = pow(&frac(1, 2), k + 1);
            assert_eq!(law.probs[k as usize], Number::Exact(want));
        }
        assert!(law.tail_mass < LIMIT_TAIL_MASS && law.tail_mass > 0.0);
        let zero = tilted_component_law(&ms, &int(0), 3).unwrap();
        assert_eq!(zero.probs, vec![Number::Exact(int(1))]);
        let perms = WeightSpec::assembly(Preset::Ewens(int(3))).unwrap();
        let law = tilted_component_law(&perms, &int(1), 1).unwrap();
        for (k, p) in law.probs.iter().enumerate() {
            let want = (-3f64).exp() * 3f64.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
            assert!((p.to_f64() - want).abs() < 1e-15);
        }
        assert!(matches!(tilted_component_law(&ms, &int(2), 1), Err(Error::Domain(_))));
    }

    #[test]
    fn limit_law_examples() {
        let ew = WeightSpec::assembly(Preset::Ewens(int(2))).unwrap();
        let law = limit_law(&ew, &int(1), 1).unwrap();
        for k in 0..8u64 {
            let want = (-2f64).exp() * 2f64.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
            assert!((law.prob(&[k]).to_f64() - want).abs() < 1e-15);
        }
        let graphs = WeightSpec::assembly(Preset::Graphs).unwrap();
        let point = limit_law(&graphs, &int(0), 3).unwrap();
        assert_eq!(point.entries.len(), 1);
        assert_eq!(point.prob(&[0, 0, 0]), Number::Exact(int(1)));
        let ms = WeightSpec::multiset(Preset::IntegerPartitions, frac(1, 2)).unwrap();
        let rho = frac(3, 2);
        let law = limit_law(&ms, &rho, 2).unwrap();
        let g1 = tilted_component_law(&ms, &rho, 1).unwrap();
        let g2 = tilted_component_law(&ms, &rho, 2).unwrap();
        for (key, v) in &law.entries {
            assert_eq!(*v, g1.probs[key[0] as usize].mul(&g2.probs[key[1] as usize]));
        }
        let gap = law.total().to_f64() + law.truncated_mass - 1.0;
        assert!(gap.abs() < 1e-12, "{gap}");
    }

    #[test]
    fn tv_examples() {
        let ew = WeightSpec::assembly(Preset::Ewens(int(2))).unwrap();
        let lim = limit_law(&ew, &int(1), 1).unwrap();
        assert_eq!(tv_distance(&lim, &lim).unwrap(), lim.truncated_mass);
        let point = |k: u64| CountLawTable {
            n: Some(1),
            l: 1,
            kind: LawKind::Exact,
            entries: [(vec![k], Number::Exact(int(1)))].into_iter().collect(),
            truncated_mass: 0.0,
        };
        assert_eq!(tv_distance(&point(0), &point(0)).unwrap(), 0.0);
        assert_eq!(tv_distance(&point(0), &point(1)).unwrap(), 1.0);
        let m = Measure::new(ew, 60, 1).unwrap();
        let d20 = tv_distance(&m.count_law(20, 1).unwrap(), &lim).unwrap();
        let d60 = tv_distance(&m.count_law(60, 1).unwrap(), &lim).unwrap();
        assert!(d60 < d20, "{d60} vs {d20}");
        let two = limit_law(&WeightSpec::assembly(Preset::Ewens(int(2))).unwrap(), &int(1), 2).unwrap();
        assert!(tv_distance(&lim, &two).is_err());
    }

    #[test]
    fn tilting_keeps_mu_and_scales_c() {
        let spec = WeightSpec::selection(Preset::DistinctParts, frac(2, 3)).unwrap();
        let base = Measure::new(spec.clone(), 10, 1).unwrap();
        let theta = frac(1, 2);
        let tilted = Measure::new(tilt(&spec, theta.clone()).unwrap(), 10, 1).unwrap();
        for n in 1..=10 {
            assert_eq!(
                tilted.tables().c_tilde.coeff(n),
                &(pow(&theta, n as u64) * base.tables().c_tilde.coeff(n))
            );
            for eta in oracle::enumerate_partitions(n, &Default::default()).unwrap().items {
                assert_eq!(base.mu_point(&eta).unwrap(), tilted.mu_point(&eta).unwrap());
            }
        }
        let ms = WeightSpec::multiset(Preset::IntegerPartitions, frac(1, 2)).unwrap();
        assert!(tilt(&ms, int(2)).is_err());
        assert!(tilt(&ms, int(-1)).is_err());
    }

    #[test]
    fn covariance_is_exact() {
        let m = Measure::new(WeightSpec::assembly(Preset::Permutations).unwrap(), 4, 2).unwrap();
        // Cycle types of S_4: K_1·K_2 is nonzero only for (2,1,0,0) with mass 6/24.
        let cov = m.covariance(4, 1, 2).unwrap();
        let e1 = int(1);
        let e2 = frac(1, 2);
        let e12 = frac(6, 24) * int(2);
        assert_eq!(cov, e12 - e1 * e2);
    }

    #[test]
    fn partition_state_moves() {
        let eta = state(5, &[2, 0, 1, 0, 0]);
        assert_eq!(eta.coagulate(1, 1).unwrap(), state(5, &[0, 1, 1, 0, 0]));
        assert_eq!(eta.coagulate(1, 3).unwrap(), state(5, &[1, 0, 0, 1, 0]));
        assert!(eta.coagulate(2, 2).is_none());
        assert_eq!(eta.fragment(1, 2).unwrap(), state(5, &[3, 1, 0, 0, 0]));
        assert!(eta.fragment(2, 2).is_none());
        assert!(PartitionState::new(4, vec![1, 1]).is_err());
        assert_eq!(eta.to_string(), "(2,0,1,0,0)");
    }
}
