//! Brute-force ground truth by enumeration, kept independent of the series
//! engine so each can check the other.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{factorial, pow, Number, Rational};
use crate::error::{Error, Result};
use crate::limits::WorkLimits;
use crate::measure::{CountLawTable, LawKind, PartitionState};
use crate::weights::ScaledWeights;

/// Ω_n in canonical order: ascending lexicographic on (k_n, ..., k_1).
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionList {
    pub n: usize,
    pub items: Vec<PartitionState>,
}

pub fn enumerate_partitions(n: usize, limits: &WorkLimits) -> Result<PartitionList> {
    if n == 0 {
        return Err(Error::Precondition("n must be ≥ 1".into()));
    }
    limits.check_enumeration(n)?;
    let mut items = Vec::new();
    let mut k = vec![0u64; n];
    fn walk(j: usize, rem: usize, k: &mut Vec<u64>, n: usize, out: &mut Vec<PartitionState>) {
        if j == 1 {
            k[0] = rem as u64;
            out.push(PartitionState::new(n, k.clone()).expect("mass is n by construction"));
            return;
        }
        for c in 0..=rem / j {
            k[j - 1] = c as u64;
            walk(j - 1, rem - c * j, k, n, out);
        }
        k[j - 1] = 0;
    }
    walk(n, n, &mut k, n, &mut items);
    Ok(PartitionList { n, items })
}

/// Ω_{n,k}: partitions of n with exactly k parts.
pub fn enumerate_partitions_k(n: usize, k: usize, limits: &WorkLimits) -> Result<Vec<PartitionState>> {
    Ok(enumerate_partitions(n, limits)?
        .items
        .into_iter()
        .filter(|eta| eta.parts() == k as u64)
        .collect())
}

fn weight_of<W: ScaledWeights + ?Sized>(w: &W, eta: &PartitionState) -> Result<Rational> {
    let mut acc = Rational::one();
    for (i, k) in eta.counts().iter().enumerate() {
        if *k > 0 {
            acc *= w.scaled_weight(i + 1, *k)?;
            if acc.is_zero() {
                break;
            }
        }
    }
    Ok(acc)
}

/// c̃_n = Σ_{η ∈ Ω_n} Π_j ã_{k_j}^(j).
pub fn brute_c_tilde<W: ScaledWeights + ?Sized>(w: &W, n: usize, limits: &WorkLimits) -> Result<Rational> {
    let mut total = Rational::zero();
    for eta in enumerate_partitions(n, limits)?.items {
        total += weight_of(w, &eta)?;
    }
    Ok(total)
}

/// μ_n on every state of Ω_n (zero-mass states included).
pub fn brute_mu<W: ScaledWeights + ?Sized>(
    w: &W,
    n: usize,
    limits: &WorkLimits,
) -> Result<Vec<(PartitionState, Rational)>> {
    let items = enumerate_partitions(n, limits)?.items;
    let weights: Vec<Rational> = items.iter().map(|eta| weight_of(w, eta)).collect::<Result<_>>()?;
    let total: Rational = weights.iter().sum();
    if total.is_zero() {
        return Err(Error::ZeroPartitionFunction(n));
    }
    Ok(items.into_iter().zip(weights).map(|(eta, v)| (eta, v / &total)).collect())
}

/// Joint law of (K_1, ..., K_l) by summing μ_n over Ω_n.
pub fn brute_marginal<W: ScaledWeights + ?Sized>(
    w: &W,
    n: usize,
    l: usize,
    limits: &WorkLimits,
) -> Result<CountLawTable> {
    if l == 0 || l > n {
        return Err(Error::Precondition(format!("l = {l} must satisfy 1 ≤ l ≤ n = {n}")));
    }
    let mut acc: BTreeMap<Vec<u64>, Rational> = BTreeMap::new();
    for (eta, mass) in brute_mu(w, n, limits)? {
        if mass.is_zero() {
            continue;
        }
        *acc.entry(eta.counts()[..l].to_vec()).or_insert_with(Rational::zero) += mass;
    }
    Ok(CountLawTable {
        n: Some(n),
        l,
        kind: LawKind::Exact,
        entries: acc.into_iter().map(|(k, v)| (k, Number::Exact(v))).collect(),
        truncated_mass: 0.0,
    })
}

/// All set partitions of {1..n} as restricted growth strings.
pub fn set_partitions(n: usize, limits: &WorkLimits) -> Result<Vec<Vec<usize>>> {
    if n > limits.set_partition_n {
        return Err(Error::WorkLimit(format!(
            "set partitions of [{n}] refused (limit n ≤ {})",
            limits.set_partition_n
        )));
    }
    let mut out = Vec::new();
    if n == 0 {
        return Ok(out);
    }
    let mut rgs = vec![0usize; n];
    fn walk(i: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == rgs.len() {
            out.push(rgs.clone());
            return;
        }
        for b in 0..=max + 1 {
            rgs[i] = b;
            walk(i + 1, max.max(b), rgs, out);
        }
    }
    // Element 1 always opens block 0.
    walk(1, 0, &mut rgs, &mut out);
    Ok(out)
}

fn check_nk(m: &[Rational], n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("need 1 ≤ k ≤ n, got n = {n}, k = {k}")));
    }
    if m.len() < n {
        return Err(Error::Precondition(format!("need weights m_1..m_{n}, got {}", m.len())));
    }
    Ok(())
}

/// B_{n,k} as the sum over set partitions of [n] into k blocks of Π m_{|A|}.
pub fn bell_polynomial_set_partitions(m: &[Rational], n: usize, k: usize, limits: &WorkLimits) -> Result<Rational> {
    check_nk(m, n, k)?;
    let mut total = Rational::zero();
    for rgs in set_partitions(n, limits)? {
        let blocks = rgs.iter().max().map_or(0, |b| b + 1);
        if blocks != k {
            continue;
        }
        let mut sizes = vec![0usize; blocks];
        for b in &rgs {
            sizes[*b] += 1;
        }
        total += sizes.iter().map(|s| m[s - 1].clone()).product::<Rational>();
    }
    Ok(total)
}

/// Π_j (m_j/j!)^{k_j}/k_j!.
fn gibbs_weight(m: &[Rational], eta: &PartitionState) -> Rational {
    let mut acc = Rational::one();
    for (i, k) in eta.counts().iter().enumerate() {
        if *k > 0 {
            let base = &m[i] / Rational::from_integer(factorial(i as u64 + 1));
            acc *= pow(&base, *k) / Rational::from_integer(factorial(*k));
        }
    }
    acc
}

/// B_{n,k} = n!·Σ_{η ∈ Ω_{n,k}} Π_j (m_j/j!)^{k_j}/k_j!.
pub fn bell_polynomial_integer_partitions(m: &[Rational], n: usize, k: usize, limits: &WorkLimits) -> Result<Rational> {
    check_nk(m, n, k)?;
    let sum: Rational = enumerate_partitions_k(n, k, limits)?
        .iter()
        .map(|eta| gibbs_weight(m, eta))
        .sum();
    Ok(sum * Rational::from_integer(factorial(n as u64)))
}

/// B_{n,k} evaluated both ways; disagreement is reported as an error.
pub fn bell_polynomial(m: &[Rational], n: usize, k: usize, limits: &WorkLimits) -> Result<Rational> {
    let via_parts = bell_polynomial_integer_partitions(m, n, k, limits)?;
    if n <= limits.set_partition_n {
        let via_sets = bell_polynomial_set_partitions(m, n, k, limits)?;
        if via_sets != via_parts {
            return Err(Error::Mismatch(format!(
                "B_{{{n},{k}}}: set partitions give {via_sets}, integer partitions give {via_parts}"
            )));
        }
    }
    Ok(via_parts)
}

/// n! / Π_j k_j!·(j!)^{k_j}.
pub fn set_partition_count(eta: &PartitionState) -> BigInt {
    let mut denom = BigInt::one();
    for (i, k) in eta.counts().iter().enumerate() {
        denom *= factorial(*k) * num_traits::pow(factorial(i as u64 + 1), *k as usize);
    }
    factorial(eta.n() as u64) / denom
}

/// p_{n,k}(η) = n!·Π_j (m_j/j!)^{k_j}/k_j! / B_{n,k}.
pub fn gibbs_pnk(m: &[Rational], n: usize, k: usize, eta: &PartitionState, limits: &WorkLimits) -> Result<Rational> {
    if eta.n() != n || eta.parts() != k as u64 {
        return Err(Error::Precondition(format!("{eta} is not in Ω_{{{n},{k}}}")));
    }
    let b = bell_polynomial_integer_partitions(m, n, k, limits)?;
    if b.is_zero() {
        return Err(Error::Domain(format!("B_{{{n},{k}}} = 0")));
    }
    Ok(gibbs_weight(m, eta) * Rational::from_integer(factorial(n as u64)) / b)
}

/// Number of partitions p(n) via Euler's pentagonal recurrence.
pub fn partition_numbers(n: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); n + 1];
    p[0] = BigInt::one();
    for i in 1..=n {
        let mut acc = BigInt::zero();
        for g in 1.. {
            let sign = if g % 2 == 1 { 1 } else { -1 };
            let mut any = false;
            for pent in [g * (3 * g - 1) / 2, g * (3 * g + 1) / 2] {
                if pent <= i {
                    any = true;
                    acc += &p[i - pent] * sign;
                }
            }
            if !any {
                break;
            }
        }
        p[i] = acc;
    }
    p
}

/// Stirling numbers of the second kind S(n, k).
pub fn stirling2(n: usize, k: usize) -> BigInt {
    let mut row = vec![BigInt::zero(); k + 1];
    row[0] = BigInt::one();
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = &row[j] * j + &row[j - 1];
        }
        row[0] = BigInt::zero();
    }
    row[k].clone()
}
