//! Truncated formal power series with exact rational coefficients.
//!
//! The generating functions g̃ = Π_j S̃^(j) and the tail products
//! Π_{j>l} S̃^(j) are accumulated one factor at a time; factor j only
//! touches exponents that are multiples of j.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{bit_size, int, ratio_to_f64, Rational};
use crate::error::{Error, Result};
use crate::limits::WorkLimits;
use crate::weights::{Factor, Family, ScaledWeights};

/// Default truncation order in exact mode.
pub const DEFAULT_ORDER: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<Rational>,
}

impl Series {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a series carries at least d_0");
        Series { coeffs }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Series::new(values.iter().map(|v| int(*v)).collect())
    }

    /// The constant series 1 truncated at `order`.
    pub fn one(order: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); order + 1];
        coeffs[0] = Rational::one();
        Series { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Series { coeffs: vec![Rational::zero(); order + 1] }
    }

    /// 1/(1 - r·x) truncated at `order`.
    pub fn geometric(r: &Rational, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut cur = Rational::one();
        for _ in 0..=order {
            coeffs.push(cur.clone());
            cur *= r;
        }
        Series { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn truncate(&self, order: usize) -> Result<Series> {
        self.require(order)?;
        Ok(Series { coeffs: self.coeffs[..=order].to_vec() })
    }

    fn require(&self, order: usize) -> Result<()> {
        if self.order() < order {
            return Err(Error::Truncation { have: self.order(), need: order });
        }
        Ok(())
    }

    pub fn bit_size(&self) -> u64 {
        self.coeffs.iter().map(bit_size).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(ratio_to_f64).collect()
    }

    /// Partial sum Σ_{n≤N} d_n ρ^n.
    pub fn eval_partial(&self, rho: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * rho + c;
        }
        acc
    }

    /// Partial sum plus a tail bound when a geometric majorant
    /// |d_n| ≤ C·r^n is supplied and r·ρ < 1.
    pub fn eval_truncated(&self, rho: &Rational, majorant: Option<(f64, f64)>) -> (Rational, Option<f64>) {
        let value = self.eval_partial(rho);
        let bound = majorant.and_then(|(c, r)| {
            let q = r * ratio_to_f64(rho).abs();
            (q < 1.0).then(|| c * q.powi(self.order() as i32 + 1) / (1.0 - q))
        });
        (value, bound)
    }
}

/// Coefficients of f·g up to order n.
pub fn cauchy_product(f: &Series, g: &Series, n: usize) -> Result<Series> {
    f.require(n)?;
    g.require(n)?;
    let mut out = vec![Rational::zero(); n + 1];
    for (i, fi) in f.coeffs[..=n].iter().enumerate() {
        if fi.is_zero() {
            continue;
        }
        for (k, gk) in g.coeffs[..=n - i].iter().enumerate() {
            if !gk.is_zero() {
                out[i + k] += fi * gk;
            }
        }
    }
    Ok(Series { coeffs: out })
}

/// exp(q) via n·e_n = Σ_{k=1}^{n} k·q_k·e_{n-k}, e_0 = 1.
pub fn series_exp(q: &Series, n: usize) -> Result<Series> {
    q.require(n)?;
    if !q.coeffs[0].is_zero() {
        return Err(Error::Domain("series_exp needs q_0 = 0".into()));
    }
    let kq: Vec<Rational> = q.coeffs[..=n]
        .iter()
        .enumerate()
        .map(|(k, c)| c * int(k as i64))
        .collect();
    let common = kq.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    if common.bits() <= 64 {
        return Ok(exp_integral(&kq, &common, n));
    }
    let mut e = Vec::with_capacity(n + 1);
    e.push(Rational::one());
    for m in 1..=n {
        let mut acc = Rational::zero();
        for k in 1..=m {
            if !kq[k].is_zero() && !e[m - k].is_zero() {
                acc += &kq[k] * &e[m - k];
            }
        }
        e.push(acc / int(m as i64));
    }
    Ok(Series { coeffs: e })
}

/// The exp recurrence in integers. With k·q_k = u_k/L, the scaled
/// coefficients E_m = m!·L^m·e_m satisfy
/// E_m = Σ_k u_k·L^{k-1}·(m-1)!/(m-k)!·E_{m-k}, so no gcd is taken until the end.
fn exp_integral(kq: &[Rational], common: &BigInt, n: usize) -> Series {
    let u: Vec<BigInt> = kq.iter().map(|c| c.numer() * (common / c.denom())).collect();
    let mut l_pow = vec![BigInt::one()];
    for _ in 0..n {
        let next = l_pow.last().expect("nonempty") * common;
        l_pow.push(next);
    }
    let mut big_e: Vec<BigInt> = Vec::with_capacity(n + 1);
    big_e.push(BigInt::one());
    let mut coeffs = vec![Rational::one()];
    let mut m_fact = BigInt::one();
    for m in 1..=n {
        let mut acc = BigInt::zero();
        let mut falling = BigInt::one();
        for k in 1..=m {
            if k > 1 {
                falling *= m - k + 1;
            }
            if !u[k].is_zero() && !big_e[m - k].is_zero() {
                acc += &u[k] * &l_pow[k - 1] * &falling * &big_e[m - k];
            }
        }
        m_fact *= m;
        coeffs.push(Rational::new(acc.clone(), &m_fact * &l_pow[m]));
        big_e.push(acc);
    }
    Series { coeffs }
}

/// log(f) for f_0 = 1: l_n = f_n - (1/n) Σ_{k=1}^{n-1} k·l_k·f_{n-k}.
pub fn series_log(f: &Series, n: usize) -> Result<Series> {
    f.require(n)?;
    if !f.coeffs[0].is_one() {
        return Err(Error::Domain("series_log needs f_0 = 1".into()));
    }
    let mut l = vec![Rational::zero(); n + 1];
    for m in 1..=n {
        let mut acc = Rational::zero();
        for k in 1..m {
            if !l[k].is_zero() && !f.coeffs[m - k].is_zero() {
                acc += int(k as i64) * &l[k] * &f.coeffs[m - k];
            }
        }
        l[m] = &f.coeffs[m] - acc / int(m as i64);
    }
    Ok(Series { coeffs: l })
}

/// f/g by the leading-coefficient recurrence.
pub fn series_divide(f: &Series, g: &Series, n: usize) -> Result<Series> {
    f.require(n)?;
    g.require(n)?;
    if g.coeffs[0].is_zero() {
        return Err(Error::ZeroConstant);
    }
    let g0 = g.coeffs[0].clone();
    let mut q: Vec<Rational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut acc = f.coeffs[m].clone();
        for i in 1..=m {
            if !g.coeffs[i].is_zero() && !q[m - i].is_zero() {
                acc -= &g.coeffs[i] * &q[m - i];
            }
        }
        q.push(acc / &g0);
    }
    Ok(Series { coeffs: q })
}

/// S̃^(j)(x) = Σ_k ã_k^(j) x^{jk} truncated at n.
pub fn sj_series<W: ScaledWeights + ?Sized>(weights: &W, j: usize, n: usize) -> Result<Series> {
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[0] = Rational::one();
    if j <= n {
        let factor = weights.factor(j)?;
        multiply_factor(&mut coeffs, &factor, j);
    }
    Ok(Series { coeffs })
}

/// Multiplies the truncated series in place by the factor S̃^(j).
fn multiply_factor(d: &mut [Rational], factor: &Factor, j: usize) {
    let n = d.len() - 1;
    if j > n || factor.support_max() == Some(0) {
        return;
    }
    let span = (n / j) as u64;
    match factor {
        Factor::Geometric { w, m } if m.to_u64().is_some_and(|m| m <= span) => {
            for _ in 0..m.to_u64().unwrap() {
                for idx in j..=n {
                    if !d[idx - j].is_zero() {
                        let add = w * &d[idx - j];
                        d[idx] += add;
                    }
                }
            }
        }
        Factor::Binomial { w, m } if m.to_u64().is_some_and(|m| m <= span) => {
            for _ in 0..m.to_u64().unwrap() {
                for idx in (j..=n).rev() {
                    if !d[idx - j].is_zero() {
                        let add = w * &d[idx - j];
                        d[idx] += add;
                    }
                }
            }
        }
        _ => {
            let top = factor.support_max().map_or(span, |s| s.min(span));
            let weights: Vec<Rational> = (0..=top).map(|k| factor.weight(k)).collect();
            for idx in (j..=n).rev() {
                let mut acc = Rational::zero();
                for (k, wk) in weights.iter().enumerate().skip(1) {
                    let off = k * j;
                    if off > idx {
                        break;
                    }
                    if !wk.is_zero() && !d[idx - off].is_zero() {
                        acc += wk * &d[idx - off];
                    }
                }
                d[idx] += acc;
            }
        }
    }
}

fn check_budget(d: &[Rational], limits: &WorkLimits, j: usize) -> Result<()> {
    let bits: u64 = d.iter().map(bit_size).sum();
    if bits > limits.coefficient_bits {
        return Err(Error::Budget(format!(
            "coefficients reached {bits} bits after factor j = {j} (budget {})",
            limits.coefficient_bits
        )));
    }
    Ok(())
}

/// Π_{j=from}^{n} S̃^(j) truncated at n.
fn product_from<W: ScaledWeights + ?Sized>(
    weights: &W,
    from: usize,
    n: usize,
    limits: &WorkLimits,
) -> Result<Series> {
    if weights.family() == Family::Assembly {
        // Π exp(a_j x^j) = exp(Σ a_j x^j).
        let mut q = vec![Rational::zero(); n + 1];
        for (j, qj) in q.iter_mut().enumerate().skip(from.max(1)) {
            match weights.factor(j)? {
                Factor::Exp(c) => *qj = c,
                other => unreachable!("assembly factor {other:?}"),
            }
        }
        let e = series_exp(&Series { coeffs: q }, n)?;
        check_budget(&e.coeffs, limits, n)?;
        return Ok(e);
    }
    let scale = weights.x_scale();
    let d = integral_product(weights, from.max(1)..=n, n, scale.is_some(), limits)?;
    Ok(match scale {
        Some(s) => rescale(d, &s),
        None => Series { coeffs: d },
    })
}

/// Π over `js` of the factors; with `unscaled`, every w is replaced by 1.
fn integral_product<W: ScaledWeights + ?Sized>(
    weights: &W,
    js: std::ops::RangeInclusive<usize>,
    n: usize,
    unscaled: bool,
    limits: &WorkLimits,
) -> Result<Vec<Rational>> {
    if unscaled {
        return Ok(integer_product(weights, js, n, limits)?
            .into_iter()
            .map(Rational::from_integer)
            .collect());
    }
    let mut d = vec![Rational::zero(); n + 1];
    d[0] = Rational::one();
    for j in js {
        if j > n {
            break;
        }
        multiply_factor(&mut d, &weights.factor(j)?, j);
        check_budget(&d, limits, j)?;
    }
    Ok(d)
}

/// Π (1-x^j)^{-m_j} or Π (1+x^j)^{m_j} in plain integers.
fn integer_product<W: ScaledWeights + ?Sized>(
    weights: &W,
    js: std::ops::RangeInclusive<usize>,
    n: usize,
    limits: &WorkLimits,
) -> Result<Vec<BigInt>> {
    let mut d = vec![BigInt::zero(); n + 1];
    d[0] = BigInt::one();
    for j in js {
        if j > n {
            break;
        }
        let (m, geometric) = match weights.factor(j)? {
            Factor::Geometric { m, .. } => (m, true),
            Factor::Binomial { m, .. } => (m, false),
            other => unreachable!("integral families only carry geometric or binomial factors, got {other:?}"),
        };
        if m.is_zero() {
            continue;
        }
        let span = (n / j) as u64;
        match m.to_u64() {
            Some(small) if small <= span => {
                for _ in 0..small {
                    if geometric {
                        for idx in j..=n {
                            let add = d[idx - j].clone();
                            d[idx] += add;
                        }
                    } else {
                        for idx in (j..=n).rev() {
                            let add = d[idx - j].clone();
                            d[idx] += add;
                        }
                    }
                }
            }
            _ => {
                // C(m+k-1, k) or C(m, k), built incrementally.
                let mut w = vec![BigInt::one()];
                for k in 1..=span {
                    let top = if geometric { &m + BigInt::from(k - 1) } else { &m - BigInt::from(k - 1) };
                    let next = w.last().expect("nonempty") * top / BigInt::from(k);
                    if next.is_zero() {
                        break;
                    }
                    w.push(next);
                }
                for idx in (j..=n).rev() {
                    let mut acc = BigInt::zero();
                    for (k, wk) in w.iter().enumerate().skip(1) {
                        if k * j > idx {
                            break;
                        }
                        if !d[idx - k * j].is_zero() {
                            acc += wk * &d[idx - k * j];
                        }
                    }
                    d[idx] += acc;
                }
            }
        }
        let bits: u64 = d.iter().map(|v| v.bits()).sum();
        if bits > limits.coefficient_bits {
            return Err(Error::Budget(format!(
                "coefficients reached {bits} bits after factor j = {j} (budget {})",
                limits.coefficient_bits
            )));
        }
    }
    Ok(d)
}

/// f/g for integer series with g_0 = 1.
fn integer_divide(f: &[BigInt], g: &[BigInt]) -> Vec<BigInt> {
    let mut q: Vec<BigInt> = Vec::with_capacity(f.len());
    for m in 0..f.len() {
        let mut acc = f[m].clone();
        for i in 1..=m {
            if !g[i].is_zero() && !q[m - i].is_zero() {
                acc -= &g[i] * &q[m - i];
            }
        }
        q.push(acc);
    }
    q
}

/// d_n ↦ s^n·d_n: turns G(x) into G(s·x).
fn rescale(mut d: Vec<Rational>, s: &Rational) -> Series {
    let mut sp = Rational::one();
    for c in d.iter_mut().skip(1) {
        sp *= s;
        *c *= &sp;
    }
    Series { coeffs: d }
}

/// g̃ = Π_{j≥1} S̃^(j) truncated at n; its coefficients are c̃_0..c̃_n.
pub fn g_tilde<W: ScaledWeights + ?Sized>(weights: &W, n: usize) -> Result<Series> {
    product_from(weights, 1, n, &weights_limits())
}

/// Π_{j=l+1}^{n} S̃^(j); coefficients are T̃^(l)_0..T̃^(l)_n. l = 0 is g̃.
pub fn tail_series<W: ScaledWeights + ?Sized>(weights: &W, l: usize, n: usize) -> Result<Series> {
    product_from(weights, l + 1, n, &weights_limits())
}

/// g̃^(l) = Π_{j≤l} S̃^(j).
pub fn head_series<W: ScaledWeights + ?Sized>(weights: &W, l: usize, n: usize) -> Result<Series> {
    let mut d = vec![Rational::zero(); n + 1];
    d[0] = Rational::one();
    for j in 1..=l.min(n) {
        multiply_factor(&mut d, &weights.factor(j)?, j);
    }
    Ok(Series { coeffs: d })
}

fn weights_limits() -> WorkLimits {
    WorkLimits::from_env().unwrap_or_default()
}

/// c̃ and the tail tables T̃^(l) for a fixed truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledTables {
    pub c_tilde: Series,
    pub t_tilde: BTreeMap<usize, Series>,
    pub rho_hint: Option<Rational>,
}

impl ScaledTables {
    pub fn build<W: ScaledWeights + ?Sized>(
        weights: &W,
        n: usize,
        tails: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if let Some(s) = weights.x_scale() {
            return Self::build_scaled(weights, n, tails, &s);
        }
        let c_tilde = g_tilde(weights, n)?;
        let mut t_tilde = BTreeMap::new();
        for l in tails {
            if l == 0 {
                t_tilde.insert(0, c_tilde.clone());
            } else {
                t_tilde.insert(l, tail_series(weights, l, n)?);
            }
        }
        Ok(ScaledTables { c_tilde, t_tilde, rho_hint: None })
    }

    /// Integral families: G once, each tail as G divided by its head
    /// polynomial, all before rescaling.
    fn build_scaled<W: ScaledWeights + ?Sized>(
        weights: &W,
        n: usize,
        tails: impl IntoIterator<Item = usize>,
        s: &Rational,
    ) -> Result<Self> {
        let limits = weights_limits();
        let g = integer_product(weights, 1..=n, n, &limits)?;
        let mut t_tilde = BTreeMap::new();
        for l in tails {
            let head = integer_product(weights, 1..=l, n, &limits)?;
            let t = integer_divide(&g, &head);
            t_tilde.insert(l, rescale(t.into_iter().map(Rational::from_integer).collect(), s));
        }
        let c_tilde = rescale(g.into_iter().map(Rational::from_integer).collect(), s);
        Ok(ScaledTables { c_tilde, t_tilde, rho_hint: None })
    }

    pub fn order(&self) -> usize {
        self.c_tilde.order()
    }

    pub fn tail(&self, l: usize) -> Result<&Series> {
        if l == 0 {
            return Ok(&self.c_tilde);
        }
        self.t_tilde.get(&l).ok_or(Error::MissingTail(l))
    }

    pub fn require(&self, n: usize) -> Result<()> {
        if self.order() < n {
            return Err(Error::TablesTooShort { have: self.order(), need: n });
        }
        Ok(())
    }
}
