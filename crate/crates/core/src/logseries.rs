//! Log-space floating mirror of the series engine for long horizons.
//!
//! Coefficients are stored as ln d_n (`-inf` for zero); every product
//! involved has nonnegative coefficients, so log-sum-exp is exact up to
//! rounding.

use std::collections::BTreeMap;

use crate::arith::log_add;
use crate::error::Result;
use crate::weights::{FactorF64, Family, ScaledWeights};

#[derive(Debug, Clone, PartialEq)]
pub struct LogSeries {
    ln: Vec<f64>,
}

impl LogSeries {
    pub fn new(ln: Vec<f64>) -> Self {
        LogSeries { ln }
    }

    pub fn order(&self) -> usize {
        self.ln.len() - 1
    }

    pub fn ln_coeffs(&self) -> &[f64] {
        &self.ln
    }

    pub fn ln_coeff(&self, n: usize) -> f64 {
        self.ln[n]
    }

    pub fn value(&self, n: usize) -> f64 {
        self.ln[n].exp()
    }
}

fn log_sum(terms: &[f64]) -> f64 {
    let hi = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + terms.iter().map(|t| (t - hi).exp()).sum::<f64>().ln()
}

fn multiply_factor(d: &mut [f64], factor: &FactorF64, j: usize) {
    let n = d.len() - 1;
    if j > n {
        return;
    }
    let span = n / j;
    let small = |m: f64| m.fract() == 0.0 && m >= 0.0 && m <= span as f64;
    match factor {
        FactorF64::Geometric { ln_w, m } if small(*m) => {
            for _ in 0..*m as usize {
                for idx in j..=n {
                    d[idx] = log_add(d[idx], ln_w + d[idx - j]);
                }
            }
        }
        FactorF64::Binomial { ln_w, m } if small(*m) => {
            for _ in 0..*m as usize {
                for idx in (j..=n).rev() {
                    d[idx] = log_add(d[idx], ln_w + d[idx - j]);
                }
            }
        }
        _ => {
            let weights: Vec<f64> = (0..=span as u64).map(|k| factor.ln_weight(k)).collect();
            let mut terms = Vec::with_capacity(span + 1);
            for idx in (j..=n).rev() {
                terms.clear();
                terms.push(d[idx]);
                for (k, wk) in weights.iter().enumerate().skip(1) {
                    let off = k * j;
                    if off > idx {
                        break;
                    }
                    terms.push(wk + d[idx - off]);
                }
                d[idx] = log_sum(&terms);
            }
        }
    }
}

fn product_from<W: ScaledWeights + ?Sized>(weights: &W, from: usize, n: usize) -> Result<LogSeries> {
    if weights.family() == Family::Assembly {
        // e_m = (1/m) Σ_k k·a_k·e_{m-k}, all terms nonnegative.
        let mut lnkq = vec![f64::NEG_INFINITY; n + 1];
        for (j, v) in lnkq.iter_mut().enumerate().skip(from.max(1)) {
            if let FactorF64::Exp { ln_c } = weights.factor_f64(j)? {
                *v = ln_c + (j as f64).ln();
            }
        }
        let mut e = vec![f64::NEG_INFINITY; n + 1];
        e[0] = 0.0;
        let mut terms = Vec::with_capacity(n);
        for m in 1..=n {
            terms.clear();
            for k in 1..=m {
                terms.push(lnkq[k] + e[m - k]);
            }
            e[m] = log_sum(&terms) - (m as f64).ln();
        }
        return Ok(LogSeries { ln: e });
    }
    let mut d = vec![f64::NEG_INFINITY; n + 1];
    d[0] = 0.0;
    for j in from.max(1)..=n {
        multiply_factor(&mut d, &weights.factor_f64(j)?, j);
    }
    Ok(LogSeries { ln: d })
}

pub fn g_tilde_log<W: ScaledWeights + ?Sized>(weights: &W, n: usize) -> Result<LogSeries> {
    product_from(weights, 1, n)
}

pub fn tail_log<W: ScaledWeights + ?Sized>(weights: &W, l: usize, n: usize) -> Result<LogSeries> {
    product_from(weights, l + 1, n)
}

/// Float-mode counterpart of [`crate::series::ScaledTables`].
#[derive(Debug, Clone, PartialEq)]
pub struct LogTables {
    pub c_tilde: LogSeries,
    pub t_tilde: BTreeMap<usize, LogSeries>,
}

impl LogTables {
    pub fn build<W: ScaledWeights + ?Sized>(
        weights: &W,
        n: usize,
        tails: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let c_tilde = g_tilde_log(weights, n)?;
        let mut t_tilde = BTreeMap::new();
        for l in tails {
            t_tilde.insert(l, tail_log(weights, l, n)?);
        }
        Ok(LogTables { c_tilde, t_tilde })
    }
}
