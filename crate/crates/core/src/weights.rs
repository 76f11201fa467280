//! Structure specifications: per-component laws P(Z_j = k) for assemblies,
//! multisets, selections and explicit custom tables.
//!
//! Every exact computation downstream runs on the scaled weights
//! ã_k^(j) = a_k^(j) / a_0^(j); the unscaled probabilities are floating
//! conveniences because the Poisson normaliser e^{-a_j} is irrational.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{
    binomial, factorial, int, ln_binomial, ln_factorial, ln_multichoose, ln_ratio, pow,
    powi, ratio_to_f64, round_half_up, Number, Rational,
};
use crate::error::{Error, Result};
use crate::limits::WorkLimits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Assembly,
    Multiset,
    Selection,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Assembly => "assembly",
            Family::Multiset => "multiset",
            Family::Selection => "selection",
            Family::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "assembly" => Family::Assembly,
            "multiset" => Family::Multiset,
            "selection" => Family::Selection,
            "custom" => Family::Custom,
            _ => return None,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a finite table yields past its last entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailRule {
    Zero,
    RepeatLast,
    ErrorBeyond,
}

impl TailRule {
    pub fn name(self) -> &'static str {
        match self {
            TailRule::Zero => "zero",
            TailRule::RepeatLast => "repeat-last",
            TailRule::ErrorBeyond => "error-beyond",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "zero" => TailRule::Zero,
            "repeat-last" => TailRule::RepeatLast,
            "error-beyond" => TailRule::ErrorBeyond,
            _ => return None,
        })
    }

    fn pick<T>(self, items: &[T], j: usize) -> Result<Option<&T>> {
        match items.get(j - 1) {
            Some(v) => Ok(Some(v)),
            None => match self {
                TailRule::Zero => Ok(None),
                TailRule::RepeatLast => Ok(items.last()),
                TailRule::ErrorBeyond => Err(Error::ParameterIndex(j)),
            },
        }
    }
}

/// Named parameter sequences. Assembly presets generate a_j, the others
/// generate the integer multiplicities m_j used by multisets and selections.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Permutations,
    Ewens(Rational),
    SetPartitions,
    Graphs,
    ForestsLabelled,
    OscillatingDemo,
    IntegerPartitions,
    PlanePartitions,
    Bose(Rational),
    DistinctParts,
    Fermi(Rational),
    IdealGas(u32),
    MappingPatterns(Rational),
}

impl Preset {
    pub fn generates_assembly_weights(&self) -> bool {
        matches!(
            self,
            Preset::Permutations
                | Preset::Ewens(_)
                | Preset::SetPartitions
                | Preset::Graphs
                | Preset::ForestsLabelled
                | Preset::OscillatingDemo
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Permutations => "permutations",
            Preset::Ewens(_) => "ewens",
            Preset::SetPartitions => "set_partitions",
            Preset::Graphs => "graphs",
            Preset::ForestsLabelled => "forests_labelled",
            Preset::OscillatingDemo => "oscillating_demo",
            Preset::IntegerPartitions => "integer_partitions",
            Preset::PlanePartitions => "plane_partitions",
            Preset::Bose(_) => "bose",
            Preset::DistinctParts => "distinct_parts",
            Preset::Fermi(_) => "fermi",
            Preset::IdealGas(_) => "ideal_gas",
            Preset::MappingPatterns(_) => "mapping_patterns",
        }
    }

    /// Builds a preset from its name and already-parsed arguments.
    pub fn from_parts(name: &str, args: &[Rational]) -> Result<Self> {
        let want = |n: usize| -> Result<()> {
            if args.len() != n {
                return Err(Error::InvalidSpec(format!(
                    "preset {name} takes {n} argument(s), got {}",
                    args.len()
                )));
            }
            Ok(())
        };
        let preset = match name {
            "permutations" => Preset::Permutations,
            "ewens" => Preset::Ewens(args.first().cloned().unwrap_or_else(|| int(1))),
            "set_partitions" => Preset::SetPartitions,
            "graphs" => Preset::Graphs,
            "forests_labelled" => Preset::ForestsLabelled,
            "oscillating_demo" => Preset::OscillatingDemo,
            "integer_partitions" => Preset::IntegerPartitions,
            "plane_partitions" => Preset::PlanePartitions,
            "distinct_parts" => Preset::DistinctParts,
            "bose" | "fermi" => {
                want(1)?;
                if name == "bose" {
                    Preset::Bose(args[0].clone())
                } else {
                    Preset::Fermi(args[0].clone())
                }
            }
            "ideal_gas" => {
                want(1)?;
                let d = args[0]
                    .to_integer()
                    .to_u32()
                    .filter(|d| *d >= 1 && args[0].is_integer())
                    .ok_or_else(|| {
                        Error::InvalidSpec("ideal_gas dimension must be an integer ≥ 1".into())
                    })?;
                Preset::IdealGas(d)
            }
            "mapping_patterns" => {
                want(1)?;
                Preset::MappingPatterns(args[0].clone())
            }
            _ => return Err(Error::InvalidSpec(format!("unknown preset {name:?}"))),
        };
        if name == "ewens" {
            want(1)?;
        } else if !matches!(
            preset,
            Preset::Bose(_) | Preset::Fermi(_) | Preset::IdealGas(_) | Preset::MappingPatterns(_)
        ) {
            want(0)?;
        }
        preset.validate()?;
        Ok(preset)
    }

    pub fn args(&self) -> Vec<Rational> {
        match self {
            Preset::Ewens(t) => vec![t.clone()],
            Preset::Bose(a) | Preset::Fermi(a) => vec![a.clone()],
            Preset::IdealGas(d) => vec![int(*d as i64)],
            Preset::MappingPatterns(b) => vec![b.clone()],
            _ => vec![],
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Preset::Ewens(t) if !t.is_positive() => {
                Err(Error::InvalidSpec("ewens θ must be positive".into()))
            }
            Preset::MappingPatterns(b) if !(b.is_positive() && *b < int(1)) => {
                Err(Error::InvalidSpec("mapping_patterns b must satisfy 0<b<1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamGen {
    Preset(Preset),
    /// E Z_j ~ c·y^j·j^α. Assemblies take a_j = c·y^j·j^α directly;
    /// multisets and selections take m_j = max(1, round(c·y^j·j^α)).
    RegularlyVarying {
        c: Rational,
        alpha: Rational,
        y: Rational,
    },
    /// Explicit a_j (assembly) or m_j (multiset/selection), j = 1, 2, ...
    Table { values: Vec<Rational>, tail: TailRule },
    /// Explicit component laws for the custom family: row j lists the
    /// unnormalised weights w_0, w_1, ... of Z_j, with w_0 > 0.
    Rows {
        rows: Vec<Vec<Rational>>,
        tail: TailRule,
    },
}

/// One factor S̃^(j)(x) = Σ_k ã_k^(j) x^{jk} of the generating function.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// exp(c·x^j).
    Exp(Rational),
    /// (1 - w·x^j)^{-m}.
    Geometric { w: Rational, m: BigInt },
    /// (1 + w·x^j)^m.
    Binomial { w: Rational, m: BigInt },
    /// Σ_k r_k x^{jk} with r_0 = 1.
    Poly(Vec<Rational>),
}

impl Factor {
    /// ã_k: the coefficient of x^{jk}.
    pub fn weight(&self, k: u64) -> Rational {
        match self {
            Factor::Exp(c) => pow(c, k) / Rational::from_integer(factorial(k)),
            Factor::Geometric { w, m } => {
                Rational::from_integer(binomial(&(m + BigInt::from(k) - 1), k)) * pow(w, k)
            }
            Factor::Binomial { w, m } => Rational::from_integer(binomial(m, k)) * pow(w, k),
            Factor::Poly(r) => r.get(k as usize).cloned().unwrap_or_else(Rational::zero),
        }
    }

    /// Largest k with ã_k ≠ 0, when the support is finite.
    pub fn support_max(&self) -> Option<u64> {
        match self {
            Factor::Exp(c) if c.is_zero() => Some(0),
            Factor::Geometric { w, m } if w.is_zero() || m.is_zero() => Some(0),
            Factor::Binomial { w, m } => {
                if w.is_zero() {
                    Some(0)
                } else {
                    m.to_u64()
                }
            }
            Factor::Poly(r) => Some(r.iter().rposition(|v| !v.is_zero()).unwrap_or(0) as u64),
            _ => None,
        }
    }

    /// The factor of the spec tilted by θ: every ã_k picks up θ^{jk}.
    pub fn tilted(&self, theta: &Rational, j: usize) -> Factor {
        let t = pow(theta, j as u64);
        match self {
            Factor::Exp(c) => Factor::Exp(c * &t),
            Factor::Geometric { w, m } => Factor::Geometric { w: w * &t, m: m.clone() },
            Factor::Binomial { w, m } => Factor::Binomial { w: w * &t, m: m.clone() },
            Factor::Poly(r) => Factor::Poly(
                r.iter()
                    .enumerate()
                    .map(|(k, v)| v * pow(&t, k as u64))
                    .collect(),
            ),
        }
    }

    /// S̃^(j)(ρ), exact except for the exponential case.
    pub fn eval(&self, rho: &Rational, j: usize) -> Result<Number> {
        let x = pow(rho, j as u64);
        match self {
            Factor::Exp(c) => Ok(Number::Float(ratio_to_f64(&(c * x)).exp())),
            Factor::Geometric { w, m } => {
                if m.is_zero() {
                    return Ok(Number::Exact(Rational::one()));
                }
                let base = Rational::one() - w * x;
                if !base.is_positive() {
                    return Err(Error::Domain(format!(
                        "S^({j}) diverges at ρ = {}: ρ is at or beyond the radius",
                        crate::arith::format_rational(rho)
                    )));
                }
                let e = m.to_u64().ok_or_else(|| Error::Domain("multiplicity too large".into()))?;
                Ok(Number::Exact(pow(&base, e).recip()))
            }
            Factor::Binomial { w, m } => {
                let e = m.to_u64().ok_or_else(|| Error::Domain("multiplicity too large".into()))?;
                Ok(Number::Exact(pow(&(Rational::one() + w * x), e)))
            }
            Factor::Poly(r) => {
                let mut acc = Rational::zero();
                let mut xp = Rational::one();
                for v in r {
                    acc += v * &xp;
                    xp *= &x;
                }
                Ok(Number::Exact(acc))
            }
        }
    }
}

/// Floating counterpart of [`Factor`] with logarithmic magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorF64 {
    /// exp(e^{ln_c}·x^j); `ln_c = -inf` means the constant 1.
    Exp { ln_c: f64 },
    Geometric { ln_w: f64, m: f64 },
    Binomial { ln_w: f64, m: f64 },
    /// ln r_k.
    Poly(Vec<f64>),
}

impl FactorF64 {
    pub fn ln_weight(&self, k: u64) -> f64 {
        match self {
            FactorF64::Exp { ln_c } => {
                if k == 0 {
                    0.0
                } else {
                    k as f64 * ln_c - ln_factorial(k)
                }
            }
            FactorF64::Geometric { ln_w, m } => {
                if k == 0 {
                    0.0
                } else if *m == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    ln_multichoose(*m, k) + k as f64 * ln_w
                }
            }
            FactorF64::Binomial { ln_w, m } => {
                if k == 0 {
                    0.0
                } else {
                    ln_binomial(*m, k) + k as f64 * ln_w
                }
            }
            FactorF64::Poly(r) => r.get(k as usize).copied().unwrap_or(f64::NEG_INFINITY),
        }
    }

    pub fn tilted(&self, ln_theta: f64, j: usize) -> FactorF64 {
        let s = ln_theta * j as f64;
        match self {
            FactorF64::Exp { ln_c } => FactorF64::Exp { ln_c: ln_c + s },
            FactorF64::Geometric { ln_w, m } => FactorF64::Geometric { ln_w: ln_w + s, m: *m },
            FactorF64::Binomial { ln_w, m } => FactorF64::Binomial { ln_w: ln_w + s, m: *m },
            FactorF64::Poly(r) => FactorF64::Poly(
                r.iter().enumerate().map(|(k, v)| v + s * k as f64).collect(),
            ),
        }
    }
}

impl From<&Factor> for FactorF64 {
    fn from(f: &Factor) -> Self {
        match f {
            Factor::Exp(c) => FactorF64::Exp { ln_c: ln_ratio(c) },
            Factor::Geometric { w, m } => FactorF64::Geometric {
                ln_w: ln_ratio(w),
                m: m.to_f64().unwrap_or(f64::INFINITY),
            },
            Factor::Binomial { w, m } => FactorF64::Binomial {
                ln_w: ln_ratio(w),
                m: m.to_f64().unwrap_or(f64::INFINITY),
            },
            Factor::Poly(r) => FactorF64::Poly(r.iter().map(ln_ratio).collect()),
        }
    }
}

/// Anything that supplies the scaled component weights of a multiplicative
/// measure, factor by factor.
pub trait ScaledWeights {
    fn family(&self) -> Family;

    fn factor(&self, j: usize) -> Result<Factor>;

    fn factor_f64(&self, j: usize) -> Result<FactorF64>;

    /// `Some(s)` when every factor is Geometric or Binomial with w = s^j,
    /// so that g̃(x) = G(s·x) for an integral product G.
    fn x_scale(&self) -> Option<Rational> {
        None
    }

    /// ã_k^(j); equals 1 at k = 0.
    fn scaled_weight(&self, j: usize, k: u64) -> Result<Rational> {
        if k == 0 {
            return Ok(Rational::one());
        }
        Ok(self.factor(j)?.weight(k))
    }
}

/// A validated structure specification.
#[derive(Clone)]
pub struct WeightSpec {
    family: Family,
    params: ParamGen,
    p: Option<Rational>,
    limits: WorkLimits,
    cache: Arc<Mutex<Vec<Number>>>,
}

impl PartialEq for WeightSpec {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.params == other.params && self.p == other.p
    }
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSpec")
            .field("family", &self.family)
            .field("params", &self.params)
            .field("p", &self.p)
            .finish()
    }
}

impl WeightSpec {
    pub fn new(family: Family, params: ParamGen, p: Option<Rational>) -> Result<Self> {
        let spec = WeightSpec {
            family,
            params,
            p,
            limits: WorkLimits::from_env().unwrap_or_default(),
            cache: Arc::new(Mutex::new(Vec::new())),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_limits(mut self, limits: WorkLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn assembly(preset: Preset) -> Result<Self> {
        Self::new(Family::Assembly, ParamGen::Preset(preset), None)
    }

    pub fn multiset(preset: Preset, p: Rational) -> Result<Self> {
        Self::new(Family::Multiset, ParamGen::Preset(preset), Some(p))
    }

    pub fn selection(preset: Preset, p: Rational) -> Result<Self> {
        Self::new(Family::Selection, ParamGen::Preset(preset), Some(p))
    }

    pub fn custom(rows: Vec<Vec<Rational>>, tail: TailRule) -> Result<Self> {
        Self::new(Family::Custom, ParamGen::Rows { rows, tail }, None)
    }

    pub fn params(&self) -> &ParamGen {
        &self.params
    }

    pub fn p(&self) -> Option<&Rational> {
        self.p.as_ref()
    }

    pub fn limits(&self) -> &WorkLimits {
        &self.limits
    }

    /// Multiset with p = 1 is accepted as a counting device: scaled
    /// weights are the structure counts, but no probability law exists.
    pub fn is_formal(&self) -> bool {
        self.family == Family::Multiset && self.p.as_ref().is_some_and(|p| p.is_one())
    }

    /// True when every parameter is a rational, so exact pipelines apply.
    pub fn is_exact(&self) -> bool {
        match (&self.params, self.family) {
            (ParamGen::RegularlyVarying { alpha, .. }, Family::Assembly) => alpha.is_integer(),
            _ => true,
        }
    }

    fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        match self.family {
            Family::Assembly | Family::Custom => {
                if self.p.is_some() {
                    return err(&format!("p is not used by the {} family", self.family));
                }
            }
            Family::Multiset => match &self.p {
                None => return err("multiset requires p"),
                Some(p) if !p.is_positive() || *p > int(1) => {
                    return err("p must satisfy 0<p<1");
                }
                _ => {}
            },
            Family::Selection => match &self.p {
                None => return err("selection requires p"),
                Some(p) if !p.is_positive() => return err("p must satisfy p>0"),
                _ => {}
            },
        }
        match (&self.params, self.family) {
            (ParamGen::Rows { rows, .. }, Family::Custom) => {
                if rows.is_empty() {
                    return err("custom family needs at least one row");
                }
                for (i, row) in rows.iter().enumerate() {
                    match row.first() {
                        Some(w0) if w0.is_positive() => {}
                        _ => return err(&format!("row {} needs w_0 > 0", i + 1)),
                    }
                    if row.iter().any(|w| w.is_negative()) {
                        return err(&format!("row {} has a negative weight", i + 1));
                    }
                }
            }
            (ParamGen::Rows { .. }, _) => return err("row tables belong to the custom family"),
            (_, Family::Custom) => return err("the custom family takes a row table"),
            (ParamGen::Preset(preset), fam) => {
                preset.validate()?;
                let want_assembly = fam == Family::Assembly;
                if preset.generates_assembly_weights() != want_assembly {
                    return err(&format!(
                        "preset {} does not generate {} parameters",
                        preset.name(),
                        fam
                    ));
                }
            }
            (ParamGen::RegularlyVarying { c, y, .. }, _) => {
                if !c.is_positive() || !y.is_positive() {
                    return err("rv(c, alpha, y) needs c > 0 and y > 0");
                }
            }
            (ParamGen::Table { values, .. }, fam) => {
                if values.is_empty() {
                    return err("table generator needs at least one value");
                }
                for (i, v) in values.iter().enumerate() {
                    let ok = if fam == Family::Assembly {
                        v.is_positive()
                    } else {
                        v.is_integer() && *v >= int(1)
                    };
                    if !ok {
                        return err(&format!(
                            "table entry {} must be {}",
                            i + 1,
                            if fam == Family::Assembly {
                                "a positive rational"
                            } else {
                                "an integer ≥ 1"
                            }
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// a_j for assemblies or m_j for multisets/selections, memoised per j.
    pub fn param(&self, j: usize) -> Result<Number> {
        if j == 0 {
            return Err(Error::Precondition("component index j starts at 1".into()));
        }
        if let ParamGen::Table { values, tail } = &self.params {
            return Ok(match tail.pick(values, j)? {
                Some(v) => Number::Exact(v.clone()),
                None => Number::Exact(Rational::zero()),
            });
        }
        if let ParamGen::Rows { .. } = &self.params {
            return Err(Error::Precondition("custom rows carry no scalar parameter".into()));
        }
        let mut cache = self.cache.lock().expect("parameter cache poisoned");
        while cache.len() < j {
            let next = self.compute_param(cache.len() + 1, &cache)?;
            cache.push(next);
        }
        Ok(cache[j - 1].clone())
    }

    fn compute_param(&self, j: usize, earlier: &[Number]) -> Result<Number> {
        let jr = int(j as i64);
        let exact = |r: Rational| Ok(Number::Exact(r));
        let count = |x: Number| -> Result<Number> {
            Ok(match x {
                Number::Exact(r) => Number::Exact(Rational::from_integer(
                    round_half_up(&r).max(BigInt::one()),
                )),
                Number::Float(v) => {
                    if !v.is_finite() {
                        return Err(Error::Domain(format!("m_{j} overflows")));
                    }
                    let r = Rational::from_float(v.round().max(1.0))
                        .ok_or_else(|| Error::Domain(format!("m_{j} is not finite")))?;
                    Number::Exact(r)
                }
            })
        };
        match &self.params {
            ParamGen::Preset(preset) => match preset {
                Preset::Permutations => exact(jr.recip()),
                Preset::Ewens(t) => exact(t / jr),
                Preset::SetPartitions => exact(Rational::new(BigInt::one(), factorial(j as u64))),
                Preset::ForestsLabelled => exact(
                    Rational::from_integer(BigInt::from(j).pow(j as u32 - 1))
                        / Rational::from_integer(factorial(j as u64)),
                ),
                Preset::Graphs => exact(connected_graph_weight(j, earlier)),
                Preset::OscillatingDemo => {
                    if j % 2 == 1 {
                        exact(jr.recip())
                    } else {
                        exact((int(1) + pow(&int(2), j as u64 + 1)) / jr)
                    }
                }
                Preset::IntegerPartitions | Preset::DistinctParts => exact(int(1)),
                Preset::PlanePartitions => exact(jr),
                Preset::Bose(alpha) | Preset::Fermi(alpha) => {
                    if alpha.is_integer() {
                        let e = alpha.to_integer().to_i64().unwrap_or(0);
                        count(Number::Exact(powi(&jr, e)))
                    } else {
                        count(Number::Float((j as f64).powf(ratio_to_f64(alpha))))
                    }
                }
                Preset::IdealGas(d) => exact(Rational::from_integer(BigInt::from(
                    lattice_representations(j as u64, *d, &self.limits)?,
                ))),
                Preset::MappingPatterns(b) => {
                    count(Number::Exact(powi(b, -(j as i64)) / (int(2) * jr)))
                }
            },
            ParamGen::RegularlyVarying { c, alpha, y } => {
                let value = if alpha.is_integer() {
                    let e = alpha.to_integer().to_i64().unwrap_or(0);
                    Number::Exact(c * pow(y, j as u64) * powi(&jr, e))
                } else {
                    let ln = ln_ratio(c) + j as f64 * ln_ratio(y)
                        + ratio_to_f64(alpha) * (j as f64).ln();
                    Number::Float(ln.exp())
                };
                if self.family == Family::Assembly {
                    Ok(value)
                } else {
                    count(value)
                }
            }
            ParamGen::Table { .. } | ParamGen::Rows { .. } => unreachable!("handled by param"),
        }
    }

    fn multiplicity(&self, j: usize) -> Result<BigInt> {
        match self.param(j)? {
            Number::Exact(r) if r.is_integer() && !r.is_negative() => Ok(r.to_integer()),
            other => Err(Error::InvalidSpec(format!(
                "m_{j} = {other} is not a nonnegative integer"
            ))),
        }
    }

    fn custom_row(&self, j: usize) -> Result<Option<&Vec<Rational>>> {
        match &self.params {
            ParamGen::Rows { rows, tail } => tail.pick(rows, j),
            _ => unreachable!("custom family always carries rows"),
        }
    }

    /// The sequence whose ratio behaviour drives the convergence corollaries:
    /// a_j for assemblies, m_j for multisets and selections.
    pub fn parameter_sequence(&self, upto: usize) -> Result<Vec<f64>> {
        (1..=upto).map(|j| self.param(j).map(|v| v.to_f64())).collect()
    }

    /// a_k^(j) = P(Z_j = k) as a float.
    pub fn unscaled_weight(&self, j: usize, k: u64) -> Result<f64> {
        match self.family {
            Family::Assembly => {
                let a = self.param(j)?.to_f64();
                if a == 0.0 {
                    return Ok(if k == 0 { 1.0 } else { 0.0 });
                }
                Ok((-a + k as f64 * a.ln() - ln_factorial(k)).exp())
            }
            Family::Multiset | Family::Selection => {
                if self.is_formal() {
                    return Err(Error::Domain(
                        "p = 1 is a counting normalisation; P(Z_j = k) is undefined".into(),
                    ));
                }
                let w = pow(self.p.as_ref().expect("validated"), j as u64);
                let m = self.multiplicity(j)?.to_f64().unwrap_or(f64::INFINITY);
                let ln_w = ln_ratio(&w);
                if self.family == Family::Multiset {
                    let ln_a0 = m * (-ratio_to_f64(&w)).ln_1p();
                    Ok((ln_a0 + ln_multichoose(m, k) + k as f64 * ln_w).exp())
                } else {
                    let ln_norm = m * ratio_to_f64(&w).ln_1p();
                    Ok((ln_binomial(m, k) + k as f64 * ln_w - ln_norm).exp())
                }
            }
            Family::Custom => {
                let Some(row) = self.custom_row(j)? else {
                    return Ok(if k == 0 { 1.0 } else { 0.0 });
                };
                let total: Rational = row.iter().sum();
                Ok(row
                    .get(k as usize)
                    .map(|w| ratio_to_f64(&(w / &total)))
                    .unwrap_or(0.0))
            }
        }
    }

    /// E Z_j, exact whenever the parameters are.
    pub fn mean_z(&self, j: usize) -> Result<Number> {
        match self.family {
            Family::Assembly => self.param(j),
            Family::Multiset | Family::Selection => {
                let w = pow(self.p.as_ref().expect("validated"), j as u64);
                let m = Rational::from_integer(self.multiplicity(j)?);
                if self.family == Family::Multiset {
                    if w.is_one() {
                        return Err(Error::Domain("E Z_j is infinite at p = 1".into()));
                    }
                    Ok(Number::Exact(m * &w / (int(1) - &w)))
                } else {
                    Ok(Number::Exact(m * &w / (int(1) + &w)))
                }
            }
            Family::Custom => {
                let Some(row) = self.custom_row(j)? else {
                    return Ok(Number::Exact(Rational::zero()));
                };
                let total: Rational = row.iter().sum();
                let first: Rational = row
                    .iter()
                    .enumerate()
                    .map(|(k, w)| w * int(k as i64))
                    .sum();
                Ok(Number::Exact(first / total))
            }
        }
    }
}

impl ScaledWeights for WeightSpec {
    fn family(&self) -> Family {
        self.family
    }

    fn x_scale(&self) -> Option<Rational> {
        match self.family {
            Family::Multiset | Family::Selection => self.p.clone(),
            _ => None,
        }
    }

    fn factor(&self, j: usize) -> Result<Factor> {
        match self.family {
            Family::Assembly => match self.param(j)? {
                Number::Exact(a) => Ok(Factor::Exp(a)),
                Number::Float(_) => Err(Error::NotExact(format!(
                    "a_{j} comes from a non-integer exponent; use float mode"
                ))),
            },
            Family::Multiset => Ok(Factor::Geometric {
                w: pow(self.p.as_ref().expect("validated"), j as u64),
                m: self.multiplicity(j)?,
            }),
            Family::Selection => Ok(Factor::Binomial {
                w: pow(self.p.as_ref().expect("validated"), j as u64),
                m: self.multiplicity(j)?,
            }),
            Family::Custom => Ok(match self.custom_row(j)? {
                Some(row) => {
                    let w0 = row[0].clone();
                    Factor::Poly(row.iter().map(|w| w / &w0).collect())
                }
                None => Factor::Poly(vec![Rational::one()]),
            }),
        }
    }

    fn factor_f64(&self, j: usize) -> Result<FactorF64> {
        if self.family == Family::Assembly {
            if let Number::Float(a) = self.param(j)? {
                return Ok(FactorF64::Exp { ln_c: a.ln() });
            }
        }
        Ok(FactorF64::from(&self.factor(j)?))
    }
}

/// a_j = C_j / j! with C_j the number of connected labelled graphs on j
/// vertices, from C_n = 2^{C(n,2)} - Σ_{k<n} C(n-1,k-1)·C_k·2^{C(n-k,2)}.
fn connected_graph_weight(j: usize, earlier: &[Number]) -> Rational {
    let edges = |n: usize| BigInt::one() << (n * n.saturating_sub(1) / 2);
    let connected: Vec<BigInt> = earlier
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let a = a.exact().expect("graph weights are exact");
            (a * Rational::from_integer(factorial(i as u64 + 1))).to_integer()
        })
        .collect();
    let mut c = edges(j);
    for k in 1..j {
        c -= binomial(&BigInt::from(j - 1), (k - 1) as u64) * &connected[k - 1] * edges(j - k);
    }
    Rational::new(c, factorial(j as u64))
}

/// r_d(j): the number of (l_1, ..., l_d) ∈ Z^d with Σ l_s² = j.
pub fn lattice_representations(j: u64, d: u32, limits: &WorkLimits) -> Result<u64> {
    if d == 0 {
        return Err(Error::Precondition("dimension d must be ≥ 1".into()));
    }
    let side = 2 * j.isqrt() + 1;
    let work = (side as f64).powi(d as i32);
    if work > limits.lattice_work as f64 {
        return Err(Error::WorkLimit(format!(
            "r_{d}({j}) needs a lattice box of {work:.3e} points (limit {})",
            limits.lattice_work
        )));
    }
    fn count(rem: u64, dims: u32) -> u64 {
        if dims == 1 {
            let r = rem.isqrt();
            return match (r * r == rem, rem) {
                (true, 0) => 1,
                (true, _) => 2,
                _ => 0,
            };
        }
        let top = rem.isqrt();
        let mut total = count(rem, dims - 1);
        for l in 1..=top {
            total += 2 * count(rem - l * l, dims - 1);
        }
        total
    }
    Ok(count(j, d))
}

/// Convenience for tests and presets: the oscillating example's a_j.
pub fn oscillating_weight(j: usize) -> Rational {
    let jr = int(j as i64);
    if j % 2 == 1 {
        jr.recip()
    } else {
        (int(1) + pow(&int(2), j as u64 + 1)) / jr
    }
}

/// Bi(m, w/(1+w)) pmf at k, computed directly; used to cross-check ã.
pub fn selection_pmf(m: u64, w: &Rational, k: u64) -> Rational {
    let q = w / (int(1) + w);
    let binom = Rational::from_integer(binomial(&BigInt::from(m), k));
    binom * pow(&q, k) * pow(&(int(1) - &q), m - k.min(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::frac;

    fn perms() -> WeightSpec {
        WeightSpec::assembly(Preset::Permutations).unwrap()
    }

    #[test]
    fn scaled_weight_examples() {
        assert_eq!(perms().scaled_weight(1, 2).unwrap(), frac(1, 2));
        let ms = WeightSpec::multiset(Preset::IntegerPartitions, frac(1, 2)).unwrap();
        assert_eq!(ms.scaled_weight(2, 1).unwrap(), frac(1, 4));
        let sel = WeightSpec::new(
            Family::Selection,
            ParamGen::Table { values: vec![int(3)], tail: TailRule::RepeatLast },
            Some(frac(1, 2)),
        )
        .unwrap();
        // Direct pmf ratio P(k=2)/P(k=0) for Bi(3, (1/2)/(3/2)).
        let direct = selection_pmf(3, &frac(1, 2), 2) / selection_pmf(3, &frac(1, 2), 0);
        assert_eq!(direct, frac(3, 4));
        assert_eq!(sel.scaled_weight(1, 2).unwrap(), direct);
        assert_eq!(sel.scaled_weight(1, 4).unwrap(), int(0));
        for spec in [perms(), ms, sel] {
            for j in 1..6 {
                assert_eq!(spec.scaled_weight(j, 0).unwrap(), int(1));
            }
        }
    }

    #[test]
    fn unscaled_weight_examples() {
        assert!((perms().unscaled_weight(1, 0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        let ms = WeightSpec::multiset(Preset::IntegerPartitions, frac(1, 2)).unwrap();
        assert!((ms.unscaled_weight(1, 0).unwrap() - 0.5).abs() < 1e-15);
        let sel = WeightSpec::selection(Preset::DistinctParts, int(1)).unwrap();
        assert!((sel.unscaled_weight(1, 1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unscaled_weights_sum_to_one() {
        let specs = [
            WeightSpec::assembly(Preset::Ewens(int(3))).unwrap(),
            WeightSpec::multiset(Preset::PlanePartitions, frac(2, 3)).unwrap(),
            WeightSpec::selection(Preset::Fermi(int(2)), frac(3, 2)).unwrap(),
            WeightSpec::custom(vec![vec![int(1), int(2), int(1)]], TailRule::RepeatLast)
                .unwrap(),
        ];
        for spec in &specs {
            for j in 1..5 {
                let mut total = 0.0;
                for k in 0..2000 {
                    let t = spec.unscaled_weight(j, k).unwrap();
                    total += t;
                    if k > 10 && t < 1e-18 {
                        break;
                    }
                }
                assert!((total - 1.0).abs() < 1e-12, "{spec:?} j={j} total={total}");
            }
        }
    }

    #[test]
    fn mean_z_examples() {
        let ew = WeightSpec::assembly(Preset::Ewens(int(2))).unwrap();
        assert_eq!(ew.mean_z(4).unwrap(), Number::Exact(frac(1, 2)));
        let ms = WeightSpec::multiset(Preset::IntegerPartitions, frac(1, 2)).unwrap();
        // NB(1, 1/2) mean computed from the pmf: Σ k (1/2)^{k+1} = 1.
        let direct: f64 = (0..200).map(|k| k as f64 * 0.5f64.powi(k + 1)).sum();
        assert_eq!(ms.mean_z(1).unwrap(), Number::Exact(int(1)));
        assert!((direct - 1.0).abs() < 1e-12);
        let sel = WeightSpec::new(
            Family::Selection,
            ParamGen::Table { values: vec![int(2)], tail: TailRule::RepeatLast },
            Some(int(1)),
        )
        .unwrap();
        assert_eq!(sel.mean_z(1).unwrap(), Number::Exact(int(1)));
    }

    #[test]
    fn lattice_counts() {
        let lim = WorkLimits::default();
        assert_eq!(lattice_representations(4, 1, &lim).unwrap(), 2);
        assert_eq!(lattice_representations(3, 1, &lim).unwrap(), 0);
        assert_eq!(lattice_representations(1, 2, &lim).unwrap(), 4);
        assert_eq!(lattice_representations(0, 3, &lim).unwrap(), 1);
        assert_eq!(lattice_representations(5, 2, &lim).unwrap(), 8);
        for j in 0..=100u64 {
            let r = j.isqrt();
            let expected = if r * r == j { if j == 0 { 1 } else { 2 } } else { 0 };
            assert_eq!(lattice_representations(j, 1, &lim).unwrap(), expected);
        }
        let tight = WorkLimits { lattice_work: 10, ..WorkLimits::default() };
        assert!(matches!(
            lattice_representations(100, 3, &tight),
            Err(Error::WorkLimit(_))
        ));
    }

    #[test]
    fn oscillating_preset_matches_definition() {
        let spec = WeightSpec::assembly(Preset::OscillatingDemo).unwrap();
        for j in 1..30 {
            let expect = if j % 2 == 1 {
                frac(1, j as i64)
            } else {
                frac(1, j as i64) + pow(&int(2), j as u64 + 1) / int(j as i64)
            };
            assert_eq!(spec.param(j).unwrap(), Number::Exact(expect));
        }
    }

    #[test]
    fn graph_weights_count_connected_graphs() {
        let spec = WeightSpec::assembly(Preset::Graphs).unwrap();
        let counts = [1u64, 1, 4, 38, 728, 26704];
        for (i, c) in counts.iter().enumerate() {
            let j = i + 1;
            let want = Rational::new(BigInt::from(*c), factorial(j as u64));
            assert_eq!(spec.param(j).unwrap(), Number::Exact(want));
        }
    }

    #[test]
    fn table_tail_rules() {
        let mk = |tail| {
            WeightSpec::new(
                Family::Assembly,
                ParamGen::Table { values: vec![int(2), int(3)], tail },
                None,
            )
            .unwrap()
        };
        assert_eq!(mk(TailRule::Zero).param(5).unwrap(), Number::Exact(int(0)));
        assert_eq!(mk(TailRule::RepeatLast).param(5).unwrap(), Number::Exact(int(3)));
        assert!(matches!(
            mk(TailRule::ErrorBeyond).scaled_weight(3, 1),
            Err(Error::ParameterIndex(3))
        ));
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(WeightSpec::multiset(Preset::IntegerPartitions, frac(3, 2)).is_err());
        assert!(WeightSpec::multiset(Preset::Permutations, frac(1, 2)).is_err());
        assert!(WeightSpec::assembly(Preset::IntegerPartitions).is_err());
        assert!(WeightSpec::selection(Preset::DistinctParts, int(0)).is_err());
        assert!(WeightSpec::custom(vec![vec![int(0), int(1)]], TailRule::Zero).is_err());
        assert!(WeightSpec::multiset(Preset::IntegerPartitions, int(1)).unwrap().is_formal());
    }

    #[test]
    fn regularly_varying_generator() {
        let rv = WeightSpec::new(
            Family::Assembly,
            ParamGen::RegularlyVarying { c: int(1), alpha: int(-1), y: int(1) },
            None,
        )
        .unwrap();
        assert_eq!(rv.param(4).unwrap(), Number::Exact(frac(1, 4)));
        let frac_alpha = WeightSpec::new(
            Family::Assembly,
            ParamGen::RegularlyVarying { c: int(1), alpha: frac(1, 2), y: int(1) },
            None,
        )
        .unwrap();
        assert!(!frac_alpha.is_exact());
        assert!(matches!(frac_alpha.factor(2), Err(Error::NotExact(_))));
        assert!((frac_alpha.param(4).unwrap().to_f64() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mapping_patterns_round_to_at_least_one() {
        let spec = WeightSpec::multiset(Preset::MappingPatterns(frac(1, 2)), frac(1, 4)).unwrap();
        // b^{-j}/(2j): 1, 1, 4/3, 2, 16/5, 16/3 -> rounded, floored at 1.
        let want = [1, 1, 1, 2, 3, 5];
        for (i, w) in want.iter().enumerate() {
            assert_eq!(spec.param(i + 1).unwrap(), Number::Exact(int(*w)));
        }
    }

    #[test]
    fn factor_eval_closed_forms() {
        let ms = WeightSpec::multiset(Preset::IntegerPartitions, frac(1, 2)).unwrap();
        let f = ms.factor(1).unwrap();
        assert_eq!(f.eval(&frac(1, 2), 1).unwrap(), Number::Exact(frac(4, 3)));
        assert!(f.eval(&int(2), 1).is_err());
        for spec in [perms(), ms] {
            for j in 1..4 {
                assert_eq!(spec.factor(j).unwrap().eval(&int(0), j).unwrap().to_f64(), 1.0);
            }
        }
        let e = perms().factor(1).unwrap().eval(&int(1), 1).unwrap().to_f64();
        assert!((e - std::f64::consts::E).abs() < 1e-12);
    }
}
