//! Ratio diagnostics for coefficient sequences, the q^(l) comparison,
//! Schur's ratio lemma, the star transform and the convergence classifier.
//!
//! Every verdict here is a finite-data heuristic: membership in RT_ρ is a
//! limit property, so reports always carry the raw ratios.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::{int, ln_ratio, multichoose, pow, ratio_to_f64, Rational};
use crate::error::{Error, Result};
use crate::logseries::LogTables;
use crate::series::{series_exp, ScaledTables, Series};
use crate::weights::{Factor, FactorF64, Family, ScaledWeights, WeightSpec};

pub const DEFAULT_WINDOW: usize = 25;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_N: usize = 400;
pub const DEFAULT_FLOAT_N: usize = 5000;
/// Scale floor in the relative fluctuation test, so that ρ̂ ≈ 0 is judged
/// on an absolute scale.
pub const RHO_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Rt(f64),
    Oscillating,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Rt(r) => write!(f, "RT({r})"),
            Verdict::Oscillating => write!(f, "oscillating"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    /// r_n = d_{n-1}/d_n for n = 1..=N; `None` where d_n = 0.
    pub ratios: Vec<Option<f64>>,
    pub window: usize,
    pub tol: f64,
    /// 1 for plain ratios, 2 when zeros force d_{n-2}/d_n (reported as its root).
    pub lag: usize,
    pub estimate: Option<f64>,
    pub fluctuation: f64,
    /// Estimates along even and odd n.
    pub subseq_limits: Option<(f64, f64)>,
    pub verdict: Verdict,
}

/// ln d_n for an exact nonnegative series; `-inf` marks zeros.
pub fn ln_coeffs_exact(d: &Series) -> Result<Vec<f64>> {
    d.coeffs()
        .iter()
        .map(|c| {
            if c.is_negative() {
                Err(Error::Domain("ratio diagnostics need nonnegative coefficients".into()))
            } else {
                Ok(ln_ratio(c))
            }
        })
        .collect()
}

fn tolerance(tol: f64, scale: f64) -> f64 {
    tol * scale.abs().max(RHO_FLOOR)
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Ratio test on ln-coefficients ln d_0, ..., ln d_N.
pub fn ratio_report(ln_d: &[f64], window: usize, tol: f64) -> Result<RatioReport> {
    if window == 0 {
        return Err(Error::Precondition("window must be ≥ 1".into()));
    }
    let n_max = ln_d.len().saturating_sub(1);
    let ratio = |a: f64, b: f64| -> Option<f64> {
        (b.is_finite()).then(|| if a.is_finite() { (a - b).exp() } else { 0.0 })
    };
    let ratios: Vec<Option<f64>> = (1..=n_max).map(|n| ratio(ln_d[n - 1], ln_d[n])).collect();
    let recent = &ln_d[n_max.saturating_sub(2 * window)..];
    let lag = if recent.iter().any(|v| !v.is_finite()) { 2 } else { 1 };
    // (n, value) pairs usable for estimation.
    let usable: Vec<(usize, f64)> = (lag..=n_max)
        .filter(|&n| ln_d[n - lag].is_finite() && ln_d[n].is_finite())
        .map(|n| (n, ((ln_d[n - lag] - ln_d[n]) / lag as f64).exp()))
        .collect();
    if usable.len() < 2 * window {
        return Err(Error::InsufficientData(format!(
            "{} usable ratios, need at least 2W = {}",
            usable.len(),
            2 * window
        )));
    }
    let last: Vec<f64> = usable[usable.len() - window..].iter().map(|p| p.1).collect();
    let estimate = *last.last().expect("window is nonempty");
    let fluctuation = spread(&last);
    let parity = |even: bool| -> Vec<f64> {
        let vals: Vec<f64> = usable.iter().filter(|p| (p.0 % 2 == 0) == even).map(|p| p.1).collect();
        vals[vals.len().saturating_sub(window)..].to_vec()
    };
    let (even, odd) = (parity(true), parity(false));
    let subseq_limits = match (even.last(), odd.last()) {
        (Some(e), Some(o)) => Some((*e, *o)),
        _ => None,
    };
    let verdict = if fluctuation <= tolerance(tol, estimate) {
        Verdict::Rt(if estimate <= tol * RHO_FLOOR { 0.0 } else { estimate })
    } else {
        match subseq_limits {
            Some((e, o))
                if spread(&even) <= tolerance(tol, e)
                    && spread(&odd) <= tolerance(tol, o)
                    && (e - o).abs() > tolerance(tol, e.max(o)) =>
            {
                Verdict::Oscillating
            }
            _ => Verdict::Inconclusive,
        }
    };
    Ok(RatioReport {
        ratios,
        window,
        tol,
        lag,
        estimate: Some(estimate),
        fluctuation,
        subseq_limits,
        verdict,
    })
}

impl RatioReport {
    /// CSV with columns n, ratio (empty where undefined).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "ratio"])?;
        for (i, r) in self.ratios.iter().enumerate() {
            w.write_record([(i + 1).to_string(), r.map(|v| format!("{v:e}")).unwrap_or_default()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// ln S̃^(j)(ρ) in floats; `+inf` at or past the radius.
pub fn ln_factor_at(f: &FactorF64, rho: f64, j: usize) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let lx = j as f64 * rho.ln();
    match f {
        FactorF64::Exp { ln_c } => (ln_c + lx).exp(),
        FactorF64::Geometric { ln_w, m } => {
            if *m == 0.0 {
                return 0.0;
            }
            let t = (ln_w + lx).exp();
            // Within rounding of the radius counts as on it.
            if t >= 1.0 - 1e-12 {
                f64::INFINITY
            } else {
                -m * (-t).ln_1p()
            }
        }
        FactorF64::Binomial { ln_w, m } => m * (ln_w + lx).exp().ln_1p(),
        FactorF64::Poly(r) => {
            let terms: Vec<f64> = r.iter().enumerate().map(|(k, v)| v + k as f64 * lx).collect();
            let hi = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi + terms.iter().map(|t| (t - hi).exp()).sum::<f64>().ln()
        }
    }
}

/// q^(l) in closed form, 1/Π_{j≤l} S̃^(j)(ρ); 0 past the radius or at ρ = ∞.
pub fn q_l_closed<W: ScaledWeights + ?Sized>(weights: &W, l: usize, rho: f64) -> Result<f64> {
    if rho.is_infinite() {
        return Ok(0.0);
    }
    if rho < 0.0 {
        return Err(Error::Domain("ρ must be ≥ 0".into()));
    }
    let mut ln_total = 0.0;
    for j in 1..=l {
        ln_total += ln_factor_at(&weights.factor_f64(j)?, rho, j);
    }
    Ok((-ln_total).exp())
}

/// q^(l) in exact closed form for rational ρ inside the tilt domain.
pub fn q_l_closed_exact<W: ScaledWeights + ?Sized>(weights: &W, l: usize, rho: &Rational) -> Result<Option<Rational>> {
    let mut acc = Rational::one();
    for j in 1..=l {
        let factor = weights.factor(j)?;
        if let Factor::Geometric { w, m } = &factor {
            // At the boundary the product (1 - w ρ^j)^m vanishes rather than diverging.
            let base = Rational::one() - w * pow(rho, j as u64);
            if !base.is_positive() && !m.is_zero() {
                return Ok(Some(Rational::zero()));
            }
        }
        match factor.eval(rho, j)?.exact() {
            Some(s) => acc /= s,
            None => return Ok(None),
        }
    }
    Ok(Some(acc))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QlEmpirical {
    pub l: usize,
    /// T̃_n^(l)/c̃_n for n = 0..=N; `None` where c̃_n = 0.
    pub values: Vec<Option<f64>>,
    /// Mean over the last W defined values.
    pub window_average: f64,
}

fn window_mean(values: &[Option<f64>], window: usize) -> f64 {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    let tail = &defined[defined.len().saturating_sub(window)..];
    if tail.is_empty() {
        return f64::NAN;
    }
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// T̃_n^(l)/c̃_n from exact tables.
pub fn q_l_empirical(tables: &ScaledTables, l: usize, window: usize) -> Result<QlEmpirical> {
    let tail = tables.tail(l)?;
    let values: Vec<Option<f64>> = (0..=tables.order())
        .map(|n| {
            let c = tables.c_tilde.coeff(n);
            (!c.is_zero()).then(|| ratio_to_f64(&(tail.coeff(n) / c)))
        })
        .collect();
    let window_average = window_mean(&values, window);
    Ok(QlEmpirical { l, values, window_average })
}

/// T̃_n^(l)/c̃_n from log-space tables.
pub fn q_l_empirical_log(tables: &LogTables, l: usize, window: usize) -> Result<QlEmpirical> {
    let tail = tables.t_tilde.get(&l).ok_or(Error::MissingTail(l))?;
    let values: Vec<Option<f64>> = (0..=tables.c_tilde.order())
        .map(|n| {
            let c = tables.c_tilde.ln_coeff(n);
            c.is_finite().then(|| (tail.ln_coeff(n) - c).exp())
        })
        .collect();
    let window_average = window_mean(&values, window);
    Ok(QlEmpirical { l, values, window_average })
}

impl QlEmpirical {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "q_l"])?;
        for (n, v) in self.values.iter().enumerate() {
            w.write_record([n.to_string(), v.map(|x| format!("{x:e}")).unwrap_or_default()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurReport {
    /// d_n/d_n^(1) for n = 0..=N, exact.
    pub ratios: Vec<Rational>,
    pub window_average: Rational,
    pub f2_at_rho: Rational,
    pub gap: Rational,
    /// Fluctuation over the window, relative to the average.
    pub fluctuation: f64,
    /// True when the ratios settle and their average matches f2(ρ).
    pub settled: bool,
}

/// Checks d_n/d_n^(1) → f2(ρ) for f = f1·f2. `f2_at_rho` overrides the
/// truncated evaluation of f2 when a closed form is known.
pub fn schur_check(
    f1: &Series,
    f2: &Series,
    rho: &Rational,
    f2_at_rho: Option<Rational>,
    n: usize,
    window: usize,
    tol: f64,
) -> Result<SchurReport> {
    if window == 0 || window > n + 1 {
        return Err(Error::Precondition(format!("window {window} does not fit in 0..={n}")));
    }
    let f = crate::series::cauchy_product(f1, f2, n)?;
    let mut ratios = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let d1 = f1.coeff(i);
        if d1.is_zero() {
            return Err(Error::Domain(format!("f1 has a zero coefficient at n = {i}")));
        }
        ratios.push(f.coeff(i) / d1);
    }
    let tail = &ratios[n + 1 - window..];
    let window_average = tail.iter().sum::<Rational>() / int(window as i64);
    let f2_at_rho = match f2_at_rho {
        Some(v) => v,
        None => f2.truncate(n)?.eval_partial(rho),
    };
    let gap = (&window_average - &f2_at_rho).abs();
    let floats: Vec<f64> = tail.iter().map(ratio_to_f64).collect();
    let avg = ratio_to_f64(&window_average);
    let fluctuation = spread(&floats) / avg.abs().max(RHO_FLOOR);
    let settled = fluctuation <= tol && ratio_to_f64(&gap) <= tolerance(tol, ratio_to_f64(&f2_at_rho));
    Ok(SchurReport { ratios, window_average, f2_at_rho, gap, fluctuation, settled })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarTransform {
    /// m*_0 = 0, m*_1, ..., m*_N.
    pub m_star: Vec<Rational>,
    /// exp(Σ m*_j x^j) equals Π (1-(px)^j)^{-m_j} through x^N.
    pub identity_holds: bool,
}

/// m*_j = Σ_{lk=j} m_l p^{lk} / k, the coefficients of log Π (1-(px)^j)^{-m_j}.
/// `m[0]` is m_1.
pub fn star_transform(m: &[Rational], p: &Rational, n: usize) -> Result<StarTransform> {
    if m.iter().any(|v| v.is_negative()) {
        return Err(Error::Domain("star transform needs m_j ≥ 0".into()));
    }
    let mut m_star = vec![Rational::zero(); n + 1];
    for (i, ml) in m.iter().enumerate().take(n) {
        let l = i + 1;
        if ml.is_zero() {
            continue;
        }
        for k in 1..=n / l {
            m_star[l * k] += ml / int(k as i64);
        }
    }
    for (j, v) in m_star.iter_mut().enumerate().skip(1) {
        *v *= pow(p, j as u64);
    }
    let exp = series_exp(&Series::new(m_star.clone()), n)?;
    let euler = euler_product(m, p, n);
    Ok(StarTransform { identity_holds: exp == euler, m_star })
}

/// Π_{j≤N} (1-(px)^j)^{-m_j} for rational m_j ≥ 0.
pub fn euler_product(m: &[Rational], p: &Rational, n: usize) -> Series {
    let mut d = vec![Rational::zero(); n + 1];
    d[0] = Rational::one();
    for j in 1..=n.min(m.len()) {
        let mj = &m[j - 1];
        if mj.is_zero() {
            continue;
        }
        let w = pow(p, j as u64);
        let weights: Vec<Rational> = (0..=n / j).map(|k| multichoose(mj, k as u64) * pow(&w, k as u64)).collect();
        for idx in (j..=n).rev() {
            let mut acc = Rational::zero();
            for (k, wk) in weights.iter().enumerate().skip(1) {
                if k * j > idx {
                    break;
                }
                acc += wk * &d[idx - k * j];
            }
            d[idx] += acc;
        }
    }
    Series::new(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "exact" => Some(Mode::Exact),
            "float" => Some(Mode::Float),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub n: usize,
    pub window: usize,
    pub tol: f64,
    pub l_max: usize,
    pub mode: Mode,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { n: DEFAULT_N, window: DEFAULT_WINDOW, tol: DEFAULT_TOL, l_max: 3, mode: Mode::Exact }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Convergent,
    Divergent,
    Inconclusive,
}

impl Convergence {
    pub fn name(self) -> &'static str {
        match self {
            Convergence::Convergent => "convergent",
            Convergence::Divergent => "divergent",
            Convergence::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub family: Family,
    /// Estimated radius; `f64::INFINITY` for an entire g̃.
    pub rho_hat: Option<f64>,
    /// p^{-1} for multisets and selections, ∞ otherwise.
    pub threshold: f64,
    pub verdict: Convergence,
    /// Which test decided the verdict.
    pub evidence: String,
    pub parameter_report: Option<RatioReport>,
    pub c_report: Option<RatioReport>,
    /// l ↦ (empirical window average, closed form at ρ̂).
    pub q_l_table: BTreeMap<usize, (f64, f64)>,
}

fn parameter_report(spec: &WeightSpec, opts: &ClassifyOptions) -> Option<RatioReport> {
    let seq = spec.parameter_sequence(opts.n).ok()?;
    // Entry i of the report's ratios is a_{i+1}/a_{i+2}.
    let ln: Vec<f64> = seq.iter().map(|v| if *v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
    let mut report = ratio_report(&ln, opts.window, opts.tol).ok()?;
    if let Verdict::Rt(_) = report.verdict {
        // Parameter ratios typically behave like r(1 + c/n); the raw last
        // ratio of m_j = j is 1 - 1/N, which would miss RT_1 at finite N.
        if let Some(r) = extrapolate_ratio(&report, opts.window) {
            report.estimate = Some(r);
            report.verdict = Verdict::Rt(r);
        }
    }
    Some(report)
}

/// Intercept of a least-squares fit r_n ≈ r + b/n over the last `window` ratios.
fn extrapolate_ratio(report: &RatioReport, window: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = report
        .ratios
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|r| (1.0 / (i + 1) as f64, r)))
        .collect();
    let pts = &pts[pts.len().saturating_sub(window)..];
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Some(my);
    }
    let r = my - sxy / sxx * mx;
    (r.is_finite() && r >= 0.0).then_some(r)
}

/// Ratios a_{j-1}/a_j still growing proportionally: a decays faster than
/// any geometric sequence, which makes g̃ entire.
fn parameter_ratios_unbounded(report: &RatioReport) -> bool {
    let vals: Vec<f64> = report.ratios.iter().flatten().copied().collect();
    if vals.len() < 4 {
        return false;
    }
    let half = &vals[vals.len() / 2..];
    half.windows(2).all(|w| w[1] >= w[0]) && half[half.len() - 1] >= 1.5 * half[0]
}

/// Classifies a specification as convergent or divergent from finite data.
pub fn classify(spec: &WeightSpec, opts: &ClassifyOptions) -> Result<ClassificationResult> {
    let family = spec.family();
    let threshold = match family {
        Family::Multiset | Family::Selection => 1.0 / ratio_to_f64(spec.p().expect("validated")),
        _ => f64::INFINITY,
    };
    let (c_ln, q_emp) = coefficient_data(spec, opts)?;
    let c_report = ratio_report(&c_ln, opts.window, opts.tol).ok();
    let param = match family {
        Family::Custom => None,
        _ => parameter_report(spec, opts),
    };
    let param_rt = param.as_ref().and_then(|r| match r.verdict {
        Verdict::Rt(v) => Some(v),
        _ => None,
    });
    let c_verdict = c_report.as_ref().map_or(Verdict::Inconclusive, |r| r.verdict);
    let tol = opts.tol;

    let (verdict, rho_hat, evidence) = match family {
        Family::Multiset => {
            let p = 1.0 / threshold;
            match param_rt {
                Some(r) if (r - 1.0).abs() <= tolerance(tol, 1.0) => {
                    (Convergence::Divergent, Some(threshold), "parameter sequence m in RT_1".to_string())
                }
                Some(r) if r > 0.0 && r < 1.0 => {
                    (Convergence::Convergent, Some(r / p), format!("parameter sequence m in RT_{r}"))
                }
                _ => match c_verdict {
                    Verdict::Rt(r) if (r * p - 1.0).abs() <= tol => {
                        (Convergence::Divergent, Some(r), "c̃ in RT_ρ at the boundary ρ = 1/p".into())
                    }
                    Verdict::Rt(r) if r < threshold => (Convergence::Convergent, Some(r), "c̃ in RT_ρ, ρ < 1/p".into()),
                    Verdict::Rt(r) => (Convergence::Divergent, Some(r), "c̃ ratio estimate beyond 1/p".into()),
                    Verdict::Oscillating => (Convergence::Divergent, None, "c̃ ratios oscillate".into()),
                    Verdict::Inconclusive => (Convergence::Inconclusive, None, "c̃ ratios did not settle".into()),
                },
            }
        }
        Family::Selection => {
            let p = 1.0 / threshold;
            match param_rt {
                Some(r) if r > 0.0 && r <= 1.0 + tolerance(tol, 1.0) => (
                    Convergence::Convergent,
                    Some(r.min(1.0) / p),
                    format!("parameter sequence m in RT_{r}"),
                ),
                _ => match c_verdict {
                    Verdict::Rt(r) if r <= threshold * (1.0 + tol) => {
                        (Convergence::Convergent, Some(r), "c̃ in RT_ρ, ρ ≤ 1/p".into())
                    }
                    Verdict::Rt(r) => (Convergence::Divergent, Some(r), "c̃ ratio estimate beyond 1/p".into()),
                    Verdict::Oscillating => (Convergence::Divergent, None, "c̃ ratios oscillate".into()),
                    Verdict::Inconclusive => (Convergence::Inconclusive, None, "c̃ ratios did not settle".into()),
                },
            }
        }
        Family::Assembly | Family::Custom => match param_rt {
            Some(r) if r > 0.0 => (Convergence::Convergent, Some(r), format!("parameter sequence a in RT_{r}")),
            _ if param.as_ref().is_some_and(parameter_ratios_unbounded) => (
                Convergence::Divergent,
                Some(f64::INFINITY),
                "a decays super-geometrically, g̃ is entire".into(),
            ),
            _ => match c_verdict {
                Verdict::Rt(r) => (Convergence::Convergent, Some(r), "c̃ in RT_ρ".into()),
                Verdict::Oscillating => (Convergence::Divergent, None, "c̃ ratios oscillate".into()),
                Verdict::Inconclusive => (Convergence::Inconclusive, None, "c̃ ratios did not settle".into()),
            },
        },
    };

    let mut q_l_table = BTreeMap::new();
    for (l, emp) in q_emp {
        let closed = match rho_hat {
            Some(r) => q_l_closed(spec, l, r).unwrap_or(f64::NAN),
            None => f64::NAN,
        };
        q_l_table.insert(l, (emp.window_average, closed));
    }
    Ok(ClassificationResult {
        family,
        rho_hat,
        threshold,
        verdict,
        evidence,
        parameter_report: param,
        c_report,
        q_l_table,
    })
}

type CoefficientData = (Vec<f64>, Vec<(usize, QlEmpirical)>);

fn coefficient_data(spec: &WeightSpec, opts: &ClassifyOptions) -> Result<CoefficientData> {
    let ls = 1..=opts.l_max;
    if opts.mode == Mode::Float || !spec.is_exact() {
        let tables = LogTables::build(spec, opts.n, ls.clone())?;
        let q = ls
            .map(|l| Ok((l, q_l_empirical_log(&tables, l, opts.window)?)))
            .collect::<Result<_>>()?;
        return Ok((tables.c_tilde.ln_coeffs().to_vec(), q));
    }
    let tables = ScaledTables::build(spec, opts.n, ls.clone())?;
    let q = ls
        .map(|l| Ok((l, q_l_empirical(&tables, l, opts.window)?)))
        .collect::<Result<_>>()?;
    Ok((ln_coeffs_exact(&tables.c_tilde)?, q))
}

impl fmt::Display for ClassificationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "family: {}", self.family)?;
        match self.rho_hat {
            Some(r) => writeln!(f, "rho_hat: {r}")?,
            None => writeln!(f, "rho_hat: none")?,
        }
        writeln!(f, "threshold: {}", self.threshold)?;
        writeln!(f, "verdict: {}", self.verdict.name())?;
        writeln!(f, "evidence: {}", self.evidence)?;
        if let Some(r) = &self.c_report {
            writeln!(
                f,
                "c_tilde: {} (window {}, fluctuation {:e}, lag {})",
                r.verdict, r.window, r.fluctuation, r.lag
            )?;
            if let Some((e, o)) = r.subseq_limits {
                writeln!(f, "c_tilde subsequences: even {e} odd {o}")?;
            }
        }
        if let Some(r) = &self.parameter_report {
            writeln!(f, "parameters: {} (fluctuation {:e})", r.verdict, r.fluctuation)?;
        }
        for (l, (emp, closed)) in &self.q_l_table {
            writeln!(f, "q_{l}: empirical {emp:.6e} closed {closed:.6e}")?;
        }
        Ok(())
    }
}
