//! Reversible coagulation-fragmentation chains on Ω_n: rates, an exact
//! detailed-balance check, the exact stationary law and a seeded
//! Gillespie simulation.
//!
//! Only rate ratios are pinned down by reversibility. Fragmentation is fixed
//! at unit rate per cluster and coagulation rates are derived from it.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{int, ratio_to_f64, Rational};
use crate::error::{Error, Result};
use crate::limits::WorkLimits;
use crate::measure::PartitionState;
use crate::oracle;
use crate::weights::{Family, ScaledWeights, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    /// Pairwise rates u_c = k_i k_j φ(i,j), u_f = k_{i+j}, φ(i,j) = a_{i+j}/(a_i a_j).
    MeanField,
    /// u_f = k_{i+j} and u_c = q(η;i,j)·(k_{i+j}+1), for any family.
    RatioGauge,
}

impl RateMode {
    pub fn name(self) -> &'static str {
        match self {
            RateMode::MeanField => "mean-field",
            RateMode::RatioGauge => "ratio-gauge",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mean-field" | "mean_field" | "meanfield" => Some(RateMode::MeanField),
            "ratio-gauge" | "ratio_gauge" | "ratio" => Some(RateMode::RatioGauge),
            _ => None,
        }
    }
}

/// Name of the fixed fragmentation gauge, for output metadata.
pub const GAUGE: &str = "unit-fragmentation";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoveKind {
    /// Merge a cluster of size i with one of size j, i ≤ j.
    Coag(usize, usize),
    /// Split a cluster of size i+j into sizes i ≤ j.
    Frag(usize, usize),
}

impl MoveKind {
    pub fn reverse(self) -> MoveKind {
        match self {
            MoveKind::Coag(i, j) => MoveKind::Frag(i, j),
            MoveKind::Frag(i, j) => MoveKind::Coag(i, j),
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveKind::Coag(i, j) => write!(f, "coag({i},{j})"),
            MoveKind::Frag(i, j) => write!(f, "frag({i},{j})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from: PartitionState,
    pub kind: MoveKind,
    pub to: PartitionState,
    pub rate: Rational,
}

/// Multiplies one rate by a factor; a negative control for the balance check.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub from: PartitionState,
    pub kind: MoveKind,
    pub factor: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfpModel {
    pub n: usize,
    pub spec: WeightSpec,
    pub mode: RateMode,
    pub perturbation: Option<Perturbation>,
}

impl CfpModel {
    pub fn new(spec: WeightSpec, n: usize, mode: RateMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("n must be ≥ 1".into()));
        }
        if mode == RateMode::MeanField && spec.family() != Family::Assembly {
            return Err(Error::Precondition(format!(
                "mean-field rates need an assembly, got {}",
                spec.family()
            )));
        }
        Ok(CfpModel { n, spec, mode, perturbation: None })
    }

    pub fn with_perturbation(mut self, p: Perturbation) -> Self {
        self.perturbation = Some(p);
        self
    }
}

/// Π_j ã_{k_j}^(j), the unnormalised mass of η.
fn state_weight<W: ScaledWeights + ?Sized>(w: &W, eta: &PartitionState) -> Result<Rational> {
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

/// ã_{k+δ}^(j)/ã_k^(j) for δ ∈ {-2,-1,+1}; k + δ ≥ 0 and ã_k ≠ 0 are the caller's.
fn weight_ratio<W: ScaledWeights + ?Sized>(w: &W, j: usize, k: u64, delta: i64) -> Result<Rational> {
    let target = (k as i64 + delta) as u64;
    Ok(w.scaled_weight(j, target)? / w.scaled_weight(j, k)?)
}

/// q(η;i,j) = μ_n(η^{(i,j)})/μ_n(η) from scaled weights.
pub fn q_ratio<W: ScaledWeights + ?Sized>(w: &W, eta: &PartitionState, i: usize, j: usize) -> Result<Rational> {
    let n = eta.n();
    if i == 0 || j == 0 || i + j > n {
        return Err(Error::Precondition(format!("need i, j ≥ 1 and i + j ≤ n, got ({i},{j}) with n = {n}")));
    }
    let (ki, kj, ks) = (eta.count(i), eta.count(j), eta.count(i + j));
    if i == j && ki < 2 || i != j && (ki == 0 || kj == 0) {
        return Err(Error::Precondition(format!("{eta} has no pair of clusters of sizes {i} and {j}")));
    }
    if state_weight(w, eta)?.is_zero() {
        return Err(Error::Domain(format!("{eta} has zero mass; q is undefined")));
    }
    let mut q = weight_ratio(w, i + j, ks, 1)?;
    if i == j {
        q *= weight_ratio(w, i, ki, -2)?;
    } else {
        q *= weight_ratio(w, i, ki, -1)?;
        q *= weight_ratio(w, j, kj, -1)?;
    }
    Ok(q)
}

fn coag_rate(model: &CfpModel, eta: &PartitionState, i: usize, j: usize) -> Result<Rational> {
    match model.mode {
        RateMode::MeanField => {
            let a = |s: usize| -> Result<Rational> {
                model.spec.param(s)?.exact().cloned().ok_or_else(|| {
                    Error::NotExact(format!("a_{s} is not rational; exact rates need rational parameters"))
                })
            };
            let (ai, aj) = (a(i)?, a(j)?);
            if ai.is_zero() || aj.is_zero() {
                return Err(Error::Domain(format!("φ({i},{j}) needs a_{i}, a_{j} > 0")));
            }
            let phi = a(i + j)? / (ai * aj);
            let ki = int(eta.count(i) as i64);
            let pairs = if i == j { &ki * (&ki - int(1)) } else { ki * int(eta.count(j) as i64) };
            Ok(pairs * phi)
        }
        RateMode::RatioGauge => {
            let q = q_ratio(&model.spec, eta, i, j)?;
            Ok(q * int(eta.count(i + j) as i64 + 1))
        }
    }
}

/// Outgoing transitions of η with positive rate.
pub fn build_rates(model: &CfpModel, eta: &PartitionState) -> Result<Vec<Transition>> {
    let n = model.n;
    if eta.n() != n {
        return Err(Error::InvalidState(format!("{eta} is not a partition of {n}")));
    }
    let mut out = Vec::new();
    let perturb = |kind: MoveKind, rate: Rational| -> Rational {
        match &model.perturbation {
            Some(p) if p.kind == kind && &p.from == eta => rate * &p.factor,
            _ => rate,
        }
    };
    for i in 1..=n / 2 {
        for j in i..=n - i {
            if let Some(to) = eta.coagulate(i, j) {
                let rate = perturb(MoveKind::Coag(i, j), coag_rate(model, eta, i, j)?);
                if rate.is_positive() {
                    out.push(Transition { from: eta.clone(), kind: MoveKind::Coag(i, j), to, rate });
                }
            }
        }
    }
    for s in 2..=n {
        let ks = eta.count(s);
        if ks == 0 {
            continue;
        }
        for i in 1..=s / 2 {
            let to = eta.fragment(i, s - i).expect("k_s ≥ 1");
            // A split into a state of zero mass could never be reversed.
            if model.mode == RateMode::RatioGauge && state_weight(&model.spec, &to)?.is_zero() {
                continue;
            }
            let rate = perturb(MoveKind::Frag(i, s - i), int(ks as i64));
            if rate.is_positive() {
                out.push(Transition { from: eta.clone(), kind: MoveKind::Frag(i, s - i), to, rate });
            }
        }
    }
    Ok(out)
}

/// The support of μ_n in canonical order together with the exact μ_n.
pub fn support(spec: &WeightSpec, n: usize, limits: &WorkLimits) -> Result<Vec<(PartitionState, Rational)>> {
    Ok(oracle::brute_mu(spec, n, limits)?
        .into_iter()
        .filter(|(_, m)| !m.is_zero())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub from: PartitionState,
    pub kind: MoveKind,
    pub to: PartitionState,
    /// μ(from)·u(from → to).
    pub forward: Rational,
    /// μ(to)·u(to → from).
    pub backward: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub states: usize,
    pub transitions: usize,
    pub violations: Vec<Violation>,
}

/// Checks μ(η)u(η→η') = μ(η')u(η'→η) once per transition pair over the support.
pub fn check_detailed_balance(model: &CfpModel, limits: &WorkLimits) -> Result<BalanceReport> {
    let states = support(&model.spec, model.n, limits)?;
    let mu: HashMap<PartitionState, Rational> = states.iter().cloned().collect();
    let mut rates: BTreeMap<(PartitionState, MoveKind), (PartitionState, Rational)> = BTreeMap::new();
    for (eta, _) in &states {
        for t in build_rates(model, eta)? {
            rates.insert((t.from, t.kind), (t.to, t.rate));
        }
    }
    let mass = |s: &PartitionState| mu.get(s).cloned().unwrap_or_else(Rational::zero);
    let mut violations = Vec::new();
    for ((from, kind), (to, rate)) in &rates {
        let reverse = rates.get(&(to.clone(), kind.reverse()));
        // Pairs with both directions present are checked from the coagulation side.
        if reverse.is_some() && matches!(kind, MoveKind::Frag(..)) {
            continue;
        }
        let forward = mass(from) * rate;
        let backward = reverse.map_or_else(Rational::zero, |(_, r)| mass(to) * r);
        if forward != backward {
            violations.push(Violation { from: from.clone(), kind: *kind, to: to.clone(), forward, backward });
        }
    }
    Ok(BalanceReport { states: states.len(), transitions: rates.len(), violations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryResult {
    pub states: Vec<PartitionState>,
    pub pi: Vec<Rational>,
    pub mu: Vec<Rational>,
    /// πQ = 0 holds exactly.
    pub residual_zero: bool,
}

impl StationaryResult {
    pub fn matches_mu(&self) -> bool {
        self.pi == self.mu
    }

    /// CSV with columns state, pi, mu, equal.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["state", "pi", "mu", "equal"])?;
        for ((s, p), m) in self.states.iter().zip(&self.pi).zip(&self.mu) {
            w.write_record([
                s.to_string(),
                crate::arith::format_rational(p),
                crate::arith::format_rational(m),
                (p == m).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves πQ = 0, Σπ = 1 exactly on the support of μ_n.
pub fn stationary_exact(model: &CfpModel, limits: &WorkLimits) -> Result<StationaryResult> {
    if model.n > limits.stationary_n {
        return Err(Error::WorkLimit(format!(
            "exact stationary solve refused for n = {} (limit {})",
            model.n, limits.stationary_n
        )));
    }
    let support = support(&model.spec, model.n, limits)?;
    let states: Vec<PartitionState> = support.iter().map(|(s, _)| s.clone()).collect();
    let mu: Vec<Rational> = support.into_iter().map(|(_, m)| m).collect();
    let index: HashMap<&PartitionState, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let size = states.len();
    let mut q = vec![vec![Rational::zero(); size]; size];
    let mut adjacency = vec![Vec::new(); size];
    for (a, eta) in states.iter().enumerate() {
        for t in build_rates(model, eta)? {
            let b = *index
                .get(&t.to)
                .ok_or_else(|| Error::InvalidState(format!("{} leaves the support of μ_n", t.to)))?;
            q[a][b] += &t.rate;
            q[a][a] -= &t.rate;
            adjacency[a].push(b);
        }
    }
    check_irreducible(&adjacency, &states)?;
    // Rows of the system: columns of Q, with the last replaced by Σπ = 1.
    let mut m: Vec<Vec<Rational>> = (0..size)
        .map(|col| {
            let mut row: Vec<Rational> = (0..size).map(|r| q[r][col].clone()).collect();
            row.push(Rational::zero());
            row
        })
        .collect();
    m[size - 1] = vec![Rational::one(); size + 1];
    let pi = solve(m)?;
    let residual_zero = (0..size).all(|col| (0..size).map(|r| &pi[r] * &q[r][col]).sum::<Rational>().is_zero());
    Ok(StationaryResult { states, pi, mu, residual_zero })
}

fn check_irreducible(adjacency: &[Vec<usize>], states: &[PartitionState]) -> Result<()> {
    let size = adjacency.len();
    let mut reverse = vec![Vec::new(); size];
    for (a, outs) in adjacency.iter().enumerate() {
        for &b in outs {
            reverse[b].push(a);
        }
    }
    for graph in [adjacency, &reverse[..]] {
        let mut seen = vec![false; size];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(a) = queue.pop_front() {
            for &b in &graph[a] {
                if !seen[b] {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
        if let Some(miss) = seen.iter().position(|s| !s) {
            return Err(Error::Reducible(format!(
                "{} and {} do not communicate",
                states[0], states[miss]
            )));
        }
    }
    Ok(())
}

/// Gauss-Jordan elimination on an augmented square system.
fn solve(mut m: Vec<Vec<Rational>>) -> Result<Vec<Rational>> {
    let size = m.len();
    for col in 0..size {
        let pivot = (col..size)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| Error::Reducible("singular balance system".into()))?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for v in m[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
    }
    Ok(m.into_iter().map(|row| row[size].clone()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub t_max: f64,
    pub seed: u64,
    /// Defaults to the single n-cluster.
    pub initial: Option<PartitionState>,
    /// Number of equal time batches for standard errors.
    pub batches: usize,
    /// Histograms cover K_1..K_l.
    pub l_hist: usize,
}

impl SimOptions {
    pub fn new(t_max: f64, seed: u64) -> Self {
        SimOptions { t_max, seed, initial: None, batches: 20, l_hist: 3 }
    }
}

/// Largest n for which per-state occupation is reported.
pub const OCCUPATION_MAX_N: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Occupation {
    pub state: PartitionState,
    pub fraction: f64,
    /// Batch-means standard error.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub n: usize,
    pub seed: u64,
    pub t_max: f64,
    pub events: u64,
    pub initial: PartitionState,
    /// All support states in canonical order when n ≤ [`OCCUPATION_MAX_N`].
    pub occupation: Option<Vec<Occupation>>,
    /// histograms[j-1][k] = time fraction with K_j = k.
    pub histograms: Vec<Vec<f64>>,
    /// Rates were multiplied by 2^{-rate_shift} to stay in float range.
    pub rate_shift: i64,
    pub warnings: Vec<String>,
}

impl SimReport {
    /// CSV with columns state, fraction, std_error.
    pub fn write_occupation_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["state", "fraction", "std_error"])?;
        for o in self.occupation.iter().flatten() {
            w.write_record([o.state.to_string(), format!("{:e}", o.fraction), format!("{:e}", o.std_error)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV with columns j, k, fraction.
    pub fn write_histogram_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "k", "fraction"])?;
        for (j, h) in self.histograms.iter().enumerate() {
            for (k, f) in h.iter().enumerate() {
                w.write_record([(j + 1).to_string(), k.to_string(), format!("{f:e}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

type FloatMoves = Vec<(PartitionState, f64)>;

struct RateCache<'a> {
    model: &'a CfpModel,
    shift: i64,
    cache: HashMap<PartitionState, (FloatMoves, f64)>,
}

enum Lookup {
    Moves,
    /// A rate left float range; restart with this shift.
    Overflow(i64),
}

impl RateCache<'_> {
    fn moves(&mut self, eta: &PartitionState) -> Result<Lookup> {
        if self.cache.contains_key(eta) {
            return Ok(Lookup::Moves);
        }
        let mut moves = Vec::new();
        let mut total = 0.0;
        for t in build_rates(self.model, eta)? {
            let scaled = scale_pow2(&t.rate, self.shift);
            let r = ratio_to_f64(&scaled);
            if !r.is_finite() || r > 1e300 {
                let bits = t.rate.numer().bits() as i64 - t.rate.denom().bits() as i64;
                return Ok(Lookup::Overflow(bits - 900));
            }
            total += r;
            moves.push((t.to, r));
        }
        if !total.is_finite() {
            return Ok(Lookup::Overflow(self.shift + 64));
        }
        self.cache.insert(eta.clone(), (moves, total));
        Ok(Lookup::Moves)
    }
}

fn scale_pow2(r: &Rational, shift: i64) -> Rational {
    if shift == 0 {
        return r.clone();
    }
    let two = Rational::from_integer(2.into());
    let factor = crate::arith::powi(&two, -shift);
    r * factor
}

/// Gillespie simulation on [0, t_max], deterministic in the seed.
pub fn simulate(model: &CfpModel, opts: &SimOptions, limits: &WorkLimits) -> Result<SimReport> {
    if model.n > limits.simulation_n {
        return Err(Error::WorkLimit(format!(
            "simulation refused for n = {} (limit {})",
            model.n, limits.simulation_n
        )));
    }
    if !(opts.t_max >= 0.0 && opts.t_max.is_finite()) {
        return Err(Error::Precondition("t_max must be finite and ≥ 0".into()));
    }
    if opts.batches == 0 {
        return Err(Error::Precondition("need at least one batch".into()));
    }
    let initial = match &opts.initial {
        Some(s) if s.n() != model.n => {
            return Err(Error::InvalidState(format!("{s} is not a partition of {}", model.n)))
        }
        Some(s) => s.clone(),
        None => PartitionState::singleton(model.n),
    };
    if state_weight(&model.spec, &initial)?.is_zero() {
        return Err(Error::InvalidState(format!("initial state {initial} has zero mass")));
    }
    let mut shift = 0i64;
    let mut warnings = Vec::new();
    loop {
        match run(model, opts, &initial, shift)? {
            Ok(mut report) => {
                report.warnings = warnings;
                return Ok(report);
            }
            Err(next) => {
                warnings.push(format!(
                    "rates exceed float range; all rates scaled by 2^-{next} and the run restarted (time is rescaled accordingly)"
                ));
                if next <= shift {
                    return Err(Error::Domain("rate rescaling did not converge".into()));
                }
                shift = next;
            }
        }
    }
}

fn run(
    model: &CfpModel,
    opts: &SimOptions,
    initial: &PartitionState,
    shift: i64,
) -> Result<std::result::Result<SimReport, i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut cache = RateCache { model, shift, cache: HashMap::new() };
    let batches = opts.batches;
    let batch_len = opts.t_max / batches as f64;
    let mut time_in: HashMap<PartitionState, Vec<f64>> = HashMap::new();
    let l = opts.l_hist.min(model.n);
    let mut hist: Vec<Vec<f64>> = (1..=l).map(|j| vec![0.0; model.n / j + 1]).collect();
    let mut state = initial.clone();
    let mut t = 0.0;
    let mut events = 0u64;

    let mut credit = |state: &PartitionState, from: f64, to: f64, time_in: &mut HashMap<PartitionState, Vec<f64>>| {
        if to <= from {
            return;
        }
        for (j, h) in hist.iter_mut().enumerate() {
            h[state.count(j + 1) as usize] += to - from;
        }
        let slot = time_in.entry(state.clone()).or_insert_with(|| vec![0.0; batches]);
        let mut a = from;
        while a < to {
            let b = ((a / batch_len).floor() as usize).min(batches - 1);
            let end = if b == batches - 1 { to } else { ((b + 1) as f64 * batch_len).min(to) };
            slot[b] += end - a;
            if end <= a {
                break;
            }
            a = end;
        }
    };

    while t < opts.t_max {
        if let Lookup::Overflow(next) = cache.moves(&state)? {
            return Ok(Err(next));
        }
        let (moves, total) = &cache.cache[&state];
        if *total == 0.0 {
            credit(&state, t, opts.t_max, &mut time_in);
            break;
        }
        let u: f64 = rng.random();
        let hold = -(1.0 - u).ln() / total;
        let next_t = (t + hold).min(opts.t_max);
        credit(&state, t, next_t, &mut time_in);
        t += hold;
        if t >= opts.t_max {
            break;
        }
        let mut pick = rng.random::<f64>() * total;
        let mut chosen = moves.len() - 1;
        for (idx, (_, r)) in moves.iter().enumerate() {
            if pick < *r {
                chosen = idx;
                break;
            }
            pick -= r;
        }
        state = moves[chosen].0.clone();
        events += 1;
    }

    let total_time = opts.t_max;
    let histograms: Vec<Vec<f64>> = if total_time > 0.0 {
        hist.into_iter().map(|h| h.into_iter().map(|v| v / total_time).collect()).collect()
    } else {
        (1..=l)
            .map(|j| {
                let mut h = vec![0.0; model.n / j + 1];
                h[initial.count(j) as usize] = 1.0;
                h
            })
            .collect()
    };
    let occupation = if model.n <= OCCUPATION_MAX_N {
        let limits = WorkLimits { enumeration_n: OCCUPATION_MAX_N.max(model.n), ..WorkLimits::default() };
        let states = support(&model.spec, model.n, &limits)?;
        Some(
            states
                .into_iter()
                .map(|(s, _)| {
                    let per_batch = time_in.get(&s).cloned().unwrap_or_else(|| vec![0.0; batches]);
                    occupation_stats(s, &per_batch, total_time, batch_len, initial)
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(Ok(SimReport {
        n: model.n,
        seed: opts.seed,
        t_max: opts.t_max,
        events,
        initial: initial.clone(),
        occupation,
        histograms,
        rate_shift: shift,
        warnings: Vec::new(),
    }))
}

fn occupation_stats(state: PartitionState, per_batch: &[f64], total: f64, batch_len: f64, initial: &PartitionState) -> Occupation {
    if total == 0.0 {
        let fraction = if &state == initial { 1.0 } else { 0.0 };
        return Occupation { state, fraction, std_error: 0.0 };
    }
    let fraction = per_batch.iter().sum::<f64>() / total;
    let b = per_batch.len();
    let std_error = if b > 1 {
        let means: Vec<f64> = per_batch.iter().map(|v| v / batch_len).collect();
        let avg = means.iter().sum::<f64>() / b as f64;
        let var = means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (b - 1) as f64;
        (var / b as f64).sqrt()
    } else {
        f64::NAN
    };
    Occupation { state, fraction, std_error }
}

/// TV distance between simulated occupation and exact μ_n.
pub fn occupation_tv(report: &SimReport, mu: &[(PartitionState, Rational)]) -> Option<f64> {
    let occ = report.occupation.as_ref()?;
    let exact: HashMap<&PartitionState, f64> = mu.iter().map(|(s, m)| (s, ratio_to_f64(m))).collect();
    Some(0.5 * occ.iter().map(|o| (o.fraction - exact.get(&o.state).copied().unwrap_or(0.0)).abs()).sum::<f64>())
}
