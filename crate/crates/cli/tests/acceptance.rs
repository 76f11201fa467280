//! One PASS/FAIL line per acceptance criterion. Exits nonzero when any
//! criterion fails, apart from those listed in `KNOWN_UNATTAINABLE`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use partlab::arith::{factorial, frac, int, pow, ratio_to_f64};
use partlab::cfp::{self, CfpModel, RateMode};
use partlab::diagnostics::{self, ratio_report, schur_check, star_transform, ClassifyOptions, Convergence, Mode};
use partlab::logseries::LogTables;
use partlab::measure::{limit_law, tilt, tv_distance, Measure};
use partlab::oracle::{enumerate_partitions, partition_numbers, stirling2};
use partlab::series::Series;
use partlab::verify::{preset_corpus, verify};
use partlab::{Family, Preset, ScaledTables, ScaledWeights, WeightSpec, WorkLimits};

type Rational = BigRational;

/// Criterion 5 asks for (p(n) - p(n-1))/p(n) < 0.05 at n = 400, where the
/// exact value is about 0.0598; the ratio only falls below 0.05 past n ≈ 570.
/// Criterion 11 asks a covariance that is exactly zero for n ≥ 3 to shrink.
const KNOWN_UNATTAINABLE: &[usize] = &[5, 11];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_partlab")
}

fn write_spec(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn within(budget: Duration, start: Instant) -> (bool, String) {
    let t = start.elapsed();
    (t < budget, format!("{:.2}s of {:.0}s", t.as_secs_f64(), budget.as_secs_f64()))
}

fn oscillating_closed_form() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "osc.spec", "family = assembly\ngenerator = oscillating_demo\n");
    let out = Command::new(bin()).args(["coeffs", "--spec", &spec, "--N", "40", "--l", "1"]).output().unwrap();
    if !out.status.success() {
        return outcome(false, String::from_utf8_lossy(&out.stderr));
    }
    let mut reader = csv::Reader::from_reader(&out.stdout[..]);
    let mut c = Vec::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        c.push(partlab::arith::parse_rational(&rec[1], false).unwrap());
    }
    let exact = (1..=40usize).all(|n| c[n] == (pow(&int(4), 1 + n as u64 / 2) - int(1)) / int(3));
    let ln: Vec<f64> = c.iter().map(partlab::arith::ln_ratio).collect();
    let report = ratio_report(&ln, 10, 1e-6).unwrap();
    let (even, odd) = report.subseq_limits.unwrap();
    let limits_ok = (even - 0.25).abs() < 1e-6 && (odd - 1.0).abs() < 1e-6;
    let (fast, time) = within(Duration::from_secs(1), start);
    outcome(
        exact && limits_ok && fast,
        format!("closed form {exact}; subsequence limits even {even:.9} odd {odd:.9}; {time}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let limits = WorkLimits::default();
    let mut checks = 0;
    for spec in preset_corpus() {
        let r = verify(&spec, 20, 18, 4, &limits).unwrap();
        checks += r.checks;
        if let Some(m) = r.first_mismatch {
            return outcome(false, format!("{spec:?}: first mismatch at n={} prefix={:?}", m.n, m.prefix));
        }
    }
    let (fast, time) = within(Duration::from_secs(120), start);
    outcome(fast, format!("{} presets, {checks} exact comparisons; {time}", preset_corpus().len()))
}

fn named_identities() -> Outcome {
    let ip = WeightSpec::multiset(Preset::IntegerPartitions, int(1)).unwrap();
    let c = ScaledTables::build(&ip, 10, []).unwrap().c_tilde;
    let want = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42];
    let partitions = (0..=10).all(|n| *c.coeff(n) == int(want[n]))
        && partition_numbers(10).iter().zip(want).all(|(a, b)| *a == b.into());

    let sets = WeightSpec::assembly(Preset::SetPartitions).unwrap();
    let c = ScaledTables::build(&sets, 5, []).unwrap().c_tilde;
    let bell = [1, 2, 5, 15, 52];
    let bell_ok = (1..=5).all(|n| {
        let v = c.coeff(n) * Rational::from_integer(factorial(n as u64));
        let by_stirling = (1..=n).fold(Rational::zero(), |acc, k| acc + Rational::from_integer(stirling2(n, k)));
        v == int(bell[n - 1]) && by_stirling == int(bell[n - 1])
    });

    let graphs = WeightSpec::assembly(Preset::Graphs).unwrap();
    let c = ScaledTables::build(&graphs, 12, []).unwrap().c_tilde;
    let graphs_ok = (0..=12usize).all(|n| {
        *c.coeff(n) == pow(&int(2), (n * n.saturating_sub(1) / 2) as u64) / Rational::from_integer(factorial(n as u64))
    });
    outcome(
        partitions && bell_ok && graphs_ok,
        format!("partition numbers {partitions}; Bell {bell_ok}; graphs 2^C(n,2)/n! {graphs_ok}"),
    )
}

fn ewens_limit() -> Outcome {
    let ew = WeightSpec::assembly(Preset::Ewens(int(2))).unwrap();
    let limit = limit_law(&ew, &int(1), 3).unwrap();
    let m = Measure::new(ew, 160, 3).unwrap();
    let tv: Vec<f64> = [20, 40, 80, 160].iter().map(|&n| tv_distance(&m.count_law(n, 3).unwrap(), &limit).unwrap()).collect();
    let monotone = tv.windows(2).all(|w| w[1] < w[0]);
    outcome(tv[3] <= 0.02 && monotone, format!("TV over n = 20, 40, 80, 160: {tv:.5?}"))
}

fn partitions_divergence() -> Outcome {
    let ip = WeightSpec::multiset(Preset::IntegerPartitions, int(1)).unwrap();
    let exact = ScaledTables::build(&ip, 400, [1]).unwrap();
    let ratio = |n: usize| exact.tail(1).unwrap().coeff(n) / exact.c_tilde.coeff(n);
    let q400 = ratio_to_f64(&ratio(400));
    let logs = LogTables::build(&ip, 400, [1]).unwrap();
    let float = (logs.t_tilde[&1].ln_coeff(400) - logs.c_tilde.ln_coeff(400)).exp();
    let window = 375..=400;
    let monotone = window.clone().zip(window.skip(1)).all(|(a, b)| ratio(b) < ratio(a));
    let half = WeightSpec::multiset(Preset::IntegerPartitions, frac(1, 2)).unwrap();
    let verdict = diagnostics::classify(&half, &ClassifyOptions { mode: Mode::Float, ..Default::default() })
        .unwrap()
        .verdict;
    outcome(
        q400 < 0.05 && (float - q400).abs() < 1e-9 && monotone && verdict == Convergence::Divergent,
        format!(
            "T1/c at n=400: exact {q400:.6}, float {float:.6} (needs < 0.05); decreasing on tail {monotone}; verdict {}",
            verdict.name()
        ),
    )
}

fn schur() -> Outcome {
    let n = 80;
    let f1 = Series::geometric(&int(1), n);
    let mut coeffs = vec![int(0); n + 1];
    coeffs[0] = int(1);
    coeffs[1] = frac(1, 2);
    let pos = schur_check(&f1, &Series::new(coeffs), &int(1), None, n, 25, 1e-3).unwrap();
    let exact = pos.ratios[1..].iter().all(|r| *r == frac(3, 2));
    let mut bad = vec![int(0); n + 1];
    for k in (0..=n).step_by(2) {
        bad[k] = pow(&int(4), k as u64 / 2);
    }
    let neg = schur_check(&f1, &Series::new(bad), &int(1), None, n, 25, 1e-3).unwrap();
    outcome(exact && !neg.settled, format!("ratios ≡ 3/2: {exact}; 1/(1-4x²) flagged non-settling: {}", !neg.settled))
}

fn star() -> Outcome {
    let s = star_transform(&vec![int(1); 100], &frac(1, 2), 100).unwrap();
    let nonneg = s.m_star.iter().all(|v| !v.is_negative());
    outcome(s.identity_holds && nonneg, format!("identity through x^100: {}", s.identity_holds))
}

fn models(n: usize) -> Vec<CfpModel> {
    let mut out = Vec::new();
    for spec in preset_corpus() {
        if spec.family() == Family::Assembly {
            out.push(CfpModel::new(spec.clone(), n, RateMode::MeanField).unwrap());
        }
        out.push(CfpModel::new(spec, n, RateMode::RatioGauge).unwrap());
    }
    out
}

fn cfp_exactness() -> Outcome {
    let start = Instant::now();
    let limits = WorkLimits::default();
    let mut chains = 0;
    for n in 1..=8 {
        for m in models(n) {
            let r = cfp::check_detailed_balance(&m, &limits).unwrap();
            if !r.violations.is_empty() {
                return outcome(false, format!("{:?} n={n}: {} violations", m.spec, r.violations.len()));
            }
            chains += 1;
        }
    }
    for n in 1..=10 {
        for m in models(n) {
            let r = cfp::stationary_exact(&m, &limits).unwrap();
            if !(r.matches_mu() && r.residual_zero) {
                return outcome(false, format!("{:?} n={n}: π ≠ μ_n", m.spec));
            }
        }
    }
    let perms = CfpModel::new(WeightSpec::assembly(Preset::Permutations).unwrap(), 3, RateMode::MeanField).unwrap();
    let pi = cfp::stationary_exact(&perms, &limits).unwrap().pi;
    let small = pi == vec![frac(1, 6), frac(1, 2), frac(1, 3)];
    let (fast, time) = within(Duration::from_secs(60), start);
    outcome(small && fast, format!("{chains} balance checks clean; π = μ_n for n ≤ 10; n=3 permutations {small}; {time}"))
}

fn cfp_simulation() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "perm.spec",
        "family = assembly\ngenerator = permutations\n[cfp]\nn = 6\nt_max = 20000\nseed = 42\n",
    );
    let run = |out: &str| {
        let target = dir.path().join(out);
        let st = Command::new(bin())
            .args(["cfp", "simulate", "--spec", &spec, "--out"])
            .arg(&target)
            .status()
            .unwrap();
        assert!(st.success());
        std::fs::read(target.join("occupation.csv")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    let identical = a == b;
    let mu = cfp::support(&WeightSpec::assembly(Preset::Permutations).unwrap(), 6, &WorkLimits::default()).unwrap();
    let mut reader = csv::Reader::from_reader(&a[..]);
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for (rec, (state, m)) in reader.records().zip(&mu) {
        let rec = rec.unwrap();
        assert_eq!(&rec[0], state.to_string());
        let (f, se): (f64, f64) = (rec[1].parse().unwrap(), rec[2].parse().unwrap());
        worst = worst.max((f - ratio_to_f64(m)).abs() / se);
        rows += 1;
    }
    let (fast, time) = within(Duration::from_secs(60), start);
    outcome(
        rows == mu.len() && worst <= 3.0 && identical && fast,
        format!("{rows} states, worst |z| = {worst:.2}; reruns identical {identical}; {time}"),
    )
}

fn tilting() -> Outcome {
    let limits = WorkLimits::default();
    let specs = [
        WeightSpec::assembly(Preset::Ewens(frac(3, 2))).unwrap(),
        WeightSpec::assembly(Preset::Graphs).unwrap(),
        WeightSpec::multiset(Preset::IntegerPartitions, frac(1, 3)).unwrap(),
        WeightSpec::selection(Preset::DistinctParts, frac(1, 2)).unwrap(),
    ];
    let mut states = 0;
    for spec in specs {
        let base = Measure::new(spec.clone(), 12, 1).unwrap();
        for theta in [frac(1, 2), int(2)] {
            let t = tilt(&spec, theta.clone()).unwrap();
            let tilted = Measure::new(t, 12, 1).unwrap();
            for n in 0..=12usize {
                let want = base.tables().c_tilde.coeff(n) * pow(&theta, n as u64);
                if *tilted.tables().c_tilde.coeff(n) != want {
                    return outcome(false, format!("{spec:?} θ={theta}: c̃_{n} not scaled by θ^n"));
                }
                if n == 0 {
                    continue;
                }
                for eta in enumerate_partitions(n, &limits).unwrap().items {
                    if base.mu_point(&eta).unwrap() != tilted.mu_point(&eta).unwrap() {
                        return outcome(false, format!("{spec:?} θ={theta}: μ differs at {eta}"));
                    }
                    states += 1;
                }
            }
        }
    }
    outcome(true, format!("{states} (state, θ) pairs identical; c̃_n(θ) = θ^n c̃_n"))
}

fn covariances(theta: Rational) -> Vec<Rational> {
    let m = Measure::new(WeightSpec::assembly(Preset::Ewens(theta)).unwrap(), 40, 2).unwrap();
    [10, 20, 40].iter().map(|&n| m.covariance(n, 1, 2).unwrap()).collect()
}

fn strictly_shrinking(cov: &[Rational]) -> bool {
    cov.windows(2).all(|w| w[1].abs() < w[0].abs())
}

fn show(cov: &[Rational]) -> String {
    cov.iter().map(|c| format!("{:.3e}", ratio_to_f64(c))).collect::<Vec<_>>().join(", ")
}

/// For θ = 1 the joint factorial moments of (K_1, K_2) are exactly Poisson
/// once n ≥ 3, so the covariance is identically zero and cannot shrink.
/// θ = 2 is reported alongside as a nonzero witness of the decay.
fn covariance_decay() -> Outcome {
    let cov = covariances(int(1));
    let witness = covariances(int(2));
    outcome(
        strictly_shrinking(&cov),
        format!(
            "ewens(1) cov(K1,K2) at n = 10, 20, 40: {} (exactly zero {}); ewens(2): {} (shrinking {})",
            show(&cov),
            cov.iter().all(Zero::is_zero),
            show(&witness),
            strictly_shrinking(&witness)
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("oscillating assembly closed form and period-2 ratios", oscillating_closed_form),
        ("engine equals oracle on every preset", oracle_equivalence),
        ("partition, Bell and graph coefficient identities", named_identities),
        ("ewens(2) fdd approaches the tilted limit", ewens_limit),
        ("integer partitions divergence witness", partitions_divergence),
        ("Schur ratio check and negative case", schur),
        ("star transform reproduces the Euler product", star),
        ("CFP detailed balance and exact stationary law", cfp_exactness),
        ("CFP simulation matches μ_6", cfp_simulation),
        ("tilting leaves μ_n unchanged", tilting),
        ("ewens(1) covariance decays", covariance_decay),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag} {name}: {}", o.detail);
        if o.pass {
            passed += 1;
        } else if !KNOWN_UNATTAINABLE.contains(&id) {
            unexpected += 1;
        }
    }
    println!("acceptance: {passed}/{} passed", criteria.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
