//! `partlab`: coefficient tables, classification, count laws, oracle
//! verification and coagulation-fragmentation runs from a spec file.

mod output;
mod plot;

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use partlab::arith::{format_rational, parse_rational, ratio_to_f64};
use partlab::cfp::{self, CfpModel, RateMode, SimOptions};
use partlab::diagnostics::{self, Convergence, Mode};
use partlab::logseries::LogTables;
use partlab::measure::{self, Measure};
use partlab::specfile::{self, SpecDocument};
use partlab::verify;
use partlab::{Rational, ScaledTables, ScaledWeights, WeightSpec, WorkLimits};

use output::{sha256_hex, Output};
use plot::PlotKind;

#[derive(Parser)]
#[command(name = "partlab", version, about = "Exact multiplicative measures on integer partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Spec file, or "-" for stdin.
    #[arg(long)]
    spec: String,
    /// Downgrade unknown spec keys to warnings.
    #[arg(long)]
    lenient: bool,
    /// Write CSVs and a manifest here instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Scaled coefficients c̃_n and tails T̃^(l)_n.
    Coeffs {
        #[command(flatten)]
        common: Common,
        #[arg(long = "N")]
        big_n: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        mode: Option<String>,
    },
    /// Convergent / divergent verdict; exit 0, 3 or 4.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long = "N")]
        big_n: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        mode: Option<String>,
    },
    /// Exact law of (K_1..K_l) at size n, or one prefix probability.
    Fdd {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: Option<usize>,
        /// Comma-separated k_1,...,k_l.
        #[arg(long)]
        prefix: Option<String>,
    },
    /// Limiting law of (K_1..K_l) after tilting at rho.
    Limit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho: String,
        #[arg(long)]
        l: usize,
        /// Comma-separated sizes n for a TV(fdd_n, limit) table.
        #[arg(long)]
        tv: Option<String>,
    },
    /// Oracle-versus-engine equivalence up to n.
    Verify {
        /// Spec file; omit with --all-presets.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        lenient: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 15)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        l: usize,
        /// Run every preset instead of one spec.
        #[arg(long)]
        all_presets: bool,
    },
    /// Coagulation-fragmentation chain checks and simulation.
    Cfp {
        #[command(subcommand)]
        action: CfpAction,
    },
    /// Static SVG plot of a two-column CSV.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Horizontal reference lines.
        #[arg(long)]
        band: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct CfpArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    /// mean-field or ratio-gauge.
    #[arg(long)]
    gauge: Option<String>,
}

#[derive(Subcommand)]
enum CfpAction {
    /// Exact detailed-balance check; exit 1 on any violation.
    Balance(CfpArgs),
    /// Exact stationary law; exit 1 unless it equals μ_n.
    Stationary(CfpArgs),
    /// Seeded Gillespie run.
    Simulate {
        #[command(flatten)]
        args: CfpArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        t_max: Option<f64>,
    },
}

/// A failed run: exit code and message for stderr.
struct Failure(u8, String);

impl From<partlab::Error> for Failure {
    fn from(e: partlab::Error) -> Self {
        Failure(2, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(2, e.to_string())
    }
}

type Run = Result<u8, Failure>;

struct Loaded {
    doc: SpecDocument,
    digest: String,
}

fn load_spec(path: &str, lenient: bool) -> Result<Loaded, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure(2, format!("{path}: {e}")))?
    };
    if text.trim().is_empty() {
        return Err(Failure(2, format!("{path}: empty spec; expected at least family and generator")));
    }
    match specfile::parse_spec_with(&text, lenient) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                eprintln!("{path}:{w} (ignored)");
            }
            Ok(Loaded { doc: parsed.document, digest: sha256_hex(text.as_bytes()) })
        }
        Err(errors) => {
            let lines: Vec<String> = errors.iter().map(|e| format!("{path}:{e}")).collect();
            Err(Failure(2, lines.join("\n")))
        }
    }
}

fn limits() -> Result<WorkLimits, Failure> {
    Ok(WorkLimits::from_env()?)
}

fn weights(doc: &SpecDocument) -> Result<WeightSpec, Failure> {
    Ok(doc.weights()?.with_limits(limits()?))
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> partlab::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn parse_mode(m: Option<String>, default: Mode) -> Result<Mode, Failure> {
    match m {
        None => Ok(default),
        Some(s) => Mode::parse(&s).ok_or_else(|| Failure(2, format!("--mode must be exact or float, got {s:?}"))),
    }
}

fn parse_list(text: &str) -> Result<Vec<u64>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| Failure(2, format!("bad list entry {s:?}"))))
        .collect()
}

fn cmd_coeffs(common: Common, big_n: Option<usize>, l: Option<usize>, mode: Option<String>) -> Run {
    let Loaded { doc, digest } = load_spec(&common.spec, common.lenient)?;
    let n = big_n.unwrap_or(doc.compute.n);
    let mode = parse_mode(mode, doc.compute.mode)?;
    let l_max = l.unwrap_or(doc.compute.l_max).min(n);
    let spec = weights(&doc)?;
    let mut header = vec!["n".to_string(), "c_tilde".into(), "c_tilde_float".into()];
    for l in 1..=l_max {
        header.push(format!("t{l}"));
        header.push(format!("t{l}_float"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(|e| Failure(2, e.to_string()))?;
    if mode == Mode::Exact {
        let tables = ScaledTables::build(&spec, n, 1..=l_max)?;
        for i in 0..=n {
            let c = tables.c_tilde.coeff(i);
            let mut row = vec![i.to_string(), format_rational(c), format!("{:e}", ratio_to_f64(c))];
            for l in 1..=l_max {
                let t = tables.tail(l)?.coeff(i);
                row.push(format_rational(t));
                row.push(format!("{:e}", ratio_to_f64(t)));
            }
            w.write_record(&row).map_err(|e| Failure(2, e.to_string()))?;
        }
    } else {
        let tables = LogTables::build(&spec, n, 1..=l_max)?;
        for i in 0..=n {
            let mut row = vec![i.to_string(), String::new(), format!("{:e}", tables.c_tilde.value(i))];
            for l in 1..=l_max {
                row.push(String::new());
                row.push(format!("{:e}", tables.t_tilde[&l].value(i)));
            }
            w.write_record(&row).map_err(|e| Failure(2, e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure(2, e.to_string()))?;
    let mut out = Output::new(common.out, "coeffs", Some(digest));
    out.param("N", n);
    out.param("l", l_max);
    out.param("mode", mode.name());
    out.add("coeffs.csv", bytes);
    out.finish()?;
    Ok(0)
}

fn cmd_classify(
    common: Common,
    big_n: Option<usize>,
    window: Option<usize>,
    tol: Option<f64>,
    mode: Option<String>,
) -> Run {
    let Loaded { doc, digest } = load_spec(&common.spec, common.lenient)?;
    let mut opts = doc.compute;
    opts.n = big_n.unwrap_or(opts.n);
    opts.window = window.unwrap_or(opts.window);
    opts.tol = tol.unwrap_or(opts.tol);
    opts.mode = parse_mode(mode, opts.mode)?;
    let spec = weights(&doc)?;
    let result = diagnostics::classify(&spec, &opts)?;
    let mut out = Output::new(common.out, "classify", Some(digest));
    out.param("N", opts.n);
    out.param("window", opts.window);
    out.param("tol", opts.tol);
    out.param("mode", opts.mode.name());
    out.add("verdict.txt", result.to_string().into_bytes());
    if out.is_dir() {
        if let Some(r) = &result.c_report {
            out.add("ratios_c.csv", csv_bytes(|b| r.write_csv(b))?);
        }
        if let Some(r) = &result.parameter_report {
            out.add("ratios_params.csv", csv_bytes(|b| r.write_csv(b))?);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let rows = std::iter::once(["l".to_string(), "empirical".into(), "closed_form".into()]).chain(
            result.q_l_table.iter().map(|(l, (e, c))| [l.to_string(), format!("{e:e}"), format!("{c:e}")]),
        );
        for row in rows {
            w.write_record(&row).map_err(|e| Failure(2, e.to_string()))?;
        }
        out.add("q_l.csv", w.into_inner().map_err(|e| Failure(2, e.to_string()))?);
    }
    out.finish()?;
    Ok(match result.verdict {
        Convergence::Convergent => 0,
        Convergence::Divergent => 3,
        Convergence::Inconclusive => 4,
    })
}

fn cmd_fdd(common: Common, n: usize, l: Option<usize>, prefix: Option<String>) -> Run {
    let Loaded { doc, digest } = load_spec(&common.spec, common.lenient)?;
    let spec = weights(&doc)?;
    let prefix = prefix.as_deref().map(parse_list).transpose()?;
    let l = match (&prefix, l) {
        (Some(p), Some(l)) if p.len() != l => {
            return Err(Failure(2, format!("--prefix has {} entries but --l is {l}", p.len())))
        }
        (Some(p), _) => p.len(),
        (None, Some(l)) => l,
        (None, None) => doc.compute.l_max.min(n),
    };
    if l == 0 || l > n {
        return Err(Failure(2, format!("l = {l} must satisfy 1 ≤ l ≤ n = {n}")));
    }
    let m = Measure::new(spec, n, l)?;
    let mut out = Output::new(common.out, "fdd", Some(digest));
    out.param("n", n);
    out.param("l", l);
    match prefix {
        Some(p) => {
            let v = m.fdd(n, &p)?;
            let keys: Vec<String> = p.iter().map(|k| k.to_string()).collect();
            out.param("prefix", keys.join(","));
            let text = format!("prefix,probability,probability_float\n\"{}\",{},{:e}\n", keys.join(","), format_rational(&v), ratio_to_f64(&v));
            out.add("fdd.csv", text.into_bytes());
        }
        None => {
            let law = m.count_law(n, l)?;
            out.add("fdd.csv", csv_bytes(|b| law.write_csv(b))?);
        }
    }
    out.finish()?;
    Ok(0)
}

fn cmd_limit(common: Common, rho: String, l: usize, tv: Option<String>) -> Run {
    let Loaded { doc, digest } = load_spec(&common.spec, common.lenient)?;
    let spec = weights(&doc)?;
    let rho: Rational = parse_rational(&rho, false)?;
    let law = measure::limit_law(&spec, &rho, l)?;
    let mut out = Output::new(common.out, "limit", Some(digest));
    out.param("rho", format_rational(&rho));
    out.param("l", l);
    out.add("limit.csv", csv_bytes(|b| law.write_csv(b))?);
    if let Some(ns) = tv {
        let ns = parse_list(&ns)?;
        let top = *ns.iter().max().unwrap_or(&0) as usize;
        if ns.iter().any(|n| (*n as usize) < l) {
            return Err(Failure(2, format!("every TV size must be ≥ l = {l}")));
        }
        let m = Measure::new(spec, top, l)?;
        let mut rows = Vec::new();
        for n in ns {
            let n = n as usize;
            rows.push((n, measure::tv_distance(&m.count_law(n, l)?, &law)?));
        }
        out.param("tv_sizes", rows.iter().map(|r| r.0.to_string()).collect::<Vec<_>>().join(","));
        out.add("tv.csv", csv_bytes(|b| measure::write_tv_csv(&rows, b))?);
    }
    out.finish()?;
    Ok(0)
}

fn cmd_verify(spec: Option<String>, lenient: bool, out_dir: Option<PathBuf>, n: usize, l: usize, all: bool) -> Run {
    let limits = limits()?;
    let (specs, digest) = match (all, spec) {
        (true, _) => (verify::preset_corpus(), None),
        (false, Some(path)) => {
            let loaded = load_spec(&path, lenient)?;
            (vec![weights(&loaded.doc)?], Some(loaded.digest))
        }
        (false, None) => return Err(Failure(2, "verify needs --spec or --all-presets".into())),
    };
    let mut out = Output::new(out_dir, "verify", digest);
    out.param("n", n);
    out.param("l", l);
    let mut lines = String::from("spec,checks,status,first_mismatch\n");
    let mut failed = false;
    for spec in &specs {
        let label = format!("{:?}", spec.params()).replace('"', "'");
        let report = verify::verify(spec, n, n, l, &limits)?;
        let (status, detail) = match &report.first_mismatch {
            None => ("pass", String::new()),
            Some(m) => {
                failed = true;
                let at = match &m.prefix {
                    None => format!("n={} c_tilde", m.n),
                    Some(p) => format!("n={} prefix={p:?}", m.n),
                };
                ("fail", format!("{at} engine={} oracle={}", format_rational(&m.engine), format_rational(&m.oracle)))
            }
        };
        lines += &format!("\"{}/{label}\",{},{status},\"{detail}\"\n", spec.family(), report.checks);
    }
    out.add("verify.csv", lines.into_bytes());
    out.finish()?;
    Ok(if failed { 1 } else { 0 })
}

fn cfp_model(args: &CfpArgs) -> Result<(CfpModel, SpecDocument, String), Failure> {
    let Loaded { doc, digest } = load_spec(&args.common.spec, args.common.lenient)?;
    let spec = weights(&doc)?;
    let n = args
        .n
        .or(doc.cfp.as_ref().map(|c| c.n))
        .ok_or_else(|| Failure(2, "cfp needs --n or an [cfp] section with n".into()))?;
    let mode = match &args.gauge {
        Some(g) => RateMode::parse(g).ok_or_else(|| Failure(2, format!("unknown gauge {g:?}")))?,
        None => doc.cfp.as_ref().map(|c| c.mode).unwrap_or(if spec.family() == partlab::Family::Assembly {
            RateMode::MeanField
        } else {
            RateMode::RatioGauge
        }),
    };
    Ok((CfpModel::new(spec, n, mode)?, doc, digest))
}

fn cmd_cfp(action: CfpAction) -> Run {
    let limits = limits()?;
    match action {
        CfpAction::Balance(args) => {
            let (model, _, digest) = cfp_model(&args)?;
            let report = cfp::check_detailed_balance(&model, &limits)?;
            let mut out = Output::new(args.common.out, "cfp balance", Some(digest));
            out.param("n", model.n);
            out.param("gauge", model.mode.name());
            let mut text = format!(
                "states,transitions,violations\n{},{},{}\n",
                report.states,
                report.transitions,
                report.violations.len()
            );
            if !report.violations.is_empty() {
                text += "from,move,to,forward,backward\n";
                for v in &report.violations {
                    text += &format!(
                        "\"{}\",{},\"{}\",{},{}\n",
                        v.from,
                        v.kind,
                        v.to,
                        format_rational(&v.forward),
                        format_rational(&v.backward)
                    );
                }
            }
            out.add("balance.csv", text.into_bytes());
            out.finish()?;
            Ok(if report.violations.is_empty() { 0 } else { 1 })
        }
        CfpAction::Stationary(args) => {
            let (model, _, digest) = cfp_model(&args)?;
            let r = cfp::stationary_exact(&model, &limits)?;
            let mut out = Output::new(args.common.out, "cfp stationary", Some(digest));
            out.param("n", model.n);
            out.param("gauge", model.mode.name());
            out.add("stationary.csv", csv_bytes(|b| r.write_csv(b))?);
            out.finish()?;
            Ok(if r.matches_mu() && r.residual_zero { 0 } else { 1 })
        }
        CfpAction::Simulate { args, seed, t_max } => {
            let (model, doc, digest) = cfp_model(&args)?;
            let seed = seed.or(doc.cfp.as_ref().map(|c| c.seed)).unwrap_or(0);
            let t_max = t_max.or(doc.cfp.as_ref().map(|c| c.t_max)).unwrap_or(1000.0);
            let report = cfp::simulate(&model, &SimOptions::new(t_max, seed), &limits)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let mut out = Output::new(args.common.out, "cfp simulate", Some(digest));
            out.seed = Some(seed);
            out.param("n", model.n);
            out.param("gauge", model.mode.name());
            out.param("t_max", t_max);
            out.param("events", report.events);
            out.param("rate_shift", report.rate_shift);
            if report.occupation.is_some() {
                out.add("occupation.csv", csv_bytes(|b| report.write_occupation_csv(b))?);
            }
            out.add("histogram.csv", csv_bytes(|b| report.write_histogram_csv(b))?);
            out.finish()?;
            Ok(0)
        }
    }
}

fn cmd_plot(csv_path: PathBuf, kind: PlotKind, bands: Vec<f64>, out: PathBuf) -> Run {
    let data = fs::read(&csv_path).map_err(|e| Failure(2, format!("{}: {e}", csv_path.display())))?;
    let points = plot::read_points(&data).map_err(|e| Failure(2, format!("{}: {e}", csv_path.display())))?;
    fs::write(&out, plot::render(kind, &points, &bands))?;
    Ok(0)
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Coeffs { common, big_n, l, mode } => cmd_coeffs(common, big_n, l, mode),
        Command::Classify { common, big_n, window, tol, mode } => cmd_classify(common, big_n, window, tol, mode),
        Command::Fdd { common, n, l, prefix } => cmd_fdd(common, n, l, prefix),
        Command::Limit { common, rho, l, tv } => cmd_limit(common, rho, l, tv),
        Command::Verify { spec, lenient, out, n, l, all_presets } => cmd_verify(spec, lenient, out, n, l, all_presets),
        Command::Cfp { action } => cmd_cfp(action),
        Command::Plot { csv, kind, band, out } => cmd_plot(csv, kind, band, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
