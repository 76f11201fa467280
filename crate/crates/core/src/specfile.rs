//! The structure-spec file: line-oriented `key = value` pairs under optional
//! `[structure]`, `[compute]` and `[cfp]` headers.
//!
//! ```text
//! # comments start with '#'
//! [structure]
//! family = multiset
//! generator = integer_partitions      # or ewens(2), rv(1, -1, 1), table, rows
//! p = 1/2
//! value[1] = 3                        # table entries, when generator = table
//! row[1] = 1, 2, 1                    # custom rows, when generator = rows
//! tail = zero                         # zero | repeat-last | error-beyond
//!
//! [compute]
//! N = 400
//! mode = exact                        # exact | float
//! window = 25
//! tol = 0.001
//! l_max = 3
//!
//! [cfp]
//! n = 6
//! gauge = mean-field                  # mean-field | ratio-gauge
//! t_max = 1000
//! seed = 42
//! ```
//!
//! Before any header, structure and compute keys may appear in any order.
//! Rationals are written `n` or `n/d`; decimals are accepted only when
//! `mode = float`.

use std::collections::BTreeMap;
use std::fmt;

use crate::arith::{format_rational, parse_rational, Rational};
use crate::cfp::RateMode;
use crate::diagnostics::{ClassifyOptions, Mode};
use crate::weights::{Family, ParamGen, Preset, TailRule, WeightSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfpSettings {
    pub n: usize,
    pub mode: RateMode,
    pub t_max: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecDocument {
    pub family: Family,
    pub generator: ParamGen,
    pub p: Option<Rational>,
    pub compute: ClassifyOptions,
    pub cfp: Option<CfpSettings>,
}

impl Default for SpecDocument {
    fn default() -> Self {
        SpecDocument {
            family: Family::Assembly,
            generator: ParamGen::Preset(Preset::Permutations),
            p: None,
            compute: ClassifyOptions::default(),
            cfp: None,
        }
    }
}

impl SpecDocument {
    pub fn weights(&self) -> crate::Result<WeightSpec> {
        WeightSpec::new(self.family, self.generator.clone(), self.p.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub document: SpecDocument,
    /// Unknown keys skipped in lenient mode.
    pub warnings: Vec<SpecError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Top,
    Structure,
    Compute,
    Cfp,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Top => "top level",
            Section::Structure => "[structure]",
            Section::Compute => "[compute]",
            Section::Cfp => "[cfp]",
        }
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    column: usize,
    value_column: usize,
}

const STRUCTURE_KEYS: &[&str] = &["family", "generator", "p", "tail"];
const COMPUTE_KEYS: &[&str] = &["N", "mode", "window", "tol", "l_max"];
const CFP_KEYS: &[&str] = &["n", "gauge", "t_max", "seed"];

/// Splits `value[3]` into ("value", 3).
fn indexed(key: &str) -> Option<(&str, &str)> {
    let open = key.find('[')?;
    let inner = key[open + 1..].strip_suffix(']')?;
    Some((&key[..open], inner))
}

fn section_accepts(section: Section, key: &str) -> bool {
    let base = indexed(key).map_or(key, |(b, _)| b);
    let structure = STRUCTURE_KEYS.contains(&key) || base == "value" || base == "row";
    match section {
        Section::Top => structure || COMPUTE_KEYS.contains(&key),
        Section::Structure => structure,
        Section::Compute => COMPUTE_KEYS.contains(&key),
        Section::Cfp => CFP_KEYS.contains(&key),
    }
}

/// Parses strictly: unknown keys are errors.
pub fn parse_spec(text: &str) -> Result<SpecDocument, Vec<SpecError>> {
    parse_spec_with(text, false).map(|p| p.document)
}

pub fn parse_spec_with(text: &str, lenient: bool) -> Result<Parsed, Vec<SpecError>> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let mut section = Section::Top;
    let mut seen_cfp = None;
    // Keys are stored with a section tag so `[cfp] n` cannot clash.
    let mut entries: BTreeMap<(bool, String), Entry> = BTreeMap::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len() + 1;
        if let Some(head) = trimmed.strip_prefix('[') {
            section = match head.strip_suffix(']').map(str::trim) {
                Some("structure") => Section::Structure,
                Some("compute") => Section::Compute,
                Some("cfp") => {
                    seen_cfp.get_or_insert(line);
                    Section::Cfp
                }
                _ => {
                    errors.push(SpecError { line, column: indent, message: format!("unknown section {trimmed}") });
                    continue;
                }
            };
            continue;
        }
        let Some(eq) = content.find('=') else {
            errors.push(SpecError { line, column: indent, message: "expected key = value".into() });
            continue;
        };
        let key = content[..eq].trim();
        let value = content[eq + 1..].trim();
        let value_column = eq + 2 + (content[eq + 1..].len() - content[eq + 1..].trim_start().len());
        if key.is_empty() {
            errors.push(SpecError { line, column: indent, message: "missing key before '='".into() });
            continue;
        }
        if !section_accepts(section, key) {
            let e = SpecError { line, column: indent, message: format!("unknown key {key:?} in {}", section.name()) };
            if lenient {
                warnings.push(e);
            } else {
                errors.push(e);
            }
            continue;
        }
        let slot = (section == Section::Cfp, key.to_string());
        if let Some(prev) = entries.get(&slot) {
            errors.push(SpecError {
                line,
                column: indent,
                message: format!("duplicate key {key:?} (first set on line {})", prev.line),
            });
            continue;
        }
        entries.insert(slot, Entry { value: value.to_string(), line, column: indent, value_column });
    }
    let mut b = Builder { entries, errors, end_line: last_line.max(1) };
    let document = b.build(seen_cfp);
    if b.errors.is_empty() {
        Ok(Parsed { document: document.expect("no errors"), warnings })
    } else {
        b.errors.sort_by_key(|e| (e.line, e.column));
        Err(b.errors)
    }
}

struct Builder {
    entries: BTreeMap<(bool, String), Entry>,
    errors: Vec<SpecError>,
    end_line: usize,
}

impl Builder {
    fn get(&self, cfp: bool, key: &str) -> Option<&Entry> {
        self.entries.get(&(cfp, key.to_string()))
    }

    fn fail(&mut self, e: &Entry, message: impl Into<String>) {
        self.errors.push(SpecError { line: e.line, column: e.value_column, message: message.into() });
    }

    fn missing(&mut self, message: impl Into<String>) {
        self.errors.push(SpecError { line: self.end_line, column: 1, message: message.into() });
    }

    fn parse_with<T>(&mut self, cfp: bool, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        let e = self.get(cfp, key)?.clone();
        match f(&e.value) {
            Ok(v) => Some(v),
            Err(m) => {
                self.fail(&e, format!("{key}: {m}"));
                None
            }
        }
    }

    fn build(&mut self, cfp_line: Option<usize>) -> Option<SpecDocument> {
        let defaults = ClassifyOptions::default();
        let mode = self
            .parse_with(false, "mode", |v| Mode::parse(v).ok_or_else(|| "expected exact or float".into()))
            .unwrap_or(defaults.mode);
        let decimals = mode == Mode::Float;
        let positive = |v: &str| -> Result<usize, String> {
            v.parse::<usize>().ok().filter(|n| *n >= 1).ok_or_else(|| "expected an integer ≥ 1".into())
        };
        let compute = ClassifyOptions {
            n: self
                .parse_with(false, "N", |v| v.parse::<usize>().map_err(|_| "expected an integer ≥ 0".into()))
                .unwrap_or(defaults.n),
            window: self.parse_with(false, "window", positive).unwrap_or(defaults.window),
            tol: self
                .parse_with(false, "tol", |v| {
                    v.parse::<f64>().ok().filter(|t| *t > 0.0 && t.is_finite()).ok_or_else(|| "expected a positive number".into())
                })
                .unwrap_or(defaults.tol),
            l_max: self.parse_with(false, "l_max", positive).unwrap_or(defaults.l_max),
            mode,
        };

        let family = match self.get(false, "family").cloned() {
            None => {
                self.missing("missing required key family");
                None
            }
            Some(e) => match Family::parse(&e.value) {
                Some(f) => Some(f),
                None => {
                    self.fail(&e, format!("unknown family {:?}", e.value));
                    None
                }
            },
        };
        let p = self.parse_with(false, "p", |v| parse_rational(v, decimals).map_err(|e| e.to_string()));
        let generator = self.generator(decimals);

        let cfp = cfp_line.and_then(|line| self.cfp(line, family));

        let (family, generator) = (family?, generator?);
        if !self.errors.is_empty() {
            return None;
        }
        let document = SpecDocument { family, generator, p, compute, cfp };
        if let Err(err) = document.weights() {
            let message = err.to_string();
            let anchor = if message.contains(" p ") || message.starts_with("p ") || message.contains("requires p") {
                self.get(false, "p").or_else(|| self.get(false, "family"))
            } else {
                self.get(false, "generator")
            };
            let anchor = anchor.cloned().expect("family and generator are present");
            self.fail(&anchor, message);
            return None;
        }
        Some(document)
    }

    fn tail(&mut self) -> TailRule {
        self.parse_with(false, "tail", |v| {
            TailRule::parse(v).ok_or_else(|| "expected zero, repeat-last or error-beyond".into())
        })
        .unwrap_or(TailRule::ErrorBeyond)
    }

    /// Collects `base[1]`, `base[2]`, ... requiring contiguous indices.
    fn indexed_values(&mut self, base: &str) -> Option<Vec<Entry>> {
        let mut found: BTreeMap<usize, Entry> = BTreeMap::new();
        let keys: Vec<(String, Entry)> = self
            .entries
            .iter()
            .filter(|((cfp, _), _)| !cfp)
            .filter_map(|((_, k), e)| indexed(k).filter(|(b, _)| *b == base).map(|(_, i)| (i.to_string(), e.clone())))
            .collect();
        let mut ok = true;
        for (idx, e) in keys {
            match idx.parse::<usize>() {
                Ok(j) if j >= 1 => {
                    found.insert(j, e);
                }
                _ => {
                    self.errors.push(SpecError {
                        line: e.line,
                        column: e.column,
                        message: format!("{base} index must be an integer ≥ 1, got {idx:?}"),
                    });
                    ok = false;
                }
            }
        }
        for (expected, (j, e)) in found.iter().enumerate() {
            if *j != expected + 1 {
                self.errors.push(SpecError {
                    line: e.line,
                    column: e.column,
                    message: format!("{base}[{}] is missing before {base}[{j}]", expected + 1),
                });
                return None;
            }
        }
        if found.is_empty() {
            self.missing(format!("generator needs at least {base}[1]"));
            return None;
        }
        ok.then(|| found.into_values().collect())
    }

    fn generator(&mut self, decimals: bool) -> Option<ParamGen> {
        let Some(e) = self.get(false, "generator").cloned() else {
            self.missing("missing required key generator");
            return None;
        };
        let rational = |s: &str| parse_rational(s, decimals).map_err(|e| e.to_string());
        let text = e.value.trim();
        match text {
            "table" => {
                let tail = self.tail();
                let entries = self.indexed_values("value")?;
                let mut values = Vec::new();
                for v in entries {
                    match rational(&v.value) {
                        Ok(r) => values.push(r),
                        Err(m) => self.fail(&v, m),
                    }
                }
                Some(ParamGen::Table { values, tail })
            }
            "rows" => {
                let tail = self.tail();
                let entries = self.indexed_values("row")?;
                let mut rows = Vec::new();
                for v in entries {
                    match v.value.split(',').map(&rational).collect::<Result<Vec<_>, _>>() {
                        Ok(r) => rows.push(r),
                        Err(m) => self.fail(&v, m),
                    }
                }
                Some(ParamGen::Rows { rows, tail })
            }
            _ => {
                let (name, args) = match text.find('(') {
                    Some(open) => {
                        let Some(inner) = text[open + 1..].strip_suffix(')') else {
                            self.fail(&e, "unbalanced parentheses in generator");
                            return None;
                        };
                        let args: Vec<&str> = if inner.trim().is_empty() { vec![] } else { inner.split(',').collect() };
                        (text[..open].trim(), args)
                    }
                    None => (text, vec![]),
                };
                let args = match args.iter().map(|a| rational(a)).collect::<Result<Vec<_>, _>>() {
                    Ok(a) => a,
                    Err(m) => {
                        self.fail(&e, m);
                        return None;
                    }
                };
                if name == "rv" {
                    if args.len() != 3 {
                        self.fail(&e, "rv takes three arguments: rv(c, alpha, y)");
                        return None;
                    }
                    let mut it = args.into_iter();
                    let (c, alpha, y) = (it.next()?, it.next()?, it.next()?);
                    return Some(ParamGen::RegularlyVarying { c, alpha, y });
                }
                match Preset::from_parts(name, &args) {
                    Ok(p) => Some(ParamGen::Preset(p)),
                    Err(err) => {
                        self.fail(&e, err.to_string());
                        None
                    }
                }
            }
        }
    }

    fn cfp(&mut self, line: usize, family: Option<Family>) -> Option<CfpSettings> {
        let n = match self.parse_with(true, "n", |v| {
            v.parse::<usize>().ok().filter(|n| *n >= 1).ok_or_else(|| "expected an integer ≥ 1".into())
        }) {
            Some(n) => Some(n),
            None if self.get(true, "n").is_none() => {
                self.errors.push(SpecError { line, column: 1, message: "[cfp] requires n".into() });
                None
            }
            None => None,
        };
        let default_mode = match family {
            Some(Family::Assembly) => RateMode::MeanField,
            _ => RateMode::RatioGauge,
        };
        let mode = self
            .parse_with(true, "gauge", |v| RateMode::parse(v).ok_or_else(|| "expected mean-field or ratio-gauge".into()))
            .unwrap_or(default_mode);
        let t_max = self
            .parse_with(true, "t_max", |v| {
                v.parse::<f64>().ok().filter(|t| *t >= 0.0 && t.is_finite()).ok_or_else(|| "expected a number ≥ 0".into())
            })
            .unwrap_or(1000.0);
        let seed = self.parse_with(true, "seed", |v| v.parse::<u64>().map_err(|_| "expected an unsigned integer".into())).unwrap_or(0);
        Some(CfpSettings { n: n?, mode, t_max, seed })
    }
}

fn join(values: &[Rational]) -> String {
    values.iter().map(format_rational).collect::<Vec<_>>().join(", ")
}

/// Canonical text: fixed key order, every default written out.
pub fn serialize_spec(doc: &SpecDocument) -> String {
    let mut out = String::from("[structure]\n");
    out += &format!("family = {}\n", doc.family);
    match &doc.generator {
        ParamGen::Preset(p) => {
            let args = p.args();
            if args.is_empty() && !matches!(p, Preset::Ewens(_)) {
                out += &format!("generator = {}\n", p.name());
            } else {
                out += &format!("generator = {}({})\n", p.name(), join(&args));
            }
        }
        ParamGen::RegularlyVarying { c, alpha, y } => {
            out += &format!("generator = rv({})\n", join(&[c.clone(), alpha.clone(), y.clone()]));
        }
        ParamGen::Table { values, tail } => {
            out += "generator = table\n";
            out += &format!("tail = {}\n", tail.name());
            for (i, v) in values.iter().enumerate() {
                out += &format!("value[{}] = {}\n", i + 1, format_rational(v));
            }
        }
        ParamGen::Rows { rows, tail } => {
            out += "generator = rows\n";
            out += &format!("tail = {}\n", tail.name());
            for (i, r) in rows.iter().enumerate() {
                out += &format!("row[{}] = {}\n", i + 1, join(r));
            }
        }
    }
    if let Some(p) = &doc.p {
        out += &format!("p = {}\n", format_rational(p));
    }
    let c = &doc.compute;
    out += &format!(
        "\n[compute]\nN = {}\nmode = {}\nwindow = {}\ntol = {}\nl_max = {}\n",
        c.n,
        c.mode.name(),
        c.window,
        c.tol,
        c.l_max
    );
    if let Some(cfp) = &doc.cfp {
        out += &format!(
            "\n[cfp]\nn = {}\ngauge = {}\nt_max = {}\nseed = {}\n",
            cfp.n,
            cfp.mode.name(),
            cfp.t_max,
            cfp.seed
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{frac, int};

    fn err(text: &str) -> Vec<SpecError> {
        parse_spec(text).expect_err("should fail")
    }

    #[test]
    fn minimal_document() {
        let doc = parse_spec("family=multiset\ngenerator=integer_partitions\np=1/2\nN=200").unwrap();
        assert_eq!(doc.family, Family::Multiset);
        assert_eq!(doc.generator, ParamGen::Preset(Preset::IntegerPartitions));
        assert_eq!(doc.p, Some(frac(1, 2)));
        assert_eq!(doc.compute.n, 200);
        assert_eq!(doc.compute.window, 25);
        assert!(doc.cfp.is_none());
    }

    #[test]
    fn domain_errors_are_positioned() {
        let e = err("family=multiset\ngenerator=integer_partitions\np=3/2");
        assert_eq!(e.len(), 1);
        assert_eq!((e[0].line, e[0].column), (3, 3));
        assert!(e[0].message.contains("p must satisfy 0<p<1"), "{}", e[0].message);
        let e = err("family=assembly\ngenerator=frobnicate");
        assert!(e[0].message.contains("unknown preset"));
        assert_eq!(e[0].line, 2);
    }

    #[test]
    fn rv_generator() {
        let doc = parse_spec("family=assembly\ngenerator=rv(1, -1, 1)").unwrap();
        assert_eq!(doc.generator, ParamGen::RegularlyVarying { c: int(1), alpha: int(-1), y: int(1) });
        let w = doc.weights().unwrap();
        // a_j = 1/j: the logarithmic class, mean E Z_j = 1/j.
        assert_eq!(w.param(4).unwrap().exact().cloned(), Some(frac(1, 4)));
    }

    #[test]
    fn decimals_only_in_float_mode() {
        let e = err("family=multiset\ngenerator=integer_partitions\np=0.5");
        assert!(e[0].message.contains("float mode"));
        let doc = parse_spec("mode=float\nfamily=multiset\ngenerator=integer_partitions\np=0.5").unwrap();
        assert_eq!(doc.p, Some(frac(1, 2)));
    }

    #[test]
    fn strict_and_lenient_unknown_keys() {
        let text = "family=assembly\ngenerator=permutations\ncolour = blue\n";
        let e = err(text);
        assert_eq!((e[0].line, e[0].column), (3, 1));
        let ok = parse_spec_with(text, true).unwrap();
        assert_eq!(ok.warnings.len(), 1);
        assert_eq!(ok.document.generator, ParamGen::Preset(Preset::Permutations));
    }

    #[test]
    fn syntax_errors() {
        let corpus = [
            "",
            "family=assembly",
            "generator=permutations",
            "family=assembly\ngenerator=permutations\n[bogus]",
            "family=assembly\ngenerator=permutations\njust words",
            "family=assembly\nfamily=assembly\ngenerator=permutations",
            "family=assembly\ngenerator=ewens(2",
            "family=assembly\ngenerator=table\nvalue[2]=1",
            "family=assembly\ngenerator=permutations\n[cfp]\ngauge=mean-field",
            "family=assembly\ngenerator=permutations\nN=-3",
            "family=assembly\ngenerator=permutations\n[compute]\nfamily=assembly",
            "family=selection\ngenerator=distinct_parts",
            "family=assembly\ngenerator=rv(1, 2)",
            "family=blob\ngenerator=permutations",
            "= 3",
        ];
        for text in corpus {
            let e = parse_spec(text).expect_err(text);
            assert!(!e.is_empty());
            assert!(e.iter().all(|e| e.line >= 1 && e.column >= 1), "{text:?}: {e:?}");
        }
    }

    #[test]
    fn canonical_form() {
        let a = parse_spec("p=1/2\ngenerator=integer_partitions\nfamily=multiset").unwrap();
        let b = parse_spec("family=multiset\n# note\ngenerator = integer_partitions\np = 2/4\n").unwrap();
        assert_eq!(serialize_spec(&a), serialize_spec(&b));
        let text = serialize_spec(&SpecDocument::default());
        assert_eq!(
            text,
            "[structure]\nfamily = assembly\ngenerator = permutations\n\n[compute]\nN = 400\nmode = exact\nwindow = 25\ntol = 0.001\nl_max = 3\n"
        );
        let t = parse_spec("family=assembly\ngenerator=table\nvalue[3]=3\nvalue[1]=1\nvalue[2]=2\ntail=repeat-last").unwrap();
        let s = serialize_spec(&t);
        assert!(s.contains("tail = repeat-last\nvalue[1] = 1\nvalue[2] = 2\nvalue[3] = 3\n"), "{s}");
        assert_eq!(parse_spec(&s).unwrap(), t);
    }

    #[test]
    fn cfp_section() {
        let doc = parse_spec("family=assembly\ngenerator=permutations\n[cfp]\nn=6\nseed=9\n").unwrap();
        let cfp = doc.cfp.clone().unwrap();
        assert_eq!((cfp.n, cfp.mode, cfp.seed), (6, RateMode::MeanField, 9));
        assert_eq!(parse_spec(&serialize_spec(&doc)).unwrap(), doc);
    }

    #[test]
    fn custom_rows() {
        let doc = parse_spec("family=custom\ngenerator=rows\nrow[1]=1, 2, 1\nrow[2]=2,1\ntail=zero").unwrap();
        assert_eq!(
            doc.generator,
            ParamGen::Rows { rows: vec![vec![int(1), int(2), int(1)], vec![int(2), int(1)]], tail: TailRule::Zero }
        );
        assert_eq!(parse_spec(&serialize_spec(&doc)).unwrap(), doc);
    }
}
