//! Job configuration files: `key = value` lines grouped under `[section]`
//! headers. A `#` at the start of a line or after whitespace begins a
//! comment. Every key must be known to its section and may appear once.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use crate::bounds::{BoundsInput, Envelope, DEFAULT_D_CAP};
use crate::constants::{Backend, ExponentForm, DEFAULT_M_EMPIRICAL, DEFAULT_M_EXACT};
use crate::curve::CurveSpec;
use crate::scan::config::{DEFAULT_M_MAX, DEFAULT_SEED};
use crate::scan::ScanConfig;

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "curve",
        &["label", "a4", "a6", "conductor", "bad_primes", "cm_disc", "serre_primes", "b_e"],
    ),
    (
        "scan",
        &["x_max", "q", "a", "checkpoints", "m_max", "shards", "seed", "crossover"],
    ),
    ("constants", &["backend", "truncation", "exponent_form", "holdout"]),
    ("bounds", &["envelopes", "d_cap", "s", "grid", "compare_from"]),
    ("output", &["dir"]),
];

/// A configuration error, anchored to a line when one is to blame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    pub fn general(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Raw `section.key -> (value, line)` pairs.
#[derive(Debug, Default)]
struct RawConfig {
    entries: HashMap<(String, String), (String, usize)>,
    first_line: HashMap<String, usize>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let t = strip_comment(line).trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(n, "unterminated section header"))?
                    .trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::at(n, format!("unknown section [{name}]")));
                }
                if raw.first_line.insert(name.to_string(), n).is_some() {
                    return Err(ConfigError::at(n, format!("section [{name}] appears twice")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = t
                .split_once('=')
                .ok_or_else(|| ConfigError::at(n, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .as_deref()
                .ok_or_else(|| ConfigError::at(n, "assignment before any [section]"))?;
            let known = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !known.contains(&key) {
                return Err(ConfigError::at(n, format!("unknown key `{key}` in [{sec}]")));
            }
            let slot = (sec.to_string(), key.to_string());
            if raw.entries.insert(slot, (value.to_string(), n)).is_some() {
                return Err(ConfigError::at(n, format!("duplicate key `{key}` in [{sec}]")));
            }
        }
        Ok(raw)
    }

    fn get(&self, sec: &str, key: &str) -> Option<(&str, usize)> {
        self.entries
            .get(&(sec.to_string(), key.to_string()))
            .map(|(v, n)| (v.as_str(), *n))
    }

    fn line_of(&self, sec: &str, key: &str) -> Option<usize> {
        self.get(sec, key).map(|(_, n)| n).or_else(|| self.first_line.get(sec).copied())
    }

    fn parsed<T>(
        &self,
        sec: &str,
        key: &str,
        parse: impl Fn(&str) -> Option<T>,
        what: &str,
    ) -> Result<Option<T>, ConfigError> {
        match self.get(sec, key) {
            None => Ok(None),
            Some((v, n)) => parse(v)
                .map(Some)
                .ok_or_else(|| ConfigError::at(n, format!("`{key}` must be {what}, got `{v}`"))),
        }
    }

    fn required<T>(
        &self,
        sec: &str,
        key: &str,
        parse: impl Fn(&str) -> Option<T>,
        what: &str,
    ) -> Result<T, ConfigError> {
        self.parsed(sec, key, parse, what)?.ok_or_else(|| ConfigError {
            line: self.first_line.get(sec).copied(),
            message: format!("missing required key `{key}` in [{sec}]"),
        })
    }
}

/// Drops a `#` comment that starts the line or follows whitespace.
fn strip_comment(line: &str) -> &str {
    let b = line.as_bytes();
    match (0..b.len()).find(|&i| b[i] == b'#' && (i == 0 || b[i - 1].is_ascii_whitespace())) {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Unsigned integer; also accepts `1e6`, `10^6` and `_` separators.
pub fn parse_u64(s: &str) -> Option<u64> {
    let s: String = s.chars().filter(|&c| c != '_').collect();
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    let (mantissa, exp) = s.split_once('e').or_else(|| s.split_once("E"))?;
    let m: u64 = mantissa.parse().ok()?;
    let e: u32 = exp.parse().ok()?;
    m.checked_mul(10u64.checked_pow(e)?)
}

fn parse_power(s: &str) -> Option<u64> {
    match s.split_once('^') {
        Some((b, e)) => b.trim().parse::<u64>().ok()?.checked_pow(e.trim().parse().ok()?),
        None => parse_u64(s),
    }
}

pub fn parse_i64(s: &str) -> Option<i64> {
    s.parse().ok()
}

pub fn parse_list(s: &str) -> Option<Vec<u64>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|t| parse_power(t.trim())).collect()
}

pub fn parse_backend(s: &str) -> Option<Backend> {
    match s {
        "exact" | "exact_generic" => Some(Backend::Exact),
        "empirical" => Some(Backend::Empirical),
        "hybrid" => Some(Backend::Hybrid),
        _ => None,
    }
}

pub fn parse_form(s: &str) -> Option<ExponentForm> {
    match s {
        "exact" => Some(ExponentForm::Exact),
        "literal" => Some(ExponentForm::Literal),
        "printed" => Some(ExponentForm::Printed),
        _ => None,
    }
}

fn parse_envelopes(s: &str) -> Option<Vec<Envelope>> {
    s.split(',').map(|t| Envelope::parse(t.trim())).collect()
}

fn parse_holdout(s: &str) -> Option<(u64, u64)> {
    let (lo, hi) = s.split_once(',')?;
    Some((parse_power(lo.trim())?, parse_power(hi.trim())?))
}

/// Everything a subcommand may need, validated.
#[derive(Clone, Debug, PartialEq)]
pub struct JobConfig {
    pub scan: ScanConfig,
    pub out_dir: PathBuf,
    pub backend: Backend,
    pub truncation: u64,
    pub exponent_form: ExponentForm,
    /// Range `(lo, hi]` for the empirical densities.
    pub holdout: (u64, u64),
    pub envelopes: Vec<Envelope>,
    pub d_cap: u64,
    pub s: Option<f64>,
    pub grid: Vec<u64>,
    /// Smallest checkpoint used when comparing residuals.
    pub compare_from: u64,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub shards: Option<usize>,
    pub seed: Option<u64>,
    pub checkpoints: Option<Vec<u64>>,
    pub m_max: Option<u64>,
    pub truncation: Option<u64>,
    pub backend: Option<Backend>,
}

fn default_envelopes(spec: &CurveSpec) -> Vec<Envelope> {
    if spec.is_cm() {
        vec![Envelope::CmGrh, Envelope::ExpCm]
    } else {
        vec![Envelope::NoncmGrh, Envelope::ExpNoncm1]
    }
}

fn default_grid(x_max: u64) -> Vec<u64> {
    let mut g = Vec::new();
    let mut x = 100u64;
    while x <= x_max {
        g.push(x);
        match x.checked_mul(10) {
            Some(n) => x = n,
            None => break,
        }
    }
    if g.last() != Some(&x_max) && x_max >= 16 {
        g.push(x_max);
    }
    g
}

impl JobConfig {
    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;
        let int = |s: &str| parse_u64(s);

        let a4 = raw.required("curve", "a4", parse_i64, "an integer")?;
        let a6 = raw.required("curve", "a6", parse_i64, "an integer")?;
        let conductor = raw.required("curve", "conductor", int, "a positive integer")?;
        let label = raw
            .get("curve", "label")
            .map(|(v, _)| v.to_string())
            .unwrap_or_else(|| format!("[{a4},{a6}]"));
        let curve_line = raw.first_line.get("curve").copied();
        let mut spec = CurveSpec::new(&label, a4, a6, conductor)
            .map_err(|e| ConfigError { line: curve_line, message: e.to_string() })?;
        if let Some(b) = raw.parsed("curve", "bad_primes", parse_list, "a list of primes")? {
            spec.bad_primes = b.into_iter().collect::<BTreeSet<u64>>();
        }
        spec.cm_disc = raw.parsed("curve", "cm_disc", int, "a positive integer")?;
        if let Some(s) = raw.parsed("curve", "serre_primes", parse_list, "a list of primes")? {
            spec = spec.with_serre_primes(s);
        }
        spec.b_e = raw.parsed("curve", "b_e", int, "a positive integer")?;
        spec.validate()
            .map_err(|e| ConfigError { line: curve_line, message: e.to_string() })?;

        let x_max = raw.required("scan", "x_max", parse_power, "a positive integer")?;
        let q = raw.parsed("scan", "q", int, "a positive integer")?.unwrap_or(1);
        let a = raw.parsed("scan", "a", int, "a nonnegative integer")?.unwrap_or(1 % q.max(1));
        let mut scan = ScanConfig::new(spec.clone(), x_max, q, a);
        if let Some(c) = raw.parsed("scan", "checkpoints", parse_list, "a list of integers")? {
            scan.checkpoints = c;
        }
        scan.m_max = raw.parsed("scan", "m_max", int, "a positive integer")?.unwrap_or(DEFAULT_M_MAX);
        scan.shards = raw
            .parsed("scan", "shards", |s| s.parse::<usize>().ok(), "a positive integer")?
            .unwrap_or(1);
        scan.seed = raw.parsed("scan", "seed", int, "an integer")?.unwrap_or(DEFAULT_SEED);
        if let Some(c) = raw.parsed("scan", "crossover", int, "an integer")? {
            scan.crossover = c;
        }

        let backend = raw
            .parsed("constants", "backend", parse_backend, "exact, empirical or hybrid")?
            .unwrap_or(Backend::Hybrid);
        let truncation = raw.parsed("constants", "truncation", int, "a positive integer")?;
        let exponent_form = raw
            .parsed("constants", "exponent_form", parse_form, "exact, literal or printed")?
            .unwrap_or(ExponentForm::Exact);
        let holdout = raw
            .parsed("constants", "holdout", parse_holdout, "`lo, hi`")?
            .unwrap_or((x_max / 2, x_max));

        let envelopes = raw
            .parsed("bounds", "envelopes", parse_envelopes, "a list of envelope names")?
            .unwrap_or_else(|| default_envelopes(&spec));
        let d_cap = raw.parsed("bounds", "d_cap", int, "a positive integer")?.unwrap_or(DEFAULT_D_CAP);
        let s = raw.parsed("bounds", "s", |v| v.parse::<f64>().ok(), "a number")?;
        let grid = raw
            .parsed("bounds", "grid", parse_list, "a list of integers")?
            .unwrap_or_else(|| default_grid(x_max));
        let compare_from = raw
            .parsed("bounds", "compare_from", parse_power, "an integer")?
            .unwrap_or_else(|| (x_max / 1000).clamp(16, 10_000));

        let out_dir = match raw.get("output", "dir") {
            Some((v, _)) => PathBuf::from(v),
            None => PathBuf::from(format!("out/{}", sanitize(&spec.label))),
        };

        let mut job = JobConfig {
            scan,
            out_dir,
            backend,
            truncation: 0,
            exponent_form,
            holdout,
            envelopes,
            d_cap,
            s,
            grid,
            compare_from,
        };
        job.apply(overrides);
        job.truncation = overrides.truncation.or(truncation).unwrap_or(match job.backend {
            Backend::Exact => DEFAULT_M_EXACT,
            _ => DEFAULT_M_EMPIRICAL,
        });
        job.validate(&raw)?;
        Ok(job)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::general(e.to_string()))?;
        JobConfig::parse(&text, overrides)
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.out {
            self.out_dir = d.clone();
        }
        if let Some(s) = o.shards {
            self.scan.shards = s;
        }
        if let Some(s) = o.seed {
            self.scan.seed = s;
        }
        if let Some(c) = &o.checkpoints {
            self.scan.checkpoints = c.clone();
        }
        if let Some(m) = o.m_max {
            self.scan.m_max = m;
        }
        if let Some(b) = o.backend {
            self.backend = b;
        }
    }

    fn validate(&self, raw: &RawConfig) -> Result<(), ConfigError> {
        let anchor = |sec: &str, key: &str, msg: String| ConfigError {
            line: raw.line_of(sec, key),
            message: msg,
        };
        if self.scan.q == 0 {
            return Err(anchor("scan", "q", "q must be positive".into()));
        }
        if let Err(e) = self.scan.progression() {
            return Err(anchor("scan", "a", e.to_string()));
        }
        if let Err(e) = self.scan.validate() {
            return Err(anchor("scan", "x_max", e.to_string()));
        }
        if self.truncation == 0 {
            return Err(anchor("constants", "truncation", "truncation must be positive".into()));
        }
        let (lo, hi) = self.holdout;
        if lo >= hi || hi > self.scan.x_max {
            return Err(anchor(
                "constants",
                "holdout",
                format!("holdout ({lo}, {hi}] must be nonempty and inside [2, x_max]"),
            ));
        }
        let spec = &self.scan.curve;
        for e in &self.envelopes {
            let missing = match e {
                Envelope::Siegel | Envelope::SiegelExp if self.s.is_none() => Some("bounds.s"),
                Envelope::ExpNoncm2 if spec.b_e.is_none() => Some("curve.b_e"),
                Envelope::AgCm | Envelope::ExpCmAg if spec.cm_disc.is_none() => Some("curve.cm_disc"),
                _ => None,
            };
            if let Some(key) = missing {
                return Err(anchor(
                    "bounds",
                    "envelopes",
                    format!("envelope {} needs {key}", e.name()),
                ));
            }
        }
        if let Some(s) = self.s {
            if !(s >= -1.0) {
                return Err(anchor("bounds", "s", format!("S must be at least -1, got {s}")));
            }
        }
        if self.d_cap == 0 {
            return Err(anchor("bounds", "d_cap", "d_cap must be positive".into()));
        }
        if self.grid.iter().any(|&x| x < 16) {
            return Err(anchor("bounds", "grid", "grid points must be at least 16".into()));
        }
        Ok(())
    }

    /// `A(E)`, defaulting to 30 when the Serre set is not supplied.
    pub fn a_e(&self) -> u64 {
        self.scan.curve.serre_constant().unwrap_or(30)
    }

    pub fn bounds_input(&self, x: f64) -> BoundsInput {
        let spec = &self.scan.curve;
        let a_e = self.a_e();
        BoundsInput {
            x,
            q: self.scan.q,
            a: self.scan.a,
            n_e: spec.conductor,
            d: spec.cm_disc,
            m_e: spec.m_e(a_e),
            a_e,
            b_e: spec.b_e,
            s: self.s,
            d_cap: self.d_cap,
        }
    }
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Checkpoint schedule from the command line.
pub fn parse_checkpoint_arg(s: &str) -> Result<Vec<u64>, String> {
    parse_list(s).ok_or_else(|| format!("bad checkpoint list `{s}`"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::default_checkpoints;
    use proptest::prelude::*;

    const BASIC: &str = "\
# generic curve
[curve]
label = x3+x+1
a4 = 1
a6 = 1
conductor = 496

[scan]
x_max = 1e5
q = 4
a = 1
";

    #[test]
    fn parses_with_defaults() {
        let job = JobConfig::parse(BASIC, &Overrides::default()).unwrap();
        assert_eq!(job.scan.x_max, 100_000);
        assert_eq!((job.scan.q, job.scan.a), (4, 1));
        assert_eq!(job.scan.checkpoints, default_checkpoints(100_000));
        assert_eq!(job.backend, Backend::Hybrid);
        assert_eq!(job.truncation, DEFAULT_M_EMPIRICAL);
        assert_eq!(job.holdout, (50_000, 100_000));
        assert_eq!(job.envelopes, vec![Envelope::NoncmGrh, Envelope::ExpNoncm1]);
        assert_eq!(job.out_dir, PathBuf::from("out/x3_x_1"));
        assert_eq!(job.bounds_input(1e4).m_e, 930);
    }

    #[test]
    fn overrides_win() {
        let o = Overrides {
            shards: Some(8),
            m_max: Some(7),
            backend: Some(Backend::Exact),
            checkpoints: Some(vec![1000, 100_000]),
            ..Default::default()
        };
        let job = JobConfig::parse(BASIC, &o).unwrap();
        assert_eq!(job.scan.shards, 8);
        assert_eq!(job.scan.m_max, 7);
        assert_eq!(job.truncation, DEFAULT_M_EXACT);
        assert_eq!(job.scan.checkpoints, vec![1000, 100_000]);
    }

    fn err(text: &str) -> ConfigError {
        JobConfig::parse(text, &Overrides::default()).unwrap_err()
    }

    #[test]
    fn rejections_are_line_anchored() {
        let e = err(&format!("{BASIC}colour = red\n"));
        assert_eq!(e.line, Some(12));
        assert!(e.message.contains("unknown key"));
        let e = err(&BASIC.replace("a = 1", "a = 2"));
        assert_eq!(e.line, Some(11));
        let e = err(&BASIC.replace("[scan]", "[sacn]"));
        assert_eq!(e.line, Some(8));
        let e = err(&BASIC.replace("x_max = 1e5", "x_max = lots"));
        assert_eq!(e.line, Some(9));
        let e = err(&format!("{BASIC}q = 5\n"));
        assert!(e.message.contains("duplicate"));
        let e = err("a4 = 1\n");
        assert_eq!(e.line, Some(1));
        let e = err(&BASIC.replace("a6 = 1\n", ""));
        assert!(e.message.contains("a6"));
        assert_eq!(e.to_string(), format!("line 2: {}", e.message));
    }

    #[test]
    fn missing_envelope_inputs_are_config_errors() {
        let text = format!("{BASIC}[bounds]\nenvelopes = noncm_grh, siegel\n");
        let e = err(&text);
        assert_eq!(e.line, Some(13));
        assert!(e.message.contains("bounds.s"));
        let ok = format!("{BASIC}[bounds]\nenvelopes = noncm_grh, siegel\ns = -1\n");
        assert!(JobConfig::parse(&ok, &Overrides::default()).is_ok());
    }

    #[test]
    fn inline_comments() {
        let text = BASIC.replace("conductor = 496", "conductor = 496   # 2^4 * 31")
            .replace("label = x3+x+1", "label = x3+x+1#b");
        let job = JobConfig::parse(&text, &Overrides::default()).unwrap();
        assert_eq!(job.scan.curve.conductor, 496);
        assert_eq!(job.scan.curve.label, "x3+x+1#b");
    }

    #[test]
    fn number_forms() {
        assert_eq!(parse_u64("1_000"), Some(1000));
        assert_eq!(parse_u64("5e6"), Some(5_000_000));
        assert_eq!(parse_power("10^7"), Some(10_000_000));
        assert_eq!(parse_u64("1e30"), None);
        assert_eq!(parse_list("10, 1e3,10^4"), Some(vec![10, 1000, 10_000]));
        assert_eq!(parse_u64("-3"), None);
    }

    fn line_strategy() -> impl Strategy<Value = String> {
        let keys = prop::sample::select(vec![
            "a4", "a6", "conductor", "x_max", "q", "a", "m_max", "shards", "crossover",
            "checkpoints", "backend", "truncation", "holdout", "envelopes", "s", "grid", "bad_primes",
            "serre_primes", "cm_disc", "b_e", "d_cap", "label", "bogus",
        ]);
        let values = prop::sample::select(vec![
            "0", "1", "-1", "2", "4", "5", "6", "31", "496", "1e5", "10^6", "2^70", "x", "",
            "hybrid", "exact", "siegel", "1,2", "100,50", "2,3", "1e3,1e5", "-0.5", "-2",
        ]);
        let sections = prop::sample::select(vec![
            "[curve]", "[scan]", "[constants]", "[bounds]", "[output]", "[nope]",
        ]);
        prop_oneof![
            3 => (keys, values).prop_map(|(k, v)| format!("{k} = {v}")),
            1 => sections.prop_map(String::from),
            1 => "[ -~]{0,12}",
        ]
    }

    proptest! {
        #[test]
        fn fuzzed_configs_never_yield_invalid_jobs(lines in prop::collection::vec(line_strategy(), 0..24)) {
            let text = lines.join("\n");
            if let Ok(job) = JobConfig::parse(&text, &Overrides::default()) {
                prop_assert!(job.scan.validate().is_ok());
                prop_assert!(job.truncation >= 1);
                prop_assert!(job.holdout.0 < job.holdout.1 && job.holdout.1 <= job.scan.x_max);
            }
        }

        #[test]
        fn fuzzed_basic_edits_never_panic(pos in 0usize..120, junk in "[ -~\n]{0,8}") {
            let mut text = BASIC.to_string();
            let at = pos.min(text.len());
            text.insert_str(at, &junk);
            let _ = JobConfig::parse(&text, &Overrides::default());
        }
    }
}
