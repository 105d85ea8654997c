//! Experiment configuration files.
//!
//! The format is line oriented:
//!
//! ```text
//! # comment
//! [model]
//! family = extremal
//!
//! [distributions.a]
//! kind = lognormal
//! meanlog = -0.75
//! sdlog = 1
//!
//! [distributions.b]
//! kind = constant
//! value = 1
//!
//! [experiment]
//! seed = 7
//! count = 100000
//!
//! [output]
//! dir = out
//! formats = csv, jsonl, svg
//!
//! [assertions]
//! non_arithmetic = true
//! ```
//!
//! Numbers are decimal literals or fractions `p/q`; lists are comma separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use lipmaps_core::model::Arch1Constants;
use lipmaps_core::{DistributionSpec, Family, ModelSpec, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigErrorKind {
    Syntax,
    UnknownSection,
    UnknownKey,
    DuplicateKey,
    MissingKey,
    MalformedNumber,
    UnknownFamily,
    MissingLaw,
    Dimension,
    InvalidLaw,
    InvalidModel,
    InvalidValue,
}

impl ConfigErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ConfigErrorKind::Syntax => "C01-syntax",
            ConfigErrorKind::UnknownSection => "C02-unknown-section",
            ConfigErrorKind::UnknownKey => "C03-unknown-key",
            ConfigErrorKind::DuplicateKey => "C04-duplicate-key",
            ConfigErrorKind::MissingKey => "C05-missing-key",
            ConfigErrorKind::MalformedNumber => "C06-malformed-number",
            ConfigErrorKind::UnknownFamily => "C07-unknown-family",
            ConfigErrorKind::MissingLaw => "C08-missing-law",
            ConfigErrorKind::Dimension => "C09-dimension",
            ConfigErrorKind::InvalidLaw => "C10-invalid-law",
            ConfigErrorKind::InvalidModel => "C11-invalid-model",
            ConfigErrorKind::InvalidValue => "C12-invalid-value",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    /// 1-based line, 0 when the problem is not tied to a line.
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ", self.kind.code())?;
        if self.line > 0 {
            write!(f, "line {}: ", self.line)?;
        }
        if !self.key.is_empty() {
            write!(f, "'{}': ", self.key)?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(kind: ConfigErrorKind, line: usize, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        kind,
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    Cramer,
    Simulate,
    Tail,
    Limit,
    Support,
    Check,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Cramer,
        ExperimentKind::Simulate,
        ExperimentKind::Tail,
        ExperimentKind::Limit,
        ExperimentKind::Support,
        ExperimentKind::Check,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Cramer => "cramer",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Tail => "tail",
            ExperimentKind::Limit => "limit",
            ExperimentKind::Support => "support",
            ExperimentKind::Check => "check",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Backward sampler settings shared by every experiment that needs
/// stationary samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampler {
    pub x0: Point,
    pub tol: f64,
    pub max_depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Cramer {
        s_grid: Vec<f64>,
        /// Monte Carlo draws when `κ` has no closed form.
        draws: usize,
        solver_tol: Option<f64>,
    },
    Simulate {
        count: usize,
    },
    Tail {
        count: usize,
        draws: usize,
    },
    Limit {
        n: usize,
        replicas: usize,
        /// Second horizon whose CF is compared with the first.
        compare_n: Option<usize>,
        t_grid: Option<Vec<f64>>,
        t_points: usize,
        direction: Point,
        /// Stationary samples used for the centering.
        mean_count: usize,
        draws: usize,
    },
    Support {
        depth: usize,
        dedupe_tol: f64,
        fixpoint_tol: f64,
        count: usize,
        eps: f64,
    },
    Check {
        count: usize,
        theta_draws: usize,
        draws: usize,
        s_grid: Vec<f64>,
    },
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::Cramer { .. } => ExperimentKind::Cramer,
            Experiment::Simulate { .. } => ExperimentKind::Simulate,
            Experiment::Tail { .. } => ExperimentKind::Tail,
            Experiment::Limit { .. } => ExperimentKind::Limit,
            Experiment::Support { .. } => ExperimentKind::Support,
            Experiment::Check { .. } => ExperimentKind::Check,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub jsonl: bool,
    pub svg: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Formats,
}

/// User assertions for hypotheses no numeric test can decide.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Assertions {
    /// `log|M|` is not supported on a lattice.
    pub non_arithmetic: bool,
    /// `φ(x) = Σ M_k⋯M_1 x` on the support of the tail measure.
    pub linear_limit: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub experiment: Experiment,
    pub seed: u64,
    pub sampler: Sampler,
    pub output: OutputConfig,
    pub assertions: Assertions,
    /// Every `section.key = value` of the file in sorted order, after
    /// command-line overrides.
    pub echo: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.echo.insert("experiment.seed".into(), seed.to_string());
    }

    pub fn set_output_dir(&mut self, dir: PathBuf) {
        self.echo.insert("output.dir".into(), dir.display().to_string());
        self.output.dir = dir;
    }
}

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

type Section = BTreeMap<String, Entry>;

struct Document {
    sections: BTreeMap<String, (usize, Section)>,
}

fn tokenize(text: &str) -> Result<Document, ConfigError> {
    let mut sections: BTreeMap<String, (usize, Section)> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(ConfigErrorKind::Syntax, line, "", "unterminated section header"))?
                .trim();
            let known = matches!(name, "model" | "experiment" | "output" | "assertions")
                || name.strip_prefix("distributions.").is_some_and(|p| !p.is_empty());
            if !known {
                return Err(err(ConfigErrorKind::UnknownSection, line, name, "unknown section"));
            }
            if sections.contains_key(name) {
                return Err(err(ConfigErrorKind::DuplicateKey, line, name, "section given twice"));
            }
            sections.insert(name.to_string(), (line, Section::new()));
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(ConfigErrorKind::Syntax, line, "", "expected 'key = value'"))?;
        let key = key.trim();
        let valid_key = !key.is_empty()
            && key
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
        if !valid_key {
            return Err(err(ConfigErrorKind::Syntax, line, key, "keys are lowercase snake_case"));
        }
        let section = current
            .as_ref()
            .ok_or_else(|| err(ConfigErrorKind::Syntax, line, key, "key outside of any section"))?;
        let entries = &mut sections.get_mut(section).expect("section registered").1;
        if entries.contains_key(key) {
            return Err(err(ConfigErrorKind::DuplicateKey, line, key, "key given twice"));
        }
        entries.insert(
            key.to_string(),
            Entry {
                value: value.trim().to_string(),
                line,
            },
        );
    }
    Ok(Document { sections })
}

/// Decimal literal or fraction `p/q`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => p.trim().parse::<f64>().ok()? / q.trim().parse::<f64>().ok()?,
        None => s.parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}

/// Typed access to one section with unknown-key detection.
struct Reader<'a> {
    name: String,
    entries: Option<&'a Section>,
    used: Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(doc: &'a Document, name: &str) -> Self {
        Reader {
            name: name.to_string(),
            entries: doc.sections.get(name).map(|(_, s)| s),
            used: Vec::new(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a Entry> {
        self.used.push(key.to_string());
        self.entries.and_then(|e| e.get(key))
    }

    fn label(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn string(&mut self, key: &str) -> Option<(String, usize)> {
        self.raw(key).map(|e| (e.value.clone(), e.line))
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => parse_number(&e.value).map(Some).ok_or_else(|| {
                err(
                    ConfigErrorKind::MalformedNumber,
                    e.line,
                    &self.label(key),
                    format!("malformed number '{}'", e.value),
                )
            }),
        }
    }

    fn required(&mut self, key: &str) -> Result<f64, ConfigError> {
        let line = self.entries.map_or(0, |_| self.line());
        self.number(key)?.ok_or_else(|| {
            err(
                ConfigErrorKind::MissingKey,
                line,
                &self.label(key),
                "required key missing",
            )
        })
    }

    fn line(&self) -> usize {
        self.entries.and_then(|e| e.values().map(|v| v.line).min()).unwrap_or(0)
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let line = self.raw(key).map_or(0, |e| e.line);
        let v = self.number(key)?.unwrap_or(default);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(err(
                ConfigErrorKind::InvalidValue,
                line,
                &self.label(key),
                "must be positive",
            ))
        }
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        let line = self.raw(key).map_or(0, |e| e.line);
        let v = self.number(key)?.unwrap_or(default as f64);
        if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(v as usize)
        } else {
            Err(err(
                ConfigErrorKind::InvalidValue,
                line,
                &self.label(key),
                format!("must be a positive integer (got {v})"),
            ))
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|t| {
                    parse_number(t).ok_or_else(|| {
                        err(
                            ConfigErrorKind::MalformedNumber,
                            e.line,
                            &self.label(key),
                            format!("malformed number '{}'", t.trim()),
                        )
                    })
                })
                .collect::<Result<Vec<f64>, _>>()
                .map(Some),
        }
    }

    fn sorted_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let line = self.raw(key).map_or(0, |e| e.line);
        let v = self.list(key)?;
        if let Some(xs) = &v {
            if xs.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(err(
                    ConfigErrorKind::InvalidValue,
                    line,
                    &self.label(key),
                    "grid must be strictly increasing",
                ));
            }
        }
        Ok(v)
    }

    fn flag(&mut self, key: &str) -> Result<bool, ConfigError> {
        match self.raw(key) {
            None => Ok(false),
            Some(e) => match e.value.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(err(
                    ConfigErrorKind::InvalidValue,
                    e.line,
                    &self.label(key),
                    format!("expected true or false, got '{other}'"),
                )),
            },
        }
    }

    /// Rejects keys that were never asked for.
    fn finish(self) -> Result<(), ConfigError> {
        if let Some(entries) = self.entries {
            for (k, e) in entries {
                if !self.used.iter().any(|u| u == k) {
                    return Err(err(ConfigErrorKind::UnknownKey, e.line, &self.label(k), "unknown key"));
                }
            }
        }
        Ok(())
    }
}

fn parse_law(doc: &Document, param: &str) -> Result<(DistributionSpec, usize), ConfigError> {
    let section = format!("distributions.{param}");
    let header = doc.sections[&section].0;
    let mut r = Reader::new(doc, &section);
    let (kind, kind_line) = r.string("kind").ok_or_else(|| {
        err(
            ConfigErrorKind::MissingKey,
            header,
            &format!("{section}.kind"),
            "law kind missing",
        )
    })?;
    let law = match kind.as_str() {
        "constant" => DistributionSpec::constant(r.required("value")?),
        "discrete" => {
            let values = r.list("values")?;
            let probs = r.list("probabilities")?;
            match (values, probs) {
                (Some(v), Some(p)) => DistributionSpec::discrete(v, p),
                _ => {
                    return Err(err(
                        ConfigErrorKind::MissingKey,
                        header,
                        &section,
                        "discrete law needs 'values' and 'probabilities'",
                    ))
                }
            }
        }
        "lognormal" => DistributionSpec::lognormal(r.required("meanlog")?, r.required("sdlog")?),
        "uniform" => DistributionSpec::uniform(r.required("low")?, r.required("high")?),
        "normal" => DistributionSpec::normal(r.required("mean")?, r.required("sd")?),
        other => {
            return Err(err(
                ConfigErrorKind::InvalidLaw,
                kind_line,
                &format!("{section}.kind"),
                format!("unknown law kind '{other}' (constant, discrete, lognormal, uniform, normal)"),
            ))
        }
    };
    r.finish()?;
    let law = law.map_err(|e| err(ConfigErrorKind::InvalidLaw, header, &section, e.to_string()))?;
    Ok((law, header))
}

fn parse_model(doc: &Document) -> Result<(ModelSpec, usize), ConfigError> {
    let header = doc
        .sections
        .get("model")
        .map(|(l, _)| *l)
        .ok_or_else(|| err(ConfigErrorKind::MissingKey, 0, "model", "section [model] missing"))?;
    let mut r = Reader::new(doc, "model");
    let (name, fam_line) = r
        .string("family")
        .ok_or_else(|| err(ConfigErrorKind::MissingKey, header, "model.family", "family missing"))?;
    let family = Family::parse(&name).ok_or_else(|| {
        err(
            ConfigErrorKind::UnknownFamily,
            fam_line,
            "model.family",
            format!("unknown family '{name}' (affine, extremal, letac, sqrt_quadratic, arch1)"),
        )
    })?;
    let dim_line = r.raw("dimension").map_or(header, |e| e.line);
    let dim = r.number("dimension")?.unwrap_or(1.0);
    if dim.fract() != 0.0 || dim < 1.0 {
        return Err(err(
            ConfigErrorKind::InvalidValue,
            dim_line,
            "model.dimension",
            "must be a positive integer",
        ));
    }
    if dim > 3.0 {
        return Err(err(
            ConfigErrorKind::Dimension,
            dim_line,
            "model.dimension",
            format!("dimension ≤ 3 required (got {dim})"),
        ));
    }
    let dim = dim as usize;
    let axis = match r.list("axis")? {
        None => None,
        Some(v) if v.len() == 3 => Some([v[0], v[1], v[2]]),
        Some(_) => {
            return Err(err(
                ConfigErrorKind::InvalidValue,
                header,
                "model.axis",
                "axis needs three numbers",
            ))
        }
    };
    let arch = if family == Family::Arch1 {
        Some(Arch1Constants {
            gamma: r.required("gamma")?,
            beta: r.required("beta")?,
            lambda: r.required("lambda")?,
        })
    } else {
        None
    };
    r.finish()?;

    let required = family.required_parameters(dim);
    let optional = family.optional_parameters(dim);
    let mut laws = BTreeMap::new();
    for section in doc.sections.keys() {
        if let Some(p) = section.strip_prefix("distributions.") {
            if !required.iter().chain(&optional).any(|q| q == p) {
                return Err(err(
                    ConfigErrorKind::UnknownKey,
                    doc.sections[section].0,
                    section,
                    format!("family {} has no parameter '{p}'", family.name()),
                ));
            }
            laws.insert(p.to_string(), parse_law(doc, p)?.0);
        }
    }
    for p in &required {
        if !laws.contains_key(p) {
            return Err(err(
                ConfigErrorKind::MissingLaw,
                fam_line,
                &format!("distributions.{p}"),
                format!("missing parameter law for '{p}'"),
            ));
        }
    }
    let model = ModelSpec::new(family, dim, laws, arch, axis)
        .map_err(|e| err(ConfigErrorKind::InvalidModel, fam_line, "model", e.to_string()))?;
    Ok((model, dim))
}

const DEFAULT_S_GRID: [f64; 16] = [
    0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0, 3.25, 3.5, 3.75, 4.0,
];

fn parse_experiment(r: &mut Reader, kind: ExperimentKind, dim: usize) -> Result<Experiment, ConfigError> {
    let draws = r.count("draws", 1_000_000)?;
    let s_grid = r.sorted_list("s_grid")?.unwrap_or_else(|| DEFAULT_S_GRID.to_vec());
    if s_grid.iter().any(|s| !(*s > 0.0)) {
        return Err(err(
            ConfigErrorKind::InvalidValue,
            0,
            "experiment.s_grid",
            "grid points must be positive",
        ));
    }
    Ok(match kind {
        ExperimentKind::Cramer => {
            let solver_tol = match r.number("solver_tol")? {
                Some(t) if t > 0.0 => Some(t),
                Some(_) => {
                    return Err(err(
                        ConfigErrorKind::InvalidValue,
                        0,
                        "experiment.solver_tol",
                        "must be positive",
                    ))
                }
                None => None,
            };
            Experiment::Cramer {
                s_grid,
                draws,
                solver_tol,
            }
        }
        ExperimentKind::Simulate => Experiment::Simulate {
            count: r.count("count", 10_000)?,
        },
        ExperimentKind::Tail => Experiment::Tail {
            count: r.count("count", 1_000_000)?,
            draws,
        },
        ExperimentKind::Limit => {
            let direction = match r.list("direction")? {
                None => {
                    let mut e = Point::zeros(dim);
                    e.as_mut_slice()[0] = 1.0;
                    e
                }
                Some(v) if v.len() == dim && v.iter().any(|c| *c != 0.0) => Point::new(&v),
                Some(_) => {
                    return Err(err(
                        ConfigErrorKind::InvalidValue,
                        0,
                        "experiment.direction",
                        format!("direction needs {dim} coordinates, not all zero"),
                    ))
                }
            };
            let compare_n = match r.number("compare_n")? {
                None => None,
                Some(_) => Some(r.count("compare_n", 1)?),
            };
            let t_grid = r.sorted_list("t_grid")?;
            if t_grid.as_ref().is_some_and(|t| t.len() < 2 || t[0] <= 0.0) {
                return Err(err(
                    ConfigErrorKind::InvalidValue,
                    0,
                    "experiment.t_grid",
                    "needs at least two positive points",
                ));
            }
            Experiment::Limit {
                n: r.count("n", 10_000)?,
                replicas: r.count("replicas", 10_000)?,
                compare_n,
                t_grid,
                t_points: r.count("t_points", 8)?.max(2),
                direction,
                mean_count: r.count("mean_count", 100_000)?,
                draws,
            }
        }
        ExperimentKind::Support => Experiment::Support {
            depth: r.count("depth", 6)?,
            dedupe_tol: r.positive("dedupe_tol", lipmaps_core::support::DEFAULT_DEDUPE_TOL)?,
            fixpoint_tol: r.positive("fixpoint_tol", lipmaps_core::support::DEFAULT_FIXPOINT_TOL)?,
            count: r.count("count", 10_000)?,
            eps: r.positive("eps", 1e-6)?,
        },
        ExperimentKind::Check => Experiment::Check {
            count: r.count("count", 10_000)?,
            theta_draws: r.count("theta_draws", 200)?,
            draws,
            s_grid,
        },
    })
}

/// Keys read by some experiment; others are rejected.
const EXPERIMENT_KEYS: [&str; 21] = [
    "kind",
    "seed",
    "x0",
    "tol",
    "max_depth",
    "draws",
    "s_grid",
    "solver_tol",
    "count",
    "n",
    "replicas",
    "compare_n",
    "t_grid",
    "t_points",
    "direction",
    "mean_count",
    "depth",
    "dedupe_tol",
    "fixpoint_tol",
    "eps",
    "theta_draws",
];

/// Parses a configuration whose `[experiment]` section names its `kind`.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_for(text, None)
}

/// Parses a configuration for `kind`, which overrides the file's own
/// `experiment.kind`.
pub fn parse_config_for(text: &str, kind: Option<ExperimentKind>) -> Result<RunConfig, ConfigError> {
    let doc = tokenize(text)?;
    let (model, dim) = parse_model(&doc)?;

    let mut r = Reader::new(&doc, "experiment");
    let file_kind = match r.string("kind") {
        None => None,
        Some((k, line)) => Some(ExperimentKind::parse(&k).ok_or_else(|| {
            err(
                ConfigErrorKind::InvalidValue,
                line,
                "experiment.kind",
                format!("unknown experiment '{k}'"),
            )
        })?),
    };
    let kind = kind.or(file_kind).ok_or_else(|| {
        err(
            ConfigErrorKind::MissingKey,
            0,
            "experiment.kind",
            "no experiment selected",
        )
    })?;
    let seed = match r.raw("seed") {
        None => 0,
        Some(e) => e.value.parse::<u64>().map_err(|_| {
            err(
                ConfigErrorKind::MalformedNumber,
                e.line,
                "experiment.seed",
                "seed must be an unsigned 64-bit integer",
            )
        })?,
    };
    let x0 = match r.list("x0")? {
        None => Point::zeros(dim),
        Some(v) if v.len() == dim => Point::new(&v),
        Some(_) => {
            return Err(err(
                ConfigErrorKind::InvalidValue,
                0,
                "experiment.x0",
                format!("x0 needs {dim} coordinates"),
            ))
        }
    };
    let sampler = Sampler {
        x0,
        tol: r.positive("tol", 1e-9)?,
        max_depth: r.count("max_depth", 100_000)?,
    };
    let experiment = parse_experiment(&mut r, kind, dim)?;
    // keys of other experiments may share a file
    for k in EXPERIMENT_KEYS {
        r.raw(k);
    }
    r.finish()?;

    let mut r = Reader::new(&doc, "output");
    let dir = r
        .string("dir")
        .map_or_else(|| PathBuf::from("out"), |(d, _)| PathBuf::from(d));
    let formats = match r.string("formats") {
        None => Formats {
            csv: true,
            jsonl: true,
            svg: true,
        },
        Some((list, line)) => {
            let mut f = Formats {
                csv: false,
                jsonl: false,
                svg: false,
            };
            for item in list.split(',').map(str::trim) {
                match item {
                    "csv" => f.csv = true,
                    "jsonl" => f.jsonl = true,
                    "svg" => f.svg = true,
                    other => {
                        return Err(err(
                            ConfigErrorKind::InvalidValue,
                            line,
                            "output.formats",
                            format!("unknown format '{other}' (csv, jsonl, svg)"),
                        ))
                    }
                }
            }
            f
        }
    };
    r.finish()?;

    let mut r = Reader::new(&doc, "assertions");
    let assertions = Assertions {
        non_arithmetic: r.flag("non_arithmetic")?,
        linear_limit: r.flag("linear_limit")?,
    };
    r.finish()?;

    let mut echo = BTreeMap::new();
    for (name, (_, entries)) in &doc.sections {
        for (k, e) in entries {
            echo.insert(format!("{name}.{k}"), e.value.clone());
        }
    }
    echo.insert("experiment.kind".into(), kind.name().into());
    echo.insert("experiment.seed".into(), seed.to_string());
    echo.insert("output.dir".into(), dir.display().to_string());

    Ok(RunConfig {
        model,
        experiment,
        seed,
        sampler,
        output: OutputConfig { dir, formats },
        assertions,
        echo,
    })
}
