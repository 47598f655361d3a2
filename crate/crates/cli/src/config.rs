//! Run configuration: a single TOML file.
//!
//! Every field has a documented default except `T`, `economy.n` and the
//! matrix source; the seed may come from `--seed` instead. After defaults
//! are applied the whole configuration is written back out as
//! `resolved_config.toml`, and its SHA-256 (output section excluded,
//! referenced files included) becomes the config hash of the fingerprint.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use circflow::generators::{
    Allocation, Propensity, ScheduleSpecKind, SpendingSpec, Topology, TopologySpec,
};
use circflow::simulation::FULL_SNAPSHOT_NMAX;
use circflow::{NumericMode, SnapshotContent, SnapshotPolicy, SnapshotTimes};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(rename = "T")]
    pub steps: i64,
    #[serde(default)]
    pub mode: Mode,
    pub economy: Economy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spending: Option<SpendingConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matrices: Vec<MatrixSource>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub snapshots: SnapshotConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Float,
    Integer,
}

impl From<Mode> for NumericMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Float => NumericMode::Float,
            Mode::Integer => NumericMode::Integer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Economy {
    pub n: usize,
    #[serde(default)]
    pub initial: Initial,
}

/// Initial wealth; exactly one key may be set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    /// Every agent holds this amount.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equal: Option<f64>,
    /// Independent uniform draws (integers in integer mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform: Option<UniformWealth>,
    /// One agent (1-based) holds everything.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point_mass: Option<PointMass>,
    /// A list of `n` amounts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from_file: Option<PathBuf>,
}

pub const DEFAULT_EQUAL_WEALTH: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformWealth {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMass {
    pub agent: usize,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TopologyConfig {
    Complete,
    RandomDirected { p_edge: f64 },
    ScaleFree { m: usize },
    Ring { k: usize },
    EdgeList { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpendingConfig {
    #[serde(default)]
    pub propensity: PropensityConfig,
    #[serde(default)]
    pub allocation: AllocationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PropensityConfig {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
    Beta { alpha: f64, beta: f64 },
}

impl Default for PropensityConfig {
    fn default() -> Self {
        PropensityConfig::Beta {
            alpha: 2.0,
            beta: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AllocationConfig {
    Equal,
    Dirichlet { concentration: f64 },
}

impl Default for AllocationConfig {
    fn default() -> Self {
        AllocationConfig::Dirichlet { concentration: 1.0 }
    }
}

impl SpendingConfig {
    pub fn spec(&self) -> SpendingSpec {
        let propensity = match self.propensity {
            PropensityConfig::Constant { value } => Propensity::Constant(value),
            PropensityConfig::Uniform { low, high } => Propensity::Uniform { low, high },
            PropensityConfig::Beta { alpha, beta } => Propensity::Beta { alpha, beta },
        };
        let allocation = match self.allocation {
            AllocationConfig::Equal => Allocation::Equal,
            AllocationConfig::Dirichlet { concentration } => Allocation::Dirichlet { concentration },
        };
        SpendingSpec::new(propensity, allocation)
    }
}

/// One matrix of the schedule pool: a triplet file or a generator spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spending: Option<SpendingConfig>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleConfig {
    #[default]
    Stationary,
    Periodic,
    RegimeSwitching {
        transitions: Vec<Vec<f64>>,
        #[serde(default = "first_regime")]
        initial_regime: usize,
    },
    IdentityPadded {
        idle_probability: f64,
    },
}

fn first_regime() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimesConfig {
    #[default]
    LogSpaced,
    FinalOnly,
    Every,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContentConfig {
    /// Full vectors up to 10^4 agents, summaries above.
    #[default]
    Auto,
    Full,
    Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotConfig {
    #[serde(default)]
    pub times: TimesConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub every: Option<u64>,
    #[serde(default)]
    pub content: ContentConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

/// A validated configuration plus where it came from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    /// Directory relative paths are resolved against.
    pub base: PathBuf,
}

impl Loaded {
    pub fn seed(&self) -> u64 {
        self.config.seed.expect("seed checked at load")
    }

    pub fn steps(&self) -> u64 {
        self.config.steps as u64
    }

    pub fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// Text of `resolved_config.toml`.
    pub fn resolved_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(&self.config)?)
    }

    /// Hex SHA-256 prefix over the resolved configuration (without the
    /// output section) and the contents of every referenced file.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.config.clone();
        c.output = OutputConfig::default();
        let mut h = Sha256::new();
        h.update(toml::to_string(&c)?.as_bytes());
        for f in self.referenced_files() {
            let bytes = fs::read(self.path(&f))
                .with_context(|| format!("reading {}", self.path(&f).display()))?;
            h.update(f.to_string_lossy().as_bytes());
            h.update(Sha256::digest(&bytes));
        }
        let digest = h.finalize();
        Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
    }

    fn referenced_files(&self) -> Vec<PathBuf> {
        let c = &self.config;
        let mut out = Vec::new();
        if let Some(f) = &c.economy.initial.from_file {
            out.push(f.clone());
        }
        let topo_file = |t: &Option<TopologyConfig>| match t {
            Some(TopologyConfig::EdgeList { file }) => Some(file.clone()),
            _ => None,
        };
        out.extend(topo_file(&c.topology));
        for m in &c.matrices {
            out.extend(m.file.clone());
            out.extend(topo_file(&m.topology));
        }
        out
    }

    pub fn snapshot_policy(&self) -> SnapshotPolicy {
        let s = &self.config.snapshots;
        let times = match s.times {
            TimesConfig::LogSpaced => SnapshotTimes::LogSpaced,
            TimesConfig::FinalOnly => SnapshotTimes::FinalOnly,
            TimesConfig::Every => SnapshotTimes::Every(s.every.expect("checked at load")),
        };
        let content = match s.content {
            ContentConfig::Full => SnapshotContent::Full,
            ContentConfig::Summary => SnapshotContent::Summary,
            ContentConfig::Auto => unreachable!("resolved at load"),
        };
        SnapshotPolicy::new(times, content)
    }

    pub fn schedule_kind(&self) -> ScheduleSpecKind {
        match &self.config.schedule {
            ScheduleConfig::Stationary => ScheduleSpecKind::Stationary,
            ScheduleConfig::Periodic => ScheduleSpecKind::Periodic,
            ScheduleConfig::RegimeSwitching {
                transitions,
                initial_regime,
            } => ScheduleSpecKind::RegimeSwitching {
                transitions: transitions.clone(),
                initial: initial_regime - 1,
            },
            ScheduleConfig::IdentityPadded { idle_probability } => ScheduleSpecKind::IdentityPadded {
                idle_probability: *idle_probability,
            },
        }
    }

    /// Generator-backed or file-backed sources of the matrix pool, after
    /// the `[topology]`/`[spending]` shorthand is expanded.
    pub fn sources(&self) -> &[MatrixSource] {
        &self.config.matrices
    }

    pub fn topology_spec(&self, t: &TopologyConfig) -> Result<TopologySpec> {
        let n = self.config.economy.n;
        let kind = match t {
            TopologyConfig::Complete => Topology::Complete,
            TopologyConfig::RandomDirected { p_edge } => Topology::RandomDirected { p_edge: *p_edge },
            TopologyConfig::ScaleFree { m } => Topology::ScaleFree { m: *m },
            TopologyConfig::Ring { k } => Topology::Ring { k: *k },
            TopologyConfig::EdgeList { file } => {
                return Ok(circflow::generators::load_edge_list(&self.path(file), n)?);
            }
        };
        Ok(TopologySpec::new(n, kind)?)
    }
}

/// Reads, defaults and validates a configuration file. `seed` overrides
/// the file's seed.
pub fn load(path: &Path, seed: Option<u64>) -> Result<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, base, seed).with_context(|| format!("invalid configuration {}", path.display()))
}

pub fn parse(text: &str, base: PathBuf, seed: Option<u64>) -> Result<Loaded> {
    let de = toml::Deserializer::parse(text)?;
    let mut config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow::anyhow!("field `{path}`: {}", e.into_inner())
    })?;
    if seed.is_some() {
        config.seed = seed;
    }
    resolve(&mut config)?;
    Ok(Loaded { config, base })
}

fn field(name: &str, message: impl std::fmt::Display) -> anyhow::Error {
    anyhow::anyhow!("field `{name}`: {message}")
}

fn resolve(c: &mut RunConfig) -> Result<()> {
    if c.seed.is_none() {
        return Err(field("seed", "missing; set it in the file or pass --seed"));
    }
    if c.steps < 0 {
        return Err(field("T", format!("must be >= 0, got {}", c.steps)));
    }
    let n = c.economy.n;
    if n == 0 {
        return Err(field("economy.n", "an economy needs at least one agent"));
    }

    let init = &mut c.economy.initial;
    let set: Vec<&str> = [
        ("equal", init.equal.is_some()),
        ("uniform", init.uniform.is_some()),
        ("point_mass", init.point_mass.is_some()),
        ("from_file", init.from_file.is_some()),
    ]
    .into_iter()
    .filter_map(|(k, on)| on.then_some(k))
    .collect();
    if set.len() > 1 {
        return Err(field(
            "economy.initial",
            format!("`{}` are mutually exclusive", set.join("`, `")),
        ));
    }
    if set.is_empty() {
        init.equal = Some(DEFAULT_EQUAL_WEALTH);
    }
    let integer = c.mode == Mode::Integer;
    let amount_ok = |v: f64| v.is_finite() && v >= 0.0 && (!integer || v.fract() == 0.0);
    let what = if integer {
        "a non-negative whole number of units"
    } else {
        "a non-negative finite amount"
    };
    if let Some(v) = init.equal {
        if !amount_ok(v) {
            return Err(field("economy.initial.equal", format!("must be {what}, got {v}")));
        }
    }
    if let Some(u) = init.uniform {
        if !(amount_ok(u.low) && amount_ok(u.high) && u.low <= u.high) {
            return Err(field(
                "economy.initial.uniform",
                format!("needs 0 <= low <= high, each {what}; got [{}, {}]", u.low, u.high),
            ));
        }
    }
    if let Some(p) = init.point_mass {
        if p.agent == 0 || p.agent > n {
            return Err(field(
                "economy.initial.point_mass.agent",
                format!("agent {} outside 1..={n}", p.agent),
            ));
        }
        if !amount_ok(p.amount) {
            return Err(field(
                "economy.initial.point_mass.amount",
                format!("must be {what}, got {}", p.amount),
            ));
        }
    }

    if c.matrices.is_empty() {
        let Some(topology) = c.topology.take() else {
            return Err(field(
                "topology",
                "missing; give [topology] (with optional [spending]) or [[matrices]]",
            ));
        };
        c.matrices.push(MatrixSource {
            file: None,
            topology: Some(topology),
            spending: Some(c.spending.take().unwrap_or_default()),
        });
    } else if c.topology.is_some() || c.spending.is_some() {
        return Err(field(
            "matrices",
            "[[matrices]] cannot be combined with top-level [topology] or [spending]",
        ));
    }
    for (r, m) in c.matrices.iter_mut().enumerate() {
        let name = format!("matrices[{r}]");
        match (&m.file, &m.topology) {
            (Some(_), Some(_)) => {
                return Err(field(&name, "`file` and `topology` are mutually exclusive"))
            }
            (None, None) => return Err(field(&name, "needs `file` or `topology`")),
            (Some(_), None) if m.spending.is_some() => {
                return Err(field(&name, "`spending` only applies to generated matrices"))
            }
            (None, Some(_)) if m.spending.is_none() => m.spending = Some(SpendingConfig::default()),
            _ => {}
        }
        if let Some(s) = &m.spending {
            s.spec()
                .validate()
                .map_err(|e| field(&format!("{name}.spending"), e))?;
        }
    }

    let k = c.matrices.len();
    match &c.schedule {
        ScheduleConfig::Stationary | ScheduleConfig::IdentityPadded { .. } if k != 1 => {
            return Err(field(
                "schedule.kind",
                format!("needs exactly one matrix, {k} given"),
            ));
        }
        ScheduleConfig::RegimeSwitching { initial_regime, .. }
            if *initial_regime == 0 || *initial_regime > k =>
        {
            return Err(field(
                "schedule.initial_regime",
                format!("regime {initial_regime} outside 1..={k}"),
            ));
        }
        _ => {}
    }
    circflow::generators::ScheduleSpec::new(
        Loaded {
            config: c.clone(),
            base: PathBuf::new(),
        }
        .schedule_kind(),
        0,
        0,
    )
    .validate(k)
    .map_err(|e| field("schedule", e))?;

    let s = &mut c.snapshots;
    match (s.times, s.every) {
        (TimesConfig::Every, None) => {
            return Err(field("snapshots.every", "required when times = \"every\""))
        }
        (TimesConfig::Every, Some(0)) => return Err(field("snapshots.every", "must be >= 1")),
        (TimesConfig::Every, Some(_)) => {}
        (_, Some(_)) => {
            return Err(field("snapshots.every", "only used with times = \"every\""))
        }
        (_, None) => {}
    }
    if s.content == ContentConfig::Auto {
        s.content = if n <= FULL_SNAPSHOT_NMAX {
            ContentConfig::Full
        } else {
            ContentConfig::Summary
        };
    }
    Ok(())
}
