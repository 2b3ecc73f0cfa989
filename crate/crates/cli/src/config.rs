//! JSON experiment configs with dotted-path flag overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use noncollapse_core::geometry::{circle, dumbbell, ellipse, ellipsoid, sphere, torus};
use noncollapse_core::{
    AnalyzerConfig, DiscreteHypersurface, FieldLabel, FlowConfig, OrientationCase, SpeedFunction,
};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};
use crate::io::read_geometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    RunFlow,
    AnalyzeNoncollapse,
    RunContainment,
    VerifyLinearized,
    CheckSpeeds,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::RunFlow,
        Command::AnalyzeNoncollapse,
        Command::RunContainment,
        Command::VerifyLinearized,
        Command::CheckSpeeds,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::RunFlow => "run-flow",
            Command::AnalyzeNoncollapse => "analyze-noncollapse",
            Command::RunContainment => "run-containment",
            Command::VerifyLinearized => "verify-linearized",
            Command::CheckSpeeds => "check-speeds",
        }
    }

    fn needs_geometry(self) -> bool {
        self != Command::CheckSpeeds
    }

    fn allows_speed_list(self) -> bool {
        matches!(self, Command::VerifyLinearized | Command::CheckSpeeds)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CliError::validation("command", format!("unknown command `{s}`")))
    }
}

/// Initial surface: a built-in generator or a geometry CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    Generator {
        name: String,
        params: BTreeMap<String, f64>,
        n: usize,
    },
    File {
        path: PathBuf,
        backend: Option<String>,
        topology: Option<String>,
    },
}

/// Parameter names and defaults of each generator.
fn generator_params(name: &str) -> Option<&'static [(&'static str, f64)]> {
    Some(match name {
        "circle" => &[("r", 1.0), ("cx", 0.0), ("cy", 0.0)],
        "ellipse" => &[("a", 2.0), ("b", 1.0)],
        "sphere" => &[("r", 1.0), ("cx", 0.0)],
        "ellipsoid" => &[("a", 1.5), ("b", 1.0), ("cx", 0.0)],
        "torus" => &[("R", 2.0), ("r", 0.5)],
        "dumbbell" => &[("R", 1.0), ("rho", 0.5), ("half_length", 0.5)],
        _ => return None,
    })
}

impl GeometrySpec {
    fn parse(s: &Section<'_>, base: &Path) -> CliResult<Self> {
        match (s.str("gen")?, s.str("file")?) {
            (Some(_), Some(_)) => Err(CliError::validation(
                s.path("file"),
                "give either `gen` or `file`, not both",
            )),
            (None, None) => Err(CliError::validation(
                s.path("gen"),
                "missing generator name or `file`",
            )),
            (None, Some(file)) => {
                s.allow(&["file", "backend", "topology"])?;
                let path = base.join(file);
                if !path.is_file() {
                    return Err(CliError::validation(
                        s.path("file"),
                        format!("{} does not exist", path.display()),
                    ));
                }
                Ok(GeometrySpec::File {
                    path,
                    backend: s.str("backend")?.map(str::to_string),
                    topology: s.str("topology")?.map(str::to_string),
                })
            }
            (Some(name), None) => {
                let defaults = generator_params(name).ok_or_else(|| {
                    CliError::validation(s.path("gen"), format!("unknown generator `{name}`"))
                })?;
                let mut allowed = vec!["gen", "N"];
                allowed.extend(defaults.iter().map(|(k, _)| *k));
                s.allow(&allowed)?;
                let n = s
                    .usize("N")?
                    .ok_or_else(|| CliError::validation(s.path("N"), "missing node count"))?;
                let mut params = BTreeMap::new();
                for &(k, default) in defaults {
                    params.insert(k.to_string(), s.f64(k)?.unwrap_or(default));
                }
                Ok(GeometrySpec::Generator {
                    name: name.to_string(),
                    params,
                    n,
                })
            }
        }
    }

    pub fn is_generator(&self) -> bool {
        matches!(self, GeometrySpec::Generator { .. })
    }

    fn param(&self, key: &str) -> f64 {
        match self {
            GeometrySpec::Generator { params, .. } => params[key],
            GeometrySpec::File { .. } => f64::NAN,
        }
    }

    /// Builds a generator at resolution `n`.
    pub fn generate(&self, n: usize) -> noncollapse_core::Result<DiscreteHypersurface> {
        let GeometrySpec::Generator { name, .. } = self else {
            return Err(noncollapse_core::Error::InvalidArgument(
                "geometry file cannot be regenerated".into(),
            ));
        };
        let p = |k| self.param(k);
        match name.as_str() {
            "circle" => circle([p("cx"), p("cy")], p("r"), n),
            "ellipse" => ellipse(p("a"), p("b"), n),
            "sphere" => sphere(p("r"), p("cx"), n),
            "ellipsoid" => ellipsoid(p("a"), p("b"), p("cx"), n),
            "torus" => torus(p("R"), p("r"), n),
            "dumbbell" => dumbbell(p("R"), p("rho"), p("half_length"), n),
            _ => unreachable!("generator names are checked when parsing"),
        }
    }

    /// Builds the surface; errors name `key`.
    pub fn build(&self, key: &str) -> CliResult<DiscreteHypersurface> {
        match self {
            GeometrySpec::Generator { n, .. } => {
                self.generate(*n).map_err(|e| CliError::from_input(key, e))
            }
            GeometrySpec::File {
                path,
                backend,
                topology,
            } => Ok(read_geometry(path, backend.as_deref(), topology.as_deref())?.0),
        }
    }

    /// Centre and initial radius of a round generator.
    pub fn round(&self) -> Option<([f64; 2], f64)> {
        match self {
            GeometrySpec::Generator { name, .. } if name == "circle" => {
                Some(([self.param("cx"), self.param("cy")], self.param("r")))
            }
            GeometrySpec::Generator { name, .. } if name == "sphere" => {
                Some(([self.param("cx"), 0.0], self.param("r")))
            }
            _ => None,
        }
    }

    pub fn describe(&self) -> Value {
        match self {
            GeometrySpec::Generator { name, params, n } => {
                let mut m = Map::new();
                m.insert("gen".into(), name.clone().into());
                m.insert("N".into(), (*n).into());
                for (k, v) in params {
                    m.insert(k.clone(), (*v).into());
                }
                Value::Object(m)
            }
            GeometrySpec::File { path, .. } => {
                serde_json::json!({ "file": path.display().to_string() })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Relative bound on the forward monotonicity defects.
    pub monotonicity: f64,
    /// Minimal fitted residual order.
    pub order: f64,
    pub circumradius_slack: f64,
    /// Relative error against exact round solutions.
    pub exact: f64,
    /// Relative bound on the homogeneity and Euler identities, and the
    /// slack of the support inequality.
    pub identity: f64,
    pub gradient: f64,
    /// Slack of `Zbar >= kappa_max` and `Zlow <= kappa_min`.
    pub invariant: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            monotonicity: 1e-3,
            order: 1.0,
            circumradius_slack: 2e-2,
            exact: 5e-3,
            identity: 1e-10,
            gradient: 1e-5,
            invariant: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentSpec {
    pub partner: GeometrySpec,
    pub case: OrientationCase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub geometry: Option<GeometrySpec>,
    pub speeds: Vec<SpeedFunction>,
    /// Template whose speed is replaced per run; `t_end` is zero for
    /// commands that do not evolve.
    pub flow: FlowConfig,
    pub analyzer: AnalyzerConfig,
    pub write_fields: bool,
    pub containment: Option<ContainmentSpec>,
    pub labels: Vec<FieldLabel>,
    pub resolutions: Vec<usize>,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn speed(&self) -> SpeedFunction {
        self.speeds[0]
    }

    pub fn flow_config(&self, speed: SpeedFunction) -> FlowConfig {
        FlowConfig {
            speed,
            ..self.flow.clone()
        }
    }

    pub fn geometry(&self) -> &GeometrySpec {
        self.geometry
            .as_ref()
            .expect("geometry is required for this command")
    }
}

struct Section<'a> {
    key: String,
    map: &'a Map<String, Value>,
}

impl<'a> Section<'a> {
    fn root(doc: &'a Value) -> CliResult<Self> {
        match doc {
            Value::Object(map) => Ok(Section {
                key: String::new(),
                map,
            }),
            _ => Err(CliError::Parse("config must be a JSON object".into())),
        }
    }

    fn path(&self, k: &str) -> String {
        if self.key.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.key)
        }
    }

    fn get(&self, k: &str) -> Option<&'a Value> {
        self.map.get(k).filter(|v| !v.is_null())
    }

    fn section(&self, k: &str) -> CliResult<Option<Section<'a>>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::Object(map)) => Ok(Some(Section {
                key: self.path(k),
                map,
            })),
            Some(_) => Err(CliError::validation(self.path(k), "expected an object")),
        }
    }

    fn allow(&self, keys: &[&str]) -> CliResult<()> {
        match self.map.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(CliError::validation(self.path(k), "unknown key")),
            None => Ok(()),
        }
    }

    fn f64(&self, k: &str) -> CliResult<Option<f64>> {
        self.get(k)
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| CliError::validation(self.path(k), "expected a number"))
            })
            .transpose()
    }

    fn u64(&self, k: &str) -> CliResult<Option<u64>> {
        self.get(k)
            .map(|v| {
                v.as_u64().ok_or_else(|| {
                    CliError::validation(self.path(k), "expected a non-negative integer")
                })
            })
            .transpose()
    }

    fn usize(&self, k: &str) -> CliResult<Option<usize>> {
        Ok(self.u64(k)?.map(|v| v as usize))
    }

    fn positive(&self, k: &str) -> CliResult<Option<f64>> {
        match self.f64(k)? {
            Some(v) if !(v > 0.0 && v.is_finite()) => {
                Err(CliError::validation(self.path(k), "must be positive"))
            }
            v => Ok(v),
        }
    }

    fn str(&self, k: &str) -> CliResult<Option<&'a str>> {
        self.get(k)
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| CliError::validation(self.path(k), "expected a string"))
            })
            .transpose()
    }

    fn bool(&self, k: &str) -> CliResult<Option<bool>> {
        self.get(k)
            .map(|v| {
                v.as_bool()
                    .ok_or_else(|| CliError::validation(self.path(k), "expected a boolean"))
            })
            .transpose()
    }

    /// A string or an array of strings.
    fn strings(&self, k: &str) -> CliResult<Option<Vec<&'a str>>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(vec![s.as_str()])),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .ok_or_else(|| CliError::validation(self.path(k), "expected strings"))
                })
                .collect::<CliResult<Vec<_>>>()
                .map(Some),
            Some(_) => Err(CliError::validation(
                self.path(k),
                "expected a string or an array of strings",
            )),
        }
    }
}

/// Splits `--a.b value` and `--a.b=value` pairs.
pub fn parse_overrides(args: &[String]) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .filter(|k| !k.is_empty())
            .ok_or_else(|| CliError::Parse(format!("unexpected argument `{arg}`")))?;
        match key.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let value = it
                    .next()
                    .ok_or_else(|| CliError::Parse(format!("flag `{arg}` needs a value")))?;
                out.push((key.to_string(), value.clone()));
            }
        }
    }
    Ok(out)
}

/// Sets the dotted `key` in `doc`. The value is read as JSON when it parses,
/// else as a string.
pub fn apply_override(doc: &mut Value, key: &str, raw: &str) -> CliResult<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Parse(format!("malformed flag `--{key}`")));
    }
    let mut node = doc;
    for (depth, part) in parts.iter().enumerate() {
        if node.is_null() {
            *node = Value::Object(Map::new());
        }
        let Value::Object(map) = node else {
            return Err(CliError::validation(
                parts[..depth].join("."),
                "expected an object",
            ));
        };
        if depth + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("the loop returns on the last part")
}

/// Reads the config file (if any), applies the positional command and the
/// flag overrides, and validates the result.
pub fn parse_config(
    path: Option<&Path>,
    command: Option<&str>,
    overrides: &[(String, String)],
) -> CliResult<ExperimentConfig> {
    let (mut doc, base) = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let doc = serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (doc, base)
        }
        None => (Value::Object(Map::new()), PathBuf::new()),
    };
    if let Some(c) = command {
        apply_override(&mut doc, "command", &Value::String(c.into()).to_string())?;
    }
    for (k, v) in overrides {
        apply_override(&mut doc, k, v)?;
    }
    from_value(&doc, &base)
}

/// Validates a config document; relative file paths resolve against `base`.
pub fn from_value(doc: &Value, base: &Path) -> CliResult<ExperimentConfig> {
    let root = Section::root(doc)?;
    root.allow(&[
        "command",
        "geometry",
        "speed",
        "flow",
        "analyzer",
        "containment",
        "linearized",
        "check",
        "tolerances",
        "output_dir",
        "seed",
    ])?;
    let command: Command = root
        .str("command")?
        .ok_or_else(|| CliError::validation("command", "missing command"))?
        .parse()?;

    let speed_tokens = root
        .strings("speed")?
        .ok_or_else(|| CliError::validation("speed", "missing speed"))?;
    if speed_tokens.is_empty() {
        return Err(CliError::validation("speed", "no speed given"));
    }
    if speed_tokens.len() > 1 && !command.allows_speed_list() {
        return Err(CliError::validation(
            "speed",
            format!("`{command}` takes a single speed"),
        ));
    }
    let speeds = speed_tokens
        .iter()
        .map(|s| s.parse::<SpeedFunction>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::from_input("speed", e))?;

    let geometry = match root.section("geometry")? {
        Some(s) => Some(GeometrySpec::parse(&s, base)?),
        None if command.needs_geometry() => {
            return Err(CliError::validation("geometry", "missing geometry"))
        }
        None => None,
    };

    let mut flow = FlowConfig::new(speeds[0], 0.0);
    let evolves = command != Command::CheckSpeeds;
    match root.section("flow")? {
        Some(s) => {
            s.allow(&[
                "t_end",
                "dt_safety",
                "resample_every",
                "kappa_cap",
                "snapshot_every",
            ])?;
            match s.positive("t_end")? {
                Some(t) => flow.t_end = t,
                None if evolves => {
                    return Err(CliError::validation(s.path("t_end"), "missing end time"))
                }
                None => {}
            }
            if let Some(v) = s.positive("dt_safety")? {
                flow.dt_safety = v;
            }
            if let Some(v) = s.usize("resample_every")? {
                flow.resample_every = v;
            }
            flow.kappa_cap = s.positive("kappa_cap")?;
            if let Some(v) = s.usize("snapshot_every")? {
                flow.snapshot_every = v;
            }
        }
        None if evolves => return Err(CliError::validation("flow.t_end", "missing end time")),
        None => {}
    }
    if evolves {
        flow.validate()
            .map_err(|e| CliError::validation("flow", e.to_string()))?;
    }

    let mut analyzer = AnalyzerConfig::default();
    let mut write_fields = true;
    if let Some(s) = root.section("analyzer")? {
        s.allow(&["exclusion_radius_factor", "M", "write_fields"])?;
        if let Some(v) = s.f64("exclusion_radius_factor")? {
            analyzer.exclusion_factor = v;
        }
        analyzer.angles = s.usize("M")?;
        write_fields = s.bool("write_fields")?.unwrap_or(true);
    }
    analyzer
        .validate()
        .map_err(|e| CliError::validation("analyzer", e.to_string()))?;

    let containment = match root.section("containment")? {
        Some(s) => {
            s.allow(&["partner", "case"])?;
            let partner = s
                .section("partner")?
                .ok_or_else(|| CliError::validation(s.path("partner"), "missing partner"))?;
            let case = match s.str("case")?.unwrap_or("disjoint") {
                "disjoint" => OrientationCase::Disjoint,
                "nested" => OrientationCase::Nested,
                other => {
                    return Err(CliError::validation(
                        s.path("case"),
                        format!("unknown case `{other}`"),
                    ))
                }
            };
            Some(ContainmentSpec {
                partner: GeometrySpec::parse(&partner, base)?,
                case,
            })
        }
        None if command == Command::RunContainment => {
            return Err(CliError::validation(
                "containment",
                "missing containment section",
            ))
        }
        None => None,
    };

    let mut labels = vec![
        FieldLabel::Speed,
        FieldLabel::NormalComponent([1.0, 0.0]),
        FieldLabel::ScalingSolution,
    ];
    let mut resolutions = vec![64, 128, 256];
    if let Some(s) = root.section("linearized")? {
        s.allow(&["labels", "resolutions"])?;
        if let Some(tokens) = s.strings("labels")? {
            labels = tokens
                .iter()
                .map(|t| {
                    t.parse()
                        .map_err(|e: noncollapse_core::Error| CliError::Parse(e.to_string()))
                })
                .collect::<CliResult<_>>()?;
        }
        if let Some(v) = s.get("resolutions") {
            resolutions = v
                .as_array()
                .and_then(|a| a.iter().map(|x| x.as_u64().map(|n| n as usize)).collect())
                .ok_or_else(|| CliError::validation(s.path("resolutions"), "expected integers"))?;
        }
    }
    if command == Command::VerifyLinearized {
        if !geometry.as_ref().is_some_and(GeometrySpec::is_generator) {
            return Err(CliError::validation(
                "geometry.gen",
                "refinement studies need a generator",
            ));
        }
        if resolutions.len() < 3 || resolutions.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(CliError::validation(
                "linearized.resolutions",
                "need at least three resolutions, each double the last",
            ));
        }
        if labels.is_empty() {
            return Err(CliError::validation("linearized.labels", "no labels given"));
        }
    }

    let mut samples = 1000;
    if let Some(s) = root.section("check")? {
        s.allow(&["samples"])?;
        if let Some(v) = s.usize("samples")? {
            if v == 0 {
                return Err(CliError::validation(s.path("samples"), "must be positive"));
            }
            samples = v;
        }
    }

    let mut tolerances = Tolerances::default();
    if let Some(s) = root.section("tolerances")? {
        let t = &mut tolerances;
        let fields: [(&str, &mut f64); 7] = [
            ("monotonicity", &mut t.monotonicity),
            ("order", &mut t.order),
            ("circumradius_slack", &mut t.circumradius_slack),
            ("exact", &mut t.exact),
            ("identity", &mut t.identity),
            ("gradient", &mut t.gradient),
            ("invariant", &mut t.invariant),
        ];
        let names: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
        s.allow(&names)?;
        for (k, slot) in fields {
            if let Some(v) = s.f64(k)? {
                if !(v >= 0.0) {
                    return Err(CliError::validation(s.path(k), "must be non-negative"));
                }
                *slot = v;
            }
        }
    }

    let output_dir = base.join(root.str("output_dir")?.unwrap_or("out"));
    let seed = root.u64("seed")?.unwrap_or(0);

    Ok(ExperimentConfig {
        command,
        geometry,
        speeds,
        flow,
        analyzer,
        write_fields,
        containment,
        labels,
        resolutions,
        samples,
        tolerances,
        output_dir,
        seed,
    })
}
