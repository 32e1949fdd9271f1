//! Run configuration in a flat INI dialect.
//!
//! ```text
//! # comment            ; also a comment
//! [section]
//! key = value [unit]
//! ```
//!
//! Quantities carry their unit after the number (`kn = 2 GN/mm`), lists are
//! comma separated with one trailing unit (`sdp_ladder = 3.2, 1.6, 0.8 mm`).
//! Every key belongs to a known section; anything else is rejected with its
//! line number. Values are converted to internal units (mm, tonne, s, N) at
//! parse time.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::contact::{ContactFormulation, FormulationMode};
use crate::error::ConfigError;
use crate::scenarios::{SlabRunParams, SlabSpec, SweepBase, SweepParams, TwoSphereParams};

const SCHEMA: &[(&str, &[&str])] = &[
    ("run", &["scenario", "formulation", "output", "seed"]),
    ("contact", &["kn", "ks", "kn_star", "ks_star", "mu"]),
    ("material", &["density"]),
    ("discretization", &["sdp", "vdp"]),
    ("time", &["dt", "timestep_factor"]),
    (
        "loading",
        &[
            "speed",
            "delta_max",
            "damping",
            "relax_damping",
            "ke_threshold",
            "relax_max_steps",
            "max_steps",
        ],
    ),
    ("two_sphere", &["radius", "increments"]),
    (
        "slab",
        &[
            "blocks_per_side",
            "block_side",
            "incline",
            "thickness",
            "indenter_radius",
            "gap",
            "clearance",
            "gravity",
        ],
    ),
    ("output", &["record_every", "snapshots", "contacts"]),
    ("sweep", &["sdp_ladder", "vdp_ladder", "delta_star", "tolerance"]),
];

/// Physical dimension of a configuration value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Dim {
    Length,
    Time,
    Speed,
    Acceleration,
    Stiffness,
    AreaStiffness,
    Density,
    Rate,
    Angle,
    Energy,
}

impl Dim {
    fn describe(self) -> &'static str {
        match self {
            Dim::Length => "a length (mm, um, m)",
            Dim::Time => "a time (s, ms, us)",
            Dim::Speed => "a speed (mm/s, m/s)",
            Dim::Acceleration => "an acceleration (mm/s2, m/s2)",
            Dim::Stiffness => "a stiffness (GN/mm, MN/mm, kN/mm, N/mm, N/m)",
            Dim::AreaStiffness => "a stiffness per area (GPa/mm, MPa/mm, N/mm3)",
            Dim::Density => "a density (kg/mm3, t/mm3, kg/m3, g/cm3)",
            Dim::Rate => "a rate (1/s)",
            Dim::Angle => "an angle (deg, rad)",
            Dim::Energy => "an energy (mJ, J, uJ, nJ)",
        }
    }

    /// Factor from `unit` to the internal unit.
    fn factor(self, unit: &str) -> Option<f64> {
        let f = match (self, unit) {
            (Dim::Length, "mm") => 1.0,
            (Dim::Length, "um") => 1e-3,
            (Dim::Length, "m") => 1e3,
            (Dim::Time, "s") => 1.0,
            (Dim::Time, "ms") => 1e-3,
            (Dim::Time, "us") => 1e-6,
            (Dim::Speed, "mm/s") => 1.0,
            (Dim::Speed, "m/s") => 1e3,
            (Dim::Acceleration, "mm/s2") => 1.0,
            (Dim::Acceleration, "m/s2") => 1e3,
            (Dim::Stiffness, "GN/mm") => 1e9,
            (Dim::Stiffness, "MN/mm") => 1e6,
            (Dim::Stiffness, "kN/mm") => 1e3,
            (Dim::Stiffness, "N/mm") => 1.0,
            (Dim::Stiffness, "N/m") => 1e-3,
            (Dim::AreaStiffness, "GPa/mm") => 1e3,
            (Dim::AreaStiffness, "MPa/mm") => 1.0,
            (Dim::AreaStiffness, "N/mm3") => 1.0,
            (Dim::Density, "t/mm3") => 1.0,
            (Dim::Density, "kg/mm3") => 1e-3,
            (Dim::Density, "kg/m3") => 1e-12,
            (Dim::Density, "g/cm3") => 1e-9,
            (Dim::Rate, "1/s") => 1.0,
            (Dim::Angle, "deg") => 1.0,
            (Dim::Angle, "rad") => 180.0 / std::f64::consts::PI,
            (Dim::Energy, "mJ") => 1.0,
            (Dim::Energy, "J") => 1e3,
            (Dim::Energy, "uJ") => 1e-3,
            (Dim::Energy, "nJ") => 1e-6,
            _ => return None,
        };
        Some(f)
    }
}

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    value: String,
}

/// Raw `[section] key = value` entries with their line numbers.
#[derive(Debug, Default)]
struct Document {
    entries: BTreeMap<(String, String), Entry>,
}

impl Document {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = Document::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: format!("unterminated section header `{content}`"),
                })?;
                let name = name.trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::UnknownSection {
                        line,
                        section: name.to_string(),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = &section else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("`{key}` appears before any [section]"),
                });
            };
            let known = SCHEMA
                .iter()
                .find(|(s, _)| s == sec)
                .is_some_and(|(_, keys)| keys.contains(&key));
            if !known {
                return Err(ConfigError::UnknownKey {
                    line,
                    section: sec.clone(),
                    key: key.to_string(),
                });
            }
            if value.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("`{key}` has no value"),
                });
            }
            let slot = (sec.clone(), key.to_string());
            if let Some(first) = doc.entries.get(&slot) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: format!("{sec}.{key}"),
                    first: first.line,
                });
            }
            doc.entries.insert(
                slot,
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        Ok(doc)
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.get(section, key).is_some()
    }

    fn quantity(&self, section: &str, key: &str, dim: Dim) -> Result<Option<Located>, ConfigError> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        let (number, unit) = split_unit(&e.value);
        let value = parse_number(number, e.line, key)?;
        Ok(Some(Located {
            value: value * unit_factor(dim, unit, e.line, key)?,
            line: e.line,
        }))
    }

    fn scalar(&self, section: &str, key: &str) -> Result<Option<Located>, ConfigError> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        let (number, unit) = split_unit(&e.value);
        if !unit.is_empty() {
            return Err(ConfigError::Unit {
                line: e.line,
                key: key.to_string(),
                expected: "a plain number".into(),
                got: unit.to_string(),
            });
        }
        Ok(Some(Located {
            value: parse_number(number, e.line, key)?,
            line: e.line,
        }))
    }

    fn integer(&self, section: &str, key: &str) -> Result<Option<(u64, usize)>, ConfigError> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        let v = e.value.replace('_', "").parse::<u64>().map_err(|_| ConfigError::Value {
            line: e.line,
            key: key.to_string(),
            message: format!("must be a non-negative integer, got `{}`", e.value),
        })?;
        Ok(Some((v, e.line)))
    }

    fn list(&self, section: &str, key: &str, dim: Dim) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        let items: Vec<&str> = e.value.split(',').map(str::trim).collect();
        let (last, unit) = split_unit(items[items.len() - 1]);
        let factor = unit_factor(dim, unit, e.line, key)?;
        let mut out = Vec::with_capacity(items.len());
        for (k, item) in items.iter().enumerate() {
            let text = if k + 1 == items.len() { last } else { item };
            out.push(parse_number(text, e.line, key)? * factor);
        }
        Ok(Some(out))
    }

    fn word(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.get(section, key).map(|e| (e.value.as_str(), e.line))
    }
}

#[derive(Clone, Copy, Debug)]
struct Located {
    value: f64,
    line: usize,
}

fn strip_comment(line: &str) -> &str {
    let cut = line
        .char_indices()
        .find(|&(i, c)| {
            (c == '#' || c == ';') && (i == 0 || line[..i].ends_with(char::is_whitespace))
        })
        .map_or(line.len(), |(i, _)| i);
    &line[..cut]
}

fn split_unit(value: &str) -> (&str, &str) {
    match value.trim().split_once(char::is_whitespace) {
        Some((n, u)) => (n.trim(), u.trim()),
        None => (value.trim(), ""),
    }
}

fn parse_number(text: &str, line: usize, key: &str) -> Result<f64, ConfigError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ConfigError::Value {
            line,
            key: key.to_string(),
            message: format!("must be a finite number, got `{text}`"),
        }),
    }
}

fn unit_factor(dim: Dim, unit: &str, line: usize, key: &str) -> Result<f64, ConfigError> {
    dim.factor(unit).ok_or_else(|| ConfigError::Unit {
        line,
        key: key.to_string(),
        expected: dim.describe().to_string(),
        got: if unit.is_empty() { "no unit".into() } else { unit.to_string() },
    })
}

fn range_error(key: &str, line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn positive(key: &str, q: Located) -> Result<f64, ConfigError> {
    if q.value > 0.0 {
        Ok(q.value)
    } else {
        Err(range_error(key, q.line, format!("must be positive, got {}", q.value)))
    }
}

fn non_negative(key: &str, q: Located) -> Result<f64, ConfigError> {
    if q.value >= 0.0 {
        Ok(q.value)
    } else {
        Err(range_error(key, q.line, format!("must be non-negative, got {}", q.value)))
    }
}

/// Which experiment a configuration drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    TwoSphere,
    Slab,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::TwoSphere => "two_sphere",
            Scenario::Slab => "slab",
        }
    }
}

/// Two-sphere settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSphereSection {
    /// mm
    pub radius: f64,
    pub increments: usize,
}

/// Output settings.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputSection {
    pub record_every: u64,
    /// Snapshot displacements (mm).
    pub snapshots: Vec<f64>,
    /// Write per-step contact diagnostics.
    pub contacts: bool,
}

/// Ladders of a discretization sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSection {
    /// mm
    pub sdp_ladder: Vec<f64>,
    /// mm
    pub vdp_ladder: Vec<f64>,
    /// mm
    pub delta_star: f64,
    pub tolerance: f64,
}

/// A validated run configuration in internal units.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub scenario: Scenario,
    pub formulation: ContactFormulation<f64>,
    /// tonne/mm³
    pub density: f64,
    /// mm
    pub sdp: f64,
    /// mm
    pub vdp: f64,
    /// Fixed step (s) for the slab; the two-sphere step follows from the
    /// increment count.
    pub dt: Option<f64>,
    pub timestep_factor: f64,
    /// mm/s
    pub speed: f64,
    /// mm
    pub delta_max: f64,
    /// Loading damping (1/s).
    pub damping: f64,
    /// Settling damping (1/s).
    pub relax_damping: f64,
    /// mJ
    pub ke_threshold: Option<f64>,
    pub relax_max_steps: u64,
    pub max_steps: u64,
    pub output: PathBuf,
    /// Reserved.
    pub seed: u64,
    pub two_sphere: TwoSphereSection,
    pub slab: SlabSpec<f64>,
    pub outputs: OutputSection,
    pub sweep: Option<SweepSection>,
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<SimulationConfig, ConfigError> {
    let doc = Document::parse(text)?;

    let mut missing = Vec::new();
    for (s, k) in [
        ("run", "scenario"),
        ("run", "formulation"),
        ("contact", "mu"),
        ("discretization", "sdp"),
        ("discretization", "vdp"),
    ] {
        if !doc.has(s, k) {
            missing.push(format!("{s}.{k}"));
        }
    }
    let mode = match doc.word("run", "formulation") {
        Some((w, line)) => Some(match w.to_ascii_lowercase().as_str() {
            "original" => FormulationMode::Original,
            "adapted" => FormulationMode::Adapted,
            _ => {
                return Err(range_error(
                    "formulation",
                    line,
                    format!("must be `original` or `adapted`, got `{w}`"),
                ))
            }
        }),
        None => None,
    };
    match mode {
        Some(FormulationMode::Original) if !doc.has("contact", "kn") => missing.push("contact.kn".into()),
        Some(FormulationMode::Adapted) if !doc.has("contact", "kn_star") => {
            missing.push("contact.kn_star".into())
        }
        None if !doc.has("contact", "kn") && !doc.has("contact", "kn_star") => {
            missing.push("contact.kn or contact.kn_star".into())
        }
        _ => {}
    }
    if !missing.is_empty() {
        return Err(ConfigError::Missing(missing));
    }
    let mode = mode.expect("checked above");

    let scenario = {
        let (w, line) = doc.word("run", "scenario").expect("checked above");
        match w.to_ascii_lowercase().as_str() {
            "two_sphere" => Scenario::TwoSphere,
            "slab" => Scenario::Slab,
            _ => {
                return Err(range_error(
                    "scenario",
                    line,
                    format!("must be `two_sphere` or `slab`, got `{w}`"),
                ))
            }
        }
    };

    let mu = non_negative("mu", doc.scalar("contact", "mu")?.expect("checked above"))?;
    let formulation = match mode {
        FormulationMode::Original => {
            for k in ["kn_star", "ks_star"] {
                if let Some(e) = doc.get("contact", k) {
                    return Err(range_error(k, e.line, "applies to the adapted formulation only"));
                }
            }
            let kn = positive("kn", doc.quantity("contact", "kn", Dim::Stiffness)?.expect("checked above"))?;
            let ks = match doc.quantity("contact", "ks", Dim::Stiffness)? {
                Some(q) => positive("ks", q)?,
                None => kn,
            };
            ContactFormulation::original(kn, ks, mu)
        }
        FormulationMode::Adapted => {
            for k in ["kn", "ks"] {
                if let Some(e) = doc.get("contact", k) {
                    return Err(range_error(k, e.line, "applies to the original formulation only"));
                }
            }
            let kn = positive(
                "kn_star",
                doc.quantity("contact", "kn_star", Dim::AreaStiffness)?.expect("checked above"),
            )?;
            let ks = match doc.quantity("contact", "ks_star", Dim::AreaStiffness)? {
                Some(q) => positive("ks_star", q)?,
                None => kn,
            };
            ContactFormulation::adapted(kn, ks, mu)
        }
    };

    let req_len = |k: &str| -> Result<f64, ConfigError> {
        positive(k, doc.quantity("discretization", k, Dim::Length)?.expect("checked above"))
    };
    let sdp = req_len("sdp")?;
    let vdp = req_len("vdp")?;

    let opt_pos = |s: &str, k: &str, d: Dim, default: f64| -> Result<f64, ConfigError> {
        doc.quantity(s, k, d)?.map_or(Ok(default), |q| positive(k, q))
    };
    let opt_nonneg = |s: &str, k: &str, d: Dim, default: f64| -> Result<f64, ConfigError> {
        doc.quantity(s, k, d)?.map_or(Ok(default), |q| non_negative(k, q))
    };
    let opt_count = |s: &str, k: &str, default: u64| -> Result<u64, ConfigError> {
        match doc.integer(s, k)? {
            Some((0, line)) => Err(range_error(k, line, "must be at least 1")),
            Some((v, _)) => Ok(v),
            None => Ok(default),
        }
    };

    let density = opt_pos("material", "density", Dim::Density, 2.5e-9)?;
    let dt = doc.quantity("time", "dt", Dim::Time)?.map(|q| positive("dt", q)).transpose()?;
    let timestep_factor = match doc.scalar("time", "timestep_factor")? {
        Some(q) if q.value > 0.0 && q.value <= 1.0 => q.value,
        Some(q) => return Err(range_error("timestep_factor", q.line, "must lie in (0, 1]")),
        None => 0.25,
    };

    let (speed_default, delta_default) = match scenario {
        Scenario::TwoSphere => (5.0, 1.0),
        Scenario::Slab => (100.0, 5.0),
    };
    let speed = opt_pos("loading", "speed", Dim::Speed, speed_default)?;
    let delta_max = opt_pos("loading", "delta_max", Dim::Length, delta_default)?;
    let damping = opt_nonneg("loading", "damping", Dim::Rate, 0.0)?;
    let relax_damping = opt_pos("loading", "relax_damping", Dim::Rate, 50.0)?;
    let ke_threshold = doc
        .quantity("loading", "ke_threshold", Dim::Energy)?
        .map(|q| positive("ke_threshold", q))
        .transpose()?;
    let relax_max_steps = opt_count("loading", "relax_max_steps", 2_000_000)?;
    let max_steps = opt_count("loading", "max_steps", 5_000_000)?;

    let two_sphere = TwoSphereSection {
        radius: opt_pos("two_sphere", "radius", Dim::Length, 10.0)?,
        increments: opt_count("two_sphere", "increments", 100)? as usize,
    };

    let std_slab = SlabSpec::<f64>::standard();
    let slab = SlabSpec {
        blocks_per_side: match doc.integer("slab", "blocks_per_side")? {
            Some((n, line)) if n < 3 => {
                return Err(range_error("blocks_per_side", line, format!("must be at least 3, got {n}")))
            }
            Some((n, _)) => n as usize,
            None => std_slab.blocks_per_side,
        },
        block_side: opt_pos("slab", "block_side", Dim::Length, std_slab.block_side)?,
        incline_deg: match doc.quantity("slab", "incline", Dim::Angle)? {
            Some(q) if q.value > 0.0 && q.value < 45.0 => q.value,
            Some(q) => return Err(range_error("incline", q.line, "must lie in (0, 45) degrees")),
            None => std_slab.incline_deg,
        },
        thickness: opt_pos("slab", "thickness", Dim::Length, std_slab.thickness)?,
        indenter_radius: opt_pos("slab", "indenter_radius", Dim::Length, std_slab.indenter_radius)?,
        mu,
        density,
        gap: opt_nonneg("slab", "gap", Dim::Length, std_slab.gap)?,
        indenter_clearance: opt_nonneg("slab", "clearance", Dim::Length, std_slab.indenter_clearance)?,
        gravity: opt_nonneg("slab", "gravity", Dim::Acceleration, std_slab.gravity)?,
    };

    let snapshots = match doc.list("output", "snapshots", Dim::Length)? {
        Some(v) => {
            let line = doc.get("output", "snapshots").map_or(0, |e| e.line);
            if v.iter().any(|&d| d < 0.0) || v.windows(2).any(|w| w[1] <= w[0]) {
                return Err(range_error("snapshots", line, "must be non-negative and ascending"));
            }
            v
        }
        None => match scenario {
            Scenario::Slab => (0..=5).map(f64::from).filter(|&d| d <= delta_max).collect(),
            Scenario::TwoSphere => Vec::new(),
        },
    };
    let contacts = match doc.word("output", "contacts") {
        Some(("true", _)) => true,
        Some(("false", _)) | None => false,
        Some((w, line)) => return Err(range_error("contacts", line, format!("must be true or false, got `{w}`"))),
    };
    let outputs = OutputSection {
        record_every: opt_count("output", "record_every", 100)?,
        snapshots,
        contacts,
    };

    let sweep = parse_sweep(&doc)?;
    let output = doc
        .word("run", "output")
        .map_or_else(|| PathBuf::from("lsdem-out"), |(w, _)| PathBuf::from(w));
    let seed = doc.integer("run", "seed")?.map_or(0, |(v, _)| v);

    Ok(SimulationConfig {
        scenario,
        formulation,
        density,
        sdp,
        vdp,
        dt,
        timestep_factor,
        speed,
        delta_max,
        damping,
        relax_damping,
        ke_threshold,
        relax_max_steps,
        max_steps,
        output,
        seed,
        two_sphere,
        slab,
        outputs,
        sweep,
    })
}

fn parse_sweep(doc: &Document) -> Result<Option<SweepSection>, ConfigError> {
    let sdp = doc.list("sweep", "sdp_ladder", Dim::Length)?;
    let vdp = doc.list("sweep", "vdp_ladder", Dim::Length)?;
    let (sdp_ladder, vdp_ladder) = match (sdp, vdp) {
        (None, None) => return Ok(None),
        (Some(s), Some(v)) => (s, v),
        (Some(_), None) => return Err(ConfigError::Missing(vec!["sweep.vdp_ladder".into()])),
        (None, Some(_)) => return Err(ConfigError::Missing(vec!["sweep.sdp_ladder".into()])),
    };
    for (key, ladder) in [("sdp_ladder", &sdp_ladder), ("vdp_ladder", &vdp_ladder)] {
        let line = doc.get("sweep", key).map_or(0, |e| e.line);
        if ladder.iter().any(|&v| v <= 0.0) || ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(range_error(key, line, "must be positive and strictly descending"));
        }
    }
    let delta_star = match doc.quantity("sweep", "delta_star", Dim::Length)? {
        Some(q) => positive("delta_star", q)?,
        None => return Err(ConfigError::Missing(vec!["sweep.delta_star".into()])),
    };
    let tolerance = match doc.scalar("sweep", "tolerance")? {
        Some(q) => positive("tolerance", q)?,
        None => 0.05,
    };
    Ok(Some(SweepSection {
        sdp_ladder,
        vdp_ladder,
        delta_star,
        tolerance,
    }))
}

impl SimulationConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, crate::error::IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::error::IoError::io(path, e))?;
        parse_config(&text).map_err(|e| crate::error::IoError::format(path, e.to_string()))
    }

    pub fn two_sphere_params(&self) -> TwoSphereParams<f64> {
        let mut p = TwoSphereParams::new(self.two_sphere.radius, self.sdp, self.vdp, self.formulation, self.delta_max);
        p.speed = self.speed;
        p.increments = self.two_sphere.increments;
        p.density = self.density;
        p
    }

    pub fn slab_params(&self) -> SlabRunParams<f64> {
        SlabRunParams {
            spec: self.slab,
            formulation: self.formulation,
            sdp: self.sdp,
            vdp: self.vdp,
            timestep_factor: self.timestep_factor,
            dt: self.dt,
            relax_damping: self.relax_damping,
            ke_threshold: self.ke_threshold,
            relax_max_steps: self.relax_max_steps,
            speed: self.speed,
            delta_max: self.delta_max,
            loading_damping: self.damping,
            record_every: self.outputs.record_every,
            snapshot_deltas: self.outputs.snapshots.clone(),
            max_steps: self.max_steps,
        }
    }

    /// `None` without a `[sweep]` section.
    pub fn sweep_params(&self) -> Option<SweepParams<f64>> {
        let s = self.sweep.as_ref()?;
        let base = match self.scenario {
            Scenario::TwoSphere => SweepBase::TwoSphere(self.two_sphere_params()),
            Scenario::Slab => SweepBase::Slab(Box::new(self.slab_params())),
        };
        Some(SweepParams {
            base,
            sdp_ladder: s.sdp_ladder.clone(),
            vdp_ladder: s.vdp_ladder.clone(),
            delta_star: s.delta_star,
            tolerance: s.tolerance,
        })
    }

    /// The resolved configuration in internal units. Parsing it back gives
    /// an identical configuration.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let f = &self.formulation;
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "# lsdem {} resolved configuration (internal units)", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "scenario = {}", self.scenario.name());
        let _ = writeln!(s, "formulation = {}", f.mode.name());
        let _ = writeln!(s, "output = {}", self.output.display());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "\n[contact]");
        match f.mode {
            FormulationMode::Original => {
                let _ = writeln!(s, "kn = {:?} N/mm\nks = {:?} N/mm", f.k_n, f.k_s);
            }
            FormulationMode::Adapted => {
                let _ = writeln!(s, "kn_star = {:?} N/mm3\nks_star = {:?} N/mm3", f.k_n_star, f.k_s_star);
            }
        }
        let _ = writeln!(s, "mu = {:?}", f.mu);
        let _ = writeln!(s, "\n[material]\ndensity = {:?} t/mm3", self.density);
        let _ = writeln!(s, "\n[discretization]\nsdp = {:?} mm\nvdp = {:?} mm", self.sdp, self.vdp);
        let _ = writeln!(s, "\n[time]");
        if let Some(dt) = self.dt {
            let _ = writeln!(s, "dt = {dt:?} s");
        }
        let _ = writeln!(s, "timestep_factor = {:?}", self.timestep_factor);
        let _ = writeln!(s, "\n[loading]");
        let _ = writeln!(s, "speed = {:?} mm/s\ndelta_max = {:?} mm", self.speed, self.delta_max);
        let _ = writeln!(s, "damping = {:?} 1/s\nrelax_damping = {:?} 1/s", self.damping, self.relax_damping);
        if let Some(e) = self.ke_threshold {
            let _ = writeln!(s, "ke_threshold = {e:?} mJ");
        }
        let _ = writeln!(s, "relax_max_steps = {}\nmax_steps = {}", self.relax_max_steps, self.max_steps);
        let _ = writeln!(
            s,
            "\n[two_sphere]\nradius = {:?} mm\nincrements = {}",
            self.two_sphere.radius, self.two_sphere.increments
        );
        let b = &self.slab;
        let _ = writeln!(s, "\n[slab]\nblocks_per_side = {}", b.blocks_per_side);
        let _ = writeln!(s, "block_side = {:?} mm\nincline = {:?} deg", b.block_side, b.incline_deg);
        let _ = writeln!(s, "thickness = {:?} mm\nindenter_radius = {:?} mm", b.thickness, b.indenter_radius);
        let _ = writeln!(s, "gap = {:?} mm\nclearance = {:?} mm", b.gap, b.indenter_clearance);
        let _ = writeln!(s, "gravity = {:?} mm/s2", b.gravity);
        let _ = writeln!(s, "\n[output]\nrecord_every = {}", self.outputs.record_every);
        if !self.outputs.snapshots.is_empty() {
            let _ = writeln!(s, "snapshots = {} mm", list(&self.outputs.snapshots));
        }
        let _ = writeln!(s, "contacts = {}", self.outputs.contacts);
        if let Some(w) = &self.sweep {
            let _ = writeln!(s, "\n[sweep]");
            let _ = writeln!(s, "sdp_ladder = {} mm\nvdp_ladder = {} mm", list(&w.sdp_ladder), list(&w.vdp_ladder));
            let _ = writeln!(s, "delta_star = {:?} mm\ntolerance = {:?}", w.delta_star, w.tolerance);
        }
        s
    }
}
