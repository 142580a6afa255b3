//! Campaign configuration: a strict key = value format with [section]
//! headers (a TOML subset). Quantities carry explicit unit suffixes.
//! Unknown keys are hard errors with a nearest-key suggestion; defaults
//! are applied and echoed into every output's metadata.

use std::fmt;

use serde::Serialize;

use crate::units::{format_quantity, quantity_from_toml, Quantity};

/// All validation problems found in a config, each with a key path and,
/// when the key appears in the file, its line number.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub messages: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.messages.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "config error: {m}")?;
        }
        Ok(())
    }
}

impl ConfigError {
    fn one(msg: impl Into<String>) -> Self {
        ConfigError {
            messages: vec![msg.into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldCfg {
    /// Angular frequency (rad/s); configured as ordinary frequency.
    pub omega_rad_per_s: f64,
    pub amplitude_tesla: f64,
    pub phi0_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceCfg {
    /// "spin-echo", "pdd", or "cp".
    pub kind: String,
    /// Pulse count for the multi-pulse families.
    pub pulses: Option<u32>,
    pub tau_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleCfg {
    pub n_s: u32,
    pub n_phi: u32,
    pub t_d_s: f64,
    pub t_phi_s: f64,
    pub t_dead_s: f64,
    pub n_r: u32,
    /// "delay-major" or "phase-major".
    pub mode: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionCfg {
    pub n_nv: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsCfg {
    pub gamma_e_hz_per_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunCfg {
    pub seed: u64,
    pub trials: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCfg {
    /// "field.amplitude" or "schedule.t_d".
    pub variable: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    /// "linear" or "log".
    pub spacing: String,
}

impl SweepCfg {
    /// The sweep grid in base SI units.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if self.spacing == "log" {
                    self.from * (self.to / self.from).powf(t)
                } else {
                    self.from + (self.to - self.from) * t
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisCfg {
    pub n_s_list: Vec<u32>,
    pub target_delay_s: f64,
    /// Periodogram bin for the first harmonic; derived from the
    /// schedule when absent.
    pub bin: Option<usize>,
    pub harmonics_max: u32,
    pub dip_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignConfig {
    pub field: FieldCfg,
    pub sequence: SequenceCfg,
    pub schedule: ScheduleCfg,
    pub detection: DetectionCfg,
    pub constants: ConstantsCfg,
    pub run: RunCfg,
    pub sweep: Option<SweepCfg>,
    pub analysis: AnalysisCfg,
}

pub const DEFAULT_SEED: u64 = 20250810;
pub const DEFAULT_TRIALS: u32 = 1000;
pub const DEFAULT_GAMMA_E_HZ_PER_T: f64 = 28.024e9;

const SECTIONS: &[(&str, &[&str])] = &[
    ("field", &["omega", "amplitude", "phi0"]),
    ("sequence", &["kind", "pulses", "tau"]),
    ("schedule", &["n_s", "n_phi", "t_d", "t_phi", "t_dead", "n_r", "mode"]),
    ("detection", &["n_nv", "eta"]),
    ("constants", &["gamma_e"]),
    ("run", &["seed", "trials"]),
    ("sweep", &["variable", "from", "to", "points", "spacing"]),
    (
        "analysis",
        &["n_s_list", "target_delay", "bin", "harmonics_max", "dip_count"],
    ),
];

/// Parse and validate a config file's text, after applying `--set`
/// overrides (dotted key path, raw value text).
pub fn parse_config_str(
    raw: &str,
    overrides: &[(String, String)],
) -> Result<(CampaignConfig, Vec<String>), ConfigError> {
    let mut table: toml::Table = toml::from_str(raw).map_err(|e| {
        let line = e
            .span()
            .map(|s| 1 + raw[..s.start.min(raw.len())].matches('\n').count());
        ConfigError::one(match line {
            Some(l) => format!("(line {l}): {}", e.message()),
            None => e.message().to_string(),
        })
    })?;

    for (path, value) in overrides {
        apply_override(&mut table, path, value)?;
    }

    let mut errors: Vec<String> = Vec::new();
    let mut notes: Vec<String> = Vec::new();
    let lines = LineIndex::new(raw);

    // reject unknown sections and keys up front
    for (section, value) in &table {
        match SECTIONS.iter().find(|(s, _)| s == section) {
            None => errors.push(format!(
                "{section}{}: unknown section{}",
                lines.section_suffix(section),
                suggest(section, SECTIONS.iter().map(|(s, _)| *s))
            )),
            Some((_, keys)) => {
                let Some(t) = value.as_table() else {
                    errors.push(format!(
                        "{section}{}: expected a [{section}] section",
                        lines.section_suffix(section)
                    ));
                    continue;
                };
                for key in t.keys() {
                    if !keys.contains(&key.as_str()) {
                        errors.push(format!(
                            "{section}.{key}{}: unknown key{}",
                            lines.key_suffix(section, key),
                            suggest(key, keys.iter().copied())
                        ));
                    }
                }
            }
        }
    }

    let mut ctx = Ctx {
        table: &table,
        lines: &lines,
        errors,
        notes: &mut notes,
    };
    let cfg = build_config(&mut ctx);
    if !ctx.errors.is_empty() {
        return Err(ConfigError {
            messages: ctx.errors,
        });
    }
    Ok((cfg.expect("no errors implies a config"), notes))
}

struct Ctx<'a> {
    table: &'a toml::Table,
    lines: &'a LineIndex,
    errors: Vec<String>,
    notes: &'a mut Vec<String>,
}

impl<'a> Ctx<'a> {
    fn get(&self, section: &str, key: &str) -> Option<&'a toml::Value> {
        self.table.get(section)?.as_table()?.get(key)
    }

    fn err(&mut self, section: &str, key: &str, msg: impl fmt::Display) {
        let at = self.lines.key_suffix(section, key);
        self.errors.push(format!("{section}.{key}{at}: {msg}"));
    }

    fn quantity(&mut self, section: &str, key: &str, q: Quantity) -> Option<f64> {
        match self.get(section, key) {
            None => {
                self.err(section, key, "missing required key");
                None
            }
            Some(v) => match quantity_from_toml(v, q) {
                Ok(x) => Some(x),
                Err(e) => {
                    self.err(section, key, e);
                    None
                }
            },
        }
    }

    fn quantity_or(&mut self, section: &str, key: &str, q: Quantity, default: f64) -> f64 {
        match self.get(section, key) {
            None => {
                self.notes
                    .push(format!("{section}.{key} defaulted to \"{}\"", format_quantity(default, q)));
                default
            }
            Some(v) => match quantity_from_toml(v, q) {
                Ok(x) => x,
                Err(e) => {
                    self.err(section, key, e);
                    default
                }
            },
        }
    }

    fn integer<T: TryFrom<i64>>(&mut self, section: &str, key: &str) -> Option<T> {
        match self.get(section, key) {
            None => {
                self.err(section, key, "missing required key");
                None
            }
            Some(v) => self.cast_integer(section, key, v),
        }
    }

    fn integer_or<T: TryFrom<i64> + fmt::Display + Copy>(
        &mut self,
        section: &str,
        key: &str,
        default: T,
    ) -> T {
        match self.get(section, key) {
            None => {
                self.notes.push(format!("{section}.{key} defaulted to {default}"));
                default
            }
            Some(v) => self.cast_integer(section, key, v).unwrap_or(default),
        }
    }

    fn cast_integer<T: TryFrom<i64>>(
        &mut self,
        section: &str,
        key: &str,
        v: &toml::Value,
    ) -> Option<T> {
        match v.as_integer().map(T::try_from) {
            Some(Ok(x)) => Some(x),
            Some(Err(_)) => {
                self.err(section, key, "integer out of range");
                None
            }
            None => {
                self.err(section, key, format!("expected an integer, got {}", v.type_str()));
                None
            }
        }
    }

    fn number(&mut self, section: &str, key: &str) -> Option<f64> {
        match self.get(section, key) {
            None => {
                self.err(section, key, "missing required key");
                None
            }
            Some(toml::Value::Float(f)) => Some(*f),
            Some(toml::Value::Integer(i)) => Some(*i as f64),
            Some(v) => {
                self.err(section, key, format!("expected a number, got {}", v.type_str()));
                None
            }
        }
    }

    fn string(&mut self, section: &str, key: &str, allowed: &[&str]) -> Option<String> {
        match self.get(section, key) {
            None => {
                self.err(section, key, "missing required key");
                None
            }
            Some(toml::Value::String(s)) if allowed.contains(&s.as_str()) => Some(s.clone()),
            Some(toml::Value::String(s)) => {
                self.err(
                    section,
                    key,
                    format!("\"{s}\" is not one of {allowed:?}{}", suggest(s, allowed.iter().copied())),
                );
                None
            }
            Some(v) => {
                self.err(section, key, format!("expected a string, got {}", v.type_str()));
                None
            }
        }
    }

    fn string_or(&mut self, section: &str, key: &str, allowed: &[&str], default: &str) -> String {
        if self.get(section, key).is_none() {
            self.notes
                .push(format!("{section}.{key} defaulted to \"{default}\""));
            return default.to_string();
        }
        self.string(section, key, allowed).unwrap_or_else(|| default.to_string())
    }
}

fn build_config(ctx: &mut Ctx) -> Option<CampaignConfig> {
    use std::f64::consts::TAU;

    let omega_hz = ctx.quantity("field", "omega", Quantity::Frequency);
    let amplitude = ctx.quantity("field", "amplitude", Quantity::Field);
    let phi0 = ctx.quantity_or("field", "phi0", Quantity::Angle, 0.0);
    if let Some(hz) = omega_hz {
        if hz <= 0.0 {
            ctx.err("field", "omega", "frequency must be > 0");
        }
    }
    if let Some(b) = amplitude {
        if b < 0.0 {
            ctx.err("field", "amplitude", "amplitude must be >= 0");
        }
    }

    let kind = ctx.string("sequence", "kind", &["spin-echo", "pdd", "cp"]);
    let pulses: Option<u32> = match ctx.get("sequence", "pulses") {
        Some(_) => ctx.integer("sequence", "pulses"),
        None => None,
    };
    match (kind.as_deref(), pulses) {
        (Some("spin-echo"), Some(_)) => {
            ctx.err("sequence", "pulses", "spin-echo takes no pulse count")
        }
        (Some("pdd") | Some("cp"), None) => {
            ctx.err("sequence", "pulses", "required for pdd/cp sequences")
        }
        (_, Some(0)) => ctx.err("sequence", "pulses", "pulse count must be >= 1"),
        _ => {}
    }
    let tau = ctx.quantity("sequence", "tau", Quantity::Time);
    if let Some(t) = tau {
        if t <= 0.0 {
            ctx.err("sequence", "tau", "tau must be > 0");
        }
    }

    let n_s: Option<u32> = ctx.integer("schedule", "n_s");
    let n_phi: Option<u32> = ctx.integer("schedule", "n_phi");
    for (key, v) in [("n_s", n_s), ("n_phi", n_phi)] {
        if v == Some(0) {
            ctx.err("schedule", key, "must be >= 1");
        }
    }
    let t_d = ctx.quantity("schedule", "t_d", Quantity::Time);
    let t_phi = ctx.quantity("schedule", "t_phi", Quantity::Time);
    let t_dead = ctx.quantity_or("schedule", "t_dead", Quantity::Time, 0.0);
    let n_r: u32 = ctx.integer_or("schedule", "n_r", 1u32);
    if n_r == 0 {
        ctx.err("schedule", "n_r", "must be >= 1");
    }
    let mode = ctx.string_or("schedule", "mode", &["delay-major", "phase-major"], "phase-major");
    for (key, v) in [("t_d", t_d), ("t_phi", t_phi), ("t_dead", Some(t_dead))] {
        if let Some(x) = v {
            if x < 0.0 {
                ctx.err("schedule", key, "time must be >= 0");
            }
        }
    }

    let n_nv = ctx.number("detection", "n_nv");
    let eta = ctx.number("detection", "eta");
    if let Some(n) = n_nv {
        if n < 1.0 {
            ctx.err("detection", "n_nv", "sensor count must be >= 1");
        }
    }
    if let Some(e) = eta {
        if !(e > 0.0 && e <= 1.0) {
            ctx.err("detection", "eta", "collection efficiency must be in (0, 1]");
        }
    }

    let gamma = ctx.quantity_or(
        "constants",
        "gamma_e",
        Quantity::Gyromagnetic,
        DEFAULT_GAMMA_E_HZ_PER_T,
    );
    if gamma <= 0.0 {
        ctx.err("constants", "gamma_e", "gyromagnetic ratio must be > 0");
    }

    let seed: u64 = match ctx.get("run", "seed") {
        Some(toml::Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(_) => {
            ctx.err("run", "seed", "expected a non-negative integer");
            DEFAULT_SEED
        }
        None => {
            ctx.notes.push(format!("run.seed defaulted to {DEFAULT_SEED}"));
            DEFAULT_SEED
        }
    };
    let trials: u32 = ctx.integer_or("run", "trials", DEFAULT_TRIALS);
    if trials < 2 {
        ctx.err("run", "trials", "need at least 2 trials");
    }

    let sweep = if ctx.table.contains_key("sweep") {
        build_sweep(ctx)
    } else {
        None
    };

    let analysis = build_analysis(ctx);

    if !ctx.errors.is_empty() {
        return None;
    }
    Some(CampaignConfig {
        field: FieldCfg {
            omega_rad_per_s: TAU * omega_hz?,
            amplitude_tesla: amplitude?,
            phi0_rad: phi0,
        },
        sequence: SequenceCfg {
            kind: kind?,
            pulses,
            tau_s: tau?,
        },
        schedule: ScheduleCfg {
            n_s: n_s?,
            n_phi: n_phi?,
            t_d_s: t_d?,
            t_phi_s: t_phi?,
            t_dead_s: t_dead,
            n_r,
            mode,
        },
        detection: DetectionCfg {
            n_nv: n_nv?,
            eta: eta?,
        },
        constants: ConstantsCfg {
            gamma_e_hz_per_t: gamma,
        },
        run: RunCfg { seed, trials },
        sweep,
        analysis,
    })
}

/// Sweep variables and the dimension of their from/to bounds.
pub const SWEEP_VARIABLES: &[(&str, Quantity)] = &[
    ("field.amplitude", Quantity::Field),
    ("schedule.t_d", Quantity::Time),
];

fn build_sweep(ctx: &mut Ctx) -> Option<SweepCfg> {
    let variable = ctx.string(
        "sweep",
        "variable",
        &SWEEP_VARIABLES.iter().map(|(v, _)| *v).collect::<Vec<_>>(),
    )?;
    let q = SWEEP_VARIABLES
        .iter()
        .find(|(v, _)| *v == variable)
        .map(|(_, q)| *q)?;
    let from = ctx.quantity("sweep", "from", q);
    let to = ctx.quantity("sweep", "to", q);
    let points: Option<usize> = ctx.integer("sweep", "points");
    let spacing = ctx.string_or("sweep", "spacing", &["linear", "log"], "linear");
    if let (Some(a), Some(b)) = (from, to) {
        if b <= a {
            ctx.err("sweep", "to", "sweep range must be ascending");
        }
        if spacing == "log" && a <= 0.0 {
            ctx.err("sweep", "from", "log spacing needs a positive start");
        }
    }
    if let Some(p) = points {
        if p < 2 {
            ctx.err("sweep", "points", "need at least 2 points");
        }
    }
    Some(SweepCfg {
        variable,
        from: from?,
        to: to?,
        points: points?,
        spacing,
    })
}

fn build_analysis(ctx: &mut Ctx) -> AnalysisCfg {
    let n_s_list: Vec<u32> = match ctx.get("analysis", "n_s_list") {
        None => vec![2, 5, 10],
        Some(toml::Value::Array(a)) => {
            let mut out = Vec::new();
            for v in a {
                match v.as_integer() {
                    Some(i) if i >= 1 && i <= u32::MAX as i64 => out.push(i as u32),
                    _ => {
                        ctx.err("analysis", "n_s_list", "entries must be integers >= 1");
                        break;
                    }
                }
            }
            if out.is_empty() {
                ctx.err("analysis", "n_s_list", "must not be empty");
            }
            out
        }
        Some(v) => {
            let msg = format!("expected an array, got {}", v.type_str());
            ctx.err("analysis", "n_s_list", msg);
            vec![2, 5, 10]
        }
    };
    let target_delay = ctx.quantity_or("analysis", "target_delay", Quantity::Time, 100e-6);
    let bin: Option<usize> = match ctx.get("analysis", "bin") {
        Some(_) => ctx.integer("analysis", "bin"),
        None => None,
    };
    let harmonics_max: u32 = ctx.integer_or("analysis", "harmonics_max", 12u32);
    if harmonics_max < 2 {
        ctx.err("analysis", "harmonics_max", "must be >= 2");
    }
    let dip_count: usize = ctx.integer_or("analysis", "dip_count", 5usize);
    if dip_count == 0 {
        ctx.err("analysis", "dip_count", "must be >= 1");
    }
    AnalysisCfg {
        n_s_list,
        target_delay_s: target_delay,
        bin,
        harmonics_max,
        dip_count,
    }
}

fn apply_override(
    table: &mut toml::Table,
    path: &str,
    value: &str,
) -> Result<(), ConfigError> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.len() != 2 || parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::one(format!(
            "--set {path}: expected a section.key path"
        )));
    }
    // parse the value as TOML if possible, else treat it as a string
    let parsed: toml::Value = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let section = table
        .entry(parts[0].to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let Some(section) = section.as_table_mut() else {
        return Err(ConfigError::one(format!(
            "--set {path}: {} is not a section",
            parts[0]
        )));
    };
    section.insert(parts[1].to_string(), parsed);
    Ok(())
}

/// Re-emit a resolved config in the canonical file format; parsing the
/// result reproduces the config exactly.
pub fn emit_canonical(cfg: &CampaignConfig) -> String {
    use std::f64::consts::TAU;
    use std::fmt::Write;

    let mut s = String::new();
    let q = |v: f64, qty: Quantity| format!("\"{}\"", format_quantity(v, qty));
    writeln!(s, "[field]").unwrap();
    writeln!(s, "omega = {}", q(cfg.field.omega_rad_per_s / TAU, Quantity::Frequency)).unwrap();
    writeln!(s, "amplitude = {}", q(cfg.field.amplitude_tesla, Quantity::Field)).unwrap();
    writeln!(s, "phi0 = {}", q(cfg.field.phi0_rad, Quantity::Angle)).unwrap();
    writeln!(s, "\n[sequence]").unwrap();
    writeln!(s, "kind = \"{}\"", cfg.sequence.kind).unwrap();
    if let Some(p) = cfg.sequence.pulses {
        writeln!(s, "pulses = {p}").unwrap();
    }
    writeln!(s, "tau = {}", q(cfg.sequence.tau_s, Quantity::Time)).unwrap();
    writeln!(s, "\n[schedule]").unwrap();
    writeln!(s, "n_s = {}", cfg.schedule.n_s).unwrap();
    writeln!(s, "n_phi = {}", cfg.schedule.n_phi).unwrap();
    writeln!(s, "t_d = {}", q(cfg.schedule.t_d_s, Quantity::Time)).unwrap();
    writeln!(s, "t_phi = {}", q(cfg.schedule.t_phi_s, Quantity::Time)).unwrap();
    writeln!(s, "t_dead = {}", q(cfg.schedule.t_dead_s, Quantity::Time)).unwrap();
    writeln!(s, "n_r = {}", cfg.schedule.n_r).unwrap();
    writeln!(s, "mode = \"{}\"", cfg.schedule.mode).unwrap();
    writeln!(s, "\n[detection]").unwrap();
    writeln!(s, "n_nv = {}", float_literal(cfg.detection.n_nv)).unwrap();
    writeln!(s, "eta = {}", float_literal(cfg.detection.eta)).unwrap();
    writeln!(s, "\n[constants]").unwrap();
    writeln!(s, "gamma_e = {}", q(cfg.constants.gamma_e_hz_per_t, Quantity::Gyromagnetic)).unwrap();
    writeln!(s, "\n[run]").unwrap();
    writeln!(s, "seed = {}", cfg.run.seed).unwrap();
    writeln!(s, "trials = {}", cfg.run.trials).unwrap();
    if let Some(sw) = &cfg.sweep {
        let qty = SWEEP_VARIABLES
            .iter()
            .find(|(v, _)| *v == sw.variable)
            .map(|(_, q)| *q)
            .expect("validated variable");
        writeln!(s, "\n[sweep]").unwrap();
        writeln!(s, "variable = \"{}\"", sw.variable).unwrap();
        writeln!(s, "from = {}", q(sw.from, qty)).unwrap();
        writeln!(s, "to = {}", q(sw.to, qty)).unwrap();
        writeln!(s, "points = {}", sw.points).unwrap();
        writeln!(s, "spacing = \"{}\"", sw.spacing).unwrap();
    }
    writeln!(s, "\n[analysis]").unwrap();
    let list = cfg
        .analysis
        .n_s_list
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    writeln!(s, "n_s_list = [{list}]").unwrap();
    writeln!(s, "target_delay = {}", q(cfg.analysis.target_delay_s, Quantity::Time)).unwrap();
    if let Some(bin) = cfg.analysis.bin {
        writeln!(s, "bin = {bin}").unwrap();
    }
    writeln!(s, "harmonics_max = {}", cfg.analysis.harmonics_max).unwrap();
    writeln!(s, "dip_count = {}", cfg.analysis.dip_count).unwrap();
    s
}

/// Numbers that must parse back as TOML floats-or-integers preserving
/// the exact f64.
fn float_literal(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || s.contains('E') {
        s
    } else {
        format!("{s}.0")
    }
}

/// Line lookup for diagnostics: tracks [section] headers and finds the
/// line where `key =` appears inside its section.
struct LineIndex {
    entries: Vec<(String, String, usize)>,
    sections: Vec<(String, usize)>,
}

impl LineIndex {
    fn new(raw: &str) -> Self {
        let mut entries = Vec::new();
        let mut sections = Vec::new();
        let mut current = String::new();
        for (i, line) in raw.lines().enumerate() {
            let t = line.trim();
            if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                current = name.trim().to_string();
                sections.push((current.clone(), i + 1));
            } else if let Some(eq) = t.find('=') {
                let key = t[..eq].trim();
                if !key.is_empty() && !t.starts_with('#') {
                    entries.push((current.clone(), key.to_string(), i + 1));
                }
            }
        }
        LineIndex { entries, sections }
    }

    fn key_suffix(&self, section: &str, key: &str) -> String {
        self.entries
            .iter()
            .find(|(s, k, _)| s == section && k == key)
            .map(|(_, _, l)| format!(" (line {l})"))
            .unwrap_or_default()
    }

    fn section_suffix(&self, section: &str) -> String {
        self.sections
            .iter()
            .find(|(s, _)| s == section)
            .map(|(_, l)| format!(" (line {l})"))
            .unwrap_or_default()
    }
}

/// "did you mean" suffix when a close candidate exists.
fn suggest<'a>(given: &str, candidates: impl Iterator<Item = &'a str>) -> String {
    let best = candidates
        .map(|c| (levenshtein(given, c), c))
        .min_by_key(|(d, _)| *d);
    match best {
        Some((d, c)) if d <= 3 && d < given.len() => format!("; did you mean \"{c}\"?"),
        _ => String::new(),
    }
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
