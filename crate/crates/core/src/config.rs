//! Flat `key = value` configuration files.
//!
//! ```text
//! # comment
//! [site]
//! r_n_m = 0.5
//! d_rr_m = 1.435
//! frequency_hz = 50/3
//! current_a = 100
//! coil = coil-a
//!
//! [event]
//! label = freight
//! start_s = 3600
//! segment_s_a = 540, 120
//! ```
//!
//! Sections and keys are checked against a fixed schema; unknown ones are
//! rejected with the offending line number. Only `[event]` may repeat, and
//! only `segment_s_a` may appear more than once inside a section. Units are
//! carried by key suffixes. Numbers accept a `p/q` fraction such as `50/3`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::format::parse_number;
use crate::harvester::{CoilSpec, CoreMaterial};
use crate::magnetics::{LabLoopGeometry, RailSiteGeometry};
use crate::optimize::lab_data::LAB_LOOP_B_M;
use crate::optimize::{CoilCatalog, Placement, SweepSpec};
use crate::scenario::{
    equivalent_current, CurrentSegment, NodeBudget, SiteConfig, Timetable, TrainPassEvent,
    SECONDS_PER_DAY,
};
use crate::traces::{TraceKind, DEFAULT_ENVELOPE_WINDOW};

struct SectionSchema {
    name: &'static str,
    repeatable: bool,
    keys: &'static [&'static str],
    multi: &'static [&'static str],
}

const SCHEMA: &[SectionSchema] = &[
    SectionSchema {
        name: "site",
        repeatable: false,
        keys: &[
            "r_n_m",
            "d_rr_m",
            "current_split",
            "frequency_hz",
            "current_a",
            "coil",
        ],
        multi: &[],
    },
    SectionSchema {
        name: "coil",
        repeatable: false,
        keys: &[
            "preset",
            "label",
            "turns",
            "area_m2",
            "resistance_ohm",
            "inductance_h",
            "mu_e",
            "mu_r",
            "resistivity_ohm_m",
            "loss_tangent",
            "rod_diameter_m",
        ],
        multi: &[],
    },
    SectionSchema {
        name: "lab_loop",
        repeatable: false,
        keys: &["r_m", "a_m", "b_m"],
        multi: &[],
    },
    SectionSchema {
        name: "timetable",
        repeatable: false,
        keys: &["period_s"],
        multi: &[],
    },
    SectionSchema {
        name: "event",
        repeatable: true,
        keys: &[
            "label",
            "start_s",
            "attenuation",
            "segment_s_a",
            "target_energy_j",
            "duration_s",
            "repeat",
            "interval_s",
        ],
        multi: &["segment_s_a"],
    },
    SectionSchema {
        name: "budget",
        repeatable: false,
        keys: &[
            "daily_requirement_j",
            "active_power_w",
            "sleep_power_w",
            "duty_cycle",
        ],
        multi: &[],
    },
    SectionSchema {
        name: "trace",
        repeatable: false,
        keys: &[
            "r_load_ohm",
            "coil",
            "site",
            "kind",
            "window_s",
            "threshold_w",
            "hold_s",
        ],
        multi: &[],
    },
    SectionSchema {
        name: "sweep",
        repeatable: false,
        keys: &[
            "coils",
            "frequencies_hz",
            "distances_m",
            "currents_a",
            "geometry",
        ],
        multi: &[],
    },
    SectionSchema {
        name: "fit",
        repeatable: false,
        keys: &["b_m", "a_min_m", "a_max_m"],
        multi: &[],
    },
];

fn schema(name: &str) -> Option<&'static SectionSchema> {
    SCHEMA.iter().find(|s| s.name == name)
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub key: String,
    pub value: String,
    /// 1-based source line, 0 when set programmatically.
    pub line: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.value == other.value
    }
}

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub entries: Vec<Entry>,
    pub line: usize,
}

impl PartialEq for Section {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.entries == other.entries
    }
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.get(key).map(|e| e.value.as_str())
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(parse_entry_number).transpose()
    }

    pub fn require_number(&self, key: &str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| {
            Error::validation(format!(
                "[{}] (line {}) is missing '{key}'",
                self.name, self.line
            ))
        })
    }

    /// Comma-separated list of numbers.
    pub fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|e| {
                e.value
                    .split(',')
                    .map(|item| {
                        parse_number(item).ok_or_else(|| {
                            Error::parse(
                                e.line,
                                format!("'{}' in '{}' is not a number", item.trim(), e.key),
                            )
                        })
                    })
                    .collect()
            })
            .transpose()
    }
}

fn parse_entry_number(e: &Entry) -> Result<f64> {
    parse_number(&e.value).ok_or_else(|| {
        Error::parse(
            e.line,
            format!("'{}' = '{}' is not a number", e.key, e.value),
        )
    })
}

/// Parsed configuration file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigDocument {
    pub sections: Vec<Section>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = ConfigDocument::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::parse(line, "section header must end with ']'"))?
                    .trim();
                let sch = schema(name)
                    .ok_or_else(|| Error::parse(line, format!("unknown section [{name}]")))?;
                if !sch.repeatable && doc.sections.iter().any(|s| s.name == name) {
                    return Err(Error::parse(
                        line,
                        format!("section [{name}] may appear only once"),
                    ));
                }
                doc.sections.push(Section {
                    name: name.to_string(),
                    entries: Vec::new(),
                    line,
                });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::parse(line, "expected 'key = value'"))?;
            let (key, value) = (key.trim(), value.trim());
            let section = doc.sections.last_mut().ok_or_else(|| {
                Error::parse(line, format!("'{key}' appears before any section header"))
            })?;
            let sch = schema(&section.name).expect("validated section");
            if !sch.keys.contains(&key) {
                return Err(Error::parse(
                    line,
                    format!("unknown key '{key}' in [{}]", section.name),
                ));
            }
            if value.is_empty() {
                return Err(Error::parse(line, format!("'{key}' has no value")));
            }
            if !sch.multi.contains(&key) && section.get(key).is_some() {
                return Err(Error::parse(
                    line,
                    format!("duplicate key '{key}' in [{}]", section.name),
                ));
            }
            section.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line,
            });
        }
        Ok(doc)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical text form; parses back to an equal document.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{}]", s.name);
            for e in &s.entries {
                let _ = writeln!(out, "{} = {}", e.key, e.value);
            }
        }
        out
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn sections_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Section> + 'a {
        self.sections.iter().filter(move |s| s.name == name)
    }

    fn require_section(&self, name: &str) -> Result<&Section> {
        self.section(name)
            .ok_or_else(|| Error::validation(format!("configuration has no [{name}] section")))
    }

    /// Sets a single-valued key, creating the section if needed.
    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) -> Result<()> {
        let sch = schema(section)
            .ok_or_else(|| Error::validation(format!("unknown section [{section}]")))?;
        if !sch.keys.contains(&key) {
            return Err(Error::validation(format!(
                "unknown key '{key}' in [{section}]"
            )));
        }
        let value = value.into();
        if !self.sections.iter().any(|s| s.name == section) {
            self.sections.push(Section {
                name: section.to_string(),
                entries: Vec::new(),
                line: 0,
            });
        }
        let s = self
            .sections
            .iter_mut()
            .find(|s| s.name == section)
            .expect("just ensured");
        match s.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value,
            None => s.entries.push(Entry {
                key: key.to_string(),
                value,
                line: 0,
            }),
        }
        Ok(())
    }

    /// Site geometry, frequency and the configured current, if any.
    pub fn site(&self) -> Result<SiteSettings> {
        let s = self.require_section("site")?;
        let r_n = s.require_number("r_n_m")?;
        let d_rr = s.require_number("d_rr_m")?;
        let split = s.number("current_split")?.unwrap_or(0.5);
        Ok(SiteSettings {
            geometry: RailSiteGeometry::with_current_split(r_n, d_rr, split)?,
            frequency: s.number("frequency_hz")?,
            current_a: s.number("current_a")?,
        })
    }

    /// The coil selected by `[coil]` (preset plus overrides) or by `coil` in
    /// `[site]`, with its label.
    pub fn coil(&self) -> Result<Option<(String, CoilSpec)>> {
        if let Some(sec) = self.section("coil") {
            let preset = sec.text("preset");
            let mut coil = match preset {
                Some(name) => CoilSpec::preset(name)
                    .ok_or_else(|| unknown_preset(sec.get("preset").unwrap()))?,
                None => CoilSpec {
                    turns: 0,
                    area: 0.0,
                    resistance: 0.0,
                    inductance: 0.0,
                    material: CoreMaterial::FERRITE_4B1,
                    mu_e: 0.0,
                    rod_diameter: 0.0,
                },
            };
            let need = |key: &str| -> Result<Option<f64>> {
                match (sec.number(key)?, preset) {
                    (Some(v), _) => Ok(Some(v)),
                    (None, Some(_)) => Ok(None),
                    (None, None) if key == "inductance_h" || key == "rod_diameter_m" => Ok(None),
                    (None, None)
                        if key.starts_with("mu_r")
                            || key.starts_with("resistivity")
                            || key.starts_with("loss") =>
                    {
                        Ok(None)
                    }
                    (None, None) => Err(Error::validation(format!(
                        "[coil] without a preset needs '{key}'"
                    ))),
                }
            };
            if let Some(t) = need("turns")? {
                if t < 1.0 || t.fract() != 0.0 || t > u32::MAX as f64 {
                    return Err(Error::domain(format!(
                        "turns must be a positive integer, got {t}"
                    )));
                }
                coil.turns = t as u32;
            }
            if let Some(v) = need("area_m2")? {
                coil.area = v;
            }
            if let Some(v) = need("resistance_ohm")? {
                coil.resistance = v;
            }
            if let Some(v) = need("inductance_h")? {
                coil.inductance = v;
            }
            if let Some(v) = need("mu_e")? {
                coil.mu_e = v;
            }
            if let Some(v) = need("mu_r")? {
                coil.material.mu_r = v;
            }
            if let Some(v) = need("resistivity_ohm_m")? {
                coil.material.resistivity = v;
            }
            if let Some(v) = need("loss_tangent")? {
                coil.material.loss_tangent = v;
            }
            if let Some(v) = need("rod_diameter_m")? {
                coil.rod_diameter = v;
            }
            coil.validate()?;
            let label = sec.text("label").or(preset).unwrap_or("custom").to_string();
            return Ok(Some((label, coil)));
        }
        if let Some(e) = self.section("site").and_then(|s| s.get("coil")) {
            let coil = CoilSpec::preset(&e.value).ok_or_else(|| unknown_preset(e))?;
            return Ok(Some((e.value.clone(), coil)));
        }
        Ok(None)
    }

    pub fn require_coil(&self) -> Result<(String, CoilSpec)> {
        self.coil()?.ok_or_else(|| {
            Error::validation("no coil configured: add [coil] or 'coil = coil-a' under [site]")
        })
    }

    /// Presets plus the configured coil under its label.
    pub fn catalog(&self) -> Result<CoilCatalog> {
        let mut cat = CoilCatalog::presets();
        if let Some((label, coil)) = self.coil()? {
            cat.insert(label, coil);
        }
        Ok(cat)
    }

    pub fn lab_loop(&self) -> Result<Option<LabLoopGeometry>> {
        let Some(s) = self.section("lab_loop") else {
            return Ok(None);
        };
        let r = s.require_number("r_m")?;
        let a = s.require_number("a_m")?;
        let b = s.number("b_m")?.unwrap_or(LAB_LOOP_B_M);
        Ok(Some(LabLoopGeometry::new(r, a, b)?))
    }

    /// Site, frequency and coil for energy simulations.
    pub fn site_config(&self) -> Result<SiteConfig> {
        let site = self.site()?;
        let frequency = site
            .frequency
            .ok_or_else(|| Error::validation("[site] is missing 'frequency_hz'"))?;
        Ok(SiteConfig {
            geometry: site.geometry,
            frequency,
            coil: self.require_coil()?.1,
        })
    }

    /// All `[event]` blocks, with repeats expanded and energy targets
    /// converted to constant-current segments at `site`.
    pub fn timetable(&self, site: &SiteConfig) -> Result<Timetable> {
        let period = match self.section("timetable") {
            Some(s) => s.number("period_s")?.unwrap_or(SECONDS_PER_DAY),
            None => SECONDS_PER_DAY,
        };
        let mut events = Vec::new();
        for (n, sec) in self.sections_named("event").enumerate() {
            let label = sec
                .text("label")
                .map(str::to_string)
                .unwrap_or_else(|| format!("event-{}", n + 1));
            let start = sec.require_number("start_s")?;
            let attenuation = sec.number("attenuation")?.unwrap_or(1.0);
            let mut segments = Vec::new();
            for e in sec.get_all("segment_s_a") {
                let parts: Vec<&str> = e.value.split(',').collect();
                let pair = (parts.len() == 2)
                    .then(|| parse_number(parts[0]).zip(parse_number(parts[1])))
                    .flatten()
                    .ok_or_else(|| {
                        Error::parse(e.line, "segment_s_a must be '<duration_s>, <current_a>'")
                    })?;
                segments.push(CurrentSegment {
                    duration: pair.0,
                    i_rms: pair.1,
                });
            }
            match (sec.number("target_energy_j")?, segments.is_empty()) {
                (Some(_), false) => {
                    return Err(Error::validation(format!(
                        "[event] at line {} sets both segments and target_energy_j",
                        sec.line
                    )))
                }
                (Some(target), true) => {
                    let duration = sec.require_number("duration_s")?;
                    let i = equivalent_current(site, target, duration, attenuation)?;
                    segments.push(CurrentSegment { duration, i_rms: i });
                }
                (None, true) => {
                    return Err(Error::validation(format!(
                        "[event] at line {} needs segment_s_a or target_energy_j",
                        sec.line
                    )))
                }
                (None, false) => {}
            }
            let repeat = sec.number("repeat")?.unwrap_or(1.0);
            if repeat < 1.0 || repeat.fract() != 0.0 {
                return Err(Error::validation(format!(
                    "repeat must be a positive integer, got {repeat}"
                )));
            }
            let repeat = repeat as usize;
            let interval = match repeat {
                1 => sec.number("interval_s")?.unwrap_or(0.0),
                _ => sec.require_number("interval_s")?,
            };
            for k in 0..repeat {
                let name = if repeat == 1 {
                    label.clone()
                } else {
                    format!("{label}#{}", k + 1)
                };
                let ev = TrainPassEvent::new(name, start + interval * k as f64, segments.clone())?
                    .with_attenuation(attenuation)?;
                events.push(ev);
            }
        }
        Timetable::new(events, period)
    }

    pub fn budget(&self) -> Result<NodeBudget> {
        let s = self.require_section("budget")?;
        if let Some(j) = s.number("daily_requirement_j")? {
            return NodeBudget::daily_joules(j);
        }
        NodeBudget::from_duty_cycle(
            s.require_number("active_power_w")?,
            s.number("sleep_power_w")?.unwrap_or(0.0),
            s.require_number("duty_cycle")?,
        )
    }

    pub fn trace_meta(&self) -> Result<TraceMeta> {
        let s = self.require_section("trace")?;
        let kind = match s.get("kind") {
            Some(e) => TraceKind::parse(&e.value).ok_or_else(|| {
                Error::parse(
                    e.line,
                    format!("kind must be waveform or envelope, got '{}'", e.value),
                )
            })?,
            None => TraceKind::default(),
        };
        Ok(TraceMeta {
            r_load: s.require_number("r_load_ohm")?,
            coil: s.text("coil").unwrap_or_default().to_string(),
            site: s.text("site").unwrap_or_default().to_string(),
            kind,
            window: s.number("window_s")?.unwrap_or(DEFAULT_ENVELOPE_WINDOW),
            threshold: s
                .number("threshold_w")?
                .unwrap_or(DEFAULT_DETECTION_THRESHOLD_W),
            hold: s.number("hold_s")?.unwrap_or(0.0),
        })
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let s = self.require_section("sweep")?;
        let catalog = self.catalog()?;
        let coils = match s.get("coils") {
            Some(e) => e
                .value
                .split(',')
                .map(|name| {
                    let name = name.trim();
                    catalog
                        .get(name)
                        .map(|c| (name.to_string(), c.clone()))
                        .ok_or_else(|| Error::parse(e.line, format!("unknown coil '{name}'")))
                })
                .collect::<Result<Vec<_>>>()?,
            None => vec![self.require_coil()?],
        };
        let frequencies = match s.numbers("frequencies_hz")? {
            Some(f) => f,
            None => vec![self
                .site()?
                .frequency
                .ok_or_else(|| Error::validation("[sweep] needs frequencies_hz"))?],
        };
        let distances = s
            .numbers("distances_m")?
            .ok_or_else(|| Error::validation("[sweep] needs distances_m"))?;
        let currents = s.numbers("currents_a")?.unwrap_or_default();
        let placement = match s.text("geometry").unwrap_or("lab_loop") {
            "lab_loop" => {
                let l = self.require_section("lab_loop")?;
                Placement::LabLoop {
                    a: l.require_number("a_m")?,
                    b: l.number("b_m")?.unwrap_or(LAB_LOOP_B_M),
                }
            }
            "two_rail" => {
                let site = self.require_section("site")?;
                Placement::TwoRail {
                    d_rr: site.require_number("d_rr_m")?,
                    current_split: site.number("current_split")?.unwrap_or(0.5),
                }
            }
            other => {
                let line = s.get("geometry").map(|e| e.line).unwrap_or(s.line);
                return Err(Error::parse(
                    line,
                    format!("geometry must be lab_loop or two_rail, got '{other}'"),
                ));
            }
        };
        Ok(SweepSpec {
            coils,
            frequencies,
            distances,
            currents,
            placement,
        })
    }

    /// `(b, (a_min, a_max))` for loop-length fitting.
    pub fn fit_settings(&self) -> Result<(f64, (f64, f64))> {
        let Some(s) = self.section("fit") else {
            return Ok((LAB_LOOP_B_M, (0.1, 10.0)));
        };
        Ok((
            s.number("b_m")?.unwrap_or(LAB_LOOP_B_M),
            (
                s.number("a_min_m")?.unwrap_or(0.1),
                s.number("a_max_m")?.unwrap_or(10.0),
            ),
        ))
    }
}

fn unknown_preset(e: &Entry) -> Error {
    Error::parse(
        e.line,
        format!(
            "unknown coil preset '{}' (expected coil-a or coil-b)",
            e.value
        ),
    )
}

/// Default power threshold for pass detection, W.
pub const DEFAULT_DETECTION_THRESHOLD_W: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct SiteSettings {
    pub geometry: RailSiteGeometry,
    pub frequency: Option<f64>,
    pub current_a: Option<f64>,
}

/// Sidecar metadata and analysis settings for a recorded trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub r_load: f64,
    pub coil: String,
    pub site: String,
    pub kind: TraceKind,
    pub window: f64,
    pub threshold: f64,
    pub hold: f64,
}
