//! Timetable-driven energy budgets for a trackside harvester.

use crate::error::{Error, Result};
use crate::harvester::{matched_load_power, CoilSpec};
use crate::magnetics::{field_two_rail, RailSiteGeometry, SourceCurrent};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// One piece of a piecewise-constant current profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentSegment {
    /// Seconds.
    pub duration: f64,
    /// Total rail return current, A RMS.
    pub i_rms: f64,
}

/// A locomotive drawing current past the site.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainPassEvent {
    pub label: String,
    /// Seconds from the start of the period.
    pub start: f64,
    pub segments: Vec<CurrentSegment>,
    /// Share of the traction return current still in the rails at the site;
    /// the rest leaks to ground.
    pub attenuation: f64,
}

impl TrainPassEvent {
    pub fn new(
        label: impl Into<String>,
        start: f64,
        segments: Vec<CurrentSegment>,
    ) -> Result<Self> {
        let ev = Self {
            label: label.into(),
            start,
            segments,
            attenuation: 1.0,
        };
        ev.validate()?;
        Ok(ev)
    }

    pub fn with_attenuation(mut self, attenuation: f64) -> Result<Self> {
        self.attenuation = attenuation;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() {
            return Err(Error::validation(format!(
                "event '{}': start must be finite",
                self.label
            )));
        }
        for seg in &self.segments {
            if !(seg.duration > 0.0) || !seg.duration.is_finite() {
                return Err(Error::validation(format!(
                    "event '{}': segment durations must be > 0 s, got {}",
                    self.label, seg.duration
                )));
            }
            if !(seg.i_rms >= 0.0) || !seg.i_rms.is_finite() {
                return Err(Error::validation(format!(
                    "event '{}': segment currents must be >= 0 A, got {}",
                    self.label, seg.i_rms
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.attenuation) {
            return Err(Error::validation(format!(
                "event '{}': attenuation must lie in [0, 1], got {}",
                self.label, self.attenuation
            )));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration()
    }
}

/// Events repeating every `period` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Timetable {
    events: Vec<TrainPassEvent>,
    period: f64,
}

impl Timetable {
    /// Sorts the events by start time and rejects overlaps or events
    /// reaching outside `[0, period]`.
    pub fn new(mut events: Vec<TrainPassEvent>, period: f64) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::validation(format!(
                "period must be > 0 s, got {period}"
            )));
        }
        for ev in &events {
            ev.validate()?;
        }
        events.sort_by(|a, b| a.start.total_cmp(&b.start));
        for ev in &events {
            if ev.start < 0.0 || ev.end() > period {
                return Err(Error::validation(format!(
                    "event '{}' ([{}, {}] s) does not fit in the {} s period",
                    ev.label,
                    ev.start,
                    ev.end(),
                    period
                )));
            }
        }
        for pair in events.windows(2) {
            if pair[1].start < pair[0].end() {
                return Err(Error::validation(format!(
                    "events '{}' and '{}' overlap",
                    pair[0].label, pair[1].label
                )));
            }
        }
        Ok(Self { events, period })
    }

    pub fn daily(events: Vec<TrainPassEvent>) -> Result<Self> {
        Self::new(events, SECONDS_PER_DAY)
    }

    pub fn events(&self) -> &[TrainPassEvent] {
        &self.events
    }

    pub fn period(&self) -> f64 {
        self.period
    }
}

/// A harvester installed next to a two-rail track.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteConfig {
    pub geometry: RailSiteGeometry,
    pub frequency: f64,
    pub coil: CoilSpec,
}

impl SiteConfig {
    /// Matched-load power per squared ampere of rail current, W/A².
    pub fn power_per_amp_squared(&self) -> Result<f64> {
        let unit = SourceCurrent::new(1.0, self.frequency)?;
        let h = field_two_rail(&unit, &self.geometry);
        Ok(matched_load_power(&self.coil, &h, self.frequency))
    }

    pub fn power_at(&self, i_rms: f64) -> Result<f64> {
        let src = SourceCurrent::new(i_rms, self.frequency)?;
        Ok(matched_load_power(
            &self.coil,
            &field_two_rail(&src, &self.geometry),
            self.frequency,
        ))
    }
}

/// Energy the monitored node consumes per day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeBudget {
    /// J/day.
    pub daily_requirement: f64,
}

impl NodeBudget {
    pub fn daily_joules(daily_requirement: f64) -> Result<Self> {
        if !(daily_requirement >= 0.0) || !daily_requirement.is_finite() {
            return Err(Error::validation(format!(
                "daily requirement must be >= 0 J, got {daily_requirement}"
            )));
        }
        Ok(Self { daily_requirement })
    }

    /// Node alternating between an active and a sleep state; `duty_cycle` is
    /// the active fraction of time.
    pub fn from_duty_cycle(active_w: f64, sleep_w: f64, duty_cycle: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&duty_cycle) {
            return Err(Error::validation(format!(
                "duty cycle must lie in [0, 1], got {duty_cycle}"
            )));
        }
        if !(active_w >= 0.0) || !(sleep_w >= 0.0) {
            return Err(Error::validation("node powers must be >= 0 W"));
        }
        Self::daily_joules((active_w * duty_cycle + sleep_w * (1.0 - duty_cycle)) * SECONDS_PER_DAY)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventEnergy {
    pub label: String,
    pub start: f64,
    /// Joules.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub per_event: Vec<EventEnergy>,
    /// Harvest per day, J. The timetable total rescaled from its period to one day.
    pub daily_total: f64,
    /// Harvested over required.
    pub margin: f64,
}

/// Energy harvested during one pass, J.
pub fn simulate_pass(site: &SiteConfig, event: &TrainPassEvent) -> Result<f64> {
    event.validate()?;
    let k = site.power_per_amp_squared()?;
    Ok(event
        .segments
        .iter()
        .map(|seg| {
            let i = seg.i_rms * event.attenuation;
            k * i * i * seg.duration
        })
        .sum())
}

/// Harvest over one timetable period, extrapolated to a day, and its margin
/// against the node budget.
pub fn simulate_period(
    site: &SiteConfig,
    timetable: &Timetable,
    budget: &NodeBudget,
) -> Result<EnergyReport> {
    let per_event = timetable
        .events
        .iter()
        .map(|ev| {
            Ok(EventEnergy {
                label: ev.label.clone(),
                start: ev.start,
                energy: simulate_pass(site, ev)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let period_total: f64 = per_event.iter().map(|e| e.energy).sum();
    let daily_total = period_total * (SECONDS_PER_DAY / timetable.period);
    let margin = feasibility_margin(daily_total, budget)?;
    Ok(EnergyReport {
        per_event,
        daily_total,
        margin,
    })
}

pub fn feasibility_margin(harvest_per_day: f64, budget: &NodeBudget) -> Result<f64> {
    if !(budget.daily_requirement > 0.0) {
        return Err(Error::domain(
            "node budget must be > 0 J/day to form a margin",
        ));
    }
    Ok(harvest_per_day / budget.daily_requirement)
}

/// Constant rail current that delivers `energy` joules over `duration`
/// seconds at the site, before attenuation is applied.
pub fn equivalent_current(
    site: &SiteConfig,
    energy: f64,
    duration: f64,
    attenuation: f64,
) -> Result<f64> {
    if !(energy >= 0.0) || !(duration > 0.0) {
        return Err(Error::domain(format!(
            "need energy >= 0 J and duration > 0 s, got {energy} J over {duration} s"
        )));
    }
    if energy == 0.0 {
        return Ok(0.0);
    }
    if !(attenuation > 0.0 && attenuation <= 1.0) {
        return Err(Error::domain(format!(
            "attenuation {attenuation} cannot deliver a non-zero energy"
        )));
    }
    let k = site.power_per_amp_squared()?;
    Ok((energy / (k * duration)).sqrt() / attenuation)
}
