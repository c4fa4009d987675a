//! Recorded load-voltage traces: ingestion, power, envelope, energy and
//! train-pass detection.

use std::collections::VecDeque;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::format::fmt_sig;

/// Header of the trace CSV format.
pub const TRACE_HEADER: [&str; 2] = ["t_s", "v_load_V"];

/// Default envelope window, seconds.
pub const DEFAULT_ENVELOPE_WINDOW: f64 = 1.0;

/// What the voltage column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceKind {
    /// Instantaneous waveform samples.
    #[default]
    Waveform,
    /// Pre-computed amplitude envelope.
    Envelope,
}

impl TraceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceKind::Waveform => "waveform",
            TraceKind::Envelope => "envelope",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "waveform" => Some(TraceKind::Waveform),
            "envelope" => Some(TraceKind::Envelope),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub v: f64,
}

/// Load voltage recorded across a resistor `r_load`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    samples: Vec<Sample>,
    r_load: f64,
    pub coil_label: String,
    pub site_label: String,
    pub kind: TraceKind,
}

impl Trace {
    pub fn new(samples: Vec<Sample>, r_load: f64) -> Result<Self> {
        if !(r_load > 0.0) || !r_load.is_finite() {
            return Err(Error::validation(format!(
                "load resistance must be > 0 ohm, got {r_load}"
            )));
        }
        check_increasing(samples.iter().map(|s| s.t))?;
        Ok(Self {
            samples,
            r_load,
            coil_label: String::new(),
            site_label: String::new(),
            kind: TraceKind::default(),
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn r_load(&self) -> f64 {
        self.r_load
    }

    /// Reads samples in the `t_s,v_load_V` CSV format. Lines starting with
    /// `#` are comments.
    pub fn read_csv<R: Read>(reader: R, r_load: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.iter().ne(TRACE_HEADER.iter().copied()) {
            return Err(Error::parse(
                1,
                format!(
                    "expected header 't_s,v_load_V', got '{}'",
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            if rec.len() != 2 {
                return Err(Error::parse(line, "expected two columns"));
            }
            let t = parse_field(&rec[0], line)?;
            let v = parse_field(&rec[1], line)?;
            samples.push(Sample { t, v });
        }
        Self::new(samples, r_load)
    }

    /// Writes the samples with nine significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TRACE_HEADER)?;
        for s in &self.samples {
            w.write_record([fmt_sig(s.t), fmt_sig(s.v)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn parse_field(text: &str, line: usize) -> Result<f64> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("'{text}' is not a number")))
}

fn check_increasing(times: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev: Option<f64> = None;
    for t in times {
        if !t.is_finite() {
            return Err(Error::validation("sample times must be finite"));
        }
        if let Some(p) = prev {
            if t <= p {
                return Err(Error::validation(format!(
                    "sample times must increase strictly ({p} then {t})"
                )));
            }
        }
        prev = Some(t);
    }
    Ok(())
}

/// Time series of instantaneous power, W.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    pub t: Vec<f64>,
    pub p: Vec<f64>,
}

impl PowerSeries {
    pub fn new(t: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if t.len() != p.len() {
            return Err(Error::validation("time and power columns differ in length"));
        }
        check_increasing(t.iter().copied())?;
        Ok(Self { t, p })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Trapezoidal energy over the whole series.
    pub fn total_energy(&self) -> f64 {
        self.t
            .windows(2)
            .zip(self.p.windows(2))
            .map(|(t, p)| 0.5 * (p[0] + p[1]) * (t[1] - t[0]))
            .sum()
    }

    fn interpolate(&self, at: f64, i: usize) -> f64 {
        // at lies in [t[i], t[i + 1]]
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let w = (at - t0) / (t1 - t0);
        self.p[i] + w * (self.p[i + 1] - self.p[i])
    }
}

/// `p = v² / R_load` at every sample. For an amplitude trace this is the
/// peak instantaneous power.
pub fn power_trace(trace: &Trace) -> PowerSeries {
    let (t, p) = trace
        .samples
        .iter()
        .map(|s| (s.t, s.v * s.v / trace.r_load))
        .unzip();
    PowerSeries { t, p }
}

/// Sliding maximum of `|v|` over a window centred on each sample.
///
/// Windows are truncated at the ends of the trace, so the output has one
/// value per input sample. The window must span at least two mean sample
/// spacings.
pub fn envelope(trace: &Trace, window: f64) -> Result<Vec<Sample>> {
    let s = &trace.samples;
    if !(window > 0.0) || !window.is_finite() {
        return Err(Error::validation(format!(
            "envelope window must be > 0 s, got {window}"
        )));
    }
    if s.len() >= 2 {
        let spacing = (s[s.len() - 1].t - s[0].t) / (s.len() - 1) as f64;
        if window < 2.0 * spacing {
            return Err(Error::validation(format!(
                "envelope window {window} s is shorter than two sample spacings ({spacing} s each)"
            )));
        }
    }
    let half = 0.5 * window;
    let mut out = Vec::with_capacity(s.len());
    // indices of candidate maxima, |v| decreasing from front to back
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for sample in s {
        while next < s.len() && s[next].t <= sample.t + half {
            let a = s[next].v.abs();
            while dq.back().is_some_and(|&j| s[j].v.abs() <= a) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&j| s[j].t < sample.t - half) {
            dq.pop_front();
        }
        let peak = dq.front().map(|&j| s[j].v.abs()).unwrap_or(0.0);
        out.push(Sample {
            t: sample.t,
            v: peak,
        });
    }
    Ok(out)
}

/// Trapezoidal energy between `t0` and `t1`, interpolating linearly at
/// bounds that fall between samples.
pub fn integrate_energy(power: &PowerSeries, t0: f64, t1: f64) -> Result<f64> {
    if power.len() < 2 {
        return Err(Error::validation("need at least two samples to integrate"));
    }
    let (first, last) = (power.t[0], power.t[power.len() - 1]);
    if !(t0 < t1) {
        return Err(Error::validation(format!(
            "integration bounds must satisfy t0 < t1, got [{t0}, {t1}]"
        )));
    }
    if t0 < first || t1 > last {
        return Err(Error::validation(format!(
            "integration bounds [{t0}, {t1}] fall outside the trace span [{first}, {last}]"
        )));
    }
    // last sample index with t <= bound, capped so that i + 1 is valid
    let seg = |at: f64| {
        power
            .t
            .partition_point(|&t| t <= at)
            .saturating_sub(1)
            .min(power.len() - 2)
    };
    let i0 = seg(t0);
    let i1 = seg(t1);
    let p0 = power.interpolate(t0, i0);
    let p1 = power.interpolate(t1, i1);
    if i0 == i1 {
        return Ok(0.5 * (p0 + p1) * (t1 - t0));
    }
    let mut energy = 0.5 * (p0 + power.p[i0 + 1]) * (power.t[i0 + 1] - t0);
    for k in i0 + 1..i1 {
        energy += 0.5 * (power.p[k] + power.p[k + 1]) * (power.t[k + 1] - power.t[k]);
    }
    energy += 0.5 * (power.p[i1] + p1) * (t1 - power.t[i1]);
    Ok(energy)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassInterval {
    pub t_start: f64,
    pub t_end: f64,
    /// W.
    pub peak_power: f64,
    /// J.
    pub energy: f64,
}

impl PassInterval {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PassDetection {
    pub intervals: Vec<PassInterval>,
}

/// Finds the runs of samples with `p >= threshold`, merging runs separated
/// by less than `hold` seconds. Each interval spans from its first to its
/// last qualifying sample.
pub fn detect_passes(power: &PowerSeries, threshold: f64, hold: f64) -> Result<PassDetection> {
    if !(threshold > 0.0) {
        return Err(Error::validation(format!(
            "detection threshold must be > 0 W, got {threshold}"
        )));
    }
    if !(hold >= 0.0) {
        return Err(Error::validation(format!(
            "hold time must be >= 0 s, got {hold}"
        )));
    }
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for (i, &p) in power.p.iter().enumerate() {
        if p >= threshold {
            current = Some(match current {
                Some((s, _)) => (s, i),
                None => (i, i),
            });
        } else if let Some(run) = current.take() {
            runs.push(run);
        }
    }
    runs.extend(current);

    let mut merged: Vec<(usize, usize)> = Vec::new();
    for run in runs {
        match merged.last_mut() {
            Some(last) if power.t[run.0] - power.t[last.1] < hold => last.1 = run.1,
            _ => merged.push(run),
        }
    }

    let intervals = merged
        .into_iter()
        .map(|(s, e)| {
            let peak_power = power.p[s..=e]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let energy = power.t[s..=e]
                .windows(2)
                .zip(power.p[s..=e].windows(2))
                .map(|(t, p)| 0.5 * (p[0] + p[1]) * (t[1] - t[0]))
                .sum();
            PassInterval {
                t_start: power.t[s],
                t_end: power.t[e],
                peak_power,
                energy,
            }
        })
        .collect();
    Ok(PassDetection { intervals })
}
