use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{Engine, Step};
use crate::error::Result;
use crate::mg11::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Arrival,
    Preempt,
    Deliver,
}

impl TraceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceKind::Arrival => "arrival",
            TraceKind::Preempt => "preempt",
            TraceKind::Deliver => "deliver",
        }
    }
}

/// One event of a traced run; `age_after` is the age of `source` right
/// after the event. Sources are 0-based here and 1-based in CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: f64,
    pub event: TraceKind,
    pub source: usize,
    pub age_after: f64,
}

/// Event log plus the exact sawtooth of each source's age.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePaths {
    pub events: Vec<TraceEvent>,
    /// Per source, `(time, age)` vertices; the age has slope one between
    /// consecutive vertices except at deliveries, which appear twice
    /// (before and after the drop).
    pub vertices: Vec<Vec<(f64, f64)>>,
}

impl SamplePaths {
    /// Age of source `i` at time `t`, read off the vertices.
    pub fn age_at(&self, i: usize, t: f64) -> f64 {
        let v = &self.vertices[i];
        let k = v.partition_point(|p| p.0 <= t).max(1) - 1;
        v[k].1 + (t - v[k].0)
    }
}

/// Simulates `[0, duration]` from an empty system in which every source's
/// age starts at zero.
pub fn sample_paths(spec: &SystemSpec<f64>, seed: u64, duration: f64) -> Result<SamplePaths> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(crate::error::domain("trace duration must be positive and finite"));
    }
    let n = spec.n_sources();
    let mut engine = Engine::new(spec, seed);
    let mut last_generated = vec![0.0f64; n];
    let mut vertices: Vec<Vec<(f64, f64)>> = vec![vec![(0.0, 0.0)]; n];
    let mut events = Vec::new();
    loop {
        let (t, step) = engine.step();
        if t > duration {
            break;
        }
        match step {
            Step::Arrival { source, preempted } => {
                if let Some(p) = preempted {
                    events.push(TraceEvent {
                        t,
                        event: TraceKind::Preempt,
                        source: p,
                        age_after: t - last_generated[p],
                    });
                }
                events.push(TraceEvent {
                    t,
                    event: TraceKind::Arrival,
                    source,
                    age_after: t - last_generated[source],
                });
            }
            Step::Delivery { source, generated } => {
                vertices[source].push((t, t - last_generated[source]));
                last_generated[source] = generated;
                vertices[source].push((t, t - generated));
                events.push(TraceEvent {
                    t,
                    event: TraceKind::Deliver,
                    source,
                    age_after: t - generated,
                });
            }
        }
    }
    for (v, g) in vertices.iter_mut().zip(&last_generated) {
        v.push((duration, duration - g));
    }
    Ok(SamplePaths { events, vertices })
}

/// Writes `t,event,source,age_after` rows.
pub fn write_trace_csv<W: Write>(events: &[TraceEvent], mut out: W) -> io::Result<()> {
    writeln!(out, "t,event,source,age_after")?;
    for e in events {
        writeln!(out, "{},{},{},{}", e.t, e.event.as_str(), e.source + 1, e.age_after)?;
    }
    Ok(())
}
