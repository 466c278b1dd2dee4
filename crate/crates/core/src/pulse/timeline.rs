//! Per-channel event streams and their sample-by-sample rendering.

use std::collections::HashMap;

use indexmap::IndexMap;
use num_complex::Complex64 as C64;

use crate::error::EngineError;
use crate::model::{Channel, ChannelKind, Instruction, PulseLibEntry};

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Pulse { samples: Vec<C64>, conditional: Option<usize> },
    FrameChange { phase: f64, conditional: Option<usize> },
    Persistent { val: C64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub t0: u64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTimeline {
    pub channel: Channel,
    pub events: Vec<Event>,
}

impl ChannelTimeline {
    /// Last sample index (exclusive) touched by this channel.
    pub fn end(&self) -> u64 {
        self.events
            .iter()
            .map(|e| match &e.kind {
                EventKind::Pulse { samples, .. } => e.t0 + samples.len() as u64,
                _ => e.t0,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn cursor(&self) -> Cursor<'_> {
        Cursor {
            tl: self,
            next: 0,
            phase: 0.0,
            active: None,
            pv: None,
        }
    }

    /// Samples over `[0, t_end)` with conditions decided by `reg`.
    pub fn render(&self, t_end: u64, reg: impl Fn(usize) -> bool) -> Vec<C64> {
        let mut c = self.cursor();
        (0..t_end).map(|t| c.sample(t, &reg)).collect()
    }

    /// Frame phase accumulated by unconditional frame changes at or before `t`.
    pub fn accumulated_phase(&self, t: u64) -> f64 {
        self.events
            .iter()
            .take_while(|e| e.t0 <= t)
            .map(|e| match e.kind {
                EventKind::FrameChange { phase, conditional: None } => phase,
                _ => 0.0,
            })
            .sum()
    }
}

/// Walks a timeline forward one sample at a time. Conditions are checked
/// when an event is reached, so register writes earlier in the shot count.
#[derive(Debug, Clone)]
pub struct Cursor<'a> {
    tl: &'a ChannelTimeline,
    next: usize,
    phase: f64,
    active: Option<(u64, &'a [C64])>,
    pv: Option<C64>,
}

impl Cursor<'_> {
    /// Output at sample `t`. Calls must use increasing `t`.
    pub fn sample(&mut self, t: u64, reg: &dyn Fn(usize) -> bool) -> C64 {
        while let Some(e) = self.tl.events.get(self.next) {
            if e.t0 > t {
                break;
            }
            self.next += 1;
            self.pv = None;
            match &e.kind {
                EventKind::Pulse { samples, conditional } => {
                    if conditional.is_none_or(reg) {
                        self.active = Some((e.t0, samples.as_slice()));
                    }
                }
                EventKind::FrameChange { phase, conditional } => {
                    if conditional.is_none_or(reg) {
                        self.phase += phase;
                    }
                }
                EventKind::Persistent { val } => {
                    self.active = None;
                    self.pv = Some(*val);
                }
            }
        }
        let raw = match self.active {
            Some((s, samples)) if t < s + samples.len() as u64 => samples[(t - s) as usize],
            _ => {
                self.active = None;
                self.pv.unwrap_or_default()
            }
        };
        raw * C64::from_polar(1.0, -self.phase)
    }
}

/// Channel bounds used to reject commands on channels the device lacks.
#[derive(Debug, Clone, Copy)]
pub struct ChannelLimits {
    pub n_qubits: usize,
    pub n_uchannels: usize,
}

impl ChannelLimits {
    pub fn parse(&self, index: usize, ch: &str) -> Result<Channel, EngineError> {
        let bad = || EngineError::BadChannel {
            index,
            channel: ch.to_string(),
        };
        let c = Channel::parse(ch).ok_or_else(bad)?;
        let limit = match c.kind {
            ChannelKind::Drive | ChannelKind::Measure => self.n_qubits,
            ChannelKind::Control => self.n_uchannels,
        };
        if c.index >= limit {
            return Err(bad());
        }
        Ok(c)
    }
}

/// Groups drive, frame-change and persistent-value commands by channel.
pub fn build_timelines(
    instrs: &[Instruction],
    lib: &HashMap<&str, &PulseLibEntry>,
    limits: ChannelLimits,
) -> Result<IndexMap<Channel, ChannelTimeline>, EngineError> {
    let mut out: IndexMap<Channel, ChannelTimeline> = IndexMap::new();
    let mut busy_until: HashMap<Channel, u64> = HashMap::new();
    let mut last_t0 = 0;
    for (index, ins) in instrs.iter().enumerate() {
        if let Some(t0) = ins.t0() {
            if t0 < last_t0 {
                return Err(EngineError::NonMonotoneT0 { index });
            }
            last_t0 = t0;
        }
        let (ch, ev) = match ins {
            Instruction::Drive(d) => {
                let p = lib.get(d.name.as_str()).ok_or_else(|| EngineError::UnknownPulseName {
                    index,
                    name: d.name.clone(),
                })?;
                let ch = limits.parse(index, &d.ch)?;
                if busy_until.get(&ch).is_some_and(|&end| d.t0 < end) {
                    return Err(EngineError::OverlappingPulses {
                        index,
                        channel: d.ch.clone(),
                    });
                }
                busy_until.insert(ch, d.t0 + p.samples.len() as u64);
                let ev = Event {
                    t0: d.t0,
                    kind: EventKind::Pulse {
                        samples: p.samples.clone(),
                        conditional: d.conditional,
                    },
                };
                (ch, ev)
            }
            Instruction::FrameChange(f) => {
                let phase = f.phase.as_f64().ok_or_else(|| {
                    EngineError::Invalid(format!("instruction {index}: frame change phase is an unbound parameter"))
                })?;
                let ev = Event {
                    t0: f.t0,
                    kind: EventKind::FrameChange {
                        phase,
                        conditional: f.conditional,
                    },
                };
                (limits.parse(index, &f.ch)?, ev)
            }
            Instruction::PersistentValue(p) => {
                let ch = limits.parse(index, &p.ch)?;
                if busy_until.get(&ch).is_some_and(|&end| p.t0 < end) {
                    return Err(EngineError::OverlappingPulses {
                        index,
                        channel: p.ch.clone(),
                    });
                }
                (ch, Event {
                    t0: p.t0,
                    kind: EventKind::Persistent { val: p.val },
                })
            }
            _ => continue,
        };
        out.entry(ch)
            .or_insert_with(|| ChannelTimeline {
                channel: ch,
                events: Vec::new(),
            })
            .events
            .push(ev);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn lib() -> Vec<PulseLibEntry> {
        vec![
            PulseLibEntry {
                name: "p".into(),
                samples: vec![C64::new(0.5, 0.0); 4],
            },
            PulseLibEntry {
                name: "q".into(),
                samples: vec![C64::new(0.1, 0.2), C64::new(-0.3, 0.0)],
            },
        ]
    }

    fn build(v: serde_json::Value) -> Result<IndexMap<Channel, ChannelTimeline>, EngineError> {
        let instrs: Vec<Instruction> = serde_json::from_value(v).unwrap();
        let l = lib();
        let map = l.iter().map(|p| (p.name.as_str(), p)).collect();
        build_timelines(&instrs, &map, ChannelLimits { n_qubits: 2, n_uchannels: 1 })
    }

    fn d0() -> Channel {
        Channel::parse("d0").unwrap()
    }

    #[test]
    fn zero_between_pulses_and_after_end() {
        let t = build(json!([{"name":"q","t0":0,"ch":"d0"},{"name":"q","t0":5,"ch":"d0"}])).unwrap();
        let s = t[&d0()].render(9, |_| false);
        assert_eq!(s[2], C64::default());
        assert_eq!(s[5], C64::new(0.1, 0.2));
        assert_eq!(s[7], C64::default());
    }

    #[test]
    fn frame_change_multiplies_later_samples() {
        let t = build(json!([
            {"name":"q","t0":0,"ch":"d0"},
            {"name":"fc","t0":2,"ch":"d0","phase":0.1},
            {"name":"q","t0":2,"ch":"d0"}
        ]))
        .unwrap();
        let s = t[&d0()].render(4, |_| false);
        assert_eq!(s[0], C64::new(0.1, 0.2));
        assert_eq!(s[2], C64::new(0.1, 0.2) * C64::from_polar(1.0, -0.1));
        assert!((t[&d0()].accumulated_phase(3) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn zero_phase_is_identity() {
        let a = build(json!([{"name":"fc","t0":0,"ch":"d0","phase":0.0},{"name":"q","t0":0,"ch":"d0"}])).unwrap();
        let b = build(json!([{"name":"q","t0":0,"ch":"d0"}])).unwrap();
        assert_eq!(a[&d0()].render(3, |_| false), b[&d0()].render(3, |_| false));
    }

    #[test]
    fn persistent_value_holds_until_next_event() {
        let t = build(json!([
            {"name":"pv","t0":1,"ch":"d0","val":[0.2,0.1]},
            {"name":"q","t0":4,"ch":"d0"}
        ]))
        .unwrap();
        let s = t[&d0()].render(8, |_| false);
        assert_eq!(s[0], C64::default());
        assert!(s[1..4].iter().all(|x| *x == C64::new(0.2, 0.1)));
        assert_eq!(s[4], C64::new(0.1, 0.2));
        assert_eq!(s[6], C64::default());
    }

    #[test]
    fn conditional_pulse_masked() {
        let t = build(json!([{"name":"p","t0":0,"ch":"d0","conditional":1}])).unwrap();
        assert!(t[&d0()].render(4, |_| false).iter().all(|x| *x == C64::default()));
        assert!(t[&d0()].render(4, |r| r == 1).iter().all(|x| *x == C64::new(0.5, 0.0)));
    }

    #[test]
    fn schedule_errors() {
        assert!(matches!(
            build(json!([{"name":"p","t0":0,"ch":"d0"},{"name":"q","t0":3,"ch":"d0"}])),
            Err(EngineError::OverlappingPulses { index: 1, .. })
        ));
        assert!(matches!(build(json!([{"name":"zz","t0":0,"ch":"d0"}])), Err(EngineError::UnknownPulseName { .. })));
        assert!(matches!(
            build(json!([{"name":"p","t0":5,"ch":"d0"},{"name":"q","t0":0,"ch":"d1"}])),
            Err(EngineError::NonMonotoneT0 { index: 1 })
        ));
        assert!(matches!(build(json!([{"name":"p","t0":0,"ch":"u1"}])), Err(EngineError::BadChannel { .. })));
        assert!(build(json!([{"name":"p","t0":0,"ch":"d0"},{"name":"q","t0":0,"ch":"d1"}])).is_ok());
    }
}
