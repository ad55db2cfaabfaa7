//! Raw annotated event traces: a sequence of feature frames plus the
//! ground-truth sub-task events that produced them.

use serde::{Deserialize, Serialize};

use crate::dsl::{Action, Query, QueryScheme};
use crate::seeds;

/// One sub-task occurrence covering frames `start..end` (end exclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub start: usize,
    pub end: usize,
    pub action: Action,
    pub object: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receptacle: Option<String>,
}

impl Event {
    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.start < end && start < self.end
    }

    /// Query that holds wherever this event happens. `relation_of` maps a
    /// receptacle to its preposition.
    pub fn query(&self, scheme: QueryScheme, relation_of: impl Fn(&str) -> String) -> Query {
        let relation = self
            .receptacle
            .as_deref()
            .map(relation_of)
            .unwrap_or_else(|| "in".to_string());
        Query::for_subtask(
            scheme,
            self.action,
            &self.object,
            self.receptacle.as_deref(),
            &relation,
        )
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Feature frames plus ground-truth events. `events` is `None` for traces
/// that carry no annotations at all (as opposed to an annotated trace in which
/// nothing happens).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub frames: Vec<Vec<f64>>,
    #[serde(default)]
    pub events: Option<Vec<Event>>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Content hash over frames and events.
    pub fn fingerprint(&self) -> u64 {
        let mut h = seeds::mix64(self.frames.len() as u64);
        for f in &self.frames {
            for x in f {
                h = seeds::combine(h, x.to_bits());
            }
        }
        for e in self.events.iter().flatten() {
            h = seeds::combine(h, e.start as u64);
            h = seeds::combine(h, e.end as u64);
            h = seeds::combine(h, seeds::hash_str(e.action.name()));
            h = seeds::combine(h, seeds::hash_str(&e.object));
            if let Some(r) = &e.receptacle {
                h = seeds::combine(h, seeds::hash_str(r));
            }
        }
        h
    }

    /// Events in temporal order of their start frame.
    pub fn event_order(&self) -> Vec<&Event> {
        let mut ev: Vec<&Event> = self.events.iter().flatten().collect();
        ev.sort_by_key(|e| (e.start, e.end));
        ev
    }
}
