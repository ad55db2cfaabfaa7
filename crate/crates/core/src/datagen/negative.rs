//! Falsifying edits of positive samples.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::task::{SubTask, TaskSpec};
use crate::dsl::Action;
use crate::error::{Error, Result};
use crate::graph::{self, Precedence};
use crate::lexicon::Lexicon;
use crate::trace::{Event, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeKind {
    /// Ordering groups of the description permuted.
    Reordered,
    /// One sub-task of the description replaced by another action.
    Substituted,
    /// Trace blocks rearranged into an order the description forbids.
    TraceShuffled,
    /// One sub-task block cut out of the trace.
    TraceDropped,
}

impl NegativeKind {
    pub const ALL: [NegativeKind; 4] = [
        NegativeKind::Reordered,
        NegativeKind::Substituted,
        NegativeKind::TraceShuffled,
        NegativeKind::TraceDropped,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NegativeKind::Reordered => "reordered",
            NegativeKind::Substituted => "substituted",
            NegativeKind::TraceShuffled => "trace_shuffled",
            NegativeKind::TraceDropped => "trace_dropped",
        }
    }
}

impl std::str::FromStr for NegativeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NegativeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown negative kind `{s}`")))
    }
}

fn cannot(kind: NegativeKind, why: &str) -> Error {
    Error::CannotFalsify(format!("{}: {why}", kind.name()))
}

/// Sub-task index of every event, in trace order.
pub fn trace_order(spec: &TaskSpec, trace: &Trace) -> Vec<usize> {
    trace
        .event_order()
        .iter()
        .filter_map(|e| spec.sub_tasks.iter().position(|s| s.action == e.action))
        .collect()
}

/// Candidate description edit. The caller still checks that the result is
/// falsified by the trace.
pub fn edit_description(
    kind: NegativeKind,
    spec: &TaskSpec,
    order: &[usize],
    lexicon: &Lexicon,
    rng: &mut ChaCha8Rng,
) -> Result<TaskSpec> {
    match kind {
        NegativeKind::Reordered => reorder(spec, order, lexicon, rng),
        NegativeKind::Substituted => substitute(spec, lexicon, rng),
        _ => Err(Error::Config(format!("{} edits the trace", kind.name()))),
    }
}

fn grouped(spec: &TaskSpec) -> Vec<Vec<SubTask>> {
    spec.groups()
        .into_iter()
        .map(|r| spec.sub_tasks[r].to_vec())
        .collect()
}

fn from_groups(object: &str, groups: Vec<Vec<SubTask>>) -> TaskSpec {
    TaskSpec {
        object: object.to_string(),
        shape: groups.iter().map(Vec::len).collect(),
        sub_tasks: groups.into_iter().flatten().collect(),
    }
}

fn reorder(spec: &TaskSpec, order: &[usize], lexicon: &Lexicon, rng: &mut ChaCha8Rng) -> Result<TaskSpec> {
    let kind = NegativeKind::Reordered;
    let groups = grouped(spec);
    if groups.len() >= 2 {
        let perms = Precedence::new(groups.len(), &BTreeSet::new())?
            .linear_extensions(usize::MAX)
            .sequences;
        let identity: Vec<usize> = (0..groups.len()).collect();
        let valid: Vec<TaskSpec> = perms
            .into_iter()
            .filter(|p| *p != identity)
            .map(|p| from_groups(&spec.object, p.iter().map(|&g| groups[g].clone()).collect()))
            .filter(|s| s.validate(lexicon).is_ok())
            .collect();
        return valid
            .choose(rng)
            .cloned()
            .ok_or_else(|| cannot(kind, "no admissible group permutation"));
    }
    if spec.len() < 2 {
        return Err(cannot(kind, "a single sub-task has no order"));
    }
    // One unordered group: impose the reverse of the observed order.
    let reversed = from_groups(
        &spec.object,
        order.iter().rev().map(|&i| vec![spec.sub_tasks[i].clone()]).collect(),
    );
    reversed
        .validate(lexicon)
        .map(|_| reversed)
        .map_err(|_| cannot(kind, "reverse order violates a precondition"))
}

fn substitute(spec: &TaskSpec, lexicon: &Lexicon, rng: &mut ChaCha8Rng) -> Result<TaskSpec> {
    let used: Vec<Action> = spec.sub_tasks.iter().map(|s| s.action).collect();
    let receptacles: Vec<&String> = lexicon.receptacles.keys().collect();
    let mut candidates: Vec<(usize, Action)> = (0..spec.len())
        .flat_map(|i| {
            lexicon.objects[&spec.object]
                .iter()
                .filter(|a| !used.contains(a))
                .map(move |&a| (i, a))
        })
        .collect();
    candidates.shuffle(rng);
    for (i, action) in candidates {
        let mut edited = spec.clone();
        edited.sub_tasks[i] = match action {
            Action::Place => SubTask::place(receptacles.choose(rng).expect("receptacles exist")),
            a => SubTask::new(a),
        };
        if edited.validate(lexicon).is_ok() {
            return Ok(edited);
        }
    }
    Err(cannot(NegativeKind::Substituted, "no substitute action fits the object"))
}

type Frames = Vec<Vec<f64>>;

/// Cuts the trace into a leading navigation prefix and one unit per event
/// (the block plus the navigation that follows it).
fn units(trace: &Trace) -> (Frames, Vec<(Event, Frames)>) {
    let events: Vec<Event> = trace.event_order().into_iter().cloned().collect();
    let first = events.first().map_or(trace.len(), |e| e.start);
    let lead = trace.frames[..first].to_vec();
    let units = events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let end = events.get(i + 1).map_or(trace.len(), |n| n.start);
            (e.clone(), trace.frames[e.start..end].to_vec())
        })
        .collect();
    (lead, units)
}

fn reassemble(lead: Vec<Vec<f64>>, units: Vec<(Event, Vec<Vec<f64>>)>) -> Trace {
    let mut frames = lead;
    let mut events = Vec::with_capacity(units.len());
    for (e, chunk) in units {
        let start = frames.len();
        events.push(Event {
            start,
            end: start + e.len(),
            ..e
        });
        frames.extend(chunk);
    }
    Trace {
        frames,
        events: Some(events),
    }
}

/// Rearranges whole sub-task units so the observed order is no linear
/// extension of the task.
pub fn shuffle_trace(spec: &TaskSpec, trace: &Trace, lexicon: &Lexicon, rng: &mut ChaCha8Rng) -> Result<Trace> {
    let kind = NegativeKind::TraceShuffled;
    let edges: BTreeSet<(usize, usize)> = spec.graph(lexicon).edges().clone();
    if edges.is_empty() {
        return Err(cannot(kind, "an unordered task accepts every order"));
    }
    let order = trace_order(spec, trace);
    let (lead, units) = units(trace);
    let mut perm: Vec<usize> = (0..units.len()).collect();
    for _ in 0..64 {
        perm.shuffle(rng);
        let shuffled: Vec<usize> = perm.iter().map(|&p| order[p]).collect();
        if !graph::is_linear_extension(spec.len(), &edges, &shuffled) {
            let reordered = perm.iter().map(|&p| units[p].clone()).collect();
            return Ok(reassemble(lead, reordered));
        }
    }
    Err(cannot(kind, "no forbidden order found"))
}

/// Removes the frames of one sub-task block.
pub fn drop_block(trace: &Trace, rng: &mut ChaCha8Rng) -> Result<Trace> {
    let events = trace.event_order();
    if events.is_empty() {
        return Err(cannot(NegativeKind::TraceDropped, "trace has no sub-task blocks"));
    }
    let victim = events[rand::Rng::random_range(rng, 0..events.len())];
    let (cut, len) = (victim.start, victim.len());
    let mut frames = trace.frames[..cut].to_vec();
    frames.extend_from_slice(&trace.frames[victim.end..]);
    let kept = events
        .iter()
        .filter(|e| !std::ptr::eq(**e, victim))
        .map(|e| {
            let shift = if e.start >= cut { len } else { 0 };
            Event {
                start: e.start - shift,
                end: e.end - shift,
                ..(*e).clone()
            }
        })
        .collect();
    Ok(Trace {
        frames,
        events: Some(kept),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::exec::{execute_plan, TraceConfig};
    use crate::seeds;

    fn spec(shape: Vec<usize>, actions: &[Action]) -> TaskSpec {
        TaskSpec {
            object: "apple".into(),
            sub_tasks: actions.iter().map(|&a| SubTask::new(a)).collect(),
            shape,
        }
    }

    #[test]
    fn heat_is_replaced_by_an_unused_action() {
        let lex = Lexicon::default();
        let s = spec(vec![1, 1], &[Action::Heat, Action::Clean]);
        let mut rng = seeds::rng(1, "t");
        let edited = substitute(&s, &lex, &mut rng).unwrap();
        let actions: Vec<Action> = edited.sub_tasks.iter().map(|x| x.action).collect();
        assert_eq!(actions.iter().filter(|a| s.sub_tasks.iter().any(|x| x.action == **a)).count(), 1);
        edited.validate(&lex).unwrap();
    }

    #[test]
    fn reorder_inverts_then() {
        let lex = Lexicon::default();
        let s = spec(vec![1, 1], &[Action::Heat, Action::Clean]);
        let mut rng = seeds::rng(1, "t");
        let r = reorder(&s, &[0, 1], &lex, &mut rng).unwrap();
        assert_eq!(r.sub_tasks[0].action, Action::Clean);
        assert_eq!(r.sub_tasks[1].action, Action::Heat);
        let single = spec(vec![1], &[Action::Heat]);
        assert!(matches!(reorder(&single, &[0], &lex, &mut rng), Err(Error::CannotFalsify(_))));
    }

    #[test]
    fn trace_surgery_keeps_blocks_intact() {
        let lex = Lexicon::default();
        let s = spec(vec![1, 1, 1], &[Action::Heat, Action::Clean, Action::Slice]);
        let (trace, _) = execute_plan(&s, &lex, &TraceConfig::default(), 64, 5).unwrap();
        let mut rng = seeds::rng(2, "t");
        let shuffled = shuffle_trace(&s, &trace, &lex, &mut rng).unwrap();
        assert_eq!(shuffled.len(), trace.len());
        let order = trace_order(&s, &shuffled);
        assert_ne!(order, vec![0, 1, 2]);
        for e in shuffled.events.as_ref().unwrap() {
            let a = e.action.index();
            assert!(shuffled.frames[e.start..e.end].iter().all(|f| f[a] > 0.5));
        }
        let dropped = drop_block(&trace, &mut rng).unwrap();
        let orig = trace.events.as_ref().unwrap();
        let kept = dropped.events.as_ref().unwrap();
        assert_eq!(kept.len(), 2);
        let removed: usize = orig.iter().map(Event::len).sum::<usize>()
            - kept.iter().map(Event::len).sum::<usize>();
        assert_eq!(dropped.len(), trace.len() - removed);
        for e in kept {
            let a = e.action.index();
            assert!(dropped.frames[e.start..e.end].iter().all(|f| f[a] > 0.5));
        }
    }
}
