//! Task specifications: sub-tasks arranged in ordering groups.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dsl::{Action, Query, QueryScheme, TaskGraph};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubTask {
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receptacle: Option<String>,
}

impl SubTask {
    pub fn new(action: Action) -> Self {
        SubTask {
            action,
            receptacle: None,
        }
    }

    pub fn place(receptacle: &str) -> Self {
        SubTask {
            action: Action::Place,
            receptacle: Some(receptacle.to_string()),
        }
    }
}

/// Sub-tasks on one target object, listed group by group. Every member of a
/// group must happen before every member of the next group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub object: String,
    pub sub_tasks: Vec<SubTask>,
    /// Group sizes; they sum to `sub_tasks.len()`.
    pub shape: Vec<usize>,
}

/// Number of sub-tasks and number of ordering constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Difficulty {
    pub complexity: usize,
    pub ordering: usize,
}

/// A task with the object and receptacles abstracted away: the actions of
/// each group, sorted within the group.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Signature(pub Vec<Vec<Action>>);

impl Signature {
    pub fn complexity(&self) -> usize {
        self.0.iter().map(Vec::len).sum()
    }

    pub fn ordering(&self) -> usize {
        self.0.windows(2).map(|w| w[0].len() * w[1].len()).sum()
    }

    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        self.0.iter().flatten().copied()
    }

    fn group_of(&self, a: Action) -> Option<usize> {
        self.0.iter().position(|g| g.contains(&a))
    }

    /// Picking up must strictly precede placing when both occur.
    pub fn respects_preconditions(&self) -> bool {
        match (self.group_of(Action::Pick), self.group_of(Action::Place)) {
            (Some(pick), Some(place)) => pick < place,
            _ => true,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let groups: Vec<String> = self
            .0
            .iter()
            .map(|g| g.iter().map(|a| a.name()).collect::<Vec<_>>().join("_and_"))
            .collect();
        write!(f, "{}", groups.join("_then_"))
    }
}

/// Every signature over distinct actions with at most `max_complexity`
/// sub-tasks and `max_ordering` edges that respects the pick/place
/// precondition, sorted.
pub fn all_signatures(max_complexity: usize, max_ordering: usize) -> Vec<Signature> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << Action::ALL.len()) {
        let actions: Vec<Action> = Action::ALL
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &a)| a)
            .collect();
        if actions.len() > max_complexity {
            continue;
        }
        ordered_partitions(&actions, &mut Vec::new(), &mut |groups| {
            let sig = Signature(groups.to_vec());
            if sig.ordering() <= max_ordering && sig.respects_preconditions() {
                out.push(sig);
            }
        });
    }
    out.sort();
    out
}

fn ordered_partitions(rest: &[Action], prefix: &mut Vec<Vec<Action>>, visit: &mut impl FnMut(&[Vec<Action>])) {
    if rest.is_empty() {
        visit(prefix);
        return;
    }
    let n = rest.len();
    for mask in 1u32..(1 << n) {
        let picked = |i: usize| mask & (1 << i) != 0;
        prefix.push((0..n).filter(|&i| picked(i)).map(|i| rest[i]).collect());
        let remaining: Vec<Action> = (0..n).filter(|&i| !picked(i)).map(|i| rest[i]).collect();
        ordered_partitions(&remaining, prefix, visit);
        prefix.pop();
    }
}

impl TaskSpec {
    pub fn len(&self) -> usize {
        self.sub_tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sub_tasks.is_empty()
    }

    /// Index ranges of the groups within `sub_tasks`.
    pub fn groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.shape
            .iter()
            .map(|&n| {
                start += n;
                start - n..start
            })
            .collect()
    }

    pub fn group_of(&self, index: usize) -> usize {
        self.groups()
            .iter()
            .position(|r| r.contains(&index))
            .expect("index within the task")
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.groups()
            .windows(2)
            .flat_map(|w| {
                let (a, b) = (w[0].clone(), w[1].clone());
                a.flat_map(move |u| b.clone().map(move |v| (u, v)))
            })
            .collect()
    }

    pub fn difficulty(&self) -> Difficulty {
        Difficulty {
            complexity: self.len(),
            ordering: self.edges().len(),
        }
    }

    pub fn signature(&self) -> Signature {
        Signature(
            self.groups()
                .into_iter()
                .map(|r| {
                    let mut g: Vec<Action> = self.sub_tasks[r].iter().map(|s| s.action).collect();
                    g.sort();
                    g
                })
                .collect(),
        )
    }

    /// `(action, object)` pairs the task exercises.
    pub fn pairs(&self) -> impl Iterator<Item = (Action, String)> + '_ {
        self.sub_tasks.iter().map(|s| (s.action, self.object.clone()))
    }

    /// Name in `<sub-task>_<ordering>(object)` form, e.g.
    /// `heat_then_clean_and_slice(apple)`.
    pub fn name(&self) -> String {
        let groups: Vec<String> = self
            .groups()
            .into_iter()
            .map(|r| {
                self.sub_tasks[r]
                    .iter()
                    .map(|s| match &s.receptacle {
                        Some(rc) => format!("{}_{}", s.action.name(), rc),
                        None => s.action.name().to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join("_and_")
            })
            .collect();
        format!("{}({})", groups.join("_then_"), self.object)
    }

    pub fn validate(&self, lexicon: &Lexicon) -> Result<()> {
        if self.shape.iter().sum::<usize>() != self.len() || self.shape.contains(&0) {
            return Err(Error::Config(format!("shape {:?} does not cover the sub-tasks", self.shape)));
        }
        let mut seen = Vec::new();
        for s in &self.sub_tasks {
            if !lexicon.affords(&self.object, s.action) {
                return Err(Error::IncompatibleActionObject {
                    action: s.action.name().into(),
                    object: self.object.clone(),
                });
            }
            if seen.contains(&s.action) {
                return Err(Error::Config(format!("`{}` appears twice", s.action)));
            }
            seen.push(s.action);
            match (&s.receptacle, s.action) {
                (Some(r), Action::Place) if lexicon.receptacles.contains_key(r) => {}
                (Some(r), Action::Place) => return Err(Error::UnknownObject(r.clone())),
                (None, Action::Place) => {
                    return Err(Error::Config("placing needs a receptacle".into()))
                }
                (Some(_), a) => {
                    return Err(Error::Config(format!("`{a}` takes no receptacle")))
                }
                (None, _) => {}
            }
        }
        if !self.signature().respects_preconditions() {
            return Err(Error::Config("pick must precede place".into()));
        }
        Ok(())
    }

    /// Query of one sub-task.
    pub fn query(&self, index: usize, scheme: QueryScheme, lexicon: &Lexicon) -> Query {
        let s = &self.sub_tasks[index];
        let recep = s.receptacle.as_deref();
        let relation = recep.map(|r| lexicon.relation_of(r)).unwrap_or_else(|| "in".into());
        Query::for_subtask(scheme, s.action, &self.object, recep, &relation)
    }

    /// The task graph in state/relation form.
    pub fn graph(&self, lexicon: &Lexicon) -> TaskGraph {
        let nodes = (0..self.len())
            .map(|i| self.query(i, QueryScheme::StateRelation, lexicon))
            .collect();
        TaskGraph::new(nodes, self.edges()).expect("group edges are acyclic")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> TaskSpec {
        TaskSpec {
            object: "apple".into(),
            sub_tasks: vec![
                SubTask::new(Action::Heat),
                SubTask::new(Action::Clean),
                SubTask::new(Action::Slice),
                SubTask::place("plate"),
            ],
            shape: vec![1, 2, 1],
        }
    }

    #[test]
    fn structure() {
        let s = spec();
        s.validate(&Lexicon::default()).unwrap();
        assert_eq!(s.edges(), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(s.difficulty(), Difficulty { complexity: 4, ordering: 4 });
        assert_eq!(s.name(), "heat_then_clean_and_slice_then_place_plate(apple)");
        assert_eq!(s.signature().to_string(), "heat_then_clean_and_slice_then_place");
        let g = s.graph(&Lexicon::default());
        assert_eq!(g.nodes()[3], Query::relation("apple", "plate", "in"));
    }

    #[test]
    fn books_cannot_be_heated() {
        let s = TaskSpec {
            object: "book".into(),
            sub_tasks: vec![SubTask::new(Action::Heat)],
            shape: vec![1],
        };
        assert!(matches!(
            s.validate(&Lexicon::default()),
            Err(Error::IncompatibleActionObject { .. })
        ));
    }

    #[test]
    fn signature_enumeration() {
        let all = all_signatures(6, 5);
        assert!(all.iter().all(|s| s.ordering() <= 5 && s.respects_preconditions()));
        assert_eq!(all.iter().filter(|s| s.complexity() == 1).count(), 6);
        // two actions: one unordered pair plus both orders, minus place-before-pick
        assert_eq!(all.iter().filter(|s| s.complexity() == 2).count(), 15 * 3 - 2);
        let mut dedup = all.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), all.len());
    }
}
