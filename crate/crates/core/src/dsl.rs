//! Query language and the line-oriented DOT dialect used to exchange task
//! graphs between parsing, alignment and evaluation.
//!
//! A task graph serializes as a sequence of items separated by commas or
//! newlines:
//!
//! ```text
//! Step 0: StateQuery(apple,hot)
//! Step 1: RelationQuery(apple,plate,in)
//! Step 0 -> Step 1
//! ```
//!
//! [`graph_to_dot`] emits one item per line, nodes first then edges, both in
//! ascending id order. [`parse_dot`] also accepts the comma-separated form and
//! the `→` arrow.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph;

/// The six sub-task actions, in the fixed class order used by every report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Heat,
    Clean,
    Slice,
    Cool,
    Place,
    Pick,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::Heat,
        Action::Clean,
        Action::Slice,
        Action::Cool,
        Action::Place,
        Action::Pick,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::Heat => "heat",
            Action::Clean => "clean",
            Action::Slice => "slice",
            Action::Cool => "cool",
            Action::Place => "place",
            Action::Pick => "pick",
        }
    }

    /// Resulting object state for state-changing actions. `place` yields a
    /// relation instead.
    pub fn resulting_state(self) -> Option<&'static str> {
        match self {
            Action::Heat => Some("hot"),
            Action::Clean => Some("clean"),
            Action::Slice => Some("sliced"),
            Action::Cool => Some("cold"),
            Action::Pick => Some("picked"),
            Action::Place => None,
        }
    }

    pub fn from_state(state: &str) -> Option<Action> {
        Action::ALL
            .into_iter()
            .find(|a| a.resulting_state() == Some(state))
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Action::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidVocabulary(s.to_string()))
    }
}

pub const STATES: [&str; 5] = ["hot", "cold", "clean", "sliced", "picked"];
pub const RELATIONS: [&str; 2] = ["in", "on"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QueryType {
    State,
    Relation,
    Action,
}

impl QueryType {
    pub const ALL: [QueryType; 3] = [QueryType::State, QueryType::Relation, QueryType::Action];

    pub fn type_name(self) -> &'static str {
        match self {
            QueryType::State => "StateQuery",
            QueryType::Relation => "RelationQuery",
            QueryType::Action => "ActionQuery",
        }
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            QueryType::State => n == 2,
            QueryType::Relation => n == 3,
            QueryType::Action => n == 2 || n == 3,
        }
    }

    fn arity_text(self) -> &'static str {
        match self {
            QueryType::State => "2",
            QueryType::Relation => "3",
            QueryType::Action => "2 or 3",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Whether out-of-lexicon state, relation and action names are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VocabMode {
    #[default]
    Strict,
    Lenient,
}

/// Which query family encodes sub-tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryScheme {
    /// `StateQuery` for state changes, `RelationQuery` for placement.
    #[default]
    StateRelation,
    /// `ActionQuery` for everything.
    Action,
}

/// A typed symbolic operator with lowercase identifier arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Query {
    qtype: QueryType,
    args: Vec<String>,
}

impl Query {
    /// Builds a query, checking arity, identifier syntax and (in strict mode)
    /// the state/relation/action vocabularies.
    pub fn new(qtype: QueryType, args: Vec<String>, mode: VocabMode) -> Result<Self> {
        if !qtype.arity_ok(args.len()) {
            return Err(Error::ArityMismatch {
                qtype: qtype.type_name().to_string(),
                expected: qtype.arity_text().to_string(),
                got: args.len(),
            });
        }
        for a in &args {
            if !is_identifier(a) {
                return Err(Error::Syntax(format!("invalid identifier `{a}`")));
            }
        }
        if mode == VocabMode::Strict {
            let checked = match qtype {
                QueryType::State => STATES.contains(&args[1].as_str()).then_some(()).ok_or(&args[1]),
                QueryType::Relation => {
                    RELATIONS.contains(&args[2].as_str()).then_some(()).ok_or(&args[2])
                }
                QueryType::Action => args[0].parse::<Action>().map(|_| ()).map_err(|_| &args[0]),
            };
            if let Err(bad) = checked {
                return Err(Error::InvalidVocabulary(bad.clone()));
            }
        }
        Ok(Query { qtype, args })
    }

    pub fn state(object: &str, state: &str) -> Self {
        Query {
            qtype: QueryType::State,
            args: vec![object.to_string(), state.to_string()],
        }
    }

    pub fn relation(object: &str, receptacle: &str, relation: &str) -> Self {
        Query {
            qtype: QueryType::Relation,
            args: vec![object.to_string(), receptacle.to_string(), relation.to_string()],
        }
    }

    pub fn action(action: Action, object: &str, receptacle: Option<&str>) -> Self {
        let mut args = vec![action.name().to_string(), object.to_string()];
        if let Some(r) = receptacle {
            args.push(r.to_string());
        }
        Query {
            qtype: QueryType::Action,
            args,
        }
    }

    /// Canonical query for a sub-task. `relation` is only consulted for
    /// `place` under the state/relation scheme.
    pub fn for_subtask(
        scheme: QueryScheme,
        action: Action,
        object: &str,
        receptacle: Option<&str>,
        relation: &str,
    ) -> Self {
        match (scheme, action.resulting_state()) {
            (QueryScheme::Action, _) => Query::action(action, object, receptacle),
            (QueryScheme::StateRelation, Some(state)) => Query::state(object, state),
            (QueryScheme::StateRelation, None) => {
                Query::relation(object, receptacle.unwrap_or("unknown"), relation)
            }
        }
    }

    pub fn qtype(&self) -> QueryType {
        self.qtype
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    /// Target object of the query.
    pub fn object(&self) -> &str {
        match self.qtype {
            QueryType::Action => &self.args[1],
            _ => &self.args[0],
        }
    }

    /// The sub-task class this query detects, if it names a known one.
    pub fn subtask(&self) -> Option<Action> {
        match self.qtype {
            QueryType::State => Action::from_state(&self.args[1]),
            QueryType::Relation => Some(Action::Place),
            QueryType::Action => self.args[0].parse().ok(),
        }
    }

    /// Receptacle argument of a relation or placing action query.
    pub fn receptacle(&self) -> Option<&str> {
        match self.qtype {
            QueryType::Relation => Some(&self.args[1]),
            QueryType::Action => self.args.get(2).map(String::as_str),
            QueryType::State => None,
        }
    }

    /// Re-expresses the query under another scheme. Relation queries lose
    /// their preposition when converted to actions.
    pub fn to_scheme(&self, scheme: QueryScheme, relation_of: impl Fn(&str) -> String) -> Query {
        let Some(action) = self.subtask() else {
            return self.clone();
        };
        let receptacle = self.receptacle();
        let relation = match self.qtype {
            QueryType::Relation => self.args[2].clone(),
            _ => receptacle.map(&relation_of).unwrap_or_else(|| "in".to_string()),
        };
        Query::for_subtask(scheme, action, self.object(), receptacle, &relation)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.qtype.type_name(), self.args.join(","))
    }
}

pub fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// Parses `TypeName(arg, arg, ...)`; arguments are trimmed and lowercased.
pub fn parse_query(text: &str, mode: VocabMode) -> Result<Query> {
    let text = text.trim();
    let open = text
        .find('(')
        .ok_or_else(|| Error::Syntax(format!("missing `(` in `{text}`")))?;
    if !text.ends_with(')') {
        return Err(Error::Syntax(format!("missing `)` in `{text}`")));
    }
    let name = text[..open].trim();
    let qtype = QueryType::ALL
        .into_iter()
        .find(|t| t.type_name() == name)
        .ok_or_else(|| Error::UnknownQueryType(name.to_string()))?;
    let inner = &text[open + 1..text.len() - 1];
    if inner.contains(['(', ')']) {
        return Err(Error::Syntax(format!("nested parentheses in `{text}`")));
    }
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(|a| a.trim().to_lowercase()).collect()
    };
    Query::new(qtype, args, mode)
}

/// A DAG of queries. Node ids are the positions in `nodes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskGraph {
    nodes: Vec<Query>,
    edges: BTreeSet<(usize, usize)>,
}

impl TaskGraph {
    pub fn new(nodes: Vec<Query>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let edges: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        for &(from, to) in &edges {
            if from >= nodes.len() || to >= nodes.len() {
                return Err(Error::DanglingEdge { from, to });
            }
        }
        graph::topological_order(nodes.len(), &edges)?;
        Ok(TaskGraph { nodes, edges })
    }

    pub fn nodes(&self) -> &[Query] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same structure with every query rewritten under `scheme`.
    pub fn to_scheme(&self, scheme: QueryScheme, relation_of: impl Fn(&str) -> String) -> TaskGraph {
        TaskGraph {
            nodes: self
                .nodes
                .iter()
                .map(|q| q.to_scheme(scheme, &relation_of))
                .collect(),
            edges: self.edges.clone(),
        }
    }
}

/// Serialized as its DOT text.
impl Serialize for TaskGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&graph_to_dot(self))
    }
}

impl<'de> Deserialize<'de> for TaskGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_dot(&text, VocabMode::Lenient).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for TaskGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&graph_to_dot(self))
    }
}

pub fn graph_to_dot(g: &TaskGraph) -> String {
    let mut out = String::new();
    for (i, q) in g.nodes.iter().enumerate() {
        out.push_str(&format!("Step {i}: {q}\n"));
    }
    for (from, to) in &g.edges {
        out.push_str(&format!("Step {from} -> Step {to}\n"));
    }
    out
}

/// Splits on commas and newlines that are not inside parentheses.
fn split_items(text: &str) -> Result<Vec<&str>> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Syntax("unbalanced `)`".into()));
                }
            }
            ',' | '\n' if depth == 0 => {
                items.push(&text[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Syntax("unbalanced `(`".into()));
    }
    items.push(&text[start..]);
    Ok(items
        .into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect())
}

fn parse_step_ref(s: &str) -> Result<usize> {
    let rest = s
        .trim()
        .strip_prefix("Step")
        .ok_or_else(|| Error::Syntax(format!("expected `Step <id>`, got `{s}`")))?;
    rest.trim()
        .parse()
        .map_err(|_| Error::Syntax(format!("bad step id in `{s}`")))
}

pub fn parse_dot(text: &str, mode: VocabMode) -> Result<TaskGraph> {
    let mut nodes: Vec<(usize, Query)> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for item in split_items(text)? {
        let arrow = item
            .find("->")
            .map(|i| (i, 2))
            .or_else(|| item.find('→').map(|i| (i, '→'.len_utf8())));
        if let Some((at, width)) = arrow {
            let from = parse_step_ref(&item[..at])?;
            let to = parse_step_ref(&item[at + width..])?;
            edges.push((from, to));
        } else {
            let colon = item
                .find(':')
                .ok_or_else(|| Error::Syntax(format!("unrecognized item `{item}`")))?;
            let id = parse_step_ref(&item[..colon])?;
            nodes.push((id, parse_query(&item[colon + 1..], mode)?));
        }
    }
    nodes.sort_by_key(|(id, _)| *id);
    for (expected, (id, _)) in nodes.iter().enumerate() {
        if *id != expected {
            return Err(Error::Syntax(format!(
                "node ids must be contiguous from 0; found Step {id} at position {expected}"
            )));
        }
    }
    let mut seen = BTreeSet::new();
    for &(from, to) in &edges {
        if from >= nodes.len() || to >= nodes.len() {
            return Err(Error::DanglingEdge { from, to });
        }
        if !seen.insert((from, to)) {
            return Err(Error::Syntax(format!("duplicate edge Step {from} -> Step {to}")));
        }
    }
    TaskGraph::new(nodes.into_iter().map(|(_, q)| q).collect(), edges)
}
