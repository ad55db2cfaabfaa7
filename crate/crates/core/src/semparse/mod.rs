//! Template-grammar semantic parser: maps task descriptions to task graphs.
//!
//! Templates are data (see `templates/descriptions.tsv`). Each line holds a
//! sentence pattern and the ordering groups its sub-task slots form. A
//! sub-task slot matches any phrase form of any action in the [`Lexicon`], so
//! one template covers every assignment of actions to its slots, in both
//! full (`cooled in a fridge`) and abstract (`cooled`) wording.

mod ged;

pub use ged::{ged, ged_with_limit, GED_MAX_NODES};

use std::path::Path;

use regex::Regex;

use crate::dsl::{Action, Query, QueryScheme, TaskGraph, VocabMode};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

/// The template file shipped with the crate.
pub const DEFAULT_TEMPLATES: &str = include_str!("../../templates/descriptions.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Participle,
    Gerund,
    Adjective,
}

impl SlotKind {
    fn tag(self) -> char {
        match self {
            SlotKind::Participle => 'p',
            SlotKind::Gerund => 'g',
            SlotKind::Adjective => 'a',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Piece {
    Text(String),
    Object,
    Slot(usize, SlotKind),
}

/// One description template.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub pattern: String,
    /// Ordering groups of 0-based slot ids; slots are numbered in group order.
    pub groups: Vec<Vec<usize>>,
    pieces: Vec<Piece>,
}

impl Template {
    pub fn parse(line: &str) -> Result<Self> {
        let (pattern, groups) = line
            .split_once('\t')
            .ok_or_else(|| Error::Syntax(format!("template needs `pattern<TAB>groups`: `{line}`")))?;
        let groups: Vec<Vec<usize>> = groups
            .trim()
            .split(';')
            .map(|g| {
                g.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<usize>()
                            .ok()
                            .filter(|&n| n >= 1)
                            .map(|n| n - 1)
                            .ok_or_else(|| Error::Syntax(format!("bad slot number `{s}`")))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let flat: Vec<usize> = groups.iter().flatten().copied().collect();
        if flat != (0..flat.len()).collect::<Vec<_>>() {
            return Err(Error::Syntax(format!(
                "groups must list slots 1..=m in order: `{line}`"
            )));
        }
        let pieces = parse_pieces(pattern)?;
        let mut seen = vec![0usize; flat.len()];
        let mut objects = 0;
        for p in &pieces {
            match p {
                Piece::Slot(i, _) if *i < seen.len() => seen[*i] += 1,
                Piece::Slot(i, _) => {
                    return Err(Error::Syntax(format!("slot {} not in groups", i + 1)))
                }
                Piece::Object => objects += 1,
                Piece::Text(_) => {}
            }
        }
        if objects != 1 || seen.iter().any(|&c| c != 1) {
            return Err(Error::Syntax(format!(
                "template must use {{obj}} once and every slot once: `{pattern}`"
            )));
        }
        Ok(Template {
            pattern: pattern.to_string(),
            groups,
            pieces,
        })
    }

    pub fn slots(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Group sizes, e.g. `[1, 2, 1]`.
    pub fn shape(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn is_goal(&self) -> bool {
        self.pieces
            .iter()
            .any(|p| matches!(p, Piece::Slot(_, SlotKind::Adjective)))
    }

    /// Ordering edges: every member of a group precedes every member of the
    /// next group.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.groups
            .windows(2)
            .flat_map(|w| {
                let (a, b) = (&w[0], &w[1]);
                a.iter().flat_map(move |&u| b.iter().map(move |&v| (u, v)))
            })
            .collect()
    }

    /// Fills the template. `subtasks[i]` fills slot `i`; `full` selects the
    /// wording with appliances.
    pub fn render(
        &self,
        lexicon: &Lexicon,
        object: &str,
        subtasks: &[(Action, Option<String>)],
        full: bool,
    ) -> Result<String> {
        if subtasks.len() != self.slots() {
            return Err(Error::Config(format!(
                "template has {} slots, got {} sub-tasks",
                self.slots(),
                subtasks.len()
            )));
        }
        let mut out = String::new();
        for p in &self.pieces {
            match p {
                Piece::Text(t) => out.push_str(t),
                Piece::Object => out.push_str(object),
                Piece::Slot(i, kind) => {
                    let (action, recep) = &subtasks[*i];
                    let ph = lexicon.phrase(*action);
                    let form = match (kind, full) {
                        (SlotKind::Participle, true) => ph.participle_full.clone(),
                        (SlotKind::Participle, false) => ph.participle.clone(),
                        (SlotKind::Gerund, true) => ph.gerund_full.clone(),
                        (SlotKind::Gerund, false) => ph.gerund.clone(),
                        (SlotKind::Adjective, _) => ph.adjective.clone().ok_or_else(|| {
                            Error::Config(format!("`{action}` has no goal adjective"))
                        })?,
                    };
                    let recep = recep.as_deref().unwrap_or("countertop");
                    out.push_str(
                        &form
                            .replace("{rel}", &lexicon.relation_of(recep))
                            .replace("{recep}", recep),
                    );
                }
            }
        }
        Ok(out)
    }
}

fn parse_pieces(pattern: &str) -> Result<Vec<Piece>> {
    let mut pieces = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            pieces.push(Piece::Text(rest[..open].to_string()));
        }
        let close = rest[open..]
            .find('}')
            .ok_or_else(|| Error::Syntax(format!("unclosed `{{` in `{pattern}`")))?
            + open;
        let name = &rest[open + 1..close];
        let piece = if name == "obj" {
            Piece::Object
        } else {
            let (tag, num) = name.split_at(1);
            let kind = match tag {
                "p" => SlotKind::Participle,
                "g" => SlotKind::Gerund,
                "a" => SlotKind::Adjective,
                _ => return Err(Error::Syntax(format!("unknown slot `{{{name}}}`"))),
            };
            let n: usize = num
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::Syntax(format!("bad slot `{{{name}}}`")))?;
            Piece::Slot(n - 1, kind)
        };
        pieces.push(piece);
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        pieces.push(Piece::Text(rest.to_string()));
    }
    Ok(pieces)
}

/// Ordered list of templates, first match wins.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    pub templates: Vec<Template>,
}

impl TemplateSet {
    /// Parses the file format: one template per line, `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let templates = text
            .lines()
            .map(str::trim_end)
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(Template::parse)
            .collect::<Result<Vec<_>>>()?;
        if templates.is_empty() {
            return Err(Error::Syntax("template file is empty".into()));
        }
        Ok(TemplateSet { templates })
    }

    pub fn load(path: &Path) -> Result<Self> {
        TemplateSet::parse(&std::fs::read_to_string(path)?)
    }

    /// Templates with the given group shape, sequential or goal-oriented.
    pub fn with_shape(&self, shape: &[usize], goal: bool) -> Vec<&Template> {
        self.templates
            .iter()
            .filter(|t| t.shape() == shape && t.is_goal() == goal)
            .collect()
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet::parse(DEFAULT_TEMPLATES).expect("shipped templates are valid")
    }
}

/// Lowercases, collapses whitespace, drops a trailing period, and reads
/// `, and ` as ` and `.
pub fn normalize(text: &str) -> String {
    let lower = text.to_lowercase();
    let collapsed = lower.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_end_matches('.')
        .trim()
        .replace(", and ", " and ")
}

/// Compiled parser for one template set and lexicon. Immutable once built.
#[derive(Debug, Clone)]
pub struct DescriptionParser {
    templates: TemplateSet,
    lexicon: Lexicon,
    mode: VocabMode,
    compiled: Vec<Regex>,
}

/// Slot-filling regex fragment for one phrase. `{rel}` and `{recep}` become
/// named captures.
fn phrase_regex(phrase: &str, prefix: &str) -> String {
    let mut out = String::new();
    let mut rest = phrase;
    loop {
        let next = [("{rel}", "rel"), ("{recep}", "recep")]
            .iter()
            .filter_map(|(ph, name)| rest.find(ph).map(|i| (i, *ph, *name)))
            .min_by_key(|(i, _, _)| *i);
        match next {
            Some((i, ph, name)) => {
                out.push_str(&regex::escape(&rest[..i]));
                let body = if name == "rel" { "in|on" } else { "[a-z0-9_]+" };
                out.push_str(&format!("(?P<{prefix}_{name}>{body})"));
                rest = &rest[i + ph.len()..];
            }
            None => {
                out.push_str(&regex::escape(rest));
                return out;
            }
        }
    }
}

impl DescriptionParser {
    pub fn new(templates: TemplateSet, lexicon: Lexicon, mode: VocabMode) -> Result<Self> {
        let compiled = templates
            .templates
            .iter()
            .map(|t| Self::compile(t, &lexicon))
            .collect::<Result<Vec<_>>>()?;
        Ok(DescriptionParser {
            templates,
            lexicon,
            mode,
            compiled,
        })
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    fn compile(t: &Template, lexicon: &Lexicon) -> Result<Regex> {
        let mut re = String::from("^");
        for p in &t.pieces {
            match p {
                Piece::Text(s) => re.push_str(&regex::escape(&normalize_literal(s))),
                Piece::Object => re.push_str("(?P<obj>[a-z0-9_]+)"),
                Piece::Slot(i, kind) => {
                    let mut alts = Vec::new();
                    for a in Action::ALL {
                        let ph = lexicon.phrase(a);
                        let mut forms: Vec<String> = match kind {
                            SlotKind::Participle => {
                                vec![ph.participle_full.clone(), ph.participle.clone()]
                            }
                            SlotKind::Gerund => vec![ph.gerund_full.clone(), ph.gerund.clone()],
                            SlotKind::Adjective => ph.adjective.iter().cloned().collect(),
                        };
                        forms.dedup();
                        for (v, form) in forms.iter().enumerate() {
                            let name = format!("s{}{}_{}_{}", i, kind.tag(), a.name(), v);
                            alts.push(format!(
                                "(?P<{name}>{})",
                                phrase_regex(&normalize_literal(form), &name)
                            ));
                        }
                    }
                    re.push_str(&format!("(?:{})", alts.join("|")));
                }
            }
        }
        re.push('$');
        Regex::new(&re).map_err(|e| Error::Syntax(format!("template `{}`: {e}", t.pattern)))
    }

    /// Parses a description into a task graph whose nodes are the canonical
    /// state/relation queries of its sub-tasks, numbered by slot.
    pub fn parse(&self, text: &str) -> Result<TaskGraph> {
        let text = normalize(text);
        for (t, re) in self.templates.templates.iter().zip(&self.compiled) {
            let Some(caps) = re.captures(&text) else {
                continue;
            };
            let object = caps["obj"].to_string();
            if self.mode == VocabMode::Strict && !self.lexicon.objects.contains_key(&object) {
                return Err(Error::UnknownObject(object));
            }
            let mut nodes = Vec::with_capacity(t.slots());
            for p in &t.pieces {
                let Piece::Slot(i, kind) = p else { continue };
                let (action, name) = Action::ALL
                    .into_iter()
                    .flat_map(|a| (0..2).map(move |v| (a, v)))
                    .map(|(a, v)| (a, format!("s{}{}_{}_{}", i, kind.tag(), a.name(), v)))
                    .find(|(_, name)| caps.name(name).is_some())
                    .expect("a slot alternative matched");
                let receptacle = caps.name(&format!("{name}_recep")).map(|m| m.as_str().to_string());
                let relation = caps
                    .name(&format!("{name}_rel"))
                    .map(|m| m.as_str().to_string())
                    .unwrap_or_else(|| "in".to_string());
                if let Some(r) = &receptacle {
                    if self.mode == VocabMode::Strict && !self.lexicon.receptacles.contains_key(r) {
                        return Err(Error::UnknownObject(r.clone()));
                    }
                }
                nodes.push((
                    *i,
                    Query::for_subtask(
                        QueryScheme::StateRelation,
                        action,
                        &object,
                        receptacle.as_deref(),
                        &relation,
                    ),
                ));
            }
            nodes.sort_by_key(|(i, _)| *i);
            return TaskGraph::new(nodes.into_iter().map(|(_, q)| q).collect(), t.edges());
        }
        Err(Error::NoTemplateMatch(text))
    }
}

fn normalize_literal(s: &str) -> String {
    s.to_lowercase().replace(", and ", " and ")
}

impl Default for DescriptionParser {
    fn default() -> Self {
        DescriptionParser::new(TemplateSet::default(), Lexicon::default(), VocabMode::Strict)
            .expect("default templates compile")
    }
}

/// Parses with the shipped templates and the given lexicon.
pub fn parse_description(text: &str, lexicon: &Lexicon) -> Result<TaskGraph> {
    DescriptionParser::new(TemplateSet::default(), lexicon.clone(), VocabMode::Strict)?.parse(text)
}
