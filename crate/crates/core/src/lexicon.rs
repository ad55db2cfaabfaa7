//! Objects, receptacles, and the phrase forms used to talk about each action.
//!
//! The lexicon is plain data: it serializes to JSON so alternative vocabularies
//! can be loaded without code changes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsl::{self, Action};
use crate::error::{Error, Result};

/// Surface forms of one action. `{rel}` and `{recep}` are substituted for
/// placement phrases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phrases {
    /// Short participle, e.g. `heated`.
    pub participle: String,
    /// Participle with the appliance, e.g. `heated in a microwave`.
    pub participle_full: String,
    pub gerund: String,
    pub gerund_full: String,
    /// Goal adjective (`hot`); absent for actions with no goal form.
    #[serde(default)]
    pub adjective: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    /// Target objects and the actions each one affords.
    pub objects: BTreeMap<String, Vec<Action>>,
    /// Receptacles and the relation (`in` / `on`) used when placing into them.
    pub receptacles: BTreeMap<String, String>,
    pub phrases: BTreeMap<Action, Phrases>,
}

fn phrases(p: &str, pf: &str, g: &str, gf: &str, adj: Option<&str>) -> Phrases {
    Phrases {
        participle: p.into(),
        participle_full: pf.into(),
        gerund: g.into(),
        gerund_full: gf.into(),
        adjective: adj.map(Into::into),
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        use Action::*;
        let all = vec![Heat, Clean, Slice, Cool, Place, Pick];
        let objects = [
            ("apple", all.clone()),
            ("tomato", all.clone()),
            ("potato", all),
            ("lettuce", vec![Clean, Slice, Cool, Place, Pick]),
            ("bread", vec![Heat, Slice, Cool, Place, Pick]),
            ("egg", vec![Heat, Clean, Cool, Place, Pick]),
            ("mug", vec![Heat, Clean, Cool, Place, Pick]),
            ("cup", vec![Heat, Clean, Cool, Place, Pick]),
            ("spoon", vec![Clean, Place, Pick]),
            ("book", vec![Place, Pick]),
        ]
        .into_iter()
        .map(|(o, a)| (o.to_string(), a))
        .collect();
        let receptacles = [
            ("plate", "in"),
            ("bowl", "in"),
            ("pan", "in"),
            ("countertop", "on"),
            ("shelf", "on"),
            ("diningtable", "on"),
        ]
        .into_iter()
        .map(|(r, rel)| (r.to_string(), rel.to_string()))
        .collect();
        let phrases = [
            (Heat, phrases("heated", "heated in a microwave", "heating", "heating in a microwave", Some("hot"))),
            (Clean, phrases("cleaned", "cleaned in a sinkbasin", "cleaning", "cleaning in a sinkbasin", Some("clean"))),
            (Slice, phrases("sliced", "sliced with a knife", "slicing", "slicing with a knife", Some("sliced"))),
            (Cool, phrases("cooled", "cooled in a fridge", "cooling", "cooling in a fridge", Some("cold"))),
            (Place, phrases("placed {rel} a {recep}", "placed {rel} a {recep}", "placing {rel} a {recep}", "placing {rel} a {recep}", None)),
            (Pick, phrases("picked", "picked up", "picking", "picking up", Some("held"))),
        ]
        .into_iter()
        .collect();
        Lexicon {
            objects,
            receptacles,
            phrases,
        }
    }
}

impl Lexicon {
    pub fn load(path: &Path) -> Result<Self> {
        let lex: Lexicon = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        lex.validate()?;
        Ok(lex)
    }

    pub fn validate(&self) -> Result<()> {
        for name in self.objects.keys().chain(self.receptacles.keys()) {
            if !dsl::is_identifier(name) {
                return Err(Error::Config(format!("lexicon name `{name}` is not an identifier")));
            }
        }
        for rel in self.receptacles.values() {
            if !dsl::RELATIONS.contains(&rel.as_str()) {
                return Err(Error::InvalidVocabulary(rel.clone()));
            }
        }
        for a in Action::ALL {
            if !self.phrases.contains_key(&a) {
                return Err(Error::Config(format!("no phrases for `{a}`")));
            }
        }
        Ok(())
    }

    /// Preposition for a receptacle; unknown receptacles default to `in`.
    pub fn relation_of(&self, receptacle: &str) -> String {
        self.receptacles
            .get(receptacle)
            .cloned()
            .unwrap_or_else(|| "in".to_string())
    }

    pub fn affords(&self, object: &str, action: Action) -> bool {
        self.objects.get(object).is_some_and(|a| a.contains(&action))
    }

    /// All compatible `(action, object)` pairs in deterministic order.
    pub fn pairs(&self) -> Vec<(Action, String)> {
        let mut out: Vec<(Action, String)> = self
            .objects
            .iter()
            .flat_map(|(o, acts)| acts.iter().map(move |&a| (a, o.clone())))
            .collect();
        out.sort();
        out
    }

    /// Every identifier a query argument may take.
    pub fn tokens(&self) -> Vec<String> {
        let mut t: Vec<String> = self
            .objects
            .keys()
            .chain(self.receptacles.keys())
            .cloned()
            .chain(dsl::STATES.iter().map(|s| s.to_string()))
            .chain(dsl::RELATIONS.iter().map(|s| s.to_string()))
            .chain(Action::ALL.iter().map(|a| a.name().to_string()))
            .collect();
        t.sort();
        t.dedup();
        t
    }

    pub fn phrase(&self, action: Action) -> &Phrases {
        &self.phrases[&action]
    }
}
