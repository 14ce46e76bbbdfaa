//! Template realization of a plan as a `LABEL: sentence` transcript.
//!
//! Lexicon keys (one `token<TAB>phrase` entry per line, `#` starts a
//! comment):
//!
//! | key                 | meaning                                            |
//! |---------------------|----------------------------------------------------|
//! | `greet`, `acknowledge` | whole line for a contentless opener or closer   |
//! | `<who>@label`       | speaker label; falls back to the participant name  |
//! | `<pred>`            | `has` or `is`: selects the built-in polar templates |
//! | `<pred>@question`   | question template, `{X}` marks the feature slot    |
//! | `<pred>@inform`     | statement template, `{X}` marks the feature slot   |
//! | `<feature>`         | surface phrase of a feature token                  |
//! | `<feature>@echo`    | phrase used in a clarification request             |
//! | `<feature>@confirm` | phrase used in a confirmation                      |
//!
//! A condition `pred(ref, feature, ...)` realizes `feature`; the referent
//! and any trailing arguments stay implicit.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::plan::{
    ActId, ActType, Condition, DialogueAct, DialoguePlan, PairOrigin, Track, Violation,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: expected token<TAB>phrase")]
    MissingTab { line: usize },
    #[error("lexicon line {line}: duplicate entry for {token:?}")]
    Duplicate { line: usize, token: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealizeError {
    #[error("lexicon has no entry for {0:?}")]
    Gap(String),
    #[error("cannot realize an invalid plan: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    pub entries: BTreeMap<String, String>,
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let (token, phrase) = raw
                .split_once('\t')
                .ok_or(LexiconError::MissingTab { line })?;
            let token = token.trim();
            if entries
                .insert(token.to_owned(), phrase.trim().to_owned())
                .is_some()
            {
                return Err(LexiconError::Duplicate {
                    line,
                    token: token.to_owned(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str, RealizeError> {
        self.get(key)
            .ok_or_else(|| RealizeError::Gap(key.to_owned()))
    }

    /// `feature@variant`, else `feature`.
    fn phrase(&self, feature: &str, variant: Option<&str>) -> Result<&str, RealizeError> {
        variant
            .and_then(|v| self.get(&format!("{feature}@{v}")))
            .map_or_else(|| self.require(feature), Ok)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub act: ActId,
    pub track: Track,
    pub label: String,
    pub sentence: String,
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, self.sentence)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub lines: Vec<Line>,
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

// ── Templates ────────────────────────────────────────────────

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Has,
    Is,
}

fn kind_of(lexicon: &Lexicon, predicate: &str) -> Option<Kind> {
    match lexicon.get(predicate) {
        Some("has") => Some(Kind::Has),
        Some("is") => Some(Kind::Is),
        _ => None,
    }
}

fn feature_token(c: &Condition) -> Option<&str> {
    c.args.get(1).map(String::as_str)
}

fn join_and(phrases: &[&str]) -> String {
    phrases.join(" and ")
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Runs of consecutive conditions sharing predicate and polarity.
fn groups(conditions: &[Condition]) -> Vec<&[Condition]> {
    conditions
        .chunk_by(|a, b| a.predicate == b.predicate && a.polarity == b.polarity)
        .collect()
}

fn features(
    lexicon: &Lexicon,
    group: &[Condition],
    variant: Option<&str>,
) -> Result<String, RealizeError> {
    let mut phrases = Vec::with_capacity(group.len());
    for c in group {
        match feature_token(c) {
            Some(token) => phrases.push(lexicon.phrase(token, variant)?),
            None => {
                return Err(RealizeError::Gap(format!(
                    "{}: feature argument",
                    c.predicate
                )))
            }
        }
    }
    Ok(join_and(&phrases))
}

fn fill(template: &str, lexicon: &Lexicon, group: &[Condition]) -> Result<String, RealizeError> {
    if template.contains("{X}") {
        Ok(template.replace("{X}", &features(lexicon, group, None)?))
    } else {
        Ok(template.to_owned())
    }
}

fn question_sentence(lexicon: &Lexicon, group: &[Condition]) -> Result<String, RealizeError> {
    let pred = &group[0].predicate;
    if let Some(t) = lexicon.get(&format!("{pred}@question")) {
        return fill(t, lexicon, group);
    }
    let x = features(lexicon, group, None)?;
    match (kind_of(lexicon, pred), group[0].polarity) {
        (Some(Kind::Has), true) => Ok(format!("Does it have {x}?")),
        (Some(Kind::Has), false) => Ok(format!("Does it lack {x}?")),
        (Some(Kind::Is), true) => Ok(format!("Is it {x}?")),
        (Some(Kind::Is), false) => Ok(format!("Is it not {x}?")),
        (None, _) => Err(RealizeError::Gap(format!("{pred}@question"))),
    }
}

fn inform_sentence(lexicon: &Lexicon, group: &[Condition]) -> Result<String, RealizeError> {
    let pred = &group[0].predicate;
    let polarity = group[0].polarity;
    if polarity {
        if let Some(t) = lexicon.get(&format!("{pred}@inform")) {
            return fill(t, lexicon, group);
        }
    }
    let x = features(lexicon, group, None)?;
    match (kind_of(lexicon, pred), polarity) {
        (Some(Kind::Has), true) => Ok(format!("It has {x}.")),
        (Some(Kind::Has), false) => Ok(format!("It does not have {x}.")),
        (Some(Kind::Is), true) => Ok(format!("It is {x}.")),
        (Some(Kind::Is), false) => Ok(format!("It is not {x}.")),
        (None, true) => Err(RealizeError::Gap(format!("{pred}@inform"))),
        (None, false) => Err(RealizeError::Gap(pred.clone())),
    }
}

/// A yes/no answer: an inform reacting to a built-in polar question with
/// the same conditions up to polarity, all agreeing or all flipped.
fn polar_answer(plan: &DialoguePlan, lexicon: &Lexicon, act: &DialogueAct) -> Option<&'static str> {
    let question = plan.act(act.reaction_to.as_ref()?)?;
    if question.act_type != ActType::Question {
        return None;
    }
    let (q, a) = (question.conditions(), act.conditions());
    if q.is_empty() || q.len() != a.len() {
        return None;
    }
    let polar = q.iter().all(|c| {
        kind_of(lexicon, &c.predicate).is_some()
            && lexicon.get(&format!("{}@question", c.predicate)).is_none()
    });
    let same = q
        .iter()
        .zip(a)
        .all(|(x, y)| x.predicate == y.predicate && x.args == y.args);
    if !(polar && same) {
        return None;
    }
    if q.iter().zip(a).all(|(x, y)| x.polarity == y.polarity) {
        Some("Yes.")
    } else if q.iter().zip(a).all(|(x, y)| x.polarity != y.polarity) {
        Some("No.")
    } else {
        None
    }
}

fn sentences(
    lexicon: &Lexicon,
    conditions: &[Condition],
    each: impl Fn(&Lexicon, &[Condition]) -> Result<String, RealizeError>,
) -> Result<String, RealizeError> {
    let parts = groups(conditions)
        .into_iter()
        .map(|g| each(lexicon, g))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(parts.join(" "))
}

fn sentence(
    plan: &DialoguePlan,
    lexicon: &Lexicon,
    act: &DialogueAct,
) -> Result<String, RealizeError> {
    let conditions = act.conditions();
    match act.act_type {
        ActType::Greet | ActType::Acknowledge => {
            Ok(lexicon.require(act.act_type.as_str())?.to_owned())
        }
        ActType::Question => sentences(lexicon, conditions, question_sentence),
        ActType::Inform => match polar_answer(plan, lexicon, act) {
            Some(answer) => Ok(answer.to_owned()),
            None => sentences(lexicon, conditions, inform_sentence),
        },
        ActType::ClarifyRequest => {
            let echo = features(lexicon, conditions, Some("echo"))?;
            Ok(format!("Real {echo}?"))
        }
        ActType::Confirm => {
            let confirmed = features(lexicon, conditions, Some("confirm"))?;
            let head = if conditions.iter().all(|c| c.polarity) {
                "Yes"
            } else {
                "No"
            };
            Ok(format!("{head}, {confirmed}."))
        }
    }
}

fn label(plan: &DialoguePlan, lexicon: &Lexicon, act: &DialogueAct) -> String {
    lexicon
        .get(&format!("{}@label", act.speaker))
        .map(str::to_owned)
        .or_else(|| plan.participant(&act.speaker).map(|p| p.name.clone()))
        .unwrap_or_else(|| act.speaker.to_string())
}

/// One line per act in temporal order.
pub fn realize(plan: &DialoguePlan, lexicon: &Lexicon) -> Result<Transcript, RealizeError> {
    let violations = plan.validate();
    if !violations.is_empty() {
        return Err(RealizeError::Invalid(violations));
    }
    let mut lines = Vec::with_capacity(plan.ordering.len());
    for act in plan.acts_in_order() {
        lines.push(Line {
            act: act.id.clone(),
            track: act.track,
            label: label(plan, lexicon, act),
            sentence: capitalize(&sentence(plan, lexicon, act)?),
        });
    }
    Ok(Transcript { lines })
}

/// The plan with every inserted clarification pair removed.
pub fn strip_inserted(plan: &DialoguePlan) -> DialoguePlan {
    let mut out = plan.clone();
    let doomed: Vec<ActId> = plan
        .pairs
        .iter()
        .filter(|p| p.origin == PairOrigin::Inserted)
        .flat_map(|p| [p.first.clone(), p.second.clone()])
        .collect();
    out.pairs.retain(|p| p.origin != PairOrigin::Inserted);
    out.ordering.retain(|id| !doomed.contains(id));
    for id in &doomed {
        out.acts.remove(id);
    }
    out
}
