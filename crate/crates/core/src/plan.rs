//! Dialogue plan model.
//!
//! A [`DialoguePlan`] is the abstract, pre-realization form of a scripted
//! dialogue: who takes part, which dialogue acts are performed, how the acts
//! group into adjacency pairs and in which order they occur. Plans are plain
//! values; every query here is pure.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

// ── Identifiers ──────────────────────────────────────────────

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Self {
                Self(value.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(value: &str) -> Self {
                Self(value.to_owned())
            }
        }
    };
}

id_newtype!(
    /// Identifier of a dialogue participant.
    ParticipantId
);
id_newtype!(
    /// Identifier of a dialogue act.
    ActId
);
id_newtype!(
    /// Identifier of an adjacency pair.
    PairId
);

/// Ids are restricted to `[A-Za-z0-9_]+`.
pub fn is_valid_id(token: &str) -> bool {
    !token.is_empty()
        && token
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

// ── Enumerations ─────────────────────────────────────────────

macro_rules! token_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $token:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $token),+
                }
            }

            pub fn from_token(token: &str) -> Option<Self> {
                match token {
                    $($token => Some($name::$variant),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

token_enum!(
    /// Role of a participant in the showroom scenario.
    Role { Seller => "seller", Customer => "customer" }
);

token_enum!(
    /// Closed inventory of dialogue act types.
    ActType {
        Greet => "greet",
        Question => "question",
        Inform => "inform",
        Acknowledge => "acknowledge",
        ClarifyRequest => "clarify_request",
        Confirm => "confirm",
    }
);

token_enum!(
    /// Track 1 carries the business of the dialogue; track 2 is
    /// metacommunication about track-1 acts.
    Track { One => "track1", Two => "track2" }
);

token_enum!(
    /// How an adjacency pair came into the plan.
    PairOrigin { Planner => "planner", Inserted => "inserted", Aggregated => "aggregated" }
);

token_enum!(
    /// Polarity of a single global constraint.
    Polarity { Max => "max", Min => "min" }
);

impl ActType {
    /// Openers and closers may stand outside any adjacency pair.
    pub fn may_be_unpaired(self) -> bool {
        matches!(self, ActType::Greet | ActType::Acknowledge)
    }

    pub fn requires_content(self) -> bool {
        matches!(self, ActType::Question | ActType::Inform)
    }
}

// ── Opaque payload ───────────────────────────────────────────

/// A markup subtree carried through the engine without interpretation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpaqueNode {
    pub name: String,
    pub attrs: BTreeMap<String, String>,
    pub text: Option<String>,
    pub children: Vec<OpaqueNode>,
}

impl OpaqueNode {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            attrs: BTreeMap::new(),
            text: None,
            children: Vec::new(),
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.insert(key.into(), value.into());
        self
    }
}

// ── Domain types ─────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub id: ParticipantId,
    pub name: String,
    pub role: Role,
    /// Personality traits in `[0, 1]`, carried unchanged.
    pub traits: BTreeMap<String, f64>,
    /// Unknown attributes of known elements, keyed `element@attribute`.
    pub extra: BTreeMap<String, String>,
    /// Unknown child elements, in document order.
    pub payload: Vec<OpaqueNode>,
}

impl Participant {
    pub fn new(id: impl Into<String>, name: impl Into<String>, role: Role) -> Self {
        Self {
            id: ParticipantId::new(id),
            name: name.into(),
            role,
            traits: BTreeMap::new(),
            extra: BTreeMap::new(),
            payload: Vec::new(),
        }
    }
}

/// One flat discourse condition, e.g. `attribute(x_1, leather_seats, true)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub predicate: String,
    pub args: Vec<String>,
    pub polarity: bool,
}

impl Condition {
    pub fn new<I, S>(predicate: impl Into<String>, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
            polarity: true,
        }
    }

    pub fn negated(mut self) -> Self {
        self.polarity = !self.polarity;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticContent {
    pub drs_id: String,
    pub conditions: Vec<Condition>,
}

impl SemanticContent {
    pub fn new(drs_id: impl Into<String>, conditions: Vec<Condition>) -> Self {
        Self {
            drs_id: drs_id.into(),
            conditions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueAct {
    pub id: ActId,
    pub act_type: ActType,
    pub speaker: ParticipantId,
    pub addressee: ParticipantId,
    pub content: Option<SemanticContent>,
    pub track: Track,
    pub reaction_to: Option<ActId>,
    pub emphasis: bool,
    pub extra: BTreeMap<String, String>,
    pub payload: Vec<OpaqueNode>,
}

impl DialogueAct {
    pub fn new(
        id: impl Into<String>,
        act_type: ActType,
        speaker: impl Into<String>,
        addressee: impl Into<String>,
    ) -> Self {
        let track = match act_type {
            ActType::ClarifyRequest | ActType::Confirm => Track::Two,
            _ => Track::One,
        };
        Self {
            id: ActId::new(id),
            act_type,
            speaker: ParticipantId::new(speaker),
            addressee: ParticipantId::new(addressee),
            content: None,
            track,
            reaction_to: None,
            emphasis: false,
            extra: BTreeMap::new(),
            payload: Vec::new(),
        }
    }

    pub fn with_content(mut self, drs_id: impl Into<String>, conditions: Vec<Condition>) -> Self {
        self.content = Some(SemanticContent::new(drs_id, conditions));
        self
    }

    pub fn reacting_to(mut self, act: impl Into<String>) -> Self {
        self.reaction_to = Some(ActId::new(act));
        self
    }

    pub fn emphasized(mut self) -> Self {
        self.emphasis = true;
        self
    }

    pub fn conditions(&self) -> &[Condition] {
        self.content
            .as_ref()
            .map_or(&[], |c| c.conditions.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyPair {
    pub id: PairId,
    pub first: ActId,
    pub second: ActId,
    pub value_dimension: String,
    pub origin: PairOrigin,
}

impl AdjacencyPair {
    pub fn new(
        id: impl Into<String>,
        first: impl Into<String>,
        second: impl Into<String>,
        value_dimension: impl Into<String>,
        origin: PairOrigin,
    ) -> Self {
        Self {
            id: PairId::new(id),
            first: ActId::new(first),
            second: ActId::new(second),
            value_dimension: value_dimension.into(),
            origin,
        }
    }

    pub fn contains(&self, act: &ActId) -> bool {
        &self.first == act || &self.second == act
    }
}

/// The `(TURN, EMPH)` constraint setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstraintSetting {
    pub turn: Polarity,
    pub emph: Polarity,
}

impl ConstraintSetting {
    pub const fn new(turn: Polarity, emph: Polarity) -> Self {
        Self { turn, emph }
    }

    /// The four settings, in the order they are usually listed.
    pub const ALL: [ConstraintSetting; 4] = [
        ConstraintSetting::new(Polarity::Max, Polarity::Max),
        ConstraintSetting::new(Polarity::Max, Polarity::Min),
        ConstraintSetting::new(Polarity::Min, Polarity::Min),
        ConstraintSetting::new(Polarity::Min, Polarity::Max),
    ];
}

impl fmt::Display for ConstraintSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "turn={} emph={}", self.turn, self.emph)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DialoguePlan {
    pub participants: Vec<Participant>,
    pub acts: BTreeMap<ActId, DialogueAct>,
    /// Pairs, kept in temporal order of their first parts.
    pub pairs: Vec<AdjacencyPair>,
    pub ordering: Vec<ActId>,
    pub common_ground: Vec<OpaqueNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("plan has no acts")]
    Empty,
}

impl DialoguePlan {
    pub fn act(&self, id: &ActId) -> Option<&DialogueAct> {
        self.acts.get(id)
    }

    pub fn pair(&self, id: &PairId) -> Option<&AdjacencyPair> {
        self.pairs.iter().find(|p| &p.id == id)
    }

    pub fn participant(&self, id: &ParticipantId) -> Option<&Participant> {
        self.participants.iter().find(|p| &p.id == id)
    }

    /// Acts in temporal order. Ids missing from `acts` are skipped.
    pub fn acts_in_order(&self) -> impl Iterator<Item = &DialogueAct> + '_ {
        self.ordering.iter().filter_map(|id| self.acts.get(id))
    }

    /// Position of every act in the temporal ordering.
    pub fn positions(&self) -> HashMap<&ActId, usize> {
        self.ordering
            .iter()
            .enumerate()
            .map(|(i, id)| (id, i))
            .collect()
    }

    pub fn position_of(&self, id: &ActId) -> Option<usize> {
        self.ordering.iter().position(|a| a == id)
    }

    /// The pair an act belongs to, if any.
    pub fn pair_of(&self, act: &ActId) -> Option<&AdjacencyPair> {
        self.pairs.iter().find(|p| p.contains(act))
    }

    /// Number of maximal runs of consecutive acts by the same speaker.
    pub fn turn_count(&self) -> Result<usize, PlanError> {
        let speakers: Vec<&ParticipantId> = self.acts_in_order().map(|a| &a.speaker).collect();
        if speakers.is_empty() {
            return Err(PlanError::Empty);
        }
        Ok(1 + speakers.windows(2).filter(|w| w[0] != w[1]).count())
    }

    /// Ids of acts currently marked for emphasis.
    pub fn emphasis_marks(&self) -> BTreeSet<ActId> {
        self.acts
            .values()
            .filter(|a| a.emphasis)
            .map(|a| a.id.clone())
            .collect()
    }

    /// Number of clarification subdialogues added by revision.
    pub fn inserted_count(&self) -> usize {
        self.pairs
            .iter()
            .filter(|p| p.origin == PairOrigin::Inserted)
            .count()
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

// ── Validation ───────────────────────────────────────────────

/// One broken plan invariant, naming the offending ids.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("invalid id syntax: {0:?}")]
    InvalidId(String),
    #[error("duplicate participant id {0}")]
    DuplicateParticipant(ParticipantId),
    #[error("participant {participant} trait {name} = {value} outside [0, 1]")]
    TraitOutOfRange {
        participant: ParticipantId,
        name: String,
        value: String,
    },
    #[error("act stored under key {key} carries id {id}")]
    ActKeyMismatch { key: ActId, id: ActId },
    #[error("act {act} names unknown participant {participant}")]
    UnknownParticipant {
        act: ActId,
        participant: ParticipantId,
    },
    #[error("act {0} has speaker equal to addressee")]
    SelfAddressed(ActId),
    #[error("act {act} reacts to unknown act {target}")]
    UnknownReaction { act: ActId, target: ActId },
    #[error("act {act} reacts to {target}, which does not precede it")]
    ReactionNotEarlier { act: ActId, target: ActId },
    #[error("{act_type} act {act} must be on track2")]
    TrackMismatch { act: ActId, act_type: ActType },
    #[error("act {0} is marked for emphasis but carries no content")]
    EmphasisWithoutContent(ActId),
    #[error("{act_type} act {act} has no conditions")]
    MissingContent { act: ActId, act_type: ActType },
    #[error("act {act} has a {predicate} condition without arguments")]
    EmptyCondition { act: ActId, predicate: String },
    #[error("duplicate pair id {0}")]
    DuplicatePair(PairId),
    #[error("pair {pair} names unknown act {act}")]
    PairUnknownAct { pair: PairId, act: ActId },
    #[error("pair {pair}: second part {second} does not react to first part {first}")]
    PairNotConditionallyRelevant {
        pair: PairId,
        first: ActId,
        second: ActId,
    },
    #[error("pair {pair}: parts {first} and {second} are not adjacent in that order")]
    PairNotAdjacent {
        pair: PairId,
        first: ActId,
        second: ActId,
    },
    #[error("{origin} pair {pair} has act {act} on {track}")]
    PairTrackMismatch {
        pair: PairId,
        origin: PairOrigin,
        act: ActId,
        track: Track,
    },
    #[error("act {act} of inserted pair {pair} is marked for emphasis")]
    InsertedPairEmphasis { pair: PairId, act: ActId },
    #[error("act {act} belongs to pairs {first_pair} and {second_pair}")]
    ActInSeveralPairs {
        act: ActId,
        first_pair: PairId,
        second_pair: PairId,
    },
    #[error("{act_type} act {act} belongs to no pair")]
    UnpairedAct { act: ActId, act_type: ActType },
    #[error("ordering is not a permutation of the acts: missing {missing:?}, unknown {unknown:?}, repeated {repeated:?}")]
    OrderingNotPermutation {
        missing: Vec<ActId>,
        unknown: Vec<ActId>,
        repeated: Vec<ActId>,
    },
}

impl Violation {
    /// Short name of the invariant that failed.
    pub fn invariant(&self) -> &'static str {
        match self {
            Violation::InvalidId(_) => "id-syntax",
            Violation::DuplicateParticipant(_) => "participant-id-unique",
            Violation::TraitOutOfRange { .. } => "trait-range",
            Violation::ActKeyMismatch { .. } => "act-key",
            Violation::UnknownParticipant { .. } => "participant-reference",
            Violation::SelfAddressed(_) => "speaker-not-addressee",
            Violation::UnknownReaction { .. } => "reaction-reference",
            Violation::ReactionNotEarlier { .. } => "reaction-earlier",
            Violation::TrackMismatch { .. } => "metacommunication-track",
            Violation::EmphasisWithoutContent(_) => "emphasis-content",
            Violation::MissingContent { .. } => "content-required",
            Violation::EmptyCondition { .. } => "condition-arity",
            Violation::DuplicatePair(_) => "pair-id-unique",
            Violation::PairUnknownAct { .. } => "pair-reference",
            Violation::PairNotConditionallyRelevant { .. } => "pair-relevance",
            Violation::PairNotAdjacent { .. } => "pair-adjacency",
            Violation::PairTrackMismatch { .. } => "pair-track",
            Violation::InsertedPairEmphasis { .. } => "inserted-unmarked",
            Violation::ActInSeveralPairs { .. } => "pair-membership",
            Violation::UnpairedAct { .. } => "pair-membership",
            Violation::OrderingNotPermutation { .. } => "ordering-permutation",
        }
    }
}

/// Check every plan invariant. An empty result means the plan is valid.
pub fn validate(plan: &DialoguePlan) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut participant_ids = HashSet::new();
    for p in &plan.participants {
        if !is_valid_id(p.id.as_str()) {
            out.push(Violation::InvalidId(p.id.to_string()));
        }
        if !participant_ids.insert(&p.id) {
            out.push(Violation::DuplicateParticipant(p.id.clone()));
        }
        for (name, value) in &p.traits {
            if !(0.0..=1.0).contains(value) {
                out.push(Violation::TraitOutOfRange {
                    participant: p.id.clone(),
                    name: name.clone(),
                    value: value.to_string(),
                });
            }
        }
    }

    // Ordering must be a permutation of the act ids.
    let mut seen = HashSet::new();
    let mut repeated = Vec::new();
    let mut unknown = Vec::new();
    for id in &plan.ordering {
        if !seen.insert(id) {
            repeated.push(id.clone());
        } else if !plan.acts.contains_key(id) {
            unknown.push(id.clone());
        }
    }
    let missing: Vec<ActId> = plan
        .acts
        .keys()
        .filter(|id| !seen.contains(id))
        .cloned()
        .collect();
    if !(missing.is_empty() && unknown.is_empty() && repeated.is_empty()) {
        out.push(Violation::OrderingNotPermutation {
            missing,
            unknown,
            repeated,
        });
    }

    let positions = plan.positions();

    for (key, act) in &plan.acts {
        if key != &act.id {
            out.push(Violation::ActKeyMismatch {
                key: key.clone(),
                id: act.id.clone(),
            });
        }
        if !is_valid_id(act.id.as_str()) {
            out.push(Violation::InvalidId(act.id.to_string()));
        }
        for who in [&act.speaker, &act.addressee] {
            if !participant_ids.contains(who) {
                out.push(Violation::UnknownParticipant {
                    act: act.id.clone(),
                    participant: who.clone(),
                });
            }
        }
        if act.speaker == act.addressee {
            out.push(Violation::SelfAddressed(act.id.clone()));
        }
        if let Some(target) = &act.reaction_to {
            match (
                plan.acts.contains_key(target),
                positions.get(target),
                positions.get(&act.id),
            ) {
                (false, _, _) => out.push(Violation::UnknownReaction {
                    act: act.id.clone(),
                    target: target.clone(),
                }),
                (true, Some(t), Some(a)) if t < a => {}
                (true, Some(_), Some(_)) => out.push(Violation::ReactionNotEarlier {
                    act: act.id.clone(),
                    target: target.clone(),
                }),
                // Missing positions are already reported as an ordering violation.
                _ => {}
            }
        }
        if matches!(act.act_type, ActType::ClarifyRequest | ActType::Confirm)
            && act.track != Track::Two
        {
            out.push(Violation::TrackMismatch {
                act: act.id.clone(),
                act_type: act.act_type,
            });
        }
        let has_conditions = !act.conditions().is_empty();
        if act.emphasis && act.content.is_none() {
            out.push(Violation::EmphasisWithoutContent(act.id.clone()));
        }
        if act.act_type.requires_content() && !has_conditions {
            out.push(Violation::MissingContent {
                act: act.id.clone(),
                act_type: act.act_type,
            });
        }
        for cond in act.conditions() {
            if cond.args.is_empty() {
                out.push(Violation::EmptyCondition {
                    act: act.id.clone(),
                    predicate: cond.predicate.clone(),
                });
            }
        }
    }

    let mut pair_ids = HashSet::new();
    let mut membership: HashMap<&ActId, &PairId> = HashMap::new();
    for pair in &plan.pairs {
        if !is_valid_id(pair.id.as_str()) {
            out.push(Violation::InvalidId(pair.id.to_string()));
        }
        if !pair_ids.insert(&pair.id) {
            out.push(Violation::DuplicatePair(pair.id.clone()));
        }
        for part in [&pair.first, &pair.second] {
            if let Some(prev) = membership.insert(part, &pair.id) {
                out.push(Violation::ActInSeveralPairs {
                    act: part.clone(),
                    first_pair: prev.clone(),
                    second_pair: pair.id.clone(),
                });
            }
        }
        let (Some(first), Some(second)) = (plan.acts.get(&pair.first), plan.acts.get(&pair.second))
        else {
            for part in [&pair.first, &pair.second] {
                if !plan.acts.contains_key(part) {
                    out.push(Violation::PairUnknownAct {
                        pair: pair.id.clone(),
                        act: part.clone(),
                    });
                }
            }
            continue;
        };
        if second.reaction_to.as_ref() != Some(&first.id) {
            out.push(Violation::PairNotConditionallyRelevant {
                pair: pair.id.clone(),
                first: first.id.clone(),
                second: second.id.clone(),
            });
        }
        let adjacent = matches!(
            (positions.get(&first.id), positions.get(&second.id)),
            (Some(f), Some(s)) if f + 1 == *s
        );
        if !adjacent {
            out.push(Violation::PairNotAdjacent {
                pair: pair.id.clone(),
                first: first.id.clone(),
                second: second.id.clone(),
            });
        }
        let expected = match pair.origin {
            PairOrigin::Inserted => Track::Two,
            PairOrigin::Planner | PairOrigin::Aggregated => Track::One,
        };
        for act in [first, second] {
            if act.track != expected {
                out.push(Violation::PairTrackMismatch {
                    pair: pair.id.clone(),
                    origin: pair.origin,
                    act: act.id.clone(),
                    track: act.track,
                });
            }
            if pair.origin == PairOrigin::Inserted && act.emphasis {
                out.push(Violation::InsertedPairEmphasis {
                    pair: pair.id.clone(),
                    act: act.id.clone(),
                });
            }
        }
    }

    for act in plan.acts.values() {
        if !membership.contains_key(&act.id) && !act.act_type.may_be_unpaired() {
            out.push(Violation::UnpairedAct {
                act: act.id.clone(),
                act_type: act.act_type,
            });
        }
    }

    out
}

// ── Builder ──────────────────────────────────────────────────

/// Incremental construction of plans in temporal order.
///
/// Acts are appended to the ordering as they are added; pairs are appended
/// to the pair list. Nothing is validated until [`PlanBuilder::build`].
#[derive(Debug, Default, Clone)]
pub struct PlanBuilder {
    plan: DialoguePlan,
}

impl PlanBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn participant(mut self, participant: Participant) -> Self {
        self.plan.participants.push(participant);
        self
    }

    pub fn act(mut self, act: DialogueAct) -> Self {
        self.plan.ordering.push(act.id.clone());
        self.plan.acts.insert(act.id.clone(), act);
        self
    }

    /// Append both acts of a pair and the pair itself.
    pub fn pair(
        mut self,
        id: impl Into<String>,
        first: DialogueAct,
        second: DialogueAct,
        dimension: impl Into<String>,
        origin: PairOrigin,
    ) -> Self {
        let second = second.reacting_to(first.id.as_str());
        self.plan.pairs.push(AdjacencyPair::new(
            id,
            first.id.as_str(),
            second.id.as_str(),
            dimension,
            origin,
        ));
        self.act(first).act(second)
    }

    pub fn common_ground(mut self, node: OpaqueNode) -> Self {
        self.plan.common_ground.push(node);
        self
    }

    /// Return the plan without checking invariants.
    pub fn build_unchecked(self) -> DialoguePlan {
        self.plan
    }

    pub fn build(self) -> Result<DialoguePlan, Vec<Violation>> {
        let violations = self.plan.validate();
        if violations.is_empty() {
            Ok(self.plan)
        } else {
            Err(violations)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn people() -> PlanBuilder {
        PlanBuilder::new()
            .participant(Participant::new("ritchie", "Ritchie", Role::Seller))
            .participant(Participant::new("tina", "Tina", Role::Customer))
    }

    fn has(feature: &str) -> Vec<Condition> {
        vec![Condition::new("attribute", ["x_1", feature, "true"])]
    }

    fn qa(builder: PlanBuilder, n: usize, feature: &str, dim: &str) -> PlanBuilder {
        builder.pair(
            format!("p_{n}"),
            DialogueAct::new(format!("q_{n}"), ActType::Question, "tina", "ritchie")
                .with_content(format!("d_q{n}"), has(feature)),
            DialogueAct::new(format!("a_{n}"), ActType::Inform, "ritchie", "tina")
                .with_content(format!("d_a{n}"), has(feature)),
            dim,
            PairOrigin::Planner,
        )
    }

    fn two_pairs() -> DialoguePlan {
        qa(qa(people(), 1, "airbags", "security"), 2, "abs", "security")
            .build()
            .unwrap()
    }

    /// The seven-line showroom transcript: seller, buyer, seller, seller,
    /// buyer, seller, buyer.
    fn showroom() -> DialoguePlan {
        people()
            .pair(
                "p_1",
                DialogueAct::new("v_1", ActType::Greet, "ritchie", "tina"),
                DialogueAct::new("v_2", ActType::Question, "tina", "ritchie")
                    .with_content("d_2", vec![Condition::new("describe", ["x_1", "this_car"])]),
                "opening",
                PairOrigin::Planner,
            )
            .pair(
                "p_2",
                DialogueAct::new("v_3", ActType::Inform, "ritchie", "tina").with_content(
                    "d_1",
                    vec![Condition::new("property", ["x_1", "comfortable"])],
                ),
                DialogueAct::new("v_4", ActType::Inform, "ritchie", "tina")
                    .with_content("d_3", has("leather_seats")),
                "comfort",
                PairOrigin::Planner,
            )
            .pair(
                "p_3",
                DialogueAct::new("v_5", ActType::Question, "tina", "ritchie").with_content(
                    "d_5",
                    vec![Condition::new("consumption", ["x_1", "liters_8"])],
                ),
                DialogueAct::new("v_6", ActType::Inform, "ritchie", "tina").with_content(
                    "d_6",
                    vec![Condition::new("consumption", ["x_1", "liters_8"])],
                ),
                "economy",
                PairOrigin::Planner,
            )
            .act(
                DialogueAct::new("v_7", ActType::Acknowledge, "tina", "ritchie").reacting_to("v_6"),
            )
            .build()
            .unwrap()
    }

    #[test]
    fn well_formed_two_pair_plan_has_no_violations() {
        assert_eq!(two_pairs().validate(), vec![]);
    }

    #[test]
    fn second_part_without_reaction_is_reported() {
        let mut plan = two_pairs();
        plan.acts.get_mut(&ActId::from("a_2")).unwrap().reaction_to = None;
        let v = plan.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(
            matches!(&v[0], Violation::PairNotConditionallyRelevant { pair, .. } if pair.as_str() == "p_2")
        );
    }

    #[test]
    fn ordering_missing_an_act_is_reported_once() {
        let mut plan = two_pairs();
        plan.ordering.pop();
        let v = plan.validate();
        // Adjacency of p_2 cannot be established either, so restrict to the
        // permutation violation.
        let perm: Vec<_> = v
            .iter()
            .filter(|v| v.invariant() == "ordering-permutation")
            .collect();
        assert_eq!(perm.len(), 1);
        assert!(
            matches!(perm[0], Violation::OrderingNotPermutation { missing, .. } if missing == &vec![ActId::from("a_2")])
        );
    }

    #[test]
    fn showroom_transcript_has_six_turns() {
        assert_eq!(showroom().turn_count().unwrap(), 6);
    }

    #[test]
    fn turn_count_edge_cases() {
        let single = people()
            .act(DialogueAct::new("v_1", ActType::Greet, "ritchie", "tina"))
            .build()
            .unwrap();
        assert_eq!(single.turn_count().unwrap(), 1);
        assert_eq!(DialoguePlan::default().turn_count(), Err(PlanError::Empty));

        // Strict alternation over 2k acts gives 2k turns.
        let mut b = people();
        for n in 0..4 {
            b = qa(b, n, "airbags", "security");
        }
        assert_eq!(b.build().unwrap().turn_count().unwrap(), 8);
    }

    #[test]
    fn emphasis_marks_lists_marked_acts() {
        let mut plan = two_pairs();
        assert!(plan.emphasis_marks().is_empty());
        plan.acts.get_mut(&ActId::from("a_1")).unwrap().emphasis = true;
        assert_eq!(
            plan.emphasis_marks().into_iter().collect::<Vec<_>>(),
            vec![ActId::from("a_1")]
        );
    }

    #[test]
    fn metacommunication_must_be_on_track_two() {
        let mut plan = two_pairs();
        let a = plan.acts.get_mut(&ActId::from("a_1")).unwrap();
        a.act_type = ActType::Confirm;
        let v = plan.validate();
        assert!(v
            .iter()
            .any(|v| matches!(v, Violation::TrackMismatch { .. })));
    }

    #[test]
    fn emphasis_requires_content() {
        let plan = people()
            .act(DialogueAct::new("v_1", ActType::Greet, "ritchie", "tina").emphasized())
            .build_unchecked();
        assert_eq!(
            plan.validate(),
            vec![Violation::EmphasisWithoutContent(ActId::from("v_1"))]
        );
    }

    #[test]
    fn unpaired_inform_is_rejected_but_greeting_is_not() {
        let plan = people()
            .act(DialogueAct::new("v_1", ActType::Greet, "ritchie", "tina"))
            .act(
                DialogueAct::new("v_2", ActType::Inform, "ritchie", "tina")
                    .with_content("d", has("abs")),
            )
            .build_unchecked();
        let v = plan.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant(), "pair-membership");
    }

    #[test]
    fn reaction_must_point_backwards() {
        let mut plan = two_pairs();
        plan.acts.get_mut(&ActId::from("q_1")).unwrap().reaction_to = Some(ActId::from("a_2"));
        assert!(plan
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::ReactionNotEarlier { .. })));
    }

    #[test]
    fn turn_count_ignores_act_names() {
        let plan = showroom();
        let mut renamed = DialoguePlan {
            participants: plan.participants.clone(),
            ..Default::default()
        };
        let rename = |id: &ActId| ActId::new(format!("zz{}", id.as_str()));
        for id in &plan.ordering {
            let mut act = plan.acts[id].clone();
            act.id = rename(id);
            act.reaction_to = act.reaction_to.as_ref().map(rename);
            renamed.ordering.push(act.id.clone());
            renamed.acts.insert(act.id.clone(), act);
        }
        assert_eq!(renamed.turn_count(), plan.turn_count());
    }
}
