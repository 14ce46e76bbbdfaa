//! The two revision operators: adjacency-pair aggregation and insertion of a
//! clarification subdialogue.
//!
//! Both are pure `plan -> plan` maps guarded by a precondition. Each
//! application strictly decreases the potential
//! `(|emphasis marks|, |non-inserted pairs|)` under lexicographic order, so
//! every revision sequence is finite.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plan::{
    ActId, ActType, AdjacencyPair, DialogueAct, DialoguePlan, PairId, PairOrigin, SemanticContent,
    Track,
};

/// Two pairs that may be merged into one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AggrSite {
    /// The temporally earlier pair; the merged pair takes its place.
    pub pair_a: PairId,
    pub pair_b: PairId,
}

/// A pair with an emphasis-marked act that can receive a clarification.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InsertSite {
    pub pair: PairId,
    pub trigger_act: ActId,
}

/// Either operator applied at one site.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Revision {
    Aggr(AggrSite),
    Insert(InsertSite),
}

impl fmt::Display for AggrSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.pair_a, self.pair_b)
    }
}

impl fmt::Display for InsertSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.pair, self.trigger_act)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RevisionError {
    #[error("aggregation not applicable at {0}")]
    AggrNotApplicable(AggrSite),
    #[error("insertion not applicable at {0}")]
    InsertNotApplicable(InsertSite),
}

// ── Aggregation ──────────────────────────────────────────────

fn same_frame(x: &DialogueAct, y: &DialogueAct) -> bool {
    x.speaker == y.speaker && x.addressee == y.addressee && x.act_type == y.act_type
}

/// Whether pairs `a` and `b` may be aggregated.
///
/// Beyond sharing a value dimension, the first parts must agree on speaker,
/// addressee and act type (likewise the second parts), neither pair may be a
/// clarification subdialogue, and no act of either pair may still carry an
/// emphasis mark: marked information is clarified before it is folded into
/// a combined utterance.
fn aggregable(plan: &DialoguePlan, a: &AdjacencyPair, b: &AdjacencyPair) -> bool {
    if a.id == b.id
        || a.value_dimension != b.value_dimension
        || a.origin == PairOrigin::Inserted
        || b.origin == PairOrigin::Inserted
    {
        return false;
    }
    let parts = (
        plan.act(&a.first),
        plan.act(&a.second),
        plan.act(&b.first),
        plan.act(&b.second),
    );
    let (Some(a1), Some(a2), Some(b1), Some(b2)) = parts else {
        return false;
    };
    if [a1, a2, b1, b2].iter().any(|act| act.emphasis) {
        return false;
    }
    same_frame(a1, b1) && same_frame(a2, b2)
}

/// Pairs sorted by the temporal position of their first part.
fn pairs_in_order(plan: &DialoguePlan) -> Vec<&AdjacencyPair> {
    let positions = plan.positions();
    let mut pairs: Vec<&AdjacencyPair> = plan.pairs.iter().collect();
    pairs.sort_by_key(|p| positions.get(&p.first).copied().unwrap_or(usize::MAX));
    pairs
}

/// All aggregation sites, ordered by the position of `pair_a` then `pair_b`.
pub fn aggr_sites(plan: &DialoguePlan) -> Vec<AggrSite> {
    let pairs = pairs_in_order(plan);
    let mut sites = Vec::new();
    for (i, a) in pairs.iter().enumerate() {
        for b in &pairs[i + 1..] {
            if aggregable(plan, a, b) {
                sites.push(AggrSite {
                    pair_a: a.id.clone(),
                    pair_b: b.id.clone(),
                });
            }
        }
    }
    sites
}

fn merge_content(
    a: Option<&SemanticContent>,
    b: Option<&SemanticContent>,
) -> Option<SemanticContent> {
    match (a, b) {
        (None, None) => None,
        (Some(a), None) => Some(a.clone()),
        (None, Some(b)) => Some(b.clone()),
        (Some(a), Some(b)) => {
            let mut merged = a.clone();
            merged.conditions.extend(b.conditions.iter().cloned());
            Some(merged)
        }
    }
}

/// Merge pair `B` into pair `A`, producing `A+B = (A1+B1, A2+B2)` at A's
/// position.
pub fn apply_aggr(plan: &DialoguePlan, site: &AggrSite) -> Result<DialoguePlan, RevisionError> {
    let not_applicable = || RevisionError::AggrNotApplicable(site.clone());
    let a = plan.pair(&site.pair_a).ok_or_else(not_applicable)?;
    let b = plan.pair(&site.pair_b).ok_or_else(not_applicable)?;
    let (pos_a, pos_b) = (
        plan.position_of(&a.first).ok_or_else(not_applicable)?,
        plan.position_of(&b.first).ok_or_else(not_applicable)?,
    );
    if pos_a >= pos_b || !aggregable(plan, a, b) {
        return Err(not_applicable());
    }

    let mut out = plan.clone();
    for (keep, drop) in [(&a.first, &b.first), (&a.second, &b.second)] {
        let dropped = out.acts.remove(drop).ok_or_else(not_applicable)?;
        let kept = out.acts.get_mut(keep).ok_or_else(not_applicable)?;
        kept.content = merge_content(kept.content.as_ref(), dropped.content.as_ref());
        kept.emphasis |= dropped.emphasis;
    }
    // Later reactions to B's acts now point at the merged acts.
    for act in out.acts.values_mut() {
        if act.reaction_to.as_ref() == Some(&b.first) {
            act.reaction_to = Some(a.first.clone());
        } else if act.reaction_to.as_ref() == Some(&b.second) {
            act.reaction_to = Some(a.second.clone());
        }
    }
    out.ordering.retain(|id| id != &b.first && id != &b.second);
    out.pairs.retain(|p| p.id != b.id);
    if let Some(merged) = out.pairs.iter_mut().find(|p| p.id == a.id) {
        merged.origin = PairOrigin::Aggregated;
    }
    Ok(out)
}

// ── Insertion ────────────────────────────────────────────────

/// One site per emphasis-marked act inside a pair, in temporal order.
pub fn insert_sites(plan: &DialoguePlan) -> Vec<InsertSite> {
    let mut sites = Vec::new();
    for id in &plan.ordering {
        let Some(act) = plan.act(id) else { continue };
        if !act.emphasis {
            continue;
        }
        if let Some(pair) = plan.pair_of(id) {
            if pair.origin != PairOrigin::Inserted {
                sites.push(InsertSite {
                    pair: pair.id.clone(),
                    trigger_act: id.clone(),
                });
            }
        }
    }
    sites
}

/// Smallest `n` such that the act ids `v_ins{n}a`, `v_ins{n}b` and the pair
/// id `p_ins{n}` are all unused.
fn fresh_ids(plan: &DialoguePlan) -> (ActId, ActId, PairId) {
    (1..)
        .map(|n| {
            (
                ActId::new(format!("v_ins{n}a")),
                ActId::new(format!("v_ins{n}b")),
                PairId::new(format!("p_ins{n}")),
            )
        })
        .find(|(q, a, p)| {
            !plan.acts.contains_key(q) && !plan.acts.contains_key(a) && plan.pair(p).is_none()
        })
        .expect("unbounded id supply")
}

/// Insert a clarification subdialogue about the trigger act directly after
/// its pair, consuming the trigger's emphasis mark.
pub fn apply_insert(plan: &DialoguePlan, site: &InsertSite) -> Result<DialoguePlan, RevisionError> {
    let not_applicable = || RevisionError::InsertNotApplicable(site.clone());
    if !insert_sites(plan).contains(site) {
        return Err(not_applicable());
    }
    let pair = plan.pair(&site.pair).ok_or_else(not_applicable)?;
    let answer = plan.act(&pair.second).ok_or_else(not_applicable)?;
    let trigger = plan.act(&site.trigger_act).ok_or_else(not_applicable)?;
    let conditions = trigger.conditions().to_vec();

    let (echo_id, confirm_id, pair_id) = fresh_ids(plan);

    // The hearer of A's second part asks; its speaker confirms.
    let mut echo = DialogueAct::new(
        echo_id.as_str(),
        ActType::ClarifyRequest,
        answer.addressee.as_str(),
        answer.speaker.as_str(),
    )
    .with_content(format!("d_{echo_id}"), conditions.clone())
    .reacting_to(trigger.id.as_str());
    echo.track = Track::Two;
    let mut confirm = DialogueAct::new(
        confirm_id.as_str(),
        ActType::Confirm,
        answer.speaker.as_str(),
        answer.addressee.as_str(),
    )
    .with_content(format!("d_{confirm_id}"), conditions)
    .reacting_to(echo_id.as_str());
    confirm.track = Track::Two;

    let after = plan.position_of(&pair.second).ok_or_else(not_applicable)? + 1;
    let pair_index = plan
        .pairs
        .iter()
        .position(|p| p.id == pair.id)
        .ok_or_else(not_applicable)?;

    let mut out = plan.clone();
    out.ordering
        .splice(after..after, [echo_id.clone(), confirm_id.clone()]);
    out.pairs.insert(
        pair_index + 1,
        AdjacencyPair {
            id: pair_id,
            first: echo_id.clone(),
            second: confirm_id.clone(),
            value_dimension: pair.value_dimension.clone(),
            origin: PairOrigin::Inserted,
        },
    );
    out.acts.insert(echo_id, echo);
    out.acts.insert(confirm_id, confirm);
    if let Some(t) = out.acts.get_mut(&site.trigger_act) {
        t.emphasis = false;
    }
    Ok(out)
}

// ── Both operators ───────────────────────────────────────────

/// Every applicable revision: aggregation sites first, then insertion sites.
pub fn revisions(plan: &DialoguePlan) -> Vec<Revision> {
    aggr_sites(plan)
        .into_iter()
        .map(Revision::Aggr)
        .chain(insert_sites(plan).into_iter().map(Revision::Insert))
        .collect()
}

pub fn apply(plan: &DialoguePlan, revision: &Revision) -> Result<DialoguePlan, RevisionError> {
    match revision {
        Revision::Aggr(site) => apply_aggr(plan, site),
        Revision::Insert(site) => apply_insert(plan, site),
    }
}

/// The termination potential: remaining emphasis marks, then pairs that
/// aggregation can still consume.
pub fn potential(plan: &DialoguePlan) -> (usize, usize) {
    let mergeable = plan
        .pairs
        .iter()
        .filter(|p| p.origin != PairOrigin::Inserted)
        .count();
    (plan.emphasis_marks().len(), mergeable)
}
