//! Exhaustive enumeration of every plan reachable from a start plan.
//!
//! Plans are identified up to renaming of act and pair ids by their
//! canonical form. [`enumerate_closure`] runs a level-synchronous
//! breadth-first expansion (successors of one level are computed in
//! parallel, then merged in a fixed order); [`oracle_closure`] is a naive
//! recursive enumeration kept as an independent cross-check.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::plan::{ActId, DialoguePlan, OpaqueNode, PairId};
use crate::revision::{self, Revision};

pub const DEFAULT_MEMBER_CEILING: usize = 100_000;

// ── Canonical form ───────────────────────────────────────────

/// Canonical encoding of a plan, invariant under act and pair renaming.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Short stable digest used in reports and edge dumps.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(&self.0);
        hex::encode(&hash[..8])
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digest())
    }
}

#[derive(Serialize)]
struct CanonicalCondition<'a> {
    predicate: &'a str,
    args: &'a [String],
    polarity: bool,
}

#[derive(Serialize)]
struct CanonicalAct<'a> {
    act_type: &'static str,
    speaker: &'a str,
    addressee: &'a str,
    track: &'static str,
    emphasis: bool,
    reaction_to: Option<usize>,
    conditions: Option<Vec<CanonicalCondition<'a>>>,
    extra: &'a BTreeMap<String, String>,
    payload: &'a [OpaqueNode],
}

#[derive(Serialize)]
struct CanonicalPair<'a> {
    first: usize,
    second: usize,
    dimension: &'a str,
    origin: &'static str,
}

#[derive(Serialize)]
struct CanonicalParticipant<'a> {
    id: &'a str,
    name: &'a str,
    role: &'static str,
    traits: &'a BTreeMap<String, f64>,
    extra: &'a BTreeMap<String, String>,
    payload: &'a [OpaqueNode],
}

#[derive(Serialize)]
struct CanonicalPlan<'a> {
    participants: Vec<CanonicalParticipant<'a>>,
    acts: Vec<CanonicalAct<'a>>,
    pairs: Vec<CanonicalPair<'a>>,
    common_ground: &'a [OpaqueNode],
}

/// Encode `plan` with acts renumbered by temporal position and pairs listed
/// by the position of their first part. DRS ids are labels and are dropped.
pub fn canonical_form(plan: &DialoguePlan) -> CanonicalKey {
    let index: HashMap<&ActId, usize> = plan
        .ordering
        .iter()
        .enumerate()
        .map(|(i, id)| (id, i))
        .collect();
    let acts = plan
        .acts_in_order()
        .map(|act| CanonicalAct {
            act_type: act.act_type.as_str(),
            speaker: act.speaker.as_str(),
            addressee: act.addressee.as_str(),
            track: act.track.as_str(),
            emphasis: act.emphasis,
            reaction_to: act.reaction_to.as_ref().and_then(|r| index.get(r).copied()),
            conditions: act.content.as_ref().map(|c| {
                c.conditions
                    .iter()
                    .map(|c| CanonicalCondition {
                        predicate: &c.predicate,
                        args: &c.args,
                        polarity: c.polarity,
                    })
                    .collect()
            }),
            extra: &act.extra,
            payload: &act.payload,
        })
        .collect();
    let mut pairs: Vec<CanonicalPair> = plan
        .pairs
        .iter()
        .map(|p| CanonicalPair {
            first: index.get(&p.first).copied().unwrap_or(usize::MAX),
            second: index.get(&p.second).copied().unwrap_or(usize::MAX),
            dimension: &p.value_dimension,
            origin: p.origin.as_str(),
        })
        .collect();
    pairs.sort_by_key(|p| (p.first, p.second));
    let participants = plan
        .participants
        .iter()
        .map(|p| CanonicalParticipant {
            id: p.id.as_str(),
            name: &p.name,
            role: p.role.as_str(),
            traits: &p.traits,
            extra: &p.extra,
            payload: &p.payload,
        })
        .collect();
    let canonical = CanonicalPlan {
        participants,
        acts,
        pairs,
        common_ground: &plan.common_ground,
    };
    CanonicalKey(serde_json::to_vec(&canonical).expect("canonical plan serializes"))
}

// ── Plan space ───────────────────────────────────────────────

/// Operator tag and site of one edge, in position terms of the source plan
/// so that it is meaningful independently of id choices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeSite {
    /// Pair indices (by temporal order) of the two aggregated pairs.
    Aggr { pair_a: usize, pair_b: usize },
    /// Pair index and act position of the trigger.
    Insert { pair: usize, trigger: usize },
}

impl fmt::Display for EdgeSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeSite::Aggr { pair_a, pair_b } => write!(f, "aggr\tp{pair_a}+p{pair_b}"),
            EdgeSite::Insert { pair, trigger } => write!(f, "insert\tp{pair}:a{trigger}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: CanonicalKey,
    pub site: EdgeSite,
    pub to: CanonicalKey,
}

fn edge_site(plan: &DialoguePlan, revision: &Revision) -> EdgeSite {
    let positions = plan.positions();
    let mut order: Vec<(usize, &PairId)> = plan
        .pairs
        .iter()
        .map(|p| {
            (
                positions.get(&p.first).copied().unwrap_or(usize::MAX),
                &p.id,
            )
        })
        .collect();
    order.sort();
    let pair_index = |id: &PairId| {
        order
            .iter()
            .position(|(_, p)| *p == id)
            .unwrap_or(usize::MAX)
    };
    match revision {
        Revision::Aggr(site) => EdgeSite::Aggr {
            pair_a: pair_index(&site.pair_a),
            pair_b: pair_index(&site.pair_b),
        },
        Revision::Insert(site) => EdgeSite::Insert {
            pair: pair_index(&site.pair),
            trigger: positions
                .get(&site.trigger_act)
                .copied()
                .unwrap_or(usize::MAX),
        },
    }
}

/// The closure of a start plan under both operators.
#[derive(Debug, Clone)]
pub struct PlanSpace {
    pub start: CanonicalKey,
    /// One representative plan per canonical form, in key order.
    pub members: BTreeMap<CanonicalKey, DialoguePlan>,
    pub edges: BTreeSet<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("plan space exceeds the member ceiling of {ceiling} plans")]
    CeilingExceeded { ceiling: usize },
    #[error("revision failed during enumeration: {0}")]
    Revision(#[from] revision::RevisionError),
}

impl PlanSpace {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn start_plan(&self) -> &DialoguePlan {
        &self.members[&self.start]
    }

    pub fn keys(&self) -> impl Iterator<Item = &CanonicalKey> {
        self.members.keys()
    }

    /// Length of the longest derivation from the start plan.
    ///
    /// Every edge lowers the revision potential, so the edge graph is acyclic
    /// and the longest path is well defined.
    pub fn max_depth(&self) -> usize {
        let mut succ: HashMap<&CanonicalKey, Vec<&CanonicalKey>> = HashMap::new();
        for e in &self.edges {
            succ.entry(&e.from).or_default().push(&e.to);
        }
        // Longest path from each node, computed in reverse topological order.
        let mut memo: HashMap<&CanonicalKey, usize> = HashMap::new();
        let mut stack: Vec<(&CanonicalKey, bool)> = vec![(&self.start, false)];
        while let Some((node, expanded)) = stack.pop() {
            if memo.contains_key(node) {
                continue;
            }
            let next = succ.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if expanded {
                let best = next.iter().map(|n| memo[n] + 1).max().unwrap_or(0);
                memo.insert(node, best);
            } else {
                stack.push((node, true));
                stack.extend(
                    next.iter()
                        .filter(|n| !memo.contains_key(*n))
                        .map(|n| (*n, false)),
                );
            }
        }
        memo[&self.start]
    }

    /// One line per edge: `from<TAB>op<TAB>site<TAB>to`.
    pub fn write_edges<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.edges {
            writeln!(w, "{}\t{}\t{}", e.from, e.site, e.to)?;
        }
        Ok(())
    }
}

/// Enumerate every plan reachable from `start` by zero or more revisions.
pub fn enumerate_closure(start: &DialoguePlan, ceiling: usize) -> Result<PlanSpace, SearchError> {
    let start_key = canonical_form(start);
    let mut members = BTreeMap::new();
    members.insert(start_key.clone(), start.clone());
    if members.len() > ceiling {
        return Err(SearchError::CeilingExceeded { ceiling });
    }
    let mut edges = BTreeSet::new();
    let mut frontier = vec![start_key.clone()];

    while !frontier.is_empty() {
        let expanded: Vec<Vec<(Edge, DialoguePlan)>> = frontier
            .par_iter()
            .map(|key| {
                let plan = &members[key];
                revision::revisions(plan)
                    .iter()
                    .map(|r| {
                        let next = revision::apply(plan, r)?;
                        let to = canonical_form(&next);
                        let edge = Edge {
                            from: key.clone(),
                            site: edge_site(plan, r),
                            to,
                        };
                        Ok((edge, next))
                    })
                    .collect::<Result<Vec<_>, revision::RevisionError>>()
            })
            .collect::<Result<_, _>>()?;

        let mut next_frontier = Vec::new();
        for (edge, plan) in expanded.into_iter().flatten() {
            if !members.contains_key(&edge.to) {
                if members.len() >= ceiling {
                    return Err(SearchError::CeilingExceeded { ceiling });
                }
                members.insert(edge.to.clone(), plan);
                next_frontier.push(edge.to.clone());
            }
            edges.insert(edge);
        }
        frontier = next_frontier;
    }

    Ok(PlanSpace {
        start: start_key,
        members,
        edges,
    })
}

/// Same closure by a deliberately naive method: recurse over every
/// applicable revision, collecting canonical forms. Exponential; meant for
/// small plans only.
pub fn oracle_closure(start: &DialoguePlan) -> BTreeSet<CanonicalKey> {
    fn visit(plan: &DialoguePlan, seen: &mut BTreeSet<CanonicalKey>) {
        if !seen.insert(canonical_form(plan)) {
            return;
        }
        let sites = revision::insert_sites(plan)
            .into_iter()
            .map(Revision::Insert)
            .chain(revision::aggr_sites(plan).into_iter().map(Revision::Aggr));
        for r in sites {
            if let Ok(next) = revision::apply(plan, &r) {
                visit(&next, seen);
            }
        }
    }
    let mut seen = BTreeSet::new();
    visit(start, &mut seen);
    seen
}

/// Keys reachable from the start along recorded edges.
pub fn reachable(space: &PlanSpace) -> BTreeSet<CanonicalKey> {
    let mut succ: HashMap<&CanonicalKey, Vec<&CanonicalKey>> = HashMap::new();
    for e in &space.edges {
        succ.entry(&e.from).or_default().push(&e.to);
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([&space.start]);
    while let Some(k) = queue.pop_front() {
        if seen.insert(k.clone()) {
            queue.extend(succ.get(k).into_iter().flatten());
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{
        ActType, Condition, DialogueAct, PairOrigin, Participant, PlanBuilder, Role,
    };
    use crate::revision::{aggr_sites, apply_aggr};

    fn people() -> PlanBuilder {
        PlanBuilder::new()
            .participant(Participant::new("ritchie", "Ritchie", Role::Seller))
            .participant(Participant::new("tina", "Tina", Role::Customer))
    }

    fn qa(b: PlanBuilder, tag: &str, feature: &str, dim: &str, mark: bool) -> PlanBuilder {
        let cond = vec![Condition::new("attribute", ["x_1", feature, "true"])];
        let mut answer = DialogueAct::new(format!("a{tag}"), ActType::Inform, "ritchie", "tina")
            .with_content(format!("d_a{tag}"), cond.clone());
        answer.emphasis = mark;
        b.pair(
            format!("p{tag}"),
            DialogueAct::new(format!("q{tag}"), ActType::Question, "tina", "ritchie")
                .with_content(format!("d_q{tag}"), cond),
            answer,
            dim,
            PairOrigin::Planner,
        )
    }

    #[test]
    fn renaming_preserves_canonical_form() {
        let a = qa(
            qa(people(), "1", "airbags", "security", false),
            "2",
            "abs",
            "security",
            false,
        )
        .build()
        .unwrap();
        let b = qa(
            qa(people(), "x", "airbags", "security", false),
            "y",
            "abs",
            "security",
            false,
        )
        .build()
        .unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn content_difference_changes_canonical_form() {
        let a = qa(people(), "1", "airbags", "security", false)
            .build()
            .unwrap();
        let b = qa(people(), "1", "abs", "security", false).build().unwrap();
        assert_ne!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn independent_aggregations_commute() {
        let plan = qa(
            qa(
                qa(
                    qa(people(), "1", "airbags", "security", false),
                    "2",
                    "seats",
                    "comfort",
                    false,
                ),
                "3",
                "abs",
                "security",
                false,
            ),
            "4",
            "aircon",
            "comfort",
            false,
        )
        .build()
        .unwrap();
        let sites = aggr_sites(&plan);
        assert_eq!(sites.len(), 2);
        let ab = apply_aggr(&plan, &sites[0]).unwrap();
        let ab = apply_aggr(&ab, &aggr_sites(&ab)[0]).unwrap();
        let ba = apply_aggr(&plan, &sites[1]).unwrap();
        let ba = apply_aggr(&ba, &aggr_sites(&ba)[0]).unwrap();
        assert_eq!(canonical_form(&ab), canonical_form(&ba));
    }

    #[test]
    fn closure_of_inert_plan_is_singleton() {
        let plan = qa(people(), "1", "airbags", "security", false)
            .build()
            .unwrap();
        let space = enumerate_closure(&plan, DEFAULT_MEMBER_CEILING).unwrap();
        assert_eq!(space.len(), 1);
        assert_eq!(space.max_depth(), 0);
        assert_eq!(oracle_closure(&plan).len(), 1);
    }

    #[test]
    fn two_compatible_pairs_give_two_members() {
        let plan = qa(
            qa(people(), "1", "airbags", "security", false),
            "2",
            "abs",
            "security",
            false,
        )
        .build()
        .unwrap();
        let space = enumerate_closure(&plan, DEFAULT_MEMBER_CEILING).unwrap();
        assert_eq!(space.len(), 2);
        assert_eq!(space.edges.len(), 1);
        assert_eq!(space.max_depth(), 1);
    }

    #[test]
    fn marked_pair_scenario_matches_oracle() {
        // One mark, two same-dimension pairs: start, inserted, inserted+merged.
        let plan = qa(
            qa(people(), "1", "seats", "comfort", true),
            "2",
            "aircon",
            "comfort",
            false,
        )
        .build()
        .unwrap();
        let space = enumerate_closure(&plan, DEFAULT_MEMBER_CEILING).unwrap();
        assert_eq!(space.len(), 3);
        let keys: BTreeSet<_> = space.keys().cloned().collect();
        assert_eq!(keys, oracle_closure(&plan));
        assert_eq!(reachable(&space), keys);
        assert_eq!(space.max_depth(), 2);
    }

    #[test]
    fn ceiling_aborts_enumeration() {
        let plan = qa(
            qa(people(), "1", "airbags", "security", false),
            "2",
            "abs",
            "security",
            false,
        )
        .build()
        .unwrap();
        assert_eq!(
            enumerate_closure(&plan, 1).unwrap_err(),
            SearchError::CeilingExceeded { ceiling: 1 }
        );
    }

    #[test]
    fn edge_dump_is_line_oriented() {
        let plan = qa(
            qa(people(), "1", "seats", "comfort", true),
            "2",
            "aircon",
            "comfort",
            false,
        )
        .build()
        .unwrap();
        let space = enumerate_closure(&plan, DEFAULT_MEMBER_CEILING).unwrap();
        let mut buf = Vec::new();
        space.write_edges(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().all(|l| l.split('\t').count() == 4));
        assert!(text.contains("insert\tp0:a1"));
    }
}
