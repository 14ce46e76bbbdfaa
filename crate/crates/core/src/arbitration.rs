//! Scoring plans against the TURN and EMPH constraints and choosing among
//! them.
//!
//! Raw scores are oriented by the constraint setting and mapped affinely
//! onto `[0, 100]` per axis, where 100 means no plan in the space does
//! better. Selection is by Nash product (default), by sum, by returning the
//! whole Pareto front, or by one of the two sequential baselines.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::plan::{ConstraintSetting, DialoguePlan, Polarity};
use crate::revision::{self, Revision};
use crate::search::{CanonicalKey, PlanSpace};

/// Relative tolerance used when comparing products and sums for ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RawScore {
    pub turns: usize,
    pub emph: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreTuple {
    pub s_t: f64,
    pub s_e: f64,
    pub raw_turns: usize,
    pub raw_emph: usize,
}

impl ScoreTuple {
    /// A tuple with no raw counts attached, for working directly on scores.
    pub fn new(s_t: f64, s_e: f64) -> Self {
        Self {
            s_t,
            s_e,
            raw_turns: 0,
            raw_emph: 0,
        }
    }

    pub fn product(&self) -> f64 {
        self.s_t * self.s_e
    }

    pub fn sum(&self) -> f64 {
        self.s_t + self.s_e
    }

    /// Whether `self` rules `other` out of the Pareto front: equal on one
    /// axis and greater on the other, or greater on both.
    pub fn dominates(&self, other: &ScoreTuple) -> bool {
        (self.s_t == other.s_t && self.s_e > other.s_e)
            || (self.s_e == other.s_e && self.s_t > other.s_t)
            || (self.s_e > other.s_e && self.s_t > other.s_t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArbitrationPlan {
    Nash,
    Sum,
    ParetoAll,
    SequentialInsertFirst,
    SequentialAggrFirst,
}

impl ArbitrationPlan {
    pub fn as_str(self) -> &'static str {
        match self {
            ArbitrationPlan::Nash => "nash",
            ArbitrationPlan::Sum => "sum",
            ArbitrationPlan::ParetoAll => "pareto",
            ArbitrationPlan::SequentialInsertFirst => "seq-insert-first",
            ArbitrationPlan::SequentialAggrFirst => "seq-aggr-first",
        }
    }
}

impl fmt::Display for ArbitrationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// ── Scoring ──────────────────────────────────────────────────

/// Turn count and number of clarification subdialogues added by revision.
pub fn raw_scores(plan: &DialoguePlan) -> RawScore {
    RawScore {
        turns: plan.turn_count().unwrap_or(0),
        emph: plan.inserted_count(),
    }
}

fn normalize_axis(values: &[usize], polarity: Polarity) -> Vec<f64> {
    let (Some(&lo), Some(&hi)) = (values.iter().min(), values.iter().max()) else {
        return Vec::new();
    };
    if lo == hi {
        return vec![100.0; values.len()];
    }
    let span = (hi - lo) as f64;
    values
        .iter()
        .map(|&v| match polarity {
            Polarity::Max => 100.0 * (v - lo) as f64 / span,
            Polarity::Min => 100.0 * (hi - v) as f64 / span,
        })
        .collect()
}

/// Orient and min-max normalize each axis onto `[0, 100]`.
pub fn normalize(space: &[RawScore], setting: ConstraintSetting) -> Vec<ScoreTuple> {
    let turns: Vec<usize> = space.iter().map(|r| r.turns).collect();
    let emph: Vec<usize> = space.iter().map(|r| r.emph).collect();
    let s_t = normalize_axis(&turns, setting.turn);
    let s_e = normalize_axis(&emph, setting.emph);
    space
        .iter()
        .zip(s_t.into_iter().zip(s_e))
        .map(|(raw, (s_t, s_e))| ScoreTuple {
            s_t,
            s_e,
            raw_turns: raw.turns,
            raw_emph: raw.emph,
        })
        .collect()
}

// ── Selection ────────────────────────────────────────────────

/// Indices of the Pareto-optimal members, in input order.
pub fn pareto_front(scored: &[ScoreTuple]) -> Vec<usize> {
    (0..scored.len())
        .filter(|&i| !scored.iter().any(|other| other.dominates(&scored[i])))
        .collect()
}

/// Winners of one selection rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    /// Every index attaining the optimum, ascending.
    pub winners: Vec<usize>,
    /// The reported winner: the first in canonical (input) order.
    pub first: usize,
}

impl Selection {
    fn from_winners(winners: Vec<usize>) -> Self {
        let first = winners[0];
        Self { winners, first }
    }

    pub fn contains(&self, index: usize) -> bool {
        self.winners.contains(&index)
    }
}

fn ties_with(value: f64, best: f64) -> bool {
    value >= best - TIE_TOLERANCE * best.abs()
}

/// Indices among `candidates` maximizing `key`, with relative tie tolerance.
fn argmax_by(
    scored: &[ScoreTuple],
    candidates: &[usize],
    key: impl Fn(&ScoreTuple) -> f64,
) -> Vec<usize> {
    let best = candidates
        .iter()
        .map(|&i| key(&scored[i]))
        .fold(f64::NEG_INFINITY, f64::max);
    candidates
        .iter()
        .copied()
        .filter(|&i| ties_with(key(&scored[i]), best))
        .collect()
}

/// Members maximizing `s_t * s_e`.
///
/// When every product is zero the product carries no information; the
/// choice then falls back to the Pareto front, maximizing the sum there.
///
/// # Panics
///
/// Panics if `scored` is empty.
pub fn nash_select(scored: &[ScoreTuple]) -> Selection {
    assert!(!scored.is_empty(), "nash_select on an empty score set");
    let all: Vec<usize> = (0..scored.len()).collect();
    let best = scored.iter().map(ScoreTuple::product).fold(0.0, f64::max);
    if best > 0.0 {
        Selection::from_winners(argmax_by(scored, &all, ScoreTuple::product))
    } else {
        let front = pareto_front(scored);
        Selection::from_winners(argmax_by(scored, &front, ScoreTuple::sum))
    }
}

/// Members maximizing `s_t + s_e`.
///
/// # Panics
///
/// Panics if `scored` is empty.
pub fn sum_select(scored: &[ScoreTuple]) -> Selection {
    assert!(!scored.is_empty(), "sum_select on an empty score set");
    let all: Vec<usize> = (0..scored.len()).collect();
    Selection::from_winners(argmax_by(scored, &all, ScoreTuple::sum))
}

// ── Sequential baseline ──────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseOrder {
    InsertFirst,
    AggrFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialOutcome {
    pub plan: DialoguePlan,
    pub insertions: usize,
    pub aggregations: usize,
}

/// Apply one operation as often as possible, then the other.
///
/// The insertion phase runs iff EMPH is `max`, the aggregation phase iff
/// TURN is `max`. Within a phase the first applicable site in canonical
/// order is applied until none remains.
pub fn sequential_revise(
    start: &DialoguePlan,
    setting: ConstraintSetting,
    order: PhaseOrder,
) -> SequentialOutcome {
    let mut outcome = SequentialOutcome {
        plan: start.clone(),
        insertions: 0,
        aggregations: 0,
    };
    let phases = match order {
        PhaseOrder::InsertFirst => [true, false],
        PhaseOrder::AggrFirst => [false, true],
    };
    for insert_phase in phases {
        let enabled = if insert_phase {
            setting.emph == Polarity::Max
        } else {
            setting.turn == Polarity::Max
        };
        if !enabled {
            continue;
        }
        loop {
            let next = if insert_phase {
                revision::insert_sites(&outcome.plan)
                    .into_iter()
                    .next()
                    .map(Revision::Insert)
            } else {
                revision::aggr_sites(&outcome.plan)
                    .into_iter()
                    .next()
                    .map(Revision::Aggr)
            };
            let Some(rev) = next else { break };
            outcome.plan = revision::apply(&outcome.plan, &rev)
                .expect("site taken from the plan's own site list");
            if insert_phase {
                outcome.insertions += 1;
            } else {
                outcome.aggregations += 1;
            }
        }
    }
    outcome
}

// ── Scoring a whole space ────────────────────────────────────

#[derive(Debug, Clone)]
pub struct ScoredSpace {
    pub setting: ConstraintSetting,
    /// Canonical keys in key order; aligned with `scores`.
    pub keys: Vec<CanonicalKey>,
    pub scores: Vec<ScoreTuple>,
}

/// Score every member of `space`, in canonical key order.
pub fn score_space(space: &PlanSpace, setting: ConstraintSetting) -> ScoredSpace {
    let keys: Vec<CanonicalKey> = space.keys().cloned().collect();
    let raw: Vec<RawScore> = space.members.values().map(raw_scores).collect();
    ScoredSpace {
        setting,
        keys,
        scores: normalize(&raw, setting),
    }
}

#[derive(Debug, Clone)]
pub struct Arbitration {
    pub plan: ArbitrationPlan,
    pub scored: ScoredSpace,
    pub pareto: Vec<usize>,
    pub selection: Selection,
}

impl Arbitration {
    pub fn first_key(&self) -> &CanonicalKey {
        &self.scored.keys[self.selection.first]
    }

    pub fn winner_keys(&self) -> impl Iterator<Item = &CanonicalKey> {
        self.selection.winners.iter().map(|&i| &self.scored.keys[i])
    }

    pub fn first_score(&self) -> &ScoreTuple {
        &self.scored.scores[self.selection.first]
    }

    /// Write the score report: a header block, then one tab-separated
    /// record per member in canonical key order.
    pub fn write_report<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# dialogue plan score report")?;
        writeln!(
            w,
            "# setting turn={} emph={}",
            self.scored.setting.turn, self.scored.setting.emph
        )?;
        writeln!(w, "# arbitration {}", self.plan)?;
        writeln!(w, "# members {}", self.scored.keys.len())?;
        writeln!(
            w,
            "key\traw_turns\traw_emph\ts_t\ts_e\tproduct\tsum\tpareto\twinner\tfirst"
        )?;
        for (i, (key, s)) in self.scored.keys.iter().zip(&self.scored.scores).enumerate() {
            writeln!(
                w,
                "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{}",
                key,
                s.raw_turns,
                s.raw_emph,
                s.s_t,
                s.s_e,
                s.product(),
                s.sum(),
                u8::from(self.pareto.contains(&i)),
                u8::from(self.selection.contains(i)),
                u8::from(self.selection.first == i),
            )?;
        }
        Ok(())
    }
}

/// Score `space` and select according to `plan`.
///
/// For the sequential baselines the winner is the member reached by
/// [`sequential_revise`] from the start plan.
pub fn arbitrate(
    space: &PlanSpace,
    setting: ConstraintSetting,
    plan: ArbitrationPlan,
) -> Arbitration {
    let scored = score_space(space, setting);
    let pareto = pareto_front(&scored.scores);
    let selection = match plan {
        ArbitrationPlan::Nash => nash_select(&scored.scores),
        ArbitrationPlan::Sum => sum_select(&scored.scores),
        ArbitrationPlan::ParetoAll => Selection::from_winners(pareto.clone()),
        ArbitrationPlan::SequentialInsertFirst | ArbitrationPlan::SequentialAggrFirst => {
            let order = if plan == ArbitrationPlan::SequentialInsertFirst {
                PhaseOrder::InsertFirst
            } else {
                PhaseOrder::AggrFirst
            };
            let out = sequential_revise(space.start_plan(), setting, order);
            let key = crate::search::canonical_form(&out.plan);
            let index = scored
                .keys
                .binary_search(&key)
                .expect("sequential outcome lies in the closure");
            Selection::from_winners(vec![index])
        }
    };
    Arbitration {
        plan,
        scored,
        pareto,
        selection,
    }
}
