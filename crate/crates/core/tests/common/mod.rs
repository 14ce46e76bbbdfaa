//! Random valid plans for the integration tests.

#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use dialogue_revision::plan::{
    ActType, Condition, DialogueAct, DialoguePlan, OpaqueNode, PairOrigin, Participant,
    PlanBuilder, Role,
};
use dialogue_revision::revision;
use dialogue_revision::rrl;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> DialoguePlan {
    let bytes = fs::read(fixture_path(name)).unwrap();
    rrl::parse(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const FEATURES: [&str; 6] = [
    "airbags",
    "abs",
    "leather_seats",
    "air_conditioning",
    "sunroof",
    "alloy_wheels",
];
const DIMENSIONS: [&str; 3] = ["security", "comfort", "economy"];

fn condition(rng: &mut ChaCha8Rng) -> Condition {
    let c = if rng.gen_bool(0.2) {
        Condition::new(
            "property",
            ["x_1", *["comfortable", "fast", "safe"].choose(rng).unwrap()],
        )
    } else {
        Condition::new("attribute", ["x_1", FEATURES.choose(rng).unwrap(), "true"])
    };
    if rng.gen_bool(0.1) {
        c.negated()
    } else {
        c
    }
}

fn conditions(rng: &mut ChaCha8Rng) -> Vec<Condition> {
    (0..rng.gen_range(1..=2)).map(|_| condition(rng)).collect()
}

/// A valid planner-output plan with 1..=`max_pairs` pairs and at most
/// `max_marks` emphasis marks.
pub fn random_plan(rng: &mut ChaCha8Rng, max_pairs: usize, max_marks: usize) -> DialoguePlan {
    let mut b = PlanBuilder::new()
        .participant(Participant::new("ritchie", "Ritchie", Role::Seller))
        .participant(Participant::new("tina", "Tina", Role::Customer));
    let sam = rng.gen_bool(0.2);
    if sam {
        b = b.participant(Participant::new("sam", "Sam", Role::Customer));
    }
    let asker = |rng: &mut ChaCha8Rng| {
        if sam && rng.gen_bool(0.3) {
            "sam"
        } else {
            "tina"
        }
    };

    // Small pools make aggregation sites common.
    let dims = &DIMENSIONS[..rng.gen_range(1..=DIMENSIONS.len())];
    let frames = rng.gen_range(1..=3);

    let mut n = 0;
    let mut id = |prefix: &str| {
        n += 1;
        format!("{prefix}_{n}")
    };
    if rng.gen_bool(0.5) {
        b = b.act(DialogueAct::new(id("v"), ActType::Greet, "ritchie", "tina"));
    }
    let mut content_acts = Vec::new();
    for k in 0..rng.gen_range(1..=max_pairs) {
        let (first, second) = match rng.gen_range(0..frames) {
            0 => {
                let who = asker(rng);
                let c = conditions(rng);
                (
                    DialogueAct::new(id("v"), ActType::Question, who, "ritchie")
                        .with_content(id("d"), c.clone()),
                    DialogueAct::new(id("v"), ActType::Inform, "ritchie", who)
                        .with_content(id("d"), c),
                )
            }
            1 => (
                DialogueAct::new(id("v"), ActType::Inform, "ritchie", "tina")
                    .with_content(id("d"), conditions(rng)),
                DialogueAct::new(id("v"), ActType::Inform, "ritchie", "tina")
                    .with_content(id("d"), conditions(rng)),
            ),
            _ => (
                DialogueAct::new(id("v"), ActType::Inform, "tina", "ritchie")
                    .with_content(id("d"), conditions(rng)),
                DialogueAct::new(id("v"), ActType::Acknowledge, "ritchie", "tina"),
            ),
        };
        if first.content.is_some() {
            content_acts.push(first.id.clone());
        }
        if second.content.is_some() {
            content_acts.push(second.id.clone());
        }
        b = b.pair(
            format!("p_{k}"),
            first,
            second,
            *dims.choose(rng).unwrap(),
            PairOrigin::Planner,
        );
        if rng.gen_bool(0.1) {
            b = b.act(DialogueAct::new(
                id("v"),
                ActType::Acknowledge,
                "tina",
                "ritchie",
            ));
        }
    }
    let mut plan = b.build().expect("generator builds valid plans");

    let marks = rng.gen_range(0..=max_marks.min(content_acts.len()));
    for act in content_acts.choose_multiple(rng, marks) {
        plan.acts.get_mut(act).unwrap().emphasis = true;
    }
    assert!(plan.is_valid(), "{:?}", plan.validate());
    plan
}

/// Decorate a plan with the opaque payloads the file format carries.
pub fn with_payload(rng: &mut ChaCha8Rng, mut plan: DialoguePlan) -> DialoguePlan {
    if rng.gen_bool(0.5) {
        plan.common_ground.push(
            OpaqueNode::new("entity")
                .with_attr("id", "x_1")
                .with_attr("type", "car"),
        );
        let mut label = OpaqueNode::new("label");
        label.text = Some("a car & <its> \"name\"".to_owned());
        plan.common_ground.push(label);
    }
    for p in &mut plan.participants {
        if rng.gen_bool(0.5) {
            p.traits.insert(
                "extraversion".into(),
                f64::from(rng.gen_range(0..=10u8)) / 10.0,
            );
            p.traits
                .insert("agreeableness".into(), rng.gen_range(0.0..=1.0));
            p.extra
                .insert("personality@politeness".into(), "polite".into());
            p.extra.insert(
                "domainSpecificAttr@x-position".into(),
                rng.gen_range(0..400).to_string(),
            );
            let mut voice = OpaqueNode::new("voice").with_attr("name", "us2");
            voice
                .children
                .push(OpaqueNode::new("prosody").with_attr("pitch", "-20"));
            p.payload.push(voice);
        }
    }
    for act in plan.acts.values_mut() {
        if rng.gen_bool(0.2) {
            act.extra
                .insert("dialogueAct@mood".into(), "cheerful".into());
            act.extra.insert("speaker@gaze".into(), "addressee".into());
            if act.content.is_some() {
                act.extra
                    .insert("semanticContent@id".into(), format!("s_{}", act.id));
            }
            act.payload
                .push(OpaqueNode::new("gesture").with_attr("kind", "nod"));
        }
    }
    plan
}

/// Apply up to `steps` randomly chosen revisions.
pub fn random_revised(rng: &mut ChaCha8Rng, mut plan: DialoguePlan, steps: usize) -> DialoguePlan {
    for _ in 0..steps {
        let options = revision::revisions(&plan);
        let Some(r) = options.choose(rng) else { break };
        plan = revision::apply(&plan, r).unwrap();
    }
    plan
}
