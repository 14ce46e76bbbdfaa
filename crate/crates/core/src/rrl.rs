//! Reader and writer for the RRL-subset dialogue script format
//! (`.rrl.xml`).
//!
//! A script has four sections, in order: common ground (kept as an opaque
//! block), participants, dialogue acts (with the `adjacencyPair` extension
//! element) and temporal ordering. The grammar is documented in
//! `docs/rrl-subset.md`.
//!
//! Output is canonical: attributes sorted by name, two-space indentation,
//! acts in temporal order. `serialize(parse(x))` is a fixed point after one
//! pass.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use roxmltree::{Document, Node};
use thiserror::Error;

use crate::plan::{
    is_valid_id, ActId, ActType, AdjacencyPair, Condition, DialogueAct, DialoguePlan, OpaqueNode,
    PairId, PairOrigin, Participant, ParticipantId, Role, SemanticContent, Track, Violation,
};

pub const ROOT: &str = "dialogueScript";
pub const SECTIONS: [&str; 4] = [
    "commonGround",
    "participants",
    "dialogueActs",
    "temporalOrdering",
];

/// Where in the input a problem was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: u32,
    pub column: u32,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RrlError {
    #[error("input is not valid UTF-8: {0}")]
    Encoding(String),
    #[error("{at}: malformed markup: {message}")]
    Malformed { at: Location, message: String },
    #[error("{at}: unknown element <{name}> inside <{parent}>")]
    UnknownElement {
        at: Location,
        name: String,
        parent: String,
    },
    #[error("missing section <{0}>")]
    MissingSection(&'static str),
    #[error("{at}: section <{name}> out of order (expected <{expected}>)")]
    SectionOrder {
        at: Location,
        name: String,
        expected: &'static str,
    },
    #[error("{at}: <{element}> lacks required attribute {attr}")]
    MissingAttribute {
        at: Location,
        element: String,
        attr: &'static str,
    },
    #[error("{at}: <{element}> lacks required child <{child}>")]
    MissingChild {
        at: Location,
        element: String,
        child: &'static str,
    },
    #[error("{at}: <{element}> has invalid {attr}={value:?}")]
    InvalidValue {
        at: Location,
        element: String,
        attr: String,
        value: String,
    },
    #[error("{at}: unexpected text inside <{element}>")]
    UnexpectedText { at: Location, element: String },
    #[error("{at}: {from} refers to undeclared {to}")]
    DanglingReference {
        at: Location,
        from: String,
        to: String,
    },
    #[error("{at}: duplicate id {id}")]
    DuplicateId { at: Location, id: String },
    #[error("plan violates {} invariant(s): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("attribute key {0:?} cannot be placed on any emitted element")]
    UnplaceableAttribute(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

// ── Parsing ──────────────────────────────────────────────────

struct Reader<'a> {
    doc: &'a Document<'a>,
}

impl<'a> Reader<'a> {
    fn at(&self, node: Node) -> Location {
        let pos = self.doc.text_pos_at(node.range().start);
        Location {
            line: pos.row,
            column: pos.col,
        }
    }

    /// Element children; non-whitespace text is an error.
    fn children<'n>(&self, node: Node<'n, 'n>) -> Result<Vec<Node<'n, 'n>>, RrlError> {
        let mut out = Vec::new();
        for child in node.children() {
            if child.is_element() {
                out.push(child);
            } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
                return Err(RrlError::UnexpectedText {
                    at: self.at(child),
                    element: node.tag_name().name().to_owned(),
                });
            }
        }
        Ok(out)
    }

    fn unknown(&self, node: Node, parent: Node) -> RrlError {
        RrlError::UnknownElement {
            at: self.at(node),
            name: node.tag_name().name().to_owned(),
            parent: parent.tag_name().name().to_owned(),
        }
    }

    fn required(&self, node: Node, attr: &'static str) -> Result<String, RrlError> {
        node.attribute(attr)
            .map(str::to_owned)
            .ok_or_else(|| RrlError::MissingAttribute {
                at: self.at(node),
                element: node.tag_name().name().to_owned(),
                attr,
            })
    }

    fn required_id(&self, node: Node, attr: &'static str) -> Result<String, RrlError> {
        let value = self.required(node, attr)?;
        if is_valid_id(&value) {
            Ok(value)
        } else {
            Err(self.invalid(node, attr, &value))
        }
    }

    fn invalid(&self, node: Node, attr: &str, value: &str) -> RrlError {
        RrlError::InvalidValue {
            at: self.at(node),
            element: node.tag_name().name().to_owned(),
            attr: attr.to_owned(),
            value: value.to_owned(),
        }
    }

    /// Attributes not in `known`, stored as `element@attribute`.
    fn stash_extra(&self, node: Node, known: &[&str], extra: &mut BTreeMap<String, String>) {
        let element = node.tag_name().name();
        for a in node.attributes() {
            if !known.contains(&a.name()) {
                extra.insert(format!("{element}@{}", a.name()), a.value().to_owned());
            }
        }
    }

    /// The single element child of `node`, which must be named `name`.
    fn only_child<'n>(
        &self,
        node: Node<'n, 'n>,
        name: &'static str,
    ) -> Result<Node<'n, 'n>, RrlError> {
        let children = self.children(node)?;
        match children.as_slice() {
            [] => Err(RrlError::MissingChild {
                at: self.at(node),
                element: node.tag_name().name().to_owned(),
                child: name,
            }),
            [only] if only.tag_name().name() == name => Ok(*only),
            nodes => {
                // Either a foreign element or a repeated one.
                let bad = nodes
                    .iter()
                    .find(|n| n.tag_name().name() != name)
                    .unwrap_or(&nodes[1]);
                Err(self.unknown(*bad, node))
            }
        }
    }

    fn opaque(&self, node: Node) -> Result<OpaqueNode, RrlError> {
        let mut out = OpaqueNode::new(node.tag_name().name());
        for a in node.attributes() {
            out.attrs.insert(a.name().to_owned(), a.value().to_owned());
        }
        let elements: Vec<Node> = node.children().filter(Node::is_element).collect();
        if elements.is_empty() {
            let text: String = node.children().filter_map(|c| c.text()).collect();
            if !text.trim().is_empty() {
                out.text = Some(text);
            }
        } else {
            for child in self.children(node)? {
                out.children.push(self.opaque(child)?);
            }
        }
        Ok(out)
    }

    fn boolean(&self, node: Node, attr: &str) -> Result<Option<bool>, RrlError> {
        match node.attribute(attr) {
            None => Ok(None),
            Some("true") => Ok(Some(true)),
            Some("false") => Ok(Some(false)),
            Some(other) => Err(self.invalid(node, attr, other)),
        }
    }

    fn person(&self, node: Node) -> Result<Participant, RrlError> {
        let id = self.required_id(node, "id")?;
        let mut name = node.attribute("name").map(str::to_owned);
        let mut role = None;
        let mut traits = BTreeMap::new();
        let mut extra = BTreeMap::new();
        let mut payload = Vec::new();
        self.stash_extra(node, &["id", "name"], &mut extra);
        for child in self.children(node)? {
            match child.tag_name().name() {
                "domainSpecificAttr" => {
                    if let Some(r) = child.attribute("role") {
                        role = Some(
                            Role::from_token(r).ok_or_else(|| self.invalid(child, "role", r))?,
                        );
                    }
                    self.stash_extra(child, &["role"], &mut extra);
                }
                "personality" => {
                    for a in child.attributes() {
                        match a.value().parse::<f64>() {
                            Ok(v) if v.is_finite() => {
                                traits.insert(a.name().to_owned(), v);
                            }
                            _ => {
                                extra.insert(
                                    format!("personality@{}", a.name()),
                                    a.value().to_owned(),
                                );
                            }
                        }
                    }
                }
                _ => {
                    if name.is_none() && child.tag_name().name() == "realname" {
                        name = child.attribute("firstname").map(str::to_owned);
                    }
                    payload.push(self.opaque(child)?);
                }
            }
        }
        let role = role.ok_or_else(|| RrlError::MissingAttribute {
            at: self.at(node),
            element: "person/domainSpecificAttr".to_owned(),
            attr: "role",
        })?;
        Ok(Participant {
            name: name.unwrap_or_else(|| id.clone()),
            id: ParticipantId::new(id),
            role,
            traits,
            extra,
            payload,
        })
    }

    fn condition(&self, node: Node) -> Result<Condition, RrlError> {
        let name = node.tag_name().name();
        let predicate = self.required(node, "pred")?;
        let polarity = self.boolean(node, "polarity")?.unwrap_or(true);
        let (known, args): (&[&str], Vec<String>) = match name {
            "unaryCond" => (&["argOne"], vec![self.required(node, "argOne")?]),
            "binaryCond" => (
                &["argOne", "argTwo"],
                vec![
                    self.required(node, "argOne")?,
                    self.required(node, "argTwo")?,
                ],
            ),
            "ternaryCond" => (
                &["argOne", "argTwo", "argThree"],
                vec![
                    self.required(node, "argOne")?,
                    self.required(node, "argTwo")?,
                    self.required(node, "argThree")?,
                ],
            ),
            "cond" => (
                &["args"],
                self.required(node, "args")?
                    .split_whitespace()
                    .map(str::to_owned)
                    .collect(),
            ),
            _ => unreachable!("caller matches condition element names"),
        };
        for a in node.attributes() {
            let n = a.name();
            if !(known.contains(&n) || n == "pred" || n == "polarity" || n == "id") {
                return Err(self.invalid(node, n, a.value()));
            }
        }
        if args.is_empty() {
            return Err(self.invalid(node, "args", ""));
        }
        Ok(Condition {
            predicate,
            args,
            polarity,
        })
    }

    fn content(
        &self,
        node: Node,
        extra: &mut BTreeMap<String, String>,
    ) -> Result<SemanticContent, RrlError> {
        self.stash_extra(node, &[], extra);
        let drs = self.only_child(node, "drs")?;
        let drs_id = self.required(drs, "id")?;
        self.stash_extra(drs, &["id"], extra);
        let mut conditions = Vec::new();
        for cond in self.children(drs)? {
            match cond.tag_name().name() {
                "unaryCond" | "binaryCond" | "ternaryCond" | "cond" => {
                    conditions.push(self.condition(cond)?)
                }
                _ => return Err(self.unknown(cond, drs)),
            }
        }
        Ok(SemanticContent { drs_id, conditions })
    }

    fn act(&self, node: Node) -> Result<DialogueAct, RrlError> {
        let id = self.required_id(node, "id")?;
        let mut extra = BTreeMap::new();
        self.stash_extra(node, &["id", "track", "emphasis"], &mut extra);
        let emphasis = self.boolean(node, "emphasis")?.unwrap_or(false);
        let track = node
            .attribute("track")
            .map(|t| Track::from_token(t).ok_or_else(|| self.invalid(node, "track", t)))
            .transpose()?;

        let mut act_type = None;
        let mut speaker = None;
        let mut addressee = None;
        let mut content = None;
        let mut reaction_to = None;
        let mut payload = Vec::new();
        for child in self.children(node)? {
            match child.tag_name().name() {
                "domainSpecificAttr" => {
                    let t = self.required(child, "type")?;
                    act_type = Some(
                        ActType::from_token(&t).ok_or_else(|| self.invalid(child, "type", &t))?,
                    );
                    self.stash_extra(child, &["type"], &mut extra);
                }
                "speaker" => {
                    speaker = Some(self.required_id(child, "id")?);
                    self.stash_extra(child, &["id"], &mut extra);
                }
                "addressee" => {
                    addressee = Some(self.required_id(child, "id")?);
                    self.stash_extra(child, &["id"], &mut extra);
                }
                "semanticContent" => content = Some(self.content(child, &mut extra)?),
                "reactionTo" => {
                    reaction_to = Some(ActId::new(self.required_id(child, "id")?));
                    self.stash_extra(child, &["id"], &mut extra);
                }
                _ => payload.push(self.opaque(child)?),
            }
        }
        let missing = |child: &'static str| RrlError::MissingChild {
            at: self.at(node),
            element: format!("dialogueAct {id}"),
            child,
        };
        let act_type = act_type.ok_or_else(|| missing("domainSpecificAttr"))?;
        let speaker = speaker.ok_or_else(|| missing("speaker"))?;
        let addressee = addressee.ok_or_else(|| missing("addressee"))?;
        let mut act = DialogueAct::new(id, act_type, speaker, addressee);
        if let Some(track) = track {
            act.track = track;
        }
        act.content = content;
        act.reaction_to = reaction_to;
        act.emphasis = emphasis;
        act.extra = extra;
        act.payload = payload;
        Ok(act)
    }

    fn pair(&self, node: Node) -> Result<AdjacencyPair, RrlError> {
        for a in node.attributes() {
            if !["id", "first", "second", "dimension", "origin"].contains(&a.name()) {
                return Err(self.invalid(node, a.name(), a.value()));
            }
        }
        let origin = match node.attribute("origin") {
            None => PairOrigin::Planner,
            Some(o) => PairOrigin::from_token(o).ok_or_else(|| self.invalid(node, "origin", o))?,
        };
        Ok(AdjacencyPair {
            id: PairId::new(self.required_id(node, "id")?),
            first: ActId::new(self.required_id(node, "first")?),
            second: ActId::new(self.required_id(node, "second")?),
            value_dimension: self.required_id(node, "dimension")?,
            origin,
        })
    }
}

/// Parse an RRL-subset document into a validated plan.
pub fn parse(input: &[u8]) -> Result<DialoguePlan, RrlError> {
    let text = std::str::from_utf8(input).map_err(|e| RrlError::Encoding(e.to_string()))?;
    let doc = Document::parse(text).map_err(|e| {
        let pos = e.pos();
        RrlError::Malformed {
            at: Location {
                line: pos.row,
                column: pos.col,
            },
            message: e.to_string(),
        }
    })?;
    let r = Reader { doc: &doc };
    let root = doc.root_element();
    if root.tag_name().name() != ROOT {
        return Err(RrlError::UnknownElement {
            at: r.at(root),
            name: root.tag_name().name().to_owned(),
            parent: "document".to_owned(),
        });
    }
    if let Some(a) = root.attributes().next() {
        return Err(r.invalid(root, a.name(), a.value()));
    }

    let sections = r.children(root)?;
    for (i, node) in sections.iter().enumerate() {
        let name = node.tag_name().name();
        let Some(pos) = SECTIONS.iter().position(|s| *s == name) else {
            return Err(r.unknown(*node, root));
        };
        if pos != i {
            return Err(RrlError::SectionOrder {
                at: r.at(*node),
                name: name.to_owned(),
                expected: SECTIONS.get(i).copied().unwrap_or("end of script"),
            });
        }
    }
    if let Some(missing) = SECTIONS.get(sections.len()) {
        return Err(RrlError::MissingSection(missing));
    }
    let [common, participants, acts_section, ordering] =
        [sections[0], sections[1], sections[2], sections[3]];

    let mut plan = DialoguePlan::default();
    for child in r.children(common)? {
        plan.common_ground.push(r.opaque(child)?);
    }

    let mut participant_ids = HashSet::new();
    for child in r.children(participants)? {
        if child.tag_name().name() != "person" {
            return Err(r.unknown(child, participants));
        }
        let p = r.person(child)?;
        if !participant_ids.insert(p.id.clone()) {
            return Err(RrlError::DuplicateId {
                at: r.at(child),
                id: p.id.to_string(),
            });
        }
        plan.participants.push(p);
    }

    let mut act_nodes = Vec::new();
    let mut pair_ids = HashSet::new();
    let mut pair_nodes = Vec::new();
    for child in r.children(acts_section)? {
        match child.tag_name().name() {
            "dialogueAct" => {
                let act = r.act(child)?;
                if plan.acts.contains_key(&act.id) {
                    return Err(RrlError::DuplicateId {
                        at: r.at(child),
                        id: act.id.to_string(),
                    });
                }
                act_nodes.push((child, act.id.clone()));
                plan.acts.insert(act.id.clone(), act);
            }
            "adjacencyPair" => {
                let pair = r.pair(child)?;
                if !pair_ids.insert(pair.id.clone()) {
                    return Err(RrlError::DuplicateId {
                        at: r.at(child),
                        id: pair.id.to_string(),
                    });
                }
                pair_nodes.push(child);
                plan.pairs.push(pair);
            }
            _ => return Err(r.unknown(child, acts_section)),
        }
    }

    let sequence = r.only_child(ordering, "sequence")?;
    for child in r.children(sequence)? {
        if child.tag_name().name() != "act" {
            return Err(r.unknown(child, sequence));
        }
        let id = ActId::new(r.required_id(child, "id")?);
        if !plan.acts.contains_key(&id) {
            return Err(RrlError::DanglingReference {
                at: r.at(child),
                from: "temporalOrdering".to_owned(),
                to: format!("act {id}"),
            });
        }
        plan.ordering.push(id);
    }

    // Cross references.
    for (node, id) in &act_nodes {
        let act = &plan.acts[id];
        for who in [&act.speaker, &act.addressee] {
            if !participant_ids.contains(who) {
                return Err(RrlError::DanglingReference {
                    at: r.at(*node),
                    from: format!("act {id}"),
                    to: format!("participant {who}"),
                });
            }
        }
        if let Some(target) = &act.reaction_to {
            if !plan.acts.contains_key(target) {
                return Err(RrlError::DanglingReference {
                    at: r.at(*node),
                    from: format!("act {id}"),
                    to: format!("act {target}"),
                });
            }
        }
    }
    for (node, pair) in pair_nodes.iter().zip(&plan.pairs) {
        for part in [&pair.first, &pair.second] {
            if !plan.acts.contains_key(part) {
                return Err(RrlError::DanglingReference {
                    at: r.at(*node),
                    from: format!("pair {}", pair.id),
                    to: format!("act {part}"),
                });
            }
        }
    }

    let violations = plan.validate();
    if violations.is_empty() {
        Ok(plan)
    } else {
        Err(RrlError::Invalid(violations))
    }
}

// ── Serialization ────────────────────────────────────────────

fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

fn is_xml_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

type Attrs = BTreeMap<String, String>;

struct Writer {
    out: String,
    depth: usize,
}

impl Writer {
    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
    }

    fn tag(&mut self, name: &str, attrs: &Attrs) {
        self.out.push('<');
        self.out.push_str(name);
        for (k, v) in attrs {
            let _ = write!(self.out, " {k}=\"{}\"", escape(v));
        }
    }

    fn empty(&mut self, name: &str, attrs: &Attrs) {
        self.indent();
        self.tag(name, attrs);
        self.out.push_str("/>\n");
    }

    fn open(&mut self, name: &str, attrs: &Attrs) {
        self.indent();
        self.tag(name, attrs);
        self.out.push_str(">\n");
        self.depth += 1;
    }

    fn close(&mut self, name: &str) {
        self.depth -= 1;
        self.indent();
        let _ = writeln!(self.out, "</{name}>");
    }

    /// `<name>` holding `children`, self-closing when there are none.
    fn section<T>(&mut self, name: &str, children: &[T], mut each: impl FnMut(&mut Self, &T)) {
        if children.is_empty() {
            self.empty(name, &Attrs::new());
        } else {
            self.open(name, &Attrs::new());
            for c in children {
                each(self, c);
            }
            self.close(name);
        }
    }

    fn opaque(&mut self, node: &OpaqueNode) {
        if let Some(text) = &node.text {
            self.indent();
            self.tag(&node.name, &node.attrs);
            let _ = writeln!(self.out, ">{}</{}>", escape(text), node.name);
        } else if node.children.is_empty() {
            self.empty(&node.name, &node.attrs);
        } else {
            self.open(&node.name, &node.attrs);
            for c in &node.children {
                self.opaque(c);
            }
            self.close(&node.name);
        }
    }
}

fn attrs<const N: usize>(pairs: [(&str, &str); N]) -> Attrs {
    pairs
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}

/// Distribute `element@attribute` keys onto the named elements.
fn place_extra(
    extra: &BTreeMap<String, String>,
    targets: &mut [(&str, &mut Attrs)],
) -> Result<(), RrlError> {
    for (key, value) in extra {
        let unplaceable = || RrlError::UnplaceableAttribute(key.clone());
        let (element, attr) = key.split_once('@').ok_or_else(unplaceable)?;
        if !is_xml_name(attr) {
            return Err(unplaceable());
        }
        let (_, target) = targets
            .iter_mut()
            .find(|(name, _)| *name == element)
            .ok_or_else(unplaceable)?;
        if target.insert(attr.to_owned(), value.clone()).is_some() {
            return Err(unplaceable());
        }
    }
    Ok(())
}

fn condition_element(c: &Condition) -> (&'static str, Attrs) {
    let mut a = Attrs::new();
    a.insert("pred".to_owned(), c.predicate.clone());
    if !c.polarity {
        a.insert("polarity".to_owned(), "false".to_owned());
    }
    let name = match c.args.as_slice() {
        [one] => {
            a.insert("argOne".to_owned(), one.clone());
            "unaryCond"
        }
        [one, two] => {
            a.insert("argOne".to_owned(), one.clone());
            a.insert("argTwo".to_owned(), two.clone());
            "binaryCond"
        }
        [one, two, three] => {
            a.insert("argOne".to_owned(), one.clone());
            a.insert("argTwo".to_owned(), two.clone());
            a.insert("argThree".to_owned(), three.clone());
            "ternaryCond"
        }
        args => {
            a.insert("args".to_owned(), args.join(" "));
            "cond"
        }
    };
    (name, a)
}

fn write_person(w: &mut Writer, p: &Participant) -> Result<(), RrlError> {
    let mut person = attrs([("id", p.id.as_str()), ("name", &p.name)]);
    let mut dsa = attrs([("role", p.role.as_str())]);
    let mut personality: Attrs = p
        .traits
        .iter()
        .map(|(k, v)| (k.clone(), v.to_string()))
        .collect();
    place_extra(
        &p.extra,
        &mut [
            ("person", &mut person),
            ("domainSpecificAttr", &mut dsa),
            ("personality", &mut personality),
        ],
    )?;
    w.open("person", &person);
    w.empty("domainSpecificAttr", &dsa);
    if !personality.is_empty() {
        w.empty("personality", &personality);
    }
    for node in &p.payload {
        w.opaque(node);
    }
    w.close("person");
    Ok(())
}

fn write_act(w: &mut Writer, act: &DialogueAct) -> Result<(), RrlError> {
    let mut head = attrs([("id", act.id.as_str()), ("track", act.track.as_str())]);
    if act.emphasis {
        head.insert("emphasis".to_owned(), "true".to_owned());
    }
    let mut dsa = attrs([("type", act.act_type.as_str())]);
    let mut speaker = attrs([("id", act.speaker.as_str())]);
    let mut addressee = attrs([("id", act.addressee.as_str())]);
    let mut content = Attrs::new();
    let mut drs = Attrs::new();
    let mut reaction = Attrs::new();
    if let Some(c) = &act.content {
        drs.insert("id".to_owned(), c.drs_id.clone());
    }
    if let Some(r) = &act.reaction_to {
        reaction.insert("id".to_owned(), r.to_string());
    }
    {
        let mut targets: Vec<(&str, &mut Attrs)> = vec![
            ("dialogueAct", &mut head),
            ("domainSpecificAttr", &mut dsa),
            ("speaker", &mut speaker),
            ("addressee", &mut addressee),
        ];
        if act.content.is_some() {
            targets.push(("semanticContent", &mut content));
            targets.push(("drs", &mut drs));
        }
        if act.reaction_to.is_some() {
            targets.push(("reactionTo", &mut reaction));
        }
        place_extra(&act.extra, &mut targets)?;
    }

    w.open("dialogueAct", &head);
    w.empty("domainSpecificAttr", &dsa);
    w.empty("speaker", &speaker);
    w.empty("addressee", &addressee);
    if let Some(c) = &act.content {
        w.open("semanticContent", &content);
        if c.conditions.is_empty() {
            w.empty("drs", &drs);
        } else {
            w.open("drs", &drs);
            for cond in &c.conditions {
                let (name, a) = condition_element(cond);
                w.empty(name, &a);
            }
            w.close("drs");
        }
        w.close("semanticContent");
    }
    if act.reaction_to.is_some() {
        w.empty("reactionTo", &reaction);
    }
    for node in &act.payload {
        w.opaque(node);
    }
    w.close("dialogueAct");
    Ok(())
}

/// Serialize a valid plan to canonical RRL-subset markup.
pub fn serialize(plan: &DialoguePlan) -> Result<Vec<u8>, RrlError> {
    let violations = plan.validate();
    if !violations.is_empty() {
        return Err(RrlError::Invalid(violations));
    }
    let mut w = Writer {
        out: String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"),
        depth: 0,
    };
    w.open(ROOT, &Attrs::new());

    w.section("commonGround", &plan.common_ground, |w, n| w.opaque(n));

    let mut failure = None;
    w.section("participants", &plan.participants, |w, p| {
        if let Err(e) = write_person(w, p) {
            failure.get_or_insert(e);
        }
    });

    let acts: Vec<&DialogueAct> = plan.acts_in_order().collect();
    if acts.is_empty() && plan.pairs.is_empty() {
        w.empty("dialogueActs", &Attrs::new());
    } else {
        w.open("dialogueActs", &Attrs::new());
        for act in acts {
            if let Err(e) = write_act(&mut w, act) {
                failure.get_or_insert(e);
            }
        }
        for pair in &plan.pairs {
            w.empty(
                "adjacencyPair",
                &attrs([
                    ("id", pair.id.as_str()),
                    ("first", pair.first.as_str()),
                    ("second", pair.second.as_str()),
                    ("dimension", &pair.value_dimension),
                    ("origin", pair.origin.as_str()),
                ]),
            );
        }
        w.close("dialogueActs");
    }
    if let Some(e) = failure {
        return Err(e);
    }

    w.open("temporalOrdering", &Attrs::new());
    w.section("sequence", &plan.ordering, |w, id| {
        w.empty("act", &attrs([("id", id.as_str())]));
    });
    w.close("temporalOrdering");
    w.close(ROOT);
    Ok(w.out.into_bytes())
}
