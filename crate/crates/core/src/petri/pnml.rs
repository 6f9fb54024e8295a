//! Reader and writer for the PNML subset used by the engine:
//! `pnml/net/(page)/place|transition|arc`, `name/text`, `initialMarking/text`
//! and `inscription/text` (arc weight).

use std::fmt::Write as _;

use roxmltree::{Document, Node};
use serde::Serialize;

use super::{Arc, Marking, NetError, PetriNet, Place, Transition};

/// Something in the document that was ignored while reading it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PnmlWarning {
    pub line: u32,
    pub message: String,
}

pub fn parse_pnml(document: &str) -> Result<PetriNet, NetError> {
    parse_pnml_with_warnings(document).map(|(net, _)| net)
}

/// Parses a PNML document, returning the net and a warning for every
/// unknown element or attribute that was skipped.
pub fn parse_pnml_with_warnings(document: &str) -> Result<(PetriNet, Vec<PnmlWarning>), NetError> {
    let doc = Document::parse(document).map_err(|e| {
        let pos = e.pos();
        NetError::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let mut reader = Reader {
        doc: &doc,
        warnings: Vec::new(),
        places: Vec::new(),
        transitions: Vec::new(),
        arcs: Vec::new(),
        marking: Vec::new(),
    };

    let root = doc.root_element();
    let net = if root.tag_name().name() == "net" {
        root
    } else {
        if root.tag_name().name() != "pnml" {
            reader.warn(root, format!("unexpected root element <{}>", root.tag_name().name()));
        }
        reader.check_attributes(root, &[]);
        let mut nets = root.children().filter(|n| n.is_element());
        let mut first = None;
        for child in nets.by_ref() {
            if child.tag_name().name() == "net" {
                if first.is_none() {
                    first = Some(child);
                } else {
                    reader.warn(child, "additional <net> ignored; only the first net is read");
                }
            } else {
                reader.warn(child, format!("unknown element <{}> ignored", child.tag_name().name()));
            }
        }
        first.ok_or(NetError::NoNet)?
    };

    reader.check_attributes(net, &["id", "type"]);
    let id = net.attribute("id").unwrap_or("net").to_string();
    reader.read_container(net)?;

    let Reader {
        places,
        transitions,
        arcs,
        marking,
        mut warnings,
        ..
    } = reader;
    let initial: Marking = marking.into_iter().collect();
    let net = PetriNet::new(id, places, transitions, arcs, initial)?;
    warnings.sort_by_key(|w| w.line);
    Ok((net, warnings))
}

struct Reader<'a, 'input> {
    doc: &'a Document<'input>,
    warnings: Vec<PnmlWarning>,
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: Vec<Arc>,
    marking: Vec<(String, u32)>,
}

impl<'a, 'input> Reader<'a, 'input> {
    fn line(&self, node: Node) -> u32 {
        self.doc.text_pos_at(node.range().start).row
    }

    fn warn(&mut self, node: Node, message: impl Into<String>) {
        let line = self.line(node);
        self.warnings.push(PnmlWarning {
            line,
            message: message.into(),
        });
    }

    fn check_attributes(&mut self, node: Node, known: &[&str]) {
        for attr in node.attributes() {
            if attr.namespace().is_some() || known.contains(&attr.name()) {
                continue;
            }
            let message = format!(
                "unknown attribute `{}` on <{}> ignored",
                attr.name(),
                node.tag_name().name()
            );
            self.warn(node, message);
        }
    }

    fn required_id(&self, node: Node, attribute: &str) -> Result<String, NetError> {
        node.attribute(attribute)
            .map(str::to_string)
            .ok_or_else(|| NetError::MissingAttribute {
                element: node.tag_name().name().to_string(),
                attribute: attribute.to_string(),
                line: self.line(node),
            })
    }

    /// Reads places, transitions and arcs from a `<net>` or `<page>`.
    fn read_container(&mut self, container: Node<'a, 'input>) -> Result<(), NetError> {
        for child in container.children().filter(|n| n.is_element()) {
            match child.tag_name().name() {
                "place" => self.read_place(child)?,
                "transition" => self.read_transition(child)?,
                "arc" => self.read_arc(child)?,
                "page" => {
                    self.check_attributes(child, &["id"]);
                    self.read_container(child)?;
                }
                // Layout and tool data carry nothing the token game needs.
                "name" | "graphics" | "toolspecific" => {}
                other => {
                    let message = format!("unknown element <{other}> ignored");
                    self.warn(child, message);
                }
            }
        }
        Ok(())
    }

    fn read_place(&mut self, node: Node<'a, 'input>) -> Result<(), NetError> {
        self.check_attributes(node, &["id"]);
        let id = self.required_id(node, "id")?;
        let mut label = String::new();
        for child in node.children().filter(|n| n.is_element()) {
            match child.tag_name().name() {
                "name" => label = self.text_of(child),
                "initialMarking" => {
                    let raw = self.text_of(child);
                    let count = raw.trim().parse::<u32>().map_err(|_| NetError::InvalidMarking {
                        place: id.clone(),
                        value: raw.trim().to_string(),
                    })?;
                    self.marking.push((id.clone(), count));
                }
                "graphics" | "toolspecific" => {}
                other => {
                    let message = format!("unknown element <{other}> in place `{id}` ignored");
                    self.warn(child, message);
                }
            }
        }
        self.places.push(Place::new(id, label));
        Ok(())
    }

    fn read_transition(&mut self, node: Node<'a, 'input>) -> Result<(), NetError> {
        self.check_attributes(node, &["id"]);
        let id = self.required_id(node, "id")?;
        let mut label = String::new();
        for child in node.children().filter(|n| n.is_element()) {
            match child.tag_name().name() {
                "name" => label = self.text_of(child),
                "graphics" | "toolspecific" => {}
                other => {
                    let message = format!("unknown element <{other}> in transition `{id}` ignored");
                    self.warn(child, message);
                }
            }
        }
        self.transitions.push(Transition::new(id, label));
        Ok(())
    }

    fn read_arc(&mut self, node: Node<'a, 'input>) -> Result<(), NetError> {
        self.check_attributes(node, &["id", "source", "target"]);
        let id = self.required_id(node, "id")?;
        let source = self.required_id(node, "source")?;
        let target = self.required_id(node, "target")?;
        let mut weight = 1;
        for child in node.children().filter(|n| n.is_element()) {
            match child.tag_name().name() {
                "inscription" => {
                    let raw = self.text_of(child);
                    weight =
                        raw.trim()
                            .parse::<u32>()
                            .ok()
                            .filter(|w| *w >= 1)
                            .ok_or_else(|| NetError::InvalidWeight {
                                arc: id.clone(),
                                value: raw.trim().to_string(),
                            })?;
                }
                "graphics" | "toolspecific" => {}
                other => {
                    let message = format!("unknown element <{other}> in arc `{id}` ignored");
                    self.warn(child, message);
                }
            }
        }
        self.arcs.push(Arc {
            id,
            source,
            target,
            weight,
        });
        Ok(())
    }

    /// Text of the `<text>` child, or the element's own text when absent.
    fn text_of(&self, node: Node) -> String {
        node.children()
            .find(|n| n.is_element() && n.tag_name().name() == "text")
            .and_then(|t| t.text())
            .or_else(|| node.text())
            .unwrap_or("")
            .to_string()
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Serializes a net in the same PNML subset [`parse_pnml`] reads.
pub fn write_pnml(net: &PetriNet) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<pnml>\n");
    let _ = writeln!(out, "  <net id=\"{}\">", escape(net.id()));
    for place in net.places() {
        let _ = writeln!(out, "    <place id=\"{}\">", escape(&place.id));
        let _ = writeln!(out, "      <name><text>{}</text></name>", escape(&place.label));
        let tokens = net.initial_marking().get(&place.id);
        if tokens > 0 {
            let _ = writeln!(out, "      <initialMarking><text>{tokens}</text></initialMarking>");
        }
        out.push_str("    </place>\n");
    }
    for transition in net.transitions() {
        let _ = writeln!(out, "    <transition id=\"{}\">", escape(&transition.id));
        let _ = writeln!(out, "      <name><text>{}</text></name>", escape(&transition.label));
        out.push_str("    </transition>\n");
    }
    for arc in net.arcs() {
        let attrs = format!(
            "id=\"{}\" source=\"{}\" target=\"{}\"",
            escape(&arc.id),
            escape(&arc.source),
            escape(&arc.target)
        );
        if arc.weight == 1 {
            let _ = writeln!(out, "    <arc {attrs}/>");
        } else {
            let _ = writeln!(
                out,
                "    <arc {attrs}><inscription><text>{}</text></inscription></arc>",
                arc.weight
            );
        }
    }
    out.push_str("  </net>\n</pnml>\n");
    out
}
