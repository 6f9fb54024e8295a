#![allow(dead_code)]

use std::path::PathBuf;

use bldd_core::petri::{parse_pnml, Arc, Marking, PetriNet, Place, Transition};
use bldd_oracle::{LabeledNet, RefMarking, RefNet};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn payment() -> PetriNet {
    parse_pnml(&fixture("payment.pnml")).unwrap()
}

pub fn all_pnml_fixtures() -> Vec<(String, PetriNet)> {
    let mut out = Vec::new();
    let dir = fixture_path("");
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.extension().is_some_and(|e| e == "pnml") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let net = parse_pnml(&std::fs::read_to_string(&path).unwrap()).unwrap();
            out.push((name, net));
        }
    }
    out
}

/// Reference view of a net, built only from its public node and arc lists.
pub fn ref_net(net: &PetriNet) -> RefNet {
    let places: Vec<String> = net.places().iter().map(|p| p.id.clone()).collect();
    let transitions: Vec<String> = net.transitions().iter().map(|t| t.id.clone()).collect();
    let arcs: Vec<(String, String, u32)> = net
        .arcs()
        .iter()
        .map(|a| (a.source.clone(), a.target.clone(), a.weight))
        .collect();
    RefNet::new(&places, &transitions, &arcs)
}

pub fn to_ref(marking: &Marking) -> RefMarking {
    marking.marked_places().map(|(p, n)| (p.to_string(), n)).collect()
}

pub fn from_ref(marking: &RefMarking) -> Marking {
    marking.iter().map(|(p, n)| (p.clone(), *n)).collect()
}

pub fn labeled(net: &PetriNet) -> LabeledNet {
    LabeledNet {
        id: net.id().to_string(),
        places: net.places().iter().map(|p| (p.id.clone(), p.label.clone())).collect(),
        transitions: net
            .transitions()
            .iter()
            .map(|t| (t.id.clone(), t.label.clone()))
            .collect(),
        arcs: net
            .arcs()
            .iter()
            .map(|a| (a.source.clone(), a.target.clone()))
            .collect(),
    }
}

/// Engine net for a generated one, with a token on its source place.
pub fn from_labeled(net: &LabeledNet) -> PetriNet {
    let source = net
        .places
        .iter()
        .find(|(id, _)| !net.arcs.iter().any(|(_, t)| t == id))
        .map(|(id, _)| id.clone())
        .expect("generated nets have a source");
    PetriNet::new(
        net.id.clone(),
        net.places
            .iter()
            .map(|(id, l)| Place::new(id.clone(), l.clone()))
            .collect(),
        net.transitions
            .iter()
            .map(|(id, l)| Transition::new(id.clone(), l.clone()))
            .collect(),
        net.arcs
            .iter()
            .enumerate()
            .map(|(i, (s, t))| Arc::new(format!("a{i}"), s.clone(), t.clone()))
            .collect(),
        Marking::single(source),
    )
    .unwrap()
}
