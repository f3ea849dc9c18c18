//! Embedded presentation and periodic-graph documents.

use crate::graphs::{parse_periodic_graph, PeriodicGraph};
use crate::presentations::{parse_presentation, Presentation};

pub const PRESENTATIONS: &[(&str, &str)] = &[
    ("zd2", include_str!("../presets/zd2.json")),
    ("zd3", include_str!("../presets/zd3.json")),
    ("tree3", include_str!("../presets/tree3.json")),
    ("free2", include_str!("../presets/free2.json")),
    ("heisenberg", include_str!("../presets/heisenberg.json")),
    ("square_octagon", include_str!("../presets/square_octagon.json")),
    ("hexagonal", include_str!("../presets/hexagonal.json")),
    ("dihedral", include_str!("../presets/dihedral.json")),
    ("higman", include_str!("../presets/higman.json")),
    ("sl2z", include_str!("../presets/sl2z.json")),
    ("lamplighter", include_str!("../presets/lamplighter.json")),
];

pub const PERIODIC_GRAPHS: &[(&str, &str)] = &[
    ("zd2", include_str!("../presets/zd2_pg.json")),
    ("dihedral_line", include_str!("../presets/dihedral_line.json")),
    ("hexagonal", include_str!("../presets/hexagonal_pg.json")),
    ("square_octagon", include_str!("../presets/square_octagon_pg.json")),
];

pub fn presentation_text(name: &str) -> Option<&'static str> {
    PRESENTATIONS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn periodic_text(name: &str) -> Option<&'static str> {
    PERIODIC_GRAPHS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parsed embedded presentation. Panics on an unknown name; the embedded
/// documents are covered by tests.
pub fn presentation(name: &str) -> Presentation {
    let text = presentation_text(name).unwrap_or_else(|| panic!("no presentation preset `{name}`"));
    parse_presentation(text).expect("embedded presentation is valid")
}

pub fn periodic(name: &str) -> PeriodicGraph {
    let text = periodic_text(name).unwrap_or_else(|| panic!("no periodic preset `{name}`"));
    parse_periodic_graph(text).expect("embedded periodic graph is valid")
}
