#![allow(dead_code)]

pub mod enumerator;

use gavf_core::model::{parse_net_json, TcpNet};

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn flight_net() -> TcpNet {
    parse_net_json(&fixture("flight.json")).expect("flight fixture parses")
}

use gavf_core::simulation::GeneratorParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetClass {
    CpOnly,
    WithIArcs,
    WithCiArcs,
}

pub const CLASSES: [NetClass; 3] = [NetClass::CpOnly, NetClass::WithIArcs, NetClass::WithCiArcs];

pub fn class_params(class: NetClass, variable_count: [usize; 2]) -> GeneratorParams {
    let base = GeneratorParams {
        variable_count,
        ..GeneratorParams::default()
    };
    match class {
        NetClass::CpOnly => base,
        NetClass::WithIArcs => GeneratorParams {
            i_arc_count: [1, 3],
            ..base
        },
        NetClass::WithCiArcs => GeneratorParams {
            cp_edge_probability: 0.3,
            i_arc_count: [0, 2],
            ci_arc_count: [1, 2],
            selector_size_max: 2,
            ..base
        },
    }
}
