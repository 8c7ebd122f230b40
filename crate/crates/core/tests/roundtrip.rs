use fluidic::library::{build_gate, GateKind, ModuleParams};
use fluidic::network::{validate, Netlist};
use fluidic::synthesis::{synthesize, TruthTable};
use fluidic::trace::Trace;
use fluidic::solver::{simulate, SolverConfig};

#[test]
fn builder_output_reparses_identically() {
    let params = ModuleParams::default();
    let mut netlists: Vec<Netlist> = GateKind::ALL.iter().map(|k| build_gate(*k, &params).unwrap()).collect();
    for table in TruthTable::all(2).unwrap() {
        netlists.push(synthesize(&table, &params).unwrap().netlist);
    }
    for n in netlists {
        let text = n.to_json();
        let back = Netlist::from_json(&text).unwrap();
        assert_eq!(back, n);
        assert_eq!(back.to_json(), text);
        assert!(validate(&back).is_empty());
    }
}

#[test]
fn trace_csv_reparses_exactly() {
    let n = build_gate(GateKind::Nand, &ModuleParams::default()).unwrap();
    let sim = simulate(&n, &SolverConfig { t_end: 1.2, ..SolverConfig::default() }).unwrap();
    let csv = sim.trace.to_csv();
    assert_eq!(Trace::from_csv(&csv).unwrap(), sim.trace);
}

#[test]
fn schema_mismatch_is_a_parse_error() {
    let n = build_gate(GateKind::And, &ModuleParams::default()).unwrap();
    let text = n.to_json().replace("fluidic-netlist/1", "fluidic-netlist/9");
    assert!(matches!(Netlist::from_json(&text), Err(fluidic::Error::Parse(_))));
    assert!(matches!(Netlist::from_json("{"), Err(fluidic::Error::Parse(_))));
}
