use fluidic::library::{build_gate, GateKind, ModuleParams};
use fluidic::solver::{simulate, Simulation, SolverConfig, Splitting};
use fluidic::Error;

fn and_run(dt: f64, stride: usize, splitting: Splitting) -> Simulation {
    let n = build_gate(GateKind::And, &ModuleParams::default()).unwrap();
    let config = SolverConfig {
        dt: Some(dt),
        cfl: 1.0,
        t_end: 3.5,
        splitting,
        record_stride: Some(stride),
        ..SolverConfig::default()
    };
    simulate(&n, &config).unwrap()
}

fn gap(dt: f64, stride: usize) -> f64 {
    let lie = and_run(dt, stride, Splitting::Lie);
    let strang = and_run(dt, stride, Splitting::Strang);
    assert_eq!(lie.trace.times.len(), strang.trace.times.len());
    let (a, b) = (lie.trace.column("out", "O").unwrap(), strang.trace.column("out", "O").unwrap());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn lie_strang_gap_shrinks_with_dt() {
    let coarse = gap(1e-4, 10);
    let fine = gap(5e-5, 20);
    assert!(coarse > 0.0);
    assert!(fine < coarse, "gap {coarse} -> {fine}");
}

#[test]
fn oversized_dt_names_channel_and_bound() {
    let n = build_gate(GateKind::Xor, &ModuleParams::default()).unwrap();
    let config = SolverConfig { dt: Some(1e-3), ..SolverConfig::default() };
    match simulate(&n, &config) {
        Err(Error::Stability { channel, dt, bound }) => {
            assert_eq!(dt, 1e-3);
            assert!(bound < dt);
            assert!(n.channel(&channel).is_some(), "{channel}");
        }
        other => panic!("expected a stability error, got {other:?}"),
    }
}

#[test]
fn runs_are_deterministic() {
    let n = build_gate(GateKind::Or, &ModuleParams::default()).unwrap();
    let config = SolverConfig { t_end: 1.5, ..SolverConfig::default() };
    let a = simulate(&n, &config).unwrap().trace.to_csv();
    let b = simulate(&n, &config).unwrap().trace.to_csv();
    assert_eq!(a, b);
    assert!(a.starts_with("t,out.O\n"));
}

#[test]
fn no_clamped_mass_warnings_on_gates() {
    let config = SolverConfig { t_end: 2.5, ..SolverConfig::default() };
    for kind in [GateKind::And, GateKind::Nor] {
        let n = build_gate(kind, &ModuleParams::default()).unwrap();
        let sim = simulate(&n, &config).unwrap();
        assert!(sim.audit.warnings.is_empty(), "{kind}: {:?}", sim.audit.warnings);
    }
}
