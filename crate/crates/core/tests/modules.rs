//! Steady outputs of the arithmetic modules against the stoichiometric
//! oracle, simulated and predicted.

use fluidic::harness::predict_levels;
use fluidic::kinetics::SignalProfile;
use fluidic::library::{build_addition, build_amplification, build_subtraction, ModuleParams};
use fluidic::network::Netlist;
use fluidic::solver::{simulate, SolverConfig};

fn plateau(netlist: &Netlist) -> f64 {
    let config = SolverConfig { t_end: 0.5, ..SolverConfig::default() };
    let sim = simulate(netlist, &config).unwrap();
    let out = netlist.output_ref().unwrap();
    *sim.trace.column(&out.probe, &out.species).unwrap().last().unwrap()
}

fn constant(level: f64) -> SignalProfile {
    if level > 0.0 {
        SignalProfile::constant(level).unwrap()
    } else {
        SignalProfile::empty()
    }
}

#[test]
fn addition_merges_active_branches() {
    for (i1, i2, merged) in [(8.0, 8.0, 4.0), (8.0, 0.0, 2.0), (0.0, 8.0, 2.0), (0.0, 0.0, 0.0)] {
        let params = ModuleParams {
            inputs: [constant(i1), constant(i2)],
            ..ModuleParams::default()
        };
        let n = build_addition(&params).unwrap();
        let level = plateau(&n);
        // Equal I and M supplies annihilate algebraically rather than
        // exponentially, leaving a small unconverted residual.
        assert!((level - merged).abs() < 0.01, "inputs ({i1}, {i2}): {level}");
    }
}

#[test]
fn subtraction_depletes_to_the_difference() {
    let params = ModuleParams::default();
    // Both streams are full width, so post-merge levels are half the injected ones.
    for (input, thl, remaining) in [(4.0, 6.0, 0.0), (16.0 / 3.0, 4.0, 2.0 / 3.0), (4.0, 0.0, 2.0)] {
        let n = build_subtraction(&params, &constant(input), thl).unwrap();
        let predicted = predict_levels(&n).unwrap().combos.last().unwrap().output;
        assert!((predicted - remaining).abs() < 1e-12);
        let level = plateau(&n);
        assert!((level - remaining).abs() < 2e-3, "I = {input}, ThL = {thl}: {level}");
    }
}

#[test]
fn amplification_converts_all_substrate() {
    let params = ModuleParams::default();
    for (catalyst, amp, out) in [(2.0, 2.0, 1.0), (0.0, 2.0, 0.0), (2.0, 0.0, 0.0)] {
        let n = build_amplification(&params, &constant(catalyst), amp).unwrap();
        let level = plateau(&n);
        assert!((level - out).abs() < 1e-3, "catalyst {catalyst}, Amp {amp}: {level}");
    }
}
