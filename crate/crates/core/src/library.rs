//! Parameterized builders for the arithmetic modules (addition,
//! subtraction, amplification) and the logic gates assembled from them.
//!
//! Channel segments run junction to junction, so every reaction channel
//! ends at the next merge (or at the outlet). Inputs enter through narrow
//! Y-junction arms; auxiliary species through full-width arms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{design_window, predict_levels};
use crate::kinetics::{Reaction, SignalProfile, Species};
use crate::network::{ChannelSpec, Inlet, JunctionKind, Netlist, NetlistBuilder, Probe, Stage};

/// Channel dimensions and inlet velocity shared by every builder [m, m/s].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub width: f64,
    pub depth: f64,
    /// Width of the input arms of a Y junction.
    pub arm_width: f64,
    pub arm_length: f64,
    pub reaction_length: f64,
    pub plain_length: f64,
    /// Length of the channel where two gate outputs annihilate.
    pub complement_length: f64,
    pub velocity: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            width: 20e-6,
            depth: 10e-6,
            arm_width: 10e-6,
            arm_length: 100e-6,
            reaction_length: 300e-6,
            plain_length: 200e-6,
            complement_length: 900e-6,
            velocity: 7.5e-3,
        }
    }
}

/// Physical constants, input signals and injected auxiliary levels
/// [mol/m³] used by the builders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleParams {
    pub geometry: Geometry,
    pub diffusion_coefficient: f64,
    pub rate_constant: f64,
    /// Injected profiles of the two logic inputs.
    pub inputs: [SignalProfile; 2],
    pub c_m: f64,
    /// Threshold level of AND-type gates (AND, NAND, XOR's AND half).
    pub c_thl_and: f64,
    /// Threshold level of OR-type gates (OR, NOR, XOR's OR half).
    pub c_thl_or: f64,
    pub c_amp: f64,
    /// Reference stream of the NOT stage.
    pub c_ref: f64,
}

impl Default for ModuleParams {
    fn default() -> Self {
        Self {
            geometry: Geometry::default(),
            diffusion_coefficient: 1e-8,
            rate_constant: 5000.0,
            inputs: [
                SignalProfile::pulse(8.0, 1.0, 3.0).expect("valid pulse"),
                SignalProfile::pulse(8.0, 2.0, 4.0).expect("valid pulse"),
            ],
            c_m: 8.0,
            c_thl_and: 6.0,
            c_thl_or: 2.0,
            c_amp: 4.0,
            c_ref: 2.0,
        }
    }
}

impl ModuleParams {
    fn check(&self) -> Result<()> {
        let g = &self.geometry;
        let positives = [
            ("width", g.width),
            ("depth", g.depth),
            ("arm width", g.arm_width),
            ("arm length", g.arm_length),
            ("reaction length", g.reaction_length),
            ("plain length", g.plain_length),
            ("complement length", g.complement_length),
            ("velocity", g.velocity),
            ("diffusion coefficient", self.diffusion_coefficient),
            ("rate constant", self.rate_constant),
        ];
        for (name, v) in positives {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("C_M", self.c_m),
            ("C_ThL (AND)", self.c_thl_and),
            ("C_ThL (OR)", self.c_thl_or),
            ("C_Amp", self.c_amp),
            ("C_ref", self.c_ref),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Flow through an inlet of the given width.
    pub fn inlet_flow(&self, width: f64) -> f64 {
        self.geometry.velocity * width * self.geometry.depth
    }

    /// Molar flux of a HIGH primary input entering through a Y arm [mol/s].
    pub fn input_flux(&self) -> f64 {
        let level = self
            .inputs
            .iter()
            .map(SignalProfile::high_level)
            .fold(0.0, f64::max);
        level * self.inlet_flow(self.geometry.arm_width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Not,
}

impl GateKind {
    pub const ALL: [GateKind; 6] = [
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Not,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Not => 1,
            _ => 2,
        }
    }

    /// Boolean function of the gate; extra inputs are ignored.
    pub fn eval(self, inputs: &[bool]) -> bool {
        let a = inputs.first().copied().unwrap_or(false);
        let b = inputs.get(1).copied().unwrap_or(false);
        match self {
            GateKind::And => a && b,
            GateKind::Nand => !(a && b),
            GateKind::Or => a || b,
            GateKind::Nor => !(a || b),
            GateKind::Xor => a ^ b,
            GateKind::Not => !a,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Not => "NOT",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown gate kind `{s}`")))
    }
}

/// An open channel end carrying a logic signal.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Signal {
    pub channel: String,
    pub species: String,
    /// Volumetric flow of the carrying channel [m³/s].
    pub flow: f64,
    /// Molar flux of the species when the signal is HIGH [mol/s].
    pub high_flux: f64,
}

/// Species names of one AND/OR core.
#[derive(Debug, Clone)]
pub(crate) struct CoreNames {
    pub m: String,
    pub n: String,
    pub thl: String,
    pub amp: String,
    pub out: String,
}

impl CoreNames {
    pub fn suffixed(suffix: &str) -> Self {
        Self {
            m: format!("M{suffix}"),
            n: format!("N{suffix}"),
            thl: format!("ThL{suffix}"),
            amp: format!("Amp{suffix}"),
            out: format!("O{suffix}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Threshold {
    And,
    Or,
}

/// Injected levels of one AND/OR core [mol/m³].
#[derive(Debug, Clone, Copy)]
pub(crate) struct CoreLevels {
    pub m_a: f64,
    pub m_b: f64,
    pub thl: f64,
    pub amp: f64,
}

pub(crate) const WASTE: &str = "W";

/// Netlist assembly on top of [`NetlistBuilder`], with element ids
/// scoped by a prefix.
pub(crate) struct CircuitBuilder<'a> {
    b: NetlistBuilder,
    pub p: &'a ModuleParams,
    prefix: String,
}

impl<'a> CircuitBuilder<'a> {
    pub fn new(p: &'a ModuleParams) -> Self {
        Self {
            b: NetlistBuilder::new(),
            p,
            prefix: String::new(),
        }
    }

    pub fn set_prefix(&mut self, prefix: &str) {
        self.prefix = prefix.to_string();
    }

    fn id(&self, name: &str) -> String {
        format!("{}{name}", self.prefix)
    }

    pub fn species(&mut self, name: &str) -> Result<()> {
        self.b.species(Species::new(name, self.p.diffusion_coefficient))
    }

    fn waste(&mut self) -> Result<()> {
        self.b.species(Species::waste(WASTE, self.p.diffusion_coefficient))
    }

    /// Inlet plus its arm channel.
    pub fn inlet(
        &mut self,
        name: &str,
        species: &str,
        profile: SignalProfile,
        width: f64,
        input: Option<usize>,
    ) -> Result<Signal> {
        self.species(species)?;
        let g = &self.p.geometry;
        let inlet_id = self.id(&format!("in_{name}"));
        let arm_id = self.id(&format!("arm_{name}"));
        let high = profile.high_level();
        self.b.inlet(Inlet {
            id: inlet_id.clone(),
            profiles: [(species.to_string(), profile)].into(),
            width,
            depth: g.depth,
            velocity: g.velocity,
            input,
        });
        self.b.channel(ChannelSpec {
            id: arm_id.clone(),
            length: g.arm_length,
            width,
            depth: g.depth,
            reactions: vec![],
            from_node: inlet_id,
            to_node: None,
            stage: None,
        });
        let flow = self.p.inlet_flow(width);
        Ok(Signal {
            channel: arm_id,
            species: species.to_string(),
            flow,
            high_flux: high * flow,
        })
    }

    fn aux(&mut self, name: &str, species: &str, level: f64) -> Result<Signal> {
        let profile = if level > 0.0 {
            SignalProfile::constant(level)?
        } else {
            SignalProfile::empty()
        };
        let width = self.p.geometry.width;
        self.inlet(name, species, profile, width, None)
    }

    /// Merges two open channels into a new channel of full width.
    #[allow(clippy::too_many_arguments)]
    fn merge(
        &mut self,
        junction: &str,
        kind: JunctionKind,
        a: &Signal,
        b: &Signal,
        channel: &str,
        length: f64,
        reactions: Vec<Reaction>,
        stage: Option<Stage>,
    ) -> (String, f64) {
        let j = self.id(junction);
        let c = self.id(channel);
        let g = &self.p.geometry;
        self.b.channel(ChannelSpec {
            id: c.clone(),
            length,
            width: g.width,
            depth: g.depth,
            reactions,
            from_node: j.clone(),
            to_node: None,
            stage,
        });
        self.b.junction(&j, kind, [&a.channel, &b.channel], &c);
        (c, a.flow + b.flow)
    }

    /// `a + M -> N` and `b + M -> N` in two Y-junction branches whose
    /// products converge into one plain channel.
    pub fn addition(&mut self, a: &Signal, b: &Signal, names: &CoreNames, m: (f64, f64)) -> Result<Signal> {
        self.species(&names.n)?;
        let k = self.p.rate_constant;
        let (len_r, len_p) = (self.p.geometry.reaction_length, self.p.geometry.plain_length);
        let arm = self.p.geometry.arm_width;
        let mut branches = Vec::new();
        for (tag, input, level) in [("a", a, m.0), ("b", b, m.1)] {
            let profile = SignalProfile::constant(level)?;
            let m_sig = self.inlet(&format!("{}_{tag}", names.m), &names.m, profile, arm, None)?;
            let (ch, flow) = self.merge(
                &format!("y_{tag}"),
                JunctionKind::Y,
                input,
                &m_sig,
                &format!("react_{tag}"),
                len_r,
                vec![Reaction::annihilation(&input.species, &names.m, &names.n, k)],
                Some(Stage::Addition),
            );
            branches.push(Signal {
                channel: ch,
                species: names.n.clone(),
                flow,
                high_flux: input.high_flux,
            });
        }
        let (ch, flow) = self.merge(
            "converge",
            JunctionKind::Converge,
            &branches[0],
            &branches[1],
            "add_out",
            len_p,
            vec![],
            None,
        );
        Ok(Signal {
            channel: ch,
            species: names.n.clone(),
            flow,
            high_flux: a.high_flux + b.high_flux,
        })
    }

    /// `signal + ThL -> W` after a T junction; the surviving signal is the output.
    pub fn subtraction(&mut self, signal: &Signal, thl: &str, level: f64, stage: Stage) -> Result<Signal> {
        self.waste()?;
        let thl_sig = self.aux(thl, thl, level)?;
        let k = self.p.rate_constant;
        let len = self.p.geometry.reaction_length;
        let (ch, flow) = self.merge(
            "t_sub",
            JunctionKind::T,
            signal,
            &thl_sig,
            "sub",
            len,
            vec![Reaction::annihilation(&signal.species, thl, WASTE, k)],
            Some(stage),
        );
        Ok(Signal {
            channel: ch,
            species: signal.species.clone(),
            flow,
            high_flux: (signal.high_flux - thl_sig.high_flux).max(0.0),
        })
    }

    /// `catalyst + Amp -> catalyst + O` after a T junction.
    pub fn amplification(&mut self, catalyst: &Signal, amp: &str, level: f64, out: &str) -> Result<Signal> {
        let amp_sig = self.aux(amp, amp, level)?;
        self.species(out)?;
        let k = self.p.rate_constant;
        let len = self.p.geometry.reaction_length;
        let (ch, flow) = self.merge(
            "t_amp",
            JunctionKind::T,
            catalyst,
            &amp_sig,
            "amp",
            len,
            vec![Reaction::catalytic(&catalyst.species, amp, out, k)],
            Some(Stage::Amplification),
        );
        Ok(Signal {
            channel: ch,
            species: out.to_string(),
            flow,
            high_flux: amp_sig.high_flux,
        })
    }

    /// `depleting + depleted -> W`; the surviving `depleted` is the output.
    pub fn complement(
        &mut self,
        depleting: &Signal,
        depleted: &Signal,
        kind: JunctionKind,
        length: f64,
        tag: &str,
    ) -> Result<Signal> {
        self.waste()?;
        let k = self.p.rate_constant;
        let (ch, flow) = self.merge(
            &format!("j_{tag}"),
            kind,
            depleting,
            depleted,
            tag,
            length,
            vec![Reaction::annihilation(&depleting.species, &depleted.species, WASTE, k)],
            Some(Stage::Complement),
        );
        Ok(Signal {
            channel: ch,
            species: depleted.species.clone(),
            flow,
            high_flux: depleted.high_flux,
        })
    }

    /// Subtracts `input` from a constant reference stream.
    pub fn not(&mut self, input: &Signal, reference: &str, level: f64) -> Result<Signal> {
        let r = self.aux(reference, reference, level)?;
        let len = self.p.geometry.reaction_length;
        self.complement(input, &r, JunctionKind::T, len, "not")
    }

    /// Addition, threshold subtraction and amplification in series.
    pub fn core(
        &mut self,
        kind: Threshold,
        a: &Signal,
        b: &Signal,
        names: &CoreNames,
        levels: CoreLevels,
    ) -> Result<Signal> {
        let n = self.addition(a, b, names, (levels.m_a, levels.m_b))?;
        let stage = match kind {
            Threshold::And => Stage::AndThreshold,
            Threshold::Or => Stage::OrThreshold,
        };
        let n = self.subtraction(&n, &names.thl, levels.thl, stage)?;
        self.amplification(&n, &names.amp, levels.amp, &names.out)
    }

    pub fn probe_end(&mut self, id: &str, signal: &Signal) {
        let length = self
            .b
            .netlist()
            .channel(&signal.channel)
            .map(|c| c.length)
            .unwrap_or(0.0);
        self.b.probe(Probe {
            id: id.to_string(),
            channel: signal.channel.clone(),
            position: length,
            species: vec![signal.species.clone()],
        });
    }

    pub fn output(&mut self, signal: &Signal) {
        self.probe_end("out", signal);
        self.b.output("out", &signal.species);
    }

    pub fn finish(self) -> Netlist {
        self.b.finish()
    }
}

/// Addition module: `I1 + M -> N` and `I2 + M -> N`, merged.
///
/// Rejects a supply of `M` too small to convert a HIGH input completely.
pub fn build_addition(params: &ModuleParams) -> Result<Netlist> {
    params.check()?;
    let arm = params.geometry.arm_width;
    let needed = params.inputs.iter().map(SignalProfile::high_level).fold(0.0, f64::max);
    if params.c_m < needed {
        return Err(Error::DesignWindow(format!(
            "C_M = {} is below the largest input level {needed}; inputs would not convert completely",
            params.c_m
        )));
    }
    let mut c = CircuitBuilder::new(params);
    let a = c.inlet("I1", "I1", params.inputs[0].clone(), arm, Some(0))?;
    let b = c.inlet("I2", "I2", params.inputs[1].clone(), arm, Some(1))?;
    let n = c.addition(&a, &b, &CoreNames::suffixed(""), (params.c_m, params.c_m))?;
    c.output(&n);
    Ok(c.finish())
}

/// Subtraction module: `I + ThL -> W` behind a T junction, output `I`.
pub fn build_subtraction(params: &ModuleParams, input: &SignalProfile, c_thl: f64) -> Result<Netlist> {
    params.check()?;
    let mut c = CircuitBuilder::new(params);
    let width = params.geometry.width;
    let i = c.inlet("I", "I", input.clone(), width, Some(0))?;
    let out = c.subtraction(&i, "ThL", c_thl, Stage::AndThreshold)?;
    c.output(&out);
    Ok(c.finish())
}

/// Amplification module: `I + Amp -> I + O` behind a T junction.
pub fn build_amplification(params: &ModuleParams, catalyst: &SignalProfile, c_amp: f64) -> Result<Netlist> {
    params.check()?;
    let mut c = CircuitBuilder::new(params);
    let width = params.geometry.width;
    let i = c.inlet("I", "I", catalyst.clone(), width, Some(0))?;
    let out = c.amplification(&i, "Amp", c_amp, "O")?;
    c.output(&out);
    Ok(c.finish())
}

/// Builds a library gate and checks its design windows.
pub fn build_gate(kind: GateKind, params: &ModuleParams) -> Result<Netlist> {
    let netlist = build_gate_unchecked(kind, params)?;
    let prediction = predict_levels(&netlist)?;
    let report = design_window(&netlist, &prediction, crate::harness::DEFAULT_FLUCTUATION_FLOOR);
    if !report.pass() {
        return Err(Error::DesignWindow(report.violations().join("; ")));
    }
    Ok(netlist)
}

/// Builds a library gate without checking its design windows.
pub fn build_gate_unchecked(kind: GateKind, params: &ModuleParams) -> Result<Netlist> {
    params.check()?;
    let arm = params.geometry.arm_width;
    let mut c = CircuitBuilder::new(params);
    let names = CoreNames::suffixed("");
    let levels = |thl| CoreLevels {
        m_a: params.c_m,
        m_b: params.c_m,
        thl,
        amp: params.c_amp,
    };
    let out = match kind {
        GateKind::And | GateKind::Nand | GateKind::Or | GateKind::Nor => {
            let a = c.inlet("I1", "I1", params.inputs[0].clone(), arm, Some(0))?;
            let b = c.inlet("I2", "I2", params.inputs[1].clone(), arm, Some(1))?;
            let (threshold, thl) = match kind {
                GateKind::And | GateKind::Nand => (Threshold::And, params.c_thl_and),
                _ => (Threshold::Or, params.c_thl_or),
            };
            let o = c.core(threshold, &a, &b, &names, levels(thl))?;
            if matches!(kind, GateKind::Nand | GateKind::Nor) {
                c.not(&o, "R", params.c_ref)?
            } else {
                o
            }
        }
        GateKind::Xor => {
            c.set_prefix("and_");
            let a = c.inlet("I1", "I1", params.inputs[0].clone(), arm, Some(0))?;
            let b = c.inlet("I2", "I2", params.inputs[1].clone(), arm, Some(1))?;
            let o1 = c.core(Threshold::And, &a, &b, &CoreNames {
                m: "M".into(),
                ..CoreNames::suffixed("1")
            }, levels(params.c_thl_and))?;
            c.set_prefix("or_");
            let a = c.inlet("I1", "I1", params.inputs[0].clone(), arm, Some(0))?;
            let b = c.inlet("I2", "I2", params.inputs[1].clone(), arm, Some(1))?;
            let o2 = c.core(Threshold::Or, &a, &b, &CoreNames {
                m: "M".into(),
                ..CoreNames::suffixed("2")
            }, levels(params.c_thl_or))?;
            c.set_prefix("");
            let len = params.geometry.complement_length;
            c.complement(&o1, &o2, JunctionKind::Converge, len, "xor")?
        }
        GateKind::Not => {
            let a = c.inlet("I1", "I1", params.inputs[0].clone(), arm, Some(0))?;
            c.not(&a, "R", params.c_ref)?
        }
    };
    c.output(&out);
    Ok(c.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::ReactionKind;
    use crate::network::{assign_flows, validate};

    fn reactions(n: &Netlist) -> Vec<String> {
        n.channels
            .iter()
            .flat_map(|c| c.reactions.iter().map(|r| r.to_string()))
            .collect()
    }

    #[test]
    fn every_gate_is_valid() {
        let p = ModuleParams::default();
        for kind in GateKind::ALL {
            let n = build_gate(kind, &p).unwrap();
            assert_eq!(validate(&n), vec![], "{kind}");
            let back = Netlist::from_json(&n.to_json()).unwrap();
            assert_eq!(back, n);
        }
    }

    #[test]
    fn and_gate_composition() {
        let n = build_gate(GateKind::And, &ModuleParams::default()).unwrap();
        assert_eq!(
            reactions(&n),
            ["I1+M->N", "I2+M->N", "N+ThL->W", "N+Amp->N+O"]
        );
        let names: Vec<_> = n.species.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names.len(), 8);
        for s in ["I1", "I2", "M", "N", "ThL", "W", "Amp", "O"] {
            assert!(names.contains(&s), "{s}");
        }
        assert_eq!(n.junctions.len(), 5);
    }

    #[test]
    fn xor_and_not_composition() {
        let p = ModuleParams::default();
        let x = build_gate(GateKind::Xor, &p).unwrap();
        assert_eq!(x.reaction_count(), 9);
        assert_eq!(reactions(&x).last().unwrap(), "O1+O2->W");
        let not = build_gate(GateKind::Not, &p).unwrap();
        assert_eq!(not.reaction_count(), 1);
        let r = not.inlet("in_R").unwrap();
        assert_eq!(r.profiles["R"], SignalProfile::constant(2.0).unwrap());
        assert_eq!(build_gate(GateKind::Nand, &p).unwrap().reaction_count(), 5);
    }

    #[test]
    fn addition_fragment_shape() {
        let n = build_addition(&ModuleParams::default()).unwrap();
        assert_eq!(n.reaction_count(), 2);
        let kinds: Vec<_> = n.junctions.iter().map(|j| j.kind).collect();
        assert_eq!(kinds.iter().filter(|k| **k == JunctionKind::Y).count(), 2);
        assert_eq!(kinds.iter().filter(|k| **k == JunctionKind::Converge).count(), 1);
        assert!(n.channels.iter().flat_map(|c| &c.reactions).all(|r| r.kind == ReactionKind::Annihilation));
        let p = ModuleParams { c_m: 6.0, ..ModuleParams::default() };
        assert!(matches!(build_addition(&p), Err(Error::DesignWindow(_))));
    }

    #[test]
    fn and_subtraction_junction_flows() {
        let n = build_gate(GateKind::And, &ModuleParams::default()).unwrap();
        let f = assign_flows(&n).unwrap();
        assert!((f.get("add_out").unwrap().q - 3.0e-12).abs() < 1e-24);
        assert!((f.get("arm_ThL").unwrap().q - 1.5e-12).abs() < 1e-24);
        assert!((f.get("sub").unwrap().q - 4.5e-12).abs() < 1e-24);
    }

    #[test]
    fn and_or_share_geometry() {
        let p = ModuleParams::default();
        let and = build_gate(GateKind::And, &p).unwrap();
        let mut or = build_gate(GateKind::Or, &p).unwrap();
        // Only the stage annotation of the threshold channel differs.
        let sub = or.channels.iter_mut().find(|c| c.id == "sub").unwrap();
        assert_eq!(sub.stage, Some(Stage::OrThreshold));
        sub.stage = Some(Stage::AndThreshold);
        assert_eq!(and.channels, or.channels);
        assert_eq!(and.junctions, or.junctions);
        let thl = or.inlets.iter_mut().find(|i| i.id == "in_ThL").unwrap();
        assert_eq!(thl.profiles["ThL"], SignalProfile::constant(2.0).unwrap());
        thl.profiles.insert("ThL".into(), SignalProfile::constant(6.0).unwrap());
        assert_eq!(and, or);
    }

    #[test]
    fn out_of_window_threshold_rejected() {
        let p = ModuleParams { c_thl_and: 12.0, ..ModuleParams::default() };
        match build_gate(GateKind::And, &p) {
            Err(Error::DesignWindow(msg)) => assert!(msg.contains("α2"), "{msg}"),
            other => panic!("expected window violation, got {other:?}"),
        }
        assert!(build_gate_unchecked(GateKind::And, &p).is_ok());
    }

    #[test]
    fn gate_kind_parsing() {
        assert_eq!("nand".parse::<GateKind>().unwrap(), GateKind::Nand);
        assert!("buf".parse::<GateKind>().is_err());
        assert!(GateKind::Xor.eval(&[true, false]));
        assert!(!GateKind::Nor.eval(&[false, true]));
    }
}
