//! Netlist data model: inlets, straight channels, merging junctions and
//! probes, plus validation and flow assignment by continuity.
//!
//! Flow is prescribed at the inlets (mean velocity times cross-section)
//! and summed at every junction. Junctions have zero volume and mix their
//! inflows instantaneously.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{Reaction, SignalProfile, Species, SpeciesTable};

/// Mandatory schema tag of the netlist JSON format.
pub const SCHEMA: &str = "fluidic-netlist/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inlet {
    pub id: String,
    /// Injected concentration per species [mol/m³].
    pub profiles: BTreeMap<String, SignalProfile>,
    /// [m]
    pub width: f64,
    /// [m]
    pub depth: f64,
    /// Mean injection velocity [m/s].
    pub velocity: f64,
    /// Index of the logical input variable this inlet carries, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<usize>,
}

impl Inlet {
    pub fn flow_rate(&self) -> f64 {
        self.velocity * self.width * self.depth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JunctionKind {
    Y,
    T,
    Converge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub id: String,
    pub kind: JunctionKind,
    /// Channels flowing into the junction.
    pub in_ports: Vec<String>,
    /// Channel leaving the junction.
    pub out_port: String,
}

/// Role a reaction channel plays inside a library gate. Used by the
/// design-window checks; absent on hand-written netlists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Addition,
    /// Threshold species must sit strictly between the one-HIGH and
    /// both-HIGH signal levels.
    AndThreshold,
    /// Threshold species must sit between the fluctuation floor and the
    /// one-HIGH signal level.
    OrThreshold,
    /// `reactant_a` must fully deplete `reactant_b` whenever present.
    Complement,
    Amplification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub id: String,
    /// [m]
    pub length: f64,
    /// [m]
    pub width: f64,
    /// [m]
    pub depth: f64,
    #[serde(default)]
    pub reactions: Vec<Reaction>,
    pub from_node: String,
    /// `None` marks a terminal outlet.
    #[serde(default)]
    pub to_node: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<Stage>,
}

impl ChannelSpec {
    pub fn cross_section(&self) -> f64 {
        self.width * self.depth
    }

    pub fn is_reactive(&self) -> bool {
        !self.reactions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub id: String,
    pub channel: String,
    /// Distance from the channel entrance [m].
    pub position: f64,
    pub species: Vec<String>,
}

/// Which probe column is the circuit output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRef {
    pub probe: String,
    pub species: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub schema: String,
    pub species: SpeciesTable,
    pub inlets: Vec<Inlet>,
    pub junctions: Vec<Junction>,
    pub channels: Vec<ChannelSpec>,
    pub probes: Vec<Probe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputRef>,
}

impl Default for Netlist {
    fn default() -> Self {
        Self {
            schema: SCHEMA.to_string(),
            species: SpeciesTable::new(),
            inlets: Vec::new(),
            junctions: Vec::new(),
            channels: Vec::new(),
            probes: Vec::new(),
            output: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    Species,
    DuplicateId,
    Geometry,
    Reaction,
    UnknownReference,
    Arity,
    Connectivity,
    Cycle,
    Probe,
    Schema,
}

/// One broken netlist invariant, naming the offending element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub element: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} `{}`: {}", self.kind, self.element, self.message)
    }
}

impl Netlist {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let netlist: Netlist = serde_json::from_str(text)?;
        if netlist.schema != SCHEMA {
            return Err(Error::Parse(format!(
                "unsupported schema `{}` (expected `{SCHEMA}`)",
                netlist.schema
            )));
        }
        Ok(netlist)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serializes")
    }

    pub fn channel(&self, id: &str) -> Option<&ChannelSpec> {
        self.channels.iter().find(|c| c.id == id)
    }

    pub fn channel_index(&self, id: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.id == id)
    }

    pub fn inlet(&self, id: &str) -> Option<&Inlet> {
        self.inlets.iter().find(|i| i.id == id)
    }

    pub fn junction(&self, id: &str) -> Option<&Junction> {
        self.junctions.iter().find(|j| j.id == id)
    }

    pub fn probe(&self, id: &str) -> Option<&Probe> {
        self.probes.iter().find(|p| p.id == id)
    }

    pub fn reaction_count(&self) -> usize {
        self.channels.iter().map(|c| c.reactions.len()).sum()
    }

    /// The designated output column, falling back to the first probe's
    /// first species.
    pub fn output_ref(&self) -> Option<OutputRef> {
        self.output.clone().or_else(|| {
            self.probes.first().and_then(|p| {
                p.species.first().map(|s| OutputRef {
                    probe: p.id.clone(),
                    species: s.clone(),
                })
            })
        })
    }

    /// Number of logical inputs carried by the inlets.
    pub fn input_count(&self) -> usize {
        self.inlets
            .iter()
            .filter_map(|i| i.input)
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Channel indices in an order where every channel follows all of its
    /// upstream channels.
    pub fn topological_channels(&self) -> Result<Vec<usize>> {
        let index: HashMap<&str, usize> = self
            .channels
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.as_str(), i))
            .collect();
        let mut indegree = vec![0usize; self.channels.len()];
        let mut downstream: Vec<Vec<usize>> = vec![Vec::new(); self.channels.len()];
        for (i, c) in self.channels.iter().enumerate() {
            if let Some(j) = self.junction(&c.from_node) {
                for port in &j.in_ports {
                    let &up = index.get(port.as_str()).ok_or_else(|| Error::Flow {
                        element: j.id.clone(),
                        reason: format!("in-port `{port}` is not a channel"),
                    })?;
                    indegree[i] += 1;
                    downstream[up].push(i);
                }
            }
        }
        let mut ready: Vec<usize> = (0..self.channels.len()).filter(|&i| indegree[i] == 0).collect();
        ready.reverse();
        let mut order = Vec::with_capacity(self.channels.len());
        while let Some(i) = ready.pop() {
            order.push(i);
            for &d in downstream[i].iter().rev() {
                indegree[d] -= 1;
                if indegree[d] == 0 {
                    ready.push(d);
                }
            }
        }
        if order.len() != self.channels.len() {
            let stuck = (0..self.channels.len())
                .find(|i| !order.contains(i))
                .map(|i| self.channels[i].id.clone())
                .unwrap_or_default();
            return Err(Error::Flow {
                element: stuck,
                reason: "channel lies on a cycle".into(),
            });
        }
        Ok(order)
    }

    /// Channels feeding channel `i` through its upstream junction.
    pub fn upstream_channels(&self, i: usize) -> Vec<usize> {
        match self.junction(&self.channels[i].from_node) {
            Some(j) => j
                .in_ports
                .iter()
                .filter_map(|p| self.channel_index(p))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Copy with every id and species name prefixed, for composing
    /// netlists without name clashes.
    pub fn with_prefix(&self, prefix: &str) -> Netlist {
        let p = |s: &str| format!("{prefix}{s}");
        let mut out = self.clone();
        for s in out.species.entries_mut() {
            s.name = p(&s.name);
        }
        for inlet in &mut out.inlets {
            inlet.id = p(&inlet.id);
            inlet.profiles = inlet
                .profiles
                .iter()
                .map(|(k, v)| (p(k), v.clone()))
                .collect();
        }
        for j in &mut out.junctions {
            j.id = p(&j.id);
            j.out_port = p(&j.out_port);
            for port in &mut j.in_ports {
                *port = p(port);
            }
        }
        for c in &mut out.channels {
            c.id = p(&c.id);
            c.from_node = p(&c.from_node);
            c.to_node = c.to_node.as_deref().map(p);
            for r in &mut c.reactions {
                r.reactant_a = p(&r.reactant_a);
                r.reactant_b = p(&r.reactant_b);
                r.product = p(&r.product);
            }
        }
        for probe in &mut out.probes {
            probe.id = p(&probe.id);
            probe.channel = p(&probe.channel);
            for s in &mut probe.species {
                *s = p(s);
            }
        }
        if let Some(o) = &mut out.output {
            o.probe = p(&o.probe);
            o.species = p(&o.species);
        }
        out
    }

    /// Union of two netlists sharing no ids or species.
    pub fn disjoint_union(&self, other: &Netlist) -> Result<Netlist> {
        let mut out = self.clone();
        for s in other.species.iter() {
            if out.species.contains(&s.name) {
                return Err(Error::InvalidInput(format!("species `{}` in both netlists", s.name)));
            }
            out.species.insert(s.clone())?;
        }
        let ids: HashSet<&str> = self.element_ids().collect();
        if let Some(clash) = other.element_ids().find(|id| ids.contains(id)) {
            return Err(Error::InvalidInput(format!("id `{clash}` in both netlists")));
        }
        out.inlets.extend(other.inlets.iter().cloned());
        out.junctions.extend(other.junctions.iter().cloned());
        out.channels.extend(other.channels.iter().cloned());
        out.probes.extend(other.probes.iter().cloned());
        if out.output.is_none() {
            out.output = other.output.clone();
        }
        Ok(out)
    }

    fn element_ids(&self) -> impl Iterator<Item = &str> {
        self.inlets
            .iter()
            .map(|i| i.id.as_str())
            .chain(self.junctions.iter().map(|j| j.id.as_str()))
            .chain(self.channels.iter().map(|c| c.id.as_str()))
            .chain(self.probes.iter().map(|p| p.id.as_str()))
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

/// All invariant violations of `netlist`; empty iff it is valid.
pub fn validate(netlist: &Netlist) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, element: &str, message: String| {
        out.push(Violation {
            kind,
            element: element.to_string(),
            message,
        })
    };

    if netlist.schema != SCHEMA {
        push(ViolationKind::Schema, &netlist.schema, format!("schema must be `{SCHEMA}`"));
    }
    for problem in netlist.species.problems() {
        push(ViolationKind::Species, "species", problem);
    }

    let mut seen = HashSet::new();
    for id in netlist.element_ids() {
        if !seen.insert(id) {
            push(ViolationKind::DuplicateId, id, "id used more than once".into());
        }
    }

    let is_node = |id: &str| netlist.inlet(id).is_some() || netlist.junction(id).is_some();

    for inlet in &netlist.inlets {
        if !(positive(inlet.width) && positive(inlet.depth) && positive(inlet.velocity)) {
            push(
                ViolationKind::Geometry,
                &inlet.id,
                "inlet width, depth and velocity must be positive".into(),
            );
        }
        for species in inlet.profiles.keys() {
            if !netlist.species.contains(species) {
                push(
                    ViolationKind::UnknownReference,
                    &inlet.id,
                    format!("injects undeclared species `{species}`"),
                );
            }
        }
        let fed = netlist.channels.iter().filter(|c| c.from_node == inlet.id).count();
        if fed != 1 {
            push(
                ViolationKind::Connectivity,
                &inlet.id,
                format!("inlet must feed exactly one channel, feeds {fed}"),
            );
        }
    }

    for c in &netlist.channels {
        if !(positive(c.length) && positive(c.width) && positive(c.depth)) {
            push(
                ViolationKind::Geometry,
                &c.id,
                "channel length, width and depth must be positive".into(),
            );
        }
        if !is_node(&c.from_node) {
            push(
                ViolationKind::UnknownReference,
                &c.id,
                format!("from_node `{}` is neither an inlet nor a junction", c.from_node),
            );
        }
        if let Some(to) = &c.to_node {
            match netlist.junction(to) {
                None => push(
                    ViolationKind::UnknownReference,
                    &c.id,
                    format!("to_node `{to}` is not a junction"),
                ),
                Some(j) if !j.in_ports.contains(&c.id) => push(
                    ViolationKind::Connectivity,
                    &c.id,
                    format!("junction `{to}` does not list this channel as an in-port"),
                ),
                _ => {}
            }
        }
        for r in &c.reactions {
            for problem in r.problems(&netlist.species) {
                push(ViolationKind::Reaction, &c.id, format!("reaction {r}: {problem}"));
            }
        }
    }

    for j in &netlist.junctions {
        if j.in_ports.len() != 2 {
            push(
                ViolationKind::Arity,
                &j.id,
                format!("junction needs exactly two in-ports, has {}", j.in_ports.len()),
            );
        }
        for port in &j.in_ports {
            match netlist.channel(port) {
                None => push(
                    ViolationKind::UnknownReference,
                    &j.id,
                    format!("in-port `{port}` is not a channel"),
                ),
                Some(c) if c.to_node.as_deref() != Some(j.id.as_str()) => push(
                    ViolationKind::Connectivity,
                    &j.id,
                    format!("in-port `{port}` does not flow into this junction"),
                ),
                _ => {}
            }
        }
        let outs: Vec<_> = netlist.channels.iter().filter(|c| c.from_node == j.id).collect();
        match netlist.channel(&j.out_port) {
            None => push(
                ViolationKind::UnknownReference,
                &j.id,
                format!("out-port `{}` is not a channel", j.out_port),
            ),
            Some(c) if c.from_node != j.id => push(
                ViolationKind::Connectivity,
                &j.id,
                format!("out-port `{}` does not start at this junction", j.out_port),
            ),
            _ => {}
        }
        if outs.len() != 1 {
            push(
                ViolationKind::Arity,
                &j.id,
                format!("junction needs exactly one out-edge, has {}", outs.len()),
            );
        }
    }

    if let Err(Error::Flow { element, reason }) = netlist.topological_channels() {
        let kind = if reason.contains("cycle") {
            ViolationKind::Cycle
        } else {
            ViolationKind::UnknownReference
        };
        push(kind, &element, reason);
    }

    for p in &netlist.probes {
        match netlist.channel(&p.channel) {
            None => push(
                ViolationKind::Probe,
                &p.id,
                format!("channel `{}` does not exist", p.channel),
            ),
            Some(c) if !(p.position >= 0.0 && p.position <= c.length) => push(
                ViolationKind::Probe,
                &p.id,
                format!("position {} outside channel of length {}", p.position, c.length),
            ),
            _ => {}
        }
        if p.species.is_empty() {
            push(ViolationKind::Probe, &p.id, "probe records no species".into());
        }
        for s in &p.species {
            if !netlist.species.contains(s) {
                push(ViolationKind::UnknownReference, &p.id, format!("undeclared species `{s}`"));
            }
        }
    }

    if let Some(o) = &netlist.output {
        match netlist.probe(&o.probe) {
            Some(p) if p.species.contains(&o.species) => {}
            _ => push(
                ViolationKind::Probe,
                &o.probe,
                format!("output `{}.{}` is not a probe column", o.probe, o.species),
            ),
        }
    }

    out
}

/// Flow through one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelFlow {
    /// Volumetric flow [m³/s].
    pub q: f64,
    /// Mean velocity [m/s].
    pub u: f64,
}

/// Per-channel flow, aligned with `Netlist::channels`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowMap {
    ids: Vec<String>,
    flows: Vec<ChannelFlow>,
}

impl FlowMap {
    pub fn get(&self, channel: &str) -> Option<ChannelFlow> {
        self.ids.iter().position(|id| id == channel).map(|i| self.flows[i])
    }

    pub fn at(&self, index: usize) -> ChannelFlow {
        self.flows[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ChannelFlow)> {
        self.ids.iter().map(String::as_str).zip(self.flows.iter().copied())
    }
}

/// Propagates inlet flows downstream by continuity.
pub fn assign_flows(netlist: &Netlist) -> Result<FlowMap> {
    let order = netlist.topological_channels()?;
    let mut flows = vec![ChannelFlow { q: 0.0, u: 0.0 }; netlist.channels.len()];
    for i in order {
        let c = &netlist.channels[i];
        let q = if let Some(inlet) = netlist.inlet(&c.from_node) {
            inlet.flow_rate()
        } else if netlist.junction(&c.from_node).is_some() {
            netlist.upstream_channels(i).iter().map(|&u| flows[u].q).sum()
        } else {
            return Err(Error::Flow {
                element: c.id.clone(),
                reason: format!("channel is disconnected (from_node `{}` unknown)", c.from_node),
            });
        };
        let area = c.cross_section();
        if !positive(area) {
            return Err(Error::Flow {
                element: c.id.clone(),
                reason: "zero cross-section".into(),
            });
        }
        if !positive(q) {
            return Err(Error::Flow {
                element: c.id.clone(),
                reason: format!("non-positive flow {q}"),
            });
        }
        flows[i] = ChannelFlow { q, u: q / area };
    }
    Ok(FlowMap {
        ids: netlist.channels.iter().map(|c| c.id.clone()).collect(),
        flows,
    })
}

/// Flow-weighted mixing of `(Q, concentrations)` streams at a zero-volume
/// junction.
pub fn junction_mix(inflows: &[(f64, &[f64])]) -> Result<Vec<f64>> {
    let (_, first) = inflows
        .first()
        .ok_or_else(|| Error::InvalidInput("junction_mix needs at least one inflow".into()))?;
    let n = first.len();
    let mut total_q = 0.0;
    let mut out = vec![0.0; n];
    for (q, c) in inflows {
        if !positive(*q) {
            return Err(Error::InvalidInput(format!("inflow rate {q} is not positive")));
        }
        if c.len() != n {
            return Err(Error::InvalidInput("inflows list different species counts".into()));
        }
        total_q += q;
        for (o, v) in out.iter_mut().zip(c.iter()) {
            *o += q * v;
        }
    }
    if inflows.len() == 1 {
        return Ok(first.to_vec());
    }
    for o in &mut out {
        *o /= total_q;
    }
    Ok(out)
}

/// Incremental netlist construction used by the gate builders.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    netlist: Netlist,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn species(&mut self, species: Species) -> Result<()> {
        self.netlist.species.insert(species).map(|_| ())
    }

    pub fn inlet(&mut self, inlet: Inlet) {
        self.netlist.inlets.push(inlet);
    }

    pub fn channel(&mut self, channel: ChannelSpec) {
        self.netlist.channels.push(channel);
    }

    /// Adds a junction and points its in-port channels at it.
    pub fn junction(&mut self, id: &str, kind: JunctionKind, in_ports: [&str; 2], out_port: &str) {
        for port in in_ports {
            if let Some(c) = self.netlist.channels.iter_mut().find(|c| c.id == port) {
                c.to_node = Some(id.to_string());
            }
        }
        self.netlist.junctions.push(Junction {
            id: id.to_string(),
            kind,
            in_ports: in_ports.iter().map(|s| s.to_string()).collect(),
            out_port: out_port.to_string(),
        });
    }

    pub fn probe(&mut self, probe: Probe) {
        self.netlist.probes.push(probe);
    }

    pub fn output(&mut self, probe: &str, species: &str) {
        self.netlist.output = Some(OutputRef {
            probe: probe.to_string(),
            species: species.to_string(),
        });
    }

    pub fn netlist(&self) -> &Netlist {
        &self.netlist
    }

    pub fn finish(self) -> Netlist {
        self.netlist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(u: f64) -> Netlist {
        let mut b = NetlistBuilder::new();
        b.species(Species::new("A", 1e-8)).unwrap();
        b.inlet(Inlet {
            id: "in".into(),
            profiles: [("A".to_string(), SignalProfile::constant(8.0).unwrap())].into(),
            width: 20e-6,
            depth: 10e-6,
            velocity: u,
            input: None,
        });
        b.channel(ChannelSpec {
            id: "c".into(),
            length: 1e-3,
            width: 20e-6,
            depth: 10e-6,
            reactions: vec![],
            from_node: "in".into(),
            to_node: None,
            stage: None,
        });
        b.probe(Probe {
            id: "out".into(),
            channel: "c".into(),
            position: 1e-3,
            species: vec!["A".into()],
        });
        b.finish()
    }

    fn arm(id: &str, from: &str, width: f64) -> ChannelSpec {
        ChannelSpec {
            id: id.into(),
            length: 1e-4,
            width,
            depth: 10e-6,
            reactions: vec![],
            from_node: from.into(),
            to_node: None,
            stage: None,
        }
    }

    fn inlet(id: &str, width: f64) -> Inlet {
        Inlet {
            id: id.into(),
            profiles: BTreeMap::new(),
            width,
            depth: 10e-6,
            velocity: 7.5e-3,
            input: None,
        }
    }

    fn y_junction() -> Netlist {
        let mut b = NetlistBuilder::new();
        b.inlet(inlet("a", 10e-6));
        b.inlet(inlet("b", 10e-6));
        b.channel(arm("arm_a", "a", 10e-6));
        b.channel(arm("arm_b", "b", 10e-6));
        b.channel(arm("merged", "y", 20e-6));
        b.junction("y", JunctionKind::Y, ["arm_a", "arm_b"], "merged");
        b.finish()
    }

    #[test]
    fn straight_channel_is_valid_and_uniform() {
        let n = straight(7.5e-3);
        assert!(validate(&n).is_empty());
        let flows = assign_flows(&n).unwrap();
        assert!((flows.get("c").unwrap().u - 7.5e-3).abs() < 1e-15);
    }

    #[test]
    fn y_junction_continuity() {
        let n = y_junction();
        assert_eq!(validate(&n), vec![]);
        let f = assign_flows(&n).unwrap();
        assert!((f.get("arm_a").unwrap().q - 7.5e-13).abs() < 1e-25);
        assert!((f.get("arm_b").unwrap().q - 7.5e-13).abs() < 1e-25);
        let m = f.get("merged").unwrap();
        assert_eq!(m.q, f.get("arm_a").unwrap().q + f.get("arm_b").unwrap().q);
        assert!((m.q - 1.5e-12).abs() < 1e-24);
        assert!((m.u - 7.5e-3).abs() < 1e-15);
    }

    #[test]
    fn junction_arity_violation() {
        let mut n = y_junction();
        n.inlets.push(inlet("c", 10e-6));
        let mut extra = arm("arm_c", "c", 10e-6);
        extra.to_node = Some("y".into());
        n.channels.push(extra);
        n.junctions[0].in_ports.push("arm_c".into());
        let v = validate(&n);
        assert!(v.iter().any(|v| v.kind == ViolationKind::Arity && v.element == "y"), "{v:?}");
    }

    #[test]
    fn cycle_violation() {
        let mut n = y_junction();
        // merged -> j2 -> back into arm_b's junction: arm_b now starts at j2.
        n.channels[1].from_node = "j2".into();
        n.channels[2].to_node = Some("j2".into());
        n.inlets.push(inlet("d", 10e-6));
        let mut feed = arm("feed", "d", 10e-6);
        feed.to_node = Some("j2".into());
        n.channels.push(feed);
        n.junctions.push(Junction {
            id: "j2".into(),
            kind: JunctionKind::T,
            in_ports: vec!["merged".into(), "feed".into()],
            out_port: "arm_b".into(),
        });
        let v = validate(&n);
        assert!(v.iter().any(|v| v.kind == ViolationKind::Cycle), "{v:?}");
        assert!(assign_flows(&n).is_err());
    }

    #[test]
    fn unknown_species_and_bad_probe() {
        let mut n = straight(7.5e-3);
        n.probes[0].species.push("Q".into());
        n.probes[0].position = 2e-3;
        let v = validate(&n);
        assert!(v.iter().any(|v| v.kind == ViolationKind::UnknownReference && v.element == "out"));
        assert!(v.iter().any(|v| v.kind == ViolationKind::Probe && v.element == "out"));
    }

    #[test]
    fn zero_cross_section_rejected() {
        let mut n = straight(7.5e-3);
        n.channels[0].width = 0.0;
        assert!(matches!(assign_flows(&n), Err(Error::Flow { .. })));
        let mut n = straight(7.5e-3);
        n.channels[0].from_node = "nowhere".into();
        assert!(matches!(assign_flows(&n), Err(Error::Flow { .. })));
    }

    #[test]
    fn mixing_examples() {
        let q = 1.5e-12;
        assert_eq!(junction_mix(&[(q, &[8.0]), (q, &[0.0])]).unwrap(), vec![4.0]);
        let out = junction_mix(&[(3.0e-12, &[4.0, 0.0]), (1.5e-12, &[0.0, 6.0])]).unwrap();
        assert!((out[0] - 8.0 / 3.0).abs() < 1e-14);
        assert!((out[1] - 2.0).abs() < 1e-14);
        assert_eq!(junction_mix(&[(q, &[1.25, 3.5])]).unwrap(), vec![1.25, 3.5]);
        assert!(junction_mix(&[]).is_err());
        assert!(junction_mix(&[(0.0, &[1.0])]).is_err());
    }

    #[test]
    fn json_round_trip_and_schema() {
        let n = straight(7.5e-3);
        let text = n.to_json();
        assert!(text.contains("\"schema\": \"fluidic-netlist/1\""));
        assert_eq!(Netlist::from_json(&text).unwrap(), n);
        let wrong = text.replace("fluidic-netlist/1", "fluidic-netlist/0");
        assert!(matches!(Netlist::from_json(&wrong), Err(Error::Parse(_))));
        assert!(matches!(Netlist::from_json("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn prefix_and_union() {
        let a = straight(7.5e-3).with_prefix("a_");
        let b = straight(7.5e-3).with_prefix("b_");
        let u = a.disjoint_union(&b).unwrap();
        assert!(validate(&u).is_empty());
        assert_eq!(u.channels.len(), 2);
        assert!(a.disjoint_union(&a).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn mixing_conserves_flux(q1 in 1e-13f64..1e-11, q2 in 1e-13f64..1e-11,
                                     c1 in proptest::collection::vec(0.0f64..10.0, 3),
                                     c2 in proptest::collection::vec(0.0f64..10.0, 3)) {
                let out = junction_mix(&[(q1, &c1), (q2, &c2)]).unwrap();
                for s in 0..3 {
                    let flux_in = q1 * c1[s] + q2 * c2[s];
                    prop_assert!(((q1 + q2) * out[s] - flux_in).abs() <= 1e-12 * flux_in.max(1e-30));
                    prop_assert!(out[s] >= c1[s].min(c2[s]) * (1.0 - 1e-14));
                    prop_assert!(out[s] <= c1[s].max(c2[s]) * (1.0 + 1e-14));
                }
            }
        }
    }
}
