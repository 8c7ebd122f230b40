//! Network-level time integration.
//!
//! Every step walks the channels in topological order: the inflow of each
//! channel is either an inlet profile value or the flow-weighted mix of its
//! upstream channels' outlet cells, then the channel is transported and its
//! reactions are applied cell by cell in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{annihilation_step, catalytic_step, eval_profile, ReactionKind};
use crate::network::{assign_flows, validate, Netlist};
use crate::trace::Trace;
use crate::transport::{
    effective_dispersion_with, stable_dt, transport_step, ChannelState, DispersionModel,
    PARALLEL_PLATE_COEFFICIENT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Splitting {
    /// transport, then reaction
    Lie,
    /// half reaction, transport, half reaction
    Strang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Target cell size [m]; each channel rounds it so cells tile its length.
    pub dx: f64,
    /// Fixed time step [s]; derived from the stability rule when absent.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub cfl: f64,
    pub dispersion: DispersionModel,
    pub dispersion_coefficient: f64,
    pub splitting: Splitting,
    /// Steps per trace sample; about one sample per millisecond when absent.
    pub record_stride: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dx: 5e-6,
            dt: None,
            t_end: 5.0,
            cfl: 0.5,
            dispersion: DispersionModel::TaylorAris,
            dispersion_coefficient: PARALLEL_PLATE_COEFFICIENT,
            splitting: Splitting::Lie,
            record_stride: None,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(Error::InvalidInput(format!("dx must be positive, got {}", self.dx)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidInput(format!("CFL factor must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidInput(format!("t_end must be positive, got {}", self.t_end)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
            }
        }
        if self.record_stride == Some(0) {
            return Err(Error::InvalidInput("record stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Bookkeeping of injected and clamped mass [mol], per species.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MassAudit {
    pub injected: Vec<f64>,
    pub clamped: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub trace: Trace,
    pub dt: f64,
    pub steps: usize,
    pub audit: MassAudit,
}

#[derive(Debug, Clone, Copy)]
struct LocalReaction {
    kind: ReactionKind,
    a: usize,
    b: usize,
    product: Option<usize>,
    k: f64,
}

struct ChannelRun {
    species: Vec<usize>,
    state: ChannelState,
    d_eff: Vec<f64>,
    u: f64,
    q: f64,
    area: f64,
    inlet: Option<usize>,
    upstream: Vec<usize>,
    reactions: Vec<LocalReaction>,
    /// Outlet concentration in global species indexing.
    outflow: Vec<f64>,
    inflow_local: Vec<f64>,
}

impl ChannelRun {
    fn react(&mut self, h: f64) -> Result<()> {
        if self.reactions.is_empty() || h == 0.0 {
            return Ok(());
        }
        let cells = self.state.cells();
        let conc = &mut self.state.conc;
        for cell in 0..cells {
            for r in &self.reactions {
                match r.kind {
                    ReactionKind::Annihilation => {
                        let step = annihilation_step(conc[r.a][cell], conc[r.b][cell], r.k, h)?;
                        conc[r.a][cell] = step.a;
                        conc[r.b][cell] = step.b;
                        if let Some(p) = r.product {
                            conc[p][cell] += step.converted;
                        }
                    }
                    ReactionKind::Catalytic => {
                        let step = catalytic_step(conc[r.a][cell], conc[r.b][cell], r.k, h)?;
                        conc[r.b][cell] = step.substrate;
                        if let Some(p) = r.product {
                            conc[p][cell] += step.gain;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

struct ProbeColumn {
    channel: usize,
    cell: usize,
    local: Option<usize>,
}

/// Integrates `netlist` from rest up to `config.t_end`.
pub fn simulate(netlist: &Netlist, config: &SolverConfig) -> Result<Simulation> {
    config.check()?;
    let violations = validate(netlist);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let flows = assign_flows(netlist)?;
    let order = netlist.topological_channels()?;
    let table = &netlist.species;
    let n_species = table.len();
    let tracked = |name: &str| table.index_of(name).filter(|&i| !table.get(i).waste);

    // Species each channel can carry: injected, produced, or inherited.
    let mut carried: Vec<Vec<bool>> = vec![vec![false; n_species]; netlist.channels.len()];
    for &ci in &order {
        let c = &netlist.channels[ci];
        let mut set = vec![false; n_species];
        if let Some(inlet) = netlist.inlet(&c.from_node) {
            for name in inlet.profiles.keys() {
                if let Some(i) = tracked(name) {
                    set[i] = true;
                }
            }
        }
        for up in netlist.upstream_channels(ci) {
            for (s, v) in set.iter_mut().zip(&carried[up]) {
                *s |= *v;
            }
        }
        for r in &c.reactions {
            for name in [&r.reactant_a, &r.reactant_b, &r.product] {
                if let Some(i) = tracked(name) {
                    set[i] = true;
                }
            }
        }
        carried[ci] = set;
    }

    let mut runs = Vec::with_capacity(netlist.channels.len());
    let mut dt_bound = f64::INFINITY;
    let mut bound_channel = String::new();
    for (ci, c) in netlist.channels.iter().enumerate() {
        let flow = flows.at(ci);
        let species: Vec<usize> = (0..n_species).filter(|&s| carried[ci][s]).collect();
        let cells = ((c.length / config.dx).round() as usize).max(1);
        let dx = c.length / cells as f64;
        let d_eff = species
            .iter()
            .map(|&s| {
                effective_dispersion_with(
                    table.get(s).diffusion_coefficient,
                    flow.u,
                    c.depth,
                    config.dispersion,
                    config.dispersion_coefficient,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let d_max = d_eff.iter().copied().fold(0.0, f64::max);
        let bound = config.cfl * stable_dt(dx, flow.u, d_max);
        if bound < dt_bound {
            dt_bound = bound;
            bound_channel = c.id.clone();
        }
        let local = |name: &str| {
            tracked(name).and_then(|g| species.iter().position(|&s| s == g))
        };
        let reactions = c
            .reactions
            .iter()
            .map(|r| {
                // Waste reactants are never present, so such a reaction is inert.
                let a = local(&r.reactant_a);
                let b = local(&r.reactant_b);
                Ok(a.zip(b).map(|(a, b)| LocalReaction {
                    kind: r.kind,
                    a,
                    b,
                    product: local(&r.product),
                    k: r.rate_constant,
                }))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        runs.push(ChannelRun {
            state: ChannelState::new(species.len(), cells, dx),
            inflow_local: vec![0.0; species.len()],
            species,
            d_eff,
            u: flow.u,
            q: flow.q,
            area: c.cross_section(),
            inlet: netlist.inlets.iter().position(|i| i.id == c.from_node),
            upstream: netlist.upstream_channels(ci),
            reactions,
            outflow: vec![0.0; n_species],
        });
    }

    let dt = match config.dt {
        Some(dt) if dt > dt_bound * (1.0 + 1e-12) => {
            return Err(Error::Stability {
                channel: bound_channel,
                dt,
                bound: dt_bound,
            })
        }
        Some(dt) => dt,
        None => dt_bound,
    };
    if !dt.is_finite() {
        return Err(Error::InvalidInput("netlist has no channel to bound the time step".into()));
    }
    let steps = (config.t_end / dt).ceil() as usize;
    let stride = config
        .record_stride
        .unwrap_or_else(|| ((1e-3 / dt).round() as usize).max(1));

    let mut columns = Vec::new();
    let mut labels = Vec::new();
    for p in &netlist.probes {
        let ci = netlist.channel_index(&p.channel).expect("validated probe");
        let run = &runs[ci];
        let cell = ((p.position / run.state.dx) as usize).min(run.state.cells() - 1);
        for name in &p.species {
            let local = tracked(name).and_then(|g| run.species.iter().position(|&s| s == g));
            columns.push(ProbeColumn { channel: ci, cell, local });
            labels.push((p.id.clone(), name.clone()));
        }
    }
    let mut trace = Trace::new(labels);
    let mut sample = vec![0.0; columns.len()];
    let record = |runs: &[ChannelRun], trace: &mut Trace, sample: &mut Vec<f64>, t: f64| {
        for (v, col) in sample.iter_mut().zip(&columns) {
            *v = col
                .local
                .map_or(0.0, |s| runs[col.channel].state.conc[s][col.cell]);
        }
        trace.push(t, sample);
    };
    record(&runs, &mut trace, &mut sample, 0.0);

    let mut audit = MassAudit {
        injected: vec![0.0; n_species],
        clamped: vec![0.0; n_species],
        warnings: Vec::new(),
    };
    let mut inlet_values: Vec<Vec<f64>> = vec![vec![0.0; n_species]; netlist.inlets.len()];
    let mut mix = vec![0.0; n_species];

    for n in 0..steps {
        let t = n as f64 * dt;
        for (inlet, values) in netlist.inlets.iter().zip(inlet_values.iter_mut()) {
            values.iter_mut().for_each(|v| *v = 0.0);
            for (name, profile) in &inlet.profiles {
                if let Some(s) = tracked(name) {
                    values[s] = eval_profile(profile, t)?;
                    audit.injected[s] += inlet.flow_rate() * values[s] * dt;
                }
            }
        }
        for &ci in &order {
            // Inflow in global indexing, from an inlet or the junction mix.
            if let Some(i) = runs[ci].inlet {
                mix.copy_from_slice(&inlet_values[i]);
            } else {
                mix.iter_mut().for_each(|v| *v = 0.0);
                let mut q_total = 0.0;
                for k in 0..runs[ci].upstream.len() {
                    let up = &runs[runs[ci].upstream[k]];
                    q_total += up.q;
                    for (m, o) in mix.iter_mut().zip(&up.outflow) {
                        *m += up.q * o;
                    }
                }
                mix.iter_mut().for_each(|v| *v /= q_total);
            }
            let run = &mut runs[ci];
            for (l, &g) in run.species.iter().enumerate() {
                run.inflow_local[l] = mix[g];
            }
            if config.splitting == Splitting::Strang {
                run.react(0.5 * dt)?;
            }
            let fluxes = transport_step(&mut run.state, run.u, &run.d_eff, dt, &run.inflow_local, 1.0)
                .map_err(|e| match e {
                    Error::Stability { dt, bound, .. } => Error::Stability {
                        channel: netlist.channels[ci].id.clone(),
                        dt,
                        bound,
                    },
                    other => other,
                })?;
            match config.splitting {
                Splitting::Lie => run.react(dt)?,
                Splitting::Strang => run.react(0.5 * dt)?,
            }
            for (l, &g) in run.species.iter().enumerate() {
                audit.clamped[g] += fluxes.clamped[l] * run.area;
                run.outflow[g] = run.state.outlet(l);
            }
        }
        if (n + 1) % stride == 0 || n + 1 == steps {
            record(&runs, &mut trace, &mut sample, (n + 1) as f64 * dt);
        }
    }

    let injected: f64 = audit.injected.iter().sum();
    let clamped: f64 = audit.clamped.iter().sum();
    if clamped > 1e-9 * injected {
        audit.warnings.push(format!(
            "clamped {clamped:.3e} mol of negative concentration ({:.3e} of injected mass)",
            clamped / injected.max(f64::MIN_POSITIVE)
        ));
    }

    Ok(Simulation {
        trace,
        dt,
        steps,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::{SignalProfile, Species};
    use crate::network::{ChannelSpec, Inlet, NetlistBuilder, Probe};

    fn straight(level: f64, length: f64) -> Netlist {
        let mut b = NetlistBuilder::new();
        b.species(Species::new("A", 1e-8)).unwrap();
        b.inlet(Inlet {
            id: "in".into(),
            profiles: [("A".to_string(), SignalProfile::constant(level).unwrap())].into(),
            width: 20e-6,
            depth: 10e-6,
            velocity: 7.5e-3,
            input: None,
        });
        b.channel(ChannelSpec {
            id: "c".into(),
            length,
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
            position: length,
            species: vec!["A".into()],
        });
        b.finish()
    }

    #[test]
    fn plateau_after_residence_time() {
        let n = straight(8.0, 1e-3);
        let cfg = SolverConfig {
            t_end: 0.4,
            ..SolverConfig::default()
        };
        let sim = simulate(&n, &cfg).unwrap();
        let out = sim.trace.column("out", "A").unwrap();
        let residence = 1e-3 / 7.5e-3;
        // Well past the residence time the outlet sits on the inlet level.
        let late = sim.trace.window_mean("out", "A", 2.0 * residence, 0.4).unwrap();
        assert!((late - 8.0).abs() < 1e-6, "{late}");
        // Nothing has arrived halfway through the residence time.
        let idx = sim.trace.times.iter().position(|&t| t >= 0.5 * residence).unwrap();
        assert!(out[idx] < 1e-3);
        assert!(sim.audit.warnings.is_empty());
    }

    #[test]
    fn explicit_dt_checked() {
        let n = straight(8.0, 1e-3);
        let cfg = SolverConfig {
            t_end: 0.01,
            dt: Some(1e-3),
            ..SolverConfig::default()
        };
        match simulate(&n, &cfg) {
            Err(Error::Stability { channel, bound, .. }) => {
                assert_eq!(channel, "c");
                assert!(bound < 1e-3);
            }
            other => panic!("expected stability error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_netlist_rejected() {
        let mut n = straight(8.0, 1e-3);
        n.probes[0].channel = "missing".into();
        assert!(matches!(
            simulate(&n, &SolverConfig::default()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn bad_config_rejected() {
        let n = straight(8.0, 1e-3);
        for cfg in [
            SolverConfig { cfl: 1.5, ..SolverConfig::default() },
            SolverConfig { dx: 0.0, ..SolverConfig::default() },
            SolverConfig { t_end: -1.0, ..SolverConfig::default() },
        ] {
            assert!(matches!(simulate(&n, &cfg), Err(Error::InvalidInput(_))));
        }
    }
}
