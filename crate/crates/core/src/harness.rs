//! Digital view of simulated circuits: ideal steady-state levels, design
//! windows, path latency, bit schedules, truth-table readout and
//! parameter sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinetics::{eval_profile, ReactionKind, SignalProfile};
use crate::network::{assign_flows, junction_mix, validate, Netlist, OutputRef, Stage};
use crate::solver::{simulate, SolverConfig};
use crate::trace::Trace;

/// Fraction of the largest merged signal level below which an OR-type
/// threshold no longer rejects fluctuations.
pub const DEFAULT_FLUCTUATION_FLOOR: f64 = 0.01;
/// Fraction trimmed from each edge of a readout interval.
pub const DEFAULT_SHRINK: f64 = 0.25;
/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "FLUIDIC_THREADS";

/// Inflow (post-merge) and outflow (after ideal reactions) levels of one
/// channel [mol/m³].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ChannelLevels {
    pub inflow: BTreeMap<String, f64>,
    pub outflow: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComboLevels {
    pub inputs: Vec<bool>,
    /// Output level at the output probe.
    pub output: f64,
    pub channels: BTreeMap<String, ChannelLevels>,
}

/// Ideal steady levels for every input combination, in lexicographic
/// order with input 0 as the most significant bit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPrediction {
    pub inputs: usize,
    pub combos: Vec<ComboLevels>,
}

impl LevelPrediction {
    pub fn output(&self, inputs: &[bool]) -> Option<f64> {
        self.combos.iter().find(|c| c.inputs == inputs).map(|c| c.output)
    }

    /// Largest predicted output level.
    pub fn high(&self) -> f64 {
        self.combos.iter().map(|c| c.output).fold(0.0, f64::max)
    }

    /// Output bits under threshold `theta`, in combination order.
    pub fn truth_table(&self, theta: f64) -> Vec<bool> {
        self.combos.iter().map(|c| c.output > theta).collect()
    }

    fn channel_levels<'a>(&'a self, channel: &'a str) -> impl Iterator<Item = &'a ChannelLevels> + 'a {
        self.combos.iter().filter_map(move |c| c.channels.get(channel))
    }
}

/// Bits of combination `index` among `n` inputs, input 0 most significant.
pub fn combination(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect()
}

fn inlet_levels(netlist: &Netlist, inlet: usize, bits: &[bool]) -> BTreeMap<String, f64> {
    let inlet = &netlist.inlets[inlet];
    inlet
        .profiles
        .iter()
        .map(|(species, profile)| {
            let level = match inlet.input {
                Some(i) if bits.get(i).copied().unwrap_or(false) => profile.high_level(),
                Some(_) => 0.0,
                None => profile.final_level(),
            };
            (species.clone(), level)
        })
        .collect()
}

fn react_ideal(levels: &mut BTreeMap<String, f64>, netlist: &Netlist, channel: usize) {
    for r in &netlist.channels[channel].reactions {
        let a = levels.get(&r.reactant_a).copied().unwrap_or(0.0);
        let b = levels.get(&r.reactant_b).copied().unwrap_or(0.0);
        let produced = match r.kind {
            ReactionKind::Annihilation => {
                let m = a.min(b);
                levels.insert(r.reactant_a.clone(), a - m);
                levels.insert(r.reactant_b.clone(), b - m);
                m
            }
            ReactionKind::Catalytic if a > 0.0 => {
                levels.insert(r.reactant_b.clone(), 0.0);
                b
            }
            ReactionKind::Catalytic => 0.0,
        };
        let is_waste = netlist
            .species
            .index_of(&r.product)
            .map(|i| netlist.species.get(i).waste)
            .unwrap_or(false);
        if !is_waste {
            *levels.entry(r.product.clone()).or_insert(0.0) += produced;
        }
    }
}

/// Propagates ideal steady levels (complete conversion, flow-weighted
/// mixing) through the network for every input combination.
pub fn predict_levels(netlist: &Netlist) -> Result<LevelPrediction> {
    let violations = validate(netlist);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    for c in &netlist.channels {
        if c.reactions.len() > 1 {
            return Err(Error::Unsupported {
                element: c.id.clone(),
                reason: "ideal prediction needs at most one reaction per channel".into(),
            });
        }
    }
    let output = netlist
        .output_ref()
        .ok_or_else(|| Error::InvalidInput("netlist has no output probe".into()))?;
    let probe = netlist.probe(&output.probe).expect("validated probe");
    let flows = assign_flows(netlist)?;
    let order = netlist.topological_channels()?;
    let n = netlist.input_count();

    let mut combos = Vec::with_capacity(1 << n);
    for index in 0..1usize << n {
        let bits = combination(index, n);
        let mut levels: Vec<ChannelLevels> = vec![ChannelLevels::default(); netlist.channels.len()];
        for &ci in &order {
            let ch = &netlist.channels[ci];
            let inflow = if let Some(ii) = netlist.inlets.iter().position(|i| i.id == ch.from_node) {
                inlet_levels(netlist, ii, &bits)
            } else {
                let upstream = netlist.upstream_channels(ci);
                let names: Vec<String> = upstream
                    .iter()
                    .flat_map(|&u| levels[u].outflow.keys().cloned())
                    .collect::<std::collections::BTreeSet<_>>()
                    .into_iter()
                    .collect();
                let vectors: Vec<Vec<f64>> = upstream
                    .iter()
                    .map(|&u| names.iter().map(|s| levels[u].outflow.get(s).copied().unwrap_or(0.0)).collect())
                    .collect();
                let inputs: Vec<(f64, &[f64])> = upstream
                    .iter()
                    .zip(&vectors)
                    .map(|(&u, v)| (flows.at(u).q, v.as_slice()))
                    .collect();
                let mixed = junction_mix(&inputs)?;
                names.into_iter().zip(mixed).collect()
            };
            let mut outflow = inflow.clone();
            react_ideal(&mut outflow, netlist, ci);
            levels[ci] = ChannelLevels { inflow, outflow };
        }
        let pi = netlist.channel_index(&probe.channel).expect("validated channel");
        combos.push(ComboLevels {
            output: levels[pi].outflow.get(&output.species).copied().unwrap_or(0.0),
            inputs: bits,
            channels: netlist
                .channels
                .iter()
                .zip(levels)
                .map(|(c, l)| (c.id.clone(), l))
                .collect(),
        });
    }
    Ok(LevelPrediction { inputs: n, combos })
}

/// One checked inequality of a design window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowCheck {
    pub channel: String,
    pub stage: Stage,
    pub inequality: String,
    /// Distance to the nearest bound; negative when violated.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WindowReport {
    pub checks: Vec<WindowCheck>,
}

impl WindowReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn violations(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} at `{}`: {}", stage_name(c.stage), c.channel, c.inequality))
            .collect()
    }

    pub fn check(&self, channel: &str) -> Option<&WindowCheck> {
        self.checks.iter().find(|c| c.channel == channel)
    }
}

fn stage_name(stage: Stage) -> &'static str {
    match stage {
        Stage::Addition => "addition",
        Stage::AndThreshold => "AND threshold",
        Stage::OrThreshold => "OR threshold",
        Stage::Complement => "complement",
        Stage::Amplification => "amplification",
    }
}

fn num(v: f64) -> String {
    format!("{:.4}", v).trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Relative tolerance for "equal" levels when comparing against bounds.
const LEVEL_TOLERANCE: f64 = 1e-9;

/// Checks the inequality of every annotated stage against the predicted
/// post-merge levels.
pub fn design_window(netlist: &Netlist, prediction: &LevelPrediction, floor_fraction: f64) -> WindowReport {
    let mut checks = Vec::new();
    for ch in &netlist.channels {
        let (Some(stage), Some(r)) = (ch.stage, ch.reactions.first()) else {
            continue;
        };
        let inflows: Vec<&BTreeMap<String, f64>> =
            prediction.channel_levels(&ch.id).map(|l| &l.inflow).collect();
        let level = |m: &BTreeMap<String, f64>, s: &str| m.get(s).copied().unwrap_or(0.0);
        let a_values: Vec<f64> = inflows.iter().map(|m| level(m, &r.reactant_a)).collect();
        let b_max = inflows.iter().map(|m| level(m, &r.reactant_b)).fold(0.0, f64::max);
        let a_max = a_values.iter().copied().fold(0.0, f64::max);
        let tol = LEVEL_TOLERANCE * a_max.max(b_max).max(f64::MIN_POSITIVE);
        let (inequality, slack, pass) = match stage {
            Stage::AndThreshold => {
                let alpha2 = a_max;
                let alpha1 = a_values
                    .iter()
                    .copied()
                    .filter(|v| *v < alpha2 - tol)
                    .fold(0.0, f64::max);
                let c = b_max;
                let slack = (c - alpha1).min(alpha2 - c);
                let rel = |lhs: f64, rhs: f64| if lhs < rhs - tol { "<" } else { "≥" };
                let text = format!(
                    "α1′ = {} {} C_ThL′ = {} {} α2′ = {}",
                    num(alpha1),
                    if alpha1 < c - tol { "<" } else { "≥" },
                    num(c),
                    rel(c, alpha2),
                    num(alpha2)
                );
                (text, slack, slack > tol)
            }
            Stage::OrThreshold => {
                let alpha1 = a_values
                    .iter()
                    .copied()
                    .filter(|v| *v > tol)
                    .fold(f64::INFINITY, f64::min);
                let alpha1 = if alpha1.is_finite() { alpha1 } else { 0.0 };
                let floor = floor_fraction * a_max;
                let c = b_max;
                let slack = (c - floor).min(alpha1 - c);
                let text = format!(
                    "floor = {} {} C_ThL′ = {} {} α1′ = {}",
                    num(floor),
                    if floor < c - tol { "<" } else { "≥" },
                    num(c),
                    if c < alpha1 - tol { "<" } else { "≥" },
                    num(alpha1)
                );
                (text, slack, slack > tol)
            }
            Stage::Addition | Stage::Complement => {
                // The depleting reactant must cover the depleted one wherever it is present.
                let (depleting, depleted) = match stage {
                    Stage::Addition => (&r.reactant_b, &r.reactant_a),
                    _ => (&r.reactant_a, &r.reactant_b),
                };
                let slack = inflows
                    .iter()
                    .filter(|m| stage == Stage::Addition || level(m, depleting) > tol)
                    .map(|m| level(m, depleting) - level(m, depleted))
                    .fold(f64::INFINITY, f64::min);
                let slack = if slack.is_finite() { slack } else { 0.0 };
                let text = format!(
                    "{depleting}′ − {depleted}′ = {} {} 0",
                    num(slack),
                    if slack >= -tol { "≥" } else { "<" }
                );
                (text, slack, slack >= -tol)
            }
            Stage::Amplification => {
                let text = format!("{}′ = {} > 0", r.reactant_b, num(b_max));
                (text, b_max, b_max > tol)
            }
        };
        checks.push(WindowCheck {
            channel: ch.id.clone(),
            stage,
            inequality,
            slack,
            pass,
        });
    }
    WindowReport { checks }
}

/// Longest convective delay from any inlet to the given probe [s].
pub fn latency(netlist: &Netlist, probe: &str) -> Result<f64> {
    let probe = netlist
        .probe(probe)
        .ok_or_else(|| Error::InvalidInput(format!("unknown probe `{probe}`")))?;
    let flows = assign_flows(netlist)?;
    let order = netlist.topological_channels()?;
    let mut arrival = vec![0.0f64; netlist.channels.len()];
    let mut start = vec![0.0f64; netlist.channels.len()];
    for &ci in &order {
        let s = netlist
            .upstream_channels(ci)
            .into_iter()
            .map(|u| arrival[u])
            .fold(0.0, f64::max);
        start[ci] = s;
        arrival[ci] = s + netlist.channels[ci].length / flows.at(ci).u;
    }
    let pi = netlist
        .channel_index(&probe.channel)
        .ok_or_else(|| Error::InvalidInput(format!("probe channel `{}` missing", probe.channel)))?;
    Ok(start[pi] + probe.position / flows.at(pi).u)
}

/// Latency to the netlist's output probe.
pub fn output_latency(netlist: &Netlist) -> Result<f64> {
    let output = netlist
        .output_ref()
        .ok_or_else(|| Error::InvalidInput("netlist has no output probe".into()))?;
    latency(netlist, &output.probe)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub inputs: Vec<bool>,
}

/// Input combinations held over consecutive time intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitSchedule {
    pub intervals: Vec<Interval>,
    pub shrink: f64,
    pub latency: f64,
}

impl BitSchedule {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        for w in intervals.windows(2) {
            if w[1].start < w[0].end {
                return Err(Error::Schedule("intervals must be ordered and disjoint".into()));
            }
        }
        if intervals.iter().any(|i| !(i.end > i.start) || i.start < 0.0) {
            return Err(Error::Schedule("intervals must be non-empty and start at t ≥ 0".into()));
        }
        Ok(Self {
            intervals,
            shrink: DEFAULT_SHRINK,
            latency: 0.0,
        })
    }

    /// One-second intervals stepping through all combinations of `n`
    /// inputs in Gray-code order, starting from all-LOW.
    pub fn gray(n: usize) -> Self {
        let intervals = (0..1usize << n)
            .map(|i| {
                let g = i ^ (i >> 1);
                Interval {
                    start: i as f64,
                    end: i as f64 + 1.0,
                    inputs: (0..n).map(|v| (g >> v) & 1 == 1).collect(),
                }
            })
            .collect();
        Self {
            intervals,
            shrink: DEFAULT_SHRINK,
            latency: 0.0,
        }
    }

    /// Derives the schedule from the input inlets' profiles: every step
    /// onset starts a new interval, ending at the last onset.
    pub fn from_netlist(netlist: &Netlist) -> Result<Self> {
        let n = netlist.input_count();
        let inputs: Vec<(usize, &SignalProfile)> = netlist
            .inlets
            .iter()
            .filter_map(|i| i.input.map(|v| (v, i)))
            .flat_map(|(v, i)| i.profiles.values().map(move |p| (v, p)))
            .collect();
        let mut breaks: Vec<f64> = inputs
            .iter()
            .flat_map(|(_, p)| p.steps().iter().map(|s| s.onset))
            .chain([0.0])
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        if breaks.len() < 2 {
            return Err(Error::Schedule("input profiles have no transitions".into()));
        }
        let mut intervals = Vec::new();
        for w in breaks.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let mut bits = vec![false; n];
            for (v, p) in &inputs {
                if eval_profile(p, mid)? > 0.5 * p.high_level() && *v < n {
                    bits[*v] = true;
                }
            }
            intervals.push(Interval {
                start: w[0],
                end: w[1],
                inputs: bits,
            });
        }
        Self::new(intervals)
    }

    pub fn with_latency(mut self, latency: f64) -> Self {
        self.latency = latency;
        self
    }

    pub fn end(&self) -> f64 {
        self.intervals.last().map_or(0.0, |i| i.end)
    }

    /// Profile of input `var` at `level` following this schedule.
    pub fn input_profile(&self, var: usize, level: f64) -> Result<SignalProfile> {
        let mut steps = Vec::new();
        let mut current = false;
        for i in &self.intervals {
            let bit = i.inputs.get(var).copied().unwrap_or(false);
            if bit != current {
                steps.push((i.start, if bit { level } else { -level }));
                current = bit;
            }
            if current {
                if let Some(next) = self.intervals.iter().find(|n| n.start > i.start) {
                    if next.start > i.end {
                        steps.push((i.end, -level));
                        current = false;
                    }
                }
            }
        }
        if current {
            steps.push((self.end(), -level));
        }
        SignalProfile::new(steps.into_iter().map(Into::into).collect())
    }

    /// Readout window of interval `i`, shifted by the latency and trimmed.
    pub fn window(&self, i: usize) -> (f64, f64) {
        let iv = &self.intervals[i];
        let trim = self.shrink * (iv.end - iv.start);
        (iv.start + self.latency + trim, iv.end + self.latency - trim)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Readout {
    pub start: f64,
    pub end: f64,
    pub inputs: Vec<bool>,
    pub expected: bool,
    pub bit: bool,
    pub mean: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthTableReport {
    pub threshold: f64,
    pub readouts: Vec<Readout>,
    pub pass: bool,
}

impl TruthTableReport {
    pub fn bits(&self) -> Vec<bool> {
        self.readouts.iter().map(|r| r.bit).collect()
    }

    pub fn min_margin(&self) -> f64 {
        self.readouts.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for TruthTableReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.readouts {
            let inputs: String = r.inputs.iter().map(|b| if *b { '1' } else { '0' }).collect();
            writeln!(
                f,
                "[{:.3}, {:.3}) in={inputs} mean={:.4} bit={} expected={} margin={:.3}",
                r.start, r.end, r.mean, r.bit as u8, r.expected as u8, r.margin
            )?;
        }
        write!(f, "{}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Decides one bit per schedule interval (`mean > theta`) and compares
/// it against `truth`.
pub fn read_bits(
    trace: &Trace,
    schedule: &BitSchedule,
    output: &OutputRef,
    theta: f64,
    truth: &dyn Fn(&[bool]) -> bool,
) -> Result<TruthTableReport> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidInput(format!("threshold must be positive, got {theta}")));
    }
    let mut readouts = Vec::with_capacity(schedule.intervals.len());
    for (i, iv) in schedule.intervals.iter().enumerate() {
        let (start, end) = schedule.window(i);
        if end > trace.duration() + 1e-9 {
            return Err(Error::Schedule(format!(
                "readout window [{start}, {end}) extends past the trace end {}",
                trace.duration()
            )));
        }
        let mean = trace.window_mean(&output.probe, &output.species, start, end)?;
        readouts.push(Readout {
            start,
            end,
            inputs: iv.inputs.clone(),
            expected: truth(&iv.inputs),
            bit: mean > theta,
            mean,
            margin: (mean - theta).abs() / theta,
        });
    }
    let pass = readouts.iter().all(|r| r.bit == r.expected);
    Ok(TruthTableReport {
        threshold: theta,
        readouts,
        pass,
    })
}

/// Default decision threshold: half the predicted HIGH level, or half the
/// largest injected level when the circuit never goes HIGH.
pub fn default_threshold(netlist: &Netlist, prediction: &LevelPrediction) -> f64 {
    let high = prediction.high();
    if high > 0.0 {
        return 0.5 * high;
    }
    let injected = netlist
        .inlets
        .iter()
        .flat_map(|i| i.profiles.values())
        .map(SignalProfile::high_level)
        .fold(0.0, f64::max);
    if injected > 0.0 {
        0.5 * injected
    } else {
        1.0
    }
}

/// Everything learned from one simulated check of a circuit.
#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub prediction: LevelPrediction,
    pub window: WindowReport,
    pub latency: f64,
    pub report: TruthTableReport,
    #[serde(skip)]
    pub trace: Trace,
    pub dt: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
}

/// Simulates `netlist` under `schedule` (inferred from its input profiles
/// when absent) and reads its output against `truth`.
pub fn verify(
    netlist: &Netlist,
    config: &SolverConfig,
    schedule: Option<BitSchedule>,
    theta: Option<f64>,
    truth: &dyn Fn(&[bool]) -> bool,
) -> Result<Verification> {
    let prediction = predict_levels(netlist)?;
    let window = design_window(netlist, &prediction, DEFAULT_FLUCTUATION_FLOOR);
    let latency = output_latency(netlist)?;
    let schedule = match schedule {
        Some(s) => s,
        None => BitSchedule::from_netlist(netlist)?,
    }
    .with_latency(latency);
    let theta = theta.unwrap_or_else(|| default_threshold(netlist, &prediction));
    let sim = simulate(netlist, config)?;
    let output = netlist.output_ref().expect("prediction checked the output");
    let report = read_bits(&sim.trace, &schedule, &output, theta, truth)?;
    Ok(Verification {
        prediction,
        window,
        latency,
        report,
        trace: sim.trace,
        dt: sim.dt,
        steps: sim.steps,
        warnings: sim.audit.warnings,
    })
}

/// Quantity varied by a sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepParam {
    /// Injected level of `species` at `inlet` [mol/m³].
    Concentration { inlet: String, species: String },
    /// Length of a channel [m].
    Length { channel: String },
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["conc", inlet, species] => Ok(SweepParam::Concentration {
                inlet: inlet.to_string(),
                species: species.to_string(),
            }),
            ["length", channel] => Ok(SweepParam::Length {
                channel: channel.to_string(),
            }),
            _ => Err(Error::InvalidInput(format!(
                "sweep parameter `{s}` must be `conc:<inlet>:<species>` or `length:<channel>`"
            ))),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParam::Concentration { inlet, species } => write!(f, "conc:{inlet}:{species}"),
            SweepParam::Length { channel } => write!(f, "length:{channel}"),
        }
    }
}

impl SweepParam {
    /// Copy of `netlist` with the parameter set to `value`. Time-varying
    /// profiles are rescaled so their HIGH level equals `value`.
    pub fn apply(&self, netlist: &Netlist, value: f64) -> Result<Netlist> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidInput(format!("sweep value must be non-negative, got {value}")));
        }
        let mut out = netlist.clone();
        match self {
            SweepParam::Concentration { inlet, species } => {
                let target = out
                    .inlets
                    .iter_mut()
                    .find(|i| &i.id == inlet)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown inlet `{inlet}`")))?;
                let current = target.profiles.get(species).filter(|p| p.high_level() > 0.0);
                let profile = match current {
                    _ if value == 0.0 => SignalProfile::empty(),
                    Some(p) => p.scaled(value / p.high_level())?,
                    None => SignalProfile::constant(value)?,
                };
                target.profiles.insert(species.clone(), profile);
            }
            SweepParam::Length { channel } => {
                if value == 0.0 {
                    return Err(Error::InvalidInput("channel length must be positive".into()));
                }
                let target = out
                    .channels
                    .iter_mut()
                    .find(|c| &c.id == channel)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown channel `{channel}`")))?;
                target.length = value;
            }
        }
        Ok(out)
    }
}

/// `from, from + step, …` up to `to` inclusive; empty when `from > to`.
pub fn sweep_values(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) || !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidInput(format!("invalid sweep range {from}..{to} step {step}")));
    }
    let mut values = Vec::new();
    let mut i = 0u32;
    loop {
        let v = from + f64::from(i) * step;
        if v > to + 1e-9 * step {
            break;
        }
        values.push(v);
        i += 1;
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub pass: bool,
    pub margin: f64,
    pub window: bool,
}

/// Simulates and reads out the netlist at each parameter value, using
/// the nominal netlist's threshold and truth table. Points run in
/// parallel; results keep the order of `values`.
pub fn sweep(
    netlist: &Netlist,
    param: &SweepParam,
    values: &[f64],
    config: &SolverConfig,
) -> Result<Vec<SweepPoint>> {
    let nominal = predict_levels(netlist)?;
    let theta = default_threshold(netlist, &nominal);
    let table = nominal.truth_table(theta);
    let n = nominal.inputs;
    let truth = move |bits: &[bool]| {
        let index = bits.iter().fold(0usize, |acc, b| (acc << 1) | usize::from(*b));
        table.get(index).copied().unwrap_or(false)
    };
    let run = |&value: &f64| -> Result<SweepPoint> {
        let variant = param.apply(netlist, value)?;
        debug_assert_eq!(variant.input_count(), n);
        let v = verify(&variant, config, None, Some(theta), &truth)?;
        Ok(SweepPoint {
            value,
            pass: v.report.pass,
            margin: v.report.min_margin(),
            window: v.window.pass(),
        })
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        pool = pool.num_threads(threads.max(1));
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start sweep workers: {e}")))?;
    pool.install(|| values.par_iter().map(run).collect())
}

/// `value,pass,margin,window` rows.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("value,pass,margin,window\n");
    for p in points {
        out.push_str(&format!("{},{},{},{}\n", p.value, p.pass, p.margin, p.window));
    }
    out
}
