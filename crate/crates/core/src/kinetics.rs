//! Species, reactions, injected signal profiles and the closed-form
//! single-step kinetics used by the solver's reaction substep.
//!
//! Two reaction forms are supported:
//!
//! - annihilation `A + B -> P`, one unit of each reactant per unit product;
//! - catalytic conversion `A + B -> A + P`, where `A` is left untouched.
//!
//! Both are integrated exactly over a step, so the reaction substep is
//! unconditionally stable however large `k * c * dt` gets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A registered chemical species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    /// Molecular diffusion coefficient [m²/s].
    pub diffusion_coefficient: f64,
    /// Waste species are not transported; production into them is discarded.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub waste: bool,
}

impl Species {
    pub fn new(name: impl Into<String>, diffusion_coefficient: f64) -> Self {
        Self {
            name: name.into(),
            diffusion_coefficient,
            waste: false,
        }
    }

    pub fn waste(name: impl Into<String>, diffusion_coefficient: f64) -> Self {
        Self {
            waste: true,
            ..Self::new(name, diffusion_coefficient)
        }
    }
}

/// Registry of species, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpeciesTable {
    entries: Vec<Species>,
}

impl SpeciesTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table, rejecting duplicate or malformed entries.
    pub fn from_entries(entries: Vec<Species>) -> Result<Self> {
        let table = Self { entries };
        if let Some(problem) = table.problems().into_iter().next() {
            return Err(Error::InvalidInput(problem));
        }
        Ok(table)
    }

    /// Adds a species, or checks that an existing entry agrees with it.
    pub fn insert(&mut self, species: Species) -> Result<usize> {
        if let Some(i) = self.index_of(&species.name) {
            if self.entries[i] != species {
                return Err(Error::InvalidInput(format!(
                    "species `{}` registered twice with different properties",
                    species.name
                )));
            }
            return Ok(i);
        }
        if !is_identifier(&species.name) {
            return Err(Error::InvalidInput(format!(
                "species name `{}` is not an identifier",
                species.name
            )));
        }
        if !(species.diffusion_coefficient > 0.0 && species.diffusion_coefficient.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "species `{}` needs a positive diffusion coefficient",
                species.name
            )));
        }
        self.entries.push(species);
        Ok(self.entries.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Species> {
        self.entries.iter()
    }

    pub fn get(&self, index: usize) -> &Species {
        &self.entries[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|s| s.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    pub(crate) fn entries_mut(&mut self) -> &mut Vec<Species> {
        &mut self.entries
    }

    /// Invariant violations, one message each.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, s) in self.entries.iter().enumerate() {
            if !is_identifier(&s.name) {
                out.push(format!("species name `{}` is not an identifier", s.name));
            }
            if self.entries[..i].iter().any(|o| o.name == s.name) {
                out.push(format!("species `{}` is declared more than once", s.name));
            }
            if !(s.diffusion_coefficient > 0.0 && s.diffusion_coefficient.is_finite()) {
                out.push(format!(
                    "species `{}` has non-positive diffusion coefficient {}",
                    s.name, s.diffusion_coefficient
                ));
            }
        }
        out
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReactionKind {
    /// `A + B -> P`
    Annihilation,
    /// `A + B -> A + P`, `A` acting as catalyst.
    Catalytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub kind: ReactionKind,
    pub reactant_a: String,
    pub reactant_b: String,
    pub product: String,
    /// Rate constant [m³/(mol·s)].
    pub rate_constant: f64,
}

impl Reaction {
    pub fn annihilation(a: &str, b: &str, product: &str, rate_constant: f64) -> Self {
        Self {
            kind: ReactionKind::Annihilation,
            reactant_a: a.to_string(),
            reactant_b: b.to_string(),
            product: product.to_string(),
            rate_constant,
        }
    }

    pub fn catalytic(catalyst: &str, substrate: &str, product: &str, rate_constant: f64) -> Self {
        Self {
            kind: ReactionKind::Catalytic,
            reactant_a: catalyst.to_string(),
            reactant_b: substrate.to_string(),
            product: product.to_string(),
            rate_constant,
        }
    }

    pub fn problems(&self, species: &SpeciesTable) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.rate_constant > 0.0 && self.rate_constant.is_finite()) {
            out.push(format!("rate constant {} is not positive", self.rate_constant));
        }
        if self.reactant_a == self.reactant_b {
            out.push(format!("reactants are both `{}`", self.reactant_a));
        }
        if self.kind == ReactionKind::Catalytic
            && (self.product == self.reactant_a || self.product == self.reactant_b)
        {
            out.push(format!("catalytic product `{}` is also a reactant", self.product));
        }
        for name in [&self.reactant_a, &self.reactant_b, &self.product] {
            if !species.contains(name) {
                out.push(format!("species `{name}` is not declared"));
            }
        }
        out
    }
}

impl std::fmt::Display for Reaction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ReactionKind::Annihilation => write!(
                f,
                "{}+{}->{}",
                self.reactant_a, self.reactant_b, self.product
            ),
            ReactionKind::Catalytic => write!(
                f,
                "{}+{}->{}+{}",
                self.reactant_a, self.reactant_b, self.reactant_a, self.product
            ),
        }
    }
}

/// One Heaviside step `increment * u(t - onset)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Step {
    pub onset: f64,
    pub increment: f64,
}

impl From<(f64, f64)> for Step {
    fn from((onset, increment): (f64, f64)) -> Self {
        Self { onset, increment }
    }
}

impl From<Step> for (f64, f64) {
    fn from(s: Step) -> Self {
        (s.onset, s.increment)
    }
}

/// Piecewise-constant injected concentration, a sum of Heaviside steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct SignalProfile {
    steps: Vec<Step>,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    steps: Vec<Step>,
}

impl TryFrom<RawProfile> for SignalProfile {
    type Error = Error;
    fn try_from(raw: RawProfile) -> Result<Self> {
        SignalProfile::new(raw.steps)
    }
}

impl From<SignalProfile> for RawProfile {
    fn from(p: SignalProfile) -> Self {
        RawProfile { steps: p.steps }
    }
}

impl SignalProfile {
    /// Onsets must be finite, non-negative and non-decreasing, and the
    /// resulting level may never go negative.
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        let mut level = 0.0;
        let mut previous = 0.0;
        for (i, s) in steps.iter().enumerate() {
            if !s.onset.is_finite() || !s.increment.is_finite() || s.onset < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "profile step {i} has invalid onset/increment ({}, {})",
                    s.onset, s.increment
                )));
            }
            if s.onset < previous {
                return Err(Error::InvalidInput(format!(
                    "profile onsets must be non-decreasing (step {i} at {} after {previous})",
                    s.onset
                )));
            }
            previous = s.onset;
            level += s.increment;
            // Steps sharing an onset take effect together.
            let last_at_onset = steps.get(i + 1).is_none_or(|n| n.onset > s.onset);
            if last_at_onset && level < -1e-12 {
                return Err(Error::InvalidInput(format!(
                    "profile goes negative ({level}) at t = {}",
                    s.onset
                )));
            }
        }
        Ok(Self { steps })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `level * u(t)`
    pub fn constant(level: f64) -> Result<Self> {
        Self::new(vec![Step::from((0.0, level))])
    }

    /// `level * [u(t - start) - u(t - end)]`
    pub fn pulse(level: f64, start: f64, end: f64) -> Result<Self> {
        if end < start {
            return Err(Error::InvalidInput(format!("pulse ends ({end}) before it starts ({start})")));
        }
        Self::new(vec![Step::from((start, level)), Step::from((end, -level))])
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Level after every step has fired.
    pub fn final_level(&self) -> f64 {
        self.steps.iter().map(|s| s.increment).sum::<f64>().max(0.0)
    }

    /// Largest level the profile ever reaches.
    pub fn high_level(&self) -> f64 {
        let mut level: f64 = 0.0;
        let mut best: f64 = 0.0;
        for s in &self.steps {
            level += s.increment;
            best = best.max(level);
        }
        best
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.steps
                .iter()
                .map(|s| Step::from((s.onset, s.increment * factor)))
                .collect(),
        )
    }
}

/// Value of the profile at `t`: the sum of all increments with onset `<= t`.
pub fn eval_profile(profile: &SignalProfile, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("profile evaluated at negative time {t}")));
    }
    let v: f64 = profile
        .steps
        .iter()
        .take_while(|s| s.onset <= t)
        .map(|s| s.increment)
        .sum();
    Ok(v.max(0.0))
}

/// Result of one exact annihilation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnihilationStep {
    pub a: f64,
    pub b: f64,
    /// Amount of each reactant converted into product.
    pub converted: f64,
}

fn check_non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite and non-negative, got {v}")))
    }
}

/// `(1 - exp(-s)) / s`, continuous at `s = 0`.
fn relaxation_factor(s: f64) -> f64 {
    if s < 1e-300 {
        1.0
    } else {
        -(-s).exp_m1() / s
    }
}

/// Exact solution of `dx/dt = k (a - x)(b - x)` over `dt`.
///
/// With `lo <= hi` the reactants, `s = k dt (hi - lo)` and
/// `phi = (1 - e^-s)/s`, the surviving minority reactant is
/// `lo' = lo e^-s / (1 + lo k dt phi)`, which reduces to
/// `lo / (1 + lo k dt)` when the reactants are equal.
pub fn annihilation_step(a: f64, b: f64, k: f64, dt: f64) -> Result<AnnihilationStep> {
    check_non_negative("reactant a", a)?;
    check_non_negative("reactant b", b)?;
    check_non_negative("rate constant", k)?;
    check_non_negative("dt", dt)?;
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let kdt = k * dt;
    let lo_after = if lo == 0.0 || kdt == 0.0 {
        lo
    } else if !kdt.is_finite() {
        0.0
    } else {
        let s = kdt * (hi - lo);
        let phi = relaxation_factor(s);
        let denom = 1.0 + lo * kdt * phi;
        if denom.is_finite() {
            lo * (-s).exp() / denom
        } else {
            0.0
        }
    };
    let converted = lo - lo_after;
    let (a_after, b_after) = if a <= b {
        (lo_after, hi - converted)
    } else {
        (hi - converted, lo_after)
    };
    Ok(AnnihilationStep {
        a: a_after,
        b: b_after,
        converted,
    })
}

/// Result of one exact catalytic step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalyticStep {
    pub substrate: f64,
    /// Product formed during the step.
    pub gain: f64,
}

/// `amp' = amp * exp(-k * cat * dt)`; the catalyst is unchanged.
pub fn catalytic_step(cat: f64, amp: f64, k: f64, dt: f64) -> Result<CatalyticStep> {
    check_non_negative("catalyst", cat)?;
    check_non_negative("substrate", amp)?;
    check_non_negative("rate constant", k)?;
    check_non_negative("dt", dt)?;
    let s = k * cat * dt;
    let substrate = if s.is_finite() { amp * (-s).exp() } else { 0.0 };
    Ok(CatalyticStep {
        substrate,
        gain: amp - substrate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn paper_i1() -> SignalProfile {
        SignalProfile::pulse(8.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn profile_values() {
        assert_eq!(eval_profile(&paper_i1(), 2.0).unwrap(), 8.0);
        assert_eq!(eval_profile(&paper_i1(), 0.5).unwrap(), 0.0);
        assert_eq!(eval_profile(&paper_i1(), 3.0).unwrap(), 0.0);
        assert_eq!(eval_profile(&paper_i1(), 1.0).unwrap(), 8.0);
        assert_eq!(eval_profile(&SignalProfile::empty(), 17.0).unwrap(), 0.0);
        assert!(eval_profile(&paper_i1(), -0.1).is_err());
        assert_eq!(paper_i1().high_level(), 8.0);
        assert_eq!(paper_i1().final_level(), 0.0);
    }

    #[test]
    fn profile_rejects_bad_steps() {
        assert!(SignalProfile::new(vec![Step::from((0.0, -1.0))]).is_err());
        assert!(SignalProfile::new(vec![Step::from((2.0, 1.0)), Step::from((1.0, 1.0))]).is_err());
        assert!(SignalProfile::new(vec![Step::from((-1.0, 1.0))]).is_err());
        // Simultaneous steps are judged together.
        assert!(SignalProfile::new(vec![Step::from((1.0, -1.0)), Step::from((1.0, 1.0))]).is_ok());
    }

    #[test]
    fn profile_json_shape() {
        let json = serde_json::to_string(&paper_i1()).unwrap();
        assert_eq!(json, r#"{"steps":[[1.0,8.0],[3.0,-8.0]]}"#);
        let back: SignalProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, paper_i1());
        assert!(serde_json::from_str::<SignalProfile>(r#"{"steps":[[0.0,-2.0]]}"#).is_err());
    }

    #[test]
    fn annihilation_examples() {
        let r = annihilation_step(4.0, 0.0, 5000.0, 0.01).unwrap();
        assert_eq!((r.a, r.b, r.converted), (4.0, 0.0, 0.0));

        let r = annihilation_step(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(r.a, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r.b, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r.converted, 0.5, epsilon = 1e-15);

        let r = annihilation_step(4.0, 2.0, 5000.0, 0.01).unwrap();
        assert!((r.a - 2.0).abs() < 1e-9);
        assert!(r.b.abs() < 1e-9);
    }

    #[test]
    fn annihilation_limits() {
        // Overflowing exponent collapses to the minority reactant.
        let r = annihilation_step(3.0, 1.0, 1e300, 1e10).unwrap();
        assert_eq!(r.converted, 1.0);
        assert_eq!(r.b, 0.0);
        let r = annihilation_step(1.0, 3.0, 5000.0, 0.0).unwrap();
        assert_eq!((r.a, r.b), (1.0, 3.0));
        assert!(annihilation_step(-1.0, 1.0, 1.0, 1.0).is_err());
        assert!(annihilation_step(1.0, 1.0, 1.0, -1.0).is_err());
        assert!(annihilation_step(f64::NAN, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn catalytic_examples() {
        let r = catalytic_step(0.0, 1.0, 5000.0, 1.0).unwrap();
        assert_eq!((r.substrate, r.gain), (1.0, 0.0));

        let r = catalytic_step(0.5, 1.0, 5000.0, 0.005).unwrap();
        assert_relative_eq!(r.substrate, (-12.5f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(r.substrate, 3.73e-6, max_relative = 1e-3);
        assert_relative_eq!(r.gain, 1.0, epsilon = 1e-5);

        let r = catalytic_step(2.0, 3.0, 5000.0, 0.0).unwrap();
        assert_eq!((r.substrate, r.gain), (3.0, 0.0));
        assert!(catalytic_step(1.0, -3.0, 5000.0, 1.0).is_err());
    }

    #[test]
    fn species_table_rules() {
        let mut t = SpeciesTable::new();
        t.insert(Species::new("I1", 1e-8)).unwrap();
        assert_eq!(t.insert(Species::new("I1", 1e-8)).unwrap(), 0);
        assert!(t.insert(Species::new("I1", 2e-8)).is_err());
        assert!(t.insert(Species::new("", 1e-8)).is_err());
        assert!(t.insert(Species::new("bad name", 1e-8)).is_err());
        assert!(t.insert(Species::new("Z", 0.0)).is_err());
        assert!(SpeciesTable::from_entries(vec![Species::new("A", 1e-8), Species::new("A", 1e-8)]).is_err());
    }

    #[test]
    fn reaction_rules() {
        let t = SpeciesTable::from_entries(vec![Species::new("A", 1e-8), Species::new("B", 1e-8)]).unwrap();
        assert!(Reaction::annihilation("A", "B", "A", 1.0).problems(&t).is_empty());
        assert!(!Reaction::annihilation("A", "A", "B", 1.0).problems(&t).is_empty());
        assert!(!Reaction::annihilation("A", "B", "C", 1.0).problems(&t).is_empty());
        assert!(!Reaction::annihilation("A", "B", "A", 0.0).problems(&t).is_empty());
        assert!(!Reaction::catalytic("A", "B", "A", 1.0).problems(&t).is_empty());
        assert_eq!(Reaction::catalytic("N", "Amp", "O", 1.0).to_string(), "N+Amp->N+O");
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn annihilation_conserves(a in 0.0f64..10.0, b in 0.0f64..10.0, kdt in 0.0f64..100.0) {
                let r = annihilation_step(a, b, 5000.0, kdt / 5000.0).unwrap();
                let scale = a.max(b).max(1.0);
                prop_assert!(((r.a - r.b) - (a - b)).abs() <= 4.0 * f64::EPSILON * scale);
                prop_assert!((r.a + r.converted - a).abs() <= 4.0 * f64::EPSILON * scale);
                prop_assert!((r.b + r.converted - b).abs() <= 4.0 * f64::EPSILON * scale);
                prop_assert!(r.converted >= 0.0 && r.converted <= a.min(b));
            }

            #[test]
            fn catalytic_conserves_and_is_monotone(cat in 0.0f64..10.0, amp in 0.0f64..10.0,
                                                   dt1 in 0.0f64..0.01, extra in 0.0f64..0.01) {
                let r1 = catalytic_step(cat, amp, 5000.0, dt1).unwrap();
                let r2 = catalytic_step(cat, amp, 5000.0, dt1 + extra).unwrap();
                prop_assert!((r1.substrate + r1.gain - amp).abs() <= 2.0 * f64::EPSILON * amp.max(1.0));
                prop_assert!(r2.substrate <= r1.substrate);
            }
        }
    }
}
