//! One-channel convection–diffusion update on a uniform 1D finite-volume
//! grid: first-order upwind advection with explicit central diffusion.
//!
//! Boundary treatment: the inlet face carries the advective flux of the
//! supplied boundary concentration, the outlet face is zero-gradient, so
//! the outflux equals `u * c_last` and network-level mass is conserved
//! through zero-volume junctions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parallel-plate Taylor–Aris coefficient, `D_eff = D (1 + Pe² / 210)`.
pub const PARALLEL_PLATE_COEFFICIENT: f64 = 1.0 / 210.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DispersionModel {
    Molecular,
    TaylorAris,
}

/// Effective axial diffusivity with the parallel-plate coefficient.
pub fn effective_dispersion(d: f64, u: f64, h: f64, model: DispersionModel) -> Result<f64> {
    effective_dispersion_with(d, u, h, model, PARALLEL_PLATE_COEFFICIENT)
}

/// Effective axial diffusivity, `D (1 + coefficient * (u h / D)²)` for
/// Taylor–Aris, `D` for molecular.
pub fn effective_dispersion_with(
    d: f64,
    u: f64,
    h: f64,
    model: DispersionModel,
    coefficient: f64,
) -> Result<f64> {
    for (name, v) in [("diffusion coefficient", d), ("velocity", u), ("depth", h)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(match model {
        DispersionModel::Molecular => d,
        DispersionModel::TaylorAris => {
            let pe = u * h / d;
            d * (1.0 + coefficient * pe * pe)
        }
    })
}

/// Largest explicit step permitted by advection and diffusion separately.
pub fn stable_dt(dx: f64, u: f64, d_eff: f64) -> f64 {
    let adv = if u > 0.0 { dx / u } else { f64::INFINITY };
    let diff = if d_eff > 0.0 { dx * dx / (2.0 * d_eff) } else { f64::INFINITY };
    adv.min(diff)
}

/// Concentrations of the species carried by one channel, one array per
/// species over the channel's cells [mol/m³].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub dx: f64,
    pub conc: Vec<Vec<f64>>,
    scratch: Vec<f64>,
}

/// Boundary fluxes of one transport step, per species, as
/// concentration × length (multiply by the cross-section for moles).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepFluxes {
    pub influx: Vec<f64>,
    pub outflux: Vec<f64>,
    /// Negative mass removed by clamping, per species.
    pub clamped: Vec<f64>,
    /// Smallest concentration seen before clamping.
    pub min_before_clamp: f64,
}

impl ChannelState {
    pub fn new(species: usize, cells: usize, dx: f64) -> Self {
        Self {
            dx,
            conc: vec![vec![0.0; cells]; species],
            scratch: vec![0.0; cells],
        }
    }

    pub fn cells(&self) -> usize {
        self.scratch.len()
    }

    pub fn species(&self) -> usize {
        self.conc.len()
    }

    /// Amount per unit cross-section of species `s`.
    pub fn mass(&self, s: usize) -> f64 {
        self.conc[s].iter().sum::<f64>() * self.dx
    }

    pub fn outlet(&self, s: usize) -> f64 {
        *self.conc[s].last().expect("channel has cells")
    }

    fn check_stability(&self, u: f64, d_eff: &[f64], dt: f64, cfl: f64) -> Result<()> {
        let d_max = d_eff.iter().copied().fold(0.0, f64::max);
        let bound = cfl * stable_dt(self.dx, u, d_max);
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::Stability {
                channel: String::new(),
                dt,
                bound,
            });
        }
        Ok(())
    }
}

/// Advances `state` by `dt` with velocity `u`, per-species dispersion
/// `d_eff` and inflow concentrations `inlet`.
///
/// Rejects `dt > cfl * min(dx/u, dx²/(2 D_eff))`.
pub fn transport_step(
    state: &mut ChannelState,
    u: f64,
    d_eff: &[f64],
    dt: f64,
    inlet: &[f64],
    cfl: f64,
) -> Result<StepFluxes> {
    let ns = state.species();
    if d_eff.len() != ns || inlet.len() != ns {
        return Err(Error::InvalidInput(format!(
            "transport_step: {ns} species but {} diffusivities and {} inlet values",
            d_eff.len(),
            inlet.len()
        )));
    }
    if !(u >= 0.0) || !(dt >= 0.0) || d_eff.iter().any(|d| !(*d >= 0.0)) {
        return Err(Error::InvalidInput("negative velocity, diffusivity or dt".into()));
    }
    state.check_stability(u, d_eff, dt, cfl)?;

    let n = state.cells();
    let dx = state.dx;
    let mut fluxes = StepFluxes {
        influx: vec![0.0; ns],
        outflux: vec![0.0; ns],
        clamped: vec![0.0; ns],
        min_before_clamp: f64::INFINITY,
    };
    let lambda = u * dt / dx;
    for s in 0..ns {
        let mu = d_eff[s] * dt / (dx * dx);
        let c = &state.conc[s];
        let next = &mut state.scratch;
        // Face fluxes scaled by dt/dx, computed left to right.
        let mut left = lambda * inlet[s];
        for i in 0..n {
            let right = if i + 1 < n {
                lambda * c[i] - mu * (c[i + 1] - c[i])
            } else {
                lambda * c[i]
            };
            next[i] = c[i] - (right - left);
            left = right;
        }
        fluxes.influx[s] = u * dt * inlet[s];
        fluxes.outflux[s] = u * dt * c[n - 1];
        let mut clamped = 0.0;
        for v in next.iter_mut() {
            if *v < fluxes.min_before_clamp {
                fluxes.min_before_clamp = *v;
            }
            if *v < 0.0 {
                clamped -= *v * dx;
                *v = 0.0;
            }
        }
        fluxes.clamped[s] = clamped;
        std::mem::swap(&mut state.conc[s], &mut state.scratch);
    }
    if ns == 0 {
        fluxes.min_before_clamp = 0.0;
    }
    Ok(fluxes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dispersion_examples() {
        assert_eq!(effective_dispersion(1e-8, 7.5e-3, 1e-5, DispersionModel::Molecular).unwrap(), 1e-8);
        let d = effective_dispersion(1e-8, 7.5e-3, 1e-5, DispersionModel::TaylorAris).unwrap();
        assert_relative_eq!(d, 1e-8 * (1.0 + 56.25 / 210.0), max_relative = 1e-14);
        assert_relative_eq!(d, 1.268e-8, max_relative = 1e-3);
        let d = effective_dispersion(1e-8, 1e-12, 1e-5, DispersionModel::TaylorAris).unwrap();
        assert_relative_eq!(d, 1e-8, max_relative = 1e-12);
        assert!(effective_dispersion(0.0, 1.0, 1.0, DispersionModel::Molecular).is_err());
        assert!(effective_dispersion(1e-8, -1.0, 1.0, DispersionModel::TaylorAris).is_err());
    }

    #[test]
    fn still_state_is_unchanged() {
        let mut s = ChannelState::new(1, 20, 1e-6);
        for (i, v) in s.conc[0].iter_mut().enumerate() {
            *v = (i as f64).sin().abs();
        }
        let before = s.conc.clone();
        transport_step(&mut s, 0.0, &[0.0], 1.0, &[5.0], 0.5).unwrap();
        assert_eq!(s.conc, before);
    }

    #[test]
    fn stability_violation_rejected() {
        let mut s = ChannelState::new(1, 10, 5e-6);
        let bound = 0.5 * stable_dt(5e-6, 7.5e-3, 1e-8);
        assert!(transport_step(&mut s, 7.5e-3, &[1e-8], bound, &[1.0], 0.5).is_ok());
        let err = transport_step(&mut s, 7.5e-3, &[1e-8], bound * 1.01, &[1.0], 0.5).unwrap_err();
        assert!(matches!(err, Error::Stability { .. }));
    }

    #[test]
    fn advected_front_tracks_characteristic() {
        // Step entering an empty channel; the 0.5 crossing follows x = u t.
        let (dx, u) = (1e-6, 1e-3);
        let dt = 0.5 * dx / u;
        let mut s = ChannelState::new(1, 400, dx);
        let steps = 300;
        for _ in 0..steps {
            transport_step(&mut s, u, &[0.0], dt, &[1.0], 0.5).unwrap();
        }
        let front = u * dt * steps as f64;
        let c = &s.conc[0];
        let crossing = (0..c.len() - 1).find(|&i| c[i] >= 0.5 && c[i + 1] < 0.5).unwrap();
        let x = (crossing as f64 + 1.0) * dx;
        assert!((x - front).abs() <= dx, "front at {x}, expected {front}");
    }

    #[test]
    fn mass_balance_per_step() {
        let mut s = ChannelState::new(2, 50, 2e-6);
        for (i, v) in s.conc[1].iter_mut().enumerate() {
            *v = (i as f64 * 0.3).cos() + 1.5;
        }
        let (u, d) = (5e-3, [1e-8, 3e-8]);
        let dt = 0.5 * stable_dt(2e-6, u, 3e-8);
        for step in 0..200 {
            let before = [s.mass(0), s.mass(1)];
            let inflow = [if step < 100 { 4.0 } else { 0.0 }, 0.5];
            let f = transport_step(&mut s, u, &d, dt, &inflow, 0.5).unwrap();
            for k in 0..2 {
                let expected = before[k] + f.influx[k] - f.outflux[k] + f.clamped[k];
                let scale = before[k].max(s.mass(k)).max(f.influx[k]).max(1e-30);
                assert!((s.mass(k) - expected).abs() <= 1e-12 * scale);
            }
            assert!(f.min_before_clamp >= -1e-12);
        }
    }
}
