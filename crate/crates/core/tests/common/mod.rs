//! Reference solutions shared by the integration and acceptance tests.
#![allow(dead_code)]

use fluidic::kinetics::{annihilation_step, catalytic_step};
use fluidic::transport::{stable_dt, transport_step, ChannelState};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const ORACLE_SEED: u64 = 0x005e_edf1;
/// Fixed step of the reference ODE integrator [s].
pub const RK4_STEP: f64 = 1e-7;

fn rk4<const N: usize>(mut y: [f64; N], t_end: f64, h: f64, f: impl Fn(&[f64; N]) -> [f64; N]) -> [f64; N] {
    let steps = (t_end / h).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let axpy = |y: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *y;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, h / 2.0));
        let k3 = f(&axpy(&y, &k2, h / 2.0));
        let k4 = f(&axpy(&y, &k3, h));
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// `A + B -> P` by fine-step RK4: returns (a, b, p).
pub fn ode_annihilation(a: f64, b: f64, k: f64, dt: f64) -> [f64; 3] {
    rk4([a, b, 0.0], dt, RK4_STEP, |y| {
        let r = k * y[0] * y[1];
        [-r, -r, r]
    })
}

/// `C + S -> C + P` by fine-step RK4: returns (substrate, product).
pub fn ode_catalytic(cat: f64, amp: f64, k: f64, dt: f64) -> [f64; 2] {
    rk4([amp, 0.0], dt, RK4_STEP, |y| {
        let r = k * cat * y[0];
        [-r, r]
    })
}

fn rel(x: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        x.abs()
    } else {
        (x - reference).abs() / reference.abs()
    }
}

#[derive(Debug, Default)]
pub struct KineticsReport {
    pub cases: usize,
    pub worst_relative: f64,
    pub worst_difference_drift: f64,
}

/// Randomized closed-form versus ODE comparison. Concentrations lie in
/// [0, 10] mol/m³, steps in [1e-6, 1e-3] s, with k = 5000 m³/(mol·s).
pub fn kinetics_against_ode(cases: usize) -> KineticsReport {
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let k = 5000.0;
    let mut report = KineticsReport::default();
    for _ in 0..cases {
        let a: f64 = rng.gen_range(0.0..10.0);
        let b: f64 = rng.gen_range(0.0..10.0);
        let dt = 10f64.powf(rng.gen_range(-6.0..-3.0));

        let step = annihilation_step(a, b, k, dt).unwrap();
        let [ra, rb, rp] = ode_annihilation(a, b, k, dt);
        for (x, r) in [(step.a, ra), (step.b, rb), (step.converted, rp)] {
            report.worst_relative = report.worst_relative.max(rel(x, r));
        }
        let drift = ((step.a - step.b) - (a - b)).abs() / (f64::EPSILON * a.max(b).max(f64::MIN_POSITIVE));
        report.worst_difference_drift = report.worst_difference_drift.max(drift);

        let cat: f64 = rng.gen_range(0.0..10.0);
        let step = catalytic_step(cat, b, k, dt).unwrap();
        let [rs, rg] = ode_catalytic(cat, b, k, dt);
        report.worst_relative = report.worst_relative.max(rel(step.substrate, rs)).max(rel(step.gain, rg));
        report.cases += 1;
    }
    report
}

/// L1 error of a Gaussian pulse advected and diffused through an empty
/// channel, against the exact solution, at cell size `dx`.
pub fn advection_diffusion_error(dx: f64) -> f64 {
    let (u, d, length, x0, s0, t_end) = (1e-3, 1e-9, 1e-3, 2e-4, 3e-5, 0.4);
    let cells = (length / dx).round() as usize;
    // Fixed Courant number 1/4 across resolutions, inside the stability bound.
    let courant = 0.25 * dx / u;
    assert!(courant <= 0.5 * stable_dt(dx, u, d));
    let steps = (t_end / courant).ceil() as usize;
    let dt = t_end / steps as f64;
    let center = |i: usize| (i as f64 + 0.5) * dx;
    let exact = |x: f64, t: f64| {
        let var = s0 * s0 + 2.0 * d * t;
        (s0 * s0 / var).sqrt() * (-(x - x0 - u * t).powi(2) / (2.0 * var)).exp()
    };
    let mut state = ChannelState::new(1, cells, dx);
    for i in 0..cells {
        state.conc[0][i] = exact(center(i), 0.0);
    }
    for _ in 0..steps {
        transport_step(&mut state, u, &[d], dt, &[0.0], 0.5).unwrap();
    }
    (0..cells).map(|i| (state.conc[0][i] - exact(center(i), t_end)).abs() * dx).sum()
}

/// L1 error of a diffusing point release against the heat kernel.
pub fn diffusion_error(dx: f64) -> f64 {
    let (d, length, t_end) = (1e-9, 1e-3, 2.0);
    let cells = (length / dx).round() as usize;
    let bound = 0.5 * stable_dt(dx, 0.0, d);
    let steps = (t_end / bound).ceil() as usize;
    let dt = t_end / steps as f64;
    let source = cells / 2;
    let x0 = (source as f64 + 0.5) * dx;
    let mut state = ChannelState::new(1, cells, dx);
    state.conc[0][source] = 1.0 / dx;
    for _ in 0..steps {
        transport_step(&mut state, 0.0, &[d], dt, &[0.0], 0.5).unwrap();
    }
    let kernel = |x: f64| (-(x - x0).powi(2) / (4.0 * d * t_end)).exp() / (4.0 * std::f64::consts::PI * d * t_end).sqrt();
    (0..cells)
        .map(|i| (state.conc[0][i] - kernel((i as f64 + 0.5) * dx)).abs() * dx)
        .sum()
}

/// Observed orders `log2(e[i] / e[i+1])` of errors under dx halving.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Largest relative per-step mass-balance residual of transport plus an
/// `A + B -> P` reaction substep on a randomly filled channel.
pub fn worst_mass_balance(steps: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED + 1);
    let (dx, u, k) = (5e-6, 7.5e-3, 5000.0);
    let d = [1.27e-8, 1.27e-8, 1.27e-8];
    let mut state = ChannelState::new(3, 60, dx);
    for s in 0..3 {
        for v in state.conc[s].iter_mut() {
            *v = rng.gen_range(0.0..8.0);
        }
    }
    let dt = 0.5 * stable_dt(dx, u, d[0]);
    let mut worst: f64 = 0.0;
    for step in 0..steps {
        let before: Vec<f64> = (0..3).map(|s| state.mass(s)).collect();
        let inflow = [if step % 50 < 25 { 8.0 } else { 0.0 }, 4.0, 0.0];
        let f = transport_step(&mut state, u, &d, dt, &inflow, 0.5).unwrap();
        let mut converted = 0.0;
        for i in 0..state.cells() {
            let r = annihilation_step(state.conc[0][i], state.conc[1][i], k, dt).unwrap();
            state.conc[0][i] = r.a;
            state.conc[1][i] = r.b;
            state.conc[2][i] += r.converted;
            converted += r.converted * dx;
        }
        for s in 0..3 {
            let source = if s == 2 { converted } else { -converted };
            let expected = before[s] + f.influx[s] - f.outflux[s] + f.clamped[s] + source;
            let scale = before[s].max(state.mass(s)).max(f.influx[s]).max(1e-30);
            worst = worst.max((state.mass(s) - expected).abs() / scale);
        }
    }
    worst
}
