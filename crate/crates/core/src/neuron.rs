//! Izhikevich unit dynamics: state update, spike detection, after-spike reset,
//! and construction of mixed excitatory/inhibitory populations.
//!
//! The unit model is the two-variable quadratic integrate model
//!
//! ```text
//! v' = 0.04 v^2 + 5 v + 140 - u + I
//! u' = a (b v - u)
//! if v >= 30 mV:  v <- c,  u <- u + d
//! ```
//!
//! integrated at 1 ms ticks using the original convention: two 0.5 ms Euler
//! half-steps for `v` followed by one full 1 ms Euler step for `u`. Spike
//! detection and reset happen at tick start, before integration.

use rand::Rng;

use crate::error::Error;
use crate::Result;

/// Spike detection threshold (mV). The comparison is inclusive: `v >= 30` fires.
pub const SPIKE_THRESHOLD: f64 = 30.0;

/// Default ceiling on |v| beyond which the integrator reports divergence.
pub const DEFAULT_DIVERGENCE_CEILING: f64 = 1e6;

/// Whether a unit excites or inhibits its targets. The kind fixes the sign of
/// outgoing weights and the scale of background input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum NeuronKind {
    Excitatory,
    Inhibitory,
}

/// Per-unit model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronParams {
    /// Recovery time scale (1/ms).
    pub a: f64,
    /// Recovery sensitivity to v.
    pub b: f64,
    /// Post-spike reset potential (mV).
    pub c: f64,
    /// Post-spike recovery increment.
    pub d: f64,
}

/// Dynamic state of one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronState {
    /// Membrane potential (mV).
    pub v: f64,
    /// Membrane recovery variable.
    pub u: f64,
    pub kind: NeuronKind,
}

impl NeuronState {
    /// Conventional initial condition: v = -65 mV, u = b * v.
    pub fn resting(params: &NeuronParams, kind: NeuronKind) -> Self {
        let v = -65.0;
        NeuronState {
            v,
            u: params.b * v,
            kind,
        }
    }
}

/// One unit: its fixed parameters plus its dynamic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neuron {
    pub params: NeuronParams,
    pub state: NeuronState,
}

/// Advance one unit by a single 1 ms tick.
///
/// `v` takes two 0.5 ms Euler half-steps (each using the freshly updated v),
/// then `u` takes one full 1 ms step. No spike detection or reset happens
/// here; see [`detect_and_reset`].
///
/// Returns a divergence fault if |v| exceeds `ceiling` after the update,
/// which signals weight or parameter misconfiguration rather than a
/// recoverable condition.
pub fn step_neuron(
    state: NeuronState,
    params: &NeuronParams,
    input: f64,
    ceiling: f64,
) -> Result<NeuronState> {
    let mut v = state.v;
    let u = state.u;
    for _ in 0..2 {
        v += 0.5 * (0.04 * v * v + 5.0 * v + 140.0 - u + input);
    }
    let u = u + params.a * (params.b * v - u);

    if !v.is_finite() || v.abs() > ceiling {
        return Err(Error::Divergence {
            unit: 0,
            tick: 0,
            potential: v,
        });
    }
    Ok(NeuronState { v, u, ..state })
}

/// Spike detection and after-spike reset.
///
/// If `v >= 30` the unit fired: `v <- c`, `u <- u + d`. Otherwise the state
/// is returned unchanged. The threshold comparison is inclusive.
pub fn detect_and_reset(state: NeuronState, params: &NeuronParams) -> (bool, NeuronState) {
    if state.v >= SPIKE_THRESHOLD {
        (
            true,
            NeuronState {
                v: params.c,
                u: state.u + params.d,
                ..state
            },
        )
    } else {
        (false, state)
    }
}

/// Excitatory parameter map: interpolates from regular spiking (r = 0) toward
/// chattering (r -> 1), biased toward regular spiking by the squaring.
pub fn excitatory_params(r_c: f64, r_d: f64) -> NeuronParams {
    NeuronParams {
        a: 0.02,
        b: 0.2,
        c: -65.0 + 15.0 * r_c * r_c,
        d: 8.0 - 6.0 * r_d * r_d,
    }
}

/// Inhibitory parameter map: interpolates from low-threshold spiking (r = 0)
/// toward fast spiking (r -> 1).
pub fn inhibitory_params(r_a: f64, r_b: f64) -> NeuronParams {
    NeuronParams {
        a: 0.02 + 0.08 * r_a,
        b: 0.25 - 0.05 * r_b,
        c: -65.0,
        d: 2.0,
    }
}

/// Build a population of `ne` excitatory and `ni` inhibitory units on `n`
/// ring positions.
///
/// Inhibitory identities are assigned to ring positions uniformly at random
/// without replacement, so inhibition carries no periodic spatial structure.
/// Each parameter that depends on a random draw gets a fresh U[0,1) value.
/// All units start at the conventional rest state (v = -65, u = b * v).
pub fn make_population(n: usize, ne: usize, ni: usize, rng: &mut impl Rng) -> Result<Vec<Neuron>> {
    if ne + ni != n {
        return Err(Error::config(format!(
            "population split {ne} + {ni} does not equal network size {n}"
        )));
    }

    let mut kinds = vec![NeuronKind::Excitatory; n];
    for idx in rand::seq::index::sample(rng, n, ni) {
        kinds[idx] = NeuronKind::Inhibitory;
    }

    Ok(kinds
        .into_iter()
        .map(|kind| {
            let r1: f64 = rng.gen();
            let r2: f64 = rng.gen();
            let params = match kind {
                NeuronKind::Excitatory => excitatory_params(r1, r2),
                NeuronKind::Inhibitory => inhibitory_params(r1, r2),
            };
            Neuron {
                params,
                state: NeuronState::resting(&params, kind),
            }
        })
        .collect())
}
