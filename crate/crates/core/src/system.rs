//! The opaque control-system abstraction, input policies, trajectory
//! rollouts, and synthetic ground-truth systems for validation.
//!
//! A system exposes two capabilities: stepping the state forward given the
//! full history of states and inputs, and reading a state out into a
//! measurement. Everything else (sampling plans, set construction) is
//! layered on top and never looks inside.
//!
//! Rollouts are reproducible: the input stream and the system's own
//! stochasticity stream are seeded per turn from coordinates, so results do
//! not depend on scheduling order and the two sources of randomness can be
//! varied independently (the expected-output estimator re-rolls the system
//! while holding the input draws fixed).

use crate::seeds;
use crate::space::{BinIndex, Measurement, MeasurementSpace, SpaceError};
use rand::Rng;
use rand::RngCore;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// An opaque state or input payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Text(String),
    Num(f64),
    Vector(Vec<f64>),
}

impl Value {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            Value::Vector(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }
}

/// A state along a trajectory. Turn indices strictly increase along a
/// trajectory; turn 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub turn: usize,
    pub value: Value,
}

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("readout failure: {0}")]
    Readout(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("invalid input for this system: {0}")]
    InvalidInput(String),
}

/// Rollout failure, tagged with the turn at which it happened.
#[derive(Debug, Error)]
#[error("turn {turn}: {source}")]
pub struct RolloutError {
    pub turn: usize,
    #[source]
    pub source: SystemError,
}

/// Everything a system may look at when producing the next state.
pub struct StepContext<'a> {
    /// Turn being produced (1-based).
    pub turn: usize,
    /// Initial state.
    pub x0: &'a Value,
    /// States produced so far, turns `1..turn`.
    pub states: &'a [State],
    /// Inputs issued so far, the last one being the current input.
    pub inputs: &'a [Value],
    /// Per-turn stochasticity stream.
    pub rng: &'a mut dyn RngCore,
}

/// Behavioral contract of an opaque control system.
pub trait System: Send + Sync {
    /// Produce the next state from the history.
    fn step(&self, ctx: &mut StepContext<'_>) -> Result<Value, SystemError>;

    /// Read a state out into a measurement.
    fn readout(&self, state: &Value) -> Result<Measurement, SystemError>;

    /// True when repeated rollouts with different seeds yield identical
    /// measurements (greedy decoding, closed-form dynamics).
    fn is_deterministic(&self) -> bool;

    /// True when the system may be queried concurrently. Non-thread-safe
    /// systems are serialized by the estimators.
    fn is_thread_safe(&self) -> bool {
        true
    }
}

/// One sampled input and, when the draw has numeric intent (a requested
/// value rendered into a prompt), that raw request for calibration records.
#[derive(Debug, Clone)]
pub struct InputDraw {
    pub value: Value,
    pub request: Option<f64>,
}

/// Distribution of the first input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSampler {
    UniformReal { lo: f64, hi: f64 },
    UniformInt { lo: i64, hi: i64 },
    /// Uniform over an explicit list.
    Choice { values: Vec<Value> },
    Constant { value: Value },
    /// Draw a numeric request from `base`, render it into `template` at the
    /// `{}` placeholder (scaled by `display_scale`, reals with `decimals`
    /// places), and emit the rendered text as the input.
    Templated {
        base: Box<InputSampler>,
        template: String,
        #[serde(default = "default_decimals")]
        decimals: u8,
        #[serde(default = "default_scale")]
        display_scale: f64,
    },
}

fn default_decimals() -> u8 {
    2
}

fn default_scale() -> f64 {
    1.0
}

impl InputSampler {
    pub fn validate(&self) -> Result<(), SystemError> {
        match self {
            InputSampler::UniformReal { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(SystemError::InvalidSpec(format!(
                        "uniform_real requires lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            InputSampler::UniformInt { lo, hi } => {
                if lo > hi {
                    return Err(SystemError::InvalidSpec(format!(
                        "uniform_int requires lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
            InputSampler::Choice { values } => {
                if values.is_empty() {
                    return Err(SystemError::InvalidSpec("choice requires at least one value".into()));
                }
            }
            InputSampler::Constant { .. } => {}
            InputSampler::Templated { base, template, .. } => {
                base.validate()?;
                if !template.contains("{}") {
                    return Err(SystemError::InvalidSpec(
                        "templated sampler requires a {} placeholder".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> InputDraw {
        match self {
            InputSampler::UniformReal { lo, hi } => {
                let v = rng.gen_range(*lo..*hi);
                InputDraw { value: Value::Num(v), request: Some(v) }
            }
            InputSampler::UniformInt { lo, hi } => {
                let v = rng.gen_range(*lo..=*hi);
                InputDraw { value: Value::Num(v as f64), request: Some(v as f64) }
            }
            InputSampler::Choice { values } => {
                let i = rng.gen_range(0..values.len());
                let value = values[i].clone();
                let request = value.as_num();
                InputDraw { value, request }
            }
            InputSampler::Constant { value } => {
                InputDraw { value: value.clone(), request: value.as_num() }
            }
            InputSampler::Templated { base, template, decimals, display_scale } => {
                let inner = base.sample(rng);
                let request = inner.request;
                let rendered = match request {
                    Some(v) => {
                        let scaled = v * display_scale;
                        let formatted = if matches!(**base, InputSampler::UniformInt { .. }) {
                            format!("{}", scaled.round() as i64)
                        } else {
                            format!("{:.*}", *decimals as usize, scaled)
                        };
                        template.replacen("{}", &formatted, 1)
                    }
                    None => match &inner.value {
                        Value::Text(s) => template.replacen("{}", s, 1),
                        other => template.replacen("{}", &format!("{other:?}"), 1),
                    },
                };
                InputDraw { value: Value::Text(rendered), request }
            }
        }
    }

    /// Enumerable support of the sampler, when finite.
    pub fn support(&self) -> Option<Vec<Value>> {
        match self {
            InputSampler::Choice { values } => Some(values.clone()),
            InputSampler::Constant { value } => Some(vec![value.clone()]),
            InputSampler::UniformInt { lo, hi } => {
                Some((*lo..=*hi).map(|v| Value::Num(v as f64)).collect())
            }
            _ => None,
        }
    }
}

/// How inputs after the first are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsequentInputs {
    /// Re-draw i.i.d. from the initial sampler every turn.
    Resample,
    /// Deterministically render a feedback template from the first request
    /// and the measurement taken right before the input. The input that
    /// drives turn t is rendered from turn t-1's measurement.
    Feedback(crate::adapter::FeedbackTemplate),
}

/// Input policy: the first-input distribution plus the rule for later turns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputPolicy {
    pub initial: InputSampler,
    pub subsequent: SubsequentInputs,
}

impl InputPolicy {
    pub fn iid(initial: InputSampler) -> Self {
        InputPolicy { initial, subsequent: SubsequentInputs::Resample }
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        self.initial.validate()?;
        if let SubsequentInputs::Feedback(tpl) = &self.subsequent {
            tpl.validate().map_err(|e| SystemError::InvalidSpec(e.to_string()))?;
        }
        Ok(())
    }
}

/// Distribution over initial states.
#[derive(Clone)]
pub enum InitialStateSampler {
    /// Enumerable list with weights summing to 1.
    Weighted(Vec<(Value, f64)>),
    /// Arbitrary generator fed by the estimate's rng stream.
    Generator(Arc<dyn Fn(&mut dyn RngCore) -> Value + Send + Sync>),
}

impl fmt::Debug for InitialStateSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialStateSampler::Weighted(w) => f.debug_tuple("Weighted").field(w).finish(),
            InitialStateSampler::Generator(_) => f.write_str("Generator(..)"),
        }
    }
}

impl InitialStateSampler {
    pub fn uniform(values: Vec<Value>) -> Result<Self, SystemError> {
        if values.is_empty() {
            return Err(SystemError::InvalidSpec("initial-state list must be non-empty".into()));
        }
        let w = 1.0 / values.len() as f64;
        Ok(InitialStateSampler::Weighted(values.into_iter().map(|v| (v, w)).collect()))
    }

    pub fn weighted(entries: Vec<(Value, f64)>) -> Result<Self, SystemError> {
        if entries.is_empty() {
            return Err(SystemError::InvalidSpec("initial-state list must be non-empty".into()));
        }
        let total: f64 = entries.iter().map(|(_, w)| *w).sum();
        if entries.iter().any(|(_, w)| *w < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(SystemError::InvalidSpec(format!(
                "initial-state weights must be non-negative and sum to 1, got {total}"
            )));
        }
        Ok(InitialStateSampler::Weighted(entries))
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Value {
        match self {
            InitialStateSampler::Weighted(entries) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (v, w) in entries {
                    acc += w;
                    if u < acc {
                        return v.clone();
                    }
                }
                entries.last().expect("non-empty").0.clone()
            }
            InitialStateSampler::Generator(g) => g(rng),
        }
    }
}

/// One rollout of a system under a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Trajectory index within its estimate.
    pub index: u64,
    /// Seed of the input stream.
    pub input_seed: u64,
    /// Seed of the system stochasticity stream.
    pub system_seed: u64,
    pub x0: Value,
    /// Numeric intent of the first input, when it has one.
    pub u0_request: Option<f64>,
    /// Inputs issued, one per turn.
    pub inputs: Vec<Value>,
    /// States produced, turns `1..=horizon`.
    pub states: Vec<State>,
    /// Measurement of each state.
    pub measurements: Vec<Measurement>,
}

/// Execute one trajectory of `horizon` turns.
///
/// Fully reproducible: the input and system streams are derived from `seed`,
/// and per-turn substreams from those, so the result depends only on the
/// arguments and never on scheduling.
pub fn rollout(
    system: &dyn System,
    x0: &Value,
    policy: &InputPolicy,
    horizon: usize,
    index: u64,
    seed: u64,
) -> Result<Trajectory, RolloutError> {
    let input_seed = seeds::derive(seed, seeds::STREAM_INPUT);
    let system_seed = seeds::derive(seed, seeds::STREAM_SYSTEM);
    rollout_streams(system, x0, policy, horizon, index, input_seed, system_seed)
}

/// [`rollout`] with independently chosen input and system streams.
pub fn rollout_streams(
    system: &dyn System,
    x0: &Value,
    policy: &InputPolicy,
    horizon: usize,
    index: u64,
    input_seed: u64,
    system_seed: u64,
) -> Result<Trajectory, RolloutError> {
    assert!(horizon >= 1, "horizon must be at least 1");
    let mut inputs: Vec<Value> = Vec::with_capacity(horizon);
    let mut states: Vec<State> = Vec::with_capacity(horizon);
    let mut measurements: Vec<Measurement> = Vec::with_capacity(horizon);
    let mut u0_request: Option<f64> = None;

    for turn in 1..=horizon {
        let input_index = turn - 1;
        let input = if input_index == 0 {
            let mut rng = seeds::rng(seeds::derive(input_seed, 0));
            let draw = policy.initial.sample(&mut rng);
            u0_request = draw.request;
            draw.value
        } else {
            match &policy.subsequent {
                SubsequentInputs::Resample => {
                    let mut rng = seeds::rng(seeds::derive(input_seed, input_index as u64));
                    policy.initial.sample(&mut rng).value
                }
                SubsequentInputs::Feedback(tpl) => {
                    let requested = u0_request.ok_or(RolloutError {
                        turn,
                        source: SystemError::InvalidInput(
                            "feedback policy requires a numeric first request".into(),
                        ),
                    })?;
                    let prev = measurements.last().expect("turn >= 2 has a measurement");
                    let produced = prev.as_point().and_then(|p| p.first().copied()).ok_or(
                        RolloutError {
                            turn,
                            source: SystemError::InvalidInput(
                                "feedback policy requires numeric measurements".into(),
                            ),
                        },
                    )?;
                    let rendered = tpl.render(requested, produced).map_err(|e| RolloutError {
                        turn,
                        source: SystemError::InvalidInput(e.to_string()),
                    })?;
                    Value::Text(rendered.text)
                }
            }
        };
        inputs.push(input);

        let mut rng = seeds::rng(seeds::derive(system_seed, turn as u64));
        let next = {
            let mut ctx =
                StepContext { turn, x0, states: &states, inputs: &inputs, rng: &mut rng };
            system.step(&mut ctx).map_err(|source| RolloutError { turn, source })?
        };
        let y = system.readout(&next).map_err(|source| RolloutError { turn, source })?;
        states.push(State { turn, value: next });
        measurements.push(y);
    }

    Ok(Trajectory {
        index,
        input_seed,
        system_seed,
        x0: x0.clone(),
        u0_request,
        inputs,
        states,
        measurements,
    })
}

// ---------------------------------------------------------------------------
// Synthetic systems with analytic ground truth
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMass {
    pub label: String,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalRow {
    pub state: String,
    pub pmf: Vec<LabelMass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Effective mean is `mean + input_scale * u0` per axis.
    #[serde(default)]
    pub input_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureRow {
    pub state: String,
    pub components: Vec<GaussComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineRow {
    pub state: String,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRow {
    pub state: String,
    /// Measurement of the initial state, the recursion's base case.
    pub y0: f64,
    pub rate: f64,
    #[serde(default)]
    pub noise_std: f64,
}

/// Specification of a synthetic ground-truth system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SyntheticSpec {
    /// Per-initial-state pmf over labels, constant over turns.
    CategoricalTable { states: Vec<CategoricalRow> },
    /// Per-initial-state Gaussian mixture, sampled per turn and clipped to
    /// the box.
    ClippedGaussianMixture { lo: Vec<f64>, hi: Vec<f64>, states: Vec<MixtureRow> },
    /// `y = clip(slope * u0 + offset(x0))`, constant over turns.
    DeterministicAffine { slope: f64, lo: f64, hi: f64, states: Vec<AffineRow> },
    /// `y_t = y_{t-1} + rate * (u0 - y_{t-1}) + noise`, clipped to `[lo, hi]`,
    /// with `y_0` the initial state's own measurement.
    FeedbackConvergent { lo: f64, hi: f64, states: Vec<FeedbackRow> },
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("analytic oracle unavailable: {0}")]
    Unavailable(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("unknown initial state {0:?}")]
    UnknownState(String),
}

/// A synthetic system: an opaque [`System`] that additionally exposes its
/// analytic per-bin output probabilities for validation harnesses.
#[derive(Debug, Clone)]
pub struct SyntheticSystem {
    spec: SyntheticSpec,
}

/// Build a synthetic system, validating the spec.
pub fn make_synthetic(spec: SyntheticSpec) -> Result<SyntheticSystem, SystemError> {
    validate_spec(&spec)?;
    Ok(SyntheticSystem { spec })
}

fn validate_spec(spec: &SyntheticSpec) -> Result<(), SystemError> {
    let invalid = |msg: String| Err(SystemError::InvalidSpec(msg));
    match spec {
        SyntheticSpec::CategoricalTable { states } => {
            if states.is_empty() {
                return invalid("categorical table needs at least one state".into());
            }
            for row in states {
                if row.pmf.is_empty() {
                    return invalid(format!("state {:?} has an empty pmf", row.state));
                }
                let total: f64 = row.pmf.iter().map(|lm| lm.mass).sum();
                if row.pmf.iter().any(|lm| lm.mass < 0.0) || (total - 1.0).abs() > 1e-9 {
                    return invalid(format!(
                        "state {:?}: pmf must be non-negative and sum to 1, got {total}",
                        row.state
                    ));
                }
            }
        }
        SyntheticSpec::ClippedGaussianMixture { lo, hi, states } => {
            if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| a >= b) {
                return invalid("mixture box must satisfy lo < hi per axis".into());
            }
            if states.is_empty() {
                return invalid("mixture needs at least one state".into());
            }
            for row in states {
                let total: f64 = row.components.iter().map(|c| c.weight).sum();
                if row.components.is_empty()
                    || row.components.iter().any(|c| c.weight < 0.0)
                    || (total - 1.0).abs() > 1e-9
                {
                    return invalid(format!(
                        "state {:?}: component weights must sum to 1",
                        row.state
                    ));
                }
                for c in &row.components {
                    if c.mean.len() != lo.len() || c.std.len() != lo.len() {
                        return invalid(format!(
                            "state {:?}: component dimensions must match the box",
                            row.state
                        ));
                    }
                    if c.std.iter().any(|s| !s.is_finite() || *s <= 0.0) {
                        return invalid(format!("state {:?}: stds must be positive", row.state));
                    }
                }
            }
        }
        SyntheticSpec::DeterministicAffine { slope, lo, hi, states } => {
            if !slope.is_finite() {
                return invalid("slope must be finite".into());
            }
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return invalid("affine clip bounds must satisfy lo < hi".into());
            }
            if states.is_empty() {
                return invalid("affine system needs at least one state".into());
            }
        }
        SyntheticSpec::FeedbackConvergent { lo, hi, states } => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return invalid("feedback clip bounds must satisfy lo < hi".into());
            }
            if states.is_empty() {
                return invalid("feedback system needs at least one state".into());
            }
            for row in states {
                if !(row.rate > 0.0 && row.rate <= 1.0) {
                    return invalid(format!(
                        "state {:?}: rate must be in (0, 1], got {}",
                        row.state, row.rate
                    ));
                }
                if row.noise_std < 0.0 || !row.noise_std.is_finite() {
                    return invalid(format!("state {:?}: noise_std must be >= 0", row.state));
                }
                if row.y0 < *lo || row.y0 > *hi {
                    return invalid(format!(
                        "state {:?}: y0 = {} outside [{lo}, {hi}]",
                        row.state, row.y0
                    ));
                }
            }
        }
    }
    Ok(())
}

fn state_name(x0: &Value) -> Result<&str, SystemError> {
    x0.as_text().ok_or_else(|| {
        SystemError::InvalidInput("synthetic initial states are referenced by name".into())
    })
}

fn first_input_num(inputs: &[Value]) -> Result<f64, SystemError> {
    inputs
        .first()
        .and_then(Value::as_num)
        .ok_or_else(|| SystemError::InvalidInput("this system requires a numeric first input".into()))
}

impl SyntheticSystem {
    pub fn spec(&self) -> &SyntheticSpec {
        &self.spec
    }

    fn categorical_row(&self, name: &str) -> Option<&CategoricalRow> {
        match &self.spec {
            SyntheticSpec::CategoricalTable { states } => states.iter().find(|r| r.state == name),
            _ => None,
        }
    }

    /// Analytic probability of each bin of `space` for the measurement at
    /// `turn`, from initial state `x0` under `policy`'s first-input
    /// distribution.
    pub fn oracle_bin_masses(
        &self,
        space: &MeasurementSpace,
        policy: &InputPolicy,
        x0: &Value,
        turn: usize,
    ) -> Result<Vec<f64>, OracleError> {
        let name = state_name(x0).map_err(|e| OracleError::Unavailable(e.to_string()))?;
        let n = space.covering_number();
        match &self.spec {
            SyntheticSpec::CategoricalTable { .. } => {
                let row = self
                    .categorical_row(name)
                    .ok_or_else(|| OracleError::UnknownState(name.into()))?;
                let mut masses = vec![0.0; n];
                for lm in &row.pmf {
                    let bin = space.bin_of(&Measurement::Label(lm.label.clone()))?;
                    masses[bin] += lm.mass;
                }
                Ok(masses)
            }
            SyntheticSpec::ClippedGaussianMixture { lo, hi, states } => {
                let row = states
                    .iter()
                    .find(|r| r.state == name)
                    .ok_or_else(|| OracleError::UnknownState(name.into()))?;
                if row.components.iter().any(|c| c.input_scale != 0.0) {
                    return Err(OracleError::Unavailable(
                        "bin masses of an input-shifted mixture depend on the input draw".into(),
                    ));
                }
                let mut masses = vec![0.0; n];
                let cells = space.cells_per_axis();
                for bin in 0..n {
                    let idx = space.unflatten(bin)?;
                    let (cell_lo, cell_hi) = space.cell_bounds(bin)?;
                    let mut mass = 0.0;
                    for c in &row.components {
                        let mut p = c.weight;
                        for d in 0..lo.len() {
                            // Clipping folds out-of-box tails into the edge
                            // cells.
                            let lower = if idx[d] == 0 { f64::NEG_INFINITY } else { cell_lo[d] };
                            let upper =
                                if idx[d] == cells[d] - 1 { f64::INFINITY } else { cell_hi[d] };
                            p *= normal_cdf(upper, c.mean[d], c.std[d])
                                - normal_cdf(lower, c.mean[d], c.std[d]);
                        }
                        mass += p;
                    }
                    masses[bin] = mass;
                }
                let _ = (hi, turn);
                Ok(masses)
            }
            SyntheticSpec::DeterministicAffine { slope, lo, hi, states } => {
                let row = states
                    .iter()
                    .find(|r| r.state == name)
                    .ok_or_else(|| OracleError::UnknownState(name.into()))?;
                affine_pushforward_masses(space, &policy.initial, *slope, row.offset, *lo, *hi)
            }
            SyntheticSpec::FeedbackConvergent { lo, hi, states } => {
                let row = states
                    .iter()
                    .find(|r| r.state == name)
                    .ok_or_else(|| OracleError::UnknownState(name.into()))?;
                if row.noise_std != 0.0 {
                    return Err(OracleError::Unavailable(
                        "feedback recursion unrolls analytically only without noise".into(),
                    ));
                }
                // y_t = c_t u0 + d_t with c_t = 1-(1-r)^t, d_t = y0 (1-r)^t.
                let shrink = (1.0 - row.rate).powi(turn as i32);
                let slope_t = 1.0 - shrink;
                let offset_t = row.y0 * shrink;
                // The closed form assumes no intermediate clipping; that
                // holds when the input support stays inside the box (y_t is
                // then a convex combination of in-box quantities).
                match input_range(&policy.initial) {
                    Some((u_lo, u_hi)) if u_lo >= *lo && u_hi <= *hi => {}
                    Some(_) => {
                        return Err(OracleError::Unavailable(
                            "input support exceeds the clip box; recursion may clip mid-way".into(),
                        ))
                    }
                    None => {
                        return Err(OracleError::Unavailable(
                            "feedback oracle requires a bounded numeric input distribution".into(),
                        ))
                    }
                }
                affine_pushforward_masses(space, &policy.initial, slope_t, offset_t, *lo, *hi)
            }
        }
    }

    /// Analytic mean of the measurement for a fixed first input, when the
    /// family has one in closed form.
    pub fn analytic_mean(&self, x0: &Value, u0: f64, turn: usize) -> Result<Vec<f64>, OracleError> {
        let name = state_name(x0).map_err(|e| OracleError::Unavailable(e.to_string()))?;
        match &self.spec {
            SyntheticSpec::ClippedGaussianMixture { states, .. } => {
                let row = states
                    .iter()
                    .find(|r| r.state == name)
                    .ok_or_else(|| OracleError::UnknownState(name.into()))?;
                let dims = row.components[0].mean.len();
                let mut mean = vec![0.0; dims];
                for c in &row.components {
                    for d in 0..dims {
                        // Clipping is ignored: valid when components sit well
                        // inside the box relative to their std.
                        mean[d] += c.weight * (c.mean[d] + c.input_scale * u0);
                    }
                }
                Ok(mean)
            }
            SyntheticSpec::DeterministicAffine { slope, lo, hi, states } => {
                let row = states
                    .iter()
                    .find(|r| r.state == name)
                    .ok_or_else(|| OracleError::UnknownState(name.into()))?;
                Ok(vec![(slope * u0 + row.offset).clamp(*lo, *hi)])
            }
            SyntheticSpec::FeedbackConvergent { lo, hi, states } => {
                let row = states
                    .iter()
                    .find(|r| r.state == name)
                    .ok_or_else(|| OracleError::UnknownState(name.into()))?;
                if row.noise_std != 0.0 {
                    return Err(OracleError::Unavailable(
                        "feedback mean unrolls analytically only without noise".into(),
                    ));
                }
                let shrink = (1.0 - row.rate).powi(turn as i32);
                Ok(vec![(u0 * (1.0 - shrink) + row.y0 * shrink).clamp(*lo, *hi)])
            }
            SyntheticSpec::CategoricalTable { .. } => Err(OracleError::Unavailable(
                "categorical outputs have no numeric mean".into(),
            )),
        }
    }
}

fn normal_cdf(x: f64, mean: f64, std: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-(x - mean) / (std * std::f64::consts::SQRT_2))
}

/// Numeric range of an input sampler's support, when bounded.
fn input_range(sampler: &InputSampler) -> Option<(f64, f64)> {
    match sampler {
        InputSampler::UniformReal { lo, hi } => Some((*lo, *hi)),
        InputSampler::UniformInt { lo, hi } => Some((*lo as f64, *hi as f64)),
        InputSampler::Choice { values } => {
            let nums: Option<Vec<f64>> = values.iter().map(Value::as_num).collect();
            let nums = nums?;
            let lo = nums.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = nums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Some((lo, hi))
        }
        InputSampler::Constant { value } => value.as_num().map(|v| (v, v)),
        InputSampler::Templated { .. } => None,
    }
}

/// Bin masses of `y = clip(slope * u + offset, lo, hi)` under the sampler's
/// distribution of `u`, for a one-dimensional box space.
fn affine_pushforward_masses(
    space: &MeasurementSpace,
    sampler: &InputSampler,
    slope: f64,
    offset: f64,
    clip_lo: f64,
    clip_hi: f64,
) -> Result<Vec<f64>, OracleError> {
    if space.dims() != 1 || space.is_categorical() {
        return Err(OracleError::Unavailable(
            "affine pushforward masses require a one-dimensional box space".into(),
        ));
    }
    let n = space.covering_number();
    let mut masses = vec![0.0; n];
    let push = |u: f64| (slope * u + offset).clamp(clip_lo, clip_hi);

    match sampler {
        InputSampler::Constant { value } => {
            let u = value.as_num().ok_or_else(|| {
                OracleError::Unavailable("constant input is not numeric".into())
            })?;
            let bin = space.bin_of(&Measurement::scalar(push(u)))?;
            masses[bin] = 1.0;
        }
        InputSampler::Choice { values } => {
            let w = 1.0 / values.len() as f64;
            for v in values {
                let u = v.as_num().ok_or_else(|| {
                    OracleError::Unavailable("choice inputs are not numeric".into())
                })?;
                let bin = space.bin_of(&Measurement::scalar(push(u)))?;
                masses[bin] += w;
            }
        }
        InputSampler::UniformInt { lo, hi } => {
            let count = (hi - lo + 1) as f64;
            for u in *lo..=*hi {
                let bin = space.bin_of(&Measurement::scalar(push(u as f64)))?;
                masses[bin] += 1.0 / count;
            }
        }
        InputSampler::UniformReal { lo: u_lo, hi: u_hi } => {
            let (raw_lo, raw_hi) = {
                let a = slope * u_lo + offset;
                let b = slope * u_hi + offset;
                (a.min(b), a.max(b))
            };
            if raw_hi - raw_lo <= 0.0 {
                let bin = space.bin_of(&Measurement::scalar(push(*u_lo)))?;
                masses[bin] = 1.0;
            } else {
                let cdf = |y: f64| ((y - raw_lo) / (raw_hi - raw_lo)).clamp(0.0, 1.0);
                let cells = space.cells_per_axis()[0];
                for bin in 0..n {
                    let (c_lo, c_hi) = space.cell_bounds(bin)?;
                    // Edge cells absorb the clipped tails.
                    let lower = if bin == 0 { f64::NEG_INFINITY } else { c_lo[0] };
                    let upper = if bin == cells - 1 { f64::INFINITY } else { c_hi[0] };
                    let lower_cdf = if lower == f64::NEG_INFINITY { 0.0 } else { cdf(lower) };
                    let upper_cdf = if upper == f64::INFINITY { 1.0 } else { cdf(upper) };
                    masses[bin] = (upper_cdf - lower_cdf).max(0.0);
                }
            }
        }
        InputSampler::Templated { .. } => {
            return Err(OracleError::Unavailable(
                "templated inputs have no numeric pushforward".into(),
            ))
        }
    }
    Ok(masses)
}

impl System for SyntheticSystem {
    fn step(&self, ctx: &mut StepContext<'_>) -> Result<Value, SystemError> {
        let name = state_name(ctx.x0)?;
        match &self.spec {
            SyntheticSpec::CategoricalTable { states } => {
                let row = states
                    .iter()
                    .find(|r| r.state == name)
                    .ok_or_else(|| SystemError::InvalidInput(format!("unknown state {name:?}")))?;
                let u: f64 = ctx.rng.gen();
                let mut acc = 0.0;
                for lm in &row.pmf {
                    acc += lm.mass;
                    if u < acc {
                        return Ok(Value::Text(lm.label.clone()));
                    }
                }
                Ok(Value::Text(row.pmf.last().expect("non-empty pmf").label.clone()))
            }
            SyntheticSpec::ClippedGaussianMixture { lo, hi, states } => {
                let row = states
                    .iter()
                    .find(|r| r.state == name)
                    .ok_or_else(|| SystemError::InvalidInput(format!("unknown state {name:?}")))?;
                let u0 = if row.components.iter().any(|c| c.input_scale != 0.0) {
                    first_input_num(ctx.inputs)?
                } else {
                    0.0
                };
                let pick: f64 = ctx.rng.gen();
                let mut acc = 0.0;
                let mut chosen = row.components.last().expect("non-empty");
                for c in &row.components {
                    acc += c.weight;
                    if pick < acc {
                        chosen = c;
                        break;
                    }
                }
                let mut point = Vec::with_capacity(lo.len());
                for d in 0..lo.len() {
                    let dist = Normal::new(chosen.mean[d] + chosen.input_scale * u0, chosen.std[d])
                        .map_err(|e| SystemError::InvalidSpec(e.to_string()))?;
                    point.push(dist.sample(ctx.rng).clamp(lo[d], hi[d]));
                }
                Ok(Value::Vector(point))
            }
            SyntheticSpec::DeterministicAffine { slope, lo, hi, states } => {
                let row = states
                    .iter()
                    .find(|r| r.state == name)
                    .ok_or_else(|| SystemError::InvalidInput(format!("unknown state {name:?}")))?;
                let u0 = first_input_num(ctx.inputs)?;
                Ok(Value::Vector(vec![(slope * u0 + row.offset).clamp(*lo, *hi)]))
            }
            SyntheticSpec::FeedbackConvergent { lo, hi, states } => {
                let row = states
                    .iter()
                    .find(|r| r.state == name)
                    .ok_or_else(|| SystemError::InvalidInput(format!("unknown state {name:?}")))?;
                let u0 = first_input_num(ctx.inputs)?;
                let prev = match ctx.states.last() {
                    Some(s) => s.value.as_num().ok_or_else(|| {
                        SystemError::InvalidInput("feedback state is not numeric".into())
                    })?,
                    None => row.y0,
                };
                let mut y = prev + row.rate * (u0 - prev);
                if row.noise_std > 0.0 {
                    let dist = Normal::new(0.0, row.noise_std)
                        .map_err(|e| SystemError::InvalidSpec(e.to_string()))?;
                    y += dist.sample(ctx.rng);
                }
                Ok(Value::Vector(vec![y.clamp(*lo, *hi)]))
            }
        }
    }

    fn readout(&self, state: &Value) -> Result<Measurement, SystemError> {
        match state {
            Value::Text(s) => match &self.spec {
                SyntheticSpec::CategoricalTable { .. } => Ok(Measurement::Label(s.clone())),
                SyntheticSpec::FeedbackConvergent { states, .. } => states
                    .iter()
                    .find(|r| r.state == *s)
                    .map(|r| Measurement::scalar(r.y0))
                    .ok_or_else(|| SystemError::Readout(format!("unknown state {s:?}"))),
                _ => Err(SystemError::Readout(format!(
                    "text state {s:?} has no numeric measurement"
                ))),
            },
            Value::Num(v) => Ok(Measurement::scalar(*v)),
            Value::Vector(v) => Ok(Measurement::Point(v.clone())),
        }
    }

    fn is_deterministic(&self) -> bool {
        match &self.spec {
            SyntheticSpec::CategoricalTable { states } => states
                .iter()
                .all(|r| r.pmf.iter().any(|lm| (lm.mass - 1.0).abs() < 1e-12)),
            SyntheticSpec::ClippedGaussianMixture { .. } => false,
            SyntheticSpec::DeterministicAffine { .. } => true,
            SyntheticSpec::FeedbackConvergent { states, .. } => {
                states.iter().all(|r| r.noise_std == 0.0)
            }
        }
    }
}

/// The p-approximate set of a mass vector: bins with mass at least `p`.
pub fn p_approximate_set(masses: &[f64], p: f64) -> BTreeSet<BinIndex> {
    masses
        .iter()
        .enumerate()
        .filter(|(_, &m)| m >= p)
        .map(|(i, _)| i)
        .collect()
}

/// Proportion of initial states whose p-approximate reachable set contains
/// each bin, from the analytic oracle. `sampler` must be an enumerable
/// weighted list.
pub fn true_mu(
    system: &SyntheticSystem,
    space: &MeasurementSpace,
    policy: &InputPolicy,
    sampler: &InitialStateSampler,
    p: f64,
    turn: usize,
) -> Result<Vec<f64>, OracleError> {
    let entries = match sampler {
        InitialStateSampler::Weighted(entries) => entries,
        InitialStateSampler::Generator(_) => {
            return Err(OracleError::Unavailable(
                "true mu requires an enumerable initial-state list".into(),
            ))
        }
    };
    let n = space.covering_number();
    let mut mu = vec![0.0; n];
    for (x0, w) in entries {
        let masses = system.oracle_bin_masses(space, policy, x0, turn)?;
        for bin in p_approximate_set(&masses, p) {
            mu[bin] += w;
        }
    }
    Ok(mu)
}

/// The true alpha-controllable set: bins reached (p-approximately) by at
/// least a `1 - alpha` proportion of initial states. The threshold is
/// inclusive.
pub fn true_alpha_controllable_set(mu: &[f64], alpha: f64) -> BTreeSet<BinIndex> {
    mu.iter()
        .enumerate()
        .filter(|(_, &m)| m >= 1.0 - alpha)
        .map(|(i, _)| i)
        .collect()
}
