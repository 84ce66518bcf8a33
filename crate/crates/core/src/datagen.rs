//! Seeded synthetic datasets.
//!
//! Trace `i` of a dataset draws from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `i`, so every trace is reproducible on its own and independent of
//! how many traces are generated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{frame_label_vector, EvalError};
use crate::formula::Formula;
use crate::trace::{Dataset, DatasetError, Frame, LabeledTrace};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("planted formula uses `{0}`, which is not in the schema")]
    UnknownVariable(String),
    #[error("flip noise must be in [0, 0.5), got {0}")]
    Noise(f64),
    #[error("random walk needs finite min < max and a positive increment bound")]
    Walk,
    #[error("need at least one trace of at least one point")]
    Empty,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Bounded random walk: uniform increments in `[-max_step, max_step]`,
/// reflected at `min` and `max`. The start is uniform in `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomWalk {
    pub min: f64,
    pub max: f64,
    pub max_step: f64,
}

impl Default for RandomWalk {
    fn default() -> Self {
        RandomWalk { min: 0.0, max: 10.0, max_step: 1.0 }
    }
}

impl RandomWalk {
    fn validate(&self) -> Result<(), DatagenError> {
        let ok = self.min.is_finite() && self.max.is_finite() && self.min < self.max;
        if !ok || !(self.max_step.is_finite() && self.max_step > 0.0) {
            return Err(DatagenError::Walk);
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        let mut x = rng.gen_range(self.min..=self.max);
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(x);
            x += rng.gen_range(-self.max_step..=self.max_step);
            if x > self.max {
                x = 2.0 * self.max - x;
            }
            if x < self.min {
                x = 2.0 * self.min - x;
            }
            x = x.clamp(self.min, self.max);
        }
        out
    }
}

fn trace_rng(seed: u64, trace: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trace as u64);
    rng
}

/// Random walks labeled by `planted`, each label flipped with probability
/// `flip_noise`. Uses the default [`RandomWalk`] for every variable.
pub fn planted_dataset(
    seed: u64,
    schema: &[String],
    n_traces: usize,
    length: usize,
    planted: &Formula,
    flip_noise: f64,
) -> Result<Dataset, DatagenError> {
    planted_dataset_with(seed, schema, n_traces, length, planted, flip_noise, RandomWalk::default())
}

pub fn planted_dataset_with(
    seed: u64,
    schema: &[String],
    n_traces: usize,
    length: usize,
    planted: &Formula,
    flip_noise: f64,
    walk: RandomWalk,
) -> Result<Dataset, DatagenError> {
    if let Some(v) = planted.variables().into_iter().find(|v| !schema.iter().any(|s| s == v)) {
        return Err(DatagenError::UnknownVariable(v.to_string()));
    }
    if !(0.0..0.5).contains(&flip_noise) {
        return Err(DatagenError::Noise(flip_noise));
    }
    walk.validate()?;
    if n_traces == 0 || length == 0 {
        return Err(DatagenError::Empty);
    }
    let mut traces = Vec::with_capacity(n_traces);
    for i in 0..n_traces {
        let mut rng = trace_rng(seed, i);
        let cols: Vec<Vec<f64>> = schema.iter().map(|_| walk.sample(&mut rng, length)).collect();
        let rows: Vec<Vec<f64>> = (0..length).map(|t| cols.iter().map(|c| c[t]).collect()).collect();
        let unlabeled = LabeledTrace::new(format!("r{i}"), schema.to_vec(), rows.clone(), vec![false; length])?;
        let truth = frame_label_vector(planted, &Frame::from_trace(&unlabeled))?;
        let labels = truth.iter().map(|b| b ^ (flip_noise > 0.0 && rng.gen_bool(flip_noise))).collect();
        traces.push(LabeledTrace::new(format!("r{i}"), schema.to_vec(), rows, labels)?);
    }
    Ok(Dataset::new(traces)?)
}

/// Link capacities of the traffic network, `x0..x5`.
pub const TRAFFIC_CAPACITY: [u32; 6] = [40, 40, 40, 20, 20, 20];
/// Vehicles a movement can carry per step.
pub const TRAFFIC_SATURATION: u32 = 10;
/// Exogenous arrivals per entry link per step are uniform in `0..=TRAFFIC_MAX_ARRIVALS`.
pub const TRAFFIC_MAX_ARRIVALS: u32 = 5;
/// The labeled property: link 1 is congested.
pub const TRAFFIC_LABEL_THRESHOLD: f64 = 30.0;

/// Column names of traffic datasets.
pub fn traffic_schema() -> Vec<String> {
    ["x0", "x1", "x2", "x3", "x4", "x5", "s0", "s1"].iter().map(|s| s.to_string()).collect()
}

/// One step of the two-junction network.
///
/// Links 0 and 3 are entries, links 2 and 5 exits. Junction 0 lets `0 -> 1`
/// through when `s0 = 0` and `3 -> 4` when `s0 = 1`; junction 1 lets `1 -> 2`
/// through when `s1 = 0` and `4 -> 5` when `s1 = 1`. Each open movement
/// carries `min(source occupancy, destination residual capacity,
/// saturation)`; exits drain up to the saturation rate. Arrivals are clamped
/// to the residual capacity of their entry link.
pub fn traffic_step(x: [u32; 6], s: [u8; 2], arrivals: [u32; 2]) -> [u32; 6] {
    let cap = TRAFFIC_CAPACITY;
    let c = TRAFFIC_SATURATION;
    let flow = |from: usize, to: usize| x[from].min(cap[to] - x[to]).min(c);
    let (f01, f34) = if s[0] == 0 { (flow(0, 1), 0) } else { (0, flow(3, 4)) };
    let (f12, f45) = if s[1] == 0 { (flow(1, 2), 0) } else { (0, flow(4, 5)) };
    let exit2 = x[2].min(c);
    let exit5 = x[5].min(c);
    let a0 = arrivals[0].min(cap[0] - x[0]);
    let a3 = arrivals[1].min(cap[3] - x[3]);
    [x[0] + a0 - f01, x[1] + f01 - f12, x[2] + f12 - exit2, x[3] + a3 - f34, x[4] + f34 - f45, x[5] + f45 - exit5]
}

/// Simulated traffic traces labeled by `x1 > 30`. Initial occupancies are
/// uniform within capacity and signals are uniform per step.
pub fn traffic_dataset(seed: u64, n_traces: usize, length: usize) -> Result<Dataset, DatagenError> {
    if n_traces == 0 || length == 0 {
        return Err(DatagenError::Empty);
    }
    let schema = traffic_schema();
    let mut traces = Vec::with_capacity(n_traces);
    for i in 0..n_traces {
        let mut rng = trace_rng(seed, i);
        let mut x = TRAFFIC_CAPACITY.map(|c| rng.gen_range(0..=c));
        let mut rows = Vec::with_capacity(length);
        let mut labels = Vec::with_capacity(length);
        for _ in 0..length {
            let s = [rng.gen_range(0..=1u8), rng.gen_range(0..=1u8)];
            let mut row: Vec<f64> = x.iter().map(|v| *v as f64).collect();
            row.extend(s.iter().map(|v| *v as f64));
            labels.push(row[1] > TRAFFIC_LABEL_THRESHOLD);
            rows.push(row);
            let arrivals = [rng.gen_range(0..=TRAFFIC_MAX_ARRIVALS), rng.gen_range(0..=TRAFFIC_MAX_ARRIVALS)];
            x = traffic_step(x, s, arrivals);
        }
        traces.push(LabeledTrace::new(format!("r{i}"), schema.clone(), rows, labels)?);
    }
    Ok(Dataset::new(traces)?)
}
