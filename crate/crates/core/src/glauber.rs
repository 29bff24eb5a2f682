//! Finite-N network of binary neurons under asynchronous Glauber dynamics.
//!
//! Each of the two populations has `N` neurons; every synapse of type `ab`
//! carries weight `w_ab / N` and the sums include the neuron itself. One
//! time unit is `2N` single-neuron updates. The generator is ChaCha8
//! seeded with `seed_from_u64`, so a (config, seed) pair fixes the trace bit
//! for bit.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::SystemParams;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GlauberError {
    #[error("invalid network config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Population {
    E,
    I,
}

/// Initial network state.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Every neuron an independent fair coin, drawn from the run's RNG.
    #[default]
    Random,
    /// The first `round(fraction · N)` neurons of each population active.
    Fractions { e: f64, i: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlauberConfig {
    /// Neurons per population.
    pub n: usize,
    /// Mean-field parameters; must be the full variant.
    pub params: SystemParams,
    pub seed: u64,
    pub t_end: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: f64,
    #[serde(default)]
    pub initial: InitialState,
}

fn default_sample_every() -> f64 {
    0.05
}

impl GlauberConfig {
    pub fn new(n: usize, params: SystemParams, seed: u64, t_end: f64) -> Self {
        GlauberConfig {
            n,
            params,
            seed,
            t_end,
            sample_every: default_sample_every(),
            initial: InitialState::Random,
        }
    }

    pub fn validate(&self) -> Result<(), GlauberError> {
        let bad = |m: String| Err(GlauberError::Config(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.params.thresholds.is_none() {
            return bad("the binary network needs the full variant (explicit thresholds)".into());
        }
        self.params.validate().map_err(|e| GlauberError::Config(e.to_string()))?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive (got {})", self.t_end));
        }
        if !(self.sample_every > 0.0 && self.sample_every.is_finite()) {
            return bad(format!("sample_every must be positive (got {})", self.sample_every));
        }
        if let InitialState::Fractions { e, i } = self.initial {
            if !((0.0..=1.0).contains(&e) && (0.0..=1.0).contains(&i)) {
                return bad(format!("initial fractions must lie in [0, 1] (got {e}, {i})"));
            }
        }
        Ok(())
    }

    /// Number of single-neuron updates in the run, `⌈t_end · 2N⌉`.
    pub fn total_steps(&self) -> u64 {
        (self.t_end * 2.0 * self.n as f64 - 1e-9).ceil().max(0.0) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryNetworkState {
    x_e: Vec<bool>,
    x_i: Vec<bool>,
    sum_e: usize,
    sum_i: usize,
    steps: u64,
}

impl BinaryNetworkState {
    pub fn new(x_e: Vec<bool>, x_i: Vec<bool>) -> Self {
        assert_eq!(x_e.len(), x_i.len(), "populations must have equal size");
        let sum_e = x_e.iter().filter(|&&x| x).count();
        let sum_i = x_i.iter().filter(|&&x| x).count();
        BinaryNetworkState {
            x_e,
            x_i,
            sum_e,
            sum_i,
            steps: 0,
        }
    }

    pub fn from_initial(initial: &InitialState, n: usize, rng: &mut impl Rng) -> Self {
        match *initial {
            InitialState::Random => {
                let x_e = (0..n).map(|_| rng.gen::<bool>()).collect();
                let x_i = (0..n).map(|_| rng.gen::<bool>()).collect();
                Self::new(x_e, x_i)
            }
            InitialState::Fractions { e, i } => {
                let k_e = (e * n as f64).round() as usize;
                let k_i = (i * n as f64).round() as usize;
                Self::new((0..n).map(|j| j < k_e).collect(), (0..n).map(|j| j < k_i).collect())
            }
        }
    }

    pub fn n(&self) -> usize {
        self.x_e.len()
    }

    pub fn neurons(&self, pop: Population) -> &[bool] {
        match pop {
            Population::E => &self.x_e,
            Population::I => &self.x_i,
        }
    }

    pub fn active(&self, pop: Population) -> usize {
        match pop {
            Population::E => self.sum_e,
            Population::I => self.sum_i,
        }
    }

    pub fn mean(&self, pop: Population) -> f64 {
        self.active(pop) as f64 / self.n() as f64
    }

    /// Updates performed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Simulation clock, `steps / 2N`.
    pub fn time(&self) -> f64 {
        self.steps as f64 / (2 * self.n()) as f64
    }

    fn recount_matches(&self) -> bool {
        self.sum_e == self.x_e.iter().filter(|&&x| x).count() && self.sum_i == self.x_i.iter().filter(|&&x| x).count()
    }
}

/// Membrane potential minus threshold of neuron `index` of `pop`. With
/// uniform weights it is the same for every neuron of a population.
pub fn local_field(index: usize, pop: Population, state: &BinaryNetworkState, params: &SystemParams) -> f64 {
    assert!(index < state.n(), "neuron {index} out of range (N = {})", state.n());
    let n = state.n() as f64;
    let w = &params.weights;
    let h = params.thresholds.unwrap_or_default();
    let (se, si) = (state.sum_e as f64, state.sum_i as f64);
    match pop {
        Population::E => (w.w_ee * se - w.w_ei * si) / n - h.h_e,
        Population::I => (w.w_ie * se - w.w_ii * si) / n - h.h_i,
    }
}

/// What one update did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Update {
    pub pop: Population,
    pub index: usize,
    pub value: bool,
}

/// Re-samples one uniformly chosen neuron: it becomes active with
/// probability `½(1 + tanh βg)`. Advances the clock by `1/2N`.
pub fn glauber_step(state: &mut BinaryNetworkState, params: &SystemParams, rng: &mut impl Rng) -> Update {
    let n = state.n();
    let j = rng.gen_range(0..2 * n);
    let (pop, index) = if j < n { (Population::E, j) } else { (Population::I, j - n) };
    let g = local_field(index, pop, state, params);
    let p = 0.5 * (1.0 + (params.beta * g).tanh());
    let value = rng.gen::<f64>() < p;
    let (xs, sum) = match pop {
        Population::E => (&mut state.x_e, &mut state.sum_e),
        Population::I => (&mut state.x_i, &mut state.sum_i),
    };
    match (xs[index], value) {
        (false, true) => *sum += 1,
        (true, false) => *sum -= 1,
        _ => {}
    }
    xs[index] = value;
    state.steps += 1;
    // O(N) recount once per time unit keeps debug runs affordable
    debug_assert!(!state.steps.is_multiple_of(2 * n as u64) || state.recount_matches());
    Update { pop, index, value }
}

/// Sampled population means.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PopulationTrace {
    pub times: Vec<f64>,
    pub mean_e: Vec<f64>,
    pub mean_i: Vec<f64>,
}

impl PopulationTrace {
    fn record(&mut self, state: &BinaryNetworkState) {
        self.times.push(state.time());
        self.mean_e.push(state.mean(Population::E));
        self.mean_i.push(state.mean(Population::I));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,mean_e,mean_i`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "mean_e", "mean_i"])?;
        for k in 0..self.len() {
            w.write_record([
                self.times[k].to_string(),
                self.mean_e[k].to_string(),
                self.mean_i[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `⌈t_end · 2N⌉` updates. The initial state is sampled at `t = 0`;
/// afterwards a sample is taken right after the first update at or past
/// each multiple of `sample_every`.
pub fn simulate(config: &GlauberConfig) -> Result<PopulationTrace, GlauberError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = BinaryNetworkState::from_initial(&config.initial, config.n, &mut rng);
    let steps = config.total_steps();
    let two_n = (2 * config.n) as f64;
    let mut trace = PopulationTrace::default();
    trace.record(&state);
    let mut next_sample = 1u64;
    for _ in 0..steps {
        glauber_step(&mut state, &config.params, &mut rng);
        // compare in step units to avoid drift: sample k is due at step k·Δ·2N
        if state.steps() as f64 >= next_sample as f64 * config.sample_every * two_n - 1e-9 {
            trace.record(&state);
            while next_sample as f64 * config.sample_every * two_n - 1e-9 <= state.steps() as f64 {
                next_sample += 1;
            }
        }
    }
    Ok(trace)
}
