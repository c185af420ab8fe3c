//! Monte Carlo reference machinery around the deterministic solver.
//!
//! Each iteration draws a random amplitude (truncated Gaussian, by
//! rejection), builds one smooth bed realisation, runs the deterministic
//! model and streams the final state into per-element moment accumulators.
//! Draws are indexed by iteration number through independent ChaCha streams,
//! so results are reproducible for a fixed seed no matter how iterations are
//! scheduled; the iterations themselves run in parallel.

use crate::cases::CaseSpec;
use crate::deterministic::{run, SimulationConfig};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Truncated-Gaussian amplitude sampler with a reproducible stream.
#[derive(Debug, Clone)]
pub struct AmplitudeSampler {
    pub mean: f64,
    pub std: f64,
    pub lower: f64,
    pub upper: f64,
    pub seed: u64,
    next_iteration: u64,
}

impl AmplitudeSampler {
    pub fn new(mean: f64, std: f64, bounds: (f64, f64), seed: u64) -> Result<Self> {
        let (lower, upper) = bounds;
        if !(lower <= mean && mean <= upper) {
            return Err(Error::InvalidInput(format!(
                "amplitude bounds [{lower}, {upper}] must bracket the mean {mean}"
            )));
        }
        if std < 0.0 {
            return Err(Error::InvalidInput("negative amplitude std".into()));
        }
        Ok(Self {
            mean,
            std,
            lower,
            upper,
            seed,
            next_iteration: 0,
        })
    }

    /// Sampler matching a case's amplitude statistics and truncation bounds.
    pub fn for_case(case: &CaseSpec, seed: u64) -> Result<Self> {
        Self::new(
            case.mean_amplitude(),
            case.amplitude_std(),
            case.amplitude_bounds,
            seed,
        )
    }

    /// The draw for a given iteration index: rejection sampling from
    /// N(mean, std^2) until the draw lands inside the bounds. Every
    /// iteration owns an independent substream, so the mapping from index
    /// to draw is fixed by the seed alone.
    pub fn draw_for_iteration(&self, iteration: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(iteration);
        loop {
            let xi: f64 = StandardNormal.sample(&mut rng);
            let r = self.mean + self.std * xi;
            if self.lower <= r && r <= self.upper {
                return r;
            }
        }
    }

    /// Draws the next amplitude, advancing the iteration stream.
    pub fn sample(&mut self) -> f64 {
        let r = self.draw_for_iteration(self.next_iteration);
        self.next_iteration += 1;
        r
    }
}

/// One-pass central-moment accumulator (orders 1-4) with an exact merge, so
/// partial accumulations combine associatively.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MomentAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return other.clone();
        }
        if other.count == 0 {
            return self.clone();
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let delta2 = delta * delta;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + delta2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + delta * delta2 * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * delta2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        Self {
            count: self.count + other.count,
            mean,
            m2,
            m3,
            m4,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance m2/n.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standardised skewness; zero for (near-)degenerate samples.
    pub fn skewness(&self) -> f64 {
        let var = self.variance();
        if var <= 1e-300 {
            return 0.0;
        }
        (self.m3 / self.count as f64) / var.powf(1.5)
    }

    /// Standardised kurtosis (3 for a Gaussian); zero for degenerate samples.
    pub fn kurtosis(&self) -> f64 {
        let var = self.variance();
        if var <= 1e-300 {
            return 0.0;
        }
        (self.m4 / self.count as f64) / (var * var)
    }

    /// mean, std, skewness, kurtosis in output order.
    pub fn summary(&self) -> [f64; 4] {
        [self.mean(), self.std(), self.skewness(), self.kurtosis()]
    }
}

/// Variables tracked per element by the accumulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McVariable {
    Bed,
    Depth,
    Discharge,
    Eta,
    Velocity,
}

/// Streaming statistics and retained samples from a batch of iterations.
#[derive(Debug, Clone)]
pub struct McAccumulator {
    /// samples[element][iteration] = [z, h, q] at the final time.
    samples: Vec<Vec<[f64; 3]>>,
    draws: Vec<f64>,
    stats: Vec<[MomentAccumulator; 5]>,
    probe_element: usize,
    /// (mean, std) of the probe depth after each iteration.
    probe_history: Vec<(f64, f64)>,
    riemann_calls: u64,
}

impl McAccumulator {
    pub fn new(elements: usize, probe_element: usize) -> Self {
        Self {
            samples: vec![Vec::new(); elements],
            draws: Vec::new(),
            stats: vec![Default::default(); elements],
            probe_element,
            probe_history: Vec::new(),
            riemann_calls: 0,
        }
    }

    pub fn elements(&self) -> usize {
        self.samples.len()
    }

    pub fn count(&self) -> u64 {
        self.draws.len() as u64
    }

    pub fn riemann_calls(&self) -> u64 {
        self.riemann_calls
    }

    pub fn probe_element(&self) -> usize {
        self.probe_element
    }

    /// Folds one finished iteration into the running statistics.
    pub fn push_iteration(&mut self, draw: f64, final_state: &[[f64; 3]], riemann_calls: u64) {
        assert_eq!(final_state.len(), self.samples.len());
        self.draws.push(draw);
        self.riemann_calls += riemann_calls;
        for (i, &[z, h, q]) in final_state.iter().enumerate() {
            self.samples[i].push([z, h, q]);
            let [z_acc, h_acc, q_acc, eta_acc, v_acc] = &mut self.stats[i];
            z_acc.push(z);
            h_acc.push(h);
            q_acc.push(q);
            eta_acc.push(h + z);
            v_acc.push(q / h);
        }
        let probe = &self.stats[self.probe_element][1];
        self.probe_history.push((probe.mean(), probe.std()));
    }

    /// Combines two accumulations over disjoint, consecutive iteration
    /// ranges (`self` first). The probe history is rebuilt from the merged
    /// samples so it matches a single sequential run.
    pub fn merge(mut self, other: Self) -> Result<Self> {
        if self.samples.len() != other.samples.len() || self.probe_element != other.probe_element {
            return Err(Error::InvalidInput(
                "cannot merge accumulators with different layouts".into(),
            ));
        }
        for (mine, theirs) in self.samples.iter_mut().zip(other.samples) {
            mine.extend(theirs);
        }
        self.draws.extend(other.draws);
        for (mine, theirs) in self.stats.iter_mut().zip(&other.stats) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a = a.merge(b);
            }
        }
        self.riemann_calls += other.riemann_calls;
        let mut probe = MomentAccumulator::default();
        self.probe_history = self.samples[self.probe_element]
            .iter()
            .map(|&[_, h, _]| {
                probe.push(h);
                (probe.mean(), probe.std())
            })
            .collect();
        Ok(self)
    }

    pub fn moments(&self, var: McVariable, element: usize) -> &MomentAccumulator {
        let idx = match var {
            McVariable::Bed => 0,
            McVariable::Depth => 1,
            McVariable::Discharge => 2,
            McVariable::Eta => 3,
            McVariable::Velocity => 4,
        };
        &self.stats[element][idx]
    }

    /// Per-iteration [z, h, q] rows retained for one element.
    pub fn samples(&self, element: usize) -> &[[f64; 3]] {
        &self.samples[element]
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    /// Free-surface samples of one element.
    pub fn eta_samples(&self, element: usize) -> Vec<f64> {
        self.samples[element]
            .iter()
            .map(|&[z, h, _]| z + h)
            .collect()
    }

    /// Probe-depth (mean, std) after each iteration.
    pub fn probe_history(&self) -> &[(f64, f64)] {
        &self.probe_history
    }
}

/// Runs `iterations` deterministic simulations with per-iteration draws and
/// accumulates final-state statistics.
///
/// Iterations execute in parallel; the accumulation order is fixed by the
/// iteration index, so the result is identical to a sequential run. A failed
/// iteration aborts the whole run, reporting the offending draw.
pub fn mc_run(
    case: &CaseSpec,
    iterations: u64,
    sampler: &AmplitudeSampler,
    cfg: &SimulationConfig,
) -> Result<McAccumulator> {
    if iterations == 0 {
        return Err(Error::InvalidInput(
            "a Monte Carlo run needs at least one iteration".into(),
        ));
    }
    type IterationOutcome = (f64, Result<(Vec<[f64; 3]>, u64)>);
    let results: Vec<IterationOutcome> = (0..iterations)
        .into_par_iter()
        .map(|k| {
            let draw = sampler.draw_for_iteration(k);
            let outcome = run(case, draw, cfg).map(|out| {
                let state: Vec<[f64; 3]> = out
                    .field
                    .flow
                    .iter()
                    .zip(&out.field.bed)
                    .map(|(u, &z)| [z, u.h, u.q])
                    .collect();
                (state, out.riemann_calls)
            });
            (draw, outcome)
        })
        .collect();

    let probe = case.mesh.element_at(case.probe_x);
    let mut acc = McAccumulator::new(case.mesh.elements, probe);
    for (iteration, (draw, outcome)) in results.into_iter().enumerate() {
        match outcome {
            Ok((state, calls)) => acc.push_iteration(draw, &state, calls),
            Err(err) => {
                return Err(Error::InvalidInput(format!(
                    "Monte Carlo iteration {iteration} (draw r = {draw}) failed: {err}"
                )))
            }
        }
    }
    Ok(acc)
}

/// Statistical convergence of the probe history: true once both the mean and
/// the std change by at most `tol` over `window` consecutive iterations.
/// Returns the first converged index when it exists.
pub fn statistical_convergence(
    history: &[(f64, f64)],
    window: usize,
    tol: f64,
) -> (bool, Option<usize>) {
    assert!(window >= 1);
    let mut run_length = 0usize;
    for i in 1..history.len() {
        let d_mean = (history[i].0 - history[i - 1].0).abs();
        let d_std = (history[i].1 - history[i - 1].1).abs();
        if d_mean < tol && d_std < tol {
            run_length += 1;
            if run_length >= window {
                return (true, Some(i));
            }
        } else {
            run_length = 0;
        }
    }
    (false, None)
}

/// A density-normalised histogram: the areas of all bars sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    /// (bin centre, density) pairs for non-empty bins.
    pub bins: Vec<(f64, f64)>,
}

impl Histogram {
    pub fn total_area(&self) -> f64 {
        self.bins.iter().map(|(_, d)| d * self.bin_width).sum()
    }
}

/// Bins samples into intervals of `bin_width` aligned to multiples of the
/// width; bar heights are densities count/(N * width).
pub fn histogram(samples: &[f64], bin_width: f64) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("cannot bin an empty sample set".into()));
    }
    if bin_width.is_nan() || bin_width <= 0.0 {
        return Err(Error::InvalidInput("bin width must be positive".into()));
    }
    let index_of = |x: f64| (x / bin_width).floor() as i64;
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = index_of(lo);
    let last = index_of(hi);
    let mut counts = vec![0u64; (last - first + 1) as usize];
    for &x in samples {
        counts[(index_of(x) - first) as usize] += 1;
    }
    let n = samples.len() as f64;
    let bins = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| {
            let centre = (first + k as i64) as f64 * bin_width + 0.5 * bin_width;
            (centre, c as f64 / (n * bin_width))
        })
        .collect();
    Ok(Histogram { bin_width, bins })
}
