//! Seeded noise and fixed-step Ito integration.
//!
//! Each trajectory owns a [`RngStream`]: a ChaCha20 generator keyed by
//! `seed` and positioned on stream `stream_id`, so trajectory `i` of an
//! ensemble always sees the same increments regardless of scheduling.
//! [`run_ensemble`] reduces per-trajectory observables in fixed blocks
//! combined in index order, which makes the result independent of the
//! thread count.

use qfc_qstate::{QfcError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Trajectories per reduction block.
pub const BLOCK: usize = 64;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn wiener(&mut self, dt: f64) -> f64 {
        dt.sqrt() * self.standard_normal()
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerIncrement {
    pub dw: f64,
    pub dt: f64,
}

pub fn wiener_increment(rng: &mut RngStream, dt: f64) -> Result<WienerIncrement> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(QfcError::OutOfRange { field: "dt", value: dt });
    }
    Ok(WienerIncrement {
        dw: rng.wiener(dt),
        dt,
    })
}

/// Σ (ΔW_n)² over a uniform partition of [0, t_total].
pub fn ito_quadratic_variation(rng: &mut RngStream, t_total: f64, n_steps: u64) -> Result<f64> {
    if n_steps == 0 {
        return Err(QfcError::OutOfRange {
            field: "n_steps",
            value: 0.0,
        });
    }
    if !(t_total > 0.0) {
        return Err(QfcError::OutOfRange {
            field: "t_total",
            value: t_total,
        });
    }
    let dt = t_total / n_steps as f64;
    let mut acc = 0.0;
    for _ in 0..n_steps {
        let dw = rng.wiener(dt);
        acc += dw * dw;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeStepperConfig {
    pub dt: f64,
    pub renormalize: bool,
    pub step_count: u64,
}

impl SdeStepperConfig {
    /// Largest dt ≤ `max_dt` that divides `horizon` into whole steps.
    pub fn for_horizon(horizon: f64, max_dt: f64, renormalize: bool) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(QfcError::OutOfRange {
                field: "horizon",
                value: horizon,
            });
        }
        if !(max_dt > 0.0) {
            return Err(QfcError::OutOfRange {
                field: "dt",
                value: max_dt,
            });
        }
        let steps = (horizon / max_dt - 1e-9).ceil().max(1.0) as u64;
        Ok(SdeStepperConfig {
            dt: horizon / steps as f64,
            renormalize,
            step_count: steps,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.step_count as f64
    }
}

/// X + f(X) dt + σ(X) dW with coefficients at the left endpoint.
pub fn euler_maruyama_step<F, G>(state: &[f64], drift: F, diffusion: G, dt: f64, dw: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let f = drift(state);
    let g = diffusion(state);
    if f.len() != state.len() || g.len() != state.len() {
        return Err(QfcError::DimensionMismatch(format!(
            "state {} drift {} diffusion {}",
            state.len(),
            f.len(),
            g.len()
        )));
    }
    let out: Vec<f64> = state
        .iter()
        .zip(f.iter().zip(&g))
        .map(|(x, (a, b))| x + a * dt + b * dw)
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(QfcError::Integration("non-finite Euler-Maruyama output".into()));
    }
    Ok(out)
}

/// Running mean and sum of squared deviations per observable.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub n: u64,
    pub mean: Vec<f64>,
    m2: Vec<f64>,
}

impl EnsembleStats {
    pub fn empty(n_values: usize) -> Self {
        EnsembleStats {
            n: 0,
            mean: vec![0.0; n_values],
            m2: vec![0.0; n_values],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    /// Chan's pairwise combination.
    pub fn merge(&mut self, o: &EnsembleStats) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = o.clone();
            return;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = o.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += o.m2[i] + d * d * na * nb / n;
        }
        self.n += o.n;
    }

    /// Unbiased sample variance (0 for a single trajectory).
    pub fn variance(&self) -> Vec<f64> {
        if self.n < 2 {
            return vec![0.0; self.mean.len()];
        }
        self.m2.iter().map(|s| s / (self.n - 1) as f64).collect()
    }

    pub fn std_error(&self) -> Vec<f64> {
        let n = self.n.max(1) as f64;
        self.variance().into_iter().map(|v| (v / n).sqrt()).collect()
    }
}

/// Run `n_traj` trajectories; trajectory `i` gets `RngStream::new(base_seed, i)`
/// and writes `n_values` observables into its output slice.
pub fn run_ensemble<F>(n_traj: u64, base_seed: u64, n_values: usize, traj: F) -> Result<EnsembleStats>
where
    F: Fn(&mut RngStream, &mut [f64]) -> Result<()> + Sync,
{
    if n_traj == 0 {
        return Err(QfcError::OutOfRange {
            field: "n_traj",
            value: 0.0,
        });
    }
    let n_blocks = n_traj.div_ceil(BLOCK as u64);
    let blocks: Vec<Result<EnsembleStats>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = EnsembleStats::empty(n_values);
            let mut buf = vec![0.0; n_values];
            let lo = b * BLOCK as u64;
            let hi = (lo + BLOCK as u64).min(n_traj);
            for i in lo..hi {
                let mut rng = RngStream::new(base_seed, i);
                buf.iter_mut().for_each(|v| *v = 0.0);
                traj(&mut rng, &mut buf).map_err(|e| e.in_trajectory(i))?;
                if let Some(pos) = buf.iter().position(|v| !v.is_finite()) {
                    return Err(QfcError::Integration(format!("observable {pos} is not finite"))
                        .in_trajectory(i));
                }
                acc.push(&buf);
            }
            Ok(acc)
        })
        .collect();
    let mut total = EnsembleStats::empty(n_values);
    for b in blocks {
        total.merge(&b?);
    }
    Ok(total)
}

/// Map `f` over `0..n` in parallel, keeping index order in the output.
pub fn par_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}
