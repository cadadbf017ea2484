//! Lindblad and diffusive stochastic master equations.
//!
//! A model is a Hamiltonian `H₀ + u(t, ρ) H_b` plus channels `(L, γ, η)`.
//! Each channel contributes `γ 𝒟[L]ρ dt`; a channel with η > 0 is also
//! monitored and contributes `√(ηγ) ℋ[L]ρ dW` with its own Wiener increment.
//!
//! Steps are Euler–Maruyama for the dissipative and measurement parts,
//! followed by the exact unitary `exp(−iH dt)`, then trace renormalization.

use std::sync::Arc;

use qfc_qstate::matrix::{
    anticommutator, c64, commutator, hermitian_eigen, hermitian_part, hermiticity_defect,
    max_abs, require_square, unitary_from_hamiltonian, ComplexMatrix, C64,
};
use qfc_qstate::{angular_momentum_ops, DensityMatrix, QfcError, Result};
use qfc_stochastic::RngStream;

/// Re-symmetrize every this many steps.
pub const SYMMETRIZE_EVERY: u64 = 100;

/// 𝒟[c]ρ = cρc† − ½(c†cρ + ρc†c)
pub fn dissipator(c: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let cd = c.adjoint();
    let cdc = &cd * c;
    c * rho * &cd - anticommutator(&cdc, rho).scale(0.5)
}

/// ℋ[c]ρ = cρ + ρc† − ⟨c + c†⟩ρ
pub fn meas_superop(c: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let cd = c.adjoint();
    let a = c * rho + rho * &cd;
    let tr = a.trace().re;
    a - rho.scale(tr)
}

pub type ControlFn = Arc<dyn Fn(f64, &DensityMatrix) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ControlLaw {
    Constant(f64),
    /// `values[i]` holds on `[times[i], times[i+1])`; the last value persists.
    Piecewise { times: Vec<f64>, values: Vec<f64> },
    /// u = offset − gain·⟨op⟩
    Proportional { gain: f64, offset: f64, op: ComplexMatrix },
    Custom(ControlFn),
}

impl std::fmt::Debug for ControlLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ControlLaw::Constant(u) => write!(f, "Constant({u})"),
            ControlLaw::Piecewise { times, values } => write!(f, "Piecewise({times:?}, {values:?})"),
            ControlLaw::Proportional { gain, offset, .. } => {
                write!(f, "Proportional(gain={gain}, offset={offset})")
            }
            ControlLaw::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl ControlLaw {
    pub fn piecewise(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(QfcError::DimensionMismatch(format!(
                "{} switch times with {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(QfcError::InvalidState("switch times must increase".into()));
        }
        Ok(ControlLaw::Piecewise { times, values })
    }

    pub fn eval(&self, t: f64, rho: &DensityMatrix) -> f64 {
        match self {
            ControlLaw::Constant(u) => *u,
            ControlLaw::Piecewise { times, values } => {
                let i = times.partition_point(|&s| s <= t);
                values[i.saturating_sub(1)]
            }
            ControlLaw::Proportional { gain, offset, op } => offset - gain * rho.expect(op),
            ControlLaw::Custom(f) => f(t, rho),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, ControlLaw::Constant(u) if *u == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub op: ComplexMatrix,
    pub rate: f64,
    pub efficiency: f64,
}

impl Channel {
    pub fn unmonitored(op: ComplexMatrix, rate: f64) -> Self {
        Channel {
            op,
            rate,
            efficiency: 0.0,
        }
    }

    pub fn monitored(op: ComplexMatrix, rate: f64, efficiency: f64) -> Self {
        Channel {
            op,
            rate,
            efficiency,
        }
    }

    pub fn is_monitored(&self) -> bool {
        self.efficiency > 0.0
    }
}

#[derive(Debug, Clone)]
pub struct SmeModel {
    dim: usize,
    pub hamiltonian_base: ComplexMatrix,
    pub control_channel: Option<ComplexMatrix>,
    pub control_law: ControlLaw,
    pub channels: Vec<Channel>,
    pub s_detuning: f64,
}

impl SmeModel {
    pub fn new(hamiltonian_base: ComplexMatrix) -> Result<Self> {
        let dim = require_square(&hamiltonian_base, "hamiltonian")?;
        if hermiticity_defect(&hamiltonian_base) > 1e-12 {
            return Err(QfcError::InvalidState("hamiltonian is not Hermitian".into()));
        }
        Ok(SmeModel {
            dim,
            hamiltonian_base,
            control_channel: None,
            control_law: ControlLaw::Constant(0.0),
            channels: Vec::new(),
            s_detuning: 0.0,
        })
    }

    pub fn free(dim: usize) -> Self {
        SmeModel::new(ComplexMatrix::zeros(dim, dim)).expect("zero hamiltonian")
    }

    /// dρ = −k[X,[X,ρ]]dt + √(2k)ℋ[X]ρ dW, i.e. channel (X, 2k, η = 1).
    pub fn continuous_measurement(x: ComplexMatrix, k: f64) -> Result<Self> {
        let d = require_square(&x, "observable")?;
        SmeModel::free(d).with_channel(Channel::monitored(x, 2.0 * k, 1.0))
    }

    pub fn with_control(mut self, h_b: ComplexMatrix, law: ControlLaw) -> Result<Self> {
        self.check_op(&h_b, "control channel")?;
        if hermiticity_defect(&h_b) > 1e-12 {
            return Err(QfcError::InvalidState("control channel is not Hermitian".into()));
        }
        self.control_channel = Some(h_b);
        self.control_law = law;
        Ok(self)
    }

    pub fn with_channel(mut self, ch: Channel) -> Result<Self> {
        self.check_op(&ch.op, "channel operator")?;
        if !(ch.rate >= 0.0) || !ch.rate.is_finite() {
            return Err(QfcError::OutOfRange {
                field: "rate",
                value: ch.rate,
            });
        }
        if !(0.0..=1.0).contains(&ch.efficiency) {
            return Err(QfcError::OutOfRange {
                field: "efficiency",
                value: ch.efficiency,
            });
        }
        self.channels.push(ch);
        Ok(self)
    }

    fn check_op(&self, op: &ComplexMatrix, what: &str) -> Result<()> {
        if op.shape() != (self.dim, self.dim) {
            return Err(QfcError::DimensionMismatch(format!(
                "{what} {:?} in a dim-{} model",
                op.shape(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_monitored(&self) -> usize {
        self.channels.iter().filter(|c| c.is_monitored()).count()
    }

    pub fn hamiltonian(&self, t: f64, rho: &DensityMatrix) -> ComplexMatrix {
        match &self.control_channel {
            Some(hb) if !self.control_law.is_zero() => {
                &self.hamiltonian_base + hb.scale(self.control_law.eval(t, rho))
            }
            _ => self.hamiltonian_base.clone(),
        }
    }

    fn has_dynamics_hamiltonian(&self) -> bool {
        max_abs(&self.hamiltonian_base) > 0.0
            || (self.control_channel.is_some() && !self.control_law.is_zero())
    }

    /// Σ γ 𝒟[L]ρ
    pub fn dissipative_part(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for ch in &self.channels {
            if ch.rate > 0.0 {
                acc += dissipator(&ch.op, rho).scale(ch.rate);
            }
        }
        acc
    }

    /// −i[H,ρ] + Σ γ 𝒟[L]ρ
    pub fn generator(&self, t: f64, rho: &DensityMatrix) -> ComplexMatrix {
        let h = self.hamiltonian(t, rho);
        commutator(&h, rho.matrix()) * c64(0.0, -1.0) + self.dissipative_part(rho.matrix())
    }

    fn check_state(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim {
            return Err(QfcError::DimensionMismatch(format!(
                "state of dim {} in a dim-{} model",
                rho.dim(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// What to do with negative eigenvalues left by a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Positivity {
    #[default]
    Keep,
    /// Clip negative eigenvalues to zero and renormalize.
    Clip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub renormalize: bool,
    pub positivity: Positivity,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            renormalize: true,
            positivity: Positivity::Keep,
        }
    }
}

fn finish(model: &SmeModel, t: f64, rho: &DensityMatrix, mut next: ComplexMatrix, dt: f64, opts: StepOptions) -> Result<DensityMatrix> {
    if model.has_dynamics_hamiltonian() {
        let u = unitary_from_hamiltonian(&model.hamiltonian(t, rho), dt);
        next = &u * next * u.adjoint();
    }
    if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QfcError::Integration("non-finite state after step".into()));
    }
    if opts.positivity == Positivity::Clip {
        next = clip_negative(&next);
    }
    if opts.renormalize {
        let tr = next.trace().re;
        if !(tr > 0.0) {
            return Err(QfcError::Integration(format!("trace {tr} after step")));
        }
        next.unscale_mut(tr);
    }
    Ok(DensityMatrix::from_matrix_unchecked(next))
}

/// Zero the negative eigenvalues of the Hermitian part.
pub fn clip_negative(m: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    if vals[0] >= 0.0 {
        return m.clone();
    }
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let w = C64::new(l.max(0.0), 0.0);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= w;
        }
    }
    scaled * vecs.adjoint()
}

/// ρ + dt Σγ𝒟[L]ρ, then exp(−iH dt), then trace renormalization.
pub fn lindblad_step(model: &SmeModel, t: f64, rho: &DensityMatrix, dt: f64) -> Result<DensityMatrix> {
    model.check_state(rho)?;
    check_dt(dt)?;
    let next = rho.matrix() + model.dissipative_part(rho.matrix()).scale(dt);
    finish(model, t, rho, next, dt, StepOptions::default())
}

/// Lindblad step plus Σ_n √(η_n γ_n) ℋ[L_n]ρ dW_n over the monitored channels,
/// one increment per monitored channel in channel order.
pub fn sme_step(model: &SmeModel, t: f64, rho: &DensityMatrix, dt: f64, dw: &[f64]) -> Result<DensityMatrix> {
    sme_step_with(model, t, rho, dt, dw, StepOptions::default())
}

pub fn sme_step_with(
    model: &SmeModel,
    t: f64,
    rho: &DensityMatrix,
    dt: f64,
    dw: &[f64],
    opts: StepOptions,
) -> Result<DensityMatrix> {
    model.check_state(rho)?;
    check_dt(dt)?;
    if dw.len() != model.n_monitored() {
        return Err(QfcError::DimensionMismatch(format!(
            "{} increments for {} monitored channels",
            dw.len(),
            model.n_monitored()
        )));
    }
    let r = rho.matrix();
    let mut next = r + model.dissipative_part(r).scale(dt);
    let mut k = 0;
    for ch in model.channels.iter().filter(|c| c.is_monitored()) {
        let amp = (ch.efficiency * ch.rate).sqrt();
        if amp > 0.0 {
            next += meas_superop(&ch.op, r).scale(amp * dw[k]);
        }
        k += 1;
    }
    finish(model, t, rho, next, dt, opts)
}

/// dY_n = √η_n ⟨c_n + c_n†⟩ dt + dW_n with c_n = √γ_n L_n, for each monitored channel.
pub fn record_increments(model: &SmeModel, rho: &DensityMatrix, dt: f64, dw: &[f64]) -> Vec<f64> {
    model
        .channels
        .iter()
        .filter(|c| c.is_monitored())
        .zip(dw)
        .map(|(ch, w)| {
            let c = ch.op.scale(ch.rate.sqrt());
            let mean = rho.expect(&(&c + c.adjoint()));
            ch.efficiency.sqrt() * mean * dt + w
        })
        .collect()
}

/// dW = dY − 2√(Mη)⟨L⟩dt for a Hermitian monitored operator L.
pub fn innovation_increment(record_dy: f64, rho: &DensityMatrix, l: &ComplexMatrix, m: f64, eta: f64, dt: f64) -> f64 {
    record_dy - 2.0 * (m * eta).sqrt() * rho.expect(l) * dt
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(QfcError::OutOfRange { field: "dt", value: dt });
    }
    Ok(())
}

/// Stepping parameters for [`run_trajectory`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmeRun {
    pub dt: f64,
    pub steps: u64,
    /// Store every `sample_every`-th state (the initial and final states always).
    pub sample_every: u64,
    pub options: StepOptions,
}

#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Cumulative record Y_t per monitored channel, aligned with `times`.
    pub record: Vec<Vec<f64>>,
    /// Every Wiener increment drawn, step-major, one per monitored channel.
    pub noise: Vec<Vec<f64>>,
}

impl TrajectoryResult {
    /// Largest trace and Hermiticity defects over stored states.
    pub fn worst_defects(&self) -> (f64, f64) {
        self.states.iter().fold((0.0, 0.0), |(t, h), s| {
            (
                f64::max(t, (s.matrix().trace().re - 1.0).abs()),
                f64::max(h, hermiticity_defect(s.matrix())),
            )
        })
    }
}

/// Integrate one trajectory, drawing independent increments per monitored channel.
pub fn run_trajectory(model: &SmeModel, rho0: &DensityMatrix, run: &SmeRun, rng: &mut RngStream) -> Result<TrajectoryResult> {
    model.check_state(rho0)?;
    check_dt(run.dt)?;
    let nm = model.n_monitored();
    let every = run.sample_every.max(1);
    let mut rho = rho0.clone();
    let mut y = vec![0.0; nm];
    let mut out = TrajectoryResult {
        times: vec![0.0],
        states: vec![rho.clone()],
        record: vec![y.clone()],
        noise: Vec::with_capacity(run.steps as usize),
    };
    let mut dw = vec![0.0; nm];
    for n in 0..run.steps {
        let t = n as f64 * run.dt;
        for w in dw.iter_mut() {
            *w = rng.wiener(run.dt);
        }
        for (acc, d) in y.iter_mut().zip(record_increments(model, &rho, run.dt, &dw)) {
            *acc += d;
        }
        rho = sme_step_with(model, t, &rho, run.dt, &dw, run.options)?;
        if (n + 1) % SYMMETRIZE_EVERY == 0 {
            rho = DensityMatrix::from_matrix_unchecked(hermitian_part(rho.matrix()));
        }
        out.noise.push(dw.clone());
        if (n + 1) % every == 0 || n + 1 == run.steps {
            out.times.push((n + 1) as f64 * run.dt);
            out.states.push(rho.clone());
            out.record.push(y.clone());
        }
    }
    Ok(out)
}

/// Controlled spin-j ensemble: H = u(t)F_y + sF_z, monitored F_z at strength M
/// and efficiency η, optionally an unmonitored decay channel (σ, γ).
pub fn spin_ensemble_model(
    two_j: u32,
    u_law: ControlLaw,
    s: f64,
    m: f64,
    eta: f64,
    extra: Option<(ComplexMatrix, f64)>,
) -> Result<SmeModel> {
    if !(m >= 0.0) {
        return Err(QfcError::OutOfRange { field: "M", value: m });
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(QfcError::OutOfRange { field: "eta", value: eta });
    }
    let (_, fy, fz) = angular_momentum_ops(two_j)?;
    let mut model = SmeModel::new(fz.scale(s))?
        .with_control(fy, u_law)?
        .with_channel(Channel::monitored(fz, m, eta))?;
    model.s_detuning = s;
    if let Some((sigma, gamma)) = extra {
        model = model.with_channel(Channel::unmonitored(sigma, gamma))?;
    }
    Ok(model)
}

/// Collective lowering operator F₋ for spin j.
pub fn spin_lowering(two_j: u32) -> Result<ComplexMatrix> {
    let (fx, fy, _) = angular_momentum_ops(two_j)?;
    Ok(fx - fy * c64(0.0, 1.0))
}

/// γ/(Mη), the ratio entering the long-run fidelity bound of the decaying spin model.
pub fn decay_ratio(gamma: f64, m: f64, eta: f64) -> f64 {
    gamma / (m * eta)
}

/// (1 + √(l² + l + 1)) / (2(l + 1))
pub fn fidelity_bound(l: f64) -> f64 {
    (1.0 + (l * l + l + 1.0).sqrt()) / (2.0 * (l + 1.0))
}

/// d Tr(ρ²)/dt under the open-loop generator −i[H₀ + uH_b, ρ] + Σγ𝒟[L]ρ,
/// by a central difference of step `h` along the generator.
///
/// Requires every channel operator to commute with H₀ to 1e-10.
pub fn purity_derivative_check(model: &SmeModel, t: f64, rho: &DensityMatrix, h: f64) -> Result<f64> {
    model.check_state(rho)?;
    check_dt(h)?;
    for ch in &model.channels {
        let c = max_abs(&commutator(&model.hamiltonian_base, &ch.op));
        if c > 1e-10 {
            return Err(QfcError::InvalidState(format!(
                "channel does not commute with H0 (‖[H0, L]‖ = {c:e})"
            )));
        }
    }
    let g = model.generator(t, rho);
    let plus = rho.matrix() + g.scale(h);
    let minus = rho.matrix() - g.scale(h);
    let p = |m: &ComplexMatrix| qfc_qstate::matrix::trace_product_re(m, m);
    Ok((p(&plus) - p(&minus)) / (2.0 * h))
}

/// Hermitian test operators and states shared by the property suites.
pub fn hermitian_from_reals(d: usize, p: &[f64]) -> Result<ComplexMatrix> {
    if p.len() != 2 * d * d {
        return Err(QfcError::DimensionMismatch(format!(
            "{} reals for a dim-{d} Hermitian matrix",
            p.len()
        )));
    }
    let g = ComplexMatrix::from_fn(d, d, |i, j| c64(p[i * d + j], p[d * d + i * d + j]));
    Ok((&g + g.adjoint()).scale(0.5))
}
