//! Continuous σ_z measurement of a single qubit in Bloch coordinates.
//!
//! Without feedback the impurity p̄ = ½(1 − |v|²) decays like t^{−1/2}e^{−4kt}
//! on average. Rotating the Bloch vector back to the equator after every step
//! makes the decay deterministic, p̄(0)e^{−8kt}.

use std::f64::consts::{FRAC_PI_2, PI};

use qfc_qstate::{BlochVector, QfcError, Result};
use qfc_stochastic::{run_ensemble, RngStream};

/// Bisection tolerance for time-to-target, in units of k·t.
pub const BISECTION_TOL: f64 = 1e-4;
/// Relative accuracy requested from [`nofeedback_impurity`].
pub const QUADRATURE_RTOL: f64 = 1e-10;
/// Largest k·t searched by [`time_to_target_nofeedback`].
pub const MAX_KT: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurificationRun {
    pub k: f64,
    pub dt: f64,
    pub horizon: f64,
    pub feedback: bool,
    pub target_impurity: f64,
    pub seed: u64,
}

impl PurificationRun {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(QfcError::OutOfRange { field: "k", value: self.k });
        }
        if !(self.dt > 0.0) || self.dt * self.k > 1e-3 + 1e-15 {
            return Err(QfcError::OutOfRange { field: "dt", value: self.dt });
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(QfcError::OutOfRange { field: "horizon", value: self.horizon });
        }
        if !(self.target_impurity > 0.0 && self.target_impurity < 0.5) {
            return Err(QfcError::OutOfRange {
                field: "target_impurity",
                value: self.target_impurity,
            });
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.horizon / self.dt).round().max(1.0) as u64
    }
}

/// One Euler–Maruyama step of
/// da_x = −(4k dt + a_z√(8k) dW) a_x, da_y likewise, da_z = (1 − a_z²)√(8k) dW,
/// clamped to the unit ball.
pub fn bloch_sme_step(v: BlochVector, k: f64, dt: f64, dw: f64) -> BlochVector {
    let s = (8.0 * k).sqrt();
    let shrink = 1.0 - 4.0 * k * dt - v.z * s * dw;
    let z = v.z + (1.0 - v.z * v.z) * s * dw;
    BlochVector::unchecked(v.x * shrink, v.y * shrink, z).clamped()
}

/// ½(1 − |v|²)
pub fn impurity(v: &BlochVector) -> f64 {
    (0.5 * (1.0 - v.norm_sq())).clamp(0.0, 0.5)
}

/// Φ = atan2(a_x, a_y)
pub fn azimuth(v: &BlochVector) -> f64 {
    v.x.atan2(v.y)
}

/// Δ = √(a_x² + a_y²)
pub fn transverse(v: &BlochVector) -> f64 {
    v.x.hypot(v.y)
}

/// Ito drift of |v|²: 8k(1 − a_z²)(1 − a_z² − Δ²).
pub fn length_drift(v: &BlochVector, k: f64) -> f64 {
    let z2 = v.z * v.z;
    let d2 = v.x * v.x + v.y * v.y;
    8.0 * k * (1.0 - z2) * (1.0 - z2 - d2)
}

/// Noise coefficient of |v|²: 2√(8k) a_z (1 − a_z² − Δ²).
pub fn length_diffusion(v: &BlochVector, k: f64) -> f64 {
    let d2 = v.x * v.x + v.y * v.y;
    2.0 * (8.0 * k).sqrt() * v.z * (1.0 - v.z * v.z - d2)
}

// 15-point Kronrod rule with embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let s = f(c - h * XGK[j]) + f(c + h * XGK[j]);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss–Kronrod integration on [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rtol: f64) -> Result<f64> {
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..2000 {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= rtol * total.abs() || err < 1e-300 {
            return Ok(total);
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("nonempty");
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
    Err(QfcError::Integration("quadrature did not reach its tolerance".into()))
}

fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Ensemble-average impurity without feedback, starting from the maximally
/// mixed state:
/// p̄(t) = e^{−4kt}/√(8π) ∫ e^{−u²/2} / cosh(√(8kt) u) du.
pub fn nofeedback_impurity(t: f64, k: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(QfcError::OutOfRange { field: "t", value: t });
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(QfcError::OutOfRange { field: "k", value: k });
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    let a = (8.0 * k * t).sqrt();
    // even integrand; e^{−u²/2} underflows well before u = 40
    let half = integrate(|u| (-0.5 * u * u).exp() * sech(a * u), 0.0, 40.0, QUADRATURE_RTOL)?;
    Ok((-4.0 * k * t).exp() * 2.0 * half / (8.0 * PI).sqrt())
}

/// p̄(0)e^{−8kt}
pub fn feedback_impurity_exact(p0: f64, k: f64, t: f64) -> f64 {
    p0 * (-8.0 * k * t).exp()
}

/// Equatorial rotation used by the ideal feedback: a_z → 0 at fixed |v| and Φ.
/// A vector on the z axis is turned toward +x.
pub fn rotate_to_equator(v: BlochVector) -> BlochVector {
    let r = v.norm();
    let d = transverse(&v);
    if d < 1e-300 {
        return BlochVector::unchecked(r, 0.0, 0.0);
    }
    BlochVector::unchecked(v.x * r / d, v.y * r / d, 0.0)
}

/// Rotate toward the equator in the meridian plane by at most `max_angle`.
pub fn rotate_toward_equator(v: BlochVector, max_angle: f64) -> BlochVector {
    let r = v.norm();
    let d = transverse(&v);
    let elev = v.z.atan2(d);
    let new = elev - elev.clamp(-max_angle, max_angle);
    let (ux, uy) = if d < 1e-300 { (1.0, 0.0) } else { (v.x / d, v.y / d) };
    let nd = r * new.cos();
    BlochVector::unchecked(ux * nd, uy * nd, r * new.sin())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurificationPath {
    pub times: Vec<f64>,
    pub impurity: Vec<f64>,
    pub states: Vec<BlochVector>,
}

fn sampled_path<F>(run: &PurificationRun, v0: BlochVector, sample_every: u64, mut step: F) -> Result<PurificationPath>
where
    F: FnMut(BlochVector) -> BlochVector,
{
    run.validate()?;
    let every = sample_every.max(1);
    let mut v = v0;
    let mut out = PurificationPath {
        times: vec![0.0],
        impurity: vec![impurity(&v)],
        states: vec![v],
    };
    for n in 1..=run.steps() {
        v = step(v);
        if n % every == 0 || n == run.steps() {
            out.times.push(n as f64 * run.dt);
            out.impurity.push(impurity(&v));
            out.states.push(v);
        }
    }
    Ok(out)
}

/// Single trajectory without feedback.
pub fn nofeedback_trajectory(run: &PurificationRun, v0: BlochVector, sample_every: u64) -> Result<PurificationPath> {
    let mut rng = RngStream::new(run.seed, 0);
    let (k, dt) = (run.k, run.dt);
    sampled_path(run, v0, sample_every, |v| bloch_sme_step(v, k, dt, rng.wiener(dt)))
}

/// Idealized feedback: the vector is held on the equator, where the noise
/// term of d|v|² vanishes, so |v|² follows its drift 8k(1 − |v|²) exactly
/// in the Ito sense. The rotation keeps Φ.
pub fn feedback_purify(run: &PurificationRun, v0: BlochVector, sample_every: u64) -> Result<PurificationPath> {
    if !run.feedback {
        return Err(QfcError::DegenerateInput("feedback_purify called with feedback=false".into()));
    }
    let mut rng = RngStream::new(run.seed, 0);
    let (k, dt) = (run.k, run.dt);
    let v0 = rotate_to_equator(v0);
    sampled_path(run, v0, sample_every, |v| {
        let dw = rng.wiener(dt);
        let r2 = (v.norm_sq() + length_drift(&v, k) * dt + length_diffusion(&v, k) * dw).clamp(0.0, 1.0);
        let n = v.norm();
        if n < 1e-300 {
            BlochVector::unchecked(r2.sqrt(), 0.0, 0.0)
        } else {
            let s = r2.sqrt() / n;
            BlochVector::unchecked(v.x * s, v.y * s, 0.0)
        }
    })
}

/// Finite-strength feedback: after each measurement step the vector is turned
/// toward the equator by at most `omega_max·dt`.
pub fn feedback_purify_bounded(
    run: &PurificationRun,
    v0: BlochVector,
    omega_max: f64,
    sample_every: u64,
) -> Result<PurificationPath> {
    if !(omega_max >= 0.0) {
        return Err(QfcError::OutOfRange { field: "omega_max", value: omega_max });
    }
    let mut rng = RngStream::new(run.seed, 0);
    let (k, dt) = (run.k, run.dt);
    sampled_path(run, v0, sample_every, |v| {
        rotate_toward_equator(bloch_sme_step(v, k, dt, rng.wiener(dt)), omega_max * dt)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpurityEstimate {
    pub t: f64,
    pub mean: f64,
    pub std_error: f64,
}

/// Ensemble mean impurity without feedback at the given checkpoints, starting
/// from the origin. Trajectory `i` uses stream `i` of `seed`.
pub fn nofeedback_ensemble(k: f64, dt: f64, checkpoints: &[f64], n_traj: u64, seed: u64) -> Result<Vec<ImpurityEstimate>> {
    if !(k > 0.0) {
        return Err(QfcError::OutOfRange { field: "k", value: k });
    }
    if !(dt > 0.0) {
        return Err(QfcError::OutOfRange { field: "dt", value: dt });
    }
    let idx: Vec<u64> = checkpoints
        .iter()
        .map(|&t| {
            if !(t >= 0.0) || !t.is_finite() {
                Err(QfcError::OutOfRange { field: "checkpoint", value: t })
            } else {
                Ok((t / dt).round() as u64)
            }
        })
        .collect::<Result<_>>()?;
    let stats = run_ensemble(n_traj, seed, idx.len(), |rng, out| {
        let mut v = BlochVector::unchecked(0.0, 0.0, 0.0);
        let mut n = 0u64;
        for (slot, &target) in idx.iter().enumerate() {
            while n < target {
                v = bloch_sme_step(v, k, dt, rng.wiener(dt));
                n += 1;
            }
            out[slot] = impurity(&v);
        }
        Ok(())
    })?;
    let se = stats.std_error();
    Ok(checkpoints
        .iter()
        .enumerate()
        .map(|(i, &t)| ImpurityEstimate {
            t,
            mean: stats.mean[i],
            std_error: se[i],
        })
        .collect())
}

fn check_target(target: f64) -> Result<()> {
    if !(target > 0.0 && target < 0.5) {
        return Err(QfcError::OutOfRange { field: "target_impurity", value: target });
    }
    Ok(())
}

/// t_qf solving p̄(0)e^{−8kt} = target.
pub fn time_to_target_feedback(p0: f64, target: f64, k: f64) -> Result<f64> {
    check_target(target)?;
    if !(p0 > 0.0 && p0 <= 0.5) {
        return Err(QfcError::OutOfRange { field: "p0", value: p0 });
    }
    if !(k > 0.0) {
        return Err(QfcError::OutOfRange { field: "k", value: k });
    }
    Ok(((p0 / target).ln() / (8.0 * k)).max(0.0))
}

/// t_cl solving [`nofeedback_impurity`](t, k) = target, by bisection in k·t.
pub fn time_to_target_nofeedback(target: f64, k: f64) -> Result<f64> {
    check_target(target)?;
    let f = |kt: f64| nofeedback_impurity(kt / k, k).map(|v| v - target);
    let mut hi = 1.0;
    let mut last = f(hi)?;
    while last > 0.0 {
        hi *= 2.0;
        if hi > MAX_KT {
            return Err(QfcError::HorizonExhausted {
                t: MAX_KT / k,
                what: "impurity target without feedback",
                last: last + target,
            });
        }
        last = f(hi)?;
    }
    let mut lo = 0.0;
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) / k)
}

/// t_qf / t_cl for a start at the maximally mixed state. Meaningful in the
/// long-time regime, target ≤ 1e-2.
pub fn speedup_ratio(target: f64, k: f64) -> Result<f64> {
    check_target(target)?;
    if target > 1e-2 {
        return Err(QfcError::OutOfRange { field: "target_impurity", value: target });
    }
    Ok(time_to_target_feedback(0.5, target, k)? / time_to_target_nofeedback(target, k)?)
}

/// Polar angle of the Bloch vector measured from the equator.
pub fn elevation(v: &BlochVector) -> f64 {
    v.z.atan2(transverse(v)).clamp(-FRAC_PI_2, FRAC_PI_2)
}
