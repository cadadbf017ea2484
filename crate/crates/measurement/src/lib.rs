//! Generalized measurements.
//!
//! A [`MeasurementOperatorSet`] is a complete family of Kraus operators.
//! [`gaussian_weak_set`] builds the Gaussian-smeared version of a
//! projective measurement of a diagonal observable with integer spectrum,
//! and [`continuous_meas_kraus`] gives the single-step operator of a
//! continuous measurement of a Hermitian observable.

use qfc_qstate::matrix::{
    c64, hermitian_function, identity, max_abs, require_square, ComplexMatrix,
};
use qfc_qstate::{DensityMatrix, QfcError, Result};
use qfc_stochastic::RngStream;

pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Outcomes whose probability falls below this are never accepted.
pub const IMPOSSIBLE_PROB: f64 = 1e-12;
/// Allowed spread of the per-eigenvalue normalizations in [`gaussian_weak_set`].
pub const TRUNCATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperatorSet {
    operators: Vec<ComplexMatrix>,
    labels: Vec<i64>,
}

impl MeasurementOperatorSet {
    pub fn new(operators: Vec<ComplexMatrix>, labels: Vec<i64>) -> Result<Self> {
        if operators.is_empty() || operators.len() != labels.len() {
            return Err(QfcError::DimensionMismatch(format!(
                "{} operators with {} labels",
                operators.len(),
                labels.len()
            )));
        }
        let d = require_square(&operators[0], "measurement operator")?;
        if operators.iter().any(|m| m.shape() != (d, d)) {
            return Err(QfcError::DimensionMismatch(
                "measurement operators differ in shape".into(),
            ));
        }
        let set = MeasurementOperatorSet { operators, labels };
        let err = set.completeness_error();
        if err > COMPLETENESS_TOL {
            return Err(QfcError::InvalidState(format!(
                "completeness violated by {err:e}"
            )));
        }
        Ok(set)
    }

    /// Projective measurement in the computational basis, labels 0..d.
    pub fn computational_basis(d: usize) -> Self {
        let ops = (0..d).map(|i| qfc_qstate::ops::basis_projector(d, i)).collect();
        MeasurementOperatorSet {
            operators: ops,
            labels: (0..d as i64).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    /// ‖Σ M† M − I‖_max
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for m in &self.operators {
            acc += m.adjoint() * m;
        }
        max_abs(&(acc - identity(d)))
    }

    fn check_dim(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(QfcError::DimensionMismatch(format!(
                "operators of dim {} on state of dim {}",
                self.dim(),
                rho.dim()
            )));
        }
        Ok(())
    }

    /// p_m = Tr(M_m ρ M_m†)
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.check_dim(rho)?;
        Ok(self
            .operators
            .iter()
            .map(|m| (m * rho.matrix() * m.adjoint()).trace().re)
            .collect())
    }

    /// Σ_m M_m ρ M_m†
    pub fn nonselective(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_dim(rho)?;
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for m in &self.operators {
            acc += m * rho.matrix() * m.adjoint();
        }
        Ok(DensityMatrix::from_matrix_unchecked(acc))
    }

    /// Post-measurement state for a given outcome index.
    pub fn post_state(&self, rho: &DensityMatrix, index: usize) -> Result<(DensityMatrix, f64)> {
        self.check_dim(rho)?;
        let m = self.operators.get(index).ok_or(QfcError::OutOfRange {
            field: "outcome",
            value: index as f64,
        })?;
        let unnorm = m * rho.matrix() * m.adjoint();
        let p = unnorm.trace().re;
        if !(p >= IMPOSSIBLE_PROB) {
            return Err(QfcError::ImpossibleOutcome { outcome: index, prob: p });
        }
        Ok((DensityMatrix::from_matrix_unchecked(unnorm.unscale(p)), p))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub index: usize,
    pub label: i64,
    pub post: DensityMatrix,
    pub prob: f64,
}

/// Sample an outcome with probability Tr(M_m ρ M_m†) and collapse.
pub fn apply_measurement(
    rho: &DensityMatrix,
    set: &MeasurementOperatorSet,
    rng: &mut RngStream,
) -> Result<MeasurementOutcome> {
    let probs = set.probabilities(rho)?;
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > COMPLETENESS_TOL * 10.0 {
        return Err(QfcError::InvalidState(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    let u = rng.uniform() * total;
    let mut acc = 0.0;
    let mut index = probs.len() - 1;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            index = i;
            break;
        }
    }
    let (post, prob) = set.post_state(rho, index)?;
    Ok(MeasurementOutcome {
        index,
        label: set.labels[index],
        post,
        prob,
    })
}

/// Outcomes within ±ceil(6/√k) of the eigenvalue span.
pub fn default_outcome_range(k: f64, eigenvalues: &[i64]) -> Result<Vec<i64>> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(QfcError::OutOfRange { field: "k", value: k });
    }
    let lo = *eigenvalues.iter().min().ok_or(QfcError::DegenerateInput("no eigenvalues".into()))?;
    let hi = *eigenvalues.iter().max().unwrap();
    let pad = (6.0 / k.sqrt()).ceil() as i64;
    Ok((lo - pad..=hi + pad).collect())
}

fn gauss_norm_sq(k: f64, n: i64, range: impl Iterator<Item = i64>) -> f64 {
    range
        .map(|m| (-(k / 2.0) * ((n - m) as f64).powi(2)).exp())
        .sum()
}

/// M_m = Σ_n e^{−k(n−m)²/4}/𝒩_n |n⟩⟨n| for the diagonal observable with
/// spectrum `eigenvalues` (basis index i carries eigenvalue `eigenvalues[i]`).
///
/// 𝒩_n is computed over the truncated range for each eigenvalue, which makes
/// the set exactly complete. The range is rejected when these normalizations
/// differ from the untruncated one by more than [`TRUNCATION_TOL`].
pub fn gaussian_weak_set(k: f64, eigenvalues: &[i64], outcome_range: &[i64]) -> Result<MeasurementOperatorSet> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(QfcError::OutOfRange { field: "k", value: k });
    }
    if eigenvalues.is_empty() || outcome_range.is_empty() {
        return Err(QfcError::DegenerateInput("empty spectrum or outcome range".into()));
    }
    // untruncated normalization, independent of n
    let reach = (40.0 / k.sqrt()).ceil() as i64 + 1;
    let full = gauss_norm_sq(k, 0, -reach..=reach);
    let norms: Vec<f64> = eigenvalues
        .iter()
        .map(|&n| gauss_norm_sq(k, n, outcome_range.iter().copied()))
        .collect();
    let worst = norms.iter().map(|s| (s / full - 1.0).abs()).fold(0.0, f64::max);
    if worst > TRUNCATION_TOL {
        return Err(QfcError::RangeTooNarrow(worst));
    }
    let d = eigenvalues.len();
    let ops = outcome_range
        .iter()
        .map(|&m| {
            let mut op = ComplexMatrix::zeros(d, d);
            for (i, &n) in eigenvalues.iter().enumerate() {
                let w = (-(k / 4.0) * ((n - m) as f64).powi(2)).exp() / norms[i].sqrt();
                op[(i, i)] = c64(w, 0.0);
            }
            op
        })
        .collect();
    MeasurementOperatorSet::new(ops, outcome_range.to_vec())
}

/// M(μ) = (4kΔt/π)^{1/4} exp(−2kΔt (X − μ)²), spectrally.
pub fn continuous_meas_kraus(k: f64, dt: f64, x: &ComplexMatrix, mu: f64) -> Result<ComplexMatrix> {
    if !(dt > 0.0) {
        return Err(QfcError::OutOfRange { field: "dt", value: dt });
    }
    if !(k > 0.0) {
        return Err(QfcError::OutOfRange { field: "k", value: k });
    }
    require_square(x, "observable")?;
    let pref = (4.0 * k * dt / std::f64::consts::PI).powf(0.25);
    Ok(hermitian_function(x, |lam| {
        c64(pref * (-2.0 * k * dt * (lam - mu).powi(2)).exp(), 0.0)
    }))
}

/// Density of the continuous readout, Tr[M(μ)† ρ M(μ)].
pub fn readout_density(k: f64, dt: f64, x: &ComplexMatrix, rho: &DensityMatrix, mu: f64) -> Result<f64> {
    let m = continuous_meas_kraus(k, dt, x, mu)?;
    Ok((m.adjoint() * rho.matrix() * m).trace().re)
}

/// dy = ⟨X⟩dt + dW/√(8k)
pub fn record_increment(x_expect: f64, k: f64, dt: f64, dw: f64) -> f64 {
    x_expect * dt + dw / (8.0 * k).sqrt()
}

/// dW = √(8k)(dy − ⟨X⟩dt)
pub fn record_innovation(dy: f64, x_expect: f64, k: f64, dt: f64) -> f64 {
    (8.0 * k).sqrt() * (dy - x_expect * dt)
}
