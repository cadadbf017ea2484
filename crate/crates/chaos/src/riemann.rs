//! The induced rational map F_p(z) = (z² + p)/(1 − p* z²) on the Riemann
//! sphere.
//!
//! Points are carried internally as unit vectors (a, b) ∈ ℂ² with z = a/b,
//! so ∞ = (1, 0) needs no special casing and every distance is chordal.

use qfc_qstate::{DensityMatrix, PureState, QfcError, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiemannPoint {
    Finite(C64),
    Infinity,
}

impl RiemannPoint {
    pub fn finite(re: f64, im: f64) -> Self {
        RiemannPoint::Finite(C64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, RiemannPoint::Infinity)
    }

    pub fn to_homogeneous(self) -> Homogeneous {
        match self {
            RiemannPoint::Finite(z) => Homogeneous::new(z, C64::new(1.0, 0.0)),
            RiemannPoint::Infinity => Homogeneous::INFINITY,
        }
    }

    /// Amplitude ratio of ψ ∝ z|0⟩ + |1⟩; ∞ is |0⟩.
    pub fn from_pure_qubit(psi: &PureState) -> Result<Self> {
        if psi.dim() != 2 {
            return Err(QfcError::DimensionMismatch(format!("expected a qubit, got dim {}", psi.dim())));
        }
        let v = psi.amplitudes();
        Ok(Homogeneous::new(v[0], v[1]).point())
    }

    pub fn pure_state(self) -> PureState {
        let h = self.to_homogeneous();
        PureState::normalized(vec![h.a, h.b]).expect("unit homogeneous vector")
    }

    pub fn density(self) -> DensityMatrix {
        self.pure_state().density()
    }
}

/// Map parameter p = tan x · e^{iφ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapParams {
    pub p: C64,
}

impl MapParams {
    pub fn new(p: C64) -> Self {
        MapParams { p }
    }

    pub fn from_angles(x: f64, phi: f64) -> Self {
        MapParams { p: C64::from_polar(x.tan(), phi) }
    }
}

/// Normalized homogeneous coordinates of a sphere point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homogeneous {
    pub a: C64,
    pub b: C64,
}

impl Homogeneous {
    pub const INFINITY: Homogeneous = Homogeneous {
        a: C64::new(1.0, 0.0),
        b: C64::new(0.0, 0.0),
    };

    /// Scales (a, b) to unit length. Panics on (0, 0).
    pub fn new(a: C64, b: C64) -> Self {
        // scale by the larger modulus first so squares cannot overflow
        let m = a.norm().max(b.norm());
        assert!(m > 0.0 && m.is_finite(), "degenerate homogeneous vector");
        let (a, b) = (a / m, b / m);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        Homogeneous { a: a / n, b: b / n }
    }

    pub fn point(self) -> RiemannPoint {
        if self.b == C64::new(0.0, 0.0) {
            RiemannPoint::Infinity
        } else {
            RiemannPoint::Finite(self.a / self.b)
        }
    }

    pub fn map(self, p: C64) -> Self {
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        Homogeneous::new(a2 + p * b2, b2 - p.conj() * a2)
    }

    /// 2|a₁b₂ − a₂b₁|, in [0, 2].
    pub fn chordal(self, o: Homogeneous) -> f64 {
        2.0 * (self.a * o.b - o.a * self.b).norm()
    }

    /// |F_p′| measured in the chordal metric at both ends.
    pub fn spherical_derivative(self, p: C64) -> f64 {
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        let num = 2.0 * self.a.norm() * self.b.norm() * (1.0 + p.norm_sqr());
        let den = (a2 + p * b2).norm_sqr() + (b2 - p.conj() * a2).norm_sqr();
        num / den
    }

    /// The point at chordal distance `d` from self, displaced along the
    /// tangent direction of `toward` (or a fixed direction if they coincide).
    pub fn offset(self, toward: Homogeneous, d: f64) -> Self {
        let overlap = self.a.conj() * toward.a + self.b.conj() * toward.b;
        let (ta, tb) = (toward.a - overlap * self.a, toward.b - overlap * self.b);
        let tn = (ta.norm_sqr() + tb.norm_sqr()).sqrt();
        let (ta, tb) = if tn > 1e-300 {
            (ta / tn, tb / tn)
        } else {
            (-self.b.conj(), self.a.conj())
        };
        let s = 0.5 * d;
        let c = (1.0 - s * s).sqrt();
        Homogeneous::new(self.a * c + ta * s, self.b * c + tb * s)
    }

    /// Both preimages of self under F_p, in a fixed order.
    pub fn preimages(self, p: C64) -> [Homogeneous; 2] {
        let a = (self.a - p * self.b).sqrt();
        let b = (self.b + p.conj() * self.a).sqrt();
        [Homogeneous::new(a, b), Homogeneous::new(-a, b)]
    }
}

pub fn fp_map(z: RiemannPoint, p: C64) -> RiemannPoint {
    match z {
        RiemannPoint::Infinity if p == C64::new(0.0, 0.0) => RiemannPoint::Infinity,
        RiemannPoint::Infinity => RiemannPoint::Finite(-1.0 / p.conj()),
        RiemannPoint::Finite(z) => {
            let z2 = z * z;
            let den = 1.0 - p.conj() * z2;
            if den == C64::new(0.0, 0.0) {
                RiemannPoint::Infinity
            } else {
                RiemannPoint::Finite((z2 + p) / den)
            }
        }
    }
}

/// Euclidean |F_p′(z)| = 2|z|(1+|p|²)/|1 − p* z²|². Poles give +∞; at ∞ the
/// limit is 0 for p ≠ 0 and +∞ for p = 0.
pub fn fp_derivative_abs(z: RiemannPoint, p: C64) -> f64 {
    match z {
        RiemannPoint::Infinity if p == C64::new(0.0, 0.0) => f64::INFINITY,
        RiemannPoint::Infinity => 0.0,
        RiemannPoint::Finite(z) => {
            let den = (1.0 - p.conj() * z * z).norm_sqr();
            if den == 0.0 {
                f64::INFINITY
            } else {
                2.0 * z.norm() * (1.0 + p.norm_sqr()) / den
            }
        }
    }
}

pub fn spherical_derivative(z: RiemannPoint, p: C64) -> f64 {
    z.to_homogeneous().spherical_derivative(p)
}

pub fn chordal_distance(z: RiemannPoint, w: RiemannPoint) -> f64 {
    z.to_homogeneous().chordal(w.to_homogeneous())
}
