//! Explicit global control maps `v: R -> S²` and their identities.
//!
//! Two one-parameter families are provided:
//!
//! * [`MapKind::MapI`]: a spin that winds slowly around the `v3` axis while
//!   flipping from `(0, -1, 0)` to `(0, 1, 0)` across `r = 0`; its
//!   azimuthal Wronskian `v2 v1' - v1 v2'` is the constant `-mu sin(eps^2)`.
//! * [`MapKind::MapII`]: a great-circle map at fixed azimuth `k`, flipping
//!   from `-(cos k, sin k, 0)` to `(cos k, sin k, 0)`; its Wronskian vanishes.
//!
//! Both solve the reduced profile system
//!
//! ```text
//! v2 v1'' - v1 v2'' = 0
//! v3'' + |v'|^2 v3 - (alpha + beta - 2 alpha v3^2) v3 (1 - v3^2) / eps^2 = 0
//! ```
//!
//! All evaluations factor `exp(max(2 mu r cos(eps^2), 0))` out of numerator
//! and denominator, so `|mu r|` in the thousands is harmless.

mod jet;

use crate::error::{Error, Result};
use crate::richardson;
use crate::scalar::Real;

pub use jet::MapJet;

/// Largest admitted singular-limit parameter.
pub const EPSILON_MAX: f64 = 0.5;

/// Anisotropy coefficients `alpha`, `beta` and the singular-limit parameter `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams<T> {
    alpha: T,
    beta: T,
    epsilon: T,
    mu: T,
}

impl<T: Real> PhysParams<T> {
    /// Validates `alpha + beta > 0`, `beta > 0` and `0 < eps <= 0.5`.
    pub fn new(alpha: T, beta: T, epsilon: T) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && epsilon.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if alpha + beta <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "alpha + beta must be positive (alpha = {alpha}, beta = {beta})"
            )));
        }
        if beta <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if epsilon <= T::zero() || epsilon > T::lit(EPSILON_MAX) {
            return Err(Error::InvalidParams(format!(
                "epsilon must lie in (0, {EPSILON_MAX}], got {epsilon}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            epsilon,
            mu: (alpha + beta).sqrt() / epsilon,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// `sqrt(alpha + beta) / eps`.
    pub fn mu(&self) -> T {
        self.mu
    }

    /// `alpha + beta`.
    pub fn stiffness(&self) -> T {
        self.alpha + self.beta
    }

    /// Same anisotropy, different `eps`.
    pub fn with_epsilon(&self, epsilon: T) -> Result<Self> {
        Self::new(self.alpha, self.beta, epsilon)
    }

    /// Bistable nonlinearity `v3 (1 - v3^2) (alpha + beta - 2 alpha v3^2) / eps^2`,
    /// with `1 - v3^2` supplied by the caller so it can be formed without cancellation.
    pub(crate) fn anisotropy_force(&self, v3: T, one_minus_v3sq: T) -> T {
        let two = T::lit(2.0);
        v3 * one_minus_v3sq * (self.stiffness() - two * self.alpha * v3 * v3)
            / (self.epsilon * self.epsilon)
    }
}

/// A point of R³, normally on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spin<T> {
    pub v1: T,
    pub v2: T,
    pub v3: T,
}

impl<T: Real> Spin<T> {
    pub fn new(v1: T, v2: T, v3: T) -> Self {
        Self { v1, v2, v3 }
    }

    pub fn from_array(v: [T; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.v1, self.v2, self.v3]
    }

    pub fn norm(self) -> T {
        (self.v1 * self.v1 + self.v2 * self.v2 + self.v3 * self.v3).sqrt()
    }

    /// Euclidean distance to `other`.
    pub fn distance(self, other: Self) -> T {
        let d = Self::new(self.v1 - other.v1, self.v2 - other.v2, self.v3 - other.v3);
        d.norm()
    }

    pub fn is_finite(self) -> bool {
        self.v1.is_finite() && self.v2.is_finite() && self.v3.is_finite()
    }
}

impl<T: Real> std::ops::Neg for Spin<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.v1, -self.v2, -self.v3)
    }
}

/// Which control map to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind<T> {
    MapI,
    /// Great-circle map at azimuth `k` (radians).
    MapII {
        k: T,
    },
}

impl<T: Real> MapKind<T> {
    pub fn map_ii(k: T) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidParams(format!(
                "azimuth k must be finite, got {k}"
            )));
        }
        Ok(MapKind::MapII { k })
    }

    pub fn label(&self) -> String {
        match self {
            MapKind::MapI => "map-I".to_string(),
            MapKind::MapII { k } => format!("map-II(k={k})"),
        }
    }
}

/// First derivatives of all components and the second derivative of `v3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapDerivatives<T> {
    pub dv: [T; 3],
    pub ddv3: T,
}

/// Residuals of the two profile equations together with the magnitude of
/// their largest individual term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeResiduals<T> {
    /// `v2 v1'' - v1 v2''`.
    pub res1: T,
    /// `v3'' + |v'|^2 v3 - (alpha + beta - 2 alpha v3^2) v3 (1 - v3^2) / eps^2`,
    /// with `|v'|^2 = (W^2 + v3'^2) / (1 - v3^2)`.
    pub res2: T,
    pub scale1: T,
    pub scale2: T,
}

impl<T: Real> OdeResiduals<T> {
    pub fn relative1(&self) -> T {
        relative(self.res1, self.scale1)
    }

    pub fn relative2(&self) -> T {
        relative(self.res2, self.scale2)
    }
}

fn relative<T: Real>(res: T, scale: T) -> T {
    if scale > T::zero() {
        res.abs() / scale
    } else {
        res.abs()
    }
}

/// Evaluates `v^eps(r)`.
pub fn eval_map<T: Real>(p: &PhysParams<T>, kind: MapKind<T>, r: T) -> Result<Spin<T>> {
    let spin = match kind {
        MapKind::MapI => jet::map_i_value(p, r),
        MapKind::MapII { k } => jet::map_ii_value(p, k, r),
    };
    if spin.is_finite() {
        Ok(spin)
    } else {
        Err(overflow(p, r))
    }
}

/// Value, first and second derivatives of `v^eps` at `r`.
pub fn map_jet<T: Real>(p: &PhysParams<T>, kind: MapKind<T>, r: T) -> Result<MapJet<T>> {
    let jet = match kind {
        MapKind::MapI => jet::map_i_jet(p, r),
        MapKind::MapII { k } => jet::map_ii_jet(p, k, r),
    };
    if jet.is_finite() {
        Ok(jet)
    } else {
        Err(overflow(p, r))
    }
}

/// Closed-form `(v1', v2', v3')` and `v3''`.
pub fn eval_map_derivatives<T: Real>(
    p: &PhysParams<T>,
    kind: MapKind<T>,
    r: T,
) -> Result<MapDerivatives<T>> {
    let jet = map_jet(p, kind, r)?;
    Ok(MapDerivatives {
        dv: jet.d1,
        ddv3: jet.d2[2],
    })
}

/// Residuals of the profile system at `r`.
///
/// Fails with [`Error::DegeneratePole`] where `|v3| = 1` within `1e-12`,
/// since `|v'|^2` is reconstructed through `1 / (1 - v3^2)`.
pub fn ode_residuals<T: Real>(
    p: &PhysParams<T>,
    kind: MapKind<T>,
    r: T,
) -> Result<OdeResiduals<T>> {
    let jet = map_jet(p, kind, r)?;
    let v = jet.value;
    if T::one() - v.v3.abs() <= T::lit(1e-12) {
        return Err(Error::DegeneratePole { r: r.as_f64() });
    }
    let w = jet.wronskian();
    let rho2 = jet.one_minus_v3sq;
    let grad_sq = (w * w + jet.d1[2] * jet.d1[2]) / rho2;
    let curvature_term = grad_sq * v.v3;
    let force = p.anisotropy_force(v.v3, rho2);
    let (res1, scale1) = jet.azimuthal_curvature();
    Ok(OdeResiduals {
        res1,
        res2: jet.d2[2] + curvature_term - force,
        scale1,
        scale2: jet.d2[2].abs().max(curvature_term.abs()).max(force.abs()),
    })
}

/// Zero of `v3'` for map I:
/// `eps ln[(alpha + beta/2)^2 sin^2(eps^2) + (beta/2)^2 cos^2(eps^2)] / (4 sqrt(alpha + beta) cos(eps^2))`.
pub fn critical_point_v3<T: Real>(p: &PhysParams<T>) -> T {
    let e2 = p.epsilon * p.epsilon;
    let (s, c) = e2.sin_cos();
    let m = p.beta * T::lit(0.5);
    let am = p.alpha + m;
    let arg = am * am * s * s + m * m * c * c;
    p.epsilon * arg.ln() / (T::lit(4.0) * p.stiffness().sqrt() * c)
}

/// Zero of `v3'` for map II, where `exp(2 mu r) = beta / 2` and the spin
/// passes through the pole `v3 = 1`.
pub fn critical_point_v3_map_ii<T: Real>(p: &PhysParams<T>) -> T {
    (p.beta * T::lit(0.5)).ln() / (T::lit(2.0) * p.mu)
}

/// Small-`eps` value of map I at the front,
/// `(0, (2 - beta) / sqrt(8 alpha + (2 + beta)^2), 2 sqrt(2) sqrt(alpha + beta) / sqrt(8 alpha + (2 + beta)^2))`.
pub fn front_value<T: Real>(p: &PhysParams<T>) -> Spin<T> {
    let two = T::lit(2.0);
    let den = (T::lit(8.0) * p.alpha + (two + p.beta) * (two + p.beta)).sqrt();
    Spin::new(
        T::zero(),
        (two - p.beta) / den,
        two * two.sqrt() * p.stiffness().sqrt() / den,
    )
}

/// Small-`eps` value of map II at `r = 0`.
pub fn front_value_map_ii<T: Real>(p: &PhysParams<T>, k: T) -> Spin<T> {
    let half_beta = p.beta * T::lit(0.5);
    let one = T::one();
    let den = ((one + half_beta) * (one + half_beta) + T::lit(2.0) * p.alpha).sqrt();
    let g = (one - half_beta) / den;
    let (sk, ck) = k.sin_cos();
    Spin::new(g * ck, g * sk, (T::lit(2.0) * p.stiffness()).sqrt() / den)
}

/// Pointwise `eps -> 0` limit of `v^eps(r)`.
///
/// Map II follows `(cos k, sin k, 0)` for `r > 0` and its negative for `r < 0`.
/// Map I follows its own formula: `(0, 1, 0)` for `r > 0`, `(0, -1, 0)` for `r < 0`.
pub fn limit_value<T: Real>(p: &PhysParams<T>, kind: MapKind<T>, r: T) -> Spin<T> {
    let zero = T::zero();
    match kind {
        MapKind::MapI => {
            if r > zero {
                Spin::new(zero, T::one(), zero)
            } else if r < zero {
                Spin::new(zero, -T::one(), zero)
            } else {
                front_value(p)
            }
        }
        MapKind::MapII { k } => {
            let (sk, ck) = k.sin_cos();
            let plus = Spin::new(ck, sk, zero);
            if r > zero {
                plus
            } else if r < zero {
                -plus
            } else {
                front_value_map_ii(p, k)
            }
        }
    }
}

/// Outcome of cross-checking closed-form derivatives against Richardson
/// extrapolated central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck<T> {
    pub closed: MapDerivatives<T>,
    pub numeric: MapDerivatives<T>,
    /// Largest component deviation of `v'`, relative to `max_i |v_i'|`.
    pub rel_first: T,
    /// Deviation of `v3''`, relative to `max(|v3''|, mu |v3'|)`.
    pub rel_second: T,
}

/// Relative disagreement beyond which a closed form is declared wrong.
pub const TRANSCRIPTION_TOLERANCE: f64 = 1e-4;

/// Compares [`eval_map_derivatives`] with Richardson-extrapolated central
/// differences of [`eval_map`] (two extrapolation levels, base step `1e-4 eps`
/// for first derivatives and `1e-2 eps` for the second, where `1e-4 eps`
/// would leave roundoff of order `u / h^2`).
pub fn verify_derivatives<T: Real>(
    p: &PhysParams<T>,
    kind: MapKind<T>,
    r: T,
) -> Result<DerivativeCheck<T>> {
    let closed = eval_map_derivatives(p, kind, r)?;
    let numeric = fd_derivatives(p, kind, r)?;
    let tiny = T::min_positive_value();
    let scale1 = closed.dv.iter().fold(tiny, |m, d| m.max(d.abs()));
    let names = ["v1'", "v2'", "v3'"];
    let mut rel_first = T::zero();
    let mut worst = 0;
    for i in 0..3 {
        let rel = (closed.dv[i] - numeric.dv[i]).abs() / scale1;
        if rel > rel_first {
            rel_first = rel;
            worst = i;
        }
    }
    let scale2 = closed.ddv3.abs().max(p.mu() * closed.dv[2].abs()).max(tiny);
    let rel_second = (closed.ddv3 - numeric.ddv3).abs() / scale2;
    let tol = T::lit(TRANSCRIPTION_TOLERANCE);
    if rel_first > tol {
        return Err(Error::Transcription {
            r: r.as_f64(),
            component: names[worst],
            closed: closed.dv[worst].as_f64(),
            numeric: numeric.dv[worst].as_f64(),
        });
    }
    if rel_second > tol {
        return Err(Error::Transcription {
            r: r.as_f64(),
            component: "v3''",
            closed: closed.ddv3.as_f64(),
            numeric: numeric.ddv3.as_f64(),
        });
    }
    Ok(DerivativeCheck {
        closed,
        numeric,
        rel_first,
        rel_second,
    })
}

/// Finite-difference derivatives of the map, independent of the closed forms.
pub fn fd_derivatives<T: Real>(
    p: &PhysParams<T>,
    kind: MapKind<T>,
    r: T,
) -> Result<MapDerivatives<T>> {
    // validate once so the closure below cannot fail silently
    eval_map(p, kind, r)?;
    let f = |x: T| {
        eval_map(p, kind, x)
            .map(Spin::to_array)
            .unwrap_or([T::nan(); 3])
    };
    let dv = richardson::first(f, r, T::lit(1e-4) * p.epsilon(), 2);
    let ddv = richardson::second(f, r, T::lit(1e-2) * p.epsilon(), 2);
    let out = MapDerivatives { dv, ddv3: ddv[2] };
    if out.dv.iter().all(|d| d.is_finite()) && out.ddv3.is_finite() {
        Ok(out)
    } else {
        Err(overflow(p, r))
    }
}

fn overflow<T: Real>(p: &PhysParams<T>, r: T) -> Error {
    Error::EvaluationOverflow {
        r: r.as_f64(),
        mu: p.mu().as_f64(),
    }
}

#[cfg(test)]
mod tests;
